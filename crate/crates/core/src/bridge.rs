//! Correspondence between circular SD steady states and DQOP steady states:
//! the equivalent mean mass, level-set projection and lifting of circles.

use crate::annular::{annular_profile, annular_threshold, solve_annular, AnnularSolution};
use crate::dimple::{dimple_profile, solve_dimple_from_radius, DimpleSolution};
use crate::domain::DiskDomain;
use crate::error::{Error, Result};
use crate::profile::RadialProfile;
use crate::quad::simpson;
use serde::Serialize;
use std::f64::consts::PI;

/// Scale separation used by [`bridge_sweep`], loose enough for `ε = 0.04`
/// with `δ = 0.1` on the unit disk.
pub const BRIDGE_SCALE_RATIO: f64 = 2.0;

const MASS_PANELS: usize = 4000;
const BISECTION_STEPS: usize = 200;

/// `r₀ = √((1+ū)/2) R0` for `ū ∈ [-1, 1)`.
pub fn mass_to_radius(u_bar: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain { what: "disk radius", value: radius });
    }
    if !(u_bar >= -1.0 && u_bar < 1.0) {
        return Err(Error::Domain { what: "mass_to_radius", value: u_bar });
    }
    Ok(((1.0 + u_bar) / 2.0).sqrt() * radius)
}

/// `ū = (2r₀² - R0²)/R0²` for `r₀ ∈ [0, R0)`.
pub fn radius_to_mass(r0: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain { what: "disk radius", value: radius });
    }
    if !(r0 >= 0.0 && r0 < radius) {
        return Err(Error::Domain { what: "radius_to_mass", value: r0 });
    }
    let s = r0 / radius;
    Ok(2.0 * s * s - 1.0)
}

/// Mean mass and effective radius of one configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MassRadiusPair {
    pub u_bar: f64,
    pub r0: f64,
    #[serde(rename = "R0")]
    pub radius: f64,
}

impl MassRadiusPair {
    pub fn from_mass(u_bar: f64, radius: f64) -> Result<Self> {
        Ok(MassRadiusPair { u_bar, r0: mass_to_radius(u_bar, radius)?, radius })
    }

    pub fn from_radius(r0: f64, radius: f64) -> Result<Self> {
        Ok(MassRadiusPair { u_bar: radius_to_mass(r0, radius)?, r0, radius })
    }

    /// Area of the `u = -1` phase, `½|Ω|(1 - ū) = π(R0² - r₀²)`, with `u = +1`
    /// inside the circle.
    pub fn enclosed_area(&self) -> f64 {
        0.5 * PI * self.radius * self.radius * (1.0 - self.u_bar)
    }

    /// Area of the `u = +1` phase, `πr₀²`.
    pub fn inner_area(&self) -> f64 {
        PI * self.r0 * self.r0
    }
}

/// Zero crossings of `values` over `grid`, linearly interpolated. Zero
/// samples between two opposite signs count once, at their mean radius;
/// touching zeros without a sign change do not count.
fn crossings(grid: &[f64], values: &[f64]) -> Vec<(f64, usize, usize)> {
    let signed: Vec<usize> = (0..values.len()).filter(|&i| values[i] != 0.0).collect();
    let mut roots = Vec::new();
    for w in signed.windows(2) {
        let (i, j) = (w[0], w[1]);
        let (a, b) = (values[i], values[j]);
        if (a < 0.0) == (b < 0.0) {
            continue;
        }
        let r = if j == i + 1 {
            grid[i] + (grid[j] - grid[i]) * a / (a - b)
        } else {
            grid[i + 1..j].iter().sum::<f64>() / (j - i - 1) as f64
        };
        roots.push((r, i, j));
    }
    roots
}

fn single_crossing(profile: &RadialProfile) -> Result<(f64, usize, usize)> {
    let roots = crossings(&profile.grid, &profile.values);
    match roots.len() {
        0 => Err(Error::NoCrossing),
        1 => Ok(roots[0]),
        _ => Err(Error::MultipleCrossings(roots.iter().map(|c| c.0).collect())),
    }
}

/// Radius where the sampled profile crosses 0, by linear interpolation.
pub fn project_level_set(profile: &RadialProfile) -> Result<f64> {
    single_crossing(profile).map(|c| c.0)
}

/// Same as [`project_level_set`], then refined by bisection of the analytic
/// profile `u` inside the bracketing grid interval.
pub fn project_level_set_refined<F: Fn(f64) -> f64>(profile: &RadialProfile, u: F) -> Result<f64> {
    let (linear, i, j) = single_crossing(profile)?;
    let (mut a, mut b) = (profile.grid[i], profile.grid[j]);
    let (mut fa, fb) = (u(a), u(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa < 0.0) == (fb < 0.0) {
        return Ok(linear);
    }
    for _ in 0..BISECTION_STEPS {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = u(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Exact steady state a circle lifts to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LiftFamily {
    Annular(AnnularSolution),
    Dimple(DimpleSolution),
}

impl LiftFamily {
    pub fn domain(&self) -> DiskDomain {
        match self {
            LiftFamily::Annular(s) => s.domain,
            LiftFamily::Dimple(s) => s.domain,
        }
    }

    pub fn u_at(&self, r: f64) -> f64 {
        match self {
            LiftFamily::Annular(s) => s.u_at(r),
            LiftFamily::Dimple(s) => s.u_at(r),
        }
    }

    pub fn lambda(&self) -> f64 {
        match self {
            LiftFamily::Annular(s) => s.lambda,
            LiftFamily::Dimple(s) => s.lambda,
        }
    }

    /// Scaled free energy of the exact profile.
    pub fn energy(&self) -> f64 {
        match self {
            LiftFamily::Annular(s) => s.energy(),
            LiftFamily::Dimple(s) => s.energy(),
        }
    }

    /// `(2/R0²) ∫ u r dr`: plateaus exactly, Simpson on the smooth part.
    pub fn mean_mass(&self) -> f64 {
        match self {
            LiftFamily::Annular(s) => s.mean_mass(),
            LiftFamily::Dimple(s) => {
                let big = s.domain.radius;
                let b = s.r_plus;
                let core = simpson(|r| s.u_at(r) * r, 0.0, b, MASS_PANELS);
                2.0 * (core - 0.5 * (big * big - b * b)) / (big * big)
            }
        }
    }
}

/// Circle of radius `r₀` lifted to a DQOP steady state.
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    pub family: LiftFamily,
    pub profile: RadialProfile,
}

impl Lift {
    /// Level set of the sampled profile, refined on the exact one.
    pub fn level_set(&self) -> Result<f64> {
        project_level_set_refined(&self.profile, |r| self.family.u_at(r))
    }
}

/// Lifts the circle of radius `r₀` to the exact steady state of equal mean
/// mass, sampled on `n + 1` uniform nodes: annular when `r₀/ε` exceeds
/// [`annular_threshold`], dimple otherwise.
pub fn lift_circle(r0: f64, domain: DiskDomain, n: usize) -> Result<Lift> {
    radius_to_mass(r0, domain.radius)?;
    if n < 2 {
        return Err(Error::InvalidProfile(format!("grid with {n} intervals")));
    }
    let grid = domain.uniform_grid(n);
    let q0 = r0 / domain.epsilon;
    if q0 > annular_threshold() {
        let sol = solve_annular(q0, domain)?;
        let profile = annular_profile(&sol, &grid)?;
        Ok(Lift { family: LiftFamily::Annular(sol), profile })
    } else {
        let sol = solve_dimple_from_radius(r0, domain)?;
        let profile = dimple_profile(&sol, &grid)?;
        Ok(Lift { family: LiftFamily::Dimple(sol), profile })
    }
}

/// Perimeter limit `2π² r₀/|Ω|` of the lifted energy as `ε → 0`.
pub fn energy_limit(r0: f64, domain: &DiskDomain) -> f64 {
    2.0 * PI * PI * r0 / domain.area()
}

/// One row of the `ε` sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BridgeRow {
    pub epsilon: f64,
    pub r0: f64,
    pub u_bar: f64,
    pub r_level: f64,
    pub abs_err: f64,
    pub energy: f64,
    pub energy_limit: f64,
}

impl BridgeRow {
    pub const CSV_HEADER: &'static str = "epsilon,r0,u_bar,r_level,abs_err,energy,energy_limit";

    pub fn values(&self) -> [f64; 7] {
        [self.epsilon, self.r0, self.u_bar, self.r_level, self.abs_err, self.energy, self.energy_limit]
    }
}

/// Lifts the circle of radius `r₀` for each `ε` on the disk `(R0, δ)` and
/// projects it back.
pub fn bridge_sweep(epsilons: &[f64], r0: f64, radius: f64, delta: f64, n: usize) -> Result<Vec<BridgeRow>> {
    epsilons
        .iter()
        .map(|&eps| {
            let domain = DiskDomain::with_ratio(radius, delta, eps, BRIDGE_SCALE_RATIO)?;
            let lift = lift_circle(r0, domain, n)?;
            let r_level = lift.level_set()?;
            Ok(BridgeRow {
                epsilon: eps,
                r0,
                u_bar: lift.family.mean_mass(),
                r_level,
                abs_err: (r_level - r0).abs(),
                energy: lift.family.energy(),
                energy_limit: energy_limit(r0, &domain),
            })
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Domain { what: "log-log fit length", value: x.len() as f64 });
    }
    for &v in x.iter().chain(y) {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain { what: "log-log fit", value: v });
        }
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// Richardson extrapolation of `f(h)` and `f(h/2)` for an error of order `p`.
pub fn richardson(coarse: f64, fine: f64, order: f64) -> f64 {
    let s = 2f64.powf(order);
    (s * fine - coarse) / (s - 1.0)
}
