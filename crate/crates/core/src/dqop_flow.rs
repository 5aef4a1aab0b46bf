//! Radial deep quench obstacle dynamics
//! `u_t = ∇·(M(u)∇w)`, `w ∈ -u - ε²Δu + ∂I_{[-1,1]}(u)`, `M(u) = 1 - u²`.
//!
//! Space is a vertex-centred finite-volume grid in `r`: node `i` owns the
//! annulus between neighbouring midpoints, with weight `m_i = ∫ r dr` over it,
//! and neighbours interact through edge coefficients `c_e = r_e/Δr_e`. The
//! discrete energy is `F_h = Σ m_i (1 - u_i²)/2 + (ε²/2) Σ c_e (Δ_e u)²`.
//!
//! One step solves, with mobility frozen at `u^n` and the concave part explicit,
//!
//! ```text
//! m_i (u_i - u_i^n) = τ Σ_e M_e c_e (w_j - w_i)
//! m_i w_i = -m_i u_i^n - ε² Σ_e c_e (u_j - u_i) + m_i μ_i,   μ_i ∈ ∂I(u_i)
//! ```
//!
//! by a primal-dual active-set iteration. The first line telescopes, so mass is
//! conserved to rounding, and the splitting gives `F_h(u^{n+1}) ≤ F_h(u^n)`.

use crate::annular::{annular_profile, AnnularSolution};
use crate::error::{Error, Result};
use crate::linalg::Banded;
use crate::profile::RadialProfile;
use crate::trace::{DqopSample, FlowTrace};
use std::f64::consts::PI;

/// Edge mobility built from the node values of `u^n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MobilityAverage {
    /// `M((u_i + u_j)/2)`.
    #[default]
    Midpoint,
    /// `2 M_i M_j / (M_i + M_j)`, zero when either node is a pure phase.
    Harmonic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DqopOptions {
    /// Inclusion residual accepted on the inactive set.
    pub active_set_tol: f64,
    pub max_active_set_iter: usize,
    pub max_halvings: usize,
    pub mobility: MobilityAverage,
}

impl Default for DqopOptions {
    fn default() -> Self {
        DqopOptions { active_set_tol: 1e-9, max_active_set_iter: 50, max_halvings: 20, mobility: MobilityAverage::Midpoint }
    }
}

/// Profile, chemical potential on the same grid, and time.
#[derive(Clone, Debug, PartialEq)]
pub struct DqopState {
    pub profile: RadialProfile,
    pub w: Vec<f64>,
    pub time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Diagnostics {
    pub energy: f64,
    pub entropy: f64,
    pub u_bar: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepInfo {
    /// Step actually taken after halvings.
    pub tau: f64,
    pub halvings: usize,
    pub active_set_iterations: usize,
    /// Largest `|μ|` on nodes solved as free.
    pub inclusion_residual: f64,
    /// Largest wrong-signed multiplier on nodes held at `±1`.
    pub sign_violation: f64,
    pub mass_change: f64,
    pub energy_change: f64,
}

/// Finite-volume weights of a radial grid.
#[derive(Clone, Debug)]
struct FvGrid {
    m: Vec<f64>,
    c: Vec<f64>,
}

impl FvGrid {
    fn new(r: &[f64]) -> Self {
        let n = r.len();
        let mut b = Vec::with_capacity(n + 1);
        b.push(r[0]);
        for i in 1..n {
            b.push(0.5 * (r[i - 1] + r[i]));
        }
        b.push(r[n - 1]);
        let m = (0..n).map(|i| 0.5 * (b[i + 1] * b[i + 1] - b[i] * b[i])).collect();
        let c = (0..n - 1).map(|e| b[e + 1] / (r[e + 1] - r[e])).collect();
        FvGrid { m, c }
    }

    /// `(L u)_i = Σ_e c_e (u_j - u_i)`.
    fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        let mut out = vec![0.0; n];
        for (e, &c) in self.c.iter().enumerate() {
            let flux = c * (u[e + 1] - u[e]);
            out[e] += flux;
            out[e + 1] -= flux;
        }
        out
    }

    /// `Σ m_i u_i`, equal to `∫ u r dr`.
    fn moment(&self, u: &[f64]) -> f64 {
        self.m.iter().zip(u).map(|(m, u)| m * u).sum()
    }

    /// `F_h(u)`.
    fn free_energy(&self, u: &[f64], eps: f64) -> f64 {
        let bulk: f64 = self.m.iter().zip(u).map(|(m, u)| 0.5 * m * (1.0 - u * u)).sum();
        let grad: f64 = self.c.iter().enumerate().map(|(e, c)| c * (u[e + 1] - u[e]).powi(2)).sum();
        bulk + 0.5 * eps * eps * grad
    }
}

fn mobility(u: f64) -> f64 {
    (1.0 - u * u).max(0.0)
}

fn edge_mobility(u: &[f64], kind: MobilityAverage) -> Vec<f64> {
    (0..u.len() - 1)
        .map(|e| match kind {
            MobilityAverage::Midpoint => mobility(0.5 * (u[e] + u[e + 1])),
            MobilityAverage::Harmonic => {
                let (a, b) = (mobility(u[e]), mobility(u[e + 1]));
                if a == 0.0 || b == 0.0 {
                    0.0
                } else {
                    2.0 * a * b / (a + b)
                }
            }
        })
        .collect()
}

fn entropy_density(u: f64) -> f64 {
    let xlnx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    xlnx(1.0 - u) + xlnx(1.0 + u)
}

/// `E`, `Ent` and `ū` of a profile, by finite-volume quadrature with the
/// `2πr` weight.
pub fn profile_diagnostics(profile: &RadialProfile) -> Diagnostics {
    let g = FvGrid::new(&profile.grid);
    let d = &profile.domain;
    let area = d.area();
    let u = &profile.values;
    Diagnostics {
        energy: 4.0 * PI * g.free_energy(u, d.epsilon) / (d.epsilon * area),
        entropy: 2.0 * PI * g.m.iter().zip(u).map(|(m, &u)| m * entropy_density(u)).sum::<f64>() / area,
        u_bar: 2.0 * PI * g.moment(u) / area,
    }
}

pub fn diagnostics(state: &DqopState) -> Diagnostics {
    profile_diagnostics(&state.profile)
}

impl DqopState {
    /// State at `t = 0` with `w` from the inclusion with zero multiplier.
    pub fn new(profile: RadialProfile) -> Result<Self> {
        if profile.len() < 3 {
            return Err(Error::InvalidProfile("need at least 3 grid points".into()));
        }
        if let Some(u) = profile.values.iter().find(|u| !(u.abs() <= 1.0)) {
            return Err(Error::InvalidProfile(format!("value {u} outside [-1, 1]")));
        }
        let g = FvGrid::new(&profile.grid);
        let eps2 = profile.domain.epsilon.powi(2);
        let lap = g.laplacian(&profile.values);
        let w = (0..profile.len()).map(|i| -profile.values[i] - eps2 * lap[i] / g.m[i]).collect();
        Ok(DqopState { profile, w, time: 0.0 })
    }

    /// Largest inclusion residual `|w + u^n + ε²Δ_h u|` over nodes strictly
    /// inside `(-1, 1)`, taking `u^n = u` (steady form).
    pub fn inclusion_residual(&self) -> f64 {
        let g = FvGrid::new(&self.profile.grid);
        let eps2 = self.profile.domain.epsilon.powi(2);
        let u = &self.profile.values;
        let lap = g.laplacian(u);
        (0..u.len())
            .filter(|&i| u[i].abs() < 1.0)
            .map(|i| (self.w[i] + u[i] + eps2 * lap[i] / g.m[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Overshoot of `±1` on the free set treated as rounding.
const BOUND_TOL: f64 = 1e-13;
/// Wrong-signed multiplier on the active set treated as rounding.
const MULTIPLIER_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Free,
    Lower,
    Upper,
}

struct Solved {
    u: Vec<f64>,
    w: Vec<f64>,
    iterations: usize,
    residual: f64,
    sign_violation: f64,
}

/// One semi-implicit obstacle solve at fixed `τ`.
fn obstacle_solve(g: &FvGrid, un: &[f64], eps: f64, tau: f64, opts: &DqopOptions) -> Result<Solved> {
    let n = un.len();
    let eps2 = eps * eps;
    let mob = edge_mobility(un, opts.mobility);
    // nodes with no mobile edge cannot change and are never constrained
    let frozen: Vec<bool> = (0..n)
        .map(|i| (i == 0 || mob[i - 1] == 0.0) && (i + 1 == n || mob[i] == 0.0))
        .collect();
    let mut sets: Vec<Node> = (0..n)
        .map(|i| match un[i] {
            _ if frozen[i] => Node::Free,
            v if v <= -1.0 => Node::Lower,
            v if v >= 1.0 => Node::Upper,
            _ => Node::Free,
        })
        .collect();
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_active_set_iter {
        let mut a = Banded::zeros(2 * n, 3, 3);
        let mut rhs = vec![0.0; 2 * n];
        for i in 0..n {
            let (ru, rw) = (2 * i, 2 * i + 1);
            // mass rows are divided by m_i so an isolated node keeps u^n exactly
            a.add(ru, ru, 1.0);
            rhs[ru] = un[i];
            match sets[i] {
                Node::Free => {
                    a.add(rw, rw, g.m[i]);
                    rhs[rw] = -g.m[i] * un[i];
                }
                Node::Lower => {
                    a.add(rw, ru, 1.0);
                    rhs[rw] = -1.0;
                }
                Node::Upper => {
                    a.add(rw, ru, 1.0);
                    rhs[rw] = 1.0;
                }
            }
        }
        for (e, &c) in g.c.iter().enumerate() {
            let (i, j) = (e, e + 1);
            let k = tau * mob[e] * c;
            if k != 0.0 {
                let (ki, kj) = (k / g.m[i], k / g.m[j]);
                a.add(2 * i, 2 * i + 1, ki);
                a.add(2 * i, 2 * j + 1, -ki);
                a.add(2 * j, 2 * j + 1, kj);
                a.add(2 * j, 2 * i + 1, -kj);
            }
            let s = eps2 * c;
            if sets[i] == Node::Free {
                a.add(2 * i + 1, 2 * i, -s);
                a.add(2 * i + 1, 2 * j, s);
            }
            if sets[j] == Node::Free {
                a.add(2 * j + 1, 2 * j, -s);
                a.add(2 * j + 1, 2 * i, s);
            }
        }
        let lu = a.clone().factor().map_err(|_| Error::ObstacleSolveFailed { residual })?;
        let mut z = lu.solve(&rhs);
        // one step of iterative refinement
        let az = a.mul_vec(&z);
        let r: Vec<f64> = rhs.iter().zip(&az).map(|(b, y)| b - y).collect();
        for (zi, di) in z.iter_mut().zip(lu.solve(&r)) {
            *zi += di;
        }
        let u: Vec<f64> = (0..n).map(|i| z[2 * i]).collect();
        let w: Vec<f64> = (0..n).map(|i| z[2 * i + 1]).collect();
        let lap = g.laplacian(&u);
        // multiplier of the inclusion, zero on the free set by construction
        let mu: Vec<f64> = (0..n).map(|i| w[i] + un[i] + eps2 * lap[i] / g.m[i]).collect();
        // rounding-level overshoot or multipliers of the wrong sign are ignored
        let next: Vec<Node> = (0..n)
            .map(|i| match sets[i] {
                _ if frozen[i] => Node::Free,
                Node::Free if u[i] > 1.0 + BOUND_TOL => Node::Upper,
                Node::Free if u[i] < -1.0 - BOUND_TOL => Node::Lower,
                Node::Upper if mu[i] < -MULTIPLIER_TOL => Node::Free,
                Node::Lower if mu[i] > MULTIPLIER_TOL => Node::Free,
                set => set,
            })
            .collect();
        residual = (0..n).filter(|&i| sets[i] == Node::Free).map(|i| mu[i].abs()).fold(0.0, f64::max);
        if next == sets {
            if !(residual <= opts.active_set_tol) {
                return Err(Error::ObstacleSolveFailed { residual });
            }
            let u = (0..n)
                .map(|i| match sets[i] {
                    Node::Upper => 1.0,
                    Node::Lower => -1.0,
                    Node::Free => u[i].clamp(-1.0, 1.0),
                })
                .collect();
            let sign_violation = (0..n)
                .map(|i| match sets[i] {
                    Node::Upper => (-mu[i]).max(0.0),
                    Node::Lower => mu[i].max(0.0),
                    Node::Free => 0.0,
                })
                .fold(0.0, f64::max);
            return Ok(Solved { u, w, iterations: iter, residual, sign_violation });
        }
        sets = next;
    }
    Err(Error::ObstacleSolveFailed { residual })
}

/// Advances `state` by `tau`, halving the step while the energy would rise or
/// the active-set iteration fails.
pub fn dqop_step(state: &DqopState, tau: f64, opts: &DqopOptions) -> Result<(DqopState, StepInfo)> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain { what: "time step", value: tau });
    }
    let p = &state.profile;
    let g = FvGrid::new(&p.grid);
    let eps = p.domain.epsilon;
    let e_old = g.free_energy(&p.values, eps);
    let mass_old = g.moment(&p.values);
    let mut step = tau;
    for halvings in 0..=opts.max_halvings {
        let solved = match obstacle_solve(&g, &p.values, eps, step, opts) {
            Ok(s) => s,
            Err(e) if halvings == opts.max_halvings => return Err(e),
            Err(_) => {
                step *= 0.5;
                continue;
            }
        };
        let e_new = g.free_energy(&solved.u, eps);
        if e_new <= e_old + 1e-12 * e_old.abs().max(1.0) {
            let scale = 4.0 * PI / (eps * p.domain.area());
            let info = StepInfo {
                tau: step,
                halvings,
                active_set_iterations: solved.iterations,
                inclusion_residual: solved.residual,
                sign_violation: solved.sign_violation,
                mass_change: 2.0 * (g.moment(&solved.u) - mass_old) / (p.domain.radius * p.domain.radius),
                energy_change: scale * (e_new - e_old),
            };
            let profile = RadialProfile { grid: p.grid.clone(), values: solved.u, domain: p.domain };
            return Ok((DqopState { profile, w: solved.w, time: state.time + step }, info));
        }
        step *= 0.5;
    }
    Err(Error::StepRejected { halvings: opts.max_halvings as u32 })
}

/// Annular steady state stretched radially by `factor`, with the inner plateau
/// lowered from `+1` so the discrete mass equals that of the unstretched
/// state on the same grid.
pub fn stretched_annular(sol: &AnnularSolution, grid: &[f64], factor: f64) -> Result<RadialProfile> {
    if !(factor >= 1.0) {
        return Err(Error::Domain { what: "stretch factor", value: factor });
    }
    let base = annular_profile(sol, grid)?;
    let g = FvGrid::new(grid);
    let r_plateau = factor * sol.r_minus();
    let mut values: Vec<f64> = grid.iter().map(|&r| sol.u_at(r / factor)).collect();
    let plateau_weight: f64 = grid.iter().zip(&g.m).filter(|(r, _)| **r <= r_plateau).map(|(_, m)| m).sum();
    if plateau_weight == 0.0 {
        return Err(Error::InvalidProfile("stretched plateau contains no grid node".into()));
    }
    let excess = g.moment(&values) - g.moment(&base.values);
    let plateau = 1.0 - excess / plateau_weight;
    if !(plateau > -1.0) {
        return Err(Error::InvalidProfile(format!("plateau value {plateau} below -1")));
    }
    for (v, r) in values.iter_mut().zip(grid) {
        if *r <= r_plateau {
            *v = plateau;
        }
    }
    let profile = RadialProfile::new(grid.to_vec(), values, sol.domain)?;
    profile.check_admissible()?;
    Ok(profile)
}

/// Steps `profile` with a fixed `tau` until no node moves by more than `tol`
/// in one step; returns the final state and the step count.
pub fn relax_to_equilibrium(
    profile: &RadialProfile,
    tau: f64,
    tol: f64,
    max_steps: usize,
    opts: &DqopOptions,
) -> Result<(DqopState, usize)> {
    let mut state = DqopState::new(profile.clone())?;
    let mut residual = f64::INFINITY;
    for k in 1..=max_steps {
        let (next, _) = dqop_step(&state, tau, opts)?;
        residual = next.profile.values.iter().zip(&state.profile.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        state = next;
        if residual <= tol {
            return Ok((state, k));
        }
    }
    Err(Error::NotConverged { residual })
}

/// Largest `|w - λ|` over nodes strictly inside `(-1, 1)`.
pub fn potential_defect(state: &DqopState, lambda: f64) -> f64 {
    state
        .profile
        .values
        .iter()
        .zip(&state.w)
        .filter(|(u, _)| u.abs() < 1.0)
        .map(|(_, w)| (w - lambda).abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DqopReport {
    pub steps: usize,
    pub halvings: usize,
    /// Largest `|ū(t) - ū(0)|` over the run.
    pub mass_drift: f64,
    /// Largest single-step energy change; non-positive for a monotone run.
    pub max_energy_change: f64,
}

/// Evolves an admissible profile up to time `horizon` with step `tau`,
/// sampling the trace every `cadence` steps and at the end.
pub fn dqop_evolve(
    u0: &RadialProfile,
    horizon: f64,
    tau: f64,
    cadence: usize,
    opts: &DqopOptions,
) -> Result<(DqopState, FlowTrace<DqopSample>, DqopReport)> {
    if !(horizon >= 0.0) || !(tau > 0.0) {
        return Err(Error::Domain { what: "time horizon", value: horizon });
    }
    u0.check_admissible()?;
    let cadence = cadence.max(1);
    let sample = |s: &DqopState| {
        let d = diagnostics(s);
        DqopSample { t: s.time, energy: d.energy, entropy: d.entropy, u_bar: d.u_bar }
    };
    let mut state = DqopState::new(u0.clone())?;
    let u_bar0 = diagnostics(&state).u_bar;
    let mut trace = FlowTrace::new();
    trace.push(sample(&state));
    let mut report = DqopReport { steps: 0, halvings: 0, mass_drift: 0.0, max_energy_change: f64::NEG_INFINITY };
    // the last step is shortened to land on the horizon
    let tiny = 1e-12 * horizon.max(tau);
    while horizon - state.time > tiny {
        let dt = tau.min(horizon - state.time);
        let (next, info) = dqop_step(&state, dt, opts)?;
        state = next;
        report.steps += 1;
        report.halvings += info.halvings;
        report.max_energy_change = report.max_energy_change.max(info.energy_change);
        let d = diagnostics(&state);
        report.mass_drift = report.mass_drift.max((d.u_bar - u_bar0).abs());
        if report.steps % cadence == 0 || horizon - state.time <= tiny {
            trace.push(sample(&state));
        }
    }
    if report.steps == 0 {
        report.max_energy_change = 0.0;
    }
    Ok((state, trace, report))
}
