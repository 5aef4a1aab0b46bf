//! Dimple steady states: `u = -1` outside `r₊ = ε q̄`, and inside
//! `u(r) = [(u(0)+1) J₀(r/ε) - u(0) J₀(q̄) - 1] / (1 - J₀(q̄))`.

use crate::domain::DiskDomain;
use crate::error::{Error, Result};
use crate::profile::{check_grid, RadialProfile};
use crate::specfun::{self, jy};
use serde::Serialize;

/// Slack accepted above `u(0) = 1` when converting from a mean mass.
const CENTER_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DimpleSolution {
    pub u_center: f64,
    pub lambda: f64,
    pub r_plus: f64,
    pub r0: f64,
    pub u_bar: f64,
    #[serde(skip)]
    pub domain: DiskDomain,
}

fn check_fits(domain: &DiskDomain) -> Result<()> {
    let r_plus = domain.epsilon * specfun::qbar();
    if r_plus > domain.inner_limit() {
        return Err(Error::DomainTooSmall { r_plus, limit: domain.inner_limit() });
    }
    Ok(())
}

fn build(u_center: f64, domain: DiskDomain) -> DimpleSolution {
    let qbar = specfun::qbar();
    let j = specfun::j0_at_qbar();
    let eps = domain.epsilon;
    let lambda = (u_center * j + 1.0) / (1.0 - j);
    let r0 = eps * qbar * (-(1.0 + u_center) * j / (2.0 * (1.0 - j))).sqrt();
    let u_bar = -1.0 - (eps * qbar / domain.radius).powi(2) * (1.0 + u_center) * j / (1.0 - j);
    DimpleSolution { u_center, lambda, r_plus: eps * qbar, r0, u_bar, domain }
}

/// Dimple with prescribed center value `u(0) ∈ (-1, 1]`.
pub fn solve_dimple_from_center(u_center: f64, domain: DiskDomain) -> Result<DimpleSolution> {
    if !(u_center > -1.0 && u_center <= 1.0) {
        return Err(Error::Domain { what: "dimple center value", value: u_center });
    }
    check_fits(&domain)?;
    Ok(build(u_center, domain))
}

/// Upper end of the admissible mean-mass band, reached at `u(0) = 1`.
pub fn dimple_mass_band_max(domain: &DiskDomain) -> f64 {
    let j = specfun::j0_at_qbar();
    -1.0 - 2.0 * (domain.epsilon * specfun::qbar() / domain.radius).powi(2) * j / (1.0 - j)
}

/// Dimple with prescribed mean mass; `ū = -1` gives the trivial state `u ≡ -1`.
pub fn solve_dimple_from_mean(u_bar: f64, domain: DiskDomain) -> Result<DimpleSolution> {
    check_fits(&domain)?;
    let qbar = specfun::qbar();
    let j = specfun::j0_at_qbar();
    let scale = (domain.radius / (domain.epsilon * qbar)).powi(2);
    let mut u_center = (1.0 + u_bar) * scale * (j - 1.0) / j - 1.0;
    if u_center > 1.0 && u_center <= 1.0 + CENTER_SLACK {
        u_center = 1.0;
    }
    if !(u_center >= -1.0 && u_center <= 1.0) || !(u_bar >= -1.0) {
        return Err(Error::OutOfBand { u_bar, u_center });
    }
    if u_bar == -1.0 {
        return Ok(build(-1.0, domain));
    }
    Ok(build(u_center, domain))
}

/// Dimple with prescribed effective radius `r₀ ≤ ε q̄ √(-J₀(q̄)/(1-J₀(q̄)))`.
pub fn solve_dimple_from_radius(r0: f64, domain: DiskDomain) -> Result<DimpleSolution> {
    if !(r0 >= 0.0) {
        return Err(Error::Domain { what: "dimple radius", value: r0 });
    }
    let u_bar = 2.0 * (r0 / domain.radius).powi(2) - 1.0;
    solve_dimple_from_mean(u_bar, domain)
}

impl DimpleSolution {
    /// `λ = (r₊² - 2 r₀²)/r₊²`, the mass form of the multiplier.
    pub fn lambda_from_radii(&self) -> f64 {
        (self.r_plus * self.r_plus - 2.0 * self.r0 * self.r0) / (self.r_plus * self.r_plus)
    }

    pub fn u_at(&self, r: f64) -> f64 {
        let q = r / self.domain.epsilon;
        let qbar = specfun::qbar();
        if q >= qbar {
            return -1.0;
        }
        let j = specfun::j0_at_qbar();
        let j0 = if q == 0.0 { 1.0 } else { jy(q).j0 };
        ((self.u_center + 1.0) * j0 - self.u_center * j - 1.0) / (1.0 - j)
    }

    pub fn u_r_at(&self, r: f64) -> f64 {
        let q = r / self.domain.epsilon;
        if q == 0.0 || q >= specfun::qbar() {
            return 0.0;
        }
        let j = specfun::j0_at_qbar();
        -(self.u_center + 1.0) * jy(q).j1 / ((1.0 - j) * self.domain.epsilon)
    }

    /// Closed-form scaled free energy `ε q̄² (1 - λ²)/R0²`.
    pub fn energy(&self) -> f64 {
        let qbar = specfun::qbar();
        self.domain.epsilon * qbar * qbar * (1.0 - self.lambda * self.lambda) / (self.domain.radius * self.domain.radius)
    }
}

pub fn dimple_profile(sol: &DimpleSolution, grid: &[f64]) -> Result<RadialProfile> {
    check_grid(grid, &sol.domain)?;
    let values = grid.iter().map(|&r| sol.u_at(r)).collect();
    RadialProfile::new(grid.to_vec(), values, sol.domain)
}

pub fn dimple_energy(sol: &DimpleSolution) -> f64 {
    sol.energy()
}
