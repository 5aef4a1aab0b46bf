use crate::domain::DiskDomain;
use crate::error::{Error, Result};

/// Radial field `u(r)` sampled on an increasing grid in `[0, R0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub domain: DiskDomain,
}

/// Checks that `grid` is increasing and inside `[0, R0]`.
pub fn check_grid(grid: &[f64], domain: &DiskDomain) -> Result<()> {
    let slack = 1e-12 * domain.radius;
    for &r in grid {
        if !(r >= -slack && r <= domain.radius + slack) {
            return Err(Error::GridOutOfRange(r));
        }
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidProfile("grid is not strictly increasing".into()));
    }
    Ok(())
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, domain: DiskDomain) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < 2 {
            return Err(Error::InvalidProfile(format!(
                "grid has {} points, values {}",
                grid.len(),
                values.len()
            )));
        }
        check_grid(&grid, &domain)?;
        Ok(RadialProfile { grid, values, domain })
    }

    /// Constant profile on a uniform grid.
    pub fn constant(value: f64, n: usize, domain: DiskDomain) -> Self {
        let grid = domain.uniform_grid(n);
        let values = vec![value; grid.len()];
        RadialProfile { grid, values, domain }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Obstacle range and the pure-phase collar `u = -1` on `[R0 - δ, R0]`.
    pub fn check_admissible(&self) -> Result<()> {
        let tol = 1e-12;
        for (&r, &u) in self.grid.iter().zip(&self.values) {
            if !(u >= -1.0 - tol && u <= 1.0 + tol) {
                return Err(Error::InvalidProfile(format!("u({r}) = {u} outside [-1, 1]")));
            }
            if r >= self.domain.inner_limit() && (u + 1.0).abs() > tol {
                return Err(Error::InvalidProfile(format!("u({r}) = {u} inside the boundary collar")));
            }
        }
        Ok(())
    }

    /// `(2/R0²) ∫ u r dr` by the trapezoid rule on the stored samples.
    pub fn mean_mass_trapezoid(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.len() - 1 {
            let (r0, r1) = (self.grid[i], self.grid[i + 1]);
            s += 0.5 * (r1 - r0) * (self.values[i] * r0 + self.values[i + 1] * r1);
        }
        2.0 * s / (self.domain.radius * self.domain.radius)
    }
}
