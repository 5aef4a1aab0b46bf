use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Scale separation required by [`DiskDomain::new`]: `ε ≤ δ/10` and `δ ≤ R0/10`.
pub const DEFAULT_SCALE_RATIO: f64 = 10.0;

/// Disk of radius `R0` with a boundary collar of width `δ` and interface
/// parameter `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiskDomain {
    pub radius: f64,
    pub delta: f64,
    pub epsilon: f64,
}

impl DiskDomain {
    pub fn new(radius: f64, delta: f64, epsilon: f64) -> Result<Self> {
        Self::with_ratio(radius, delta, epsilon, DEFAULT_SCALE_RATIO)
    }

    /// Same as [`DiskDomain::new`] with a caller-chosen separation ratio.
    pub fn with_ratio(radius: f64, delta: f64, epsilon: f64, ratio: f64) -> Result<Self> {
        for (name, v) in [("R0", radius), ("delta", delta), ("epsilon", epsilon), ("ratio", ratio)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidDomain(format!("{name} = {v} must be positive and finite")));
            }
        }
        if epsilon > delta / ratio {
            return Err(Error::InvalidDomain(format!(
                "epsilon = {epsilon} exceeds delta/{ratio} = {}",
                delta / ratio
            )));
        }
        if delta > radius / ratio {
            return Err(Error::InvalidDomain(format!(
                "delta = {delta} exceeds R0/{ratio} = {}",
                radius / ratio
            )));
        }
        Ok(DiskDomain { radius, delta, epsilon })
    }

    /// `|Ω| = π R0²`.
    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// Largest radius a free boundary may reach, `R0 - δ`.
    pub fn inner_limit(&self) -> f64 {
        self.radius - self.delta
    }

    /// Uniform grid of `n + 1` nodes on `[0, R0]`.
    pub fn uniform_grid(&self, n: usize) -> Vec<f64> {
        let h = self.radius / n as f64;
        (0..=n).map(|i| if i == n { self.radius } else { i as f64 * h }).collect()
    }
}
