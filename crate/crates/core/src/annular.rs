//! Monotone annular steady states `u = +1` on `r ≤ ε q₋`, a Bessel transition
//! layer on `(ε q₋, ε q₊)` and `u = -1` beyond.
//!
//! In the rescaled variable `q = r/ε` the layer is `v = u + λ = A M₀(q)
//! cos(θ₀(q) - φ)`. The free boundaries sit where `θ₁ - φ = ∓π/2`, so with
//! `t = θ₁(q₀) - φ` both are explicit, `q±(t) = θ₁⁻¹(θ₁(q₀) - t ± π/2)`, and the
//! remaining condition is the root of the increasing discrepancy `D(t)`.

use crate::domain::DiskDomain;
use crate::error::{Error, Result};
use crate::profile::{check_grid, RadialProfile};
use crate::quad::simpson;
use crate::specfun::{self, jy};
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

/// Simpson panels across the transition layer.
const LAYER_PANELS: usize = 2000;

/// Smallest `q₀` carrying an annular solution.
///
/// As `q₀` decreases to this value `q₋ ↓ 0` and the annulus degenerates into
/// the dimple with `u(0) = 1`, whose effective radius is `ε q̄ √(-J₀(q̄)/(1-J₀(q̄)))`.
pub fn annular_threshold() -> f64 {
    let j = specfun::j0_at_qbar();
    specfun::qbar() * (-j / (1.0 - j)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnnularSolution {
    pub q0: f64,
    pub qm: f64,
    pub qp: f64,
    pub lambda: f64,
    pub phi: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub c1: f64,
    pub c2: f64,
    pub t_star: f64,
    #[serde(skip)]
    pub domain: DiskDomain,
}

/// Discrepancy `D(t)` for one `q₀`, with the root finders built on it.
#[derive(Clone, Copy, Debug)]
pub struct AnnularProblem {
    q0: f64,
    theta1_q0: f64,
    t_max: f64,
}

struct Eval {
    qm: f64,
    qp: f64,
    phi: f64,
    d: f64,
    scale: f64,
}

/// `M₀(q) cos(θ₀(q) - φ) = J₀(q) cos φ + Y₀(q) sin φ`; tends to `cos φ` as `q → 0`
/// along the free boundary, where `sin φ = O(q²)` beats `Y₀ = O(ln q)`.
fn layer(q: f64, phi: f64) -> f64 {
    if q == 0.0 {
        return phi.cos();
    }
    let e = jy(q);
    e.j0 * phi.cos() + e.y0 * phi.sin()
}

impl AnnularProblem {
    pub fn new(q0: f64) -> Result<Self> {
        let threshold = annular_threshold();
        if !(q0 > threshold) || !q0.is_finite() {
            return Err(Error::BelowDimpleThreshold { q0, threshold });
        }
        let theta1_q0 = specfun::theta1(q0);
        // Below q̄ the inner boundary reaches the origin before t = π/2.
        let t_max = theta1_q0.min(FRAC_PI_2);
        Ok(AnnularProblem { q0, theta1_q0, t_max })
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    /// Admissible interval of `t`; `[-π/2, π/2]` whenever `q₀ ≥ q̄`.
    pub fn t_bounds(&self) -> (f64, f64) {
        (-FRAC_PI_2, self.t_max)
    }

    fn boundaries(&self, t: f64) -> Result<(f64, f64)> {
        let qm = if t == -FRAC_PI_2 {
            self.q0
        } else if t >= self.theta1_q0 {
            0.0
        } else {
            let target = self.theta1_q0 - t - FRAC_PI_2;
            if target <= -FRAC_PI_2 + specfun::PHASE_GUARD {
                0.0
            } else {
                specfun::phase1_inverse(target)?
            }
        };
        let qp = if t == FRAC_PI_2 {
            self.q0
        } else {
            specfun::phase1_inverse(self.theta1_q0 - t + FRAC_PI_2)?
        };
        Ok((qm, qp))
    }

    fn eval(&self, t: f64) -> Result<Eval> {
        let (lo, hi) = self.t_bounds();
        if !(t >= lo && t <= hi) {
            return Err(Error::Domain { what: "discrepancy parameter t", value: t });
        }
        let (qm, qp) = self.boundaries(t)?;
        let phi = self.theta1_q0 - t;
        let q0sq = self.q0 * self.q0;
        let plus = (qp * qp - q0sq) * layer(qp, phi);
        let minus = (qm * qm - q0sq) * layer(qm, phi);
        Ok(Eval { qm, qp, phi, d: plus - minus, scale: plus.abs().max(minus.abs()).max(q0sq * 1e-300) })
    }

    /// `D(t) = (q₊² - q₀²) M₀(q₊) cos(θ₀(q₊) - φ) - (q₋² - q₀²) M₀(q₋) cos(θ₀(q₋) - φ)`.
    pub fn discrepancy(&self, t: f64) -> Result<f64> {
        Ok(self.eval(t)?.d)
    }

    /// Free boundaries `(q₋(t), q₊(t))`.
    pub fn free_boundaries(&self, t: f64) -> Result<(f64, f64)> {
        self.boundaries(t)
    }

    fn bracket(&self) -> Result<(f64, f64)> {
        let (lo, hi) = self.t_bounds();
        let dl = self.discrepancy(lo)?;
        let dh = self.discrepancy(hi)?;
        if !(dl < 0.0 && dh > 0.0) {
            return Err(Error::RootNotFound(format!("D does not change sign: D({lo}) = {dl}, D({hi}) = {dh}")));
        }
        Ok((lo, hi))
    }

    /// Root by plain bisection to machine resolution.
    pub fn root_bisection(&self) -> Result<f64> {
        let (mut lo, mut hi) = self.bracket()?;
        while hi - lo > 4.0 * f64::EPSILON {
            let mid = 0.5 * (lo + hi);
            let e = self.eval(mid)?;
            if e.d == 0.0 {
                return Ok(mid);
            }
            if e.d < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Newton iteration from `seed` with a finite-difference slope, kept inside
    /// a shrinking sign bracket.
    pub fn root_newton_from(&self, seed: f64) -> Result<f64> {
        let (mut lo, mut hi) = self.bracket()?;
        let mut t = seed.clamp(lo, hi);
        for _ in 0..200 {
            let e = self.eval(t)?;
            if e.d.abs() <= 1e-11 * e.scale {
                return Ok(t);
            }
            if e.d < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let h = 1e-7 * (hi - lo).max(1e-9);
            let tp = (t + h).min(self.t_max);
            let tm = (t - h).max(-FRAC_PI_2);
            let slope = (self.discrepancy(tp)? - self.discrepancy(tm)?) / (tp - tm);
            let mut next = t - e.d / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 2.0 * f64::EPSILON || hi - lo <= 4.0 * f64::EPSILON {
                return Ok(next);
            }
            t = next;
        }
        Err(Error::RootNotFound("Newton iteration on D(t) did not converge".into()))
    }

    /// Bisection to width `1e-3`, then safeguarded Newton.
    pub fn root(&self) -> Result<f64> {
        let (mut lo, mut hi) = self.bracket()?;
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if self.discrepancy(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.root_newton_from(0.5 * (lo + hi))
    }

    /// Solution record at parameter `t`, which should be a root of `D`.
    pub fn solution_at(&self, t: f64, domain: DiskDomain) -> Result<AnnularSolution> {
        let e = self.eval(t)?;
        let (qm, qp) = (e.qm, e.qp);
        let q0sq = self.q0 * self.q0;
        let lambda = (qp * qp + qm * qm - 2.0 * q0sq) / (qp * qp - qm * qm);
        let amplitude = (1.0 + lambda) / layer(qm, e.phi);
        Ok(AnnularSolution {
            q0: self.q0,
            qm,
            qp,
            lambda,
            phi: e.phi,
            amplitude,
            c1: amplitude * e.phi.cos(),
            c2: amplitude * e.phi.sin(),
            t_star: t,
            domain,
        })
    }
}

/// `D(t)` for the given `q₀`.
pub fn discrepancy(t: f64, q0: f64) -> Result<f64> {
    AnnularProblem::new(q0)?.discrepancy(t)
}

/// Unique monotone annular steady state with target radius `r₀ = ε q₀`.
pub fn solve_annular(q0: f64, domain: DiskDomain) -> Result<AnnularSolution> {
    let problem = AnnularProblem::new(q0)?;
    let t = problem.root()?;
    let sol = problem.solution_at(t, domain)?;
    let limit = domain.inner_limit();
    if domain.epsilon * sol.qp > limit {
        return Err(Error::DomainTooSmall { r_plus: domain.epsilon * sol.qp, limit });
    }
    Ok(sol)
}

impl AnnularSolution {
    pub fn r_minus(&self) -> f64 {
        self.domain.epsilon * self.qm
    }

    pub fn r_plus(&self) -> f64 {
        self.domain.epsilon * self.qp
    }

    pub fn r0(&self) -> f64 {
        self.domain.epsilon * self.q0
    }

    /// `v(q) = c₁ J₀(q) + c₂ Y₀(q)` on the layer.
    pub fn v(&self, q: f64) -> f64 {
        if q == 0.0 {
            return self.c1;
        }
        let e = jy(q);
        self.c1 * e.j0 + self.c2 * e.y0
    }

    /// `dv/dq = -c₁ J₁(q) - c₂ Y₁(q)`.
    pub fn v_q(&self, q: f64) -> f64 {
        if q == 0.0 {
            return 0.0;
        }
        let e = jy(q);
        -(self.c1 * e.j1 + self.c2 * e.y1)
    }

    /// `u` at radius `r`, branching on the exact free boundaries.
    pub fn u_at(&self, r: f64) -> f64 {
        let q = r / self.domain.epsilon;
        if q <= self.qm {
            1.0
        } else if q >= self.qp {
            -1.0
        } else {
            self.v(q) - self.lambda
        }
    }

    /// `u_r` at radius `r`.
    pub fn u_r_at(&self, r: f64) -> f64 {
        let q = r / self.domain.epsilon;
        if q <= self.qm || q >= self.qp {
            0.0
        } else {
            self.v_q(q) / self.domain.epsilon
        }
    }

    /// `(2/R0²) ∫ u r dr`, exact on the plateaus and Simpson on the layer.
    pub fn mean_mass(&self) -> f64 {
        let (a, b) = (self.r_minus(), self.r_plus());
        let big = self.domain.radius;
        let layer = simpson(|r| self.u_at(r) * r, a, b, LAYER_PANELS);
        2.0 * (0.5 * a * a + layer - 0.5 * (big * big - b * b)) / (big * big)
    }

    /// `(1/(ε|Ω|)) ∫ ((1-u²) + ε² u_r²) dx`; only the layer contributes.
    pub fn energy(&self) -> f64 {
        let eps = self.domain.epsilon;
        let integral = simpson(
            |q| {
                let u = self.v(q) - self.lambda;
                let vq = self.v_q(q);
                ((1.0 - u * u) + vq * vq) * q
            },
            self.qm,
            self.qp,
            LAYER_PANELS,
        );
        2.0 * PI * eps * integral / self.domain.area()
    }
}

/// Profile of `sol` sampled on `grid`.
pub fn annular_profile(sol: &AnnularSolution, grid: &[f64]) -> Result<RadialProfile> {
    check_grid(grid, &sol.domain)?;
    let values = grid.iter().map(|&r| sol.u_at(r)).collect();
    RadialProfile::new(grid.to_vec(), values, sol.domain)
}

/// Leading-order large-`q₀` approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnnularAsymptotic {
    pub q0: f64,
    pub lambda: f64,
    pub qm: f64,
    pub qp: f64,
    /// `false` for `q₀ < 10`, where the expansion is not trusted.
    pub reliable: bool,
}

impl AnnularAsymptotic {
    /// `v(q) ≈ √(q₀/q) sin(q₀ - q)` on `(q₋, q₊)`.
    pub fn v(&self, q: f64) -> f64 {
        (self.q0 / q).sqrt() * (self.q0 - q).sin()
    }
}

pub fn annular_asymptotic(q0: f64) -> Result<AnnularAsymptotic> {
    if !(q0 > 0.0) || !q0.is_finite() {
        return Err(Error::Domain { what: "annular asymptotics", value: q0 });
    }
    Ok(AnnularAsymptotic {
        q0,
        lambda: PI / (4.0 * q0),
        qm: q0 - FRAC_PI_2,
        qp: q0 + FRAC_PI_2,
        reliable: q0 >= 10.0,
    })
}
