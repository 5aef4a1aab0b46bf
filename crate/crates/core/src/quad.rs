//! Quadrature rules used by the oracles and diagnostics.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// Composite Simpson rule on `[a, b]` with `n` (rounded up to even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = if n % 2 == 1 { n + 1 } else { n.max(2) };
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += if i % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Double-exponential (exp-sinh) quadrature of `f` over `(0, inf)`.
///
/// Handles integrable endpoint singularities at 0 and integrands with
/// exponential decay. Returns the integral once two successive step halvings
/// agree to `rel_tol`.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, rel_tol: f64) -> Result<f64> {
    const MAX_LEVEL: usize = 9;
    // exp(π/2 sinh 7) overflows and its reciprocal underflows
    const TAU_MAX: f64 = 7.0;
    let node = |tau: f64| -> f64 {
        let t = (FRAC_PI_2 * tau.sinh()).exp();
        if t == 0.0 || !t.is_finite() {
            return 0.0;
        }
        let w = t * FRAC_PI_2 * tau.cosh();
        let v = f(t) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    // Sum nodes tau = offset + k*step for k = 0, 1, ... in one direction
    // until the contributions are negligible. Leading zeros (an integrand
    // underflowing away from its support) do not end the sweep.
    let sweep = |start: f64, step: f64| -> f64 {
        let mut s = 0.0;
        let mut small = 0;
        let mut tau = start;
        while tau.abs() <= TAU_MAX {
            let v = node(tau);
            s += v;
            if s != 0.0 && (v.abs() <= 1e-300 || v.abs() < 1e-20 * s.abs()) {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            tau += step;
        }
        s
    };

    let mut h = 0.5;
    let mut sum = node(0.0) + sweep(h, h) + sweep(-h, -h);
    let mut prev = sum * h;
    let mut estimate = f64::INFINITY;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        // new odd nodes at (2j+1) h
        sum += sweep(h, 2.0 * h) + sweep(-h, -2.0 * h);
        let cur = sum * h;
        estimate = (cur - prev).abs();
        if estimate <= rel_tol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::QuadratureNotConverged { estimate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x, 0.0, 2.0, 4);
        assert!((v - 0.0).abs() < 1e-14);
    }

    #[test]
    fn exp_sinh_handles_log_singularity() {
        // int_0^inf -ln(t) e^{-t} dt = Euler's gamma
        let v = exp_sinh(|t| -t.ln() * (-t).exp(), 1e-13).unwrap();
        assert!((v - 0.577_215_664_901_532_9).abs() < 1e-12);
    }

    #[test]
    fn exp_sinh_gaussian() {
        let v = exp_sinh(|t| (-t * t).exp(), 1e-13).unwrap();
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
    }
}
