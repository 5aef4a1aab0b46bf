//! Minimizing-movement step for surface diffusion on star-shaped curves
//! `r = ρ(θ)`.
//!
//! One step minimizes `L(ρ) + d²(ρ, ρ_prev)/(2τ)` at fixed enclosed area. With
//! `a = ρ²/2` the area density, `f = a - a_prev` is the area moved per unit
//! angle and `Φ(θ) = ∫₀^θ f` its flux potential; the distance is the
//! arc-length weighted `d² = ∫ w (Φ - Φ̄_w)² dθ` with `w = √(ρ² + ρ_θ²)` taken
//! from the previous curve. Angular derivatives are spectral.

use crate::curve::ClosedCurve;
use crate::domain::DiskDomain;
use crate::error::{Error, Result};
use crate::sd_flow::{fit_decay, sample, SdOptions, SdReport, K_OSC_CONVERGED};
use crate::trace::{FlowTrace, SdSample};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

const NEWTON_MAX: usize = 100;
const GRAD_TOL: f64 = 1e-12;
const STALL_TOL: f64 = 1e-8;

/// Result of one minimizing-movement step.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMoveStep {
    pub rho: Vec<f64>,
    pub length: f64,
    pub dist_sq: f64,
    pub iterations: usize,
}

/// Half-point average and difference operators: row `j` acts on `ρ_j, ρ_{j+1}`.
fn half_point_ops(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let h = 2.0 * PI / n as f64;
    let mut avg = DMatrix::zeros(n, n);
    let mut dif = DMatrix::zeros(n, n);
    for j in 0..n {
        let k = (j + 1) % n;
        avg[(j, j)] = 0.5;
        avg[(j, k)] = 0.5;
        dif[(j, j)] = -1.0 / h;
        dif[(j, k)] = 1.0 / h;
    }
    (avg, dif)
}

/// Arc-length density `√(ρ² + ρ_θ²)` at the half-points `θ_{j+1/2}`.
fn half_point_speed(rho: &[f64]) -> Vec<f64> {
    let n = rho.len();
    let h = 2.0 * PI / n as f64;
    (0..n)
        .map(|j| {
            let (a, b) = (rho[j], rho[(j + 1) % n]);
            (0.5 * (a + b)).hypot((b - a) / h)
        })
        .collect()
}

/// `L = ∫ √(ρ² + ρ_θ²) dθ` by the midpoint rule with centred differences.
pub fn radial_length(rho: &[f64]) -> f64 {
    let h = 2.0 * PI / rho.len() as f64;
    h * half_point_speed(rho).iter().sum::<f64>()
}

/// `A = ½ ∫ ρ² dθ`.
pub fn radial_area(rho: &[f64]) -> f64 {
    let h = 2.0 * PI / rho.len() as f64;
    0.5 * h * rho.iter().map(|r| r * r).sum::<f64>()
}

struct Problem {
    n: usize,
    h: f64,
    avg: DMatrix<f64>,
    dif: DMatrix<f64>,
    a_prev: DVector<f64>,
    metric: DMatrix<f64>,
    inv_tau: f64,
}

impl Problem {
    fn new(rho_prev: &[f64], tau: f64) -> Self {
        let n = rho_prev.len();
        let h = 2.0 * PI / n as f64;
        let (avg, dif) = half_point_ops(n);
        // Φ_j = h Σ_{k≤j} f_k lives at θ_{j+1/2}, where the weight is taken too
        let w = half_point_speed(rho_prev);
        let wsum: f64 = w.iter().sum();
        // Φ = h S f with S the cumulative sum, then remove the w-weighted mean
        let cum = DMatrix::from_fn(n, n, |j, k| if k <= j { h } else { 0.0 });
        let centering = DMatrix::from_fn(n, n, |j, k| (if j == k { 1.0 } else { 0.0 }) - w[k] / wsum);
        let psi = centering * cum;
        let weight = DMatrix::from_diagonal(&DVector::from_vec(w.iter().map(|x| h * x).collect()));
        let metric = psi.transpose() * weight * &psi;
        let a_prev = DVector::from_iterator(n, rho_prev.iter().map(|x| 0.5 * x * x));
        Problem { n, h, avg, dif, a_prev, metric, inv_tau: 1.0 / tau }
    }

    fn objective(&self, a: &DVector<f64>) -> Option<(f64, f64, f64)> {
        if a.iter().any(|&x| !(x > 0.0)) {
            return None;
        }
        let rho: Vec<f64> = a.iter().map(|x| (2.0 * x).sqrt()).collect();
        let length = radial_length(&rho);
        let f = a - &self.a_prev;
        let dist_sq = f.dot(&(&self.metric * &f));
        Some((length + 0.5 * self.inv_tau * dist_sq, length, dist_sq))
    }

    fn gradient_hessian(&self, a: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let n = self.n;
        let rho = a.map(|x| (2.0 * x).sqrt());
        let m = &self.avg * &rho;
        let d = &self.dif * &rho;
        let inv_w = m.zip_map(&d, |x, y| 1.0 / x.hypot(y));
        let g_rho = (self.avg.transpose() * m.component_mul(&inv_w) + self.dif.transpose() * d.component_mul(&inv_w)) * self.h;
        // rows of G are m_j Avg_j + d_j Dif_j
        let mut g = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in [j, (j + 1) % n] {
                g[(j, k)] = m[j] * self.avg[(j, k)] + d[j] * self.dif[(j, k)];
            }
        }
        let dw = DMatrix::from_diagonal(&inv_w);
        let dw3 = DMatrix::from_diagonal(&inv_w.map(|x| x * x * x));
        let h_rho = (self.avg.transpose() * &dw * &self.avg + self.dif.transpose() * &dw * &self.dif
            - g.transpose() * dw3 * &g)
            * self.h;
        let inv_rho = rho.map(|x| 1.0 / x);
        let grad_l = g_rho.component_mul(&inv_rho);
        let mut hess = DMatrix::from_fn(n, n, |j, k| inv_rho[j] * h_rho[(j, k)] * inv_rho[k]);
        for j in 0..n {
            hess[(j, j)] -= g_rho[j] * inv_rho[j].powi(3);
        }
        let f = a - &self.a_prev;
        let grad = grad_l + &self.metric * f * self.inv_tau;
        let hess = hess + &self.metric * self.inv_tau;
        (grad, hess)
    }
}

/// One minimizing-movement step from `rho_prev` (equispaced in `θ`, even count).
pub fn sd_minmove_step(rho_prev: &[f64], tau: f64) -> Result<MinMoveStep> {
    let n = rho_prev.len();
    if n < 8 || n % 2 == 1 {
        return Err(Error::DegenerateCurve(format!("{n} angular samples, need an even count of at least 8")));
    }
    if rho_prev.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::NotStarShaped);
    }
    if !(tau > 0.0) {
        return Err(Error::Domain { what: "minimizing-movement step", value: tau });
    }
    let prob = Problem::new(rho_prev, tau);
    let mut a = prob.a_prev.clone();
    let (mut obj, _, _) = prob.objective(&a).ok_or(Error::NotStarShaped)?;
    let ones = DVector::from_element(n, 1.0);
    let finish = |a: &DVector<f64>, iterations: usize| -> Result<MinMoveStep> {
        let (_, length, dist_sq) = prob.objective(a).ok_or(Error::NotStarShaped)?;
        Ok(MinMoveStep { rho: a.iter().map(|x| (2.0 * x).sqrt()).collect(), length, dist_sq, iterations })
    };
    let mut residual = f64::INFINITY;
    for iter in 0..NEWTON_MAX {
        let (grad, hess) = prob.gradient_hessian(&a);
        // gradient projected onto the zero-mean subspace
        let pg = &grad - &ones * (grad.sum() / n as f64);
        residual = pg.amax();
        let scale = grad.amax().max(1.0);
        if residual <= GRAD_TOL * scale {
            return finish(&a, iter);
        }
        // near the optimum rounding may spoil descent; accept a small residual then
        let stalled = residual <= STALL_TOL * scale;
        let mut shift = 0.0;
        let step = loop {
            let mut kkt = DMatrix::<f64>::zeros(n + 1, n + 1);
            kkt.view_mut((0, 0), (n, n)).copy_from(&hess);
            for j in 0..n {
                kkt[(j, j)] += shift;
                kkt[(j, n)] = 1.0;
                kkt[(n, j)] = 1.0;
            }
            let mut rhs = DVector::<f64>::zeros(n + 1);
            rhs.rows_mut(0, n).copy_from(&(-&grad));
            if let Some(sol) = kkt.lu().solve(&rhs) {
                let dir = sol.rows(0, n).into_owned();
                let dir = &dir - &ones * (dir.sum() / n as f64);
                if dir.dot(&grad) < 0.0 {
                    break dir;
                }
            }
            if stalled {
                return finish(&a, iter);
            }
            shift = if shift == 0.0 { 1e-8 * hess.amax().max(1.0) } else { shift * 10.0 };
            if shift > 1e20 {
                return Err(Error::NotConverged { residual });
            }
        };
        let slope = step.dot(&grad);
        if -slope <= 64.0 * f64::EPSILON * obj.abs() {
            // predicted decrease below the resolution of the objective
            a += step;
            obj = prob.objective(&a).ok_or(Error::NotStarShaped)?.0;
            continue;
        }
        let mut alpha = 1.0;
        loop {
            let trial = &a + &step * alpha;
            if let Some((val, _, _)) = prob.objective(&trial) {
                if val <= obj + 1e-4 * alpha * slope {
                    a = trial;
                    obj = val;
                    break;
                }
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                if stalled {
                    return finish(&a, iter);
                }
                return Err(Error::NotConverged { residual });
            }
        }
    }
    Err(Error::NotConverged { residual })
}

/// Curve through the points `ρ_j (cos θ_j, sin θ_j)`.
pub fn radial_curve(rho: &[f64]) -> Result<ClosedCurve> {
    let n = rho.len();
    ClosedCurve::new(
        rho.iter()
            .enumerate()
            .map(|(j, r)| {
                let t = 2.0 * PI * j as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect(),
    )
}

/// Repeated minimizing-movement steps up to `horizon`, with the same trace
/// and report as the parametric scheme.
pub fn minmove_evolve(
    rho0: &[f64],
    horizon: f64,
    opts: SdOptions,
    domain: Option<&DiskDomain>,
) -> Result<(Vec<f64>, FlowTrace<SdSample>, SdReport)> {
    if !(horizon >= 0.0) || !(opts.dt > 0.0) {
        return Err(Error::Domain { what: "time horizon", value: horizon });
    }
    let steps = (horizon / opts.dt).ceil() as usize;
    let tau = if steps > 0 { horizon / steps as f64 } else { opts.dt };
    let cadence = opts.cadence.max(1);
    let limit = domain.map(|d| d.inner_limit());
    let exits = |rho: &[f64]| limit.is_some_and(|l| rho.iter().any(|&r| r >= l));

    let mut rho = rho0.to_vec();
    let mut trace = FlowTrace::new();
    trace.push(sample(0.0, &radial_curve(&rho)?)?);
    let mut domain_exit = exits(&rho);
    for k in 1..=steps {
        rho = sd_minmove_step(&rho, tau)?.rho;
        domain_exit |= exits(&rho);
        if k % cadence == 0 || k == steps {
            trace.push(sample(k as f64 * tau, &radial_curve(&rho)?)?);
        }
    }
    let converged_at = trace.samples.iter().find(|s| s.k_osc < K_OSC_CONVERGED).map(|s| s.t);
    let decay_rate = converged_at.and_then(|_| fit_decay(&trace.samples));
    let area = radial_area(&rho);
    let report = SdReport { steps, converged_at, decay_rate, limit_radius: (area / PI).sqrt(), domain_exit };
    Ok((rho, trace, report))
}

/// Radii where rays at `n` equispaced angles meet `curve`; fails unless each
/// ray meets the marker polygon exactly once. The polygon hit is refined on
/// the trigonometric interpolant of the markers.
pub fn radial_samples(curve: &ClosedCurve, n: usize) -> Result<Vec<f64>> {
    let m = curve.len();
    let interp = curve.interpolant();
    (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            let dir = [t.cos(), t.sin()];
            let mut hits = Vec::new();
            for i in 0..m {
                let p = curve.markers[i];
                let q = curve.markers[(i + 1) % m];
                let e = [q[0] - p[0], q[1] - p[1]];
                // solve s dir = p + u e
                let det = dir[0] * (-e[1]) - dir[1] * (-e[0]);
                if det.abs() < 1e-300 {
                    continue;
                }
                let s = (p[0] * (-e[1]) - p[1] * (-e[0])) / det;
                let u = (dir[0] * p[1] - dir[1] * p[0]) / det;
                if s > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
                    hits.push((s, 2.0 * PI * (i as f64 + u) / m as f64));
                }
            }
            // a ray through a vertex meets both adjacent segments
            hits.sort_by(|x, y| x.0.total_cmp(&y.0));
            hits.dedup_by(|x, y| (x.0 - y.0).abs() <= 1e-10 * y.0.abs());
            if hits.len() != 1 {
                return Err(Error::NotStarShaped);
            }
            let mut p = hits[0].1;
            for _ in 0..20 {
                let (x, dx) = interp.eval(p);
                let g = dir[0] * x[1] - dir[1] * x[0];
                let dg = dir[0] * dx[1] - dir[1] * dx[0];
                let dp = g / dg;
                p -= dp;
                if dp.abs() < 1e-15 {
                    break;
                }
            }
            let (x, _) = interp.eval(p);
            Ok(dir[0] * x[0] + dir[1] * x[1])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_length_is_exact() {
        assert!((radial_length(&[1.5; 40]) - 3.0 * PI).abs() < 1e-13);
        let rho: Vec<f64> = (0..256).map(|j| 1.0 + 0.05 * (2.0 * PI * j as f64 / 256.0 * 2.0).cos()).collect();
        // second-order against the spectrally evaluated ellipse-like length
        assert!((radial_length(&rho) - 6.298873696604580).abs() < 1e-4);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rho: Vec<f64> = (0..16).map(|j| 1.0 + 0.1 * (2.0 * PI * j as f64 / 16.0 * 2.0).cos()).collect();
        let prob = Problem::new(&rho, 0.01);
        let a = prob.a_prev.map(|x| x * 1.01) + DVector::from_fn(16, |j, _| 1e-3 * (j as f64).sin());
        let (g, hs) = prob.gradient_hessian(&a);
        let eps = 1e-6;
        for k in [0usize, 5, 11] {
            let mut ap = a.clone();
            ap[k] += eps;
            let mut am = a.clone();
            am[k] -= eps;
            let fd = (prob.objective(&ap).unwrap().0 - prob.objective(&am).unwrap().0) / (2.0 * eps);
            assert!((fd - g[k]).abs() < 1e-6 * g[k].abs().max(1.0));
            let (gp, _) = prob.gradient_hessian(&ap);
            let (gm, _) = prob.gradient_hessian(&am);
            for j in 0..16 {
                let hfd = (gp[j] - gm[j]) / (2.0 * eps);
                assert!((hfd - hs[(j, k)]).abs() < 1e-4 * hs[(j, k)].abs().max(1.0));
            }
        }
    }

    #[test]
    fn not_star_shaped() {
        assert!(matches!(sd_minmove_step(&[1.0, -0.1, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0], 0.1), Err(Error::NotStarShaped)));
    }
}
