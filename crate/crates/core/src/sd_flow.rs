//! Surface diffusion `V = κ_ss` (outward normal velocity, `κ > 0` on convex
//! counterclockwise curves) by a parametric finite-element scheme.
//!
//! Unknowns per marker are the displacement `ΔX_i` and the curvature `κ_i`.
//! The normal is the average of the old and new segment normals, which makes
//! the enclosed polygon area an exact invariant of the nonlinear step and the
//! polygon length non-increasing for every `dt`. The nonlinearity is resolved
//! by fixed-point iteration on the normals, each sweep being a cyclic
//! block-tridiagonal solve. Tangential marker motion is implicit in the
//! scheme and keeps markers asymptotically equidistributed.

use crate::curve::ClosedCurve;
use crate::domain::DiskDomain;
use crate::error::{Error, Result};
use crate::linalg::solve_cyclic_block3;
use crate::trace::{FlowTrace, SdSample};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::PI;

const PICARD_TOL: f64 = 1e-14;
const PICARD_MAX: usize = 100;

/// Convergence threshold on `K_osc`.
pub const K_OSC_CONVERGED: f64 = 1e-8;

fn rot(v: [f64; 2]) -> [f64; 2] {
    [v[1], -v[0]]
}

fn diff(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [b[0] - a[0], b[1] - a[1]]
}

/// One step of size `dt`; returns the new curve and the marker curvatures.
pub fn sd_step_with_curvature(curve: &ClosedCurve, dt: f64) -> Result<(ClosedCurve, Vec<f64>)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain { what: "time step", value: dt });
    }
    let n = curve.len();
    let x = &curve.markers;
    let seg: Vec<[f64; 2]> = (0..n).map(|j| diff(x[j], x[(j + 1) % n])).collect();
    let inv_h: Vec<f64> = seg.iter().map(|d| 1.0 / d[0].hypot(d[1])).collect();
    let rhs2: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let p = (i + n - 1) % n;
            [
                -(inv_h[i] * seg[i][0] - inv_h[p] * seg[p][0]),
                -(inv_h[i] * seg[i][1] - inv_h[p] * seg[p][1]),
            ]
        })
        .collect();
    let scale = curve.max_radius().max(1e-300);

    let mut dx = vec![[0.0; 2]; n];
    let mut kappa = vec![0.0; n];
    let mut a = vec![Matrix3::zeros(); n];
    let mut b = vec![Matrix3::zeros(); n];
    let mut c = vec![Matrix3::zeros(); n];
    let mut f = vec![Vector3::zeros(); n];
    for iter in 0..PICARD_MAX {
        // averaged segment normals, scaled by the old segment length
        let normals: Vec<[f64; 2]> = (0..n)
            .map(|j| {
                let k = (j + 1) % n;
                let new = [seg[j][0] + dx[k][0] - dx[j][0], seg[j][1] + dx[k][1] - dx[j][1]];
                let r = rot([seg[j][0] + new[0], seg[j][1] + new[1]]);
                [0.5 * r[0], 0.5 * r[1]]
            })
            .collect();
        for i in 0..n {
            let p = (i + n - 1) % n;
            let w = [normals[p][0] + normals[i][0], normals[p][1] + normals[i][1]];
            let s = inv_h[p] + inv_h[i];
            a[i] = Matrix3::new(0.0, 0.0, -inv_h[p], inv_h[p], 0.0, 0.0, 0.0, inv_h[p], 0.0);
            c[i] = Matrix3::new(0.0, 0.0, -inv_h[i], inv_h[i], 0.0, 0.0, 0.0, inv_h[i], 0.0);
            b[i] = Matrix3::new(
                w[0] / (2.0 * dt),
                w[1] / (2.0 * dt),
                s,
                -s,
                0.0,
                0.5 * w[0],
                0.0,
                -s,
                0.5 * w[1],
            );
            f[i] = Vector3::new(0.0, rhs2[i][0], rhs2[i][1]);
        }
        let z = solve_cyclic_block3(&a, &b, &c, &f)?;
        let mut change: f64 = 0.0;
        for i in 0..n {
            change = change.max((z[i][0] - dx[i][0]).abs()).max((z[i][1] - dx[i][1]).abs());
            dx[i] = [z[i][0], z[i][1]];
            kappa[i] = z[i][2];
        }
        if change <= PICARD_TOL * scale {
            break;
        }
        if iter + 1 == PICARD_MAX {
            return Err(Error::NotConverged { residual: change });
        }
    }
    let markers: Vec<[f64; 2]> = (0..n).map(|i| [x[i][0] + dx[i][0], x[i][1] + dx[i][1]]).collect();
    let next = ClosedCurve::new(markers)?;
    let blow = next
        .menger_curvature()
        .iter()
        .enumerate()
        .map(|(i, k)| k.abs() * next.segment_length(i).max(next.segment_length((i + n - 1) % n)))
        .fold(0.0, f64::max);
    if blow > 1.0 {
        return Err(Error::CurvatureBlowUp(blow));
    }
    if let Some((i, j)) = next.find_self_intersection() {
        return Err(Error::SelfIntersection(i, j));
    }
    Ok((next, kappa))
}

pub fn sd_step(curve: &ClosedCurve, dt: f64) -> Result<ClosedCurve> {
    Ok(sd_step_with_curvature(curve, dt)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdOptions {
    pub dt: f64,
    /// Record a trace sample every `cadence` steps.
    pub cadence: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SdReport {
    pub steps: usize,
    /// First sampled time with `K_osc < K_OSC_CONVERGED`.
    pub converged_at: Option<f64>,
    /// Fitted exponential decay rate of `K_osc`.
    pub decay_rate: Option<f64>,
    /// `√(A/π)` of the final curve.
    pub limit_radius: f64,
    /// Set when a marker left `|x| < R0 - δ`.
    pub domain_exit: bool,
}

pub(crate) fn sample(t: f64, curve: &ClosedCurve) -> Result<SdSample> {
    let g = curve.geometry()?;
    Ok(SdSample { t, length: g.length, area: g.area, k_osc: g.k_osc, iso_ratio: g.iso_ratio })
}

/// Least-squares slope of `ln K_osc` against `t` above the rounding floor.
pub(crate) fn fit_decay(samples: &[SdSample]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.k_osc > 1e-13 && s.t > 0.0)
        .map(|s| (s.t, s.k_osc.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    Some(-num / den)
}

/// Evolves `curve0` up to time `horizon`.
pub fn sd_evolve(
    curve0: &ClosedCurve,
    horizon: f64,
    opts: SdOptions,
    domain: Option<&DiskDomain>,
) -> Result<(ClosedCurve, FlowTrace<SdSample>, SdReport)> {
    if !(horizon >= 0.0) || !(opts.dt > 0.0) {
        return Err(Error::Domain { what: "time horizon", value: horizon });
    }
    let steps = (horizon / opts.dt).ceil() as usize;
    let dt = if steps > 0 { horizon / steps as f64 } else { opts.dt };
    let cadence = opts.cadence.max(1);
    let limit = domain.map(|d| d.inner_limit());
    let exits = |c: &ClosedCurve| limit.is_some_and(|l| c.max_radius() >= l);

    let mut curve = curve0.clone();
    let mut trace = FlowTrace::new();
    trace.push(sample(0.0, &curve)?);
    let mut domain_exit = exits(&curve);
    for k in 1..=steps {
        curve = sd_step(&curve, dt)?;
        domain_exit |= exits(&curve);
        if k % cadence == 0 || k == steps {
            trace.push(sample(k as f64 * dt, &curve)?);
        }
    }
    let converged_at = trace.samples.iter().find(|s| s.k_osc < K_OSC_CONVERGED).map(|s| s.t);
    let decay_rate = converged_at.and_then(|_| fit_decay(&trace.samples));
    let area = curve.geometry()?.area;
    let report = SdReport { steps, converged_at, decay_rate, limit_radius: (area.abs() / PI).sqrt(), domain_exit };
    Ok((curve, trace, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_polygon_is_stationary() {
        let c = ClosedCurve::circle(1.3, 64).unwrap();
        let (next, kappa) = sd_step_with_curvature(&c, 0.1).unwrap();
        for (p, q) in c.markers.iter().zip(&next.markers) {
            assert!((p[0] - q[0]).abs() < 1e-13 && (p[1] - q[1]).abs() < 1e-13);
        }
        // discrete curvature of the polygon, close to 1/r
        assert!(kappa.iter().all(|k| (k - 1.0 / 1.3).abs() < 1e-3));
    }

    #[test]
    fn rejects_bad_step() {
        let c = ClosedCurve::circle(1.0, 32).unwrap();
        assert!(sd_step(&c, 0.0).is_err());
    }
}
