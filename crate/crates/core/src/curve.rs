//! Closed marker curves and their geometric functionals.
//!
//! Markers are treated as samples of a smooth periodic curve `X(p)`,
//! `p ∈ [0, 2π)`, at equispaced parameter values; derivatives come from the
//! trigonometric interpolant, so length, area and curvature are spectrally
//! accurate for smooth shapes. Polygon length and shoelace area are kept
//! separately because the surface-diffusion scheme controls those exactly.

use crate::error::{Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;
use std::f64::consts::PI;

pub const MIN_MARKERS: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct ClosedCurve {
    pub markers: Vec<[f64; 2]>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SdDiagnostics {
    pub length: f64,
    pub area: f64,
    pub k_osc: f64,
    pub iso_ratio: f64,
    pub mean_curvature: f64,
    /// `(1/2π) ∫ κ ds`.
    pub turning_number: f64,
}

/// First and second parameter derivatives of periodic samples.
fn spectral_derivatives(values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = values.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut hat: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fwd.process(&mut hat);
    let wave = |k: usize| -> f64 {
        if 2 * k < n {
            k as f64
        } else {
            k as f64 - n as f64
        }
    };
    let mut d1: Vec<Complex<f64>> = hat
        .iter()
        .enumerate()
        .map(|(k, &c)| if 2 * k == n { Complex::new(0.0, 0.0) } else { c * Complex::new(0.0, wave(k)) })
        .collect();
    let mut d2: Vec<Complex<f64>> = hat.iter().enumerate().map(|(k, &c)| c * (-wave(k) * wave(k))).collect();
    inv.process(&mut d1);
    inv.process(&mut d2);
    let scale = 1.0 / n as f64;
    (d1.iter().map(|c| c.re * scale).collect(), d2.iter().map(|c| c.re * scale).collect())
}

/// Trigonometric interpolant `X(p)` of the markers, `p ∈ [0, 2π)` with marker
/// `j` at `p = 2πj/N`.
#[derive(Clone, Debug)]
pub struct TrigInterpolant {
    n: usize,
    x: Vec<Complex<f64>>,
    y: Vec<Complex<f64>>,
}

impl TrigInterpolant {
    /// Point and parameter derivative at `p`.
    pub fn eval(&self, p: f64) -> ([f64; 2], [f64; 2]) {
        let n = self.n;
        let mut out = [0.0; 4];
        for k in 0..n {
            let (wave, weight) = if 2 * k < n {
                (k as f64, 1.0)
            } else if 2 * k == n {
                // Nyquist mode split evenly between ±N/2
                (k as f64, 0.0)
            } else {
                (k as f64 - n as f64, 1.0)
            };
            let (sn, cs) = (wave * p).sin_cos();
            let e = Complex::new(cs, sn);
            let de = Complex::new(-wave * sn, wave * cs);
            if weight == 0.0 {
                let c = (wave * p).cos();
                out[0] += self.x[k].re * c;
                out[1] += self.y[k].re * c;
                out[2] -= self.x[k].re * wave * (wave * p).sin();
                out[3] -= self.y[k].re * wave * (wave * p).sin();
                continue;
            }
            out[0] += (self.x[k] * e).re;
            out[1] += (self.y[k] * e).re;
            out[2] += (self.x[k] * de).re;
            out[3] += (self.y[k] * de).re;
        }
        let s = 1.0 / n as f64;
        ([out[0] * s, out[1] * s], [out[2] * s, out[3] * s])
    }
}

impl ClosedCurve {
    pub fn new(markers: Vec<[f64; 2]>) -> Result<Self> {
        let c = ClosedCurve { markers };
        c.check_markers()?;
        Ok(c)
    }

    /// `r = ρ(θ)` sampled at `n` equispaced angles.
    pub fn from_radial<F: Fn(f64) -> f64>(rho: F, n: usize) -> Result<Self> {
        let markers = (0..n)
            .map(|j| {
                let t = 2.0 * PI * j as f64 / n as f64;
                let r = rho(t);
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        Self::new(markers)
    }

    pub fn circle(radius: f64, n: usize) -> Result<Self> {
        Self::from_radial(|_| radius, n)
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    fn check_markers(&self) -> Result<()> {
        let n = self.len();
        if n < MIN_MARKERS {
            return Err(Error::DegenerateCurve(format!("{n} markers, need at least {MIN_MARKERS}")));
        }
        if self.markers.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::DegenerateCurve("non-finite marker".into()));
        }
        let scale = self.markers.iter().map(|p| p[0].abs().max(p[1].abs())).fold(0.0, f64::max);
        for i in 0..n {
            if self.segment_length(i) <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::DegenerateCurve(format!("zero-length segment at marker {i}")));
            }
        }
        Ok(())
    }

    /// Length of segment `i`, from marker `i` to `i + 1`.
    pub fn segment_length(&self, i: usize) -> f64 {
        let n = self.len();
        let (a, b) = (self.markers[i], self.markers[(i + 1) % n]);
        (b[0] - a[0]).hypot(b[1] - a[1])
    }

    pub fn polygon_length(&self) -> f64 {
        (0..self.len()).map(|i| self.segment_length(i)).sum()
    }

    /// Signed shoelace area, positive for counterclockwise markers.
    pub fn polygon_area(&self) -> f64 {
        let n = self.len();
        let mut s = 0.0;
        for i in 0..n {
            let (a, b) = (self.markers[i], self.markers[(i + 1) % n]);
            s += a[0] * b[1] - b[0] * a[1];
        }
        0.5 * s
    }

    /// `+1` for counterclockwise, `-1` for clockwise markers.
    pub fn orientation(&self) -> f64 {
        self.polygon_area().signum()
    }

    /// Signed curvature of the circle through each marker and its neighbours.
    pub fn menger_curvature(&self) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let a = self.markers[(i + n - 1) % n];
                let b = self.markers[i];
                let c = self.markers[(i + 1) % n];
                let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
                let ab = (b[0] - a[0]).hypot(b[1] - a[1]);
                let bc = (c[0] - b[0]).hypot(c[1] - b[1]);
                let ca = (a[0] - c[0]).hypot(a[1] - c[1]);
                2.0 * cross / (ab * bc * ca)
            })
            .collect()
    }

    /// Curvature and arc-length density `|X_p|` of the interpolating curve.
    pub fn spectral_curvature(&self) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = self.markers.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = self.markers.iter().map(|p| p[1]).collect();
        let (xp, xpp) = spectral_derivatives(&xs);
        let (yp, ypp) = spectral_derivatives(&ys);
        let speed: Vec<f64> = xp.iter().zip(&yp).map(|(a, b)| a.hypot(*b)).collect();
        let kappa = (0..self.len())
            .map(|j| (xp[j] * ypp[j] - yp[j] * xpp[j]) / speed[j].powi(3))
            .collect();
        (kappa, speed)
    }

    pub fn geometry(&self) -> Result<SdDiagnostics> {
        self.check_markers()?;
        let n = self.len();
        let dp = 2.0 * PI / n as f64;
        let xs: Vec<f64> = self.markers.iter().map(|p| p[0]).collect();
        let ys: Vec<f64> = self.markers.iter().map(|p| p[1]).collect();
        let (xp, _) = spectral_derivatives(&xs);
        let (yp, _) = spectral_derivatives(&ys);
        let (kappa, speed) = self.spectral_curvature();
        let length: f64 = speed.iter().sum::<f64>() * dp;
        let area = 0.5 * dp * (0..n).map(|j| xs[j] * yp[j] - ys[j] * xp[j]).sum::<f64>();
        let total: f64 = kappa.iter().zip(&speed).map(|(k, w)| k * w).sum::<f64>() * dp;
        let mean = total / length;
        let osc: f64 = kappa.iter().zip(&speed).map(|(k, w)| (k - mean).powi(2) * w).sum::<f64>() * dp;
        Ok(SdDiagnostics {
            length,
            area,
            k_osc: length * osc,
            iso_ratio: length * length / (4.0 * PI * area.abs()),
            mean_curvature: mean,
            turning_number: total / (2.0 * PI),
        })
    }

    pub fn interpolant(&self) -> TrigInterpolant {
        let n = self.len();
        let fwd = FftPlanner::<f64>::new().plan_fft_forward(n);
        let mut x: Vec<Complex<f64>> = self.markers.iter().map(|p| Complex::new(p[0], 0.0)).collect();
        let mut y: Vec<Complex<f64>> = self.markers.iter().map(|p| Complex::new(p[1], 0.0)).collect();
        fwd.process(&mut x);
        fwd.process(&mut y);
        TrigInterpolant { n, x, y }
    }

    /// Largest distance of a marker from the origin.
    pub fn max_radius(&self) -> f64 {
        self.markers.iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max)
    }

    /// First pair of non-adjacent segments that cross, by a sweep over
    /// segments sorted by their left end.
    pub fn find_self_intersection(&self) -> Option<(usize, usize)> {
        let n = self.len();
        let seg = |i: usize| (self.markers[i], self.markers[(i + 1) % n]);
        let mut order: Vec<(f64, f64, usize)> = (0..n)
            .map(|i| {
                let (a, b) = seg(i);
                (a[0].min(b[0]), a[0].max(b[0]), i)
            })
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut active: Vec<(f64, usize)> = Vec::new();
        for &(lo, hi, i) in &order {
            active.retain(|&(end, _)| end >= lo);
            for &(_, j) in &active {
                let adjacent = (i + 1) % n == j || (j + 1) % n == i;
                if !adjacent && segments_cross(seg(i), seg(j)) {
                    return Some((i.min(j), i.max(j)));
                }
            }
            active.push((hi, i));
        }
        None
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(s: ([f64; 2], [f64; 2]), t: ([f64; 2], [f64; 2])) -> bool {
    let d1 = orient(t.0, t.1, s.0);
    let d2 = orient(t.0, t.1, s.1);
    let d3 = orient(s.0, s.1, t.0);
    let d4 = orient(s.0, s.1, t.1);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0 && !(d1 == 0.0 && d2 == 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate() {
        assert!(ClosedCurve::circle(1.0, 8).is_err());
        let mut m = ClosedCurve::circle(1.0, 32).unwrap().markers;
        m[3] = m[2];
        assert!(ClosedCurve::new(m).is_err());
    }

    #[test]
    fn interpolant_reproduces_markers() {
        let c = ClosedCurve::from_radial(|t| 1.0 + 0.1 * (3.0 * t).cos(), 32).unwrap();
        let f = c.interpolant();
        for (j, m) in c.markers.iter().enumerate() {
            let (x, _) = f.eval(2.0 * PI * j as f64 / 32.0);
            assert!((x[0] - m[0]).abs() < 1e-13 && (x[1] - m[1]).abs() < 1e-13);
        }
        // between markers the circle is reproduced exactly
        let (x, dx) = ClosedCurve::circle(2.0, 16).unwrap().interpolant().eval(0.1);
        assert!((x[0] - 2.0 * 0.1f64.cos()).abs() < 1e-13 && (dx[1] - 2.0 * 0.1f64.cos()).abs() < 1e-13);
    }

    #[test]
    fn menger_is_exact_on_circles() {
        let c = ClosedCurve::circle(2.0, 40).unwrap();
        for k in c.menger_curvature() {
            assert!((k - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn detects_figure_eight() {
        let c = ClosedCurve::new(
            (0..64)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / 64.0;
                    [t.sin(), (2.0 * t).sin() * 0.5]
                })
                .collect(),
        )
        .unwrap();
        assert!(c.find_self_intersection().is_some());
        assert!(ClosedCurve::circle(1.0, 64).unwrap().find_self_intersection().is_none());
    }

    #[test]
    fn clockwise_orientation() {
        let mut m = ClosedCurve::circle(1.0, 32).unwrap().markers;
        m.reverse();
        let c = ClosedCurve::new(m).unwrap();
        assert_eq!(c.orientation(), -1.0);
        assert!((c.geometry().unwrap().turning_number + 1.0).abs() < 1e-12);
    }
}
