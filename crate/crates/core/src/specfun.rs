//! Bessel functions of orders 0 and 1 and their modulus–phase form.
//!
//! `J_n` and `Y_n` are summed from their ascending series in double-double
//! arithmetic for `x <= SERIES_MAX` and from the Hankel expansions above it.
//! The Hankel branch yields the modulus `M_n` and a continuous phase `θ_n`
//! directly; below the crossover the phase is `atan2(Y_n, J_n)` shifted by the
//! multiple of `2π` that places it nearest the large-`x` phase
//! `x - (2n+1)π/4`, which keeps a single branch with `θ_1(0+) = -π/2`.
//!
//! `K_0`, `K_1` exist to evaluate Nicholson's integral, the independent
//! oracle for `M_n^2`.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::quad;
use std::f64::consts::{FRAC_2_PI, FRAC_PI_2, PI};
use std::sync::OnceLock;

/// Above this argument the Hankel expansions are used.
pub const SERIES_MAX: f64 = 25.0;

/// Guard margin above the phase infimum `-π/2` accepted by [`phase1_inverse`].
pub const PHASE_GUARD: f64 = 1e-14;

/// `K_0`/`K_1` underflow horizon; `e^{-x}` leaves the normal range past it.
pub const K_UNDERFLOW: f64 = 700.0;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const PI_4: Dd = Dd { hi: 0.785_398_163_397_448_3, lo: 3.061_616_997_868_383e-17 };
const PI_3_4: Dd = Dd { hi: 2.356_194_490_192_345, lo: 9.184_850_993_605_148e-17 };

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    J,
    Y,
    K,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Zero,
    One,
}

impl Order {
    pub fn index(self) -> usize {
        match self {
            Order::Zero => 0,
            Order::One => 1,
        }
    }
}

/// `J_0, J_1, Y_0, Y_1` at one positive argument.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesselEval {
    pub x: f64,
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
}

/// Moduli and continuous phases of orders 0 and 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarEval {
    pub x: f64,
    pub m0: f64,
    pub m1: f64,
    pub theta0: f64,
    pub theta1: f64,
}

impl BesselEval {
    pub fn at(x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain { what: "Y_n", value: x });
        }
        Ok(jy(x))
    }
}

impl PolarEval {
    pub fn at(x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::Domain { what: "polar form", value: x });
        }
        Ok(polar_both(x))
    }
}

/// `J`, `Y` or `K` of order 0 or 1.
pub fn bessel(kind: Kind, order: Order, x: f64) -> Result<f64> {
    match kind {
        Kind::J => {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(Error::Domain { what: "J_n", value: x });
            }
            if x == 0.0 {
                return Ok(if order == Order::Zero { 1.0 } else { 0.0 });
            }
            let e = jy(x);
            Ok(if order == Order::Zero { e.j0 } else { e.j1 })
        }
        Kind::Y => {
            let e = BesselEval::at(x)?;
            Ok(if order == Order::Zero { e.y0 } else { e.y1 })
        }
        Kind::K => {
            if !(x > 0.0) || x.is_nan() {
                return Err(Error::Domain { what: "K_n", value: x });
            }
            if x > K_UNDERFLOW {
                return Err(Error::Underflow { what: "K_n", value: x });
            }
            let (k0, k1) = k01(x);
            Ok(if order == Order::Zero { k0 } else { k1 })
        }
    }
}

pub fn j0(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        jy(x.abs()).j0
    }
}

pub fn j1(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * jy(x.abs()).j1
    }
}

/// `(M_n, θ_n)` with the continuous phase branch.
pub fn polar(order: Order, x: f64) -> Result<(f64, f64)> {
    let p = PolarEval::at(x)?;
    Ok(match order {
        Order::Zero => (p.m0, p.theta0),
        Order::One => (p.m1, p.theta1),
    })
}

/// `θ_1(x)`, panicking-free for `x > 0`; callers validate the argument.
pub(crate) fn theta1(x: f64) -> f64 {
    polar_both(x).theta1
}

pub(crate) fn jy(x: f64) -> BesselEval {
    if x <= SERIES_MAX {
        series_jy(x)
    } else {
        let (j0, y0, _, _) = hankel(0, x);
        let (j1, y1, _, _) = hankel(1, x);
        BesselEval { x, j0, j1, y0, y1 }
    }
}

pub(crate) fn polar_both(x: f64) -> PolarEval {
    if x <= SERIES_MAX {
        let e = series_jy(x);
        let m0 = e.j0.hypot(e.y0);
        let m1 = e.j1.hypot(e.y1);
        let theta0 = unwrap_phase(e.y0.atan2(e.j0), x - PI_4.hi);
        let theta1 = unwrap_phase(e.y1.atan2(e.j1), x - PI_3_4.hi);
        PolarEval { x, m0, m1, theta0, theta1 }
    } else {
        let (_, _, m0, theta0) = hankel(0, x);
        let (_, _, m1, theta1) = hankel(1, x);
        PolarEval { x, m0, m1, theta0, theta1 }
    }
}

fn unwrap_phase(raw: f64, reference: f64) -> f64 {
    let k = ((reference - raw) / (2.0 * PI)).round();
    raw + 2.0 * PI * k
}

/// Ascending series for `J_0, J_1, Y_0, Y_1`, accumulated in double-double.
fn series_jy(x: f64) -> BesselEval {
    let z = Dd::square(x).mul_f64(0.25);
    let neg_z = -z;
    let half_x = 0.5 * x;

    // term_k = (-z)^k / (k!)^2, s_k = (-z)^k / (k! (k+1)!)
    let mut term = Dd::ONE;
    let mut s = Dd::ONE;
    let mut h_prev = Dd::ZERO; // H_k
    let mut sum_j0 = Dd::ONE;
    let mut sum_j1 = Dd::ONE;
    let mut sum_y0 = Dd::ZERO;
    let mut sum_y1 = Dd::ONE; // (H_0 + H_1) s_0 = 1
    for k in 1..400u32 {
        let kf = k as f64;
        let h_k = h_prev + Dd::recip(kf);
        let h_k1 = h_k + Dd::recip(kf + 1.0);
        term = (term * neg_z).div_f64(kf * kf);
        s = (s * neg_z).div_f64(kf * (kf + 1.0));
        sum_j0 = sum_j0 + term;
        sum_j1 = sum_j1 + s;
        sum_y0 = sum_y0 - h_k * term;
        sum_y1 = sum_y1 + (h_k + h_k1) * s;
        h_prev = h_k;
        if kf * kf > z.hi && term.abs_hi() < 1e-34 && (s.abs_hi() * h_k1.hi) < 1e-34 {
            break;
        }
    }
    let log_term = (half_x).ln() + EULER_GAMMA;
    let j0 = sum_j0.to_f64();
    let j1_dd = sum_j1.mul_f64(half_x);
    let j1 = j1_dd.to_f64();
    let y0 = FRAC_2_PI * (sum_j0.mul_f64(log_term) + sum_y0).to_f64();
    let y1_dd = j1_dd.mul_f64(2.0 * log_term) - sum_y1.mul_f64(half_x);
    let y1 = y1_dd.to_f64() / PI - FRAC_2_PI / x;
    BesselEval { x, j0, j1, y0, y1 }
}

/// Hankel expansion for order `n`: returns `(J_n, Y_n, M_n, θ_n)`.
fn hankel(n: u32, x: f64) -> (f64, f64, f64, f64) {
    let mu = 4.0 * (n * n) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..200u32 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() > last {
            break;
        }
        last = term.abs();
        // P collects even k with sign (-1)^{k/2}, Q odd k with (-1)^{(k-1)/2}
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let offset = if n == 0 { PI_4 } else { PI_3_4 };
    let chi = Dd::from_f64(x) - offset;
    let (s_hi, c_hi) = chi.hi.sin_cos();
    let cos_chi = c_hi - s_hi * chi.lo;
    let sin_chi = s_hi + c_hi * chi.lo;
    let amp = (FRAC_2_PI / x).sqrt();
    let j = amp * (p * cos_chi - q * sin_chi);
    let y = amp * (p * sin_chi + q * cos_chi);
    let m = amp * p.hypot(q);
    let theta = chi.hi + (chi.lo + q.atan2(p));
    (j, y, m, theta)
}

/// Inverse of the continuous phase `θ_1`, which increases from `-π/2`.
pub fn phase1_inverse(target: f64) -> Result<f64> {
    if !(target >= -FRAC_PI_2 + PHASE_GUARD) || !target.is_finite() {
        return Err(Error::Domain { what: "inverse of theta_1", value: target });
    }
    let f = |x: f64| theta1(x) - target;
    let guess = if target > 1.0 {
        target + 3.0 * PI / 4.0
    } else {
        (4.0 * (target + FRAC_PI_2) / PI).sqrt().clamp(1e-300, 3.0)
    };
    let mut lo = guess;
    let mut hi = guess;
    while f(lo) > 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::RootNotFound("theta_1 inverse: lower bracket".into()));
        }
    }
    while f(hi) < 0.0 {
        hi = hi * 2.0 + 1.0;
    }
    let mut x = guess.clamp(lo, hi);
    for _ in 0..200 {
        let p = polar_both(x);
        let r = p.theta1 - target;
        if r == 0.0 {
            return Ok(x);
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let slope = FRAC_2_PI / (x * p.m1 * p.m1);
        let mut next = x - r / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::RootNotFound("theta_1 inverse: no convergence".into()))
}

/// First positive zero of `J_1`, `q̄ = θ_1^{-1}(π/2)`.
pub fn qbar() -> f64 {
    static QBAR: OnceLock<f64> = OnceLock::new();
    *QBAR.get_or_init(|| {
        let (mut lo, mut hi) = (3.0, 4.5);
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if j1(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..50 {
            let e = jy(x);
            // J_1' = J_0 - J_1/x
            let step = e.j1 / (e.j0 - e.j1 / x);
            x -= step;
            if step.abs() < 1e-16 * x {
                break;
            }
        }
        x
    })
}

/// `J_0(q̄)`, the trough value of the dimple family.
pub fn j0_at_qbar() -> f64 {
    static V: OnceLock<f64> = OnceLock::new();
    *V.get_or_init(|| j0(qbar()))
}

/// `(K_0(z), K_1(z))` without the underflow check; zero past the horizon.
pub(crate) fn k01(z: f64) -> (f64, f64) {
    if z > 745.0 {
        (0.0, 0.0)
    } else if z <= 1.0 {
        k01_series(z)
    } else if z <= 20.0 {
        k01_trapezoid(z)
    } else {
        k01_asymptotic(z)
    }
}

fn k01_series(z: f64) -> (f64, f64) {
    let y = 0.25 * z * z;
    let log_term = (0.5 * z).ln() + EULER_GAMMA;
    let mut t0 = 1.0; // y^k/(k!)^2
    let mut t1 = 1.0; // y^k/(k!(k+1)!)
    let mut h = 0.0;
    let mut i0 = 1.0;
    let mut i1 = 1.0;
    let mut s0 = 0.0;
    let mut s1 = 1.0; // (H_0 + H_1) t1_0
    for k in 1..60 {
        let kf = k as f64;
        h += 1.0 / kf;
        let h1 = h + 1.0 / (kf + 1.0);
        t0 *= y / (kf * kf);
        t1 *= y / (kf * (kf + 1.0));
        i0 += t0;
        i1 += t1;
        s0 += h * t0;
        s1 += (h + h1) * t1;
        if t0 < 1e-18 * i0 {
            break;
        }
    }
    let half = 0.5 * z;
    let k0 = -log_term * i0 + s0;
    // K_1 = 1/z + ln(z/2) I_1 - (z/4) sum (psi(k+1)+psi(k+2)) y^k/(k!(k+1)!)
    let k1 = 1.0 / z + log_term * half * i1 - 0.5 * half * s1;
    (k0, k1)
}

fn k01_trapezoid(z: f64) -> (f64, f64) {
    // K_n(z) = int_0^inf cosh(n s) exp(-z cosh s) ds, trapezoid with geometric
    // convergence for this analytic, rapidly decaying integrand.
    let h = 1.0 / 16.0;
    let base = (-z).exp();
    let mut k0 = 0.5 * base;
    let mut k1 = 0.5 * base;
    let mut j = 1;
    loop {
        let s = h * j as f64;
        let c = s.cosh();
        let e = (-z * c).exp();
        k0 += e;
        k1 += c * e;
        if z * (c - 1.0) > 90.0 {
            break;
        }
        j += 1;
    }
    (h * k0, h * k1)
}

fn k01_asymptotic(z: f64) -> (f64, f64) {
    let pref = (PI / (2.0 * z)).sqrt() * (-z).exp();
    let sum = |mu: f64| {
        let mut s = 1.0;
        let mut term: f64 = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..100 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * z);
            if term.abs() > last {
                break;
            }
            last = term.abs();
            s += term;
            if term.abs() < 1e-18 {
                break;
            }
        }
        s
    };
    (pref * sum(0.0), pref * sum(4.0))
}

/// Nicholson's integral `(8/π²) ∫_0^∞ cosh(2nt) K_0(2x sinh t) dt = M_n(x)²`.
pub fn nicholson_modulus_sq(order: Order, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain { what: "Nicholson integral", value: x });
    }
    let weight = match order {
        Order::Zero => |_t: f64| 1.0,
        Order::One => |t: f64| (2.0 * t).cosh(),
    };
    let integral = quad::exp_sinh(|t| weight(t) * k01(2.0 * x * t.sinh()).0, 1e-12)?;
    Ok(8.0 / (PI * PI) * integral)
}
