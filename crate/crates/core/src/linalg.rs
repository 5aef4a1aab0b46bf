//! Structured linear solvers: cyclic 3×3 block-tridiagonal and banded LU.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

/// Solves `A_i z_{i-1} + B_i z_i + C_i z_{i+1} = f_i` with periodic indexing.
///
/// Block elimination writes `z_i = p_i + Q_i z_{n-1}` for `i < n-1` and closes
/// the cycle with a 3×3 solve; a dense LU of the assembled system is used if
/// any pivot block is singular.
pub fn solve_cyclic_block3(
    a: &[Matrix3<f64>],
    b: &[Matrix3<f64>],
    c: &[Matrix3<f64>],
    f: &[Vector3<f64>],
) -> Result<Vec<Vector3<f64>>> {
    let n = b.len();
    if n < 3 || a.len() != n || c.len() != n || f.len() != n {
        return Err(Error::Singular);
    }
    match eliminate(a, b, c, f) {
        Some(z) if z.iter().all(|v| v.iter().all(|x| x.is_finite())) => Ok(z),
        _ => dense_fallback(a, b, c, f),
    }
}

fn eliminate(
    a: &[Matrix3<f64>],
    b: &[Matrix3<f64>],
    c: &[Matrix3<f64>],
    f: &[Vector3<f64>],
) -> Option<Vec<Vector3<f64>>> {
    let n = b.len();
    let m = n - 1; // rows 0..m-1 are eliminated, z_{m} is the border unknown
    let mut inv = Vec::with_capacity(m);
    let mut g = Vec::with_capacity(m); // vector part of the modified right-hand side
    let mut h = Vec::with_capacity(m); // coefficient of z_{m}
    for i in 0..m {
        let mut bi = b[i];
        let mut gi = f[i];
        let mut hi = Matrix3::zeros();
        if i == 0 {
            hi -= a[0];
        } else {
            let mult = a[i] * inv[i - 1];
            bi -= mult * c[i - 1];
            gi -= mult * g[i - 1];
            hi -= mult * h[i - 1];
        }
        if i == m - 1 {
            hi -= c[i];
        }
        let bi_inv = bi.try_inverse()?;
        inv.push(bi_inv);
        g.push(gi);
        h.push(hi);
    }
    // back substitution for p_i, Q_i
    let mut p = vec![Vector3::zeros(); m];
    let mut q = vec![Matrix3::zeros(); m];
    p[m - 1] = inv[m - 1] * g[m - 1];
    q[m - 1] = inv[m - 1] * h[m - 1];
    for i in (0..m - 1).rev() {
        p[i] = inv[i] * (g[i] - c[i] * p[i + 1]);
        q[i] = inv[i] * (h[i] - c[i] * q[i + 1]);
    }
    // last row: A_m z_{m-1} + B_m z_m + C_m z_0 = f_m
    let lhs = a[m] * q[m - 1] + b[m] + c[m] * q[0];
    let rhs = f[m] - a[m] * p[m - 1] - c[m] * p[0];
    let zm = lhs.lu().solve(&rhs)?;
    let mut z: Vec<Vector3<f64>> = (0..m).map(|i| p[i] + q[i] * zm).collect();
    z.push(zm);
    Some(z)
}

fn dense_fallback(
    a: &[Matrix3<f64>],
    b: &[Matrix3<f64>],
    c: &[Matrix3<f64>],
    f: &[Vector3<f64>],
) -> Result<Vec<Vector3<f64>>> {
    let n = b.len();
    let mut mat = DMatrix::<f64>::zeros(3 * n, 3 * n);
    let mut rhs = DVector::<f64>::zeros(3 * n);
    for i in 0..n {
        let prev = (i + n - 1) % n;
        let next = (i + 1) % n;
        for r in 0..3 {
            rhs[3 * i + r] = f[i][r];
            for s in 0..3 {
                mat[(3 * i + r, 3 * prev + s)] += a[i][(r, s)];
                mat[(3 * i + r, 3 * i + s)] += b[i][(r, s)];
                mat[(3 * i + r, 3 * next + s)] += c[i][(r, s)];
            }
        }
    }
    let sol = mat.lu().solve(&rhs).ok_or(Error::Singular)?;
    Ok((0..n).map(|i| Vector3::new(sol[3 * i], sol[3 * i + 1], sol[3 * i + 2])).collect())
}

/// Square banded matrix with `kl` sub- and `ku` super-diagonals, factored by
/// Gaussian elimination with partial pivoting (fill-in widens the upper band to
/// `kl + ku`).
#[derive(Clone, Debug)]
pub struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Banded { n, kl, ku, ld, data: vec![0.0; ld * n] }
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        // row offset kl + ku + i - j inside column j
        j * self.ld + (self.kl + self.ku + i - j)
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i + self.ku >= j && j + self.kl >= i
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(self.in_band(i, j), "({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// `y = M x` using the stored (unfactored) band.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                *yi += self.get(i, j) * x[j];
            }
        }
        y
    }

    /// LU factorization with partial pivoting (row exchanges are recorded).
    pub fn factor(mut self) -> Result<BandedLu> {
        let n = self.n;
        let kl = self.kl;
        let uw = kl + self.ku; // upper bandwidth after pivoting
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::Singular);
            }
            pivots.push(p);
            let jmax = (k + uw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let (a1, a2) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a1, a2);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let li = self.idx(i, k);
                let factor = self.data[li] / pivot;
                // the multiplier is kept in place of the eliminated entry
                self.data[li] = factor;
                if factor == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let (src, dst) = (self.idx(k, j), self.idx(i, j));
                    self.data[dst] -= factor * self.data[src];
                }
            }
        }
        Ok(BandedLu { band: self, pivots })
    }

    /// Solves `M x = rhs`, consuming the matrix.
    #[cfg(test)]
    pub fn solve(self, rhs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.factor()?.solve(rhs))
    }
}

/// Factored form of a [`Banded`] matrix.
#[derive(Clone, Debug)]
pub struct BandedLu {
    band: Banded,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let b = &self.band;
        let n = b.n;
        let uw = b.kl + b.ku;
        let mut x = rhs.to_vec();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let last = (k + b.kl).min(n - 1);
            for i in k + 1..=last {
                let f = b.data[b.idx(i, k)];
                if f != 0.0 {
                    x[i] -= f * x[k];
                }
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + uw).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= b.data[b.idx(k, j)] * x[j];
            }
            x[k] = s / b.data[b.idx(k, k)];
        }
        x
    }
}
