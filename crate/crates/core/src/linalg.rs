//! Small direct solvers for the banded systems that show up in the pipeline:
//! periodic tridiagonal (background problem), symmetric banded (Newton and
//! preconditioned descent on the reduced energy) and general banded with
//! partial pivoting (complex Crank–Nicolson matrices).

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::abs;

/// Solves the tridiagonal system `A x = rhs` with Dirichlet-free ends.
///
/// `sub[i]` is `A[i][i-1]` (ignored for `i = 0`), `sup[i]` is `A[i][i+1]`
/// (ignored for the last row).
pub fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    debug_assert!(sub.len() == n && sup.len() == n && rhs.len() == n);
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut beta = diag[0];
    if beta == 0.0 {
        return Err(Error::SingularMatrix(0));
    }
    x[0] = rhs[0] / beta;
    for i in 1..n {
        c[i] = sup[i - 1] / beta;
        beta = diag[i] - sub[i] * c[i];
        if beta == 0.0 {
            return Err(Error::SingularMatrix(i));
        }
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i + 1] * next;
    }
    Ok(x)
}

/// Solves the periodic (cyclic) tridiagonal system by the Sherman–Morrison
/// correction of a plain tridiagonal solve.
///
/// `sub[0]` couples row 0 to the last unknown and `sup[n-1]` couples the last
/// row to unknown 0.
pub fn solve_cyclic_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(Error::TooFewNodes(n));
    }
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;

    let x = solve_tridiagonal(sub, &d, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &d, sup, &u)?;

    let denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if denom == 0.0 {
        return Err(Error::SingularMatrix(n - 1));
    }
    let fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

/// Symmetric banded matrix holding the lower band: `get(i, j)` for `i - k <= j <= i`.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

impl SymBand {
    pub fn zeros(n: usize, k: usize) -> Self {
        SymBand {
            n,
            k,
            data: vec![0.0; n * (k + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.k
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        debug_assert!(i - j <= self.k);
        i * (self.k + 1) + (i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (hi, lo) = if j > i { (j, i) } else { (i, j) };
        if hi - lo > self.k {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// Adds `v` to the symmetric pair `(i, j)` / `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let at = self.idx(i, j);
        self.data[at] += v;
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            let at = self.idx(i, i);
            self.data[at] += v;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.k);
            for j in lo..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// `L D Lᵀ` factorization without pivoting.
    pub fn ldlt(&self) -> Result<Ldlt> {
        let (n, k) = (self.n, self.k);
        let mut l = SymBand::zeros(n, k);
        let mut d = vec![0.0; n];
        for j in 0..n {
            let lo = j.saturating_sub(k);
            let mut dj = self.get(j, j);
            for m in lo..j {
                let ljm = l.data[l.idx(j, m)];
                dj -= ljm * ljm * d[m];
            }
            if dj == 0.0 || !dj.is_finite() {
                return Err(Error::SingularMatrix(j));
            }
            d[j] = dj;
            let hi = (j + k + 1).min(n);
            for i in j + 1..hi {
                let mut s = self.get(i, j);
                let lo_i = i.saturating_sub(k);
                for m in lo_i.max(lo)..j {
                    s -= l.data[l.idx(i, m)] * l.data[l.idx(j, m)] * d[m];
                }
                let at = l.idx(i, j);
                l.data[at] = s / dj;
            }
        }
        Ok(Ldlt { l, d })
    }
}

/// Factor produced by [`SymBand::ldlt`]. The signs of `d` give the inertia.
#[derive(Debug, Clone)]
pub struct Ldlt {
    l: SymBand,
    d: Vec<f64>,
}

impl Ldlt {
    pub fn min_pivot(&self) -> f64 {
        self.d.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.d.iter().all(|&p| p > 0.0)
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, k) = (self.l.n, self.l.k);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let lo = i.saturating_sub(k);
            let mut s = x[i];
            for j in lo..i {
                s -= self.l.data[self.l.idx(i, j)] * x[j];
            }
            x[i] = s;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let hi = (i + k + 1).min(n);
            let mut s = x[i];
            for j in i + 1..hi {
                s -= self.l.data[self.l.idx(j, i)] * x[j];
            }
            x[i] = s;
        }
        x
    }
}

/// Field element usable by [`BandLu`].
pub trait Scalar:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        abs(self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        abs(self.re) + abs(self.im)
    }
}

/// General banded matrix with `kl` sub- and `ku` super-diagonals, factored in
/// place by Gaussian elimination with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<T>,
    piv: Vec<usize>,
    factored: bool,
}

impl<T: Scalar> BandLu<T> {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        // room for the kl extra super-diagonals created by row interchanges
        let width = 2 * kl + ku + 1;
        BandLu {
            n,
            kl,
            ku,
            width,
            data: vec![T::zero(); n * width],
            piv: (0..n).collect(),
            factored: false,
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    /// Sets `A[i][j]`; `j` must lie within the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(!self.factored, "matrix already factored");
        assert!(j + self.kl >= i && j <= i + self.ku, "entry outside band");
        let at = self.idx(i, j);
        self.data[at] = v;
    }

    pub fn factor(mut self) -> Result<Self> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl + 1).min(n);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].magnitude();
            for i in k + 1..last_row {
                let m = self.data[self.idx(i, k)].magnitude();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix(k));
            }
            self.piv[k] = p;
            let last_col = (k + kl + ku + 1).min(n);
            if p != k {
                for j in k..last_col {
                    let (a, b) = (self.idx(k, j), self.idx(p, j));
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..last_row {
                let at = self.idx(i, k);
                let m = self.data[at] / pivot;
                self.data[at] = m;
                if m == T::zero() {
                    continue;
                }
                for j in k + 1..last_col {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] = self.data[ij] - m * kj;
                }
            }
        }
        self.factored = true;
        Ok(self)
    }

    pub fn solve_in_place(&self, b: &mut [T]) {
        assert!(self.factored, "factor() first");
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..(k + kl + 1).min(n) {
                b[i] = b[i] - self.data[self.idx(i, k)] * bk;
            }
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..(i + kl + ku + 1).min(n) {
                s = s - self.data[self.idx(i, j)] * b[j];
            }
            b[i] = s / self.data[self.idx(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_mul(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter()
            .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
            .collect()
    }

    #[test]
    fn cyclic_tridiagonal_matches_dense_product() {
        let n = 7;
        let sub: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let sup: Vec<f64> = (0..n).map(|i| -0.5 + 0.05 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + 0.3 * i as f64).collect();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin() + 1.0).collect();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = diag[i];
            a[i][(i + n - 1) % n] += sub[i];
            a[i][(i + 1) % n] += sup[i];
        }
        let rhs = dense_mul(&a, &x_true);
        let x = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs).unwrap();
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn ldlt_solves_and_reports_inertia() {
        let n = 12;
        let mut m = SymBand::zeros(n, 3);
        for i in 0..n {
            m.add(i, i, 6.0);
            if i >= 1 {
                m.add(i, i - 1, -1.5);
            }
            if i >= 3 {
                m.add(i, i - 3, 0.25);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 3.0).collect();
        let rhs = m.mul_vec(&x_true);
        let f = m.ldlt().unwrap();
        assert!(f.is_positive_definite());
        for (u, v) in f.solve(&rhs).iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12);
        }
        m.add_diagonal(-10.0);
        assert!(!m.ldlt().unwrap().is_positive_definite());
    }

    #[test]
    fn band_lu_needs_pivoting() {
        // zero leading diagonal forces an interchange
        let n = 6;
        let mut a = BandLu::<f64>::zeros(n, 2, 1);
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i.saturating_sub(2)..(i + 2).min(n) {
                let v = if i == j && i == 0 { 0.0 } else { 1.0 + (i * 3 + j) as f64 * 0.1 };
                a.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let mut b = dense_mul(&dense, &x_true);
        let lu = a.factor().unwrap();
        lu.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-12, "{u} vs {v}");
        }
    }

    #[test]
    fn band_lu_complex() {
        let n = 9;
        let mut a = BandLu::<Complex64>::zeros(n, 3, 3);
        let mut dense = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in i.saturating_sub(3)..(i + 4).min(n) {
                let d = (i as i64 - j as i64).unsigned_abs() as f64;
                let v = if i == j {
                    Complex64::new(1.0, 3.0)
                } else {
                    Complex64::new(0.0, -0.4 / d)
                };
                a.set(i, j, v);
                dense[i][j] = v;
            }
        }
        let x_true: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0)).collect();
        let mut b: Vec<Complex64> = dense
            .iter()
            .map(|row| row.iter().zip(&x_true).map(|(r, v)| r * v).sum())
            .collect();
        a.factor().unwrap().solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x_true) {
            assert!((u - v).norm() < 1e-12);
        }
    }
}
