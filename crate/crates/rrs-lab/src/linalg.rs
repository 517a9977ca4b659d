//! Dense linear algebra for small matrices.
//!
//! Everything here is sized for n <= 8 particles. The complex matrix type is
//! generic over the lab scalar so that LU solves and matrix products can be
//! differentiated with dual numbers; the eigensolver and SVD are value-only
//! (`f64`) and use Jacobi iterations, which are accurate at this scale.

use crate::dual::{complex_const, value_magnitude, RsScalar};
use crate::error::{Error, Result};
use num_complex::Complex;
use num_traits::Zero;

/// Square complex matrix in row-major order, generic over the scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<S: RsScalar> {
    n: usize,
    data: Vec<Complex<S>>,
}

impl<S: RsScalar> CMat<S> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = complex_const(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex<S>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<S> {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<S>) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.n;
        debug_assert_eq!(n, rhs.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re.value() == 0.0 && a.im.value() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn trace(&self) -> Complex<S> {
        let mut t = Complex::zero();
        for i in 0..self.n {
            t = t + self.get(i, i);
        }
        t
    }

    /// `tr(diag(w) * self)` for a real diagonal weight vector.
    pub fn weighted_trace(&self, w: &[S]) -> Complex<S> {
        debug_assert_eq!(w.len(), self.n);
        let mut t = Complex::zero();
        for i in 0..self.n {
            t = t + self.get(i, i) * w[i];
        }
        t
    }

    /// Largest `|A_ij - conj(A_ji)|` over value parts.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                let d = self.get(i, j) - self.get(j, i).conj();
                let m = (d.re.value().powi(2) + d.im.value().powi(2)).sqrt();
                worst = worst.max(m);
            }
        }
        worst
    }

    /// Largest entry magnitude `sqrt(re^2 + im^2)` over value parts.
    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|z| (z.re.value().powi(2) + z.im.value().powi(2)).sqrt())
            .fold(0.0, f64::max)
    }

    /// Anti-Hermitian part `(A - A^dag) / 2`.
    pub fn anti_hermitian_part(&self) -> Self {
        let half = complex_const::<S>(0.5, 0.0);
        Self::from_fn(self.n, |i, j| (self.get(i, j) - self.get(j, i).conj()) * half)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) + rhs.get(i, j))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) - rhs.get(i, j))
    }

    pub fn scale(&self, c: Complex<S>) -> Self {
        Self::from_fn(self.n, |i, j| self.get(i, j) * c)
    }

    /// LU factorization with partial pivoting on value magnitudes.
    pub fn lu(&self) -> Result<CLu<S>> {
        let n = self.n;
        let mut lu = self.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1i32;
        let scale = self.max_abs().max(1.0);
        for col in 0..n {
            let mut best = col;
            let mut best_mag = value_magnitude(&lu[col * n + col]);
            for row in col + 1..n {
                let mag = value_magnitude(&lu[row * n + col]);
                if mag > best_mag {
                    best = row;
                    best_mag = mag;
                }
            }
            if best_mag < 1e-300 * scale {
                return Err(Error::SingularMatrix {
                    pivot: best_mag,
                    step: col,
                });
            }
            if best != col {
                for j in 0..n {
                    lu.swap(col * n + j, best * n + j);
                }
                perm.swap(col, best);
                sign = -sign;
            }
            let pivot = lu[col * n + col];
            for row in col + 1..n {
                let factor = lu[row * n + col] / pivot;
                lu[row * n + col] = factor;
                for j in col + 1..n {
                    let sub = factor * lu[col * n + j];
                    lu[row * n + j] = lu[row * n + j] - sub;
                }
            }
        }
        Ok(CLu { n, lu, perm, sign })
    }
}

/// LU factorization of a [`CMat`].
pub struct CLu<S: RsScalar> {
    n: usize,
    lu: Vec<Complex<S>>,
    perm: Vec<usize>,
    sign: i32,
}

impl<S: RsScalar> CLu<S> {
    /// Solve `A x = b`.
    pub fn solve(&self, b: &[Complex<S>]) -> Vec<Complex<S>> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut x: Vec<Complex<S>> = self.perm.iter().map(|&pi| b[pi]).collect();
        for i in 1..n {
            for j in 0..i {
                let sub = self.lu[i * n + j] * x[j];
                x[i] = x[i] - sub;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let sub = self.lu[i * n + j] * x[j];
                x[i] = x[i] - sub;
            }
            x[i] = x[i] / self.lu[i * n + i];
        }
        x
    }

    /// Full inverse, column by column.
    pub fn inverse(&self) -> CMat<S> {
        let n = self.n;
        let mut out = CMat::zeros(n);
        let mut e = vec![Complex::<S>::zero(); n];
        for col in 0..n {
            e.fill(Complex::zero());
            e[col] = complex_const(1.0, 0.0);
            let x = self.solve(&e);
            for row in 0..n {
                out.set(row, col, x[row]);
            }
        }
        out
    }

    pub fn det(&self) -> Complex<S> {
        let n = self.n;
        let mut d = complex_const::<S>(self.sign as f64, 0.0);
        for i in 0..n {
            d = d * self.lu[i * n + i];
        }
        d
    }

    /// Cheap conditioning proxy: ratio of extreme pivot magnitudes.
    pub fn condition_proxy(&self) -> f64 {
        let n = self.n;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..n {
            let m = value_magnitude(&self.lu[i * n + i]);
            lo = lo.min(m);
            hi = hi.max(m);
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

/// Eigendecomposition of a Hermitian matrix: `A = V diag(values) V^dag`.
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: CMat<f64>,
}

/// Cyclic Jacobi iteration with complex rotations. Input must be Hermitian;
/// the strictly-lower part is taken from the conjugate of the upper part.
pub fn hermitian_eigen(a: &CMat<f64>) -> Result<HermitianEigen> {
    let n = a.dim();
    let mut m = a.clone();
    // Symmetrize so the iteration sees an exactly Hermitian matrix.
    for i in 0..n {
        let d = m.get(i, i);
        m.set(i, i, Complex::new(d.re, 0.0));
        for j in i + 1..n {
            let avg = (m.get(i, j) + m.get(j, i).conj()) * Complex::new(0.5, 0.0);
            m.set(i, j, avg);
            m.set(j, i, avg.conj());
        }
    }
    let mut v = CMat::<f64>::identity(n);
    let norm = m.max_abs().max(1e-300);
    let tol = 1e-15 * norm;
    let max_sweeps = 60;
    for _sweep in 0..max_sweeps {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m.get(p, q).norm());
            }
        }
        if off <= tol {
            let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m.get(i, i).re, i)).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let vectors = CMat::from_fn(n, |i, j| v.get(i, pairs[j].1));
            return Ok(HermitianEigen { values, vectors });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.get(p, q);
                let rho = apq.norm();
                if rho <= tol * 1e-2 {
                    continue;
                }
                // Phase factor such that e^{-i phi} * a_pq is real.
                let phase = apq / Complex::new(rho, 0.0);
                let app = m.get(p, p).re;
                let aqq = m.get(q, q).re;
                let theta = (aqq - app) / (2.0 * rho);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns of the rotation U = diag(1, conj(phase)) * G with
                // G = [[c, s], [-s, c]] acting on the (p, q) plane:
                // U[p][p] = c, U[p][q] = s, U[q][p] = -s*conj(phase), U[q][q] = c*conj(phase).
                let upp = Complex::new(c, 0.0);
                let upq = Complex::new(s, 0.0);
                let uqp = phase.conj() * (-s);
                let uqq = phase.conj() * c;
                // M <- U^dag M U, applied as column then row updates.
                for r in 0..n {
                    let mp = m.get(r, p);
                    let mq = m.get(r, q);
                    m.set(r, p, mp * upp + mq * uqp);
                    m.set(r, q, mp * upq + mq * uqq);
                }
                for col in 0..n {
                    let mp = m.get(p, col);
                    let mq = m.get(q, col);
                    m.set(p, col, upp.conj() * mp + uqp.conj() * mq);
                    m.set(q, col, upq.conj() * mp + uqq.conj() * mq);
                }
                m.set(p, q, Complex::new(0.0, 0.0));
                m.set(q, p, Complex::new(0.0, 0.0));
                for r in 0..n {
                    let vp = v.get(r, p);
                    let vq = v.get(r, q);
                    v.set(r, p, vp * upp + vq * uqp);
                    v.set(r, q, vp * upq + vq * uqq);
                }
            }
        }
    }
    let mut off = 0.0f64;
    for p in 0..n {
        for q in p + 1..n {
            off = off.max(m.get(p, q).norm());
        }
    }
    Err(Error::EigenNonConvergence {
        sweeps: max_sweeps,
        offdiag: off,
    })
}

/// Rectangular real matrix in row-major order.
#[derive(Clone, Debug)]
pub struct RMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Determinant via partially pivoted LU. Square matrices only.
    ///
    /// Rows and columns are first equilibrated with exact powers of two so
    /// that blocks of wildly different magnitude (unit identity rows next to
    /// large polynomial rows) do not inflate the elimination error.
    pub fn det(&self) -> f64 {
        assert_eq!(self.rows, self.cols, "determinant needs a square matrix");
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = 1.0f64;
        for row in 0..n {
            let m = (0..n).map(|j| a[row * n + j].abs()).fold(0.0, f64::max);
            if m > 0.0 {
                let s = (-m.log2().floor()).exp2();
                for j in 0..n {
                    a[row * n + j] *= s;
                }
                det /= s;
            }
        }
        for col in 0..n {
            let m = (0..n).map(|i| a[i * n + col].abs()).fold(0.0, f64::max);
            if m > 0.0 {
                let s = (-m.log2().floor()).exp2();
                for i in 0..n {
                    a[i * n + col] *= s;
                }
                det /= s;
            }
        }
        for col in 0..n {
            let mut best = col;
            let mut best_mag = a[col * n + col].abs();
            for row in col + 1..n {
                let mag = a[row * n + col].abs();
                if mag > best_mag {
                    best = row;
                    best_mag = mag;
                }
            }
            if best_mag == 0.0 {
                return 0.0;
            }
            if best != col {
                for j in 0..n {
                    a.swap(col * n + j, best * n + j);
                }
                det = -det;
            }
            let pivot = a[col * n + col];
            det *= pivot;
            for row in col + 1..n {
                let factor = a[row * n + col] / pivot;
                for j in col + 1..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
            }
        }
        det
    }

    /// Singular values in descending order via one-sided Jacobi.
    pub fn singular_values(&self) -> Vec<f64> {
        // One-sided Jacobi orthogonalizes columns; transpose wide matrices.
        let (m, k, mut a) = if self.rows >= self.cols {
            (self.rows, self.cols, self.data.clone())
        } else {
            let mut t = vec![0.0; self.rows * self.cols];
            for i in 0..self.rows {
                for j in 0..self.cols {
                    t[j * self.rows + i] = self.get(i, j);
                }
            }
            (self.cols, self.rows, t)
        };
        let col = |a: &Vec<f64>, j: usize, r: usize| a[r * k + j];
        let max_sweeps = 60;
        for _ in 0..max_sweeps {
            let mut rotated = false;
            for i in 0..k {
                for j in i + 1..k {
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = 0.0;
                    for r in 0..m {
                        let ai = col(&a, i, r);
                        let aj = col(&a, j, r);
                        alpha += ai * ai;
                        beta += aj * aj;
                        gamma += ai * aj;
                    }
                    if gamma.abs() <= 1e-30 + 1e-16 * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for r in 0..m {
                        let ai = a[r * k + i];
                        let aj = a[r * k + j];
                        a[r * k + i] = c * ai - s * aj;
                        a[r * k + j] = s * ai + c * aj;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<f64> = (0..k)
            .map(|j| (0..m).map(|r| col(&a, j, r).powi(2)).sum::<f64>().sqrt())
            .collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::Dual;

    fn cmat_f64(entries: &[&[(f64, f64)]]) -> CMat<f64> {
        let n = entries.len();
        CMat::from_fn(n, |i, j| Complex::new(entries[i][j].0, entries[i][j].1))
    }

    #[test]
    fn lu_solve_roundtrip() {
        let a = cmat_f64(&[
            &[(4.0, 0.0), (1.0, 2.0), (0.0, -1.0)],
            &[(1.0, -2.0), (3.0, 0.0), (0.5, 0.5)],
            &[(0.0, 1.0), (0.5, -0.5), (2.0, 0.0)],
        ]);
        let lu = a.lu().unwrap();
        let b = vec![
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 1.0),
            Complex::new(2.0, -1.0),
        ];
        let x = lu.solve(&b);
        // residual A x - b
        for i in 0..3 {
            let mut r = -b[i];
            for j in 0..3 {
                r += a.get(i, j) * x[j];
            }
            assert!(r.norm() < 1e-13, "residual {}", r.norm());
        }
    }

    #[test]
    fn lu_inverse_and_det() {
        let a = cmat_f64(&[&[(2.0, 0.0), (0.0, 1.0)], &[(0.0, -1.0), (3.0, 0.0)]]);
        let lu = a.lu().unwrap();
        let inv = lu.inverse();
        let prod = a.mul(&inv);
        assert!(prod.sub(&CMat::identity(2)).max_abs() < 1e-14);
        // det = 2*3 - (i)(-i) = 6 - 1 = 5
        let d = lu.det();
        assert!((d.re - 5.0).abs() < 1e-13 && d.im.abs() < 1e-13);
    }

    #[test]
    fn lu_rejects_singular() {
        let a = cmat_f64(&[&[(1.0, 0.0), (2.0, 0.0)], &[(2.0, 0.0), (4.0, 0.0)]]);
        assert!(a.lu().is_err());
    }

    #[test]
    fn lu_works_with_dual_scalars() {
        // d/dx of solving [[x, 1], [1, 2]] y = (1, 0): y0 = 2/(2x-1), dy0 = -4/(2x-1)^2
        let x = 3.0;
        let a = CMat::<Dual>::from_fn(2, |i, j| match (i, j) {
            (0, 0) => Complex::new(Dual::seeded(x), Dual::zero()),
            (1, 1) => Complex::new(Dual::constant(2.0), Dual::zero()),
            _ => Complex::new(Dual::constant(1.0), Dual::zero()),
        });
        let lu = a.lu().unwrap();
        let b = vec![
            Complex::new(Dual::constant(1.0), Dual::zero()),
            Complex::new(Dual::constant(0.0), Dual::zero()),
        ];
        let y = lu.solve(&b);
        let denom = 2.0 * x - 1.0;
        assert!((y[0].re.val - 2.0 / denom).abs() < 1e-14);
        assert!((y[0].re.der + 4.0 / (denom * denom)).abs() < 1e-14);
    }

    #[test]
    fn hermitian_eigen_hand_case() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let a = cmat_f64(&[&[(2.0, 0.0), (0.0, 1.0)], &[(0.0, -1.0), (2.0, 0.0)]]);
        let eig = hermitian_eigen(&a).unwrap();
        assert!((eig.values[0] - 1.0).abs() < 1e-13);
        assert!((eig.values[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn hermitian_eigen_reconstructs() {
        // Pseudo-random Hermitian built from a fixed seeded pattern.
        let n = 5;
        let mut vals = Vec::new();
        let mut state = 1234567u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 20) as f64 / (1u64 << 44) as f64) - 0.5
        };
        for _ in 0..(n * n * 2) {
            vals.push(next());
        }
        let raw = CMat::<f64>::from_fn(n, |i, j| {
            Complex::new(vals[2 * (i * n + j)], vals[2 * (i * n + j) + 1])
        });
        let a = raw.add(&raw.adjoint());
        let eig = hermitian_eigen(&a).unwrap();
        // A V = V diag(values)
        let v = &eig.vectors;
        let av = a.mul(v);
        for j in 0..n {
            for i in 0..n {
                let lhs = av.get(i, j);
                let rhs = v.get(i, j) * Complex::new(eig.values[j], 0.0);
                assert!((lhs - rhs).norm() < 1e-11, "eigen residual {}", (lhs - rhs).norm());
            }
        }
        // unitarity
        let vtv = v.adjoint().mul(v);
        assert!(vtv.sub(&CMat::identity(n)).max_abs() < 1e-12);
        // ascending order
        for w in eig.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }

    #[test]
    fn eigen_handles_degenerate_spectrum() {
        let a = CMat::<f64>::identity(4);
        let eig = hermitian_eigen(&a).unwrap();
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn real_det_hand_values() {
        let m = RMat::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!((m.det() + 2.0).abs() < 1e-14);
        let id = RMat::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert!((id.det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_values_match_hand_case() {
        // diag(3, 2) padded: singular values are 3 and 2.
        let m = RMat::from_rows(vec![vec![3.0, 0.0], vec![0.0, 2.0], vec![0.0, 0.0]]);
        let sv = m.singular_values();
        assert!((sv[0] - 3.0).abs() < 1e-13);
        assert!((sv[1] - 2.0).abs() < 1e-13);
        // wide matrix takes the transpose path
        let wide = RMat::from_rows(vec![vec![0.0, 5.0, 0.0], vec![1.0, 0.0, 0.0]]);
        let sv = wide.singular_values();
        assert!((sv[0] - 5.0).abs() < 1e-13);
        assert!((sv[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn singular_values_detect_rank_deficiency() {
        let m = RMat::from_rows(vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![1.0, 0.0, 1.0],
        ]);
        let sv = m.singular_values();
        assert!(sv[0] > 1.0);
        assert!(sv[2] < 1e-12 * sv[0], "smallest sv {} not negligible", sv[2]);
    }
}
