//! Small dense complex matrices.
//!
//! Sizes in this crate are tiny (antenna counts of one or two) except for the
//! dense block-circulant oracle, so everything is row-major `Vec` storage with
//! straightforward loops.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative pivot threshold below which a matrix is declared singular.
const SINGULAR_RTOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// A 1×1 matrix.
    pub fn scalar(value: Complex64) -> Self {
        Self {
            rows: 1,
            cols: 1,
            data: vec![value],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Column vector.
    pub fn column(values: &[Complex64]) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// `self + c·I`.
    pub fn add_diagonal(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows.min(self.cols) {
            out[(i, i)] += c;
        }
        out
    }

    /// Largest element magnitude, `max_ij |a_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn try_mul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }

    /// Matrix-vector product on a raw slice.
    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "vector length must match column count");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Determinant. Closed form up to 3×3, LU beyond.
    pub fn det(&self) -> Complex64 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let a = |i, j| self[(i, j)];
        match self.rows {
            0 => ONE,
            1 => a(0, 0),
            2 => a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
            3 => {
                a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                    + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
            }
            n => {
                let mut lu = self.data.clone();
                let mut det = ONE;
                for k in 0..n {
                    let p = (k..n)
                        .max_by(|&x, &y| lu[x * n + k].norm().total_cmp(&lu[y * n + k].norm()))
                        .unwrap_or(k);
                    if lu[p * n + k] == ZERO {
                        return ZERO;
                    }
                    if p != k {
                        for j in 0..n {
                            lu.swap(k * n + j, p * n + j);
                        }
                        det = -det;
                    }
                    let pivot = lu[k * n + k];
                    det *= pivot;
                    for i in k + 1..n {
                        let f = lu[i * n + k] / pivot;
                        for j in k..n {
                            let v = lu[k * n + j];
                            lu[i * n + j] -= f * v;
                        }
                    }
                }
                det
            }
        }
    }

    /// Classical adjugate, `adj(A)·A = det(A)·I`. Valid for singular input.
    pub fn adjugate(&self) -> CMatrix {
        assert!(self.is_square(), "adjugate of a non-square matrix");
        let n = self.rows;
        match n {
            0 => CMatrix::zeros(0, 0),
            1 => CMatrix::scalar(ONE),
            2 => CMatrix::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => self[(1, 1)],
                (1, 1) => self[(0, 0)],
                (0, 1) => -self[(0, 1)],
                _ => -self[(1, 0)],
            }),
            _ => CMatrix::from_fn(n, n, |i, j| {
                // Cofactor C_ji.
                let minor = CMatrix::from_fn(n - 1, n - 1, |r, c| {
                    let rr = if r < j { r } else { r + 1 };
                    let cc = if c < i { c } else { c + 1 };
                    self[(rr, cc)]
                });
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                minor.det() * sign
            }),
        }
    }

    /// Solve `A·X = B` for square `A`.
    ///
    /// 1×1 and 2×2 systems use the explicit inverse; larger systems use LU with
    /// partial pivoting.
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        if !self.is_square() || self.rows != b.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve with {}x{} system matrix and {}x{} right-hand side",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(Error::Singular(format!(
                "{}x{} zero or non-finite matrix",
                self.rows, self.cols
            )));
        }
        match self.rows {
            1 => {
                let a = self.data[0];
                if a.norm() <= SINGULAR_RTOL * scale || a == ZERO {
                    return Err(Error::Singular("1x1".into()));
                }
                Ok(b.scale(a.inv()))
            }
            2 => {
                let det = self.det();
                if det.norm() <= SINGULAR_RTOL * scale * scale {
                    return Err(Error::Singular(format!("2x2 with determinant {det}")));
                }
                let inv = self.adjugate().scale(det.inv());
                Ok(inv.mul_unchecked(b))
            }
            _ => self.solve_lu(b, scale),
        }
    }

    fn solve_lu(&self, b: &CMatrix, scale: f64) -> Result<CMatrix> {
        let n = self.rows;
        let m = b.cols;
        let mut a = self.data.clone();
        let mut x = b.data.clone();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&r, &s| a[r * n + k].norm().total_cmp(&a[s * n + k].norm()))
                .unwrap_or(k);
            if a[p * n + k].norm() <= SINGULAR_RTOL * scale {
                return Err(Error::Singular(format!("{n}x{n}, pivot {k}")));
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                for j in 0..m {
                    x.swap(k * m + j, p * m + j);
                }
            }
            let pivot = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                if f == ZERO {
                    continue;
                }
                for j in k..n {
                    let v = a[k * n + j];
                    a[i * n + j] -= f * v;
                }
                for j in 0..m {
                    let v = x[k * m + j];
                    x[i * m + j] -= f * v;
                }
            }
        }
        for k in (0..n).rev() {
            let pivot = a[k * n + k];
            for j in 0..m {
                let mut acc = x[k * m + j];
                for c in k + 1..n {
                    acc -= a[k * n + c] * x[c * m + j];
                }
                x[k * m + j] = acc / pivot;
            }
        }
        Ok(CMatrix {
            rows: n,
            cols: m,
            data: x,
        })
    }

    pub fn inverse(&self) -> Result<CMatrix> {
        self.solve(&CMatrix::identity(self.rows))
    }
}

/// Solve `A·X = B` where `A` is Hermitian positive definite.
///
/// Hermitian symmetry is checked to a relative tolerance; a matrix that is not
/// numerically definite (ZF Gram matrices at spectral nulls) yields
/// [`Error::Singular`].
pub fn solve_hermitian_system(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Hermitian system matrix is {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let tol = 1e-10 * a.max_abs().max(f64::MIN_POSITIVE);
    for i in 0..n {
        if a[(i, i)].im.abs() > tol {
            return Err(Error::DimensionMismatch("matrix is not Hermitian".into()));
        }
        for j in i + 1..n {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > tol {
                return Err(Error::DimensionMismatch("matrix is not Hermitian".into()));
            }
        }
    }
    a.solve(b)
}

/// Conjugate transpose; free-function form of [`CMatrix::hermitian`].
pub fn hermitian(m: &CMatrix) -> CMatrix {
    m.hermitian()
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    /// Panics on shape mismatch; use [`CMatrix::try_mul`] for fallible code.
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix sum shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "matrix difference shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        CMatrix::from_fn(rows, cols, |_, _| {
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            };
            c(next(), next())
        })
    }

    #[test]
    fn identity_solve_returns_rhs() {
        for n in 1..=4 {
            let b = pseudo_random(n, 3, n as u64);
            let x = CMatrix::identity(n).solve(&b).unwrap();
            assert!((&x - &b).max_abs() < 1e-15);
        }
    }

    #[test]
    fn hermitian_2x2_known_inverse() {
        // A = [[2, 1+i], [1-i, 3]], det = 6 - 2 = 4, inverse = [[3, -1-i], [-1+i, 2]] / 4.
        let a = CMatrix::from_rows(2, 2, vec![c(2.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(3.0, 0.0)]).unwrap();
        let x = solve_hermitian_system(&a, &CMatrix::identity(2)).unwrap();
        let expected =
            CMatrix::from_rows(2, 2, vec![c(0.75, 0.0), c(-0.25, -0.25), c(-0.25, 0.25), c(0.5, 0.0)]).unwrap();
        assert!((&x - &expected).max_abs() < 1e-15);
        assert!((&(&a * &x) - &CMatrix::identity(2)).max_abs() < 1e-10);
    }

    #[test]
    fn hermitian_of_real_diagonal_is_itself() {
        let d = CMatrix::from_fn(3, 3, |i, j| if i == j { c(i as f64 + 1.0, 0.0) } else { ZERO });
        assert_eq!(d.hermitian(), d);
    }

    #[test]
    fn hermitian_is_involution() {
        let m = pseudo_random(2, 3, 9);
        assert_eq!(m.hermitian().hermitian(), m);
    }

    #[test]
    fn lu_solve_residual() {
        for n in [3, 5, 8, 32] {
            let a = pseudo_random(n, n, 100 + n as u64).add_diagonal(c(2.0, 0.0));
            let b = pseudo_random(n, 2, 7);
            let x = a.solve(&b).unwrap();
            assert!((&(&a * &x) - &b).max_abs() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn singular_systems_are_reported() {
        let a = CMatrix::from_rows(2, 2, vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!(matches!(a.solve(&CMatrix::identity(2)), Err(Error::Singular(_))));
        assert!(matches!(
            CMatrix::zeros(1, 1).solve(&CMatrix::identity(1)),
            Err(Error::Singular(_))
        ));
        let mut z = CMatrix::identity(4);
        z[(3, 3)] = ZERO;
        assert!(matches!(z.solve(&CMatrix::identity(4)), Err(Error::Singular(_))));
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let a = CMatrix::from_rows(2, 2, vec![c(2.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]).unwrap();
        assert!(solve_hermitian_system(&a, &CMatrix::identity(2)).is_err());
    }

    #[test]
    fn adjugate_identity_holds() {
        for n in 1..=4 {
            let a = pseudo_random(n, n, 40 + n as u64);
            let lhs = &a.adjugate() * &a;
            let rhs = CMatrix::identity(n).scale(a.det());
            assert!((&lhs - &rhs).max_abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn lu_determinant_matches_cofactor() {
        let a = pseudo_random(4, 4, 5);
        let cofactor: Complex64 = (0..4).map(|j| a[(0, j)] * a.adjugate()[(j, 0)]).sum();
        assert!((a.det() - cofactor).norm() < 1e-13);
    }
}
