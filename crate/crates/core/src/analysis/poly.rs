//! Complex polynomials and the self-reciprocal denominator `R(z)`.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Polynomial with ascending complex coefficients, `Σ_k c_k z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Index of the highest coefficient larger than `rtol · max|c_k|`, or
    /// `None` for the zero polynomial.
    pub fn degree_with_tolerance(&self, rtol: f64) -> Option<usize> {
        let scale = self.max_abs();
        if scale == 0.0 {
            return None;
        }
        self.coeffs.iter().rposition(|c| c.norm() > rtol * scale)
    }

    /// Exact degree (highest nonzero coefficient).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != ZERO)
    }

    /// Drop leading coefficients below `rtol · max|c_k|`.
    pub fn trimmed(&self, rtol: f64) -> Self {
        let keep = self.degree_with_tolerance(rtol).map_or(0, |d| d + 1);
        Self {
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// `Σ_k |c_k| |z|^k`, the natural scale for the rounding error of
    /// [`Polynomial::eval`] at `z`.
    pub fn eval_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        }
    }

    /// Coefficients from samples at the `count` roots of unity, exact for
    /// degree `< count`.
    pub fn interpolate_unit_circle(count: usize, f: impl Fn(Complex64) -> Complex64) -> Self {
        let points: Vec<Complex64> = (0..count)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / count as f64))
            .collect();
        let values: Vec<Complex64> = points.iter().map(|&z| f(z)).collect();
        let coeffs = (0..count)
            .map(|k| {
                let acc: Complex64 = values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * points[(j * k) % count].conj())
                    .sum();
                acc / count as f64
            })
            .collect();
        Self { coeffs }
    }
}

/// `B(z) = z^{L−1} H†(1/z*) = Σ_l h_l† z^{L−1−l}`, a polynomial in `z`.
pub(crate) fn reversed_adjoint(ch: &ChannelRealization, z: Complex64) -> CMatrix {
    let l = ch.len();
    let (nr, nt) = ch.taps().shape();
    let mut acc = CMatrix::zeros(nt, nr);
    for (idx, tap) in ch.taps().iter().enumerate() {
        acc = &acc + &tap.hermitian().scale(z.powi((l - 1 - idx) as i32));
    }
    acc
}

/// `A(z) = z^{L−1}(H†(1/z*) H(z) + K I)`, whose determinant is `R(z)`.
pub(crate) fn gram_polynomial_matrix(ch: &ChannelRealization, k: f64, z: Complex64) -> CMatrix {
    let l = ch.len();
    let b = reversed_adjoint(ch, z);
    (&b * &ch.transfer(z)).add_diagonal(Complex64::new(k, 0.0) * z.powi(l as i32 - 1))
}

/// `R(z) = det(z^{L−1}(H†(1/z*) H(z) + K I))`.
///
/// Satisfies `R(z) = z^{deg} R*(1/z*)` with `deg = 2 N_t (L−1)`, so its roots
/// come in pairs `(β, 1/β*)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfReciprocalPoly {
    poly: Polynomial,
    k: f64,
    nominal_degree: usize,
}

impl SelfReciprocalPoly {
    pub fn poly(&self) -> &Polynomial {
        &self.poly
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.poly.coeffs()
    }

    pub fn regularizer(&self) -> f64 {
        self.k
    }

    /// `2 N_t (L−1)`; the reciprocity exponent.
    pub fn nominal_degree(&self) -> usize {
        self.nominal_degree
    }

    /// Actual degree after dropping numerically-zero leading terms.
    pub fn degree(&self) -> Option<usize> {
        self.poly.degree_with_tolerance(1e-14)
    }

    /// `max_k |c_k − conj(c_{deg−k})| / max_k |c_k|`.
    pub fn reciprocity_defect(&self) -> f64 {
        let c = self.poly.coeffs();
        let deg = self.nominal_degree;
        let scale = self.poly.max_abs().max(f64::MIN_POSITIVE);
        (0..=deg).map(|k| (c[k] - c[deg - k].conj()).norm()).fold(0.0, f64::max) / scale
    }

    /// Leading coefficient, the constant `c` in `R(z) = c ∏(z − β_k)`.
    pub fn leading_coefficient(&self) -> Complex64 {
        self.degree().map_or(ZERO, |d| self.poly.coeffs()[d])
    }
}

/// Build `R(z)` for a channel and regularizer `K` (0 for ZF, `N_0` for MMSE).
///
/// SISO coefficients are formed exactly from tap products; MIMO coefficients
/// are interpolated from determinant samples on the unit circle.
pub fn build_r(ch: &ChannelRealization, k: f64) -> Result<SelfReciprocalPoly> {
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::OutOfRange(format!("regularizer K = {k}")));
    }
    let (nt, _, l) = ch.dims();
    let deg = 2 * nt * (l - 1);
    let poly = if ch.is_siso() {
        let h = ch.taps().scalars();
        let mut c = vec![ZERO; 2 * l - 1];
        for (a, ha) in h.iter().enumerate() {
            for (b, hb) in h.iter().enumerate() {
                c[l - 1 + a - b] += ha * hb.conj();
            }
        }
        c[l - 1] += k;
        Polynomial::new(c)
    } else {
        let mut p = Polynomial::interpolate_unit_circle(2 * deg + 1, |z| gram_polynomial_matrix(ch, k, z).det());
        p.coeffs.truncate(deg + 1);
        p
    };
    Ok(SelfReciprocalPoly {
        poly,
        k,
        nominal_degree: deg,
    })
}

/// `min_w det(H(e^{jw})† H(e^{jw}) + K I)` over `points` equispaced
/// frequencies; the real part (the determinant of a Hermitian matrix is real).
pub fn unit_circle_min_det(ch: &ChannelRealization, k: f64, points: usize) -> f64 {
    (0..points)
        .map(|j| {
            let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / points as f64);
            let h = ch.transfer(z);
            (&h.hermitian() * &h).add_diagonal(Complex64::new(k, 0.0)).det().re
        })
        .fold(f64::INFINITY, f64::min)
}
