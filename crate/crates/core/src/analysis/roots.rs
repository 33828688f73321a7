//! Polynomial roots via the eigenvalues of the companion matrix.

use num_complex::Complex64;

use super::poly::Polynomial;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Relative residual `|p(β)| / Σ|c_k||β|^k` every returned root satisfies.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-8;

/// Reciprocal-pairing distance `|β_i − 1/β_j*|`.
pub const PAIRING_TOL: f64 = 1e-6;

/// All roots of `p`, with the leading coefficient trimmed at relative
/// tolerance 1e-14.
pub fn roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    let trimmed = p.trimmed(1e-14);
    let failure = || Error::RootFinding {
        coefficients: p.coeffs().iter().map(|c| (c.re, c.im)).collect(),
    };
    let deg = match trimmed.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(Error::OutOfRange("polynomial degree must be at least 1".into())),
    };
    let c = trimmed.coeffs();
    let lead = c[deg];
    let mut a = vec![vec![ZERO; deg]; deg];
    for i in 1..deg {
        a[i][i - 1] = Complex64::new(1.0, 0.0);
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[deg - 1] = -c[i] / lead;
    }
    let eig = hessenberg_eigenvalues(a).ok_or_else(failure)?;
    let deriv = trimmed.derivative();
    let mut out = Vec::with_capacity(deg);
    for beta in eig {
        let beta = polish(&trimmed, &deriv, beta);
        let residual = trimmed.eval(beta).norm() / trimmed.eval_scale(beta).max(f64::MIN_POSITIVE);
        if !beta.is_finite() || residual > ROOT_RESIDUAL_TOL {
            return Err(failure());
        }
        out.push(beta);
    }
    Ok(out)
}

fn polish(p: &Polynomial, dp: &Polynomial, beta: Complex64) -> Complex64 {
    let d = dp.eval(beta);
    if d == ZERO {
        return beta;
    }
    let next = beta - p.eval(beta) / d;
    if next.is_finite() && p.eval(next).norm() < p.eval(beta).norm() {
        next
    } else {
        beta
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == ZERO {
        (1.0, ZERO)
    } else if a == ZERO {
        (0.0, b.conj() / b.norm())
    } else {
        let r = a.norm().hypot(b.norm());
        (a.norm() / r, (a / a.norm()) * b.conj() / r)
    }
}

fn wilkinson(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m1 = (a + d) * 0.5 + disc;
    let m2 = (a + d) * 0.5 - disc;
    if (m1 - d).norm() < (m2 - d).norm() {
        m1
    } else {
        m2
    }
}

/// Shifted QR iteration on an upper-Hessenberg matrix.
#[allow(clippy::needless_range_loop)]
fn hessenberg_eigenvalues(mut a: Vec<Vec<Complex64>>) -> Option<Vec<Complex64>> {
    let n = a.len();
    let norm = a
        .iter()
        .flatten()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut eig = Vec::with_capacity(n);
    let mut hi = n;
    let mut iter = 0usize;
    while hi > 0 {
        if hi == 1 {
            eig.push(a[0][0]);
            break;
        }
        let mut lo = hi - 1;
        while lo > 0 {
            let mut s = a[lo - 1][lo - 1].norm() + a[lo][lo].norm();
            if s == 0.0 {
                s = norm;
            }
            if a[lo][lo - 1].norm() <= f64::EPSILON * s {
                a[lo][lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eig.push(a[hi - 1][hi - 1]);
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        if iter > 100 * n.max(10) {
            return None;
        }
        let shift = if iter.is_multiple_of(11) {
            a[hi - 1][hi - 1] + a[hi - 1][hi - 2].norm() * Complex64::new(0.75, 0.43)
        } else {
            wilkinson(
                a[hi - 2][hi - 2],
                a[hi - 2][hi - 1],
                a[hi - 1][hi - 2],
                a[hi - 1][hi - 1],
            )
        };
        for k in lo..hi {
            a[k][k] -= shift;
        }
        let mut rots = Vec::with_capacity(hi - lo);
        for k in lo..hi - 1 {
            let (c, s) = givens(a[k][k], a[k + 1][k]);
            for j in k..hi {
                let (x, y) = (a[k][j], a[k + 1][j]);
                a[k][j] = x * c + s * y;
                a[k + 1][j] = -s.conj() * x + y * c;
            }
            a[k + 1][k] = ZERO;
            rots.push((c, s));
        }
        for (k, &(c, s)) in (lo..hi - 1).zip(&rots) {
            for row in a.iter_mut().take((k + 2).min(hi - 1) + 1).skip(lo) {
                let (x, y) = (row[k], row[k + 1]);
                row[k] = x * c + s.conj() * y;
                row[k + 1] = -s * x + y * c;
            }
        }
        for k in lo..hi {
            a[k][k] += shift;
        }
    }
    Some(eig)
}

/// Roots of a self-reciprocal polynomial with their reciprocal partners.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Complex64>,
    /// `pairing[i] = Some(j)` when `|β_i − 1/β_j*| < PAIRING_TOL`.
    pub pairing: Vec<Option<usize>>,
}

impl RootSet {
    pub fn new(roots: Vec<Complex64>) -> Self {
        let n = roots.len();
        let mut pairing = vec![None; n];
        for i in 0..n {
            if pairing[i].is_some() {
                continue;
            }
            let target = if roots[i] == ZERO {
                continue;
            } else {
                Complex64::new(1.0, 0.0) / roots[i].conj()
            };
            let best = (0..n)
                .filter(|&j| j != i && pairing[j].is_none())
                .map(|j| (j, (roots[j] - target).norm()))
                .filter(|&(_, d)| d < PAIRING_TOL * target.norm().max(1.0))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((j, _)) = best {
                pairing[i] = Some(j);
                pairing[j] = Some(i);
            }
        }
        Self { roots, pairing }
    }

    pub fn from_poly(p: &Polynomial) -> Result<Self> {
        Ok(Self::new(roots(p)?))
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn min_unit_circle_distance(&self) -> f64 {
        self.roots
            .iter()
            .map(|r| (r.norm() - 1.0).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn inside(&self) -> impl Iterator<Item = &Complex64> {
        self.roots.iter().filter(|r| r.norm() < 1.0)
    }

    pub fn outside(&self) -> impl Iterator<Item = &Complex64> {
        self.roots.iter().filter(|r| r.norm() > 1.0)
    }

    pub fn fully_paired(&self) -> bool {
        self.pairing.iter().all(Option::is_some)
    }
}
