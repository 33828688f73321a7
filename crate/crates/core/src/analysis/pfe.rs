//! Partial-fraction form of the time-domain inverse filter `γ`.

use num_complex::Complex64;

use super::poly::{build_r, gram_polynomial_matrix, reversed_adjoint, Polynomial};
use super::roots::{roots, RootSet};
use crate::channel::{freq_response, ChannelRealization};
use crate::dft::idft_matrices;
use crate::equalizer::{EqualizerBank, EqualizerMode};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::seq::MatrixSequence;

/// Poles closer than this are treated as a repeated pole.
pub const DISTINCT_POLE_TOL: f64 = 1e-6;

/// Poles with `||β|−1|` below this make the closed form ill-posed.
pub const UNIT_CIRCLE_TOL: f64 = 1e-9;

/// `g̃(z) = Σ_l α_l / (z − β_l)`, with `α_l` an `N_t × N_r` residue.
#[derive(Debug, Clone)]
pub struct PartialFractionExpansion {
    pub mode: EqualizerMode,
    pub regularizer: f64,
    pub denominator: Polynomial,
    pub poles: Vec<Complex64>,
    pub residues: Vec<CMatrix>,
    /// Direct term, nonzero only for a memoryless channel.
    pub constant: CMatrix,
}

impl PartialFractionExpansion {
    /// Number of poles `P`.
    pub fn order(&self) -> usize {
        self.poles.len()
    }

    pub fn root_set(&self) -> RootSet {
        RootSet::new(self.poles.clone())
    }

    /// Evaluate the rational equalizer at `z`.
    pub fn eval(&self, z: Complex64) -> CMatrix {
        self.poles
            .iter()
            .zip(&self.residues)
            .fold(self.constant.clone(), |acc, (&b, a)| {
                &acc + &a.scale(Complex64::new(1.0, 0.0) / (z - b))
            })
    }
}

enum Denominator {
    /// `g̃ = adj(H(z)) / det H(z)`.
    Square,
    /// `g̃ = adj(A(z)) B(z) / det A(z)`.
    Gram,
}

fn numerator(ch: &ChannelRealization, k: f64, kind: &Denominator, z: Complex64) -> CMatrix {
    match kind {
        Denominator::Square => ch.transfer(z).adjugate(),
        Denominator::Gram => &gram_polynomial_matrix(ch, k, z).adjugate() * &reversed_adjoint(ch, z),
    }
}

/// Partial-fraction expansion of the ZF (`k = 0`) or MMSE (`k > 0`) equalizer.
///
/// Square ZF uses `det H(z)` as denominator (`P = N_t (L−1)`); all other cases
/// use `R(z)` (`P = 2 N_t (L−1)`).
pub fn partial_fraction(ch: &ChannelRealization, mode: EqualizerMode, k: f64) -> Result<PartialFractionExpansion> {
    let (nt, nr, l) = ch.dims();
    let k = match mode {
        EqualizerMode::Zf => 0.0,
        EqualizerMode::Mmse if k > 0.0 && k.is_finite() => k,
        EqualizerMode::Mmse => return Err(Error::OutOfRange(format!("MMSE regularizer must be positive, got {k}"))),
    };
    let kind = if mode == EqualizerMode::Zf && nt == nr {
        Denominator::Square
    } else {
        Denominator::Gram
    };
    let denominator = match kind {
        Denominator::Square if ch.is_siso() => Polynomial::new(ch.taps().scalars()),
        Denominator::Square => {
            let deg = nt * (l - 1);
            let p = Polynomial::interpolate_unit_circle(2 * deg + 1, |z| ch.transfer(z).det());
            Polynomial::new(p.coeffs()[..=deg].to_vec())
        }
        Denominator::Gram => build_r(ch, k)?.poly().clone(),
    }
    .trimmed(1e-14);

    let deg = denominator
        .degree()
        .ok_or_else(|| Error::Singular("equalizer denominator is identically zero".into()))?;
    if deg == 0 {
        let z = Complex64::new(1.0, 0.0);
        let constant = numerator(ch, k, &kind, z).scale(Complex64::new(1.0, 0.0) / denominator.coeffs()[0]);
        return Ok(PartialFractionExpansion {
            mode,
            regularizer: k,
            denominator,
            poles: Vec::new(),
            residues: Vec::new(),
            constant,
        });
    }
    let poles = roots(&denominator)?;
    for i in 0..poles.len() {
        for j in i + 1..poles.len() {
            if (poles[i] - poles[j]).norm() < DISTINCT_POLE_TOL {
                return Err(Error::NearMultiplePoles(i, j));
            }
        }
    }
    let deriv = denominator.derivative();
    let residues = poles
        .iter()
        .map(|&b| numerator(ch, k, &kind, b).scale(Complex64::new(1.0, 0.0) / deriv.eval(b)))
        .collect();
    Ok(PartialFractionExpansion {
        mode,
        regularizer: k,
        denominator,
        poles,
        residues,
        constant: CMatrix::zeros(nt, nr),
    })
}

/// `γ_m = (1/N) Σ_n g̃(z_n) z_n^{−m}` with `z_n = e^{−j2πn/N}`, evaluated in
/// closed form from the poles.
///
/// A pole inside the unit circle contributes `α β^{N−1−m} / (1 − β^N)`; one
/// outside contributes the same value written as `−α β^{−m−1} / (1 − β^{−N})`.
pub fn gamma_closed_form(pf: &PartialFractionExpansion, n: usize, m: usize) -> Result<CMatrix> {
    if m >= n {
        return Err(Error::OutOfRange(format!("index {m} outside 0..{n}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut acc = if m == 0 {
        pf.constant.clone()
    } else {
        pf.constant.scale_real(0.0)
    };
    for (&b, a) in pf.poles.iter().zip(&pf.residues) {
        let r = b.norm();
        if (r - 1.0).abs() < UNIT_CIRCLE_TOL {
            return Err(Error::PoleOnUnitCircle { pole: format!("{b}") });
        }
        let weight = if r < 1.0 {
            b.powi((n - 1 - m) as i32) / (one - b.powi(n as i32))
        } else {
            let inv = one / b;
            -inv.powi(m as i32 + 1) / (one - inv.powi(n as i32))
        };
        acc = &acc + &a.scale(weight);
    }
    Ok(acc)
}

/// `γ_0 … γ_{N−1}` in closed form.
pub fn gamma_sequence(pf: &PartialFractionExpansion, n: usize) -> Result<MatrixSequence> {
    let entries = (0..n)
        .map(|m| gamma_closed_form(pf, n, m))
        .collect::<Result<Vec<_>>>()?;
    MatrixSequence::new(entries)
}

/// `γ = IDFT{g̃} / √N` straight from the designed tap bank.
pub fn gamma_from_bank(bank: &EqualizerBank) -> Result<MatrixSequence> {
    let n = bank.n();
    let g = idft_matrices(bank.taps())?;
    MatrixSequence::new(g.iter().map(|m| m.scale_real(1.0 / (n as f64).sqrt())).collect())
}

/// Reason the closed form was bypassed in [`gamma_with_fallback`].
#[derive(Debug, Clone, PartialEq)]
pub enum GammaFallback {
    NearMultiplePoles(usize, usize),
    PoleOnUnitCircle(String),
    RootFinding,
}

/// Closed-form `γ` when the poles are well separated, otherwise the
/// IDFT of the designed taps, together with the reason for falling back.
pub fn gamma_with_fallback(
    ch: &ChannelRealization,
    mode: EqualizerMode,
    n0: f64,
    n: usize,
) -> Result<(MatrixSequence, Option<GammaFallback>)> {
    let attempt = partial_fraction(ch, mode, n0).and_then(|pf| gamma_sequence(&pf, n));
    let reason = match attempt {
        Ok(g) => return Ok((g, None)),
        Err(Error::NearMultiplePoles(i, j)) => GammaFallback::NearMultiplePoles(i, j),
        Err(Error::PoleOnUnitCircle { pole }) => GammaFallback::PoleOnUnitCircle(pole),
        Err(Error::RootFinding { .. }) => GammaFallback::RootFinding,
        Err(e) => return Err(e),
    };
    let bank = EqualizerBank::design(&freq_response(ch, n)?, mode, n0)?;
    Ok((gamma_from_bank(&bank)?, Some(reason)))
}

/// Least-squares slopes of `ln‖γ_m‖_∞` near both edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRates {
    /// Slope over `m ∈ [1, N/4]`.
    pub head: f64,
    /// Slope over the distance `N−1−m` for `m ∈ [3N/4, N−1]`.
    pub tail: f64,
}

fn ls_slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Decay rates of `γ`; samples below `1e-10 · max_m ‖γ_m‖_∞` are excluded,
/// and a side with fewer than two usable samples reports `−∞`.
pub fn edge_decay_rate(gamma: &MatrixSequence) -> Result<DecayRates> {
    let n = gamma.len();
    if n < 16 {
        return Err(Error::OutOfRange(format!("need N >= 16 for a decay fit, got {n}")));
    }
    let norms: Vec<f64> = gamma.iter().map(CMatrix::max_abs).collect();
    let floor = 1e-10 * norms.iter().copied().fold(0.0, f64::max);
    let usable = |m: usize, x: usize| (norms[m] > floor && norms[m] > 0.0).then(|| (x as f64, norms[m].ln()));
    let head: Vec<_> = (1..=n / 4).filter_map(|m| usable(m, m)).collect();
    let tail: Vec<_> = (3 * n / 4..n).filter_map(|m| usable(m, n - 1 - m)).collect();
    Ok(DecayRates {
        head: ls_slope(&head),
        tail: ls_slope(&tail),
    })
}
