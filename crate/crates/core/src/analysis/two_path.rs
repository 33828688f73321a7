//! Closed forms for the two-path channel `h_0 + h_1 z^d`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, derive_seed, seeded};

/// Roots of `R(z) = h_0 h_1* + ψ z^d + h_0* h_1 z^{2d}`, seen as a quadratic
/// in `z^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPathAnalysis {
    pub h0: Complex64,
    pub h1: Complex64,
    pub d: usize,
    pub k: f64,
    /// `|h_0|² + |h_1|² + K`.
    pub psi: f64,
    /// Inner root in `z^d`, `|ρ_1| ≤ 1`.
    pub rho1: Complex64,
    /// Outer root in `z^d`, `|ρ_2| ≥ 1`.
    pub rho2: Complex64,
}

/// Result of [`two_path`]; a zero path leaves a pure (possibly delayed)
/// flat channel with no poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoPathOutcome {
    Flat { h0: Complex64, h1: Complex64, k: f64 },
    TwoPath(TwoPathAnalysis),
}

impl TwoPathOutcome {
    pub fn analysis(&self) -> Option<&TwoPathAnalysis> {
        match self {
            Self::Flat { .. } => None,
            Self::TwoPath(a) => Some(a),
        }
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Self::Flat { .. })
    }
}

pub fn two_path(h0: Complex64, h1: Complex64, d: usize, k: f64) -> Result<TwoPathOutcome> {
    if h0 == Complex64::new(0.0, 0.0) && h1 == Complex64::new(0.0, 0.0) {
        return Err(Error::OutOfRange("both paths are zero".into()));
    }
    if d == 0 {
        return Err(Error::OutOfRange("delay must be at least 1".into()));
    }
    if !(k >= 0.0 && k.is_finite()) {
        return Err(Error::OutOfRange(format!("regularizer K = {k}")));
    }
    if h0.norm() == 0.0 || h1.norm() == 0.0 {
        return Ok(TwoPathOutcome::Flat { h0, h1, k });
    }
    let (a, b) = (h0.norm(), h1.norm());
    let psi = a * a + b * b + k;
    let s = (psi * psi - 4.0 * a * a * b * b).max(0.0).sqrt();
    let lead = 2.0 * h0.conj() * h1;
    let rho2 = -(psi + s) / lead;
    let rho1 = -(psi - s) / lead;
    Ok(TwoPathOutcome::TwoPath(TwoPathAnalysis {
        h0,
        h1,
        d,
        k,
        psi,
        rho1,
        rho2,
    }))
}

impl TwoPathAnalysis {
    /// The `2d` roots of `R(z)`: the `d`-th roots of `ρ_1` and `ρ_2`.
    pub fn roots_of_r(&self) -> Vec<Complex64> {
        let d = self.d as f64;
        let mut out = Vec::with_capacity(2 * self.d);
        for rho in [self.rho1, self.rho2] {
            let (r, theta) = rho.to_polar();
            for j in 0..self.d {
                out.push(Complex64::from_polar(
                    r.powf(1.0 / d),
                    (theta + 2.0 * std::f64::consts::PI * j as f64) / d,
                ));
            }
        }
        out
    }

    /// `|ρ_2|^{1/d}`, the magnitude of the outer poles of the MMSE equalizer.
    pub fn outer_pole_magnitude(&self) -> f64 {
        self.rho2.norm().powf(1.0 / self.d as f64)
    }

    /// `|ρ_1 ρ_2* − 1|`.
    pub fn reciprocity_defect(&self) -> f64 {
        (self.rho1 * self.rho2.conj() - 1.0).norm()
    }

    /// `|ρ_2| ≥ max(|h_0/h_1|, |h_1/h_0|)`, up to relative rounding `tol`.
    pub fn outer_root_dominates(&self, tol: f64) -> bool {
        let ratio = (self.h0.norm() / self.h1.norm()).max(self.h1.norm() / self.h0.norm());
        self.rho2.norm() >= ratio * (1.0 - tol)
    }

    /// Smallest `|h_1|²` for which `|ρ_2|` can equal the current value:
    /// `4|ρ_2|²K / (1 − |ρ_2|²)²`.
    pub fn solvability_threshold(&self) -> f64 {
        let r2 = self.rho2.norm_sqr();
        4.0 * r2 * self.k / (1.0 - r2).powi(2)
    }

    /// Residual of `|h_0|² − (|ρ_2| + 1/|ρ_2|)|h_0||h_1| + |h_1|² + K = 0`.
    pub fn magnitude_equation_residual(&self) -> f64 {
        let (a, b, r) = (self.h0.norm(), self.h1.norm(), self.rho2.norm());
        (a * a - (r + 1.0 / r) * a * b + b * b + self.k).abs() / self.psi
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("epsilon = {eps} must lie in (0, 1)")))
    }
}

/// Probability that `|h_0/h_1|^{1/d} ∈ (1−ε, 1+ε)` for independent
/// equal-power Rayleigh paths.
pub fn p_epsilon(eps: f64, d: usize) -> Result<f64> {
    check_eps(eps)?;
    if d == 0 {
        return Err(Error::OutOfRange("delay must be at least 1".into()));
    }
    let a = (1.0 - eps).powi(2 * d as i32);
    let b = (1.0 + eps).powi(2 * d as i32);
    Ok((b - a) / (1.0 + a + b + a * b))
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub hits: u64,
    pub trials: u64,
    pub p: f64,
    pub stderr: f64,
}

impl McEstimate {
    fn new(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            hits,
            trials,
            p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }
}

const MC_CHUNK: u64 = 1 << 14;

fn parallel_count(trials: u64, seed: u64, hit: impl Fn(&mut crate::rng::SimRng) -> bool + Sync) -> McEstimate {
    let chunks = trials.div_ceil(MC_CHUNK);
    let hits = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = seeded(derive_seed(seed, &[c]));
            let count = MC_CHUNK.min(trials - c * MC_CHUNK);
            (0..count).filter(|_| hit(&mut rng)).count() as u64
        })
        .sum();
    McEstimate::new(hits, trials)
}

pub fn p_epsilon_mc(eps: f64, d: usize, trials: u64, seed: u64) -> Result<McEstimate> {
    p_epsilon(eps, d)?;
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be positive".into()));
    }
    let inv_d = 1.0 / d as f64;
    Ok(parallel_count(trials, seed, |rng| {
        let h0 = complex_gaussian(rng, 1.0);
        let h1 = complex_gaussian(rng, 1.0);
        let r = (h0.norm() / h1.norm()).powf(inv_d);
        r > 1.0 - eps && r < 1.0 + eps
    }))
}

/// `e^{−K/(ε²σ²)}`, an upper bound on the probability that the outer MMSE
/// root falls within `ε` of the unit circle.
pub fn mmse_root_exclusion_prob(eps: f64, k: f64, sigma2: f64) -> Result<f64> {
    if !(eps > 0.0 && k > 0.0 && sigma2 > 0.0) {
        return Err(Error::OutOfRange(format!(
            "eps = {eps}, K = {k}, sigma2 = {sigma2} must be positive"
        )));
    }
    Ok((-k / (eps * eps * sigma2)).exp())
}

/// Fraction of channels with `h_0, h_1 ~ CN(0, σ²)` whose `|ρ_2| ∈ (1, 1+ε)`.
pub fn mmse_root_exclusion_mc(eps: f64, k: f64, sigma2: f64, trials: u64, seed: u64) -> Result<McEstimate> {
    mmse_root_exclusion_prob(eps, k, sigma2)?;
    if trials == 0 {
        return Err(Error::OutOfRange("trials must be positive".into()));
    }
    Ok(parallel_count(trials, seed, |rng| {
        let h0 = complex_gaussian(rng, sigma2);
        let h1 = complex_gaussian(rng, sigma2);
        match two_path(h0, h1, 1, k) {
            Ok(TwoPathOutcome::TwoPath(a)) => {
                let r = a.rho2.norm();
                r > 1.0 && r < 1.0 + eps
            }
            _ => false,
        }
    }))
}

/// Draw a two-path pair with unit-power paths.
pub fn random_two_path<R: Rng + ?Sized>(rng: &mut R) -> (Complex64, Complex64) {
    (complex_gaussian(rng, 1.0), complex_gaussian(rng, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn analysis(h0: Complex64, h1: Complex64, d: usize, k: f64) -> TwoPathAnalysis {
        *two_path(h0, h1, d, k).unwrap().analysis().unwrap()
    }

    #[test]
    fn unit_taps_zf_double_root() {
        let a = analysis(c(1.0, 0.0), c(1.0, 0.0), 1, 0.0);
        assert_eq!(a.psi, 2.0);
        assert_eq!(a.rho1, c(-1.0, 0.0));
        assert_eq!(a.rho2, c(-1.0, 0.0));
    }

    #[test]
    fn unit_taps_mmse() {
        let a = analysis(c(1.0, 0.0), c(1.0, 0.0), 1, 1.0);
        assert_eq!(a.psi, 3.0);
        let expect = (-3.0 - 5f64.sqrt()) / 2.0;
        assert!((a.rho2 - c(expect, 0.0)).norm() < 1e-15);
        assert!((a.rho2.norm() - 2.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn invariants_over_random_channels() {
        let mut rng = seeded(17);
        for _ in 0..10_000 {
            let (h0, h1) = random_two_path(&mut rng);
            let a = analysis(h0, h1, 1, 0.1);
            assert!(a.reciprocity_defect() < 1e-9);
            assert!(a.outer_root_dominates(1e-12));
            assert!(a.rho2.norm() >= a.rho1.norm());
            assert!(a.magnitude_equation_residual() < 1e-12);
            assert!(h1.norm_sqr() >= a.solvability_threshold() * (1.0 - 1e-9));
        }
    }

    #[test]
    fn roots_of_r_solve_the_polynomial() {
        let (h0, h1) = (c(0.4, -0.3), c(-0.8, 0.6));
        for d in 1..=4 {
            let a = analysis(h0, h1, d, 0.1);
            let roots = a.roots_of_r();
            assert_eq!(roots.len(), 2 * d);
            for z in roots {
                let zd = z.powi(d as i32);
                let val = h0 * h1.conj() + a.psi * zd + h0.conj() * h1 * zd * zd;
                assert!(val.norm() < 1e-12, "d={d}: {val}");
            }
        }
    }

    #[test]
    fn zero_path_is_flat() {
        assert!(two_path(c(1.0, 0.0), c(0.0, 0.0), 1, 0.1).unwrap().is_flat());
        assert!(two_path(c(0.0, 0.0), c(1.0, 0.0), 3, 0.1).unwrap().is_flat());
        assert!(two_path(c(0.0, 0.0), c(0.0, 0.0), 1, 0.1).is_err());
        assert!(two_path(c(1.0, 0.0), c(1.0, 0.0), 0, 0.1).is_err());
    }

    #[test]
    fn p_epsilon_closed_form() {
        let p = p_epsilon(0.5, 1).unwrap();
        assert!((p - 0.5 / (1.0 + 0.5f64.powi(4) / 4.0)).abs() < 1e-15);
        assert!((p - 0.49233).abs() < 3e-5);
        for d in 1..=4 {
            let slope = p_epsilon(1e-3, d).unwrap() / 1e-3;
            assert!((slope / d as f64 - 1.0).abs() < 0.02);
        }
        assert!(p_epsilon(1e-9, 2).unwrap() < 1e-8);
        assert!(p_epsilon(0.0, 1).is_err());
        assert!(p_epsilon(1.0, 1).is_err());
        assert!(p_epsilon(0.5, 0).is_err());
    }

    #[test]
    fn p_epsilon_mc_is_deterministic() {
        let a = p_epsilon_mc(0.3, 2, 50_000, 5).unwrap();
        let b = p_epsilon_mc(0.3, 2, 50_000, 5).unwrap();
        assert_eq!(a, b);
        let exact = p_epsilon(0.3, 2).unwrap();
        assert!((a.p - exact).abs() < 4.0 * a.stderr);
    }

    #[test]
    fn exclusion_bound_anchors() {
        let k: f64 = 0.1;
        let b4 = mmse_root_exclusion_prob(0.5 * k.sqrt(), k, 1.0).unwrap();
        assert!((b4 - (-4f64).exp()).abs() < 1e-15);
        assert!(b4 < 0.02);
        let b16 = mmse_root_exclusion_prob(0.25 * k.sqrt(), k, 1.0).unwrap();
        assert!((b16 - (-16f64).exp()).abs() < 1e-20);
        assert!(b16 < 1.2e-7);
        assert!(mmse_root_exclusion_prob(0.0, k, 1.0).is_err());
    }
}
