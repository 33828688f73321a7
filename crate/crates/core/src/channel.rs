//! Quasi-static multipath MIMO Rayleigh channels and the linear-convolution
//! system model `x_m = Σ_l h_l u_{m−l} + ν_m`.

use num_complex::Complex64;
use rand::Rng;

use crate::dft::dft_matrices;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::complex_gaussian;
use crate::seq::{MatrixSequence, VectorSequence};

/// Antenna counts and per-tap average power of a channel ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelProfile {
    nt: usize,
    nr: usize,
    tap_powers: Vec<f64>,
    delay: Option<usize>,
}

impl ChannelProfile {
    pub fn new(nt: usize, nr: usize, tap_powers: Vec<f64>) -> Result<Self> {
        if nt == 0 || nr == 0 {
            return Err(Error::Config("antenna counts must be positive".into()));
        }
        if nr < nt {
            return Err(Error::Config(format!("need nr >= nt, got nt = {nt}, nr = {nr}")));
        }
        if tap_powers.is_empty() {
            return Err(Error::Config("channel needs at least one tap".into()));
        }
        if tap_powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Config(format!(
                "tap powers must be finite and nonnegative: {tap_powers:?}"
            )));
        }
        Ok(Self {
            nt,
            nr,
            tap_powers,
            delay: None,
        })
    }

    /// SISO `H(z) = h_0 + h_1 z^d` with `E|h_0|² = p0`, `E|h_1|² = p1`.
    pub fn two_path(delay: usize, p0: f64, p1: f64) -> Result<Self> {
        Self::two_path_mimo(1, 1, delay, p0, p1)
    }

    pub fn two_path_mimo(nt: usize, nr: usize, delay: usize, p0: f64, p1: f64) -> Result<Self> {
        if delay == 0 {
            return Err(Error::Config("two-path delay must be at least 1".into()));
        }
        let mut powers = vec![0.0; delay + 1];
        powers[0] = p0;
        powers[delay] = p1;
        let mut profile = Self::new(nt, nr, powers)?;
        profile.delay = Some(delay);
        Ok(profile)
    }

    /// Single unit-power tap.
    pub fn flat(nt: usize, nr: usize) -> Result<Self> {
        Self::new(nt, nr, vec![1.0])
    }

    /// `taps` equal-power taps summing to one.
    pub fn uniform(nt: usize, nr: usize, taps: usize) -> Result<Self> {
        if taps == 0 {
            return Err(Error::Config("channel needs at least one tap".into()));
        }
        Self::new(nt, nr, vec![1.0 / taps as f64; taps])
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn taps(&self) -> usize {
        self.tap_powers.len()
    }

    pub fn tap_powers(&self) -> &[f64] {
        &self.tap_powers
    }

    /// Path delay for profiles built by [`ChannelProfile::two_path`].
    pub fn delay(&self) -> Option<usize> {
        self.delay
    }

    pub fn total_power(&self) -> f64 {
        self.tap_powers.iter().sum()
    }
}

/// One draw of the tap matrices `h_0 … h_{L−1}` (each `N_r × N_t`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    taps: MatrixSequence,
    tap_powers: Vec<f64>,
}

impl ChannelRealization {
    /// Wrap explicit taps. Recorded tap powers are the taps' own mean element
    /// energy.
    pub fn from_taps(taps: MatrixSequence) -> Self {
        let (r, c) = taps.shape();
        let tap_powers = taps.iter().map(|t| t.frobenius_sq() / (r * c) as f64).collect();
        Self { taps, tap_powers }
    }

    /// SISO channel from scalar taps.
    pub fn siso(taps: &[Complex64]) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::EmptySequence);
        }
        Ok(Self::from_taps(MatrixSequence::scalar(taps)))
    }

    pub fn taps(&self) -> &MatrixSequence {
        &self.taps
    }

    pub fn tap_powers(&self) -> &[f64] {
        &self.tap_powers
    }

    /// `(N_t, N_r, L)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        let (nr, nt) = self.taps.shape();
        (nt, nr, self.taps.len())
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    pub fn is_siso(&self) -> bool {
        self.taps.shape() == (1, 1)
    }

    /// `H(z) = Σ_l h_l z^l`.
    pub fn transfer(&self, z: Complex64) -> CMatrix {
        let (nr, nt) = self.taps.shape();
        let mut acc = CMatrix::zeros(nr, nt);
        let mut zp = Complex64::new(1.0, 0.0);
        for tap in self.taps.iter() {
            acc = &acc + &tap.scale(zp);
            zp *= z;
        }
        acc
    }
}

/// Per-element noise variance `N_0` of the additive white Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub n0: f64,
}

impl NoiseConfig {
    pub fn new(n0: f64) -> Result<Self> {
        if !(n0 >= 0.0 && n0.is_finite()) {
            return Err(Error::OutOfRange(format!("noise variance {n0}")));
        }
        Ok(Self { n0 })
    }

    pub fn noiseless() -> Self {
        Self { n0: 0.0 }
    }

    /// `N_0 = 10^{−SNR/10}` (unit transmit and channel power).
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            n0: 10f64.powf(-snr_db / 10.0),
        }
    }
}

/// Draw independent circularly-symmetric Gaussian tap elements with variance
/// `tap_powers[l]`.
pub fn draw_channel<R: Rng + ?Sized>(profile: &ChannelProfile, rng: &mut R) -> ChannelRealization {
    let taps = profile
        .tap_powers
        .iter()
        .map(|&p| {
            if p == 0.0 {
                CMatrix::zeros(profile.nr, profile.nt)
            } else {
                CMatrix::from_fn(profile.nr, profile.nt, |_, _| complex_gaussian(rng, p))
            }
        })
        .collect();
    ChannelRealization {
        taps: MatrixSequence::new(taps).expect("profile has at least one tap"),
        tap_powers: profile.tap_powers.clone(),
    }
}

/// Noise-free linear convolution with zero samples before index 0.
pub fn convolve_linear(ch: &ChannelRealization, stream: &VectorSequence) -> Result<VectorSequence> {
    let (nt, nr, _) = ch.dims();
    if stream.dim() != nt {
        return Err(Error::DimensionMismatch(format!(
            "stream of dimension {} into a channel with {nt} transmit antennas",
            stream.dim()
        )));
    }
    let len = stream.len();
    let mut out = VectorSequence::zeros(len, nr);
    for (l, tap) in ch.taps.iter().enumerate() {
        if tap.max_abs() == 0.0 {
            continue;
        }
        for m in l..len {
            let y = tap.mul_vec(&stream[m - l]);
            for (o, v) in out[m].iter_mut().zip(y) {
                *o += v;
            }
        }
    }
    Ok(out)
}

/// White Gaussian noise, `len` vectors of dimension `dim`, each element
/// `CN(0, N_0)`.
pub fn awgn<R: Rng + ?Sized>(len: usize, dim: usize, noise: NoiseConfig, rng: &mut R) -> VectorSequence {
    let data = (0..len * dim).map(|_| complex_gaussian(rng, noise.n0)).collect();
    VectorSequence::from_flat(dim.max(1), data).expect("len*dim samples")
}

/// The system model: linear convolution plus AWGN.
pub fn apply_channel<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    stream: &VectorSequence,
    noise: NoiseConfig,
    rng: &mut R,
) -> Result<VectorSequence> {
    let mut out = convolve_linear(ch, stream)?;
    if noise.n0 > 0.0 {
        for v in out.as_flat_mut() {
            *v += complex_gaussian(rng, noise.n0);
        }
    }
    Ok(out)
}

/// Per-tone response `h̃_n = N^{-1/2} Σ_l h_l e^{−j2πln/N}`.
pub fn freq_response(ch: &ChannelRealization, n: usize) -> Result<MatrixSequence> {
    if n < ch.len() {
        return Err(Error::DftTooShort { n, taps: ch.len() });
    }
    dft_matrices(&ch.taps.padded(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dft::{circular_convolve, dft_reference};
    use crate::rng::seeded;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_power_taps_are_exactly_zero() {
        let p = ChannelProfile::new(2, 2, vec![0.0, 0.0, 0.0]).unwrap();
        let ch = draw_channel(&p, &mut seeded(4));
        assert!(ch.taps().iter().all(|t| t.max_abs() == 0.0));
    }

    #[test]
    fn two_path_profile_has_empty_middle_taps() {
        let p = ChannelProfile::two_path(2, 0.5, 0.5).unwrap();
        assert_eq!(p.tap_powers(), &[0.5, 0.0, 0.5]);
        let ch = draw_channel(&p, &mut seeded(9));
        assert_eq!(ch.len(), 3);
        assert_eq!(ch.taps()[1].max_abs(), 0.0);
        assert!(ch.taps()[0].max_abs() > 0.0 && ch.taps()[2].max_abs() > 0.0);
    }

    #[test]
    fn profile_validation() {
        assert!(ChannelProfile::new(2, 1, vec![1.0]).is_err());
        assert!(ChannelProfile::new(1, 1, vec![]).is_err());
        assert!(ChannelProfile::new(1, 1, vec![-0.1]).is_err());
        assert!(ChannelProfile::new(1, 1, vec![f64::NAN]).is_err());
        assert!(ChannelProfile::two_path(0, 0.5, 0.5).is_err());
    }

    #[test]
    fn unit_tap_power() {
        let p = ChannelProfile::flat(1, 1).unwrap();
        let mut rng = seeded(12);
        let n = 100_000;
        let e: f64 = (0..n)
            .map(|_| draw_channel(&p, &mut rng).taps()[0][(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((e - 1.0).abs() < 0.02, "E|h0|^2 = {e}");
    }

    #[test]
    fn draws_are_seed_deterministic() {
        let p = ChannelProfile::uniform(1, 2, 3).unwrap();
        assert_eq!(draw_channel(&p, &mut seeded(5)), draw_channel(&p, &mut seeded(5)));
    }

    #[test]
    fn identity_channel_is_transparent() {
        let ch = ChannelRealization::from_taps(MatrixSequence::new(vec![CMatrix::identity(2)]).unwrap());
        let u = VectorSequence::from_flat(2, (0..20).map(|k| c(k as f64, -(k as f64))).collect()).unwrap();
        let x = apply_channel(&ch, &u, NoiseConfig::noiseless(), &mut seeded(0)).unwrap();
        assert_eq!(x, u);
    }

    #[test]
    fn impulse_reproduces_taps() {
        let taps = [c(0.3, 0.1), c(-0.2, 0.5), c(0.7, -0.4)];
        let ch = ChannelRealization::siso(&taps).unwrap();
        let mut u = VectorSequence::zeros(12, 1);
        u[5][0] = c(1.0, 0.0);
        let x = apply_channel(&ch, &u, NoiseConfig::noiseless(), &mut seeded(0)).unwrap();
        for m in 0..12 {
            let expect = if (5..8).contains(&m) { taps[m - 5] } else { c(0.0, 0.0) };
            assert_eq!(x[m][0], expect);
        }
    }

    #[test]
    fn noise_only_variance() {
        let ch = ChannelRealization::siso(&[c(1.0, 0.0)]).unwrap();
        let u = VectorSequence::zeros(100_000, 1);
        let n0 = 0.37;
        let x = apply_channel(&ch, &u, NoiseConfig::new(n0).unwrap(), &mut seeded(77)).unwrap();
        let var = x.energy() / x.len() as f64;
        assert!((var / n0 - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let ch = draw_channel(&ChannelProfile::flat(2, 2).unwrap(), &mut seeded(1));
        let u = VectorSequence::zeros(4, 1);
        assert!(matches!(
            apply_channel(&ch, &u, NoiseConfig::noiseless(), &mut seeded(0)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn freq_response_flat_channel() {
        let h0 = c(0.8, -0.6);
        let ch = ChannelRealization::siso(&[h0]).unwrap();
        let hf = freq_response(&ch, 8).unwrap();
        for v in hf.scalars() {
            assert!((v - h0 / 8f64.sqrt()).norm() < 1e-15);
        }
    }

    #[test]
    fn freq_response_two_path_closed_form() {
        let (h0, h1) = (c(0.4, 0.2), c(-0.9, 0.3));
        let n = 16;
        let hf = freq_response(&ChannelRealization::siso(&[h0, h1]).unwrap(), n)
            .unwrap()
            .scalars();
        for (k, v) in hf.iter().enumerate() {
            let z = Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64);
            assert!((v - (h0 + h1 * z) / (n as f64).sqrt()).norm() < 1e-12);
        }
    }

    #[test]
    fn freq_response_matches_reference_dft() {
        let ch = draw_channel(&ChannelProfile::uniform(1, 1, 4).unwrap(), &mut seeded(21));
        let mut padded = ch.taps().scalars();
        padded.resize(32, c(0.0, 0.0));
        let expect = dft_reference(&padded);
        let got = freq_response(&ch, 32).unwrap().scalars();
        let err = got.iter().zip(&expect).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn dft_size_shorter_than_channel_rejected() {
        let ch = draw_channel(&ChannelProfile::uniform(1, 1, 5).unwrap(), &mut seeded(2));
        assert!(matches!(
            freq_response(&ch, 4),
            Err(Error::DftTooShort { n: 4, taps: 5 })
        ));
    }

    #[test]
    fn without_prefix_only_head_breaks_circularity() {
        let profile = ChannelProfile::uniform(1, 2, 4).unwrap();
        let mut rng = seeded(31);
        for _ in 0..10 {
            let ch = draw_channel(&profile, &mut rng);
            let n = 16;
            let y = VectorSequence::from_flat(1, (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect()).unwrap();
            let lin = convolve_linear(&ch, &y).unwrap();
            let circ = circular_convolve(&ch.taps().padded(n), &y).unwrap();
            for m in 0..n {
                let d: f64 = lin[m]
                    .iter()
                    .zip(&circ[m])
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                if m >= ch.len() - 1 {
                    assert!(d < 1e-12, "m = {m}");
                } else {
                    assert!(d > 1e-6, "m = {m} unexpectedly circular");
                }
            }
        }
    }

    #[test]
    fn received_power_with_unit_total_tap_power() {
        let profile = ChannelProfile::two_path(1, 0.5, 0.5).unwrap();
        let mut rng = seeded(8);
        let mut total = 0.0;
        let mut count = 0usize;
        // 20000 channel draws x 5 samples each.
        for _ in 0..20_000 {
            let ch = draw_channel(&profile, &mut rng);
            let u = VectorSequence::from_flat(1, (0..6).map(|_| complex_gaussian(&mut rng, 1.0)).collect()).unwrap();
            let x = convolve_linear(&ch, &u).unwrap();
            total += x.slice(1..6).energy();
            count += 5;
        }
        let p = total / count as f64;
        assert!((p - 1.0).abs() < 0.02, "received power {p}");
    }
}
