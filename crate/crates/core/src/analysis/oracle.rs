//! Dense block-circulant reference for the per-tone equalizers.

use crate::channel::{freq_response, ChannelRealization};
use crate::equalizer::{design_taps, scfde_receive_cp, EqualizerMode};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::rng::{complex_gaussian, seeded};
use crate::seq::VectorSequence;

/// `N N_r × N N_t` matrix of circular convolution with the channel; block
/// `(m, q)` is `h_{(m−q) mod N}`.
pub fn block_circulant(ch: &ChannelRealization, n: usize) -> Result<CMatrix> {
    let (nt, nr, l) = ch.dims();
    if n < l {
        return Err(Error::DftTooShort { n, taps: l });
    }
    let taps = ch.taps().padded(n);
    Ok(CMatrix::from_fn(n * nr, n * nt, |i, j| {
        let (m, r) = (i / nr, i % nr);
        let (q, t) = (j / nt, j % nt);
        taps[(m + n - q) % n][(r, t)]
    }))
}

/// Largest deviation between the dense time-domain estimate
/// `(𝓗†𝓗 + K I)^{-1} 𝓗† x` and the per-tone receiver over `trials` random
/// received blocks. `k = 0` selects ZF.
pub fn dense_equivalence_oracle(ch: &ChannelRealization, n: usize, k: f64, trials: usize, seed: u64) -> Result<f64> {
    let (nt, nr, _) = ch.dims();
    let mode = if k == 0.0 {
        EqualizerMode::Zf
    } else {
        EqualizerMode::Mmse
    };
    let big = block_circulant(ch, n)?;
    let big_h = big.hermitian();
    let gram = (&big_h * &big).add_diagonal(k.into());
    let bank = design_taps(&freq_response(ch, n)?, mode, k)?;
    let mut rng = seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let flat: Vec<_> = (0..n * nr).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        let dense = gram.solve(&big_h.try_mul(&CMatrix::column(&flat))?)?;
        let per_tone = scfde_receive_cp(&VectorSequence::from_flat(nr, flat)?, &bank)?;
        debug_assert_eq!(per_tone.dim(), nt);
        let dev = per_tone
            .as_flat()
            .iter()
            .zip(dense.as_slice())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, ChannelProfile};
    use num_complex::Complex64;

    #[test]
    fn flat_zf() {
        let ch = ChannelRealization::siso(&[Complex64::new(0.6, -0.8)]).unwrap();
        assert!(dense_equivalence_oracle(&ch, 8, 0.0, 5, 1).unwrap() < 1e-10);
    }

    #[test]
    fn two_path_mmse() {
        let ch = draw_channel(&ChannelProfile::two_path(1, 0.5, 0.5).unwrap(), &mut seeded(3));
        assert!(dense_equivalence_oracle(&ch, 16, 0.1, 5, 2).unwrap() < 1e-8);
    }

    #[test]
    fn mimo_three_tap() {
        let mut rng = seeded(4);
        for mode_k in [0.1, 0.0] {
            let ch = draw_channel(&ChannelProfile::uniform(2, 2, 3).unwrap(), &mut rng);
            assert!(dense_equivalence_oracle(&ch, 16, mode_k, 3, 5).unwrap() < 1e-8);
        }
    }

    #[test]
    fn circulant_layout() {
        let ch = ChannelRealization::siso(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)]).unwrap();
        let m = block_circulant(&ch, 3).unwrap();
        let re: Vec<f64> = m.as_slice().iter().map(|v| v.re).collect();
        assert_eq!(re, vec![1.0, 0.0, 2.0, 2.0, 1.0, 0.0, 0.0, 2.0, 1.0]);
        assert!(block_circulant(&ch, 1).is_err());
    }
}
