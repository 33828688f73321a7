//! Quick numerical self-checks run by the `selftest` command.

use crate::analysis::{build_r, dense_equivalence_oracle, roots, two_path, RootSet};
use crate::channel::{convolve_linear, draw_channel, freq_response, ChannelProfile, ChannelRealization};
use crate::dft::{circular_convolve, dft, dft_reference, dft_scalar, idft};
use crate::equalizer::{scfde_receive_cp, EqualizerBank, EqualizerMode};
use crate::error::Result;
use crate::harness::{mlse_viterbi, sequence_metric};
use crate::rng::{complex_gaussian, seeded, SimRng};
use crate::seq::VectorSequence;
use crate::txrx::{assemble_cp_frame, random_qpsk};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Measured quantity and the tolerance it was held to.
    pub detail: String,
}

fn check(name: &'static str, value: f64, tol: f64) -> Check {
    Check {
        name,
        passed: value <= tol,
        detail: format!("{value:.3e} <= {tol:.0e}"),
    }
}

fn random_seq(rng: &mut SimRng, len: usize, dim: usize) -> VectorSequence {
    VectorSequence::from_flat(dim, (0..len * dim).map(|_| complex_gaussian(rng, 1.0)).collect()).unwrap()
}

fn dft_roundtrip(rng: &mut SimRng) -> Result<f64> {
    let mut worst = 0.0f64;
    for n in [1, 7, 64, 100] {
        let x = random_seq(rng, n, 2);
        worst = worst.max(idft(&dft(&x)?)?.max_abs_diff(&x));
        let fast = dft_scalar(&x.as_flat()[..n]);
        let slow = dft_reference(&x.as_flat()[..n]);
        worst = worst.max(fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));
    }
    Ok(worst)
}

fn convolution_theorem(rng: &mut SimRng) -> Result<f64> {
    let n = 32;
    let ch = draw_channel(&ChannelProfile::uniform(2, 2, 4)?, rng);
    let u = random_seq(rng, n, 2);
    let lhs = dft(&circular_convolve(&ch.taps().padded(u.len()), &u)?)?;
    let hf = freq_response(&ch, n)?;
    let uf = dft(&u)?;
    let mut rhs = VectorSequence::zeros(n, 2);
    for k in 0..n {
        let v = hf[k].mul_vec(&uf[k]);
        for (o, x) in rhs[k].iter_mut().zip(v) {
            *o = x * (n as f64).sqrt();
        }
    }
    Ok(lhs.max_abs_diff(&rhs))
}

fn cp_circularity(rng: &mut SimRng) -> Result<f64> {
    let (n, l) = (16, 4);
    let ch = draw_channel(&ChannelProfile::uniform(1, 2, l)?, rng);
    let u = random_seq(rng, n, 1);
    let rx = convolve_linear(&ch, &assemble_cp_frame(&u, l - 1)?)?;
    Ok(rx
        .slice(l - 1..l - 1 + n)
        .max_abs_diff(&circular_convolve(&ch.taps().padded(u.len()), &u)?))
}

fn zf_reconstruction(rng: &mut SimRng) -> Result<f64> {
    let n = 64;
    let ch = draw_channel(&ChannelProfile::uniform(2, 2, 3)?, rng);
    let (u, _) = random_qpsk(n, 2, rng);
    let bank = EqualizerBank::design(&freq_response(&ch, n)?, EqualizerMode::Zf, 0.0)?;
    let x = circular_convolve(&ch.taps().padded(u.len()), &u)?;
    Ok(scfde_receive_cp(&x, &bank)?.max_abs_diff(&u))
}

fn mlse_exhaustive(rng: &mut SimRng) -> Result<f64> {
    let ch = ChannelRealization::siso(&[complex_gaussian(rng, 0.5), complex_gaussian(rng, 0.5)])?;
    let (u, _) = random_qpsk(6, 1, rng);
    let mut rx = convolve_linear(&ch, &u)?;
    for v in rx.as_flat_mut() {
        *v += complex_gaussian(rng, 0.3);
    }
    let got = sequence_metric(&rx, &ch, &mlse_viterbi(&rx, &ch, 0.3)?)?;
    let mut best = f64::INFINITY;
    let mut seq = [0u8; 6];
    for code in 0..4u32.pow(6) {
        for (k, s) in seq.iter_mut().enumerate() {
            *s = ((code >> (2 * k)) & 3) as u8;
        }
        best = best.min(sequence_metric(&rx, &ch, &seq)?);
    }
    Ok((got - best).abs())
}

fn mmse_roots_off_circle(rng: &mut SimRng) -> Result<f64> {
    let mut closest = f64::INFINITY;
    for _ in 0..200 {
        let ch = draw_channel(&ChannelProfile::two_path(1, 0.5, 0.5)?, rng);
        let set = RootSet::new(roots(build_r(&ch, 0.1)?.poly())?);
        closest = closest.min(set.min_unit_circle_distance());
    }
    Ok(1.0 / closest)
}

fn two_path_reciprocity(rng: &mut SimRng) -> Result<f64> {
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let out = two_path(complex_gaussian(rng, 1.0), complex_gaussian(rng, 1.0), 1, 0.1)?;
        if let Some(a) = out.analysis() {
            worst = worst.max(a.reciprocity_defect());
        }
    }
    Ok(worst)
}

fn dense_equivalence(rng: &mut SimRng) -> Result<f64> {
    let mut worst = 0.0f64;
    for (nt, l) in [(1, 2), (2, 3)] {
        let ch = draw_channel(&ChannelProfile::uniform(nt, nt, l)?, rng);
        worst = worst.max(dense_equivalence_oracle(&ch, 16, 0.1, 2, 7)?);
    }
    Ok(worst)
}

/// Run every check with a fixed seed.
pub fn run() -> Vec<Check> {
    type Probe = fn(&mut SimRng) -> Result<f64>;
    let probes: [(&'static str, Probe, f64); 8] = [
        ("dft unitarity and fast path", dft_roundtrip, 1e-10),
        ("convolution theorem", convolution_theorem, 1e-10),
        ("cyclic prefix circularity", cp_circularity, 1e-10),
        ("zf noiseless reconstruction", zf_reconstruction, 1e-8),
        ("mlse equals exhaustive search", mlse_exhaustive, 1e-9),
        (
            "mmse roots avoid the unit circle (1/distance)",
            mmse_roots_off_circle,
            1e9,
        ),
        ("two-path root reciprocity", two_path_reciprocity, 1e-9),
        ("per-tone equals dense time-domain equalizer", dense_equivalence, 1e-8),
    ];
    let mut rng = seeded(0x5e1f);
    probes
        .into_iter()
        .map(|(name, f, tol)| match f(&mut rng) {
            Ok(v) => check(name, v, tol),
            Err(e) => Check {
                name,
                passed: false,
                detail: e.to_string(),
            },
        })
        .collect()
}
