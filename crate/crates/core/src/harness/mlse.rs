//! Viterbi maximum-likelihood sequence detection of QPSK over a known SISO
//! channel.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::seq::VectorSequence;
use crate::txrx::qpsk_point;

/// A survivor: the last `L−1` symbol indices packed as base-4 digits (most
/// recent in the lowest digit) and its accumulated squared distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrellisState {
    pub memory: usize,
    pub metric: f64,
}

fn siso_taps(ch: &ChannelRealization) -> Result<Vec<Complex64>> {
    if !ch.is_siso() {
        return Err(Error::Unsupported(
            "sequence detection is implemented for SISO channels only".into(),
        ));
    }
    Ok(ch.taps().scalars())
}

/// `Σ_m |r_m − Σ_l h_l s_{m−l}|²` with `s_{m<0} = 0`.
pub fn sequence_metric(received: &VectorSequence, ch: &ChannelRealization, symbols: &[u8]) -> Result<f64> {
    let h = siso_taps(ch)?;
    if received.dim() != 1 || received.len() != symbols.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} symbols against {} received samples",
            symbols.len(),
            received.len()
        )));
    }
    let r = received.as_flat();
    Ok((0..r.len())
        .map(|m| {
            let expect: Complex64 = h
                .iter()
                .enumerate()
                .filter(|&(l, _)| l <= m)
                .map(|(l, &hl)| hl * qpsk_point(symbols[m - l]))
                .sum();
            (r[m] - expect).norm_sqr()
        })
        .sum())
}

/// Minimum-metric QPSK index sequence over the `4^{L−1}`-state trellis.
///
/// `n0` does not change the decision (the metric is plain squared distance)
/// and is only checked for validity.
pub fn mlse_viterbi(received: &VectorSequence, ch: &ChannelRealization, n0: f64) -> Result<Vec<u8>> {
    let h = siso_taps(ch)?;
    if n0.is_nan() || n0 < 0.0 {
        return Err(Error::OutOfRange(format!("N0 = {n0}")));
    }
    if received.dim() != 1 {
        return Err(Error::DimensionMismatch(
            "sequence detection expects a scalar stream".into(),
        ));
    }
    let mem = h.len() - 1;
    let states = 4usize.pow(mem as u32);
    let len = received.len();
    let r = received.as_flat();
    let points: Vec<Complex64> = (0..4).map(qpsk_point).collect();

    // Contribution of the remembered symbols for each state at each warm-up
    // depth; digits older than the stream start are ignored.
    let tail = |state: usize, m: usize| -> Complex64 {
        (1..=mem.min(m))
            .map(|l| h[l] * points[(state / 4usize.pow(l as u32 - 1)) % 4])
            .sum()
    };

    let mut survivors: Vec<TrellisState> = (0..states).map(|s| TrellisState { memory: s, metric: 0.0 }).collect();
    let mut back: Vec<u32> = vec![0; len * states];
    let mut next = vec![
        TrellisState {
            memory: 0,
            metric: f64::INFINITY
        };
        states
    ];
    let mut tails = vec![Complex64::new(0.0, 0.0); states];
    for m in 0..len {
        if m <= mem {
            for (s, t) in tails.iter_mut().enumerate() {
                *t = tail(s, m);
            }
        }
        for st in next.iter_mut() {
            st.metric = f64::INFINITY;
        }
        for (s, st) in survivors.iter().enumerate() {
            for (a, &pt) in points.iter().enumerate() {
                let metric = st.metric + (r[m] - h[0] * pt - tails[s]).norm_sqr();
                let ns = (s * 4 + a) % states;
                if metric < next[ns].metric {
                    next[ns] = TrellisState { memory: ns, metric };
                    back[m * states + ns] = (s * 4 + a) as u32;
                }
            }
        }
        std::mem::swap(&mut survivors, &mut next);
    }

    let mut best = (0..states)
        .min_by(|&a, &b| survivors[a].metric.total_cmp(&survivors[b].metric))
        .unwrap_or(0);
    let mut out = vec![0u8; len];
    for m in (0..len).rev() {
        let code = back[m * states + best] as usize;
        out[m] = (code % 4) as u8;
        best = code / 4;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{apply_channel, convolve_linear, draw_channel, ChannelProfile, NoiseConfig};
    use crate::rng::seeded;
    use crate::txrx::{qpsk_decide, random_qpsk};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn noiseless_recovery() {
        let mut rng = seeded(1);
        for taps in [1, 2, 3] {
            let ch = draw_channel(&ChannelProfile::uniform(1, 1, taps).unwrap(), &mut rng);
            let (u, idx) = random_qpsk(200, 1, &mut rng);
            let rx = convolve_linear(&ch, &u).unwrap();
            assert_eq!(mlse_viterbi(&rx, &ch, 0.0).unwrap(), idx);
        }
    }

    #[test]
    fn single_symbol_flat_is_slicing() {
        let ch = ChannelRealization::siso(&[c(0.3, -0.9)]).unwrap();
        let mut rng = seeded(2);
        for _ in 0..50 {
            let v = crate::rng::complex_gaussian(&mut rng, 1.0);
            let rx = VectorSequence::scalar(vec![v]);
            let got = mlse_viterbi(&rx, &ch, 0.1).unwrap();
            assert_eq!(got, vec![qpsk_decide(v / c(0.3, -0.9))]);
        }
    }

    #[test]
    fn matches_exhaustive_search_on_length_eight() {
        let mut rng = seeded(3);
        for trial in 0..4 {
            let taps = if trial < 2 { 2 } else { 3 };
            let ch = draw_channel(&ChannelProfile::uniform(1, 1, taps).unwrap(), &mut rng);
            let (u, _) = random_qpsk(8, 1, &mut rng);
            let rx = apply_channel(&ch, &u, NoiseConfig::new(0.5).unwrap(), &mut rng).unwrap();
            let got = mlse_viterbi(&rx, &ch, 0.5).unwrap();
            let got_metric = sequence_metric(&rx, &ch, &got).unwrap();
            let mut best = f64::INFINITY;
            let mut seq = [0u8; 8];
            for code in 0..4u32.pow(8) {
                for (k, s) in seq.iter_mut().enumerate() {
                    *s = ((code >> (2 * k)) & 3) as u8;
                }
                best = best.min(sequence_metric(&rx, &ch, &seq).unwrap());
            }
            assert!(
                (got_metric - best).abs() <= 1e-12 * best.max(1.0),
                "{got_metric} vs {best}"
            );
        }
    }

    #[test]
    fn rejects_mimo() {
        let ch = draw_channel(&ChannelProfile::uniform(2, 2, 2).unwrap(), &mut seeded(4));
        let rx = VectorSequence::zeros(4, 2);
        assert!(matches!(mlse_viterbi(&rx, &ch, 0.1), Err(Error::Unsupported(_))));
    }
}
