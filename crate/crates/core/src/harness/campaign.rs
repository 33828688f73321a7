//! Monte Carlo SER campaigns.
//!
//! Each realization draws one channel and a stream of
//! `frames_per_realization` DFT frames of QPSK data, then runs every
//! configured scheme on that same channel, data and (for the data-carrying
//! samples) the same noise. Schemes are therefore compared on common random
//! numbers.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{CampaignConfig, SimScheme};
use super::mlse::mlse_viterbi;
use super::records::SerRecord;
use crate::channel::{
    awgn, convolve_linear, draw_channel, freq_response, ChannelProfile, ChannelRealization, NoiseConfig,
};
use crate::equalizer::{
    build_schedule, cpless_ofdm_receive, equalize_stream, ofdm_receive, scfde_receive_cp, EqualizerBank,
};
use crate::error::{Error, Result};
use crate::linalg::{solve_hermitian_system, CMatrix};
use crate::rng::{stream, Role};
use crate::seq::VectorSequence;
use crate::txrx::{assemble_cp_frame, channel_uses, precode, qpsk_decide, random_qpsk};

/// Realizations evaluated between stopping-rule checks.
pub const BLOCK: usize = 8;

/// One `(scheme, D)` curve of a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub scheme: SimScheme,
    pub d: usize,
}

pub fn variants(cfg: &CampaignConfig) -> Vec<Variant> {
    let mut out = Vec::new();
    for &scheme in &cfg.schemes {
        if scheme.uses_discard() {
            out.extend(cfg.d_list.iter().map(|&d| Variant { scheme, d }));
        } else {
            out.push(Variant { scheme, d: 0 });
        }
    }
    out
}

/// A record with its spread across realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub record: SerRecord,
    pub realizations: usize,
    /// Standard error of the SER from the spread of per-realization SERs;
    /// NaN for a single realization.
    pub stderr: f64,
}

/// Channel uses and payload per realization for each transmitted scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignSummary {
    pub n: usize,
    pub cp: usize,
    pub frames_per_realization: usize,
    pub payload_symbols: usize,
    pub uses: Vec<(SimScheme, usize)>,
}

impl fmt::Display for CampaignSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "channel uses per realization ({} frames of N = {}, C = {}, {} payload symbols):",
            self.frames_per_realization, self.n, self.cp, self.payload_symbols
        )?;
        for (scheme, uses) in &self.uses {
            writeln!(
                f,
                "  {scheme:<11} {uses:>8}  efficiency {:.4}",
                self.payload_symbols as f64 / *uses as f64
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignOutput {
    pub points: Vec<PointEstimate>,
    pub summary: CampaignSummary,
}

impl CampaignOutput {
    pub fn records(&self) -> Vec<SerRecord> {
        self.points.iter().map(|p| p.record.clone()).collect()
    }

    pub fn find(&self, scheme: SimScheme, snr_db: f64, d: usize) -> Option<&PointEstimate> {
        self.points
            .iter()
            .find(|p| p.record.scheme == scheme && p.record.snr_db == snr_db && p.record.d == d)
    }
}

fn summary(cfg: &CampaignConfig, cp: usize) -> CampaignSummary {
    let f = cfg.frames_per_realization;
    let mut uses = Vec::new();
    for &s in &cfg.schemes {
        let u = if s.has_cp() {
            channel_uses(f, cfg.n, cp)
        } else {
            channel_uses(f, cfg.n, 0)
        };
        uses.push((s, u));
    }
    CampaignSummary {
        n: cfg.n,
        cp,
        frames_per_realization: f,
        payload_symbols: f * cfg.n * cfg.nt,
        uses,
    }
}

struct Setup<'a> {
    cfg: &'a CampaignConfig,
    profile: ChannelProfile,
    flat: ChannelProfile,
    cp: usize,
    variants: Vec<Variant>,
}

/// Per-variant `(errors, trials)` for one realization.
type Counts = Vec<(u64, u64)>;

fn count_errors(symbols: &VectorSequence, truth: &[u8], keep: impl Fn(usize) -> bool) -> (u64, u64) {
    let dim = symbols.dim();
    let mut errors = 0;
    let mut trials = 0;
    for (i, v) in symbols.as_flat().iter().enumerate() {
        if keep(i / dim) {
            trials += 1;
            errors += u64::from(qpsk_decide(*v) != truth[i]);
        }
    }
    (errors, trials)
}

impl Setup<'_> {
    fn realization(&self, snr_idx: usize, r: usize, active: &[bool]) -> Result<Counts> {
        let cfg = self.cfg;
        let (n, f, nt, nr) = (cfg.n, cfg.frames_per_realization, cfg.nt, cfg.nr);
        let m = n * f;
        let seed = cfg.seed;
        let idx = [snr_idx as u64, r as u64];
        let noise = NoiseConfig::from_snr_db(cfg.snr_db[snr_idx]);

        let ch = draw_channel(&self.profile, &mut stream(seed, Role::Channel, &[r as u64, 0]));
        let (data, truth) = random_qpsk(m, nt, &mut stream(seed, Role::Data, &[r as u64]));
        let data_noise = awgn(m, nr, noise, &mut stream(seed, Role::Noise, &[idx[0], idx[1], 0]));
        let cp_noise = awgn(
            f * self.cp,
            nr,
            noise,
            &mut stream(seed, Role::Noise, &[idx[0], idx[1], 1]),
        );

        let needs_bank = self
            .variants
            .iter()
            .zip(active)
            .any(|(v, &a)| a && v.scheme.link().is_some());
        let bank = if needs_bank {
            Some(EqualizerBank::design(&freq_response(&ch, n)?, cfg.equalizer, noise.n0)?)
        } else {
            None
        };

        let mut out = vec![(0, 0); self.variants.len()];
        let mut nocp_rx: [Option<VectorSequence>; 2] = [None, None];
        for (slot, (v, &on)) in out.iter_mut().zip(self.variants.iter().zip(active)) {
            if !on {
                continue;
            }
            *slot = match v.scheme {
                SimScheme::OfdmCp | SimScheme::ScfdeCp => self.cp_link(
                    v.scheme,
                    &ch,
                    &data,
                    &truth,
                    &data_noise,
                    &cp_noise,
                    bank.as_ref().unwrap(),
                )?,
                SimScheme::ScfdeNocp | SimScheme::OfdmNocp => {
                    let ofdm = v.scheme == SimScheme::OfdmNocp;
                    let rx = match &mut nocp_rx[usize::from(ofdm)] {
                        Some(rx) => rx,
                        empty => empty.insert(received_cpless(&ch, &data, &data_noise, ofdm, n)?),
                    };
                    let schedule = build_schedule(m, n, v.d)?;
                    let eq = equalize_stream(rx, bank.as_ref().unwrap(), &schedule)?;
                    if ofdm {
                        let mut acc = (0, 0);
                        for k in 0..f {
                            let start = k * n;
                            if eq.flagged[start..start + n].iter().any(|&x| x) {
                                continue;
                            }
                            let tones = cpless_ofdm_receive(&eq, start, n)?;
                            let e = count_errors(&tones, &truth[start * nt..(start + n) * nt], |_| true);
                            acc = (acc.0 + e.0, acc.1 + e.1);
                        }
                        acc
                    } else {
                        count_errors(&eq.symbols, &truth, |i| !eq.flagged[i])
                    }
                }
                SimScheme::Mlse => {
                    let rx = add(&convolve_linear(&ch, &data)?, &data_noise);
                    let detected = mlse_viterbi(&rx, &ch, noise.n0)?;
                    let errors = detected.iter().zip(&truth).filter(|(a, b)| a != b).count() as u64;
                    (errors, m as u64)
                }
                SimScheme::Flat => {
                    let flat = draw_channel(&self.flat, &mut stream(seed, Role::Channel, &[r as u64, 1]));
                    let rx = add(&convolve_linear(&flat, &data)?, &data_noise);
                    let est = flat_equalize(&flat, &rx, cfg.equalizer.regularizer(noise.n0))?;
                    count_errors(&est, &truth, |_| true)
                }
            };
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn cp_link(
        &self,
        scheme: SimScheme,
        ch: &ChannelRealization,
        data: &VectorSequence,
        truth: &[u8],
        data_noise: &VectorSequence,
        cp_noise: &VectorSequence,
        bank: &EqualizerBank,
    ) -> Result<(u64, u64)> {
        let link = scheme.link().expect("equalized scheme");
        let (n, c, f, nt) = (self.cfg.n, self.cp, self.cfg.frames_per_realization, self.cfg.nt);
        let frames = (0..f)
            .map(|k| assemble_cp_frame(&precode(link, &data.slice(k * n..(k + 1) * n))?, c))
            .collect::<Result<Vec<_>>>()?;
        let mut rx = convolve_linear(ch, &VectorSequence::concat(&frames)?)?;
        for k in 0..f {
            let base = k * (n + c);
            for j in 0..c {
                add_into(&mut rx[base + j], &cp_noise[k * c + j]);
            }
            for j in 0..n {
                add_into(&mut rx[base + c + j], &data_noise[k * n + j]);
            }
        }
        let mut acc = (0, 0);
        for k in 0..f {
            let start = k * (n + c) + c;
            let x = rx.slice(start..start + n);
            let est = if link.is_ofdm() {
                ofdm_receive(&x, bank)?.estimates
            } else {
                scfde_receive_cp(&x, bank)?
            };
            let e = count_errors(&est, &truth[k * n * nt..(k + 1) * n * nt], |_| true);
            acc = (acc.0 + e.0, acc.1 + e.1);
        }
        Ok(acc)
    }
}

fn add_into(dst: &mut [Complex64], src: &[Complex64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

fn add(a: &VectorSequence, b: &VectorSequence) -> VectorSequence {
    let mut out = a.clone();
    for (o, v) in out.as_flat_mut().iter_mut().zip(b.as_flat()) {
        *o += v;
    }
    out
}

fn received_cpless(
    ch: &ChannelRealization,
    data: &VectorSequence,
    noise: &VectorSequence,
    ofdm: bool,
    n: usize,
) -> Result<VectorSequence> {
    let tx = if ofdm {
        let frames = (0..data.len() / n)
            .map(|k| precode(crate::txrx::Scheme::OfdmNocp, &data.slice(k * n..(k + 1) * n)))
            .collect::<Result<Vec<_>>>()?;
        VectorSequence::concat(&frames)?
    } else {
        data.clone()
    };
    Ok(add(&convolve_linear(ch, &tx)?, noise))
}

/// Symbol-by-symbol linear detection on a memoryless channel; for SISO this
/// is matched filtering.
fn flat_equalize(ch: &ChannelRealization, rx: &VectorSequence, k: f64) -> Result<VectorSequence> {
    let h = &ch.taps()[0];
    let hh = h.hermitian();
    let g: CMatrix = solve_hermitian_system(&(&hh * h).add_diagonal(Complex64::new(k, 0.0)), &hh)?;
    let mut out = VectorSequence::zeros(rx.len(), h.cols());
    for i in 0..rx.len() {
        out[i].copy_from_slice(&g.mul_vec(&rx[i]));
    }
    Ok(out)
}

struct Tally {
    errors: u64,
    trials: u64,
    per_realization: Vec<f64>,
    active: bool,
}

fn stderr(samples: &[f64]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return f64::NAN;
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Run every `(SNR, scheme, D)` point of the campaign.
///
/// Realizations are evaluated in blocks of [`BLOCK`]; a curve stops after the
/// first block that brings it to `min_errors` errors. The output depends only
/// on the configuration, not on the thread count.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignOutput> {
    cfg.validate()?;
    let setup = Setup {
        cfg,
        profile: cfg.channel_profile()?,
        flat: ChannelProfile::flat(cfg.nt, cfg.nr)?,
        cp: cfg.prefix_len()?,
        variants: variants(cfg),
    };
    let per_snr = (0..cfg.snr_db.len())
        .into_par_iter()
        .map(|s| run_point(&setup, s))
        .collect::<Result<Vec<_>>>()?;
    Ok(CampaignOutput {
        points: per_snr.into_iter().flatten().collect(),
        summary: summary(cfg, setup.cp),
    })
}

fn run_point(setup: &Setup<'_>, snr_idx: usize) -> Result<Vec<PointEstimate>> {
    let cfg = setup.cfg;
    let mut tallies: Vec<Tally> = setup
        .variants
        .iter()
        .map(|_| Tally {
            errors: 0,
            trials: 0,
            per_realization: Vec::new(),
            active: true,
        })
        .collect();
    let mut start = 0;
    while start < cfg.frames && tallies.iter().any(|t| t.active) {
        let end = (start + BLOCK).min(cfg.frames);
        let active: Vec<bool> = tallies.iter().map(|t| t.active).collect();
        let block = (start..end)
            .into_par_iter()
            .map(|r| setup.realization(snr_idx, r, &active))
            .collect::<Result<Vec<_>>>()?;
        for counts in block {
            for (t, &(e, n)) in tallies.iter_mut().zip(&counts) {
                if t.active {
                    t.errors += e;
                    t.trials += n;
                    t.per_realization.push(e as f64 / n as f64);
                }
            }
        }
        for t in tallies.iter_mut() {
            if cfg.min_errors > 0 && t.errors >= cfg.min_errors {
                t.active = false;
            }
        }
        start = end;
    }
    setup
        .variants
        .iter()
        .zip(tallies)
        .map(|(v, t)| {
            let record = SerRecord::new(v.scheme, cfg.snr_db[snr_idx], v.d, t.trials, t.errors, cfg.seed)
                .map_err(|_| Error::Config(format!("no symbols counted for {} D={}", v.scheme, v.d)))?;
            Ok(PointEstimate {
                record,
                realizations: t.per_realization.len(),
                stderr: stderr(&t.per_realization),
            })
        })
        .collect()
}

/// The `L = 1` reference alone over the configured SNR grid.
pub fn flat_fading_reference(cfg: &CampaignConfig) -> Result<Vec<PointEstimate>> {
    let only_flat = CampaignConfig {
        schemes: vec![SimScheme::Flat],
        ..cfg.clone()
    };
    Ok(run_campaign(&only_flat)?.points)
}

/// Exact SER of Gray QPSK with coherent detection over Rayleigh fading
/// (`|h|² ~ Exp(1)`) at average SNR `snr = 1/N_0`.
///
/// With `μ = √(γ/(1+γ))`, `γ = snr/2` the per-axis SNR, the axis error
/// probability is `(1−μ)/2` and the probability both axes fail is
/// `1/4 − (μ/π)·atan(1/μ)`; the two axes share the fade and are not
/// independent.
pub fn qpsk_rayleigh_ser(snr: f64) -> f64 {
    if snr.is_infinite() {
        return 0.0;
    }
    let g = snr / 2.0;
    let mu = (g / (1.0 + g)).sqrt();
    let pb = 0.5 * (1.0 - mu);
    let both = 0.25 - mu / std::f64::consts::PI * (1.0 / mu).atan();
    2.0 * pb - both
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equalizer::EqualizerMode;
    use crate::harness::config::ProfileKind;

    fn small(schemes: Vec<SimScheme>) -> CampaignConfig {
        CampaignConfig {
            schemes,
            n: 32,
            d_list: vec![0, 4],
            snr_db: vec![5.0, 15.0],
            frames: 10,
            frames_per_realization: 4,
            min_errors: 0,
            seed: 11,
            ..CampaignConfig::default()
        }
    }

    #[test]
    fn rayleigh_closed_form_references() {
        // Quadrature of 2Q(√(g·snr)) − Q²(√(g·snr)) against e^{−g}.
        assert!((qpsk_rayleigh_ser(10.0) - 0.078_573_056_738_546).abs() < 1e-12);
        assert!((qpsk_rayleigh_ser(10f64.powf(1.5)) - 0.027_380_332_802_812).abs() < 1e-11);
        assert!(qpsk_rayleigh_ser(1e9) < 1e-8);
        assert_eq!(qpsk_rayleigh_ser(f64::INFINITY), 0.0);
    }

    #[test]
    fn all_schemes_run_and_are_ordered() {
        let cfg = small(SimScheme::ALL.to_vec());
        let out = run_campaign(&cfg).unwrap();
        assert_eq!(out.points.len(), 2 * (2 + 2 + 2 + 2));
        let order: Vec<(SimScheme, usize)> = out.points[..8].iter().map(|p| (p.record.scheme, p.record.d)).collect();
        assert_eq!(order[0], (SimScheme::OfdmCp, 0));
        assert_eq!(order[2], (SimScheme::ScfdeNocp, 0));
        assert_eq!(order[3], (SimScheme::ScfdeNocp, 4));
        for p in &out.points {
            assert!(p.record.ser >= 0.0 && p.record.ser <= 1.0);
            assert_eq!(p.realizations, 10);
        }
        let full = 10 * 4 * 32;
        assert_eq!(out.find(SimScheme::ScfdeCp, 5.0, 0).unwrap().record.trials, full);
        assert_eq!(
            out.find(SimScheme::ScfdeNocp, 5.0, 4).unwrap().record.trials,
            full - 10 * 8
        );
        assert_eq!(out.find(SimScheme::OfdmNocp, 5.0, 4).unwrap().record.trials, full / 2);
        assert_eq!(out.find(SimScheme::OfdmNocp, 5.0, 0).unwrap().record.trials, full);
    }

    #[test]
    fn summary_counts_channel_uses() {
        let cfg = small(vec![SimScheme::ScfdeCp, SimScheme::ScfdeNocp]);
        let s = run_campaign(&cfg).unwrap().summary;
        assert_eq!(
            s.uses,
            vec![(SimScheme::ScfdeCp, 4 * 33), (SimScheme::ScfdeNocp, 4 * 32)]
        );
        assert!(s.to_string().contains("efficiency 1.0000"));
    }

    #[test]
    fn schemes_share_random_numbers() {
        // OFDM and SC-FDE with a prefix and MMSE detect identical statistics
        // only on a flat channel, where both reduce to one-tap scaling.
        let cfg = CampaignConfig {
            profile: ProfileKind::Flat,
            ..small(vec![
                SimScheme::OfdmCp,
                SimScheme::ScfdeCp,
                SimScheme::ScfdeNocp,
                SimScheme::Flat,
            ])
        };
        let out = run_campaign(&cfg).unwrap();
        for snr in [5.0, 15.0] {
            let sc = out.find(SimScheme::ScfdeCp, snr, 0).unwrap().record.errors;
            assert_eq!(out.find(SimScheme::ScfdeNocp, snr, 0).unwrap().record.errors, sc);
            assert_eq!(out.find(SimScheme::Flat, snr, 0).unwrap().record.trials, 10 * 128);
        }
    }

    #[test]
    fn infinite_snr_zf_is_error_free() {
        let cfg = CampaignConfig {
            schemes: vec![SimScheme::ScfdeCp, SimScheme::OfdmCp, SimScheme::Mlse, SimScheme::Flat],
            equalizer: EqualizerMode::Zf,
            snr_db: vec![f64::INFINITY],
            n: 64,
            frames: 40,
            ..small(vec![])
        };
        let out = run_campaign(&cfg).unwrap();
        for p in &out.points {
            assert_eq!(p.record.errors, 0, "{:?}", p.record.scheme);
        }
        assert!(out.points[0].record.trials >= 10_000);
    }

    #[test]
    fn stopping_rule_is_block_granular() {
        let cfg = CampaignConfig {
            min_errors: 1,
            snr_db: vec![0.0],
            frames: 100,
            ..small(vec![SimScheme::ScfdeCp])
        };
        let out = run_campaign(&cfg).unwrap();
        assert_eq!(out.points[0].realizations, BLOCK);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = small(vec![SimScheme::ScfdeNocp, SimScheme::Mlse]);
        let a = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_campaign(&cfg).unwrap());
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_campaign(&cfg).unwrap());
        assert_eq!(a, b);
    }
}
