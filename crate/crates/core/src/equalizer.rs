//! Per-tone ZF/MMSE equalizers and the four receiver chains.
//!
//! All receivers share one pipeline: take the `N`-point DFT of `N` received
//! samples, multiply tone `n` by `g̃_n`, and (for single-carrier schemes)
//! return to the time domain with the IDFT. The prefixed receivers feed it the
//! samples after prefix removal. The prefix-free receiver feeds it arbitrary
//! windows of the received stream and keeps only the window interior
//! `[D, N−D)`; the edge interference it ignores decays like the inverse
//! filter `γ_m`.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::dft::{dft, idft, idft_matrices};
use crate::error::{Error, Result};
use crate::linalg::{solve_hermitian_system, CMatrix};
use crate::seq::{MatrixSequence, VectorSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EqualizerMode {
    Zf,
    Mmse,
}

impl EqualizerMode {
    pub fn name(self) -> &'static str {
        match self {
            EqualizerMode::Zf => "zf",
            EqualizerMode::Mmse => "mmse",
        }
    }

    /// Regularizer `K`: zero for ZF, `N_0` for MMSE.
    pub fn regularizer(self, n0: f64) -> f64 {
        match self {
            EqualizerMode::Zf => 0.0,
            EqualizerMode::Mmse => n0,
        }
    }
}

impl fmt::Display for EqualizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EqualizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zf" => Ok(EqualizerMode::Zf),
            "mmse" => Ok(EqualizerMode::Mmse),
            other => Err(Error::Config(format!("unknown equalizer mode {other:?}"))),
        }
    }
}

/// Per-tone taps `g̃_n` (`N_t × N_r`) for an `N`-point DFT.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizerBank {
    taps: MatrixSequence,
    mode: EqualizerMode,
    k: f64,
}

impl EqualizerBank {
    /// Design taps from the per-tone channel response `h̃_n`:
    ///
    /// - ZF: `g̃_n = N^{-1/2} (h̃_n† h̃_n)^{-1} h̃_n†`
    /// - MMSE: `g̃_n = √N (N h̃_n† h̃_n + N_0 I)^{-1} h̃_n†`
    ///
    /// Either way `√N g̃_n h̃_n` is the per-tone combined gain, equal to `I`
    /// for ZF.
    pub fn design(hfreq: &MatrixSequence, mode: EqualizerMode, n0: f64) -> Result<Self> {
        let n = hfreq.len();
        if n == 0 {
            return Err(Error::EmptySequence);
        }
        let k = mode.regularizer(n0);
        if mode == EqualizerMode::Mmse && !(k > 0.0 && k.is_finite()) {
            return Err(Error::OutOfRange(format!("MMSE needs a positive finite N0, got {n0}")));
        }
        let nf = n as f64;
        let mut taps = Vec::with_capacity(n);
        for (tone, h) in hfreq.iter().enumerate() {
            let hh = h.hermitian();
            let gram = &hh * h;
            let g = match mode {
                EqualizerMode::Zf => solve_hermitian_system(&gram, &hh)
                    .map_err(|_| Error::SingularTone { tone })?
                    .scale_real(1.0 / nf.sqrt()),
                EqualizerMode::Mmse => {
                    let a = gram.scale_real(nf).add_diagonal(Complex64::new(k, 0.0));
                    solve_hermitian_system(&a, &hh)?.scale_real(nf.sqrt())
                }
            };
            if !g.is_finite() {
                return Err(Error::SingularTone { tone });
            }
            taps.push(g);
        }
        Ok(Self {
            taps: MatrixSequence::new(taps)?,
            mode,
            k,
        })
    }

    pub fn taps(&self) -> &MatrixSequence {
        &self.taps
    }

    pub fn mode(&self) -> EqualizerMode {
        self.mode
    }

    pub fn regularizer(&self) -> f64 {
        self.k
    }

    /// DFT size.
    pub fn n(&self) -> usize {
        self.taps.len()
    }

    /// `(N_t, N_r)`.
    pub fn dims(&self) -> (usize, usize) {
        self.taps.shape()
    }

    /// Multiply each tone of `rtilde` by its tap.
    pub fn apply(&self, rtilde: &VectorSequence) -> Result<VectorSequence> {
        let (nt, nr) = self.dims();
        if rtilde.len() != self.n() || rtilde.dim() != nr {
            return Err(Error::DimensionMismatch(format!(
                "{} tones of dimension {} into a {}-tone bank expecting dimension {nr}",
                rtilde.len(),
                rtilde.dim(),
                self.n()
            )));
        }
        let mut out = VectorSequence::zeros(self.n(), nt);
        for (n, g) in self.taps.iter().enumerate() {
            out[n].copy_from_slice(&g.mul_vec(&rtilde[n]));
        }
        Ok(out)
    }
}

/// Free-function form of [`EqualizerBank::design`].
pub fn design_taps(hfreq: &MatrixSequence, mode: EqualizerMode, n0: f64) -> Result<EqualizerBank> {
    EqualizerBank::design(hfreq, mode, n0)
}

/// Received tones and their one-tap equalized estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct OfdmOutput {
    pub rtilde: VectorSequence,
    pub estimates: VectorSequence,
}

/// OFDM receiver: `r̃ = DFT{x}`, `ŷ_n = g̃_n r̃_n`.
pub fn ofdm_receive(x: &VectorSequence, bank: &EqualizerBank) -> Result<OfdmOutput> {
    let rtilde = dft(x)?;
    let estimates = bank.apply(&rtilde)?;
    Ok(OfdmOutput { rtilde, estimates })
}

/// SC-FDE receiver: `ŷ = IDFT{g̃_n · DFT{x}_n}`.
pub fn scfde_receive_cp(x: &VectorSequence, bank: &EqualizerBank) -> Result<VectorSequence> {
    idft(&bank.apply(&dft(x)?)?)
}

/// One equalized window of the prefix-free receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct CplessWindow {
    /// Equalized output over the whole window, edge interference included.
    pub full: VectorSequence,
    /// Window-relative range declared equalized, `[D, N−D)`.
    pub interior: Range<usize>,
}

impl CplessWindow {
    pub fn interior_symbols(&self) -> VectorSequence {
        self.full.slice(self.interior.clone())
    }
}

/// Prefix-free SC-FDE on one window of `N` consecutive received samples.
/// The interference `ξ_m` is left in place; only the interior is trusted.
pub fn scfde_receive_cpless(x_window: &VectorSequence, bank: &EqualizerBank, discard: usize) -> Result<CplessWindow> {
    let n = x_window.len();
    if 2 * discard >= n {
        return Err(Error::InfeasibleSchedule {
            stream: n,
            window: n,
            discard,
        });
    }
    let full = scfde_receive_cp(x_window, bank)?;
    Ok(CplessWindow {
        full,
        interior: discard..n - discard,
    })
}

/// Combined response `p_m = IDFT{g̃_n h̃_n}` and inverse filter
/// `γ_m = IDFT{g̃_n}/√N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedResponse {
    pub p: MatrixSequence,
    pub gamma: MatrixSequence,
}

pub fn combined_response(bank: &EqualizerBank, hfreq: &MatrixSequence) -> Result<CombinedResponse> {
    if hfreq.len() != bank.n() {
        return Err(Error::DimensionMismatch(format!(
            "{}-tone channel response for a {}-tone bank",
            hfreq.len(),
            bank.n()
        )));
    }
    let products = bank
        .taps()
        .iter()
        .zip(hfreq.iter())
        .map(|(g, h)| g.try_mul(h))
        .collect::<Result<Vec<_>>>()?;
    let p = idft_matrices(&MatrixSequence::new(products)?)?;
    let scale = 1.0 / (bank.n() as f64).sqrt();
    let gamma_raw = idft_matrices(bank.taps())?;
    let gamma = MatrixSequence::new(gamma_raw.iter().map(|g| g.scale_real(scale)).collect())?;
    Ok(CombinedResponse { p, gamma })
}

/// One window of a [`FrameSchedule`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledWindow {
    pub start: usize,
    /// Absolute stream indices taken from this window.
    pub kept: Range<usize>,
}

impl ScheduledWindow {
    /// `kept`, relative to the window start.
    pub fn kept_relative(&self) -> Range<usize> {
        self.kept.start - self.start..self.kept.end - self.start
    }
}

/// Overlapping-window plan for the prefix-free receiver.
///
/// Windows advance by `N − 2D`. Each keeps its interior `[D, N−D)` except the
/// first, which keeps from 0, and the last, which is aligned to the stream end
/// and keeps through it. Every stream index is kept by exactly one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameSchedule {
    stream_len: usize,
    window: usize,
    discard: usize,
    windows: Vec<ScheduledWindow>,
}

impl FrameSchedule {
    pub fn stream_len(&self) -> usize {
        self.stream_len
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn discard(&self) -> usize {
        self.discard
    }

    pub fn windows(&self) -> &[ScheduledWindow] {
        &self.windows
    }

    pub fn stride(&self) -> usize {
        self.window - 2 * self.discard
    }

    /// Kept symbols that were equalized within `D` of a stream boundary
    /// (the cold-start head and the unfollowed tail).
    pub fn is_flagged(&self, index: usize) -> bool {
        index < self.discard || index + self.discard >= self.stream_len
    }
}

pub fn build_schedule(stream_len: usize, window: usize, discard: usize) -> Result<FrameSchedule> {
    if window == 0 || 2 * discard >= window || window > stream_len {
        return Err(Error::InfeasibleSchedule {
            stream: stream_len,
            window,
            discard,
        });
    }
    let stride = window - 2 * discard;
    let mut starts = vec![0];
    while starts.last().unwrap() + window < stream_len {
        let next = starts.last().unwrap() + stride;
        if next + window >= stream_len {
            starts.push(stream_len - window);
            break;
        }
        starts.push(next);
    }
    let last = starts.len() - 1;
    let mut windows = Vec::with_capacity(starts.len());
    let mut cursor = 0;
    for (i, &start) in starts.iter().enumerate() {
        let end = if i == last {
            stream_len
        } else {
            start + window - discard
        };
        windows.push(ScheduledWindow {
            start,
            kept: cursor..end,
        });
        cursor = end;
    }
    Ok(FrameSchedule {
        stream_len,
        window,
        discard,
        windows,
    })
}

/// Equalized prefix-free stream, scattered from the scheduled windows.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedStream {
    pub symbols: VectorSequence,
    pub filled: Vec<bool>,
    pub flagged: Vec<bool>,
}

pub fn equalize_stream(rx: &VectorSequence, bank: &EqualizerBank, schedule: &FrameSchedule) -> Result<EqualizedStream> {
    if rx.len() != schedule.stream_len() || schedule.window() != bank.n() {
        return Err(Error::DimensionMismatch(format!(
            "stream of {} samples, schedule for {} with window {}, bank of {} tones",
            rx.len(),
            schedule.stream_len(),
            schedule.window(),
            bank.n()
        )));
    }
    let (nt, _) = bank.dims();
    let mut symbols = VectorSequence::zeros(rx.len(), nt);
    let mut filled = vec![false; rx.len()];
    for w in schedule.windows() {
        let out = scfde_receive_cpless(
            &rx.slice(w.start..w.start + schedule.window()),
            bank,
            schedule.discard(),
        )?;
        for (abs, rel) in w.kept.clone().zip(w.kept_relative()) {
            symbols[abs].copy_from_slice(&out.full[rel]);
            filled[abs] = true;
        }
    }
    let flagged = (0..rx.len()).map(|i| schedule.is_flagged(i)).collect();
    Ok(EqualizedStream {
        symbols,
        filled,
        flagged,
    })
}

/// Prefix-free OFDM: the tones of one time-domain frame reconstructed from
/// window interiors.
pub fn cpless_ofdm_receive(stream: &EqualizedStream, frame_start: usize, n: usize) -> Result<VectorSequence> {
    let end = frame_start + n;
    if n == 0 || end > stream.filled.len() || !stream.filled[frame_start..end].iter().all(|&f| f) {
        return Err(Error::IncompleteReconstruction {
            start: frame_start,
            end,
        });
    }
    dft(&stream.symbols.slice(frame_start..end))
}

/// Edge interference `ξ_m = Σ_{q=0}^{L−2} γ_{(m−q) mod N} Σ_{l=q+1}^{L−1} h_l (w_{N+q−l} − y_{N+q−l})`.
///
/// `spill` holds `w − y` at the `L−1` positions `N−L+1 … N−1`.
pub fn edge_interference(
    gamma: &MatrixSequence,
    ch: &ChannelRealization,
    spill: &VectorSequence,
    m: usize,
) -> Result<Vec<Complex64>> {
    let n = gamma.len();
    let l_taps = ch.len();
    check_spill(ch, spill)?;
    let (nt, _) = gamma.shape();
    let mut xi = vec![Complex64::new(0.0, 0.0); nt];
    for q in 0..l_taps.saturating_sub(1) {
        let (_, nr, _) = ch.dims();
        let mut kappa = vec![Complex64::new(0.0, 0.0); nr];
        for l in q + 1..l_taps {
            // Position N+q−l maps to spill index (N+q−l) − (N−L+1).
            let j = q + l_taps - 1 - l;
            for (k, v) in kappa.iter_mut().zip(ch.taps()[l].mul_vec(&spill[j])) {
                *k += v;
            }
        }
        let g = &gamma[(m + n - q % n) % n];
        for (x, v) in xi.iter_mut().zip(g.mul_vec(&kappa)) {
            *x += v;
        }
    }
    Ok(xi)
}

fn check_spill(ch: &ChannelRealization, spill: &VectorSequence) -> Result<()> {
    let (nt, _, l) = ch.dims();
    if spill.len() != l.saturating_sub(1) || (l > 1 && spill.dim() != nt) {
        return Err(Error::DimensionMismatch(format!(
            "spill-over needs {} vectors of dimension {nt}, got {} of dimension {}",
            l.saturating_sub(1),
            spill.len(),
            spill.dim()
        )));
    }
    Ok(())
}

/// Upper bound on `‖ξ_m‖∞` from the tap, inverse-filter and spill maxima.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceBound {
    /// `max_q ‖γ_{(m−q) mod N}‖∞`.
    pub beta1: f64,
    /// `max_l ‖h_l‖∞`.
    pub beta2: f64,
    /// `max ‖w − y‖∞` over the spill positions.
    pub beta3: f64,
    /// Number of `(q, l)` terms in the double sum, `L(L−1)/2`.
    pub term_count: usize,
    /// The closed-form count `(L−2)(L−1)/2` that is sometimes quoted for the
    /// same sum. It undercounts, so the bound built on it is not guaranteed.
    pub quoted_term_count: usize,
    /// `term_count · N_r N_t β1 β2 β3`.
    pub bound: f64,
    /// `quoted_term_count · N_r N_t β1 β2 β3`.
    pub quoted_bound: f64,
}

pub fn edge_interference_bound(
    gamma: &MatrixSequence,
    ch: &ChannelRealization,
    spill: &VectorSequence,
    m: usize,
) -> Result<InterferenceBound> {
    check_spill(ch, spill)?;
    let n = gamma.len();
    let (nt, nr, l) = ch.dims();
    let beta1 = (0..l.saturating_sub(1))
        .map(|q| gamma[(m + n - q % n) % n].max_abs())
        .fold(0.0, f64::max);
    let beta2 = ch.taps().iter().map(CMatrix::max_abs).fold(0.0, f64::max);
    let beta3 = spill.as_flat().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let term_count = l * l.saturating_sub(1) / 2;
    let quoted_term_count = l.saturating_sub(2) * l.saturating_sub(1) / 2;
    let unit = (nr * nt) as f64 * beta1 * beta2 * beta3;
    Ok(InterferenceBound {
        beta1,
        beta2,
        beta3,
        term_count,
        quoted_term_count,
        bound: term_count as f64 * unit,
        quoted_bound: quoted_term_count as f64 * unit,
    })
}
