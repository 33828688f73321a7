//! QPSK mapping and frame assembly for the four transmission schemes.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;

use crate::dft::idft;
use crate::error::{Error, Result};
use crate::seq::VectorSequence;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    OfdmCp,
    ScfdeCp,
    ScfdeNocp,
    OfdmNocp,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::OfdmCp, Scheme::ScfdeCp, Scheme::ScfdeNocp, Scheme::OfdmNocp];

    pub fn is_ofdm(self) -> bool {
        matches!(self, Scheme::OfdmCp | Scheme::OfdmNocp)
    }

    pub fn has_cp(self) -> bool {
        matches!(self, Scheme::OfdmCp | Scheme::ScfdeCp)
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::OfdmCp => "ofdm-cp",
            Scheme::ScfdeCp => "scfde-cp",
            Scheme::ScfdeNocp => "scfde-nocp",
            Scheme::OfdmNocp => "ofdm-nocp",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scheme {s:?}")))
    }
}

/// `N` information symbols, the scheme that carries them, and the CP length.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFrame {
    pub payload: VectorSequence,
    pub scheme: Scheme,
    pub cp: usize,
}

impl SymbolFrame {
    pub fn new(payload: VectorSequence, scheme: Scheme, cp: usize) -> Result<Self> {
        if !scheme.has_cp() && cp != 0 {
            return Err(Error::Config(format!(
                "{scheme} carries no cyclic prefix, got C = {cp}"
            )));
        }
        Ok(Self { payload, scheme, cp })
    }

    /// Time-domain samples put on the air for this frame: precoding for OFDM,
    /// then the prefix for CP schemes.
    pub fn transmit(&self) -> Result<VectorSequence> {
        let y = precode(self.scheme, &self.payload)?;
        if self.scheme.has_cp() {
            assemble_cp_frame(&y, self.cp)
        } else {
            Ok(y)
        }
    }
}

/// Bits, two per QPSK symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBlock {
    pub bits: Vec<u8>,
}

impl BitBlock {
    pub const BITS_PER_SYMBOL: usize = 2;

    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::OutOfRange("bits must be 0 or 1".into()));
        }
        Ok(Self { bits })
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self {
            bits: (0..len).map(|_| rng.random_range(0..2u8)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Gray-mapped QPSK point for a 2-bit index `b0·2 + b1`, unit energy.
pub fn qpsk_point(index: u8) -> Complex64 {
    let b0 = (index >> 1) & 1;
    let b1 = index & 1;
    Complex64::new(1.0 - 2.0 * b0 as f64, 1.0 - 2.0 * b1 as f64) * FRAC_1_SQRT_2
}

/// Nearest QPSK index by per-axis sign; exactly zero decides bit 0.
pub fn qpsk_decide(v: Complex64) -> u8 {
    (((v.re < 0.0) as u8) << 1) | (v.im < 0.0) as u8
}

/// Gray QPSK with one independent stream per transmit antenna; each element
/// carries energy `1/N_t` so that `‖u_m‖² = 1`.
pub fn modulate_qpsk(bits: &BitBlock, nt: usize) -> Result<VectorSequence> {
    if nt == 0 || !bits.len().is_multiple_of(2 * nt) {
        return Err(Error::InvalidLength(format!(
            "{} bits do not fill whole {nt}-antenna QPSK vectors",
            bits.len()
        )));
    }
    let scale = 1.0 / (nt as f64).sqrt();
    let data = bits
        .bits
        .chunks_exact(2)
        .map(|p| qpsk_point((p[0] << 1) | p[1]) * scale)
        .collect();
    VectorSequence::from_flat(nt, data)
}

/// Random QPSK vectors, returned with their symbol indices.
pub fn random_qpsk<R: Rng + ?Sized>(len: usize, nt: usize, rng: &mut R) -> (VectorSequence, Vec<u8>) {
    let scale = 1.0 / (nt as f64).sqrt();
    let idx: Vec<u8> = (0..len * nt).map(|_| rng.random_range(0..4u8)).collect();
    let data = idx.iter().map(|&i| qpsk_point(i) * scale).collect();
    (VectorSequence::from_flat(nt, data).expect("len*nt symbols"), idx)
}

/// Per-element sign slicing.
pub fn demodulate_qpsk(symbols: &VectorSequence) -> BitBlock {
    let bits = symbols
        .as_flat()
        .iter()
        .flat_map(|&v| {
            let i = qpsk_decide(v);
            [(i >> 1) & 1, i & 1]
        })
        .collect();
    BitBlock { bits }
}

/// OFDM transmit transform `y = IDFT{ỹ}`.
pub fn ofdm_precode(tones: &VectorSequence) -> Result<VectorSequence> {
    idft(tones)
}

/// Scheme dispatch: OFDM schemes precode once; SC-FDE passes symbols through.
pub fn precode(scheme: Scheme, payload: &VectorSequence) -> Result<VectorSequence> {
    if scheme.is_ofdm() {
        ofdm_precode(payload)
    } else {
        Ok(payload.clone())
    }
}

/// `[y_{N−C} … y_{N−1}, y_0 … y_{N−1}]`.
pub fn assemble_cp_frame(y: &VectorSequence, cp: usize) -> Result<VectorSequence> {
    let n = y.len();
    if cp > n {
        return Err(Error::InvalidLength(format!(
            "prefix length {cp} exceeds frame length {n}"
        )));
    }
    VectorSequence::concat(&[y.slice(n - cp..n), y.clone()])
}

/// Back-to-back frames with no prefix; each frame's tail is the next frame's
/// inter-block interference.
pub fn assemble_cpless_stream(frames: &[VectorSequence]) -> Result<VectorSequence> {
    let n = frames.first().map(VectorSequence::len).ok_or(Error::EmptySequence)?;
    if frames.iter().any(|f| f.len() != n) {
        return Err(Error::InvalidLength("frames of unequal length".into()));
    }
    VectorSequence::concat(frames)
}

/// Channel uses for `frames` frames of `n` symbols with prefix length `cp`.
pub fn channel_uses(frames: usize, n: usize, cp: usize) -> usize {
    frames * (n + cp)
}
