//! Unitary DFT/IDFT on vector and matrix sequences, and circular convolution.
//!
//! Both directions carry the `1/√N` normalization so the transform is unitary.
//! [`dft_reference`] is the direct `O(N²)` sum and serves as the correctness
//! anchor; the sequence-level transforms go through `rustfft` and are tested
//! against it.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::seq::{MatrixSequence, VectorSequence};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

/// `exp(sign · j2π k/N)` with `k` reduced mod `N` first.
fn twiddle(k: usize, n: usize, sign: f64) -> Complex64 {
    let angle = sign * 2.0 * PI * (k % n) as f64 / n as f64;
    Complex64::from_polar(1.0, angle)
}

fn direct(x: &[Complex64], dir: Direction) -> Vec<Complex64> {
    let n = x.len();
    let sign = match dir {
        Direction::Forward => -1.0,
        Direction::Inverse => 1.0,
    };
    let table: Vec<Complex64> = (0..n).map(|k| twiddle(k, n, sign)).collect();
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            let acc: Complex64 = x.iter().enumerate().map(|(m, &v)| v * table[(m * k) % n]).sum();
            acc * norm
        })
        .collect()
}

/// Direct `O(N²)` unitary DFT, `X_n = N^{-1/2} Σ_m x_m e^{−j2πmn/N}`.
pub fn dft_reference(x: &[Complex64]) -> Vec<Complex64> {
    direct(x, Direction::Forward)
}

/// Direct `O(N²)` unitary inverse DFT.
pub fn idft_reference(x: &[Complex64]) -> Vec<Complex64> {
    direct(x, Direction::Inverse)
}

fn fast_in_place(buf: &mut [Complex64], dir: Direction) {
    let n = buf.len();
    if n == 0 {
        return;
    }
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        match dir {
            Direction::Forward => p.plan_fft_forward(n),
            Direction::Inverse => p.plan_fft_inverse(n),
        }
    });
    fft.process(buf);
    let norm = 1.0 / (n as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= norm;
    }
}

/// Unitary DFT of a scalar sequence (fast path).
pub fn dft_scalar(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    fast_in_place(&mut buf, Direction::Forward);
    buf
}

/// Unitary inverse DFT of a scalar sequence (fast path).
pub fn idft_scalar(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    fast_in_place(&mut buf, Direction::Inverse);
    buf
}

/// Transform each of `width` interleaved components of `data` independently.
fn strided(data: &[Complex64], width: usize, dir: Direction) -> Vec<Complex64> {
    let n = data.len() / width;
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..width {
        for (m, slot) in buf.iter_mut().enumerate() {
            *slot = data[m * width + k];
        }
        fast_in_place(&mut buf, dir);
        for (m, &v) in buf.iter().enumerate() {
            out[m * width + k] = v;
        }
    }
    out
}

fn transform_vectors(seq: &VectorSequence, dir: Direction) -> Result<VectorSequence> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    VectorSequence::from_flat(seq.dim(), strided(seq.as_flat(), seq.dim(), dir))
}

fn transform_matrices(seq: &MatrixSequence, dir: Direction) -> Result<MatrixSequence> {
    if seq.is_empty() {
        return Err(Error::EmptySequence);
    }
    let (rows, cols) = seq.shape();
    let width = rows * cols;
    let flat: Vec<Complex64> = seq.iter().flat_map(|m| m.as_slice().iter().copied()).collect();
    let out = strided(&flat, width, dir);
    MatrixSequence::new(
        out.chunks_exact(width)
            .map(|c| CMatrix::from_rows(rows, cols, c.to_vec()))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Element-wise unitary DFT of a vector sequence.
pub fn dft(seq: &VectorSequence) -> Result<VectorSequence> {
    transform_vectors(seq, Direction::Forward)
}

/// Element-wise unitary inverse DFT of a vector sequence.
pub fn idft(seq: &VectorSequence) -> Result<VectorSequence> {
    transform_vectors(seq, Direction::Inverse)
}

/// Element-wise unitary DFT of a matrix sequence.
pub fn dft_matrices(seq: &MatrixSequence) -> Result<MatrixSequence> {
    transform_matrices(seq, Direction::Forward)
}

/// Element-wise unitary inverse DFT of a matrix sequence.
pub fn idft_matrices(seq: &MatrixSequence) -> Result<MatrixSequence> {
    transform_matrices(seq, Direction::Inverse)
}

/// Circular convolution `x_m = Σ_q h_q u_{(m−q) mod N}`, evaluated directly.
///
/// Satisfies `dft(x)_n = √N · dft(h)_n · dft(u)_n`.
pub fn circular_convolve(h: &MatrixSequence, u: &VectorSequence) -> Result<VectorSequence> {
    let n = u.len();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if h.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "channel length {} differs from sequence length {n}",
            h.len()
        )));
    }
    let (rows, cols) = h.shape();
    if cols != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{rows}x{cols} taps applied to vectors of dimension {}",
            u.dim()
        )));
    }
    let mut out = VectorSequence::zeros(n, rows);
    for (q, tap) in h.iter().enumerate() {
        if tap.max_abs() == 0.0 {
            continue;
        }
        for m in 0..n {
            let src = (m + n - q) % n;
            let y = tap.mul_vec(&u[src]);
            for (o, v) in out[m].iter_mut().zip(y) {
                *o += v;
            }
        }
    }
    Ok(out)
}
