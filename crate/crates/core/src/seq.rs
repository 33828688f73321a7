//! Indexed sequences of complex vectors and matrices.

use std::ops::{Index, IndexMut, Range};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// A length-`N` sequence of `dim`-dimensional complex vectors, stored
/// contiguously (entry `m` occupies `data[m*dim..(m+1)*dim]`).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorSequence {
    dim: usize,
    data: Vec<Complex64>,
}

impl VectorSequence {
    pub fn zeros(len: usize, dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex64::new(0.0, 0.0); len * dim],
        }
    }

    pub fn from_flat(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !data.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch(format!(
                "{} samples do not split into vectors of dimension {dim}",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Scalar (dimension 1) sequence.
    pub fn scalar(values: Vec<Complex64>) -> Self {
        Self { dim: 1, data: values }
    }

    pub fn from_vectors(vectors: &[Vec<Complex64>]) -> Result<Self> {
        let dim = vectors.first().map(Vec::len).ok_or(Error::EmptySequence)?;
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("vectors of unequal dimension".into()));
        }
        Self::from_flat(dim, vectors.concat())
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_flat(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_flat_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_flat(self) -> Vec<Complex64> {
        self.data
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[Complex64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Copy of entries in `range`.
    pub fn slice(&self, range: Range<usize>) -> VectorSequence {
        Self {
            dim: self.dim,
            data: self.data[range.start * self.dim..range.end * self.dim].to_vec(),
        }
    }

    /// Concatenation of sequences sharing one dimension.
    pub fn concat(parts: &[VectorSequence]) -> Result<Self> {
        let dim = parts.first().map(|p| p.dim).ok_or(Error::EmptySequence)?;
        if parts.iter().any(|p| p.dim != dim) {
            return Err(Error::DimensionMismatch(
                "concatenating sequences of unequal dimension".into(),
            ));
        }
        Ok(Self {
            dim,
            data: parts.iter().flat_map(|p| p.data.iter().copied()).collect(),
        })
    }

    /// Total energy `Σ_m ‖x_m‖²`.
    pub fn energy(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// `max_m ‖x_m − y_m‖∞`.
    pub fn max_abs_diff(&self, other: &VectorSequence) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "comparing sequences of unequal size");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for VectorSequence {
    type Output = [Complex64];

    fn index(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.dim..(m + 1) * self.dim]
    }
}

impl IndexMut<usize> for VectorSequence {
    fn index_mut(&mut self, m: usize) -> &mut [Complex64] {
        &mut self.data[m * self.dim..(m + 1) * self.dim]
    }
}

/// A sequence of equally-shaped complex matrices (channel taps, per-tone
/// responses, equalizer taps).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSequence {
    rows: usize,
    cols: usize,
    entries: Vec<CMatrix>,
}

impl MatrixSequence {
    pub fn new(entries: Vec<CMatrix>) -> Result<Self> {
        let (rows, cols) = entries.first().map(CMatrix::shape).ok_or(Error::EmptySequence)?;
        if entries.iter().any(|e| e.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch(
                "matrix sequence entries of unequal shape".into(),
            ));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(len: usize, rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![CMatrix::zeros(rows, cols); len],
        }
    }

    /// Scalar (1×1) sequence.
    pub fn scalar(values: &[Complex64]) -> Self {
        Self {
            rows: 1,
            cols: 1,
            entries: values.iter().map(|&v| CMatrix::scalar(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[CMatrix] {
        &self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CMatrix> {
        self.entries.iter()
    }

    /// Zero-pad (or truncate) to `len` entries.
    pub fn padded(&self, len: usize) -> Self {
        let mut entries = self.entries.clone();
        entries.resize(len, CMatrix::zeros(self.rows, self.cols));
        entries.truncate(len);
        Self {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    /// Entries of a 1×1 sequence, as plain scalars.
    pub fn scalars(&self) -> Vec<Complex64> {
        self.entries.iter().map(|e| e[(0, 0)]).collect()
    }

    /// `max_n ‖a_n − b_n‖∞`.
    pub fn max_abs_diff(&self, other: &MatrixSequence) -> f64 {
        assert_eq!(self.len(), other.len(), "comparing sequences of unequal length");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).max_abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for MatrixSequence {
    type Output = CMatrix;

    fn index(&self, n: usize) -> &CMatrix {
        &self.entries[n]
    }
}
