//! Minimal dense real-valued numeric kernel.
//!
//! Everything the detector networks need and nothing more: row-major f64
//! tensors, MLP and GRU primitives, a softmax, a reverse-mode tape for
//! gradients, and Adam. All arithmetic is in 64-bit floats.

mod adam;
mod nn;
mod tape;

pub use adam::{adam_step, AdamState};
pub use nn::{
    gru_step, init_gru, init_mlp, mlp_forward, softmax, softmax_in_place, GruParams, MlpParams,
};
pub use tape::{Tape, Var};

use crate::error::{Error, Result};

/// Dense row-major tensor of 64-bit floats.
///
/// Rank 1 and rank 2 are the only shapes the library produces. A `[r, c]`
/// tensor stores row `i` at `data[i*c .. (i+1)*c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::Config(format!(
                "tensor shape {:?} wants {} entries, got {}",
                shape,
                n,
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn filled(shape: &[usize], value: f64) -> Self {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    /// Rank-1 tensor from a slice.
    pub fn vector(data: &[f64]) -> Self {
        Tensor {
            shape: vec![data.len()],
            data: data.to_vec(),
        }
    }

    /// Column matrix `[n, 1]` from a slice.
    pub fn column(data: &[f64]) -> Self {
        Tensor {
            shape: vec![data.len(), 1],
            data: data.to_vec(),
        }
    }

    /// Row-major `[rows, cols]` matrix from a slice.
    pub fn matrix(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Tensor::new(vec![rows, cols], data.to_vec())
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Number of rows when interpreted as a matrix (rank-1 counts as one row).
    pub fn rows(&self) -> usize {
        match self.shape.len() {
            0 | 1 => 1,
            _ => self.shape[0],
        }
    }

    /// Number of columns when interpreted as a matrix.
    pub fn cols(&self) -> usize {
        match self.shape.len() {
            0 => 0,
            1 => self.shape[0],
            _ => self.shape[1],
        }
    }

    pub fn get2(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols() + c]
    }

    pub fn set2(&mut self, r: usize, c: usize, v: f64) {
        let cols = self.cols();
        self.data[r * cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise square, returning a new tensor.
    pub fn squared(&self) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * v).collect(),
        }
    }

    /// Transposed copy of a rank-2 tensor.
    pub fn transposed(&self) -> Tensor {
        let (r, c) = (self.rows(), self.cols());
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = self.data[i * c + j];
            }
        }
        Tensor {
            shape: vec![c, r],
            data: out,
        }
    }
}

/// Dot product with four-lane accumulation. The lane split keeps the
/// operation order fixed (deterministic across runs and thread counts) while
/// letting the compiler vectorize.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let k = i * 4;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in chunks * 4..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `out += s * src`, the axpy kernel used by the backward passes.
#[inline]
pub(crate) fn axpy(out: &mut [f64], s: f64, src: &[f64]) {
    debug_assert_eq!(out.len(), src.len());
    for (o, x) in out.iter_mut().zip(src) {
        *o += s * x;
    }
}
