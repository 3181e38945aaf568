//! Dense row-major tensors.
//!
//! Everything the engine computes with is an n-dimensional array of `f64`.
//! In practice only three ranks appear: scalars (stored as length-1 vectors),
//! vectors, and matrices. Differentiable operations over tensors live in
//! [`crate::tape`]; this module holds the value type and the plain
//! (non-recorded) math used by decoding, optimization, and tests.

use crate::error::{Error, Result};

/// A dense array with explicit shape, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expect: usize = shape.iter().product();
        if expect != data.len() {
            return Err(Error::Shape(format!(
                "shape {:?} holds {} values, got {}",
                shape,
                expect,
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn scalar(x: f64) -> Self {
        Self {
            shape: vec![1],
            data: vec![x],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Self {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
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

    /// Number of rows when viewed as a matrix (or vector count 1).
    pub fn rows(&self) -> usize {
        match self.shape.len() {
            2 => self.shape[0],
            _ => 1,
        }
    }

    /// Trailing dimension: columns of a matrix, length of a vector.
    pub fn cols(&self) -> usize {
        *self.shape.last().unwrap_or(&0)
    }

    /// The single value of a scalar (length-1) tensor.
    pub fn item(&self) -> f64 {
        debug_assert_eq!(self.data.len(), 1, "item() on non-scalar tensor");
        self.data[0]
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[row * self.shape[1] + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert_eq!(self.shape.len(), 2);
        self.data[row * self.shape[1] + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        debug_assert_eq!(self.shape.len(), 2);
        let w = self.shape[1];
        &self.data[row * w..(row + 1) * w]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Elementwise sum of two same-shaped tensors.
    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        same_shape(self, other, "add")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }
}

pub(crate) fn same_shape(a: &Tensor, b: &Tensor, op: &str) -> Result<()> {
    if a.shape != b.shape {
        return Err(Error::Shape(format!(
            "{op}: {:?} vs {:?}",
            a.shape, b.shape
        )));
    }
    Ok(())
}

/// `max(v) + ln Σ exp(v − max(v))`; overflow-free for finite inputs.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Validation("log_sum_exp of empty input".into()));
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    Ok(max + sum.ln())
}

/// `x · W` for a vector `x` (len a) and matrix `W` (a×b).
pub fn vec_mat(x: &[f64], w: &Tensor) -> Result<Vec<f64>> {
    if w.shape().len() != 2 || w.shape()[0] != x.len() {
        return Err(Error::Shape(format!(
            "vec_mat: vector of {} vs matrix {:?}",
            x.len(),
            w.shape()
        )));
    }
    let (a, b) = (w.shape()[0], w.shape()[1]);
    let mut out = vec![0.0; b];
    for i in 0..a {
        let xi = x[i];
        if xi == 0.0 {
            continue;
        }
        let row = &w.data()[i * b..(i + 1) * b];
        for (o, wij) in out.iter_mut().zip(row) {
            *o += xi * wij;
        }
    }
    Ok(out)
}
