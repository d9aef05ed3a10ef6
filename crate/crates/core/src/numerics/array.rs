//! Dense row-major arrays of 64-bit reals.

use crate::error::NumericsError;
use serde::{Deserialize, Serialize};

/// A dense array with arbitrary shape, stored row-major as `f64`.
///
/// All model state (weights, activations, features) lives in these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Array {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Array {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self, NumericsError> {
        let expect: usize = shape.iter().product();
        if expect != data.len() {
            return Err(NumericsError::BadArrayLength {
                shape,
                len: data.len(),
            });
        }
        Ok(Array { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Array {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn scalar(v: f64) -> Self {
        Array {
            shape: vec![1],
            data: vec![v],
        }
    }

    pub fn vector(data: Vec<f64>) -> Self {
        Array {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericsError> {
        Array::new(vec![rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Scalar value of a single-element array.
    pub fn item(&self) -> f64 {
        debug_assert_eq!(self.data.len(), 1, "item() on non-scalar array");
        self.data[0]
    }

    /// Number of rows when viewed as a matrix ([n] counts as one row).
    pub fn rows(&self) -> usize {
        if self.shape.len() == 2 {
            self.shape[0]
        } else {
            1
        }
    }

    /// Size of the last dimension.
    pub fn last_dim(&self) -> usize {
        *self.shape.last().unwrap_or(&0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Euclidean norm of the flattened data.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}
