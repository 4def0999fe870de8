//! Linear-in-parameters Gaussian RBF network `u_hat(x, w) = Pi(x) w`.
//!
//! `Pi(x)` is block diagonal: output channel `l` owns a contiguous block of
//! `basis_counts[l]` basis functions, and row `l` of `Pi` is zero outside that
//! block. Each basis function is `exp(-|x - c_i|^2 / width^2)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::Mat;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproximatorError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid RBF layout: {0}")]
    InvalidLayout(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLayout", into = "RawLayout")]
pub struct RbfLayout {
    input_dim: usize,
    basis_counts: Vec<usize>,
    centers: Vec<Vec<f64>>,
    width: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLayout {
    input_dim: usize,
    basis_counts: Vec<usize>,
    centers: Vec<Vec<f64>>,
    width: f64,
}

impl TryFrom<RawLayout> for RbfLayout {
    type Error = ApproximatorError;

    fn try_from(r: RawLayout) -> Result<Self, Self::Error> {
        RbfLayout::new(r.input_dim, r.basis_counts, r.centers, r.width)
    }
}

impl From<RbfLayout> for RawLayout {
    fn from(l: RbfLayout) -> Self {
        RawLayout {
            input_dim: l.input_dim,
            basis_counts: l.basis_counts,
            centers: l.centers,
            width: l.width,
        }
    }
}

impl RbfLayout {
    pub fn new(
        input_dim: usize,
        basis_counts: Vec<usize>,
        centers: Vec<Vec<f64>>,
        width: f64,
    ) -> Result<Self, ApproximatorError> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(ApproximatorError::InvalidLayout(format!("width {width} must be positive")));
        }
        if basis_counts.is_empty() {
            return Err(ApproximatorError::InvalidLayout("no output channels".into()));
        }
        let total: usize = basis_counts.iter().sum();
        if total != centers.len() {
            return Err(ApproximatorError::InvalidLayout(format!(
                "basis counts sum to {total} but {} centers given",
                centers.len()
            )));
        }
        if let Some(c) = centers
            .iter()
            .find(|c| c.len() != input_dim || c.iter().any(|v| !v.is_finite()))
        {
            return Err(ApproximatorError::InvalidLayout(format!(
                "center {c:?} is not a finite {input_dim}-vector"
            )));
        }
        Ok(RbfLayout {
            input_dim,
            basis_counts,
            centers,
            width,
        })
    }

    /// Single output channel with `count` centers on the diagonal
    /// `(v, v, ..., v)`, `v` uniformly spaced on `[lo, hi]`.
    pub fn diagonal(input_dim: usize, count: usize, lo: f64, hi: f64, width: f64) -> Result<Self, ApproximatorError> {
        let centers = (0..count)
            .map(|i| {
                let v = if count == 1 {
                    0.5 * (lo + hi)
                } else {
                    lo + (hi - lo) * i as f64 / (count - 1) as f64
                };
                vec![v; input_dim]
            })
            .collect();
        RbfLayout::new(input_dim, vec![count], centers, width)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.basis_counts.len()
    }

    /// Total weight length `sum_l n_u^l`.
    pub fn weight_len(&self) -> usize {
        self.centers.len()
    }

    pub fn basis_counts(&self) -> &[usize] {
        &self.basis_counts
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    fn check_input(&self, x: &[f64]) -> Result<(), ApproximatorError> {
        if x.len() != self.input_dim {
            return Err(ApproximatorError::DimensionMismatch(format!(
                "input of length {} for a {}-dimensional layout",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// All basis activations stacked, without the block structure.
    pub fn activations(&self, x: &[f64]) -> Result<Vec<f64>, ApproximatorError> {
        self.check_input(x)?;
        let inv_w2 = 1.0 / (self.width * self.width);
        Ok(self
            .centers
            .iter()
            .map(|c| {
                let d2: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 * inv_w2).exp()
            })
            .collect())
    }

    /// The `m x n_bar` block-diagonal basis matrix `Pi(x)`.
    pub fn basis_matrix(&self, x: &[f64]) -> Result<Mat, ApproximatorError> {
        let act = self.activations(x)?;
        let mut pi = Mat::zeros(self.output_dim(), self.weight_len());
        let mut offset = 0;
        for (l, &count) in self.basis_counts.iter().enumerate() {
            for j in offset..offset + count {
                pi[(l, j)] = act[j];
            }
            offset += count;
        }
        Ok(pi)
    }

    /// `Pi(x) w`.
    pub fn evaluate(&self, weights: &[f64], x: &[f64]) -> Result<Vec<f64>, ApproximatorError> {
        if weights.len() != self.weight_len() {
            return Err(ApproximatorError::DimensionMismatch(format!(
                "{} weights for a layout with {} basis functions",
                weights.len(),
                self.weight_len()
            )));
        }
        let act = self.activations(x)?;
        let mut out = Vec::with_capacity(self.output_dim());
        let mut offset = 0;
        for &count in &self.basis_counts {
            let block = offset..offset + count;
            out.push(act[block.clone()].iter().zip(&weights[block]).map(|(a, w)| a * w).sum());
            offset += count;
        }
        Ok(out)
    }
}
