//! Dense arithmetic, a small MLP with analytic gradients, Adam, and a
//! finite-difference gradient oracle.
//!
//! Everything is `f64`. Gradient checks drive acceptance, and single
//! precision leaves too little headroom for them.

mod adam;
mod gradcheck;
mod matrix;
mod mlp;

pub use adam::{AdamConfig, AdamState};
pub use gradcheck::{finite_diff_grad, max_relative_error, relative_error};
pub use matrix::Matrix;
pub use mlp::{Activation, DenseLayer, ForwardCache, MlpGrads, MlpParams};

use crate::simplex::SimplexVector;
use crate::{Error, Result};

/// A set of trainable tensors, viewed as flat slices in a fixed order.
///
/// Optimizers and the finite-difference oracle only ever see this view, so a
/// gradient type and its parameter type must list tensors in the same order
/// with the same lengths.
pub trait Parameters {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

impl Parameters for Vec<f64> {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.as_slice()]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.as_mut_slice()]
    }
}

/// Numerically stable softmax (the max logit is subtracted first).
pub fn softmax(logits: &[f64]) -> Result<SimplexVector> {
    if logits.is_empty() {
        return Err(Error::dim("softmax of an empty vector"));
    }
    if let Some(bad) = logits.iter().find(|x| !x.is_finite()) {
        return Err(Error::Numeric(format!("softmax input contains {bad}")));
    }
    Ok(SimplexVector::from_normalized(softmax_unchecked(logits)))
}

/// Softmax without input validation, for hot loops whose inputs are known
/// to be finite.
pub(crate) fn softmax_unchecked(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let total: f64 = out.iter().sum();
    for v in &mut out {
        *v /= total;
    }
    out
}

/// Back-propagates `grad_probs` (dL/dp) through `p = softmax(z)`.
pub fn softmax_backward(probs: &[f64], grad_probs: &[f64]) -> Vec<f64> {
    let dot: f64 = probs.iter().zip(grad_probs).map(|(p, g)| p * g).sum();
    probs
        .iter()
        .zip(grad_probs)
        .map(|(p, g)| p * (g - dot))
        .collect()
}
