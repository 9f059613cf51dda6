//! Fully connected feed-forward network.
//!
//! Every layer but the last applies the hidden activation; the last layer is
//! affine and returns logits. Weights are stored `(out_dim, in_dim)`.

use rand::Rng;

use super::{Matrix, Parameters};
use crate::{Error, Result};

const LEAKY_SLOPE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Activation {
    #[default]
    Softplus,
    /// Leaky ReLU with negative slope 0.01.
    LeakyRelu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            // max(z, 0) + ln(1 + e^{-|z|}) never overflows.
            Activation::Softplus => z.max(0.0) + (-z.abs()).exp().ln_1p(),
            Activation::LeakyRelu => {
                if z > 0.0 {
                    z
                } else {
                    LEAKY_SLOPE * z
                }
            }
        }
    }

    #[inline]
    pub fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Softplus => {
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
            Activation::LeakyRelu => {
                if z > 0.0 {
                    1.0
                } else {
                    LEAKY_SLOPE
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Softplus => "softplus",
            Activation::LeakyRelu => "leaky-relu",
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "softplus" => Ok(Activation::Softplus),
            "leaky-relu" | "leaky_relu" => Ok(Activation::LeakyRelu),
            other => Err(Error::invalid(format!("unknown activation `{other}`"))),
        }
    }
}

/// One affine map `W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            weight: Matrix::zeros(out_dim, in_dim),
            bias: vec![0.0; out_dim],
        }
    }

    #[inline]
    pub fn in_dim(&self) -> usize {
        self.weight.cols()
    }

    #[inline]
    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    layers: Vec<DenseLayer>,
    activation: Activation,
}

/// Gradients of an [`MlpParams`], layer for layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<DenseLayer>,
}

/// Intermediate values recorded by [`MlpParams::forward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input fed to each layer.
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each hidden layer.
    pre_activations: Vec<Vec<f64>>,
}

impl MlpParams {
    /// Glorot-uniform weights, zero biases. `sizes` lists the input width,
    /// every hidden width, then the output width.
    pub fn new<R: Rng + ?Sized>(
        sizes: &[usize],
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let mut params = Self::zeros(sizes, activation)?;
        for layer in &mut params.layers {
            let limit = (6.0 / (layer.in_dim() + layer.out_dim()) as f64).sqrt();
            for w in layer.weight.as_mut_slice() {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(params)
    }

    pub fn zeros(sizes: &[usize], activation: Activation) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::invalid("an MLP needs at least input and output sizes"));
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("MLP layer sizes must be positive"));
        }
        let layers = sizes
            .windows(2)
            .map(|w| DenseLayer::zeros(w[0], w[1]))
            .collect();
        Ok(Self { layers, activation })
    }

    pub fn from_layers(layers: Vec<DenseLayer>, activation: Activation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::invalid("an MLP needs at least one layer"));
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.bias.len() != layer.out_dim() {
                return Err(Error::dim(format!(
                    "layer {i}: bias length {} for {} outputs",
                    layer.bias.len(),
                    layer.out_dim()
                )));
            }
            if let Some(next) = layers.get(i + 1) {
                if next.in_dim() != layer.out_dim() {
                    return Err(Error::dim(format!(
                        "layer {} expects {} inputs but layer {i} produces {}",
                        i + 1,
                        next.in_dim(),
                        layer.out_dim()
                    )));
                }
            }
        }
        Ok(Self { layers, activation })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Input width followed by each layer's output width.
    pub fn sizes(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(DenseLayer::out_dim))
            .collect()
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads {
            layers: self
                .layers
                .iter()
                .map(|l| DenseLayer::zeros(l.in_dim(), l.out_dim()))
                .collect(),
        }
    }

    /// Returns the output logits and the cache needed by [`Self::backward`].
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if x.len() != self.input_dim() {
            return Err(Error::dim(format!(
                "MLP input of length {} for input dimension {}",
                x.len(),
                self.input_dim()
            )));
        }
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre_activations = Vec::with_capacity(last);
        let mut current = x.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = vec![0.0; layer.out_dim()];
            layer.weight.matvec_into(&current, &mut z);
            for (zi, bi) in z.iter_mut().zip(&layer.bias) {
                *zi += bi;
            }
            inputs.push(current);
            if i == last {
                current = z;
            } else {
                current = z.iter().map(|&v| self.activation.apply(v)).collect();
                pre_activations.push(z);
            }
        }
        Ok((
            current,
            ForwardCache {
                inputs,
                pre_activations,
            },
        ))
    }

    /// Back-propagates `grad_logits`, returning fresh parameter gradients and
    /// the gradient with respect to the input.
    pub fn backward(&self, cache: &ForwardCache, grad_logits: &[f64]) -> Result<(MlpGrads, Vec<f64>)> {
        let mut grads = self.zero_grads();
        let grad_input = self.backward_accumulate(cache, grad_logits, &mut grads)?;
        Ok((grads, grad_input))
    }

    /// Like [`Self::backward`] but adds into existing gradients.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        grad_logits: &[f64],
        grads: &mut MlpGrads,
    ) -> Result<Vec<f64>> {
        let n = self.layers.len();
        if cache.inputs.len() != n || cache.pre_activations.len() + 1 != n {
            return Err(Error::dim("forward cache does not match this network"));
        }
        if grads.layers.len() != n {
            return Err(Error::dim("gradient buffer does not match this network"));
        }
        if grad_logits.len() != self.output_dim() {
            return Err(Error::dim(format!(
                "output gradient of length {} for {} outputs",
                grad_logits.len(),
                self.output_dim()
            )));
        }
        let mut delta = grad_logits.to_vec();
        for i in (0..n).rev() {
            let layer = &self.layers[i];
            let input = &cache.inputs[i];
            if input.len() != layer.in_dim() {
                return Err(Error::dim(format!("cached input {i} has the wrong width")));
            }
            let g = &mut grads.layers[i];
            g.weight.add_outer(1.0, &delta, input)?;
            for (gb, d) in g.bias.iter_mut().zip(&delta) {
                *gb += d;
            }
            let mut upstream = layer.weight.matvec_transpose(&delta)?;
            if i > 0 {
                for (u, &z) in upstream.iter_mut().zip(&cache.pre_activations[i - 1]) {
                    *u *= self.activation.derivative(z);
                }
            }
            delta = upstream;
        }
        Ok(delta)
    }
}

impl Parameters for MlpParams {
    fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.as_slice(), l.bias.as_slice()])
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weight.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }
}

impl Parameters for MlpGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.as_slice(), l.bias.as_slice()])
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weight.as_mut_slice(), l.bias.as_mut_slice()])
            .collect()
    }
}
