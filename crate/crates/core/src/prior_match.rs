//! Trains an encoder so that its outputs, for Gaussian inputs, are
//! distributed like draws from a symmetric Dirichlet. The only loss is the
//! MMD between a minibatch of encoder outputs and fresh prior draws.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::nn::{softmax_unchecked, Activation, AdamConfig, AdamState, MlpParams};
use crate::simplex::{mmd_unbiased, mmd_unbiased_log_grad, sample_dirichlet_n, DirichletParams, SimplexVector};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PriorMatchConfig {
    /// Input width and output simplex dimension.
    pub dim: usize,
    pub alpha: f64,
    pub num_inputs: usize,
    /// Hidden widths; two layers of width `dim` when `None`.
    pub hidden: Option<Vec<usize>>,
    pub activation: Activation,
    pub batch_size: usize,
    pub lr: f64,
    pub beta1: f64,
}

impl Default for PriorMatchConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            alpha: 0.1,
            num_inputs: 100_000,
            hidden: None,
            activation: Activation::Softplus,
            batch_size: 200,
            lr: 0.002,
            beta1: 0.99,
        }
    }
}

impl PriorMatchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::invalid(format!("dim must be at least 2, got {}", self.dim)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.batch_size < 2 {
            return Err(Error::invalid("batch_size must be at least 2"));
        }
        if self.num_inputs < self.batch_size {
            return Err(Error::invalid("num_inputs must be at least batch_size"));
        }
        if self.hidden.as_ref().is_some_and(|h| h.contains(&0)) {
            return Err(Error::invalid("hidden widths must be positive"));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.dim];
        sizes.extend(self.hidden.clone().unwrap_or_else(|| vec![self.dim, self.dim]));
        sizes.push(self.dim);
        sizes
    }
}

/// Encoder outputs and prior draws of equal size, with their MMD.
#[derive(Debug, Clone)]
pub struct PriorMatchSnapshot {
    pub encoded: Vec<SimplexVector>,
    pub prior: Vec<SimplexVector>,
    pub mmd: f64,
}

pub struct PriorMatcher {
    config: PriorMatchConfig,
    prior: DirichletParams,
    inputs: Vec<Vec<f64>>,
    encoder: MlpParams,
    adam: AdamState,
    epochs: usize,
}

fn gaussian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

impl PriorMatcher {
    pub fn new<R: Rng + ?Sized>(config: PriorMatchConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let prior = DirichletParams::symmetric(config.dim, config.alpha)?;
        let encoder = MlpParams::new(&config.layer_sizes(), config.activation, rng)?;
        let inputs = (0..config.num_inputs).map(|_| gaussian(config.dim, rng)).collect();
        let adam = AdamState::new(
            AdamConfig {
                lr: config.lr,
                beta1: config.beta1,
                ..AdamConfig::default()
            },
            &encoder,
        );
        Ok(Self {
            config,
            prior,
            inputs,
            encoder,
            adam,
            epochs: 0,
        })
    }

    pub fn config(&self) -> &PriorMatchConfig {
        &self.config
    }

    pub fn encoder(&self) -> &MlpParams {
        &self.encoder
    }

    pub fn prior(&self) -> &DirichletParams {
        &self.prior
    }

    pub fn epochs(&self) -> usize {
        self.epochs
    }

    pub fn encode(&self, x: &[f64]) -> Result<SimplexVector> {
        let (logits, _) = self.encoder.forward(x)?;
        Ok(SimplexVector::from_normalized(softmax_unchecked(&logits)))
    }

    /// One pass over the inputs in shuffled minibatches; returns the mean
    /// minibatch MMD.
    pub fn run_epoch<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        use rand::seq::SliceRandom;

        let mut order: Vec<usize> = (0..self.inputs.len()).collect();
        order.shuffle(rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(self.config.batch_size) {
            if chunk.len() < 2 {
                continue;
            }
            let mut caches = Vec::with_capacity(chunk.len());
            let mut thetas = Vec::with_capacity(chunk.len());
            for &i in chunk {
                let (logits, cache) = self.encoder.forward(&self.inputs[i])?;
                caches.push(cache);
                thetas.push(SimplexVector::from_normalized(softmax_unchecked(&logits)));
            }
            let draws = sample_dirichlet_n(&self.prior, chunk.len(), rng);
            let out = mmd_unbiased_log_grad(&thetas, &draws)?;
            let mut grads = self.encoder.zero_grads();
            for ((cache, u), theta) in caches.iter().zip(&out.grad).zip(&thetas) {
                let sum: f64 = u.iter().sum();
                let grad_logits: Vec<f64> = u.iter().zip(theta.iter()).map(|(&ui, &ti)| ui - ti * sum).collect();
                self.encoder.backward_accumulate(cache, &grad_logits, &mut grads)?;
            }
            self.adam.step(&mut self.encoder, &grads)?;
            total += out.value;
            batches += 1;
        }
        self.epochs += 1;
        Ok(total / batches.max(1) as f64)
    }

    /// Encodes `n` fresh Gaussian inputs and draws `n` prior samples.
    pub fn snapshot<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PriorMatchSnapshot> {
        if n < 2 {
            return Err(Error::invalid("a snapshot needs at least 2 samples"));
        }
        let encoded = (0..n)
            .map(|_| self.encode(&gaussian(self.config.dim, rng)))
            .collect::<Result<Vec<_>>>()?;
        let prior = sample_dirichlet_n(&self.prior, n, rng);
        let mmd = mmd_unbiased(&encoded, &prior)?;
        Ok(PriorMatchSnapshot { encoded, prior, mmd })
    }
}
