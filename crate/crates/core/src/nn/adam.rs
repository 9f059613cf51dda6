use super::Parameters;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    /// High-momentum setting used for topic-model training.
    fn default() -> Self {
        Self {
            lr: 0.002,
            beta1: 0.99,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Moment accumulators for one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    config: AdamConfig,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new<P: Parameters + ?Sized>(config: AdamConfig, params: &P) -> Self {
        let shapes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
        Self {
            config,
            first: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            t: 0,
        }
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    /// Number of steps taken so far.
    pub fn t(&self) -> u64 {
        self.t
    }

    /// One bias-corrected Adam update of `params` along `grads`.
    pub fn step<P, G>(&mut self, params: &mut P, grads: &G) -> Result<()>
    where
        P: Parameters + ?Sized,
        G: Parameters + ?Sized,
    {
        let grads = grads.tensors();
        let mut params = params.tensors_mut();
        if grads.len() != self.first.len() || params.len() != self.first.len() {
            return Err(Error::dim(format!(
                "Adam tracks {} tensors, got {} parameter and {} gradient tensors",
                self.first.len(),
                params.len(),
                grads.len()
            )));
        }
        for (i, (p, g)) in params.iter().zip(&grads).enumerate() {
            if p.len() != self.first[i].len() || g.len() != self.first[i].len() {
                return Err(Error::dim(format!("Adam tensor {i} changed shape")));
            }
        }

        self.t += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let correction1 = 1.0 - beta1.powf(self.t as f64);
        let correction2 = 1.0 - beta2.powf(self.t as f64);
        for (i, (p, g)) in params.iter_mut().zip(&grads).enumerate() {
            let m = &mut self.first[i];
            let v = &mut self.second[i];
            for j in 0..p.len() {
                let gj = g[j];
                m[j] = beta1 * m[j] + (1.0 - beta1) * gj;
                v[j] = beta2 * v[j] + (1.0 - beta2) * gj * gj;
                let m_hat = m[j] / correction1;
                let v_hat = v[j] / correction2;
                p[j] -= lr * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }
}
