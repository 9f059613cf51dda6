use std::str::FromStr;

use super::{WldaGrads, WldaModel};
use crate::corpus::BowDocument;
use crate::nn::{softmax_backward, softmax_unchecked};
use crate::simplex::{mmd_unbiased, mmd_unbiased_log_grad, SimplexVector};
use crate::{Error, Result};

/// Which latent vectors the MMD term compares against the prior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MmdOn {
    /// Encoder outputs `θ`.
    #[default]
    RawTheta,
    /// Noise-mixed decoder inputs `θ₊`.
    NoisedTheta,
}

impl MmdOn {
    pub fn name(self) -> &'static str {
        match self {
            MmdOn::RawTheta => "raw-theta",
            MmdOn::NoisedTheta => "noised-theta",
        }
    }
}

impl FromStr for MmdOn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw-theta" | "raw" => Ok(MmdOn::RawTheta),
            "noised-theta" | "noised" => Ok(MmdOn::NoisedTheta),
            other => Err(Error::invalid(format!("unknown mmd target `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveConfig {
    pub lambda: f64,
    pub noise_alpha: f64,
    pub mmd_on: MmdOn,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            noise_alpha: 0.0,
            mmd_on: MmdOn::RawTheta,
        }
    }
}

/// Prior samples consumed by one minibatch. Both are treated as constants.
#[derive(Debug, Clone, Copy)]
pub struct BatchDraws<'a> {
    /// Compared against the batch's latents by MMD; one per document.
    pub prior: &'a [SimplexVector],
    /// Mixed into `θ` before decoding; one per document, may be empty when
    /// the noise proportion is zero.
    pub noise: &'a [SimplexVector],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchLoss {
    /// `recon + λ·mmd`.
    pub total: f64,
    /// Mean scaled reconstruction loss over the batch.
    pub recon: f64,
    pub mmd: f64,
}

/// Cross-entropy of the document's counts under `ŵ`, divided by `s·ln V`.
/// A uniform `ŵ` scores exactly 1 for every document.
pub fn recon_loss(doc: &BowDocument, w_hat: &SimplexVector, vocab_size: usize) -> Result<f64> {
    if doc.is_empty() {
        return Err(Error::invalid("reconstruction loss of an empty document"));
    }
    if w_hat.dim() != vocab_size || vocab_size < 2 {
        return Err(Error::dim(format!(
            "word distribution of length {} for a vocabulary of {vocab_size}",
            w_hat.dim()
        )));
    }
    let mut ce = 0.0;
    for &(id, c) in doc.entries() {
        let p = *w_hat
            .as_slice()
            .get(id)
            .ok_or_else(|| Error::invalid(format!("word id {id} outside the vocabulary")))?;
        ce -= f64::from(c) * p.ln();
    }
    Ok(ce / (doc.total() as f64 * (vocab_size as f64).ln()))
}

/// `θ₊ = (1 − α)θ + α·θ_noise`.
pub fn mix_noise(theta: &SimplexVector, noise: &SimplexVector, alpha: f64) -> Result<SimplexVector> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("noise proportion {alpha} outside [0, 1]")));
    }
    if theta.dim() != noise.dim() {
        return Err(Error::dim(format!(
            "theta of dimension {} mixed with noise of dimension {}",
            theta.dim(),
            noise.dim()
        )));
    }
    Ok(SimplexVector::from_normalized(mix(theta.as_slice(), noise.as_slice(), alpha)))
}

fn mix(theta: &[f64], noise: &[f64], alpha: f64) -> Vec<f64> {
    if alpha == 0.0 {
        return theta.to_vec();
    }
    if alpha == 1.0 {
        return noise.to_vec();
    }
    theta
        .iter()
        .zip(noise)
        .map(|(t, n)| (1.0 - alpha) * t + alpha * n)
        .collect()
}

/// Loss and gradients for one minibatch.
///
/// `loss = mean_d recon(d, decode(θ₊_d)) + λ·MMD(latents, prior)`, where the
/// latents are `θ` or `θ₊` according to `config.mmd_on`. Gradients flow into
/// the encoder, `β` and `b`; prior and noise draws are constants.
pub fn batch_objective(
    model: &WldaModel,
    docs: &[&BowDocument],
    draws: BatchDraws<'_>,
    config: &ObjectiveConfig,
) -> Result<(BatchLoss, WldaGrads)> {
    let m = docs.len();
    if m < 2 {
        return Err(Error::invalid(format!("a minibatch needs at least 2 documents, got {m}")));
    }
    if draws.prior.len() != m {
        return Err(Error::dim(format!("{} prior draws for {m} documents", draws.prior.len())));
    }
    let alpha = config.noise_alpha;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("noise proportion {alpha} outside [0, 1]")));
    }
    if alpha > 0.0 && draws.noise.len() != m {
        return Err(Error::dim(format!("{} noise draws for {m} documents", draws.noise.len())));
    }
    if config.lambda < 0.0 {
        return Err(Error::invalid("lambda must be non-negative"));
    }
    let v = model.vocab_size();
    let k = model.num_topics();
    let log_v = (v as f64).ln();

    let mut grads = model.zero_grads();
    let mut caches = Vec::with_capacity(m);
    let mut thetas = Vec::with_capacity(m);
    let mut mixed = Vec::with_capacity(m);
    // dL/dθ_i accumulated from the reconstruction term.
    let mut grad_theta = vec![vec![0.0; k]; m];
    let mut recon_total = 0.0;

    for (i, doc) in docs.iter().enumerate() {
        if doc.is_empty() {
            return Err(Error::invalid("minibatch contains an empty document"));
        }
        let x = doc.dense(v)?;
        let (logits, cache) = model.encoder.forward(&x)?;
        let theta = softmax_unchecked(&logits);
        let theta_plus = if alpha > 0.0 {
            if draws.noise[i].dim() != k {
                return Err(Error::dim("noise draw has the wrong dimension"));
            }
            mix(&theta, draws.noise[i].as_slice(), alpha)
        } else {
            theta.clone()
        };

        let h = model.decoder_logits(&theta_plus);
        let max = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_z = max + h.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        let s = doc.total() as f64;
        let scale = 1.0 / (s * log_v * m as f64);

        let mut ce = 0.0;
        for &(id, c) in doc.entries() {
            ce -= f64::from(c) * (h[id] - log_z);
        }
        recon_total += ce / (s * log_v);

        // dL/dh = (s·ŵ − w) / (s ln V · m)
        let mut grad_h: Vec<f64> = h.iter().map(|x| s * (x - log_z).exp() * scale).collect();
        for &(id, c) in doc.entries() {
            grad_h[id] -= f64::from(c) * scale;
        }
        if !grad_h.iter().all(|g| g.is_finite()) {
            return Err(Error::Numeric("reconstruction gradient is not finite".into()));
        }
        grads.topic_matrix.add_outer(1.0, &grad_h, &theta_plus)?;
        for (gb, gh) in grads.offset.iter_mut().zip(&grad_h) {
            *gb += gh;
        }
        if alpha < 1.0 {
            let grad_plus = model.topic_matrix.matvec_transpose(&grad_h)?;
            for (gt, gp) in grad_theta[i].iter_mut().zip(&grad_plus) {
                *gt += (1.0 - alpha) * gp;
            }
        }

        caches.push(cache);
        thetas.push(SimplexVector::from_normalized(theta));
        mixed.push(theta_plus);
    }
    let recon = recon_total / m as f64;

    // Gradient with respect to the encoder logits, one vector per document.
    let mut grad_logits: Vec<Vec<f64>> = thetas
        .iter()
        .zip(&grad_theta)
        .map(|(t, g)| softmax_backward(t.as_slice(), g))
        .collect();

    let mmd = match config.mmd_on {
        MmdOn::RawTheta if config.lambda > 0.0 => {
            let out = mmd_unbiased_log_grad(&thetas, draws.prior)?;
            // The log-coordinate gradient u chains through softmax as u − θ·Σu.
            for ((gl, u), t) in grad_logits.iter_mut().zip(&out.grad).zip(&thetas) {
                let total: f64 = u.iter().sum();
                for ((g, &ui), &ti) in gl.iter_mut().zip(u).zip(t.iter()) {
                    *g += config.lambda * (ui - ti * total);
                }
            }
            out.value
        }
        MmdOn::NoisedTheta if config.lambda > 0.0 => {
            let plus: Vec<SimplexVector> = mixed.iter().cloned().map(SimplexVector::from_normalized).collect();
            let out = mmd_unbiased_log_grad(&plus, draws.prior)?;
            for (i, u) in out.grad.iter().enumerate() {
                // ∂/∂θ = (1 − α)·u/θ₊; coordinates with θ₊ = 0 contribute nothing.
                let g: Vec<f64> = u
                    .iter()
                    .zip(&mixed[i])
                    .map(|(&ui, &tp)| if tp > 0.0 { config.lambda * (1.0 - alpha) * ui / tp } else { 0.0 })
                    .collect();
                let back = softmax_backward(thetas[i].as_slice(), &g);
                for (gl, b) in grad_logits[i].iter_mut().zip(back) {
                    *gl += b;
                }
            }
            out.value
        }
        MmdOn::RawTheta => mmd_unbiased(&thetas, draws.prior)?,
        MmdOn::NoisedTheta => {
            let plus: Vec<SimplexVector> = mixed.into_iter().map(SimplexVector::from_normalized).collect();
            mmd_unbiased(&plus, draws.prior)?
        }
    };

    for (cache, gl) in caches.iter().zip(&grad_logits) {
        model.encoder.backward_accumulate(cache, gl, &mut grads.encoder)?;
    }

    Ok((
        BatchLoss {
            total: recon + config.lambda * mmd,
            recon,
            mmd,
        },
        grads,
    ))
}
