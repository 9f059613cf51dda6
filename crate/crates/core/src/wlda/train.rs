use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use super::{batch_objective, BatchDraws, MmdOn, ObjectiveConfig, WldaModel};
use crate::corpus::{BowDocument, Corpus};
use crate::nn::{Activation, AdamConfig, AdamState};
use crate::simplex::{sample_dirichlet_n, DirichletParams};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub num_topics: usize,
    /// Encoder hidden widths.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    /// Symmetric Dirichlet prior concentration.
    pub dirichlet_alpha: f64,
    /// Noise proportion mixed into `θ` before decoding.
    pub noise_alpha: f64,
    pub lambda: f64,
    pub lr: f64,
    pub beta1: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub mmd_on: MmdOn,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            num_topics: 50,
            hidden: vec![100, 100],
            activation: Activation::Softplus,
            dirichlet_alpha: 0.1,
            noise_alpha: 0.0,
            lambda: 1.0,
            lr: 0.002,
            beta1: 0.99,
            epochs: 50,
            batch_size: 200,
            mmd_on: MmdOn::RawTheta,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_topics < 2 {
            return Err(Error::invalid("num_topics must be at least 2"));
        }
        if self.batch_size < 2 {
            return Err(Error::invalid("batch_size must be at least 2 for the MMD estimator"));
        }
        if !(0.0..=1.0).contains(&self.noise_alpha) {
            return Err(Error::invalid(format!("noise_alpha {} outside [0, 1]", self.noise_alpha)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda must be a non-negative number"));
        }
        if !(self.dirichlet_alpha > 0.0 && self.dirichlet_alpha.is_finite()) {
            return Err(Error::invalid("dirichlet_alpha must be positive"));
        }
        if !(self.lr >= 0.0 && (0.0..1.0).contains(&self.beta1)) {
            return Err(Error::invalid("need lr >= 0 and beta1 in [0, 1)"));
        }
        if self.hidden.contains(&0) {
            return Err(Error::invalid("hidden widths must be positive"));
        }
        Ok(())
    }

    pub fn objective(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            lambda: self.lambda,
            noise_alpha: self.noise_alpha,
            mmd_on: self.mmd_on,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean over the epoch's minibatches.
    pub recon: f64,
    pub mmd: f64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
}

impl TrainReport {
    pub fn completed_epochs(&self) -> usize {
        self.epochs.len()
    }
}

/// Minibatch Adam on [`batch_objective`], one epoch at a time.
///
/// Each epoch reshuffles the documents; every minibatch draws fresh prior
/// samples for the MMD term (and for the noise, when enabled). Empty
/// documents are skipped, and a trailing batch with fewer than two
/// documents is dropped.
pub struct Trainer<'a> {
    docs: Vec<&'a BowDocument>,
    config: TrainConfig,
    prior: DirichletParams,
    model: WldaModel,
    adam: AdamState,
    report: TrainReport,
}

impl<'a> Trainer<'a> {
    pub fn new<R: Rng + ?Sized>(corpus: &'a Corpus, config: TrainConfig, rng: &mut R) -> Result<Self> {
        config.validate()?;
        let docs: Vec<&BowDocument> = corpus.docs().iter().filter(|d| !d.is_empty()).collect();
        if docs.is_empty() {
            return Err(Error::invalid("cannot train on a corpus without non-empty documents"));
        }
        let model = WldaModel::new(
            corpus.vocab_size(),
            config.num_topics,
            &config.hidden,
            config.activation,
            rng,
        )?;
        let adam = AdamState::new(
            AdamConfig {
                lr: config.lr,
                beta1: config.beta1,
                ..AdamConfig::default()
            },
            &model,
        );
        let prior = DirichletParams::symmetric(config.num_topics, config.dirichlet_alpha)?;
        Ok(Self {
            docs,
            config,
            prior,
            model,
            adam,
            report: TrainReport::default(),
        })
    }

    pub fn model(&self) -> &WldaModel {
        &self.model
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn report(&self) -> &TrainReport {
        &self.report
    }

    pub fn prior(&self) -> &DirichletParams {
        &self.prior
    }

    pub fn run_epoch<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<&EpochRecord> {
        let start = Instant::now();
        let objective = self.config.objective();
        let mut order: Vec<usize> = (0..self.docs.len()).collect();
        order.shuffle(rng);

        let mut recon = 0.0;
        let mut mmd = 0.0;
        let mut batches = 0usize;
        let mut batch = Vec::with_capacity(self.config.batch_size);
        for chunk in order.chunks(self.config.batch_size) {
            if chunk.len() < 2 {
                continue;
            }
            batch.clear();
            batch.extend(chunk.iter().map(|&i| self.docs[i]));
            let prior = sample_dirichlet_n(&self.prior, chunk.len(), rng);
            let noise = if objective.noise_alpha > 0.0 {
                sample_dirichlet_n(&self.prior, chunk.len(), rng)
            } else {
                Vec::new()
            };
            let draws = BatchDraws {
                prior: &prior,
                noise: &noise,
            };
            let (loss, grads) = batch_objective(&self.model, &batch, draws, &objective)?;
            self.adam.step(&mut self.model, &grads)?;
            recon += loss.recon;
            mmd += loss.mmd;
            batches += 1;
        }
        let n = batches.max(1) as f64;
        self.report.epochs.push(EpochRecord {
            epoch: self.report.epochs.len() + 1,
            recon: recon / n,
            mmd: mmd / n,
            wall_time: start.elapsed(),
        });
        Ok(self.report.epochs.last().expect("just pushed"))
    }

    pub fn into_parts(self) -> (WldaModel, TrainReport) {
        (self.model, self.report)
    }
}

/// Trains for `config.epochs` epochs. Deterministic given the RNG state.
pub fn train<R: Rng + ?Sized>(corpus: &Corpus, config: TrainConfig, rng: &mut R) -> Result<(WldaModel, TrainReport)> {
    let epochs = config.epochs;
    let mut trainer = Trainer::new(corpus, config, rng)?;
    for _ in 0..epochs {
        trainer.run_epoch(rng)?;
    }
    Ok(trainer.into_parts())
}
