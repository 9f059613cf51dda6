//! Collapsed Gibbs sampling for LDA.
//!
//! Topic proportions and topic-word distributions are integrated out; each
//! sweep resamples every token's topic from
//!
//! `p(z = k | rest) ∝ (n_dk + α)(n_kw + η) / (n_k + Vη)`
//!
//! with the token's own assignment removed from the counts.

use rand::Rng;

use crate::corpus::{sample_categorical, top_indices, Corpus};
use crate::metrics::TopicSet;
use crate::simplex::SimplexVector;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsConfig {
    pub num_topics: usize,
    pub alpha: f64,
    pub eta: f64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            num_topics: 5,
            alpha: 0.1,
            eta: 0.01,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GibbsState<R> {
    config: GibbsConfig,
    vocab_size: usize,
    docs: Vec<Vec<usize>>,
    z: Vec<Vec<usize>>,
    n_dk: Vec<Vec<u32>>,
    /// Row-major `K × V`.
    n_kw: Vec<u32>,
    n_k: Vec<u64>,
    sweeps: usize,
    rng: R,
}

impl<R: Rng> GibbsState<R> {
    /// Assigns every token a uniformly random topic.
    pub fn init_random(corpus: &Corpus, config: GibbsConfig, mut rng: R) -> Result<Self> {
        validate(corpus, &config)?;
        let docs: Vec<Vec<usize>> = corpus.docs().iter().map(|d| d.tokens()).collect();
        let z = docs
            .iter()
            .map(|d| d.iter().map(|_| rng.random_range(0..config.num_topics)).collect())
            .collect();
        Self::build(corpus.vocab_size(), docs, z, config, rng)
    }

    /// Starts from explicit assignments, one per token of
    /// [`crate::corpus::BowDocument::tokens`].
    pub fn from_assignments(
        corpus: &Corpus,
        config: GibbsConfig,
        z: Vec<Vec<usize>>,
        rng: R,
    ) -> Result<Self> {
        validate(corpus, &config)?;
        let docs: Vec<Vec<usize>> = corpus.docs().iter().map(|d| d.tokens()).collect();
        if z.len() != docs.len() || z.iter().zip(&docs).any(|(a, b)| a.len() != b.len()) {
            return Err(Error::dim("assignments do not match the corpus tokens"));
        }
        if z.iter().flatten().any(|&k| k >= config.num_topics) {
            return Err(Error::invalid("assignment outside the topic range"));
        }
        Self::build(corpus.vocab_size(), docs, z, config, rng)
    }

    fn build(
        vocab_size: usize,
        docs: Vec<Vec<usize>>,
        z: Vec<Vec<usize>>,
        config: GibbsConfig,
        rng: R,
    ) -> Result<Self> {
        let k = config.num_topics;
        let mut n_dk = vec![vec![0u32; k]; docs.len()];
        let mut n_kw = vec![0u32; k * vocab_size];
        let mut n_k = vec![0u64; k];
        for (d, (tokens, topics)) in docs.iter().zip(&z).enumerate() {
            for (&w, &t) in tokens.iter().zip(topics) {
                n_dk[d][t] += 1;
                n_kw[t * vocab_size + w] += 1;
                n_k[t] += 1;
            }
        }
        Ok(Self {
            config,
            vocab_size,
            docs,
            z,
            n_dk,
            n_kw,
            n_k,
            sweeps: 0,
            rng,
        })
    }

    pub fn config(&self) -> &GibbsConfig {
        &self.config
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }

    pub fn doc_topic_counts(&self) -> &[Vec<u32>] {
        &self.n_dk
    }

    pub fn topic_word_count(&self, k: usize, w: usize) -> u32 {
        self.n_kw[k * self.vocab_size + w]
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.n_k
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// Unnormalized conditional over topics for the token at `(d, pos)`,
    /// computed with that token's current assignment excluded.
    pub fn conditional(&self, d: usize, pos: usize) -> Result<Vec<f64>> {
        let w = *self
            .docs
            .get(d)
            .and_then(|doc| doc.get(pos))
            .ok_or_else(|| Error::invalid(format!("no token at document {d}, position {pos}")))?;
        let current = self.z[d][pos];
        let (alpha, eta) = (self.config.alpha, self.config.eta);
        let v_eta = self.vocab_size as f64 * eta;
        Ok((0..self.config.num_topics)
            .map(|k| {
                let own = u32::from(k == current);
                let ndk = f64::from(self.n_dk[d][k] - own);
                let nkw = f64::from(self.topic_word_count(k, w) - own);
                let nk = (self.n_k[k] - u64::from(own)) as f64;
                (ndk + alpha) * (nkw + eta) / (nk + v_eta)
            })
            .collect())
    }

    /// Resamples every token once, in document order.
    pub fn sweep(&mut self) {
        let k_count = self.config.num_topics;
        let (alpha, eta) = (self.config.alpha, self.config.eta);
        let v = self.vocab_size;
        let v_eta = v as f64 * eta;
        let mut weights = vec![0.0; k_count];
        for d in 0..self.docs.len() {
            for pos in 0..self.docs[d].len() {
                let w = self.docs[d][pos];
                let old = self.z[d][pos];
                self.n_dk[d][old] -= 1;
                self.n_kw[old * v + w] -= 1;
                self.n_k[old] -= 1;
                for (k, wk) in weights.iter_mut().enumerate() {
                    *wk = (f64::from(self.n_dk[d][k]) + alpha) * (f64::from(self.n_kw[k * v + w]) + eta)
                        / (self.n_k[k] as f64 + v_eta);
                }
                let new = sample_categorical(&weights, &mut self.rng);
                self.z[d][pos] = new;
                self.n_dk[d][new] += 1;
                self.n_kw[new * v + w] += 1;
                self.n_k[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    /// Point estimate `(n_kw + η) / (n_k + Vη)` of topic `k`.
    pub fn topic_word_distribution(&self, k: usize) -> SimplexVector {
        let eta = self.config.eta;
        let denom = self.n_k[k] as f64 + self.vocab_size as f64 * eta;
        let probs = (0..self.vocab_size)
            .map(|w| (f64::from(self.topic_word_count(k, w)) + eta) / denom)
            .collect();
        SimplexVector::new(probs).expect("smoothed counts normalize")
    }

    /// Top-`l` words of every topic, ties to the lower id.
    pub fn estimate_topics(&self, l: usize) -> Result<TopicSet> {
        if l == 0 || l > self.vocab_size {
            return Err(Error::invalid(format!("top-{l} words from a vocabulary of {}", self.vocab_size)));
        }
        TopicSet::new(
            (0..self.config.num_topics)
                .map(|k| top_indices(self.topic_word_distribution(k).as_slice(), l))
                .collect::<Result<_>>()?,
        )
    }

    /// `(n_dk + α) / (n_d + Kα)` for document `d`.
    pub fn estimate_theta(&self, d: usize) -> Result<SimplexVector> {
        let counts = self
            .n_dk
            .get(d)
            .ok_or_else(|| Error::invalid(format!("no document {d}")))?;
        let alpha = self.config.alpha;
        let total = self.docs[d].len() as f64 + self.config.num_topics as f64 * alpha;
        SimplexVector::new(counts.iter().map(|&c| (f64::from(c) + alpha) / total).collect())
    }

    /// Checks the three count identities against the assignments.
    pub fn counts_consistent(&self) -> bool {
        let k = self.config.num_topics;
        let v = self.vocab_size;
        let mut n_dk = vec![vec![0u32; k]; self.docs.len()];
        let mut n_kw = vec![0u32; k * v];
        let mut n_k = vec![0u64; k];
        for (d, (tokens, topics)) in self.docs.iter().zip(&self.z).enumerate() {
            for (&w, &t) in tokens.iter().zip(topics) {
                n_dk[d][t] += 1;
                n_kw[t * v + w] += 1;
                n_k[t] += 1;
            }
        }
        let total: u64 = self.docs.iter().map(|d| d.len() as u64).sum();
        n_dk == self.n_dk
            && n_kw == self.n_kw
            && n_k == self.n_k
            && self.n_k.iter().sum::<u64>() == total
            && (0..k).all(|t| (0..v).map(|w| u64::from(self.n_kw[t * v + w])).sum::<u64>() == self.n_k[t])
    }
}

fn validate(corpus: &Corpus, config: &GibbsConfig) -> Result<()> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot sample topics for an empty corpus"));
    }
    if config.num_topics < 2 {
        return Err(Error::invalid("need at least two topics"));
    }
    if !(config.alpha > 0.0 && config.eta > 0.0) {
        return Err(Error::invalid("Gibbs hyperparameters must be positive"));
    }
    Ok(())
}
