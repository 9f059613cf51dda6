//! W-LDA: a topic model trained as a Wasserstein autoencoder whose latent
//! document-topic vectors are matched to a Dirichlet prior with MMD under the
//! information diffusion kernel.
//!
//! The crate is organised bottom-up:
//!
//! - [`nn`]: dense matrices, a small MLP with hand-derived backprop, Adam and a
//!   central finite-difference oracle.
//! - [`simplex`]: simplex vectors, Dirichlet sampling, the geodesic distance,
//!   the diffusion kernel and the unbiased MMD estimator (with gradients).
//! - [`corpus`]: bag-of-words documents, vocabularies, synthetic LDA corpora
//!   and the corpus file format.
//! - [`wlda`]: the encoder/decoder model, its objective and training loop.
//! - [`gibbs`]: a collapsed Gibbs sampler for vanilla LDA.
//! - [`metrics`]: topic uniqueness, NPMI, aligned recovery precision and a
//!   linear classification probe.
//!
//! All randomness flows through explicitly passed RNGs; with the same seed
//! every operation is bit-for-bit reproducible.

pub mod corpus;
pub mod error;
pub mod gibbs;
pub mod hexfloat;
pub mod metrics;
pub mod nn;
pub mod prior_match;
pub mod simplex;
pub mod wlda;

pub use error::{Error, Result};

/// RNG used by the binaries and tests. ChaCha output is stable across
/// platforms and crate versions, which keeps seeded runs reproducible.
pub type SeededRng = rand_chacha::ChaCha8Rng;

/// Builds a [`SeededRng`] from a 64-bit seed.
pub fn seeded_rng(seed: u64) -> SeededRng {
    <SeededRng as rand::SeedableRng>::seed_from_u64(seed)
}
