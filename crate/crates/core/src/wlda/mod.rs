//! The W-LDA topic model.
//!
//! A deterministic MLP encoder maps a document's word counts to topic
//! proportions `θ = softmax(enc(w))`; a single-layer decoder maps `θ` back to
//! a word distribution `ŵ = softmax(βθ + b)`. Training minimizes the scaled
//! reconstruction loss plus `λ` times the MMD between encoder outputs and
//! Dirichlet prior draws. Topics are read off the columns of `β`.

mod model;
mod objective;
mod train;

pub use model::{load_model, model_from_bytes, model_to_bytes, save_model, WldaGrads, WldaModel, MODEL_FORMAT_VERSION};
pub use objective::{batch_objective, mix_noise, recon_loss, BatchDraws, BatchLoss, MmdOn, ObjectiveConfig};
pub use train::{train, EpochRecord, TrainConfig, TrainReport, Trainer};
