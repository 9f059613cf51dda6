use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Serialize, Serializer};
use wlda_core::nn::Activation;
use wlda_core::wlda::MmdOn;

#[derive(Debug, Parser)]
#[command(name = "wlda", version, about = "Dirichlet-prior Wasserstein autoencoder topic models and baselines")]
pub struct Cli {
    /// Flat `key = value` file of flag defaults; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a synthetic LDA corpus with its ground truth.
    #[command(args_override_self = true)]
    Generate(GenerateArgs),
    /// Train the autoencoder topic model, evaluating at checkpoints.
    #[command(args_override_self = true)]
    TrainWlda(TrainWldaArgs),
    /// Run collapsed Gibbs sampling for LDA.
    #[command(args_override_self = true)]
    TrainGibbs(TrainGibbsArgs),
    /// Train an encoder on Gaussian inputs to match a Dirichlet by MMD alone.
    #[command(args_override_self = true)]
    MatchPrior(MatchPriorArgs),
    /// Score a topic set or a trained model.
    #[command(args_override_self = true)]
    Eval(EvalArgs),
    /// Linear-probe classification on encoder features.
    #[command(args_override_self = true)]
    Classify(ClassifyArgs),
    /// Check analytic objective gradients against finite differences.
    #[command(args_override_self = true)]
    Gradcheck(GradcheckArgs),
}

fn activation_name<S: Serializer>(a: &Activation, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(a.name())
}

fn mmd_on_name<S: Serializer>(m: &MmdOn, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(m.name())
}

/// Where documents come from: a native corpus file or plain text.
#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CorpusInput {
    /// Corpus in the native format.
    #[arg(long, value_name = "PATH", required_unless_present = "text", conflicts_with = "text")]
    pub corpus: Option<PathBuf>,
    /// Plain text, one document per line.
    #[arg(long, value_name = "PATH")]
    pub text: Option<PathBuf>,
    /// Stopword file for --text, one word per line.
    #[arg(long, value_name = "PATH")]
    pub stopwords: Option<PathBuf>,
    /// Drop words seen fewer times than this (--text only).
    #[arg(long, default_value_t = 0)]
    pub min_count: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GenerateArgs {
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 5)]
    pub num_topics: usize,
    /// Document-topic Dirichlet concentration.
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Topic-word Dirichlet concentration.
    #[arg(long, default_value_t = 0.05)]
    pub topic_eta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub num_docs: usize,
    /// Mean (Poisson) document length, or the exact length with --fixed-length.
    #[arg(long, default_value_t = 30.0)]
    pub doc_length: f64,
    #[arg(long)]
    pub fixed_length: bool,
    /// Regenerate while the mean pairwise overlap of true top-word lists reaches this.
    #[arg(long, default_value_t = 3.0)]
    pub max_overlap: f64,
    #[arg(long, default_value_t = 10)]
    pub max_attempts: u64,
    #[arg(long, default_value_t = 10)]
    pub top_words: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainWldaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: CorpusInput,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub num_topics: usize,
    /// Encoder hidden widths.
    #[arg(long, value_delimiter = ',', default_value = "100,100")]
    pub hidden: Vec<usize>,
    #[arg(long, default_value = "softplus")]
    #[serde(serialize_with = "activation_name")]
    pub activation: Activation,
    #[arg(long, default_value_t = 0.1)]
    pub dirichlet_alpha: f64,
    /// Noise proportions; one training run per value.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub noise_alpha: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.002)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.99)]
    pub beta1: f64,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 200)]
    pub batch_size: usize,
    /// Which encoder output the MMD term sees: raw or noised.
    #[arg(long, default_value = "raw")]
    #[serde(serialize_with = "mmd_on_name")]
    pub mmd_on: MmdOn,
    #[arg(long, default_value_t = 10)]
    pub checkpoint_every: usize,
    #[arg(long, default_value_t = 10)]
    pub top_words: usize,
    /// Reference topics for recovery precision; defaults to the corpus ground truth.
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct TrainGibbsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: CorpusInput,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 5)]
    pub num_topics: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    #[arg(long, default_value_t = 2000)]
    pub sweeps: usize,
    /// Zero disables intermediate checkpoints.
    #[arg(long, default_value_t = 500)]
    pub checkpoint_every: usize,
    #[arg(long, default_value_t = 10)]
    pub top_words: usize,
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct MatchPriorArgs {
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 100_000)]
    pub num_inputs: usize,
    #[arg(long, default_value_t = 20)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub checkpoint_every: usize,
    /// Explicit checkpoint epochs, replacing the regular schedule.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<usize>>,
    /// Hidden widths; two layers of width --dim by default.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    #[arg(long, default_value = "softplus")]
    #[serde(serialize_with = "activation_name")]
    pub activation: Activation,
    #[arg(long, default_value_t = 200)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.002)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.99)]
    pub beta1: f64,
    /// Samples per side in each checkpoint comparison.
    #[arg(long, default_value_t = 512)]
    pub eval_samples: usize,
    /// Prior-vs-prior resamples for the null distribution.
    #[arg(long, default_value_t = 200)]
    pub null_resamples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct EvalArgs {
    /// Topic file, one line of word ids per topic.
    #[arg(long, value_name = "PATH", required_unless_present = "model", conflicts_with = "model")]
    pub topics: Option<PathBuf>,
    /// Trained model; its top words are scored.
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Reference corpus for NPMI.
    #[command(flatten)]
    #[serde(flatten)]
    pub input: CorpusInput,
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub top_words: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
    /// Also write the report here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ClassifyArgs {
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[command(flatten)]
    #[serde(flatten)]
    pub input: CorpusInput,
    /// One integer label per document.
    #[arg(long, value_name = "PATH")]
    pub labels: PathBuf,
    /// Held-out corpus; without it a random --test-fraction split is used.
    #[arg(long, value_name = "PATH", requires = "test_labels")]
    pub test_corpus: Option<PathBuf>,
    #[arg(long, value_name = "PATH", requires = "test_corpus")]
    pub test_labels: Option<PathBuf>,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, hide = true)]
    pub debug_flip_sign: bool,
}
