mod classify;
mod eval;
mod generate;
mod gradcheck;
mod match_prior;
mod train_gibbs;
mod train_wlda;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use wlda_core::corpus::{load_corpus, load_text, Corpus, TextOptions};
use wlda_core::metrics::{build_cooccurrence_index, npmi, recovery_precision, topic_uniqueness, MetricsReport, TopicSet};

pub use classify::classify;
pub use eval::eval;
pub use generate::generate;
pub use gradcheck::{gradcheck, run_gradcheck, GradcheckReport};
pub use match_prior::match_prior;
pub use train_gibbs::train_gibbs;
pub use train_wlda::train_wlda;

use crate::args::CorpusInput;
use crate::config::render_config;
use crate::failure::{CmdResult, Failure, ResultExt};

pub const CONFIG_FILE: &str = "config.txt";

pub(crate) fn load_input(input: &CorpusInput) -> CmdResult<Corpus> {
    match (&input.corpus, &input.text) {
        (Some(path), _) => load_corpus(path).with_context(|| format!("reading corpus {}", path.display())),
        (None, Some(path)) => {
            let mut options = TextOptions {
                min_count: input.min_count,
                ..TextOptions::default()
            };
            if let Some(stop) = &input.stopwords {
                options = options
                    .with_stopword_file(stop)
                    .with_context(|| format!("reading stopwords {}", stop.display()))?;
            }
            load_text(path, &options).with_context(|| format!("reading text {}", path.display()))
        }
        (None, None) => Err(Failure::usage("either --corpus or --text is required")),
    }
}

pub(crate) fn create_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CmdResult {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub(crate) fn write_config<T: Serialize>(dir: &Path, args: &T) -> CmdResult {
    write_file(&dir.join(CONFIG_FILE), render_config(args))
}

pub(crate) fn read_topics(path: &Path) -> CmdResult<TopicSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading topics {}", path.display()))?;
    TopicSet::parse(&text).with_context(|| format!("parsing topics {}", path.display()))
}

/// Reference topics: an explicit file, else the corpus ground truth.
pub(crate) fn reference_topics(path: Option<&PathBuf>, corpus: &Corpus, top_words: usize) -> CmdResult<Option<TopicSet>> {
    if let Some(path) = path {
        return read_topics(path).map(Some);
    }
    corpus
        .truth()
        .map(|t| t.top_words(top_words))
        .transpose()
        .with_context(|| "ground-truth top words".to_string())
}

/// TU, NPMI against `corpus`, and recovery precision when `truth` is given.
pub(crate) fn score_topics(topics: &TopicSet, corpus: &Corpus, truth: Option<&TopicSet>) -> CmdResult<MetricsReport> {
    let index = build_cooccurrence_index(corpus.docs(), &topics.distinct_words());
    let recovery = truth
        .map(|t| recovery_precision(topics, t))
        .transpose()
        .with_context(|| "recovery precision".to_string())?;
    Ok(MetricsReport {
        tu: topic_uniqueness(topics),
        npmi: npmi(topics, &index)?,
        recovery_precision: recovery,
        classifier_accuracy: None,
    })
}

/// Epochs (or sweeps) at which to evaluate: every `every` steps and the last.
pub(crate) fn checkpoint_schedule(total: usize, every: usize) -> Vec<usize> {
    let mut points: Vec<usize> = match total.checked_div(every) {
        Some(n) => (1..=n).map(|i| i * every).collect(),
        None => Vec::new(),
    };
    if total > 0 && points.last() != Some(&total) {
        points.push(total);
    }
    points
}
