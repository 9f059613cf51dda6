use rand::seq::SliceRandom;
use wlda_core::corpus::{load_corpus, load_labels, Corpus};
use wlda_core::metrics::{classification_probe, ProbeConfig};
use wlda_core::seeded_rng;
use wlda_core::wlda::{load_model, WldaModel};

use super::load_input;
use crate::args::ClassifyArgs;
use crate::failure::{CmdResult, Failure, ResultExt};

type Labeled = Vec<(Vec<f64>, usize)>;

fn features(model: &WldaModel, corpus: &Corpus, labels: Vec<usize>, what: &str) -> CmdResult<Labeled> {
    if labels.len() != corpus.len() {
        return Err(Failure::data(format!(
            "{what}: {} labels for {} documents",
            labels.len(),
            corpus.len()
        )));
    }
    if model.vocab_size() != corpus.vocab_size() {
        return Err(Failure::data(format!(
            "{what}: model vocabulary has {} words but the corpus has {}",
            model.vocab_size(),
            corpus.vocab_size()
        )));
    }
    let thetas = model.encode_all(corpus.docs())?;
    Ok(thetas.into_iter().map(|t| t.into_vec()).zip(labels).collect())
}

/// Encodes documents without noise and returns the probe's test accuracy.
pub fn classify(args: &ClassifyArgs) -> CmdResult<f64> {
    let model = load_model(&args.model).with_context(|| format!("reading model {}", args.model.display()))?;
    let corpus = load_input(&args.input)?;
    let labels = load_labels(&args.labels).with_context(|| format!("reading labels {}", args.labels.display()))?;
    let data = features(&model, &corpus, labels, "training corpus")?;

    let (train, test) = match (&args.test_corpus, &args.test_labels) {
        (Some(cp), Some(lp)) => {
            let test_corpus = load_corpus(cp).with_context(|| format!("reading corpus {}", cp.display()))?;
            let test_labels = load_labels(lp).with_context(|| format!("reading labels {}", lp.display()))?;
            (data, features(&model, &test_corpus, test_labels, "test corpus")?)
        }
        _ => {
            if !(args.test_fraction > 0.0 && args.test_fraction < 1.0) {
                return Err(Failure::usage("--test-fraction must lie strictly between 0 and 1"));
            }
            let mut data = data;
            data.shuffle(&mut seeded_rng(args.seed));
            let n_test = ((data.len() as f64) * args.test_fraction).round() as usize;
            if n_test == 0 || n_test == data.len() {
                return Err(Failure::usage(format!("cannot split {} documents into non-empty train and test sets", data.len())));
            }
            let train = data.split_off(n_test);
            (train, data)
        }
    };
    let num_classes = train.iter().chain(&test).map(|(_, y)| y + 1).max().unwrap_or(1);
    let config = ProbeConfig {
        lr: args.lr,
        iters: args.iters,
    };
    let accuracy = classification_probe(&train, &test, num_classes, config)?;
    println!("accuracy: {accuracy}");
    Ok(accuracy)
}
