use log::{info, warn};
use wlda_core::corpus::{generate_synthetic, mean_topic_overlap, save_corpus, save_labels, DocLength, SyntheticSpec};
use wlda_core::seeded_rng;

use super::{create_dir, write_config, write_file};
use crate::args::GenerateArgs;
use crate::failure::{CmdResult, Failure, ResultExt};

pub const CORPUS_FILE: &str = "corpus.txt";
pub const LABELS_FILE: &str = "labels.txt";
pub const TRUTH_TOPICS_FILE: &str = "truth_topics.txt";

pub fn generate(args: &GenerateArgs) -> CmdResult {
    let doc_length = if args.fixed_length {
        if args.doc_length < 1.0 || args.doc_length.fract() != 0.0 {
            return Err(Failure::usage("--fixed-length needs a positive integer --doc-length"));
        }
        DocLength::Fixed(args.doc_length as usize)
    } else {
        DocLength::Poisson { mean: args.doc_length }
    };
    let spec = SyntheticSpec {
        vocab_size: args.vocab_size,
        num_topics: args.num_topics,
        alpha: args.alpha,
        topic_eta: args.topic_eta,
        num_docs: args.num_docs,
        doc_length,
    };
    spec.validate()?;
    if args.top_words == 0 || args.top_words > args.vocab_size {
        return Err(Failure::usage(format!("--top-words must be in 1..={}", args.vocab_size)));
    }
    if args.max_attempts == 0 {
        return Err(Failure::usage("--max-attempts must be at least 1"));
    }

    let mut accepted = None;
    for attempt in 0..args.max_attempts {
        let seed = args.seed.wrapping_add(attempt);
        let corpus = generate_synthetic(&spec, &mut seeded_rng(seed))?;
        let truth = corpus.truth().expect("synthetic corpora carry ground truth");
        let overlap = mean_topic_overlap(truth, args.top_words)?;
        if overlap < args.max_overlap {
            info!("seed {seed}: mean top-{} overlap {overlap:.3}", args.top_words);
            accepted = Some((seed, corpus));
            break;
        }
        warn!("seed {seed}: mean top-{} overlap {overlap:.3} too high, regenerating", args.top_words);
    }
    let Some((seed, corpus)) = accepted else {
        return Err(Failure::data(format!(
            "no corpus with mean topic overlap below {} in {} attempts",
            args.max_overlap, args.max_attempts
        )));
    };

    create_dir(&args.out_dir)?;
    let truth = corpus.truth().expect("synthetic corpora carry ground truth");
    let corpus_path = args.out_dir.join(CORPUS_FILE);
    save_corpus(&corpus, &corpus_path).with_context(|| format!("writing {}", corpus_path.display()))?;
    let labels_path = args.out_dir.join(LABELS_FILE);
    save_labels(&truth.dominant_topics(), &labels_path).with_context(|| format!("writing {}", labels_path.display()))?;
    write_file(&args.out_dir.join(TRUTH_TOPICS_FILE), truth.top_words(args.top_words)?.to_text())?;
    let resolved = GenerateArgs { seed, ..args.clone() };
    write_config(&args.out_dir, &resolved)?;
    println!(
        "wrote {} documents ({} tokens) to {}",
        corpus.len(),
        corpus.total_tokens(),
        corpus_path.display()
    );
    Ok(())
}
