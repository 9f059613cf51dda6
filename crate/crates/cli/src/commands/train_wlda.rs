use std::fmt::Write as _;
use std::path::Path;

use log::info;
use wlda_core::corpus::Corpus;
use wlda_core::metrics::{MetricsReport, TopicSet};
use wlda_core::seeded_rng;
use wlda_core::wlda::{save_model, TrainConfig, Trainer};

use super::{checkpoint_schedule, create_dir, load_input, reference_topics, score_topics, write_config, write_file};
use crate::args::TrainWldaArgs;
use crate::failure::{CmdResult, Failure, ResultExt};

pub const METRICS_FILE: &str = "metrics.csv";
pub const MODEL_FILE: &str = "model.bin";
pub const TOPICS_FILE: &str = "topics.txt";

pub fn metrics_header() -> String {
    format!("noise_alpha,epoch,recon,mmd,{}", MetricsReport::CSV_HEADER)
}

pub fn checkpoint_topics_file(epoch: usize) -> String {
    format!("topics_e{epoch}.txt")
}

/// Output directory of one run in a noise sweep.
pub fn sweep_dir(noise_alpha: f64) -> String {
    format!("alpha-{noise_alpha}")
}

pub fn train_wlda(args: &TrainWldaArgs) -> CmdResult {
    if args.noise_alpha.is_empty() {
        return Err(Failure::usage("--noise-alpha needs at least one value"));
    }
    let corpus = load_input(&args.input)?;
    if args.top_words == 0 || args.top_words > corpus.vocab_size() {
        return Err(Failure::usage(format!("--top-words must be in 1..={}", corpus.vocab_size())));
    }
    let truth = reference_topics(args.truth.as_ref(), &corpus, args.top_words)?;
    let configs: Vec<TrainConfig> = args.noise_alpha.iter().map(|&a| config_for(args, a)).collect();
    for config in &configs {
        config.validate()?;
    }

    create_dir(&args.out_dir)?;
    write_config(&args.out_dir, args)?;
    let mut csv = metrics_header();
    csv.push('\n');
    let sweep = configs.len() > 1;
    for config in configs {
        let dir = if sweep {
            args.out_dir.join(sweep_dir(config.noise_alpha))
        } else {
            args.out_dir.clone()
        };
        create_dir(&dir)?;
        run_one(args, &corpus, truth.as_ref(), config, &dir, &mut csv)?;
    }
    write_file(&args.out_dir.join(METRICS_FILE), csv)?;
    Ok(())
}

fn config_for(args: &TrainWldaArgs, noise_alpha: f64) -> TrainConfig {
    TrainConfig {
        num_topics: args.num_topics,
        hidden: args.hidden.clone(),
        activation: args.activation,
        dirichlet_alpha: args.dirichlet_alpha,
        noise_alpha,
        lambda: args.lambda,
        lr: args.lr,
        beta1: args.beta1,
        epochs: args.epochs,
        batch_size: args.batch_size,
        mmd_on: args.mmd_on,
    }
}

fn run_one(
    args: &TrainWldaArgs,
    corpus: &Corpus,
    truth: Option<&TopicSet>,
    config: TrainConfig,
    dir: &Path,
    csv: &mut String,
) -> CmdResult {
    let noise_alpha = config.noise_alpha;
    let mut rng = seeded_rng(args.seed);
    let mut trainer = Trainer::new(corpus, config, &mut rng)?;
    let checkpoints = checkpoint_schedule(args.epochs, args.checkpoint_every);
    let mut next = checkpoints.iter().peekable();
    for epoch in 1..=args.epochs {
        let record = trainer.run_epoch(&mut rng)?.clone();
        if next.peek() != Some(&&epoch) {
            continue;
        }
        next.next();
        let topics = trainer.model().extract_topics(args.top_words)?;
        let report = score_topics(&topics, corpus, truth).with_context(|| format!("epoch {epoch}"))?;
        info!(
            "alpha {noise_alpha} epoch {epoch}: recon {:.5} mmd {:.5} TU {:.3} NPMI {:.3}{}",
            record.recon,
            record.mmd,
            report.tu.mean,
            report.npmi.mean,
            report
                .recovery_precision
                .map(|p| format!(" precision {p:.3}"))
                .unwrap_or_default()
        );
        let _ = writeln!(
            csv,
            "{noise_alpha},{epoch},{},{},{}",
            record.recon,
            record.mmd,
            report.to_csv_row()
        );
        write_file(&dir.join(checkpoint_topics_file(epoch)), topics.to_text())?;
    }
    let model = trainer.model();
    write_file(&dir.join(TOPICS_FILE), model.extract_topics(args.top_words)?.to_text())?;
    let model_path = dir.join(MODEL_FILE);
    save_model(model, &model_path).with_context(|| format!("writing {}", model_path.display()))?;
    Ok(())
}
