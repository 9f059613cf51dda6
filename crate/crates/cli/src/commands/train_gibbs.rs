use std::fmt::Write as _;

use log::info;
use wlda_core::gibbs::{GibbsConfig, GibbsState};
use wlda_core::metrics::MetricsReport;
use wlda_core::seeded_rng;

use super::{checkpoint_schedule, create_dir, load_input, reference_topics, score_topics, write_config, write_file};
use crate::args::TrainGibbsArgs;
use crate::failure::{CmdResult, Failure};

pub const METRICS_FILE: &str = "metrics.csv";
pub const TOPICS_FILE: &str = "topics.txt";

pub fn metrics_header() -> String {
    format!("sweep,{}", MetricsReport::CSV_HEADER)
}

pub fn checkpoint_topics_file(sweep: usize) -> String {
    format!("topics_s{sweep}.txt")
}

pub fn train_gibbs(args: &TrainGibbsArgs) -> CmdResult {
    let corpus = load_input(&args.input)?;
    if args.top_words == 0 || args.top_words > corpus.vocab_size() {
        return Err(Failure::usage(format!("--top-words must be in 1..={}", corpus.vocab_size())));
    }
    let truth = reference_topics(args.truth.as_ref(), &corpus, args.top_words)?;
    let config = GibbsConfig {
        num_topics: args.num_topics,
        alpha: args.alpha,
        eta: args.eta,
    };
    let mut state = GibbsState::init_random(&corpus, config, seeded_rng(args.seed))?;

    create_dir(&args.out_dir)?;
    write_config(&args.out_dir, args)?;
    let mut csv = metrics_header();
    csv.push('\n');
    let mut checkpoints = checkpoint_schedule(args.sweeps, args.checkpoint_every);
    if args.sweeps == 0 {
        checkpoints.push(0);
    }
    let mut next = checkpoints.iter().peekable();
    for sweep in 0..=args.sweeps {
        if sweep > 0 {
            state.sweep();
        }
        if next.peek() != Some(&&sweep) {
            continue;
        }
        next.next();
        let topics = state.estimate_topics(args.top_words)?;
        let report = score_topics(&topics, &corpus, truth.as_ref())?;
        info!(
            "sweep {sweep}: TU {:.3} NPMI {:.3}{}",
            report.tu.mean,
            report.npmi.mean,
            report
                .recovery_precision
                .map(|p| format!(" precision {p:.3}"))
                .unwrap_or_default()
        );
        let _ = writeln!(csv, "{sweep},{}", report.to_csv_row());
        write_file(&args.out_dir.join(checkpoint_topics_file(sweep)), topics.to_text())?;
        if sweep == args.sweeps {
            write_file(&args.out_dir.join(TOPICS_FILE), topics.to_text())?;
        }
    }
    write_file(&args.out_dir.join(METRICS_FILE), csv)?;
    Ok(())
}
