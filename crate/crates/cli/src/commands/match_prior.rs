use std::fmt::Write as _;

use log::info;
use wlda_core::prior_match::{PriorMatchConfig, PriorMatcher};
use wlda_core::simplex::{prior_null_mmd, quantile, SimplexVector};
use wlda_core::seeded_rng;

use super::{checkpoint_schedule, create_dir, write_config, write_file};
use crate::args::MatchPriorArgs;
use crate::failure::{CmdResult, Failure};

pub const MMD_FILE: &str = "mmd.csv";
pub const MMD_HEADER: &str = "epoch,train_mmd,mmd,null_p95,below_null";

pub fn encoded_file(epoch: usize) -> String {
    format!("encoded_e{epoch}.csv")
}

pub fn prior_file(epoch: usize) -> String {
    format!("prior_e{epoch}.csv")
}

fn samples_csv(samples: &[SimplexVector]) -> String {
    let dim = samples.first().map_or(0, SimplexVector::dim);
    let mut out = (0..dim).map(|k| format!("x{k}")).collect::<Vec<_>>().join(",");
    out.push('\n');
    for s in samples {
        let row: Vec<String> = s.iter().map(f64::to_string).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn match_prior(args: &MatchPriorArgs) -> CmdResult {
    let config = PriorMatchConfig {
        dim: args.dim,
        alpha: args.alpha,
        num_inputs: args.num_inputs,
        hidden: args.hidden.clone(),
        activation: args.activation,
        batch_size: args.batch_size,
        lr: args.lr,
        beta1: args.beta1,
    };
    config.validate()?;
    if args.eval_samples < 2 || args.null_resamples == 0 {
        return Err(Failure::usage("need --eval-samples >= 2 and --null-resamples >= 1"));
    }
    let mut checkpoints = match &args.checkpoints {
        Some(list) => list.clone(),
        None => {
            let mut c = vec![0];
            c.extend(checkpoint_schedule(args.epochs, args.checkpoint_every));
            c
        }
    };
    checkpoints.sort_unstable();
    checkpoints.dedup();
    if let Some(&last) = checkpoints.last() {
        if last > args.epochs {
            return Err(Failure::usage(format!("checkpoint {last} is beyond --epochs {}", args.epochs)));
        }
    }

    let mut rng = seeded_rng(args.seed);
    // Evaluation draws come from their own stream so checkpoints do not perturb training.
    let mut eval_rng = seeded_rng(args.seed);
    eval_rng.set_stream(1);
    let mut matcher = PriorMatcher::new(config, &mut rng)?;
    let null = prior_null_mmd(matcher.prior(), args.eval_samples, args.null_resamples, &mut eval_rng)?;
    let p95 = quantile(&null, 0.95).expect("non-empty null sample");
    info!("null 95th percentile at m = {}: {p95}", args.eval_samples);

    create_dir(&args.out_dir)?;
    write_config(&args.out_dir, args)?;
    let mut csv = format!("{MMD_HEADER}\n");
    let mut train_mmd = None;
    for epoch in 0..=args.epochs {
        if epoch > 0 {
            train_mmd = Some(matcher.run_epoch(&mut rng)?);
        }
        if checkpoints.binary_search(&epoch).is_err() {
            continue;
        }
        let snap = matcher.snapshot(args.eval_samples, &mut eval_rng)?;
        info!("epoch {epoch}: mmd {} (null p95 {p95})", snap.mmd);
        let _ = writeln!(
            csv,
            "{epoch},{},{},{p95},{}",
            train_mmd.map(|v| v.to_string()).unwrap_or_default(),
            snap.mmd,
            snap.mmd < p95
        );
        write_file(&args.out_dir.join(encoded_file(epoch)), samples_csv(&snap.encoded))?;
        write_file(&args.out_dir.join(prior_file(epoch)), samples_csv(&snap.prior))?;
    }
    write_file(&args.out_dir.join(MMD_FILE), csv)?;
    Ok(())
}
