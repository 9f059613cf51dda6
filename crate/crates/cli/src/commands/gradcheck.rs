use rand::Rng;
use wlda_core::corpus::BowDocument;
use wlda_core::nn::{finite_diff_grad, max_relative_error, Activation};
use wlda_core::simplex::{sample_dirichlet_n, DirichletParams};
use wlda_core::wlda::{batch_objective, BatchDraws, MmdOn, ObjectiveConfig, WldaModel};
use wlda_core::{seeded_rng, Result};

use crate::args::GradcheckArgs;
use crate::failure::{CmdResult, Failure};

const VOCAB: usize = 5;
const TOPICS: usize = 2;
const DOCS: usize = 4;
const STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradcheckReport {
    /// Max relative error of each instance.
    pub errors: Vec<f64>,
    pub tolerance: f64,
}

impl GradcheckReport {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.errors.iter().all(|&e| e < self.tolerance)
    }
}

fn random_doc<R: Rng>(rng: &mut R) -> BowDocument {
    let len = rng.random_range(1..=6);
    let tokens: Vec<usize> = (0..len).map(|_| rng.random_range(0..VOCAB)).collect();
    BowDocument::from_tokens(&tokens)
}

fn objective_for(instance: usize) -> ObjectiveConfig {
    match instance % 4 {
        0 => ObjectiveConfig::default(),
        1 => ObjectiveConfig { lambda: 2.5, noise_alpha: 0.4, mmd_on: MmdOn::RawTheta },
        2 => ObjectiveConfig { lambda: 1.0, noise_alpha: 0.3, mmd_on: MmdOn::NoisedTheta },
        _ => ObjectiveConfig { lambda: 0.5, noise_alpha: 0.0, mmd_on: MmdOn::RawTheta },
    }
}

/// Max relative error between analytic and central-difference gradients of
/// the full objective on one random instance.
fn check_instance(seed: u64, instance: usize, flip_sign: bool) -> Result<f64> {
    let mut rng = seeded_rng(seed);
    rng.set_stream(instance as u64);
    let activation = if instance.is_multiple_of(2) { Activation::Softplus } else { Activation::LeakyRelu };
    let mut model = WldaModel::new(VOCAB, TOPICS, &[4, 3], activation, &mut rng)?;
    for b in &mut model.offset {
        *b = rng.random_range(-0.5..0.5);
    }
    let docs: Vec<BowDocument> = (0..DOCS).map(|_| random_doc(&mut rng)).collect();
    let refs: Vec<&BowDocument> = docs.iter().collect();
    let prior_params = DirichletParams::symmetric(TOPICS, 0.1)?;
    let prior = sample_dirichlet_n(&prior_params, DOCS, &mut rng);
    let noise = sample_dirichlet_n(&prior_params, DOCS, &mut rng);
    let draws = BatchDraws { prior: &prior, noise: &noise };
    let config = objective_for(instance);

    let (_, mut grads) = batch_objective(&model, &refs, draws, &config)?;
    if flip_sign {
        for g in grads.topic_matrix.as_mut_slice() {
            *g = -*g;
        }
    }
    let loss = |m: &WldaModel| batch_objective(m, &refs, draws, &config).map(|(l, _)| l.total);
    let numeric = finite_diff_grad(loss, &model, STEP)?;
    Ok(max_relative_error(&grads, &numeric))
}

pub fn run_gradcheck(seed: u64, instances: usize, tolerance: f64, flip_sign: bool) -> Result<GradcheckReport> {
    let errors = (0..instances)
        .map(|i| check_instance(seed, i, flip_sign))
        .collect::<Result<Vec<_>>>()?;
    Ok(GradcheckReport { errors, tolerance })
}

pub fn gradcheck(args: &GradcheckArgs) -> CmdResult<GradcheckReport> {
    if args.instances == 0 || args.tolerance.is_nan() || args.tolerance <= 0.0 {
        return Err(Failure::usage("need --instances >= 1 and a positive --tolerance"));
    }
    let report = run_gradcheck(args.seed, args.instances, args.tolerance, args.debug_flip_sign)?;
    for (i, e) in report.errors.iter().enumerate() {
        println!("instance {i}: max relative error {e:.3e}");
    }
    println!("max relative error: {:.3e} (tolerance {:.1e})", report.max_error(), report.tolerance);
    if report.passed() {
        println!("PASS");
        Ok(report)
    } else {
        println!("FAIL");
        Err(Failure::Check(format!(
            "gradient check failed: max relative error {:.3e} exceeds {:.1e}",
            report.max_error(),
            report.tolerance
        )))
    }
}
