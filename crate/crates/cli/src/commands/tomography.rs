use std::fmt::Write;
use std::path::PathBuf;

use clap::Args;
use serde::Serialize;

use qbayes::definetti::{run_tomography, GeneratingFunctionJson};
use qbayes::operator::StateJson;
use qbayes::{Error, SeededRng};

use super::experiment::{Experiment, ExperimentArgs, ExperimentConfig};
use super::{load_prior, random_prior, Status};
use crate::config::{load, pick, require_seed, Relocate};
use crate::output::{opt, show, Failure, OutDir};
use crate::Common;

pub const TRACE_HEADER: &str = "trial,outcome,distance_to_truth,interagent_distance";

#[derive(Debug, Args)]
pub struct TomographyArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// Prior JSON [default: random particles]
    #[arg(long)]
    prior: Option<PathBuf>,
}

impl Relocate for ExperimentConfig {
    fn relocate(&mut self, base: &std::path::Path) {
        self.relocate_all(base);
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    trials: usize,
    final_distance_to_truth: Option<f64>,
    converged: Option<bool>,
    tolerance: f64,
    mean: StateJson,
}

pub fn run(common: &Common, args: TomographyArgs) -> Result<Status, Failure> {
    let cfg: ExperimentConfig = load(common.config.as_deref())?;
    if cfg.prior_a.is_some() || cfg.prior_b.is_some() {
        return Err(Failure::new("prior_a/prior_b belong to demo-agreement; use \"prior\""));
    }
    let seed = require_seed(common.seed, cfg.seed)?;
    let out = OutDir::create(pick(common.out.clone(), cfg.out.clone()))?;
    let mut root = SeededRng::new(seed);
    let mut prior_rng = root.split();
    let _ = root.split();
    let mut data_rng = root.split();

    let given = pick(args.prior, cfg.prior.clone())
        .map(|p| load_prior(&p, common.verify))
        .transpose()?;
    let exp = Experiment::resolve(&args.experiment, &cfg, given.as_ref().map(|g| g.dim()), common.verify, &mut data_rng)?;
    let prior = match given {
        Some(g) => g,
        None => random_prior(exp.dim, exp.particles, exp.ensemble, exp.anchor(), &mut prior_rng)?,
    };
    out.write_json("prior.json", &GeneratingFunctionJson::from_generator(&prior))?;

    let run = match run_tomography(&prior, &exp.schedule, &exp.data, exp.truth.as_ref()) {
        Ok(run) => run,
        Err(Error::ZeroLikelihood { trial }) => {
            eprintln!("data impossible under the prior at trial {trial}; no posterior written");
            return Ok(Status::Verdict);
        }
        Err(e) => return Err(e.into()),
    };

    let mut csv = format!("{TRACE_HEADER}\n");
    for s in &run.steps {
        writeln!(csv, "{},{},{},", s.trial, s.outcome, opt(s.distance_to_truth)).unwrap();
    }
    let trace = out.write("trace.csv", &csv)?;
    out.write_json("posterior.json", &GeneratingFunctionJson::from_generator(&run.posterior))?;
    let final_distance = match &exp.truth {
        Some(t) => Some(qbayes::operator::trace_distance(&run.mean, t)?),
        None => None,
    };
    let converged = final_distance.map(|d| d < exp.tolerance);
    out.write_json(
        "summary.json",
        &Summary {
            trials: exp.data.len(),
            final_distance_to_truth: final_distance,
            converged,
            tolerance: exp.tolerance,
            mean: StateJson::from_state(&run.mean),
        },
    )?;
    match final_distance {
        Some(d) => println!("{} trials, final distance to truth {d:e}; trace in {}", exp.data.len(), show(&trace)),
        None => println!("{} trials; trace in {}", exp.data.len(), show(&trace)),
    }
    Ok(if converged == Some(false) { Status::Verdict } else { Status::Success })
}
