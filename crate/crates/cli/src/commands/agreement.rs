use std::fmt::Write;

use clap::Args;
use serde::Serialize;
use std::path::PathBuf;

use qbayes::definetti::{agent_agreement, Agent, GeneratingFunctionJson};
use qbayes::{Error, SeededRng};

use super::experiment::{Experiment, ExperimentArgs, ExperimentConfig};
use super::tomography::TRACE_HEADER;
use super::{load_prior, random_prior, Status};
use crate::config::{load, pick, require_seed};
use crate::output::{opt, show, Failure, OutDir};
use crate::Common;

#[derive(Debug, Args)]
pub struct AgreementArgs {
    #[command(flatten)]
    experiment: ExperimentArgs,
    /// First agent's prior JSON [default: random particles]
    #[arg(long)]
    prior_a: Option<PathBuf>,
    /// Second agent's prior JSON [default: random particles]
    #[arg(long)]
    prior_b: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Failed {
    agent: &'static str,
    trial: Option<usize>,
    reason: String,
}

#[derive(Debug, Default, Serialize)]
struct Summary {
    trials: usize,
    final_interagent_distance: Option<f64>,
    final_distance_a: Option<f64>,
    final_distance_b: Option<f64>,
    decreasing: Option<bool>,
    converged: bool,
    tolerance: f64,
    failure: Option<Failed>,
}

fn name(agent: Agent) -> &'static str {
    match agent {
        Agent::A => "A",
        Agent::B => "B",
    }
}

pub fn run(common: &Common, args: AgreementArgs) -> Result<Status, Failure> {
    let cfg: ExperimentConfig = load(common.config.as_deref())?;
    if cfg.prior.is_some() {
        return Err(Failure::new("\"prior\" belongs to tomography; use prior_a and prior_b"));
    }
    let seed = require_seed(common.seed, cfg.seed)?;
    let out = OutDir::create(pick(common.out.clone(), cfg.out.clone()))?;
    let mut root = SeededRng::new(seed);
    let mut rng_a = root.split();
    let mut rng_b = root.split();
    let mut data_rng = root.split();

    let given_a = pick(args.prior_a, cfg.prior_a.clone())
        .map(|p| load_prior(&p, common.verify))
        .transpose()?;
    let given_b = pick(args.prior_b, cfg.prior_b.clone())
        .map(|p| load_prior(&p, common.verify))
        .transpose()?;
    if let (Some(a), Some(b)) = (&given_a, &given_b) {
        if a.dim() != b.dim() {
            return Err(Failure::new(format!("priors disagree on dimension: {} vs {}", a.dim(), b.dim())));
        }
    }
    let prior_dim = given_a.as_ref().or(given_b.as_ref()).map(|g| g.dim());
    let exp = Experiment::resolve(&args.experiment, &cfg, prior_dim, common.verify, &mut data_rng)?;
    let prior_a = match given_a {
        Some(g) => g,
        None => random_prior(exp.dim, exp.particles, exp.ensemble, exp.anchor(), &mut rng_a)?,
    };
    let prior_b = match given_b {
        Some(g) => g,
        None => random_prior(exp.dim, exp.particles, exp.ensemble, exp.anchor(), &mut rng_b)?,
    };
    out.write_json("prior_a.json", &GeneratingFunctionJson::from_generator(&prior_a))?;
    out.write_json("prior_b.json", &GeneratingFunctionJson::from_generator(&prior_b))?;

    let mut summary = Summary {
        trials: exp.data.len(),
        tolerance: exp.tolerance,
        ..Summary::default()
    };
    let result = match agent_agreement(&prior_a, &prior_b, &exp.schedule, &exp.data, exp.truth.as_ref()) {
        Ok(r) => r,
        Err(e) => {
            let trial = match e.source {
                Error::ZeroLikelihood { trial } => Some(trial),
                _ => None,
            };
            let reason = e.source.to_string();
            eprintln!("agent {}: {reason}", name(e.agent));
            summary.failure = Some(Failed {
                agent: name(e.agent),
                trial,
                reason,
            });
            out.write_json("summary.json", &summary)?;
            return Ok(Status::Verdict);
        }
    };

    let mut csv = format!("{TRACE_HEADER}\n");
    for s in &result.steps {
        let to_truth = s.distance_a.zip(s.distance_b).map(|(a, b)| a.max(b));
        writeln!(csv, "{},{},{},{}", s.trial, s.outcome, opt(to_truth), s.interagent).unwrap();
    }
    let trace = out.write("agreement.csv", &csv)?;
    out.write_json("posterior_a.json", &GeneratingFunctionJson::from_generator(&result.posterior_a))?;
    out.write_json("posterior_b.json", &GeneratingFunctionJson::from_generator(&result.posterior_b))?;

    let to_truth = |m| exp.truth.as_ref().map(|t| qbayes::operator::trace_distance(m, t)).transpose();
    summary.final_interagent_distance = Some(result.final_interagent);
    summary.final_distance_a = to_truth(&result.mean_a)?;
    summary.final_distance_b = to_truth(&result.mean_b)?;
    summary.decreasing = Some(result.decreasing);
    summary.converged = result.final_interagent < exp.tolerance
        && [summary.final_distance_a, summary.final_distance_b]
            .iter()
            .all(|d| d.is_none_or(|d| d < exp.tolerance));
    out.write_json("summary.json", &summary)?;
    println!(
        "final inter-agent distance {:e}, to truth A {} B {}: {}; trace in {}",
        result.final_interagent,
        opt(summary.final_distance_a),
        opt(summary.final_distance_b),
        if summary.converged { "converged" } else { "NOT converged" },
        show(&trace)
    );
    Ok(if summary.converged { Status::Success } else { Status::Verdict })
}
