use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use qbayes::gleason::basis_distribution;
use qbayes::iid::{frequency_report, sample_sequence};
use qbayes::operator::{random_basis, DensityOperator, MeasurementBasis};
use qbayes::SeededRng;

use super::{load_state, Status};
use crate::config::{load, pick, rebase, require_seed, Relocate};
use crate::output::{show, Failure, OutDir};
use crate::Common;

const DEFAULT_TRIALS: usize = 1000;
const DEFAULT_C: f64 = 5.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum BasisChoice {
    #[default]
    Computational,
    /// Haar-random, drawn from the seed before sampling
    Random,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// State JSON [default: maximally mixed]
    #[arg(long)]
    state: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, short = 'n')]
    trials: Option<usize>,
    #[arg(long, value_enum)]
    basis: Option<BasisChoice>,
    /// Frequency band is c/√N
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleConfig {
    seed: Option<u64>,
    state: Option<PathBuf>,
    dim: Option<usize>,
    trials: Option<usize>,
    basis: Option<BasisChoice>,
    c: Option<f64>,
    out: Option<PathBuf>,
}

impl Relocate for SampleConfig {
    fn relocate(&mut self, base: &std::path::Path) {
        rebase(&mut self.state, base);
        rebase(&mut self.out, base);
    }
}

pub fn run(common: &Common, args: SampleArgs) -> Result<Status, Failure> {
    let cfg: SampleConfig = load(common.config.as_deref())?;
    let seed = require_seed(common.seed, cfg.seed)?;
    let trials = pick(args.trials, cfg.trials).unwrap_or(DEFAULT_TRIALS);
    let c = pick(args.c, cfg.c).unwrap_or(DEFAULT_C);
    let out = OutDir::create(pick(common.out.clone(), cfg.out))?;

    let rho = match pick(args.state, cfg.state) {
        Some(path) => load_state(&path, common.verify)?,
        None => DensityOperator::maximally_mixed(pick(args.dim, cfg.dim).unwrap_or(2))?,
    };
    if let Some(d) = pick(args.dim, cfg.dim) {
        if d != rho.dim() {
            return Err(Failure::new(format!("dim {d} does not match the state's dimension {}", rho.dim())));
        }
    }
    let mut rng = SeededRng::new(seed);
    let basis = match pick(args.basis, cfg.basis).unwrap_or_default() {
        BasisChoice::Computational => MeasurementBasis::computational(rho.dim())?,
        BasisChoice::Random => random_basis(rho.dim(), &mut rng)?,
    };
    let probs = basis_distribution(&rho, &basis)?;
    let record = sample_sequence(&rho, &basis, trials, &mut rng)?;
    let csv = out.write("record.csv", &record.to_csv())?;
    println!("counts {:?} over {trials} trials; record in {}", record.counts(), show(&csv));
    if record.is_empty() {
        return Ok(Status::Success);
    }
    let report = frequency_report(&record, &probs, c)?;
    out.write_json("frequency.json", &report)?;
    println!(
        "max |n_k/N - p_k| = {:e}, band c/sqrt(N) = {:e}: {}",
        report.max_deviation(),
        c / (trials as f64).sqrt(),
        if report.within { "within" } else { "outside" }
    );
    Ok(Status::Success)
}
