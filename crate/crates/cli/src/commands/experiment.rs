//! Settings shared by `tomography` and `demo-agreement`.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use qbayes::definetti::{simulate_data, Schedule, AGREEMENT_TOLERANCE, DEFAULT_PARTICLES};
use qbayes::iid::OutcomeRecord;
use qbayes::operator::{Complex, DensityOperator, Ensemble, Ket, MeasurementBasis};
use qbayes::SeededRng;

use super::{default_truth, load_state};
use crate::config::{kebab, pick, read_text, rebase};
use crate::output::Failure;

pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of simulated trials
    #[arg(long, short = 'n')]
    pub trials: Option<usize>,
    /// Particles per random prior
    #[arg(long)]
    pub particles: Option<usize>,
    /// hilbert-schmidt or pure-uniform
    #[arg(long, value_parser = kebab::<Ensemble>)]
    pub ensemble: Option<Ensemble>,
    /// State that generates simulated data [default: diag(0.99, 0.01, ...)]
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Outcome CSV to use instead of simulating
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Keep the truth out of random priors
    #[arg(long)]
    pub exclude_truth: bool,
    /// Distance below which a run counts as converged
    #[arg(long)]
    pub tolerance: Option<f64>,
}

/// Basis as a list of kets, each a list of `[re, im]` amplitudes.
pub type BasisJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub dim: Option<usize>,
    pub trials: Option<usize>,
    pub particles: Option<usize>,
    pub ensemble: Option<Ensemble>,
    pub truth: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub include_truth: Option<bool>,
    pub tolerance: Option<f64>,
    /// Bases in measurement order [default: standard schedule].
    pub schedule: Option<Vec<BasisJson>>,
    pub prior: Option<PathBuf>,
    pub prior_a: Option<PathBuf>,
    pub prior_b: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn relocate_all(&mut self, base: &Path) {
        for p in [
            &mut self.truth,
            &mut self.data,
            &mut self.prior,
            &mut self.prior_a,
            &mut self.prior_b,
            &mut self.out,
        ] {
            rebase(p, base);
        }
    }
}

/// Everything resolved except the priors.
pub struct Experiment {
    pub dim: usize,
    pub particles: usize,
    pub ensemble: Ensemble,
    pub schedule: Schedule,
    pub truth: Option<DensityOperator>,
    pub include_truth: bool,
    pub data: OutcomeRecord,
    pub tolerance: f64,
}

impl Experiment {
    /// Resolves settings; `data_rng` is used only when simulating.
    pub fn resolve(
        args: &ExperimentArgs,
        cfg: &ExperimentConfig,
        prior_dim: Option<usize>,
        verify: bool,
        data_rng: &mut SeededRng,
    ) -> Result<Self, Failure> {
        let truth_path = pick(args.truth.clone(), cfg.truth.clone());
        let data_path = pick(args.data.clone(), cfg.data.clone());
        let loaded_truth = truth_path.map(|p| load_state(&p, verify)).transpose()?;
        let dim = pick(args.dim, cfg.dim)
            .or(loaded_truth.as_ref().map(DensityOperator::dim))
            .or(prior_dim)
            .unwrap_or(2);
        for (what, d) in [
            ("truth", loaded_truth.as_ref().map(DensityOperator::dim)),
            ("prior", prior_dim),
        ] {
            if let Some(d) = d.filter(|&d| d != dim) {
                return Err(Failure::new(format!("{what} has dimension {d}, expected {dim}")));
            }
        }
        let schedule = match &cfg.schedule {
            Some(bases) => parse_schedule(dim, bases)?,
            None => Schedule::standard(dim)?,
        };
        let tolerance = pick(args.tolerance, cfg.tolerance).unwrap_or(AGREEMENT_TOLERANCE);
        let include_truth = !args.exclude_truth && cfg.include_truth.unwrap_or(true);
        let particles = pick(args.particles, cfg.particles).unwrap_or(DEFAULT_PARTICLES);
        let ensemble = pick(args.ensemble, cfg.ensemble).unwrap_or_default();
        let (truth, data) = match data_path {
            Some(path) => {
                let text = read_text(&path)?;
                let data = OutcomeRecord::from_csv(dim, &text)
                    .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
                (loaded_truth, data)
            }
            None => {
                let truth = match loaded_truth {
                    Some(t) => t,
                    None => default_truth(dim)?,
                };
                let n = pick(args.trials, cfg.trials).unwrap_or(DEFAULT_TRIALS);
                let data = simulate_data(&truth, &schedule, n, data_rng)?;
                (Some(truth), data)
            }
        };
        Ok(Self {
            dim,
            particles,
            ensemble,
            schedule,
            truth,
            include_truth,
            data,
            tolerance,
        })
    }

    /// Truth to place in random priors, if any.
    pub fn anchor(&self) -> Option<&DensityOperator> {
        self.truth.as_ref().filter(|_| self.include_truth)
    }
}

fn parse_schedule(dim: usize, bases: &[BasisJson]) -> Result<Schedule, Failure> {
    let bases = bases
        .iter()
        .enumerate()
        .map(|(i, kets)| {
            let kets = kets
                .iter()
                .map(|amps| Ket::new(amps.iter().map(|&[re, im]| Complex::new(re, im)).collect()))
                .collect::<qbayes::Result<Vec<_>>>()
                .and_then(|k| MeasurementBasis::from_kets(&k))
                .map_err(|e| Failure::new(format!("schedule basis {i}: {e}")))?;
            if kets.dim() != dim {
                return Err(Failure::new(format!("schedule basis {i} has dimension {}, expected {dim}", kets.dim())));
            }
            Ok(kets)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Schedule::new(bases).map_err(|e| Failure::new(format!("schedule refused: {e}")))
}
