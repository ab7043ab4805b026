pub mod agreement;
pub mod audit;
mod experiment;
pub mod fit;
pub mod sample;
pub mod tomography;
pub mod validate;

use std::path::Path;

use qbayes::definetti::{GeneratingFunction, GeneratingFunctionJson};
use qbayes::operator::{DensityOperator, Ensemble, StateJson};
use qbayes::SeededRng;

use crate::config::read_json;
use crate::output::Failure;

/// How a command finished; errors are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Incoherent, nonconvergent or impossible data.
    Verdict,
}

pub fn load_state(path: &Path, verify: bool) -> Result<DensityOperator, Failure> {
    let json: StateJson = read_json(path)?;
    let rho: DensityOperator = json
        .to_state()
        .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
    if verify {
        DensityOperator::validate(rho.matrix())
            .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
        eprintln!("verified state {}", path.display());
    }
    Ok(rho)
}

pub fn load_prior(path: &Path, verify: bool) -> Result<GeneratingFunction, Failure> {
    let json: GeneratingFunctionJson = read_json(path)?;
    let gen: GeneratingFunction = json
        .to_generator()
        .map_err(|e| Failure::new(format!("{}: {e}", path.display())))?;
    if verify {
        for (i, p) in gen.particles().iter().enumerate() {
            DensityOperator::validate(p.state.matrix())
                .map_err(|e| Failure::new(format!("{}: particle {i}: {e}", path.display())))?;
        }
        eprintln!("verified prior {} ({} particles)", path.display(), gen.particles().len());
    }
    Ok(gen)
}

/// diag(0.99, 0.01/(D−1), …): a nearly pure state used when no truth is given.
pub fn default_truth(dim: usize) -> Result<DensityOperator, Failure> {
    if dim < 2 {
        return Err(Failure::new(format!("dim must be at least 2, got {dim}")));
    }
    let rest = 0.01 / (dim - 1) as f64;
    let diag: Vec<f64> = (0..dim).map(|i| if i == 0 { 0.99 } else { rest }).collect();
    Ok(DensityOperator::diagonal(&diag)?)
}

/// `count` random particles; with `anchor`, one of them is replaced by it.
pub fn random_prior(
    dim: usize,
    count: usize,
    ensemble: Ensemble,
    anchor: Option<&DensityOperator>,
    rng: &mut SeededRng,
) -> Result<GeneratingFunction, Failure> {
    if count == 0 {
        return Err(Failure::new("particles must be at least 1"));
    }
    let random = count - usize::from(anchor.is_some());
    let mut states = (0..random)
        .map(|_| qbayes::operator::sample_density(dim, ensemble, rng))
        .collect::<qbayes::Result<Vec<_>>>()?;
    states.extend(anchor.cloned());
    Ok(GeneratingFunction::uniform(states)?)
}
