//! Exchangeable multi-copy states, the de Finetti mixture over product
//! states, and Bayesian tomography with a fixed particle cloud.
//!
//! The generating function p(ρ) is discretized as weighted particles. There
//! is no resampling and particles never move, so each update is exactly
//! Bayes's rule on the cloud.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gleason::{require_complete, trace_product_re};
use crate::iid::{InverseCdf, OutcomeRecord};
use crate::operator::{
    linalg::{composite_dim, partial_trace_matrix},
    max_abs_diff, permute_subsystems, sample_density, tensor_power, trace_distance, CMatrix,
    DensityOperator, Ensemble, Ket, MeasurementBasis, StateJson,
};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Residual bound for exchangeability checks.
pub const EXCHANGEABILITY_TOLERANCE: f64 = 1e-10;
/// Inter-agent distance below which two posteriors count as agreeing.
pub const AGREEMENT_TOLERANCE: f64 = 0.05;
/// Default particle count for random priors.
pub const DEFAULT_PARTICLES: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Particle<T: Real = f64> {
    pub weight: T,
    pub state: DensityOperator<T>,
}

/// Weighted particle approximation of p(ρ).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunction<T: Real = f64> {
    dim: usize,
    particles: Vec<Particle<T>>,
}

impl<T: Real> GeneratingFunction<T> {
    pub fn new(dim: usize, particles: Vec<Particle<T>>) -> Result<Self> {
        if particles.is_empty() {
            return Err(Error::Malformed("generating function has no particles".into()));
        }
        let mut total = T::zero();
        for p in &particles {
            if p.state.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.state.dim(),
                });
            }
            if p.weight.partial_cmp(&T::zero()).is_none_or(|o| o.is_lt()) {
                return Err(Error::Invariant {
                    invariant: "non-negative weights",
                    residual: p.weight.as_f64().abs(),
                });
            }
            total += p.weight;
        }
        let residual = (total - T::one()).abs();
        if residual > T::tolerance() {
            return Err(Error::Invariant {
                invariant: "weights sum to one",
                residual: residual.as_f64(),
            });
        }
        Ok(Self { dim, particles })
    }

    pub fn point_mass(state: DensityOperator<T>) -> Self {
        Self {
            dim: state.dim(),
            particles: vec![Particle {
                weight: T::one(),
                state,
            }],
        }
    }

    /// Equal weights over `states`.
    pub fn uniform(states: Vec<DensityOperator<T>>) -> Result<Self> {
        let dim = states
            .first()
            .map(DensityOperator::dim)
            .ok_or_else(|| Error::Malformed("generating function has no particles".into()))?;
        let w = T::one() / T::from_usize(states.len()).unwrap();
        Self::new(
            dim,
            states
                .into_iter()
                .map(|state| Particle { weight: w, state })
                .collect(),
        )
    }

    /// `count` equally weighted draws from `ensemble`.
    pub fn sample(dim: usize, count: usize, ensemble: Ensemble, rng: &mut SeededRng) -> Result<Self> {
        let states = (0..count)
            .map(|_| sample_density(dim, ensemble, rng))
            .collect::<Result<Vec<_>>>()?;
        Self::uniform(states)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn particles(&self) -> &[Particle<T>] {
        &self.particles
    }

    pub fn weights(&self) -> Vec<T> {
        self.particles.iter().map(|p| p.weight).collect()
    }

    /// Σ_j w_j ρ_j
    pub fn mean_state(&self) -> DensityOperator<T> {
        DensityOperator::mixture(self.dim, self.particles.iter().map(|p| (p.weight, &p.state)))
    }

    /// Σ_j w_j tr(ρ_j Π_k) for each outcome k.
    pub fn predictive(&self, basis: &MeasurementBasis<T>) -> Result<Vec<T>> {
        self.check_basis(basis)?;
        Ok(basis
            .projectors()
            .iter()
            .map(|pk| {
                self.particles.iter().fold(T::zero(), |acc, p| {
                    acc + p.weight * trace_product_re(p.state.matrix(), pk.matrix())
                })
            })
            .collect())
    }

    fn check_basis(&self, basis: &MeasurementBasis<T>) -> Result<()> {
        if basis.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: basis.dim(),
            });
        }
        Ok(())
    }

    /// Replaces weights with w_j·l_j / Σ w·l; `trial` labels a zero-total error.
    fn reweight(&mut self, likelihoods: impl Iterator<Item = T>, trial: usize) -> Result<()> {
        let mut total = T::zero();
        for (p, l) in self.particles.iter_mut().zip(likelihoods) {
            p.weight *= l.max(T::zero());
            total += p.weight;
        }
        if total.partial_cmp(&T::zero()).is_none_or(|o| o.is_le()) {
            return Err(Error::ZeroLikelihood { trial });
        }
        for p in &mut self.particles {
            p.weight /= total;
        }
        Ok(())
    }
}

/// w_j' ∝ w_j·tr(ρ_j Π_k); states are untouched.
pub fn bayes_update<T: Real>(
    gen: &GeneratingFunction<T>,
    basis: &MeasurementBasis<T>,
    outcome: usize,
) -> Result<GeneratingFunction<T>> {
    gen.check_basis(basis)?;
    let proj = basis
        .projectors()
        .get(outcome)
        .ok_or(Error::OutcomeOutOfRange {
            index: outcome,
            dim: basis.dim(),
        })?;
    let mut next = gen.clone();
    let likelihoods: Vec<T> = gen
        .particles
        .iter()
        .map(|p| trace_product_re(p.state.matrix(), proj.matrix()))
        .collect();
    next.reweight(likelihoods.into_iter(), 0)?;
    Ok(next)
}

/// Σ_j w_j ρ_j^{⊗n} on D^n dimensions.
pub fn build_exchangeable<T: Real>(gen: &GeneratingFunction<T>, n: usize, cap: usize) -> Result<DensityOperator<T>> {
    let requested = composite_dim(gen.dim, n).unwrap_or(usize::MAX);
    if requested > cap {
        return Err(Error::CompositeCapExceeded { requested, cap });
    }
    let mut acc = CMatrix::<T>::zeros(requested, requested);
    for p in &gen.particles {
        let power = tensor_power(&p.state, n, cap)?;
        acc += power.matrix().map(|z| z * p.weight);
    }
    Ok(DensityOperator::from_matrix_unchecked(acc))
}

/// ρ^(1), …, ρ^(N_max) for one system type.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeableFamily<T: Real = f64> {
    dim: usize,
    levels: Vec<DensityOperator<T>>,
    generator: Option<GeneratingFunction<T>>,
}

impl<T: Real> ExchangeableFamily<T> {
    pub fn from_generator(gen: GeneratingFunction<T>, n_max: usize, cap: usize) -> Result<Self> {
        let levels = (1..=n_max)
            .map(|n| build_exchangeable(&gen, n, cap))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: gen.dim,
            levels,
            generator: Some(gen),
        })
    }

    /// Arbitrary operators; `levels[n - 1]` must act on `dim^n` dimensions.
    pub fn from_levels(dim: usize, levels: Vec<DensityOperator<T>>) -> Result<Self> {
        for (i, rho) in levels.iter().enumerate() {
            let want = composite_dim(dim, i + 1).unwrap_or(usize::MAX);
            if rho.dim() != want {
                return Err(Error::DimensionMismatch {
                    expected: want,
                    found: rho.dim(),
                });
            }
        }
        Ok(Self {
            dim,
            levels,
            generator: None,
        })
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Option<&DensityOperator<T>> {
        n.checked_sub(1).and_then(|i| self.levels.get(i))
    }

    pub fn generator(&self) -> Option<&GeneratingFunction<T>> {
        self.generator.as_ref()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeabilityReport {
    /// Largest entrywise change under any transposition of two copies, per N.
    pub symmetry: Vec<f64>,
    /// Largest gap between ρ^(N) and ρ^(N+1) with any one copy traced out.
    pub consistency: Vec<f64>,
    pub passed: bool,
}

pub fn check_exchangeable<T: Real>(family: &ExchangeableFamily<T>) -> Result<ExchangeabilityReport> {
    if family.n_max() < 2 {
        return Err(Error::Malformed("exchangeability check needs N_max >= 2".into()));
    }
    let d = family.dim;
    let mut symmetry = Vec::with_capacity(family.n_max());
    for (i, rho) in family.levels.iter().enumerate() {
        let n = i + 1;
        let dims = vec![d; n];
        let mut worst = T::zero();
        for a in 0..n {
            for b in a + 1..n {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.swap(a, b);
                let swapped = permute_subsystems(rho.matrix(), &dims, &perm)?;
                worst = worst.max(max_abs_diff(&swapped, rho.matrix()));
            }
        }
        symmetry.push(worst.as_f64());
    }
    let mut consistency = Vec::with_capacity(family.n_max() - 1);
    for n in 1..family.n_max() {
        let big = &family.levels[n];
        let small = &family.levels[n - 1];
        let dims = vec![d; n + 1];
        let mut worst = T::zero();
        for slot in 0..=n {
            let keep: Vec<usize> = (0..=n).filter(|&s| s != slot).collect();
            let reduced = partial_trace_matrix(big.matrix(), &dims, &keep)?;
            worst = worst.max(max_abs_diff(&reduced, small.matrix()));
        }
        consistency.push(worst.as_f64());
    }
    let passed = symmetry
        .iter()
        .chain(&consistency)
        .all(|&r| r <= EXCHANGEABILITY_TOLERANCE);
    Ok(ExchangeabilityReport {
        symmetry,
        consistency,
        passed,
    })
}

/// Bases measured in fixed cyclic order: trial t uses `bases[t % len]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<T: Real = f64> {
    dim: usize,
    bases: Vec<MeasurementBasis<T>>,
}

impl<T: Real> Schedule<T> {
    /// Refuses families that are not tomographically complete.
    pub fn new(bases: Vec<MeasurementBasis<T>>) -> Result<Self> {
        let dim = bases
            .first()
            .map(MeasurementBasis::dim)
            .ok_or(Error::Incomplete { rank: 0, required: 0 })?;
        if let Some(b) = bases.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.dim(),
            });
        }
        require_complete(dim, &bases)?;
        Ok(Self { dim, bases })
    }

    /// The computational basis, then for each pair j < k the bases that
    /// replace |j⟩, |k⟩ by (|j⟩ ± |k⟩)/√2 and by (|j⟩ ± i|k⟩)/√2. For a
    /// qubit this is Z, X, Y.
    pub fn standard(dim: usize) -> Result<Self> {
        let mut bases = vec![MeasurementBasis::computational(dim)?];
        let s = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        for j in 0..dim {
            for k in j + 1..dim {
                for phase in [Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::one())] {
                    let mut kets = Vec::with_capacity(dim);
                    for m in 0..dim {
                        if m == j || m == k {
                            let sign = if m == j { T::one() } else { -T::one() };
                            let mut v = vec![Complex::new(T::zero(), T::zero()); dim];
                            v[j] = Complex::new(s, T::zero());
                            v[k] = phase * Complex::new(s * sign, T::zero());
                            kets.push(Ket::new(v)?);
                        } else {
                            kets.push(Ket::basis(dim, m)?);
                        }
                    }
                    bases.push(MeasurementBasis::from_kets(&kets)?);
                }
            }
        }
        Self::new(bases)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bases(&self) -> &[MeasurementBasis<T>] {
        &self.bases
    }

    pub fn basis_for(&self, trial: usize) -> &MeasurementBasis<T> {
        &self.bases[trial % self.bases.len()]
    }
}

/// Outcomes of `n` trials on copies of `truth`, following `schedule`.
pub fn simulate_data<T: Real>(
    truth: &DensityOperator<T>,
    schedule: &Schedule<T>,
    n: usize,
    rng: &mut SeededRng,
) -> Result<OutcomeRecord> {
    if truth.dim() != schedule.dim {
        return Err(Error::DimensionMismatch {
            expected: schedule.dim,
            found: truth.dim(),
        });
    }
    let samplers: Vec<InverseCdf> = schedule
        .bases
        .iter()
        .map(|b| {
            let probs: Vec<f64> = b
                .projectors()
                .iter()
                .map(|p| trace_product_re(truth.matrix(), p.matrix()).as_f64())
                .collect();
            InverseCdf::new(&probs)
        })
        .collect();
    let seq = (0..n)
        .map(|t| samplers[t % samplers.len()].draw(rng))
        .collect();
    OutcomeRecord::new(truth.dim(), seq)
}

/// Per-trial likelihood table: `table[b][k][j]` = tr(ρ_j Π_k^{(b)}).
fn likelihood_table<T: Real>(gen: &GeneratingFunction<T>, schedule: &Schedule<T>) -> Vec<Vec<Vec<T>>> {
    schedule
        .bases
        .iter()
        .map(|b| {
            b.projectors()
                .iter()
                .map(|pk| {
                    gen.particles
                        .iter()
                        .map(|p| trace_product_re(p.state.matrix(), pk.matrix()))
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn check_data<T: Real>(gen: &GeneratingFunction<T>, schedule: &Schedule<T>, data: &OutcomeRecord) -> Result<()> {
    for found in [schedule.dim, data.dim()] {
        if found != gen.dim {
            return Err(Error::DimensionMismatch {
                expected: gen.dim,
                found,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographyStep<T: Real = f64> {
    pub trial: usize,
    pub outcome: usize,
    pub distance_to_truth: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tomography<T: Real = f64> {
    pub posterior: GeneratingFunction<T>,
    pub mean: DensityOperator<T>,
    pub steps: Vec<TomographyStep<T>>,
}

impl<T: Real> Tomography<T> {
    pub fn final_distance(&self) -> Option<T> {
        self.steps.last().and_then(|s| s.distance_to_truth)
    }
}

/// Sequential Bayes updates over `data`; trial t was measured in
/// `schedule.basis_for(t)`.
pub fn run_tomography<T: Real>(
    prior: &GeneratingFunction<T>,
    schedule: &Schedule<T>,
    data: &OutcomeRecord,
    truth: Option<&DensityOperator<T>>,
) -> Result<Tomography<T>> {
    check_data(prior, schedule, data)?;
    let table = likelihood_table(prior, schedule);
    let nb = schedule.bases.len();
    let mut gen = prior.clone();
    let mut steps = Vec::with_capacity(data.len());
    for (t, &k) in data.sequence().iter().enumerate() {
        gen.reweight(table[t % nb][k].iter().copied(), t)?;
        let distance_to_truth = match truth {
            Some(rho) => Some(trace_distance(&gen.mean_state(), rho)?),
            None => None,
        };
        steps.push(TomographyStep {
            trial: t,
            outcome: k,
            distance_to_truth,
        });
    }
    let mean = gen.mean_state();
    Ok(Tomography {
        posterior: gen,
        mean,
        steps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementStep<T: Real = f64> {
    pub trial: usize,
    pub outcome: usize,
    pub interagent: T,
    pub distance_a: Option<T>,
    pub distance_b: Option<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agreement<T: Real = f64> {
    pub steps: Vec<AgreementStep<T>>,
    pub posterior_a: GeneratingFunction<T>,
    pub posterior_b: GeneratingFunction<T>,
    pub mean_a: DensityOperator<T>,
    pub mean_b: DensityOperator<T>,
    pub final_interagent: T,
    /// Final inter-agent distance is below its value after the first tenth of the data.
    pub decreasing: bool,
    /// Final inter-agent distance is below [`AGREEMENT_TOLERANCE`].
    pub converged: bool,
}

/// Which agent's prior could not explain the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agent {
    A,
    B,
}

#[derive(Debug, thiserror::Error)]
#[error("agent {agent:?}: {source}")]
pub struct AgentError {
    pub agent: Agent,
    #[source]
    pub source: Error,
}

/// Two agents update on the same data; reports the distance between their
/// posterior means after every trial.
pub fn agent_agreement<T: Real>(
    prior_a: &GeneratingFunction<T>,
    prior_b: &GeneratingFunction<T>,
    schedule: &Schedule<T>,
    data: &OutcomeRecord,
    truth: Option<&DensityOperator<T>>,
) -> std::result::Result<Agreement<T>, AgentError> {
    let tag = |agent| move |source| AgentError { agent, source };
    check_data(prior_a, schedule, data).map_err(tag(Agent::A))?;
    check_data(prior_b, schedule, data).map_err(tag(Agent::B))?;
    let table_a = likelihood_table(prior_a, schedule);
    let table_b = likelihood_table(prior_b, schedule);
    let nb = schedule.bases.len();
    let (mut a, mut b) = (prior_a.clone(), prior_b.clone());
    let dist = |x: &DensityOperator<T>, y: &DensityOperator<T>| trace_distance(x, y);
    let mut steps = Vec::with_capacity(data.len());
    for (t, &k) in data.sequence().iter().enumerate() {
        a.reweight(table_a[t % nb][k].iter().copied(), t).map_err(tag(Agent::A))?;
        b.reweight(table_b[t % nb][k].iter().copied(), t).map_err(tag(Agent::B))?;
        let (ma, mb) = (a.mean_state(), b.mean_state());
        let to_truth = |m: &DensityOperator<T>| truth.map(|r| dist(m, r)).transpose();
        steps.push(AgreementStep {
            trial: t,
            outcome: k,
            interagent: dist(&ma, &mb).map_err(tag(Agent::A))?,
            distance_a: to_truth(&ma).map_err(tag(Agent::A))?,
            distance_b: to_truth(&mb).map_err(tag(Agent::B))?,
        });
    }
    let (mean_a, mean_b) = (a.mean_state(), b.mean_state());
    let final_interagent = dist(&mean_a, &mean_b).map_err(tag(Agent::A))?;
    let early = steps
        .get(steps.len() / 10)
        .map(|s| s.interagent)
        .unwrap_or(final_interagent);
    Ok(Agreement {
        decreasing: final_interagent < early || final_interagent == T::zero(),
        converged: final_interagent < T::lit(AGREEMENT_TOLERANCE),
        steps,
        posterior_a: a,
        posterior_b: b,
        mean_a,
        mean_b,
        final_interagent,
    })
}

/// `{"dim": D, "particles": [{"w": r, "state": <state JSON>}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratingFunctionJson {
    pub dim: usize,
    pub particles: Vec<ParticleJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleJson {
    pub w: f64,
    pub state: StateJson,
}

impl GeneratingFunctionJson {
    pub fn from_generator<T: Real>(gen: &GeneratingFunction<T>) -> Self {
        Self {
            dim: gen.dim,
            particles: gen
                .particles
                .iter()
                .map(|p| ParticleJson {
                    w: p.weight.as_f64(),
                    state: StateJson::from_state(&p.state),
                })
                .collect(),
        }
    }

    pub fn to_generator<T: Real>(&self) -> Result<GeneratingFunction<T>> {
        let particles = self
            .particles
            .iter()
            .map(|p| {
                Ok(Particle {
                    weight: T::lit(p.w),
                    state: p.state.to_state()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GeneratingFunction::new(self.dim, particles)
    }
}
