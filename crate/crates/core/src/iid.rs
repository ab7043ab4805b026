//! Repeated measurements on product states: sequence probabilities,
//! multinomial counts, sampling and frequency diagnostics.
//!
//! Outcome indices are 0-based throughout, including the CSV format.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::gleason::{basis_distribution, trace_product_re};
use crate::operator::{kron, linalg::composite_dim, tensor_power, CMatrix, DensityOperator, MeasurementBasis};
use crate::rng::SeededRng;
use crate::scalar::Real;

/// Outcome sequence k_1..k_N over D outcomes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeRecord {
    dim: usize,
    sequence: Vec<usize>,
}

impl OutcomeRecord {
    pub fn new(dim: usize, sequence: Vec<usize>) -> Result<Self> {
        if let Some(&index) = sequence.iter().find(|&&k| k >= dim) {
            return Err(Error::OutcomeOutOfRange { index, dim });
        }
        Ok(Self { dim, sequence })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// n_1..n_D
    pub fn counts(&self) -> Vec<u64> {
        let mut n = vec![0u64; self.dim];
        for &k in &self.sequence {
            n[k] += 1;
        }
        n
    }

    /// `index,outcome` with one row per trial.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["index", "outcome"]).expect("in-memory write");
        for (i, k) in self.sequence.iter().enumerate() {
            w.serialize((i, k)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("ascii")
    }

    pub fn from_csv(dim: usize, text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(|e| Error::Malformed(e.to_string()))?;
        if headers != vec!["index", "outcome"] {
            return Err(Error::Malformed(format!("unexpected CSV header {headers:?}")));
        }
        let mut sequence = Vec::new();
        for (row, rec) in r.deserialize::<(usize, usize)>().enumerate() {
            let (i, k) = rec.map_err(|e| Error::Malformed(e.to_string()))?;
            if i != row {
                return Err(Error::Malformed(format!("row {row} has index {i}")));
            }
            sequence.push(k);
        }
        Self::new(dim, sequence)
    }
}

fn check_dims<T: Real>(rho: &DensityOperator<T>, basis: &MeasurementBasis<T>, dim: usize) -> Result<()> {
    for found in [basis.dim(), dim] {
        if found != rho.dim() {
            return Err(Error::DimensionMismatch {
                expected: rho.dim(),
                found,
            });
        }
    }
    Ok(())
}

/// p_{k_1}·…·p_{k_N} with p_k = tr(ρΠ_k): every copy carries the same ρ.
pub fn sequence_probability<T: Real>(
    rho: &DensityOperator<T>,
    basis: &MeasurementBasis<T>,
    record: &OutcomeRecord,
) -> Result<T> {
    check_dims(rho, basis, record.dim())?;
    let p = basis_distribution(rho, basis)?;
    Ok(record.sequence().iter().fold(T::one(), |acc, &k| acc * p[k]))
}

/// tr(ρ^{⊗N} Π_{k_1}⊗…⊗Π_{k_N}) evaluated on the explicit composite space.
pub fn sequence_probability_tensor<T: Real>(
    rho: &DensityOperator<T>,
    basis: &MeasurementBasis<T>,
    record: &OutcomeRecord,
    cap: usize,
) -> Result<T> {
    check_dims(rho, basis, record.dim())?;
    let n = record.len();
    if n == 0 {
        return Ok(T::one());
    }
    let requested = composite_dim(rho.dim(), n).unwrap_or(usize::MAX);
    if requested > cap {
        return Err(Error::CompositeCapExceeded { requested, cap });
    }
    let big = tensor_power(rho, n, cap)?;
    let mut proj: CMatrix<T> = CMatrix::from_element(1, 1, Complex::new(T::one(), T::zero()));
    for &k in record.sequence() {
        proj = kron(&proj, basis.projectors()[k].matrix());
    }
    Ok(trace_product_re(big.matrix(), &proj))
}

fn check_distribution(probs: &[f64]) -> Result<()> {
    if probs.iter().any(|&p| p.is_nan() || p < 0.0) {
        return Err(Error::Invariant {
            invariant: "probability non-negativity",
            residual: probs.iter().copied().fold(0.0, f64::min).abs(),
        });
    }
    let s: f64 = probs.iter().sum();
    if (s - 1.0).abs() > 1e-10 {
        return Err(Error::Invariant {
            invariant: "probability normalization",
            residual: (s - 1.0).abs(),
        });
    }
    Ok(())
}

/// Largest N for which the multinomial coefficient is computed in exact integers.
pub const EXACT_MULTINOMIAL_MAX_N: u64 = 20;

/// N!/(n_1!…n_D!)·Π p_k^{n_k}.
pub fn multinomial_probability(probs: &[f64], counts: &[u64]) -> Result<f64> {
    check_distribution(probs)?;
    if probs.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            found: counts.len(),
        });
    }
    let n: u64 = counts.iter().sum();
    if counts.iter().zip(probs).any(|(&c, &p)| c > 0 && p == 0.0) {
        return Ok(0.0);
    }
    if n <= EXACT_MULTINOMIAL_MAX_N {
        let mut coef: u128 = 1;
        let mut seen: u128 = 0;
        for &c in counts {
            // running product of binomials C(seen + c, c) stays integral
            for j in 1..=c {
                seen += 1;
                coef = coef * seen / j as u128;
            }
        }
        let power: f64 = counts
            .iter()
            .zip(probs)
            .map(|(&c, &p)| p.powi(c as i32))
            .product();
        return Ok(coef as f64 * power);
    }
    let mut log = ln_gamma(n as f64 + 1.0);
    for (&c, &p) in counts.iter().zip(probs) {
        if c > 0 {
            log += c as f64 * p.ln() - ln_gamma(c as f64 + 1.0);
        }
    }
    Ok(log.exp())
}

/// N i.i.d. draws from the Born distribution by inverse CDF over outcomes
/// in basis order.
pub fn sample_sequence<T: Real>(
    rho: &DensityOperator<T>,
    basis: &MeasurementBasis<T>,
    n: usize,
    rng: &mut SeededRng,
) -> Result<OutcomeRecord> {
    check_dims(rho, basis, rho.dim())?;
    let probs: Vec<f64> = basis_distribution(rho, basis)?.into_iter().map(Real::as_f64).collect();
    let sampler = InverseCdf::new(&probs);
    let sequence = (0..n).map(|_| sampler.draw(rng)).collect();
    OutcomeRecord::new(rho.dim(), sequence)
}

/// Fixed-order inverse-CDF sampler over a finite distribution.
#[derive(Debug, Clone)]
pub(crate) struct InverseCdf {
    cdf: Vec<f64>,
    last_positive: usize,
}

impl InverseCdf {
    pub(crate) fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|&p| {
                acc += p.max(0.0);
                acc
            })
            .collect();
        let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        Self { cdf, last_positive }
    }

    pub(crate) fn draw(&self, rng: &mut SeededRng) -> usize {
        let u: f64 = rng.random();
        self.cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.last_positive)
    }
}

/// `{"deviations": [...], "c": r, "within": bool}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyReport {
    /// |n_k/N − p_k| per outcome.
    pub deviations: Vec<f64>,
    pub c: f64,
    /// Every deviation is at most c/√N.
    pub within: bool,
}

impl FrequencyReport {
    pub fn max_deviation(&self) -> f64 {
        self.deviations.iter().copied().fold(0.0, f64::max)
    }
}

pub fn frequency_report(record: &OutcomeRecord, probs: &[f64], c: f64) -> Result<FrequencyReport> {
    if record.is_empty() {
        return Err(Error::Malformed("frequency report needs at least one trial".into()));
    }
    if probs.len() != record.dim() {
        return Err(Error::DimensionMismatch {
            expected: record.dim(),
            found: probs.len(),
        });
    }
    let n = record.len() as f64;
    let deviations: Vec<f64> = record
        .counts()
        .iter()
        .zip(probs)
        .map(|(&k, &p)| (k as f64 / n - p).abs())
        .collect();
    let band = c / n.sqrt();
    Ok(FrequencyReport {
        within: deviations.iter().all(|&d| d <= band),
        deviations,
        c,
    })
}

/// Per-outcome check |n_k/N − p_k| < c·√(p_k(1 − p_k)/N).
pub fn within_binomial_band(record: &OutcomeRecord, probs: &[f64], c: f64) -> Result<bool> {
    let report = frequency_report(record, probs, c)?;
    let n = record.len() as f64;
    Ok(report
        .deviations
        .iter()
        .zip(probs)
        .all(|(&d, &p)| d < c * (p * (1.0 - p) / n).sqrt() || d == 0.0))
}
