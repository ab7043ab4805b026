use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::lp::{maximize, LpOutcome};
use super::{BettingBook, OutcomeSpace, Quote, PROBABILITY_TOLERANCE};
use crate::error::{Error, Result};
use crate::scalar::LpScalar;

/// Field used for the feasibility linear programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Arithmetic {
    /// Quotes are read as the decimals they print as and pivoted exactly.
    #[default]
    Exact,
    /// Double precision; the witness check decides, with exact fallback.
    Float,
}

/// Certificate of coherence or of a Dutch book.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// A distribution over atomic outcomes reproducing every quote.
    Distribution { q: Vec<f64> },
    /// One payoff per quote; the bettor loses on every outcome.
    SureLoss { payoffs: Vec<f64> },
}

/// Direct re-evaluation of a witness against the original quotes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verification {
    /// |q(E_i) − p_i| per quote for a distribution, net return per outcome
    /// for a sure-loss book.
    pub residuals: Vec<f64>,
    /// Largest residual (distribution) or least-negative return (sure loss).
    pub worst: f64,
    pub verified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceVerdict {
    pub coherent: bool,
    pub witness: Witness,
    /// Smallest total |q(E_i) − p_i| over distributions q. Equals the
    /// guaranteed loss a bookie can force with payoffs bounded by 1.
    pub mismatch: f64,
    pub arithmetic: Arithmetic,
    pub verification: Verification,
}

impl CoherenceVerdict {
    /// Guaranteed loss with unit-bounded payoffs, when incoherent.
    pub fn sure_loss(&self) -> Option<f64> {
        (!self.coherent).then_some(self.mismatch)
    }
}

/// Audits quotes for Dutch-book coherence with exact arithmetic and the
/// default 1e-9 tolerance.
pub fn audit(space: &OutcomeSpace, quotes: &[Quote]) -> Result<CoherenceVerdict> {
    audit_with(space, quotes, Arithmetic::Exact, PROBABILITY_TOLERANCE)
}

pub fn audit_with(
    space: &OutcomeSpace,
    quotes: &[Quote],
    arithmetic: Arithmetic,
    tolerance: f64,
) -> Result<CoherenceVerdict> {
    if quotes.is_empty() {
        return Err(Error::Malformed("audit needs at least one quote".into()));
    }
    for q in quotes {
        space.check(&q.event)?;
        if !q.probability.is_finite() {
            return Err(Error::Malformed("quoted probability is not finite".into()));
        }
    }
    let raw = match arithmetic {
        Arithmetic::Exact => solve::<BigRational>(space, quotes, tolerance)?,
        Arithmetic::Float => solve::<f64>(space, quotes, tolerance)?,
    };
    let verification = verify_witness(space, quotes, &raw.witness, tolerance)?;
    if !verification.verified && arithmetic == Arithmetic::Float {
        return audit_with(space, quotes, Arithmetic::Exact, tolerance);
    }
    Ok(CoherenceVerdict {
        coherent: matches!(raw.witness, Witness::Distribution { .. }),
        witness: raw.witness,
        mismatch: raw.mismatch,
        arithmetic,
        verification,
    })
}

/// Re-checks a witness by direct evaluation, independent of the solver.
pub fn verify_witness(
    space: &OutcomeSpace,
    quotes: &[Quote],
    witness: &Witness,
    tolerance: f64,
) -> Result<Verification> {
    match witness {
        Witness::Distribution { q } => {
            if q.len() != space.len() {
                return Err(Error::DimensionMismatch {
                    expected: space.len(),
                    found: q.len(),
                });
            }
            let residuals: Vec<f64> = quotes
                .iter()
                .map(|quote| {
                    let mass: f64 = quote.event.members().map(|o| q[o]).sum();
                    (mass - quote.probability).abs()
                })
                .collect();
            let worst = residuals.iter().copied().fold(0.0, f64::max);
            let total: f64 = q.iter().sum();
            let verified = worst <= tolerance + 1e-12
                && q.iter().all(|&v| v >= -1e-12)
                && (total - 1.0).abs() <= 1e-12;
            Ok(Verification {
                residuals,
                worst,
                verified,
            })
        }
        Witness::SureLoss { payoffs } => {
            let book = BettingBook::from_quotes(space.clone(), quotes, payoffs)?;
            let residuals = book.returns();
            let worst = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(Verification {
                verified: worst < 0.0,
                residuals,
                worst,
            })
        }
    }
}

struct Raw {
    witness: Witness,
    mismatch: f64,
}

fn convert<S: LpScalar>(x: f64) -> Result<S> {
    S::from_decimal(x).ok_or_else(|| Error::Malformed(format!("{x} is not representable")))
}

/// Solves the mismatch program over `S`; its duals give the sure-loss book.
fn solve<S: LpScalar>(space: &OutcomeSpace, quotes: &[Quote], tolerance: f64) -> Result<Raw> {
    let m = space.len();
    let k = quotes.len();
    let p: Vec<S> = quotes
        .iter()
        .map(|q| convert(q.probability))
        .collect::<Result<_>>()?;
    let hit = |i: usize, o: usize| -> S {
        if quotes[i].event.contains(o) {
            S::one()
        } else {
            S::zero()
        }
    };

    // Minimum L1 mismatch. Variables: q (m), e+ (k), e- (k).
    //   Σ q = 1
    //   Σ_{o∈E_i} q_o − e+_i + e-_i = p_i
    // maximize −Σ (e+ + e-)
    let n = m + 2 * k;
    let mut a = Vec::with_capacity(k + 1);
    let mut b = Vec::with_capacity(k + 1);
    let mut row = vec![S::zero(); n];
    for v in row.iter_mut().take(m) {
        *v = S::one();
    }
    a.push(row);
    b.push(S::one());
    for i in 0..k {
        let mut row = vec![S::zero(); n];
        for (o, v) in row.iter_mut().enumerate().take(m) {
            *v = hit(i, o);
        }
        row[m + i] = -S::one();
        row[m + k + i] = S::one();
        a.push(row);
        b.push(p[i].clone());
    }
    let mut c = vec![S::zero(); n];
    for v in c.iter_mut().skip(m) {
        *v = -S::one();
    }
    let (q, value, duals) = match maximize(&a, &b, &c) {
        LpOutcome::Optimal { x, value, duals } => (x[..m].to_vec(), value, duals),
        _ => return Err(Error::Lp("mismatch program has no optimum")),
    };
    let mismatch = -value;
    if mismatch <= convert::<S>(tolerance)? {
        return Ok(Raw {
            witness: Witness::Distribution {
                q: q.iter().map(|v| v.to_f64_lossy()).collect(),
            },
            mismatch: mismatch.to_f64_lossy(),
        });
    }

    // The quote-row duals π satisfy |π_i| ≤ 1 and Σ_i π_i(1[o∈E_i] − p_i) ≥
    // mismatch on every outcome, so payoffs −π lose at least the mismatch.
    let pi = &duals[1..];
    let margin = (0..m)
        .map(|o| {
            (0..k).fold(S::zero(), |acc, i| acc + pi[i].clone() * (hit(i, o) - p[i].clone()))
        })
        .reduce(|x, y| if y < x { y } else { x })
        .expect("outcome space is nonempty");
    if !margin.is_pos() {
        return Err(Error::Lp("dual prices give no strictly positive margin"));
    }
    // Scale so the best outcome for the bettor returns −1.
    let payoffs = pi
        .iter()
        .map(|y| (-y.clone() / margin.clone()).to_f64_lossy())
        .collect();
    Ok(Raw {
        witness: Witness::SureLoss { payoffs },
        mismatch: mismatch.to_f64_lossy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dutch_book::Event;
    use crate::scalar::rational_from_decimal;
    use num_traits::ToPrimitive;

    fn disjoint_book(pa: f64, pb: f64, pc: f64) -> (OutcomeSpace, Vec<Quote>) {
        let s = OutcomeSpace::new(["a", "b", "none"]).unwrap();
        let quotes = vec![
            Quote { event: s.event(&["a"]).unwrap(), probability: pa },
            Quote { event: s.event(&["b"]).unwrap(), probability: pb },
            Quote { event: s.event(&["a", "b"]).unwrap(), probability: pc },
        ];
        (s, quotes)
    }

    /// Independent oracle: with A, B disjoint and C = A∨B every sure-loss
    /// book is a multiple of the determinant direction, so the mismatch is
    /// exactly |p_A + p_B − p_C| whenever p_A + p_B ≤ 1 and p_C ≤ 1.
    fn determinant(pa: f64, pb: f64, pc: f64) -> f64 {
        pa + pb - pc
    }

    #[test]
    fn additivity_violation_is_a_dutch_book() {
        let (s, q) = disjoint_book(0.3, 0.4, 0.6);
        let v = audit(&s, &q).unwrap();
        assert!(!v.coherent);
        assert!(v.verification.verified);
        assert!((v.mismatch - determinant(0.3, 0.4, 0.6).abs()).abs() < 1e-15);
        let Witness::SureLoss { payoffs } = &v.witness else { panic!() };
        let book = BettingBook::from_quotes(s, &q, payoffs).unwrap();
        let returns = book.returns();
        assert!(returns.iter().all(|&r| r <= -1.0 + 1e-12));
        let best = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((best + 1.0).abs() < 1e-12);
    }

    #[test]
    fn additive_quotes_extend_to_a_distribution() {
        let (s, q) = disjoint_book(0.3, 0.4, 0.7);
        let v = audit(&s, &q).unwrap();
        assert!(v.coherent);
        assert_eq!(v.mismatch, 0.0);
        let Witness::Distribution { q: dist } = &v.witness else { panic!() };
        // constructed directly: q = (p_A, p_B, 1 − p_C)
        for (got, want) in dist.iter().zip([0.3, 0.4, 0.3]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn negative_probability_is_incoherent() {
        let s = OutcomeSpace::new(["a", "b"]).unwrap();
        let q = vec![Quote { event: s.event(&["a"]).unwrap(), probability: -0.1 }];
        let v = audit(&s, &q).unwrap();
        assert!(!v.coherent && v.verification.verified);
    }

    #[test]
    fn certain_event_loss_is_one_minus_p() {
        let s = OutcomeSpace::new(["a", "b"]).unwrap();
        let q = vec![Quote { event: s.certain(), probability: 0.9 }];
        let v = audit(&s, &q).unwrap();
        assert!(!v.coherent);
        let exact = rational_from_decimal(1.0).unwrap() - rational_from_decimal(0.9).unwrap();
        assert_eq!(v.sure_loss().unwrap(), exact.to_f64().unwrap());
    }

    #[test]
    fn float_and_exact_agree() {
        for (pa, pb, pc) in [(0.3, 0.4, 0.6), (0.3, 0.4, 0.7), (0.0, 1.0, 1.0), (0.5, 0.6, 1.0)] {
            let (s, q) = disjoint_book(pa, pb, pc);
            let e = audit_with(&s, &q, Arithmetic::Exact, 1e-9).unwrap();
            let f = audit_with(&s, &q, Arithmetic::Float, 1e-9).unwrap();
            assert_eq!(e.coherent, f.coherent);
            assert!((e.mismatch - f.mismatch).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_empty_and_foreign_quotes() {
        let s = OutcomeSpace::indexed(2).unwrap();
        assert!(audit(&s, &[]).is_err());
        let q = vec![Quote { event: Event::from_indices([3]), probability: 0.5 }];
        assert!(matches!(audit(&s, &q), Err(Error::EventOutsideSpace(_))));
    }

    #[test]
    fn tampered_witness_fails_verification() {
        let (s, q) = disjoint_book(0.3, 0.4, 0.6);
        let bad = Witness::SureLoss { payoffs: vec![1.0, 1.0, 1.0] };
        assert!(!verify_witness(&s, &q, &bad, 1e-9).unwrap().verified);
        let bad = Witness::Distribution { q: vec![0.3, 0.4, 0.3] };
        assert!(!verify_witness(&s, &q, &bad, 1e-9).unwrap().verified);
    }
}
