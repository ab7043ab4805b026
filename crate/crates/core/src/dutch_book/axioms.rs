use serde::{Deserialize, Serialize};

use super::{audit_with, Arithmetic, Event, OutcomeSpace, Quote, PROBABILITY_TOLERANCE};
use crate::error::Result;

/// The four probability rules a coherent bettor obeys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// (i) p ≥ 0. Also flags p > 1, which forces a negative complement.
    NonNegativity,
    /// (ii) p(A∨B) = p(A) + p(B) for disjoint A, B.
    Additivity,
    /// (iii) p(A∧B) = p(A|B)·p(B), audited only when conditionals are quoted.
    Product,
    /// (iv) p = 1 on the certain event.
    Certainty,
    /// (i), (ii) or (iv) violated on events implied by, but not among, the quotes.
    Implied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    /// Indices of the quotes involved.
    pub quotes: Vec<usize>,
    pub residual: f64,
}

/// Quoted p(A | B).
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalQuote {
    pub event: Event,
    pub given: Event,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub space: OutcomeSpace,
    pub quotes: Vec<Quote>,
    pub conditionals: Vec<ConditionalQuote>,
}

impl Assignment {
    pub fn new(space: OutcomeSpace, quotes: Vec<Quote>) -> Self {
        Self {
            space,
            quotes,
            conditionals: Vec::new(),
        }
    }

    fn find(&self, event: &Event) -> Option<usize> {
        self.quotes.iter().position(|q| &q.event == event)
    }
}

/// Lists every violated rule. Without conditionals the list is empty exactly
/// when [`audit`](super::audit) finds the quotes coherent.
pub fn check_axioms(assignment: &Assignment) -> Result<Vec<Violation>> {
    let tol = PROBABILITY_TOLERANCE;
    let quotes = &assignment.quotes;
    let mut out = Vec::new();

    for (i, q) in quotes.iter().enumerate() {
        if q.probability < -tol {
            out.push(Violation {
                rule: Rule::NonNegativity,
                quotes: vec![i],
                residual: -q.probability,
            });
        } else if q.probability > 1.0 + tol {
            out.push(Violation {
                rule: Rule::NonNegativity,
                quotes: vec![i],
                residual: q.probability - 1.0,
            });
        }
    }

    for (i, a) in quotes.iter().enumerate() {
        for (j, b) in quotes.iter().enumerate().skip(i + 1) {
            if !a.event.is_disjoint(&b.event) {
                continue;
            }
            if let Some(k) = assignment.find(&a.event.union(&b.event)) {
                if k == i || k == j {
                    continue;
                }
                let gap = a.probability + b.probability - quotes[k].probability;
                if gap.abs() > tol {
                    out.push(Violation {
                        rule: Rule::Additivity,
                        quotes: vec![i, j, k],
                        residual: gap.abs(),
                    });
                }
            }
        }
    }

    let certain = assignment.space.certain();
    for (i, q) in quotes.iter().enumerate() {
        if q.event == certain && (q.probability - 1.0).abs() > tol {
            out.push(Violation {
                rule: Rule::Certainty,
                quotes: vec![i],
                residual: (1.0 - q.probability).abs(),
            });
        }
    }

    if out.is_empty() && !quotes.is_empty() {
        let verdict = audit_with(&assignment.space, quotes, Arithmetic::Exact, tol)?;
        if !verdict.coherent {
            out.push(Violation {
                rule: Rule::Implied,
                quotes: (0..quotes.len()).collect(),
                residual: verdict.mismatch,
            });
        }
    }

    for cq in &assignment.conditionals {
        let joint = assignment.find(&cq.event.intersection(&cq.given));
        let given = assignment.find(&cq.given);
        if let (Some(j), Some(g)) = (joint, given) {
            let gap = cq.probability * quotes[g].probability - quotes[j].probability;
            if gap.abs() > tol {
                out.push(Violation {
                    rule: Rule::Product,
                    quotes: vec![j, g],
                    residual: gap.abs(),
                });
            }
        }
    }
    Ok(out)
}
