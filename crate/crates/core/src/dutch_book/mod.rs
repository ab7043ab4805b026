//! Betting books, per-outcome net returns, and coherence auditing.
//!
//! A bettor who quotes probability `p` for event `E` accepts, for any payoff
//! `x` the bookie names, to pay `p·x` up front and receive `x` if `E`
//! occurs. Events are extensional: sets of atomic outcomes.

mod audit;
mod axioms;
mod lp;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use audit::{
    audit, audit_with, verify_witness, Arithmetic, CoherenceVerdict, Verification, Witness,
};
pub use axioms::{check_axioms, Assignment, ConditionalQuote, Rule, Violation};

/// Default tolerance for probability identities.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Finite, ordered set of distinct atomic outcome labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeSpace {
    labels: Vec<String>,
}

impl OutcomeSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::Malformed("outcome space is empty".into()));
        }
        let mut seen = BTreeSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::Malformed(format!("duplicate outcome label {dup:?}")));
        }
        Ok(Self { labels })
    }

    /// Outcomes `0..n` labelled by their index.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownOutcome(label.to_string()))
    }

    /// Event from member labels.
    pub fn event<S: AsRef<str>>(&self, members: &[S]) -> Result<Event> {
        members
            .iter()
            .map(|m| self.index_of(m.as_ref()))
            .collect::<Result<BTreeSet<_>>>()
            .map(|members| Event { members })
    }

    pub fn certain(&self) -> Event {
        Event {
            members: (0..self.len()).collect(),
        }
    }

    fn check(&self, event: &Event) -> Result<()> {
        if event.members.iter().any(|&i| i >= self.len()) {
            return Err(Error::EventOutsideSpace(
                event.members.iter().map(|i| i.to_string()).collect(),
            ));
        }
        Ok(())
    }
}

/// Subset of an outcome space, by outcome index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Event {
    members: BTreeSet<usize>,
}

impl Event {
    pub fn from_indices<I: IntoIterator<Item = usize>>(members: I) -> Self {
        Self {
            members: members.into_iter().collect(),
        }
    }

    pub fn contains(&self, outcome: usize) -> bool {
        self.members.contains(&outcome)
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.members.is_disjoint(&other.members)
    }

    pub fn union(&self, other: &Event) -> Event {
        Event {
            members: self.members.union(&other.members).copied().collect(),
        }
    }

    pub fn intersection(&self, other: &Event) -> Event {
        Event {
            members: self.members.intersection(&other.members).copied().collect(),
        }
    }

    /// ¬E within `space`.
    pub fn complement(&self, space: &OutcomeSpace) -> Event {
        Event {
            members: (0..space.len()).filter(|i| !self.contains(*i)).collect(),
        }
    }
}

/// A quoted probability for an event, payoff left to the bookie.
#[derive(Debug, Clone, PartialEq)]
pub struct Quote {
    pub event: Event,
    pub probability: f64,
}

/// An accepted bet: stake `p·x` paid up front, payoff `x` if the event occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct Bet {
    pub event: Event,
    pub probability: f64,
    pub payoff: f64,
}

impl Bet {
    /// Net receipt x·(1[E] − p) on one atomic outcome.
    pub fn return_on(&self, outcome: usize) -> f64 {
        let hit = if self.event.contains(outcome) { 1.0 } else { 0.0 };
        self.payoff * (hit - self.probability)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BettingBook {
    space: OutcomeSpace,
    bets: Vec<Bet>,
}

impl BettingBook {
    pub fn new(space: OutcomeSpace, bets: Vec<Bet>) -> Result<Self> {
        for bet in &bets {
            space.check(&bet.event)?;
            if !bet.payoff.is_finite() {
                return Err(Error::Malformed("payoff is not finite".into()));
            }
        }
        Ok(Self { space, bets })
    }

    /// The book obtained by staking `payoffs` on each quote in order.
    pub fn from_quotes(space: OutcomeSpace, quotes: &[Quote], payoffs: &[f64]) -> Result<Self> {
        if quotes.len() != payoffs.len() {
            return Err(Error::DimensionMismatch {
                expected: quotes.len(),
                found: payoffs.len(),
            });
        }
        let bets = quotes
            .iter()
            .zip(payoffs)
            .map(|(q, &x)| Bet {
                event: q.event.clone(),
                probability: q.probability,
                payoff: x,
            })
            .collect();
        Self::new(space, bets)
    }

    pub fn space(&self) -> &OutcomeSpace {
        &self.space
    }

    pub fn bets(&self) -> &[Bet] {
        &self.bets
    }

    /// Σ_i x_i·(1[outcome ∈ E_i] − p_i).
    pub fn net_return(&self, outcome: &str) -> Result<f64> {
        let idx = self.space.index_of(outcome)?;
        Ok(self.net_return_at(idx))
    }

    pub fn net_return_at(&self, outcome: usize) -> f64 {
        self.bets.iter().map(|b| b.return_on(outcome)).sum()
    }

    /// Net return on every atomic outcome, in space order.
    pub fn returns(&self) -> Vec<f64> {
        (0..self.space.len()).map(|o| self.net_return_at(o)).collect()
    }
}

/// `{"outcomes": [...], "bets": [{"event": [labels], "p": r, "x": r?}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BookJson {
    pub outcomes: Vec<String>,
    pub bets: Vec<BetJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetJson {
    pub event: Vec<String>,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
}

impl BookJson {
    pub fn space(&self) -> Result<OutcomeSpace> {
        OutcomeSpace::new(self.outcomes.iter().cloned())
    }

    /// Quotes only; payoffs are ignored.
    pub fn quotes(&self) -> Result<(OutcomeSpace, Vec<Quote>)> {
        let space = self.space()?;
        let quotes = self
            .bets
            .iter()
            .map(|b| {
                Ok(Quote {
                    event: space.event(&b.event)?,
                    probability: b.p,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((space, quotes))
    }

    /// Full book; every bet must carry a payoff.
    pub fn book(&self) -> Result<BettingBook> {
        let space = self.space()?;
        let bets = self
            .bets
            .iter()
            .map(|b| {
                Ok(Bet {
                    event: space.event(&b.event)?,
                    probability: b.p,
                    payoff: b
                        .x
                        .ok_or_else(|| Error::Malformed("bet without payoff".into()))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        BettingBook::new(space, bets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn abc_space() -> OutcomeSpace {
        // A∧¬B, ¬A∧B, ¬A∧¬B; A∧B cannot occur.
        OutcomeSpace::new(["a", "b", "none"]).unwrap()
    }

    #[test]
    fn three_bet_returns_match_case_table() {
        let s = abc_space();
        let (pa, pb, pc) = (0.2, 0.5, 0.6);
        let (xa, xb, xc) = (1.5, -2.0, 0.7);
        let book = BettingBook::new(
            s.clone(),
            vec![
                Bet { event: s.event(&["a"]).unwrap(), probability: pa, payoff: xa },
                Bet { event: s.event(&["b"]).unwrap(), probability: pb, payoff: xb },
                Bet { event: s.event(&["a", "b"]).unwrap(), probability: pc, payoff: xc },
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(
            book.net_return("a").unwrap(),
            xa * (1.0 - pa) - xb * pb + xc * (1.0 - pc),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            book.net_return("b").unwrap(),
            -xa * pa + xb * (1.0 - pb) + xc * (1.0 - pc),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            book.net_return("none").unwrap(),
            -xa * pa - xb * pb - xc * pc,
            epsilon = 1e-15
        );
    }

    #[test]
    fn empty_book_and_certain_bet() {
        let s = abc_space();
        let empty = BettingBook::new(s.clone(), vec![]).unwrap();
        assert_eq!(empty.net_return("b").unwrap(), 0.0);
        let sure = BettingBook::new(
            s.clone(),
            vec![Bet { event: s.event(&["a"]).unwrap(), probability: 1.0, payoff: 17.0 }],
        )
        .unwrap();
        assert_eq!(sure.net_return("a").unwrap(), 0.0);
    }

    #[test]
    fn unknown_labels_are_rejected() {
        let s = abc_space();
        assert!(matches!(s.event(&["c"]), Err(Error::UnknownOutcome(_))));
        let book = BettingBook::new(s, vec![]).unwrap();
        assert!(matches!(book.net_return("zzz"), Err(Error::UnknownOutcome(_))));
        assert!(OutcomeSpace::new(["x", "x"]).is_err());
        assert!(OutcomeSpace::new(Vec::<String>::new()).is_err());
    }

    #[test]
    fn foreign_event_is_rejected() {
        let s = OutcomeSpace::indexed(2).unwrap();
        let bet = Bet { event: Event::from_indices([0, 5]), probability: 0.5, payoff: 1.0 };
        assert!(matches!(BettingBook::new(s, vec![bet]), Err(Error::EventOutsideSpace(_))));
    }

    #[test]
    fn book_json_round_trip() {
        let json = r#"{"outcomes":["a","b"],"bets":[{"event":["a"],"p":0.4,"x":2.0},{"event":["a","b"],"p":1.0}]}"#;
        let parsed: BookJson = serde_json::from_str(json).unwrap();
        let (space, quotes) = parsed.quotes().unwrap();
        assert_eq!(space.len(), 2);
        assert_eq!(quotes[1].event, space.certain());
        assert!(parsed.book().is_err());
        assert_eq!(serde_json::to_string(&parsed).unwrap(), json);
    }
}
