//! Probability vectors over a finite action set and the per-agent belief
//! profiles built from them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used for simplex membership checks.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A 1-based action index into a game's action set `{1, ..., m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(usize);

impl ActionId {
    pub fn new(index: usize, m: usize) -> Result<Self> {
        if index == 0 || index > m {
            return Err(Error::domain(format!("action {index} outside 1..={m}")));
        }
        Ok(ActionId(index))
    }

    /// Builds an action from a 0-based slot. Callers guarantee `slot < m`.
    pub(crate) fn from_slot(slot: usize) -> Self {
        ActionId(slot + 1)
    }

    pub fn index(self) -> usize {
        self.0
    }

    /// Position of this action in a probability vector.
    pub fn slot(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A mixed strategy: nonnegative weights over `m` actions summing to one.
///
/// Empirical histograms, centroid estimates, and beliefs about other agents
/// all share this representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Strategy(Vec<f64>);

impl Strategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("strategy over an empty action set"));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < -SIMPLEX_TOL) {
            return Err(Error::domain(format!("strategy entry {p} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::domain(format!("strategy sums to {total}, expected 1")));
        }
        Ok(Strategy(probs))
    }

    pub fn uniform(m: usize) -> Self {
        assert!(m > 0, "uniform strategy over an empty action set");
        Strategy(vec![1.0 / m as f64; m])
    }

    /// The point mass on `a`.
    pub fn pure(a: ActionId, m: usize) -> Result<Self> {
        indicator(a.index(), m)
    }

    /// Wraps a vector that is a convex combination of valid strategies.
    pub(crate) fn from_mixture(probs: Vec<f64>) -> Self {
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        Strategy(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn num_actions(&self) -> usize {
        self.0.len()
    }

    pub fn prob(&self, a: ActionId) -> f64 {
        self.0[a.slot()]
    }

    /// Euclidean distance between probability vectors.
    pub fn distance(&self, other: &Strategy) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Expectation of `values[k]` under this strategy.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        self.0.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Actions with positive probability, in index order.
    pub fn support(&self) -> impl Iterator<Item = (ActionId, f64)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| (ActionId::from_slot(k), *p))
    }
}

impl TryFrom<Vec<f64>> for Strategy {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Strategy::new(v)
    }
}

impl From<Strategy> for Vec<f64> {
    fn from(s: Strategy) -> Self {
        s.0
    }
}

/// The unit vector with a one in position `a` (1-based).
pub fn indicator(a: usize, m: usize) -> Result<Strategy> {
    let a = ActionId::new(a, m)?;
    let mut probs = vec![0.0; m];
    probs[a.slot()] = 1.0;
    Ok(Strategy(probs))
}

/// What agent `owner` believes about the play of every other agent.
#[derive(Clone, Debug, PartialEq)]
pub struct BeliefProfile {
    owner: usize,
    // indexed by agent, `None` only at `owner`
    beliefs: Vec<Option<Strategy>>,
}

impl BeliefProfile {
    /// Builds a profile from one strategy per agent; the owner's slot is dropped.
    pub fn from_full(owner: usize, strategies: &[Strategy]) -> Result<Self> {
        let n = strategies.len();
        if owner >= n {
            return Err(Error::domain(format!("owner {owner} outside 0..{n}")));
        }
        let m = strategies[0].num_actions();
        if strategies.iter().any(|s| s.num_actions() != m) {
            return Err(Error::domain("strategies over different action counts"));
        }
        let beliefs = strategies
            .iter()
            .enumerate()
            .map(|(j, s)| (j != owner).then(|| s.clone()))
            .collect();
        Ok(BeliefProfile { owner, beliefs })
    }

    /// Every other agent is believed to follow `s`.
    pub fn consensus(owner: usize, n: usize, s: &Strategy) -> Result<Self> {
        if owner >= n {
            return Err(Error::domain(format!("owner {owner} outside 0..{n}")));
        }
        let beliefs = (0..n).map(|j| (j != owner).then(|| s.clone())).collect();
        Ok(BeliefProfile { owner, beliefs })
    }

    pub fn owner(&self) -> usize {
        self.owner
    }

    pub fn num_agents(&self) -> usize {
        self.beliefs.len()
    }

    pub fn num_actions(&self) -> usize {
        self.others().next().map_or(0, |(_, s)| s.num_actions())
    }

    /// Belief about agent `j`; `None` for the owner.
    pub fn get(&self, j: usize) -> Option<&Strategy> {
        self.beliefs.get(j).and_then(Option::as_ref)
    }

    /// `(agent, belief)` pairs for every agent other than the owner.
    pub fn others(&self) -> impl Iterator<Item = (usize, &Strategy)> + '_ {
        self.beliefs
            .iter()
            .enumerate()
            .filter_map(|(j, s)| s.as_ref().map(|s| (j, s)))
    }
}
