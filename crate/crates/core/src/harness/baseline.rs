//! Centralized assignment for covering games.

use serde::{Deserialize, Serialize};

use super::scenario::{stream, BuiltGame, Scenario, Stream};
use crate::error::{Error, Result};
use crate::games::TargetCover;
use crate::strategy::ActionId;

/// Largest team whose assignments are enumerated.
pub const MAX_BASELINE_ROBOTS: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    /// Target chosen by each robot.
    pub assignment: Vec<ActionId>,
    /// Objective under the pooled estimate the assignment was chosen with.
    pub estimated_objective: f64,
    /// Objective at the true targets.
    pub objective: f64,
    /// Pooled estimate of the flattened target coordinates.
    pub pooled_estimate: Vec<f64>,
}

/// The one-robot-per-target assignment maximizing the global objective at
/// `theta`. Permutations are scanned in lexicographic order and the first
/// maximizer is kept.
pub fn best_assignment(game: &TargetCover, theta: &[f64]) -> Result<(Vec<ActionId>, f64)> {
    let n = game.robots().len();
    if n > MAX_BASELINE_ROBOTS {
        return Err(Error::Resource {
            what: "assignments",
            needed: (1..=n as u128).product(),
            cap: (1..=MAX_BASELINE_ROBOTS as u128).product(),
        });
    }
    if theta.len() != 2 * n {
        return Err(Error::domain(format!("expected {} target coordinates", 2 * n)));
    }

    fn scan(
        game: &TargetCover,
        theta: &[f64],
        prefix: &mut Vec<usize>,
        used: &mut Vec<bool>,
        best: &mut Option<(Vec<usize>, f64)>,
    ) {
        let n = used.len();
        if prefix.len() == n {
            let value: f64 = prefix
                .iter()
                .enumerate()
                .map(|(i, k)| TargetCover::reward(game.robots()[i], [theta[2 * k], theta[2 * k + 1]]))
                .sum();
            if best.as_ref().is_none_or(|(_, v)| value > *v) {
                *best = Some((prefix.clone(), value));
            }
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                scan(game, theta, prefix, used, best);
                prefix.pop();
                used[k] = false;
            }
        }
    }

    let mut best = None;
    scan(game, theta, &mut Vec::new(), &mut vec![false; n], &mut best);
    let (slots, value) = best.expect("at least one permutation");
    Ok((slots.into_iter().map(|k| ActionId::new(k + 1, n)).collect::<Result<_>>()?, value))
}

/// Pools every robot's initial signals into one estimate and assigns
/// targets to maximize the global objective under it. The signals are the
/// ones a run of the same scenario and seed starts from.
pub fn centralized_baseline(scenario: &Scenario) -> Result<Baseline> {
    let instance = scenario.instantiate()?;
    let BuiltGame::Cover(game) = &instance.game else {
        return Err(Error::config("game", "the centralized baseline needs a covering game"));
    };
    let mut learning = scenario.build_learning(&instance)?;
    learning.initial(&mut stream(scenario.seed, Stream::Signals))?;
    let pooled = learning.reference().ok_or_else(|| Error::domain("learning has no pooled estimate"))?.mean();
    let (assignment, estimated_objective) = best_assignment(game, &pooled)?;
    Ok(Baseline {
        objective: game.global_objective(&assignment, &game.state()),
        assignment,
        estimated_objective,
        pooled_estimate: pooled,
    })
}
