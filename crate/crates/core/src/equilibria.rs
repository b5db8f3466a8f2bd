//! Equilibrium sets, equilibrium distances and convergence diagnostics.

use rayon::prelude::*;

use crate::belief::{integration_nodes, StateBelief};
use crate::engine::{Trajectory, Variant};
use crate::error::{Error, Result};
use crate::game::{check_finite, for_each_profile, Game};
use crate::strategy::{ActionId, BeliefProfile, Strategy};

/// One mixed strategy per agent.
pub type StrategyProfile = Vec<Strategy>;

/// Default bound on the number of points any enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// Slack below which a deviation gain counts as zero.
const GAIN_TOL: f64 = 1e-9;

fn checked_count(base: usize, exp: usize, times: u128, what: &'static str, cap: u128) -> Result<u128> {
    let mut total = times;
    for _ in 0..exp {
        total = total.saturating_mul(base as u128);
    }
    if total > cap {
        return Err(Error::Resource { what, needed: total, cap });
    }
    Ok(total)
}

fn tolerance(scale: f64) -> f64 {
    GAIN_TOL * scale.abs().max(1.0)
}

/// Largest gain any single agent can get by a pure deviation, minus the
/// numerical slack scaled to the agent's payoff.
fn worst_excess_gain<G: Game + ?Sized>(game: &G, profile: &[Strategy], mu: &StateBelief) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for (i, own) in profile.iter().enumerate() {
        let nu = BeliefProfile::from_full(i, profile)?;
        let values = game.expected_utilities(i, &nu, mu)?;
        let current = own.expectation(&values);
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(best - current - tolerance(current));
    }
    Ok(worst)
}

fn validate_profile<G: Game + ?Sized>(game: &G, profile: &[Strategy]) -> Result<()> {
    let (n, m) = (game.num_agents(), game.num_actions());
    if profile.len() != n || profile.iter().any(|s| s.num_actions() != m) {
        return Err(Error::domain(format!("profile must hold {n} strategies over {m} actions")));
    }
    Ok(())
}

/// `u_i(a; mu)` for a pure joint action.
pub fn pure_expected_utility<G: Game + ?Sized>(game: &G, agent: usize, joint: &[ActionId], mu: &StateBelief) -> Result<f64> {
    let nodes = integration_nodes(mu, game.gaussian_integration())?;
    let mut total = 0.0;
    for (w, theta) in &nodes {
        total += w * check_finite(agent, game.utility(agent, joint, theta))?;
    }
    Ok(total)
}

/// Every pure profile from which no agent gains by deviating alone,
/// in lexicographic order.
pub fn pure_nash_set<G: Game + ?Sized>(game: &G, mu: &StateBelief, cap: u128) -> Result<Vec<Vec<ActionId>>> {
    let (n, m) = (game.num_agents(), game.num_actions());
    checked_count(m, n, 1, "pure profiles", cap)?;
    let mut found = Vec::new();
    for_each_profile(n, m, |joint| {
        let profile: Vec<Strategy> = joint.iter().map(|a| Strategy::pure(*a, m)).collect::<Result<_>>()?;
        if worst_excess_gain(game, &profile, mu)? <= 0.0 {
            found.push(joint.to_vec());
        }
        Ok(())
    })?;
    Ok(found)
}

/// Whether no agent gains more than `eps` by a unilateral deviation; with
/// `consensus`, additionally whether all agents play the same strategy.
pub fn epsilon_nash_check<G: Game + ?Sized>(
    game: &G,
    profile: &[Strategy],
    mu: &StateBelief,
    eps: f64,
    consensus: bool,
) -> Result<bool> {
    if !(eps >= 0.0) {
        return Err(Error::domain(format!("eps must be nonnegative, got {eps}")));
    }
    validate_profile(game, profile)?;
    if consensus && profile.iter().any(|s| s.distance(&profile[0]) > 1e-9) {
        return Ok(false);
    }
    Ok(worst_excess_gain(game, profile, mu)? <= eps)
}

/// Search parameters for the consensus equilibrium set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConsensusSearch {
    /// Grid spacing on each simplex coordinate; must divide 1.
    pub resolution: f64,
    /// Largest deviation gain still accepted as an equilibrium.
    pub accept_gain: f64,
    /// How many of the best grid points are refined.
    pub refine: usize,
    pub cap: u128,
}

impl Default for ConsensusSearch {
    fn default() -> Self {
        ConsensusSearch { resolution: 0.02, accept_gain: 1e-6, refine: 8, cap: DEFAULT_ENUMERATION_CAP }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsensusDistance {
    pub distance: f64,
    /// Finest step the search resolved the set to.
    pub resolution: f64,
    /// The consensus strategies found to be equilibria.
    pub members: Vec<Strategy>,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn go(left: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            go(left - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(total, parts, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: u128, k: u128) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn consensus_gain<G: Game + ?Sized>(game: &G, g: &Strategy, mu: &StateBelief) -> Result<f64> {
    let n = game.num_agents();
    let mut worst = 0.0f64;
    for i in 0..n {
        let values = game.expected_utilities(i, &BeliefProfile::consensus(i, n, g)?, mu)?;
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(best - g.expectation(&values));
    }
    Ok(worst)
}

/// Pattern search that shifts mass between pairs of actions, halving the
/// step whenever no shift lowers the deviation gain.
fn refine_consensus<G: Game + ?Sized>(
    game: &G,
    start: Vec<f64>,
    mu: &StateBelief,
    step: f64,
    accept: f64,
) -> Result<(Vec<f64>, f64, f64)> {
    let m = start.len();
    let mut x = start;
    let mut gain = consensus_gain(game, &Strategy::from_mixture(x.clone()), mu)?;
    let mut h = step;
    while h > 1e-7 && gain > accept {
        let mut improved = false;
        for from in 0..m {
            for to in 0..m {
                if from == to || x[from] < h {
                    continue;
                }
                let mut y = x.clone();
                y[from] -= h;
                y[to] += h;
                let g = consensus_gain(game, &Strategy::from_mixture(y.clone()), mu)?;
                if g < gain {
                    x = y;
                    gain = g;
                    improved = true;
                }
            }
        }
        if !improved {
            h /= 2.0;
        }
    }
    Ok((x, gain, h))
}

/// Distance from `profile` to the nearest consensus equilibrium, found by a
/// simplex grid search plus local refinement.
pub fn consensus_distance<G: Game + ?Sized>(
    profile: &[Strategy],
    game: &G,
    mu: &StateBelief,
    search: ConsensusSearch,
) -> Result<ConsensusDistance> {
    validate_profile(game, profile)?;
    let m = game.num_actions();
    let steps = (1.0 / search.resolution).round();
    if !(search.resolution > 0.0) || (steps * search.resolution - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!("resolution {} must divide 1", search.resolution)));
    }
    let steps = steps as usize;
    let points = binomial((steps + m - 1) as u128, (m - 1) as u128);
    if points > search.cap {
        return Err(Error::Resource { what: "consensus grid points", needed: points, cap: search.cap });
    }

    let grid = compositions(steps, m);
    let mut scored: Vec<(f64, Vec<f64>)> = grid
        .par_iter()
        .map(|k| {
            let x: Vec<f64> = k.iter().map(|c| *c as f64 / steps as f64).collect();
            Ok((consensus_gain(game, &Strategy::from_mixture(x.clone()), mu)?, x))
        })
        .collect::<Result<_>>()?;
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut members: Vec<Strategy> = Vec::new();
    let mut finest = search.resolution;
    for (gain, x) in &scored {
        if *gain <= search.accept_gain {
            members.push(Strategy::from_mixture(x.clone()));
        }
    }
    for (_, x) in scored.iter().take(search.refine) {
        let (y, gain, h) = refine_consensus(game, x.clone(), mu, search.resolution / 2.0, search.accept_gain)?;
        finest = finest.min(h.max(1e-7));
        let s = Strategy::from_mixture(y);
        if gain <= search.accept_gain && members.iter().all(|t| t.distance(&s) > 1e-9) {
            members.push(s);
        }
    }
    if members.is_empty() {
        return Err(Error::domain("no consensus equilibrium found at this resolution"));
    }
    let distance = members
        .iter()
        .map(|g| profile.iter().map(|s| s.distance(g).powi(2)).sum::<f64>().sqrt())
        .fold(f64::INFINITY, f64::min);
    Ok(ConsensusDistance { distance, resolution: finest, members })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaSeries {
    /// `beta_t`, one entry per round.
    pub beta: Vec<f64>,
    /// Running mean `(1/T) sum_{t <= T} beta_t`.
    pub cesaro: Vec<f64>,
}

/// `beta_t = sum_i max_a u_i(a, f_-i; mu) - u_i(f_i, f_-i; mu)` over the
/// empirical histograms of each round.
pub fn beta_t<G: Game + ?Sized>(game: &G, histograms: &[Strategy], mu: &StateBelief) -> Result<f64> {
    validate_profile(game, histograms)?;
    let mut total = 0.0;
    for (i, f) in histograms.iter().enumerate() {
        let values = game.expected_utilities(i, &BeliefProfile::from_full(i, histograms)?, mu)?;
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        total += best - f.expectation(&values);
    }
    Ok(total)
}

pub fn beta_series<G: Game + ?Sized>(game: &G, trajectory: &Trajectory, mu: &StateBelief) -> Result<BetaSeries> {
    let beta: Vec<f64> = trajectory
        .records
        .par_iter()
        .map(|r| beta_t(game, &r.histograms, mu))
        .collect::<Result<_>>()?;
    let mut cesaro = Vec::with_capacity(beta.len());
    let mut sum = 0.0;
    for (t, b) in beta.iter().enumerate() {
        sum += b;
        cesaro.push(sum / (t + 1) as f64);
    }
    Ok(BetaSeries { beta, cesaro })
}

/// Which belief-tracking error to read from a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrackingError {
    /// `max_i |fhat_i - fbar|`, action sharing only.
    Centroid,
    /// `max_{i != j} |nu_ij - f_j|`, histogram sharing only.
    Pairwise,
}

pub fn tracking_error_series(trajectory: &Trajectory, which: TrackingError) -> Result<Vec<f64>> {
    let expected = match which {
        TrackingError::Centroid => Variant::ActionSharing,
        TrackingError::Pairwise => Variant::HistogramSharing,
    };
    if trajectory.variant != expected {
        return Err(Error::domain(format!("{which:?} tracking needs a {expected:?} trajectory")));
    }
    trajectory
        .records
        .iter()
        .map(|r| {
            match which {
                TrackingError::Centroid => r.track_err_centroid,
                TrackingError::Pairwise => r.track_err_pairwise,
            }
            .ok_or_else(|| Error::domain(format!("round {} lacks a tracking error", r.round)))
        })
        .collect()
}

/// Reference value of the expected payoff of `a` by recursive enumeration of
/// the others' actions and the state nodes. Shares no code with the closed
/// forms or the main enumeration path.
pub fn brute_force_expected_utility<G: Game + ?Sized>(
    game: &G,
    agent: usize,
    a: ActionId,
    nu: &BeliefProfile,
    mu: &StateBelief,
    cap: u128,
) -> Result<f64> {
    let (n, m) = (game.num_agents(), game.num_actions());
    if agent >= n || nu.owner() != agent || nu.num_agents() != n || a.index() > m {
        return Err(Error::domain("agent, action and beliefs disagree with the game"));
    }
    let nodes = integration_nodes(mu, game.gaussian_integration())?;
    checked_count(m, n - 1, nodes.len() as u128, "belief-weighted profiles", cap)?;

    /// Walks agents in order, pinning the owner's action when its turn comes.
    fn walk<G: Game + ?Sized>(
        game: &G,
        agent: usize,
        a: ActionId,
        nu: &BeliefProfile,
        nodes: &[(f64, Vec<f64>)],
        joint: &mut Vec<ActionId>,
        weight: f64,
    ) -> Result<f64> {
        let j = joint.len();
        if j == game.num_agents() {
            let mut v = 0.0;
            for (w, theta) in nodes {
                v += w * check_finite(agent, game.utility(agent, joint, theta))?;
            }
            return Ok(weight * v);
        }
        if j == agent {
            joint.push(a);
            let v = walk(game, agent, a, nu, nodes, joint, weight);
            joint.pop();
            return v;
        }
        let s = nu.get(j).ok_or_else(|| Error::domain(format!("no belief on agent {j}")))?;
        let mut total = 0.0;
        for (k, p) in s.probs().iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            joint.push(ActionId::from_slot(k));
            total += walk(game, agent, a, nu, nodes, joint, weight * p)?;
            joint.pop();
        }
        Ok(total)
    }

    walk(game, agent, a, nu, &nodes, &mut Vec::with_capacity(n), 1.0)
}
