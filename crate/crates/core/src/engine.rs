//! Distributed fictitious play.
//!
//! Every round each agent (i) refreshes its belief on the world state,
//! (ii) best responds to its beliefs on the others' play, (iii) exchanges
//! actions with its neighbors, and (iv) folds what it saw into those beliefs.
//!
//! Two belief schemes are supported:
//!
//! * **Action sharing**: agent `i` keeps one estimate `fhat_i` of the
//!   population's empirical distribution, averaging the plays of its
//!   neighbors, and assumes every other agent follows it.
//! * **Histogram sharing**: agent `i` keeps a separate belief `nu_ij` on each
//!   other agent. Neighbors are tracked exactly from their actions; everyone
//!   else is estimated by averaging the neighbors' beliefs about them.
//!
//! All histograms follow `f_{t+1} = f_t + (f_obs - f_t) / t`, which makes the
//! starting value irrelevant from round two on.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::belief::{
    averaging_step, bayes_gaussian_update, flat_prior_posterior, total_variation, BeliefSummary, Gaussian,
    SignalModel, StateBelief, WeightMatrix,
};
use crate::error::{Error, Result};
use crate::game::{best_response, Game};
use crate::graph::{Graph, Point};
use crate::strategy::{indicator, ActionId, BeliefProfile, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    ActionSharing,
    HistogramSharing,
}

/// An empirical distribution together with the round counter `t` that sets
/// the weight of the next observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    dist: Strategy,
    t: usize,
}

impl Histogram {
    /// A histogram at round one holding `prior`.
    pub fn new(prior: Strategy) -> Self {
        Histogram { dist: prior, t: 1 }
    }

    pub fn at(dist: Strategy, t: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::domain("histogram rounds start at 1"));
        }
        Ok(Histogram { dist, t })
    }

    pub fn dist(&self) -> &Strategy {
        &self.dist
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// Moves `1/t` of the way toward the average indicator of `actions`.
    fn absorb(&self, actions: &[ActionId]) -> Result<Histogram> {
        if actions.is_empty() {
            return Err(Error::domain("no observed actions"));
        }
        let m = self.dist.num_actions();
        let mut target = vec![0.0; m];
        let share = 1.0 / actions.len() as f64;
        for a in actions {
            if a.index() > m {
                return Err(Error::domain(format!("action {a} outside 1..={m}")));
            }
            target[a.slot()] += share;
        }
        let step = 1.0 / self.t as f64;
        let probs = self.dist.probs().iter().zip(&target).map(|(f, x)| f + step * (x - f)).collect();
        Ok(Histogram { dist: Strategy::from_mixture(probs), t: self.t + 1 })
    }
}

/// Own-play recursion `f_{t+1} = f_t + (Psi(a) - f_t) / t`.
pub fn update_own_histogram(f: &Histogram, a: ActionId) -> Result<Histogram> {
    f.absorb(&[a])
}

/// Local estimate of the population histogram from the neighbors' plays.
pub fn update_centroid_estimate(fhat: &Histogram, neighbor_actions: &[ActionId]) -> Result<Histogram> {
    if neighbor_actions.is_empty() {
        return Err(Error::domain("agent has no neighbors to observe"));
    }
    fhat.absorb(neighbor_actions)
}

/// Ground-truth population histogram from the full joint action.
pub fn update_centroid_truth(fbar: &Histogram, joint: &[ActionId]) -> Result<Histogram> {
    fbar.absorb(joint)
}

/// Closed-form empirical distribution of a full action history.
pub fn empirical_distribution(actions: &[ActionId], m: usize) -> Result<Strategy> {
    if actions.is_empty() {
        return Err(Error::domain("empty action history"));
    }
    let mut probs = vec![0.0; m];
    for a in actions {
        let psi = indicator(a.index(), m)?;
        probs.iter_mut().zip(psi.probs()).for_each(|(p, x)| *p += x);
    }
    let len = actions.len() as f64;
    Strategy::new(probs.into_iter().map(|p| p / len).collect())
}

/// Weights `w[i][j] = [(k, w_ijk), ...]` with which observer `i` mixes its
/// neighbors' beliefs about a non-neighbor `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTensor {
    w: Vec<Vec<Vec<(usize, f64)>>>,
}

impl WeightTensor {
    /// Equal weight on every neighbor for every non-neighbor subject.
    pub fn uniform(g: &Graph) -> Result<Self> {
        let n = g.num_nodes();
        let mut w = vec![vec![Vec::new(); n]; n];
        for (i, row) in w.iter_mut().enumerate() {
            let deg = g.degree(i);
            for (j, cell) in row.iter_mut().enumerate() {
                if j == i || g.has_neighbor(i, j) {
                    continue;
                }
                if deg == 0 {
                    return Err(Error::domain(format!("agent {i} has no neighbors")));
                }
                *cell = g.neighbors(i).map(|k| (k, 1.0 / deg as f64)).collect();
            }
        }
        Ok(WeightTensor { w })
    }

    pub fn new(g: &Graph, w: Vec<Vec<Vec<(usize, f64)>>>) -> Result<Self> {
        let n = g.num_nodes();
        if w.len() != n || w.iter().any(|row| row.len() != n) {
            return Err(Error::domain("weight tensor must be n x n"));
        }
        for (i, row) in w.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if cell.iter().any(|(k, x)| !g.has_neighbor(i, *k) || *x <= 0.0) {
                    return Err(Error::domain(format!("weights of ({i}, {j}) must be positive and on neighbors")));
                }
                let needs_row = j != i && !g.has_neighbor(i, j);
                let total: f64 = cell.iter().map(|(_, x)| x).sum();
                if needs_row && (total - 1.0).abs() > 1e-9 {
                    return Err(Error::domain(format!("weights of ({i}, {j}) sum to {total}")));
                }
            }
        }
        Ok(WeightTensor { w })
    }

    pub fn weights(&self, observer: usize, subject: usize) -> &[(usize, f64)] {
        &self.w[observer][subject]
    }
}

/// Belief on the others that each variant carries between rounds.
#[derive(Clone, Debug, PartialEq)]
pub enum BeliefStore {
    /// `fhat[i]`: agent `i`'s estimate of the population histogram.
    ActionSharing { fhat: Vec<Histogram> },
    /// `nu[i][j]`: agent `i`'s belief on agent `j` (diagonal unused).
    HistogramSharing { nu: Vec<Vec<Strategy>> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineState {
    /// Round about to be played, starting at 1.
    pub round: usize,
    pub beliefs: Vec<StateBelief>,
    /// Each agent's empirical play `f_i`.
    pub own: Vec<Histogram>,
    /// Population histogram, visible to diagnostics only.
    pub fbar: Histogram,
    pub store: BeliefStore,
    pub last_joint: Option<Vec<ActionId>>,
}

impl EngineState {
    /// Round-one state with every histogram and estimate at `prior`.
    pub fn initial(variant: Variant, beliefs: Vec<StateBelief>, prior: &Strategy) -> Self {
        let n = beliefs.len();
        let store = match variant {
            Variant::ActionSharing => BeliefStore::ActionSharing { fhat: vec![Histogram::new(prior.clone()); n] },
            Variant::HistogramSharing => BeliefStore::HistogramSharing { nu: vec![vec![prior.clone(); n]; n] },
        };
        EngineState {
            round: 1,
            beliefs,
            own: vec![Histogram::new(prior.clone()); n],
            fbar: Histogram::new(prior.clone()),
            store,
            last_joint: None,
        }
    }

    pub fn variant(&self) -> Variant {
        match self.store {
            BeliefStore::ActionSharing { .. } => Variant::ActionSharing,
            BeliefStore::HistogramSharing { .. } => Variant::HistogramSharing,
        }
    }

    /// The beliefs agent `i` best responds to.
    pub fn belief_profile(&self, i: usize) -> Result<BeliefProfile> {
        let n = self.own.len();
        match &self.store {
            BeliefStore::ActionSharing { fhat } => BeliefProfile::consensus(i, n, fhat[i].dist()),
            BeliefStore::HistogramSharing { nu } => BeliefProfile::from_full(i, &nu[i]),
        }
    }

    /// `max_i |fhat_i - fbar|` under action sharing.
    pub fn centroid_tracking_error(&self) -> Option<f64> {
        match &self.store {
            BeliefStore::ActionSharing { fhat } => {
                Some(fhat.iter().map(|h| h.dist().distance(self.fbar.dist())).fold(0.0, f64::max))
            }
            BeliefStore::HistogramSharing { .. } => None,
        }
    }

    /// `max_{i, j != i} |nu_ij - f_j|` under histogram sharing.
    pub fn pairwise_tracking_error(&self) -> Option<f64> {
        match &self.store {
            BeliefStore::HistogramSharing { nu } => {
                let mut worst = 0.0f64;
                for (i, row) in nu.iter().enumerate() {
                    for (j, s) in row.iter().enumerate() {
                        if i != j {
                            worst = worst.max(s.distance(self.own[j].dist()));
                        }
                    }
                }
                Some(worst)
            }
            BeliefStore::ActionSharing { .. } => None,
        }
    }

    /// Whether every agent's belief on each of its neighbors equals that
    /// neighbor's empirical histogram exactly.
    pub fn neighbor_beliefs_exact(&self, g: &Graph) -> bool {
        match &self.store {
            BeliefStore::HistogramSharing { nu } => {
                (0..nu.len()).all(|i| g.neighbors(i).all(|j| nu[i][j] == *self.own[j].dist()))
            }
            BeliefStore::ActionSharing { .. } => false,
        }
    }
}

/// Histogram-sharing belief refresh after the round's actions are known:
/// neighbors are copied from their (reconstructed) histograms, everyone else
/// is the weighted mix of the neighbors' previous beliefs.
pub fn update_nonneighbor_beliefs(
    nu: &[Vec<Strategy>],
    own: &[Histogram],
    g: &Graph,
    w: &WeightTensor,
) -> Result<Vec<Vec<Strategy>>> {
    let n = nu.len();
    let m = own[0].dist().num_actions();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if j == i {
                        return Ok(nu[i][i].clone());
                    }
                    if g.has_neighbor(i, j) {
                        return Ok(own[j].dist().clone());
                    }
                    let weights = w.weights(i, j);
                    let total: f64 = weights.iter().map(|(_, x)| x).sum();
                    if (total - 1.0).abs() > 1e-9 {
                        return Err(Error::domain(format!("weights of ({i}, {j}) sum to {total}")));
                    }
                    let mut probs = vec![0.0; m];
                    for (k, x) in weights {
                        probs.iter_mut().zip(nu[*k][j].probs()).for_each(|(p, q)| *p += x * q);
                    }
                    Ok(Strategy::from_mixture(probs))
                })
                .collect()
        })
        .collect()
}

/// A process that produces the agents' beliefs on the world state.
pub trait StateLearning: Send {
    /// Round-one beliefs.
    fn initial(&mut self, rng: &mut dyn RngCore) -> Result<Vec<StateBelief>>;

    /// Beliefs for the next round.
    fn advance(&mut self, beliefs: &[StateBelief], rng: &mut dyn RngCore) -> Result<Vec<StateBelief>>;

    /// The belief the agents are converging to, when known.
    fn reference(&self) -> Option<StateBelief>;
}

/// Private initial signals followed by repeated neighborhood averaging.
#[derive(Clone, Debug)]
pub struct AveragingLearning {
    theta: Vec<f64>,
    signal: SignalModel,
    nominal_variance: f64,
    weights: WeightMatrix,
    reference: Option<StateBelief>,
    signals: Vec<Vec<f64>>,
}

impl AveragingLearning {
    /// Agent `i` starts at `N(s_i, nominal_variance I)` with `s_i = theta + noise`.
    pub fn new(theta: Vec<f64>, signal: SignalModel, nominal_variance: f64, weights: WeightMatrix) -> Result<Self> {
        if signal.noise_std().len() != theta.len() {
            return Err(Error::domain("signal and state dimensions differ"));
        }
        if !(nominal_variance >= 0.0) {
            return Err(Error::domain("nominal variance must be nonnegative"));
        }
        Ok(AveragingLearning { theta, signal, nominal_variance, weights, reference: None, signals: Vec::new() })
    }

    pub fn signals(&self) -> &[Vec<f64>] {
        &self.signals
    }
}

impl StateLearning for AveragingLearning {
    fn initial(&mut self, rng: &mut dyn RngCore) -> Result<Vec<StateBelief>> {
        let n = self.weights.matrix().nrows();
        self.signals = (0..n).map(|_| self.signal.observe(&self.theta, rng)).collect();
        let d = self.theta.len();
        let mut pooled = vec![0.0; d];
        for s in &self.signals {
            pooled.iter_mut().zip(s).for_each(|(p, x)| *p += x / n as f64);
        }
        self.reference = Some(StateBelief::Gaussian(Gaussian::isotropic(&pooled, self.nominal_variance)?));
        self.signals
            .iter()
            .map(|s| Ok(StateBelief::Gaussian(Gaussian::isotropic(s, self.nominal_variance)?)))
            .collect()
    }

    fn advance(&mut self, beliefs: &[StateBelief], _rng: &mut dyn RngCore) -> Result<Vec<StateBelief>> {
        averaging_step(beliefs, &self.weights)
    }

    fn reference(&self) -> Option<StateBelief> {
        self.reference.clone()
    }
}

/// Every agent privately observes `theta + noise` each round and updates a
/// Gaussian posterior. The reference is the posterior given every signal
/// observed by anyone so far.
#[derive(Clone, Debug)]
pub struct BayesLearning {
    n: usize,
    theta: Vec<f64>,
    signal: SignalModel,
    pooled: Vec<Vec<f64>>,
}

impl BayesLearning {
    pub fn new(n: usize, theta: Vec<f64>, signal: SignalModel) -> Result<Self> {
        if signal.noise_std().len() != theta.len() {
            return Err(Error::domain("signal and state dimensions differ"));
        }
        Ok(BayesLearning { n, theta, signal, pooled: Vec::new() })
    }

    /// Every observation made so far, by any agent.
    pub fn observations(&self) -> &[Vec<f64>] {
        &self.pooled
    }
}

impl StateLearning for BayesLearning {
    fn initial(&mut self, rng: &mut dyn RngCore) -> Result<Vec<StateBelief>> {
        let noise = self.signal.noise_cov();
        (0..self.n)
            .map(|_| {
                let s = self.signal.observe(&self.theta, rng);
                self.pooled.push(s.clone());
                Ok(StateBelief::Gaussian(flat_prior_posterior(&[s], &noise)?))
            })
            .collect()
    }

    fn advance(&mut self, beliefs: &[StateBelief], rng: &mut dyn RngCore) -> Result<Vec<StateBelief>> {
        let noise = self.signal.noise_cov();
        beliefs
            .iter()
            .map(|b| {
                let StateBelief::Gaussian(prior) = b else {
                    return Err(Error::domain("bayesian learning needs gaussian beliefs"));
                };
                let s = self.signal.observe(&self.theta, rng);
                self.pooled.push(s.clone());
                Ok(StateBelief::Gaussian(bayes_gaussian_update(prior, &s, &noise)?))
            })
            .collect()
    }

    fn reference(&self) -> Option<StateBelief> {
        flat_prior_posterior(&self.pooled, &self.signal.noise_cov()).ok().map(StateBelief::Gaussian)
    }
}

/// Physical motion of the agents, driven by their actions.
pub trait Kinematics: Send {
    fn positions(&self) -> &[Point];

    fn advance(&mut self, joint: &[ActionId], beliefs: &[StateBelief]) -> Result<()>;

    /// Coverage predicate for games that have one.
    fn all_covered(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StopRule {
    /// Run the full horizon.
    #[default]
    None,
    /// Stop once every agent has played the same action for `window`
    /// consecutive rounds.
    Consensus { window: usize },
    /// Stop once every target holds exactly one robot.
    Coverage,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    Horizon,
    /// `onset` is the first round of the agreeing window.
    Consensus { onset: usize, action: ActionId },
    Covered { round: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: usize,
    pub actions: Vec<ActionId>,
    /// Each agent's empirical play including this round.
    pub histograms: Vec<Strategy>,
    /// State beliefs the agents acted on.
    pub beliefs: Vec<BeliefSummary>,
    pub tv_to_reference: Vec<Option<f64>>,
    pub track_err_centroid: Option<f64>,
    pub track_err_pairwise: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Point>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub fingerprint: String,
    pub variant: Variant,
    pub num_agents: usize,
    /// Physical value of each action, in action order.
    pub action_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_positions: Option<Vec<Point>>,
    pub records: Vec<RoundRecord>,
    pub termination: Termination,
    /// Limit belief of the learning process at the end of the run.
    #[serde(skip)]
    pub reference: Option<StateBelief>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn final_actions(&self) -> Option<&[ActionId]> {
        self.records.last().map(|r| r.actions.as_slice())
    }

    /// First round of the earliest run of `window` unanimous rounds.
    pub fn consensus_onset(&self, window: usize) -> Option<(usize, ActionId)> {
        let mut streak = 0;
        for (idx, r) in self.records.iter().enumerate() {
            let first = r.actions[0];
            if r.actions.iter().all(|a| *a == first) && (streak == 0 || self.records[idx - 1].actions[0] == first) {
                streak += 1;
            } else if r.actions.iter().all(|a| *a == first) {
                streak = 1;
            } else {
                streak = 0;
            }
            if window > 0 && streak >= window {
                return Some((self.records[idx + 1 - window].round, first));
            }
        }
        None
    }
}

/// Static configuration of a run.
pub struct Simulation<'a> {
    pub game: &'a dyn Game,
    pub graph: &'a Graph,
    pub variant: Variant,
    pub horizon: usize,
    pub stop: StopRule,
    /// Common starting estimate of the others' play; uniform by default.
    pub prior: Option<Strategy>,
    pub weights: Option<WeightTensor>,
    pub fingerprint: String,
}

impl<'a> Simulation<'a> {
    pub fn new(game: &'a dyn Game, graph: &'a Graph, variant: Variant, horizon: usize) -> Self {
        Simulation {
            game,
            graph,
            variant,
            horizon,
            stop: StopRule::None,
            prior: None,
            weights: None,
            fingerprint: String::new(),
        }
    }

    pub fn with_stop(mut self, stop: StopRule) -> Self {
        self.stop = stop;
        self
    }
}

/// A running simulation: configuration plus mutable state.
pub struct Engine<'a> {
    game: &'a dyn Game,
    graph: &'a Graph,
    weights: WeightTensor,
    state: EngineState,
}

impl<'a> Engine<'a> {
    pub fn new(sim: &Simulation<'a>, beliefs: Vec<StateBelief>) -> Result<Self> {
        let (n, m) = (sim.game.num_agents(), sim.game.num_actions());
        if sim.graph.num_nodes() != n || beliefs.len() != n {
            return Err(Error::config("graph", format!("graph has {} nodes, game has {n} agents", sim.graph.num_nodes())));
        }
        if let Some(i) = (0..n).find(|i| sim.graph.degree(*i) == 0) {
            return Err(Error::config("graph", format!("agent {i} has no neighbors")));
        }
        let prior = sim.prior.clone().unwrap_or_else(|| Strategy::uniform(m));
        if prior.num_actions() != m {
            return Err(Error::config("prior", format!("prior must have {m} entries")));
        }
        let weights = match &sim.weights {
            Some(w) => w.clone(),
            None => WeightTensor::uniform(sim.graph)?,
        };
        Ok(Engine { game: sim.game, graph: sim.graph, weights, state: EngineState::initial(sim.variant, beliefs, &prior) })
    }

    pub fn state(&self) -> &EngineState {
        &self.state
    }

    /// Plays one synchronous round.
    pub fn step(&mut self, learning: &mut dyn StateLearning, rng: &mut dyn RngCore) -> Result<Vec<ActionId>> {
        let state = &mut self.state;
        if state.round > 1 {
            state.beliefs = learning.advance(&state.beliefs, rng)?;
        }
        let n = state.own.len();
        let joint: Vec<ActionId> = (0..n)
            .map(|i| best_response(self.game, i, &state.belief_profile(i)?, &state.beliefs[i]))
            .collect::<Result<_>>()?;

        let own: Vec<Histogram> =
            state.own.iter().zip(&joint).map(|(f, a)| update_own_histogram(f, *a)).collect::<Result<_>>()?;
        state.fbar = update_centroid_truth(&state.fbar, &joint)?;
        state.store = match &state.store {
            BeliefStore::ActionSharing { fhat } => {
                let fhat = fhat
                    .iter()
                    .enumerate()
                    .map(|(i, h)| {
                        let seen: Vec<ActionId> = self.graph.neighbors(i).map(|j| joint[j]).collect();
                        update_centroid_estimate(h, &seen)
                    })
                    .collect::<Result<_>>()?;
                BeliefStore::ActionSharing { fhat }
            }
            BeliefStore::HistogramSharing { nu } => {
                BeliefStore::HistogramSharing { nu: update_nonneighbor_beliefs(nu, &own, self.graph, &self.weights)? }
            }
        };
        state.own = own;
        state.last_joint = Some(joint.clone());
        state.round += 1;
        Ok(joint)
    }
}

/// Runs a simulation until its horizon or stopping rule.
pub fn run(
    sim: &Simulation<'_>,
    learning: &mut dyn StateLearning,
    mut kinematics: Option<&mut dyn Kinematics>,
    rng: &mut dyn RngCore,
) -> Result<Trajectory> {
    if sim.horizon == 0 {
        return Err(Error::config("horizon", "must be at least 1"));
    }
    if let StopRule::Consensus { window: 0 } = sim.stop {
        return Err(Error::config("stop.window", "must be at least 1"));
    }
    let initial = learning.initial(rng)?;
    let mut engine = Engine::new(sim, initial)?;
    let initial_positions = kinematics.as_ref().map(|k| k.positions().to_vec());
    let mut records = Vec::new();
    let mut termination = Termination::Horizon;
    let mut streak: Option<(ActionId, usize)> = None;

    for _ in 0..sim.horizon {
        let round = engine.state.round;
        let joint = engine.step(learning, rng)?;
        let state = engine.state();
        if let Some(k) = kinematics.as_deref_mut() {
            k.advance(&joint, &state.beliefs)?;
        }
        let reference = learning.reference();
        let tv_to_reference = state
            .beliefs
            .iter()
            .map(|b| reference.as_ref().and_then(|r| total_variation(b, r).ok()))
            .collect();
        records.push(RoundRecord {
            round,
            actions: joint.clone(),
            histograms: state.own.iter().map(|h| h.dist().clone()).collect(),
            beliefs: state.beliefs.iter().map(StateBelief::summary).collect(),
            tv_to_reference,
            track_err_centroid: state.centroid_tracking_error(),
            track_err_pairwise: state.pairwise_tracking_error(),
            positions: kinematics.as_ref().map(|k| k.positions().to_vec()),
        });

        let unanimous = joint.iter().all(|a| *a == joint[0]);
        streak = match streak {
            Some((a, len)) if unanimous && a == joint[0] => Some((a, len + 1)),
            _ if unanimous => Some((joint[0], 1)),
            _ => None,
        };
        match sim.stop {
            StopRule::Consensus { window } => {
                if let Some((action, len)) = streak {
                    if len >= window {
                        termination = Termination::Consensus { onset: round + 1 - window, action };
                        break;
                    }
                }
            }
            StopRule::Coverage => {
                if kinematics.as_ref().is_some_and(|k| k.all_covered()) {
                    termination = Termination::Covered { round };
                    break;
                }
            }
            StopRule::None => {}
        }
    }

    Ok(Trajectory {
        fingerprint: sim.fingerprint.clone(),
        variant: sim.variant,
        num_agents: sim.game.num_agents(),
        action_values: (1..=sim.game.num_actions()).map(|k| sim.game.action_value(ActionId::from_slot(k - 1))).collect(),
        initial_positions,
        records,
        termination,
        reference: learning.reference(),
    })
}
