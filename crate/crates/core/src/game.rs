//! Finite games with an uncertain world state, and the expected-utility and
//! best-response computations every agent runs each round.

use rand::RngCore;

use crate::belief::{integration_nodes, GaussianIntegration, StateBelief};
use crate::error::{Error, Result};
use crate::strategy::{ActionId, BeliefProfile, Strategy};

/// A game of `n` agents sharing the action set `{1, ..., m}` whose payoffs
/// depend on an unknown world state `theta` (a real vector).
pub trait Game: Send + Sync {
    fn num_agents(&self) -> usize;

    fn num_actions(&self) -> usize;

    /// Payoff `u_i(a, theta)` for a pure joint action.
    fn utility(&self, agent: usize, joint: &[ActionId], theta: &[f64]) -> f64;

    /// Closed-form expected utility of `action` for `agent` under beliefs
    /// `nu` on the others and `mu` on the state. `None` means "enumerate".
    fn closed_form(&self, _agent: usize, _action: ActionId, _nu: &BeliefProfile, _mu: &StateBelief) -> Option<f64> {
        None
    }

    /// How Gaussian state beliefs are integrated when enumerating.
    fn gaussian_integration(&self) -> GaussianIntegration {
        GaussianIntegration::PlugInMean
    }

    /// Declared payoff symmetry under exchange of two agents and their actions.
    fn is_symmetric(&self) -> bool {
        false
    }

    /// A random world state, used by the structural checks.
    fn sample_state(&self, rng: &mut dyn RngCore) -> Vec<f64>;

    /// Physical value of an action (degrees, target id, ...) for reporting.
    fn action_value(&self, a: ActionId) -> f64 {
        a.index() as f64
    }

    /// Expected utility of every action, in action order. Games with a cheap
    /// shared precomputation override this.
    fn expected_utilities(&self, agent: usize, nu: &BeliefProfile, mu: &StateBelief) -> Result<Vec<f64>> {
        (1..=self.num_actions())
            .map(|k| expected_utility_under_beliefs(self, agent, ActionId::from_slot(k - 1), nu, mu))
            .collect()
    }
}

pub(crate) fn check_finite(agent: usize, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { agent, value })
    }
}

/// `u_i(sigma, theta)`: the payoff averaged over the product of the mixed
/// strategies, by exact enumeration of all `m^n` joint actions.
pub fn mixed_expected_utility<G: Game + ?Sized>(game: &G, agent: usize, sigma: &[Strategy], theta: &[f64]) -> Result<f64> {
    let (n, m) = (game.num_agents(), game.num_actions());
    if sigma.len() != n || agent >= n {
        return Err(Error::domain(format!("expected {n} strategies and agent < {n}")));
    }
    if sigma.iter().any(|s| s.num_actions() != m) {
        return Err(Error::domain(format!("strategies must have {m} entries")));
    }
    let mut total = 0.0;
    for_each_profile(n, m, |joint| {
        let weight: f64 = joint.iter().zip(sigma).map(|(a, s)| s.prob(*a)).product();
        if weight > 0.0 {
            total += weight * check_finite(agent, game.utility(agent, joint, theta))?;
        }
        Ok(())
    })?;
    Ok(total)
}

/// Calls `f` on every joint pure action in lexicographic order.
pub(crate) fn for_each_profile(n: usize, m: usize, mut f: impl FnMut(&[ActionId]) -> Result<()>) -> Result<()> {
    let mut joint = vec![ActionId::from_slot(0); n];
    loop {
        f(&joint)?;
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            if joint[pos].index() < m {
                joint[pos] = ActionId::from_slot(joint[pos].index());
                break;
            }
            joint[pos] = ActionId::from_slot(0);
        }
    }
}

fn validate_beliefs<G: Game + ?Sized>(game: &G, agent: usize, a: ActionId, nu: &BeliefProfile) -> Result<()> {
    let (n, m) = (game.num_agents(), game.num_actions());
    if nu.owner() != agent || nu.num_agents() != n {
        return Err(Error::domain(format!("belief profile owned by {} over {} agents", nu.owner(), nu.num_agents())));
    }
    if a.index() > m || nu.num_actions() != m {
        return Err(Error::domain(format!("action or beliefs outside {m} actions")));
    }
    Ok(())
}

/// Expected payoff of `a` for `agent` when the others follow `nu` and the
/// state follows `mu`, by enumerating the others' joint actions and the
/// state-integration nodes. Ignores any closed form.
pub fn enumerate_expected_utility<G: Game + ?Sized>(
    game: &G,
    agent: usize,
    a: ActionId,
    nu: &BeliefProfile,
    mu: &StateBelief,
) -> Result<f64> {
    validate_beliefs(game, agent, a, nu)?;
    let nodes = integration_nodes(mu, game.gaussian_integration())?;
    let (n, m) = (game.num_agents(), game.num_actions());
    let others: Vec<(usize, &Strategy)> = nu.others().collect();
    let mut joint = vec![a; n];
    let mut total = 0.0;
    for_each_profile(n - 1, m, |rest| {
        let mut weight = 1.0;
        for ((j, s), b) in others.iter().zip(rest) {
            joint[*j] = *b;
            weight *= s.prob(*b);
        }
        if weight > 0.0 {
            for (w, theta) in &nodes {
                total += weight * w * check_finite(agent, game.utility(agent, &joint, theta))?;
            }
        }
        Ok(())
    })?;
    Ok(total)
}

/// The payoff `agent` expects from `a` given its beliefs, through the game's
/// closed form when it has one.
pub fn expected_utility_under_beliefs<G: Game + ?Sized>(
    game: &G,
    agent: usize,
    a: ActionId,
    nu: &BeliefProfile,
    mu: &StateBelief,
) -> Result<f64> {
    validate_beliefs(game, agent, a, nu)?;
    match game.closed_form(agent, a, nu, mu) {
        Some(v) => check_finite(agent, v),
        None => enumerate_expected_utility(game, agent, a, nu, mu),
    }
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax_lowest(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (k, v) in values.iter().enumerate().skip(1) {
        if *v > best.1 {
            best = (k, *v);
        }
    }
    best
}

/// Best response to beliefs, ties broken toward the lowest action index.
pub fn best_response<G: Game + ?Sized>(game: &G, agent: usize, nu: &BeliefProfile, mu: &StateBelief) -> Result<ActionId> {
    let values = game.expected_utilities(agent, nu, mu)?;
    Ok(ActionId::from_slot(argmax_lowest(&values).0))
}

/// The value of the best response.
pub fn best_response_value<G: Game + ?Sized>(game: &G, agent: usize, nu: &BeliefProfile, mu: &StateBelief) -> Result<f64> {
    let values = game.expected_utilities(agent, nu, mu)?;
    Ok(argmax_lowest(&values).1)
}

/// `u_i(sigma; mu)` for a mixed profile: the agent's own mixture over the
/// expected utilities of its pure actions.
pub fn profile_expected_utility<G: Game + ?Sized>(game: &G, agent: usize, profile: &[Strategy], mu: &StateBelief) -> Result<f64> {
    let nu = BeliefProfile::from_full(agent, profile)?;
    let values = game.expected_utilities(agent, &nu, mu)?;
    Ok(profile[agent].expectation(&values))
}

/// A game given by an explicit payoff table over a finite set of indexed
/// states. The state vector is `[k]` for state index `k`.
#[derive(Clone, Debug)]
pub struct TableGame {
    n: usize,
    m: usize,
    num_states: usize,
    // [agent][state][joint profile index]
    table: Vec<Vec<Vec<f64>>>,
    symmetric: bool,
}

impl TableGame {
    pub fn new(n: usize, m: usize, num_states: usize, table: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let size = m.pow(n as u32);
        let shape_ok = table.len() == n
            && table.iter().all(|t| t.len() == num_states && t.iter().all(|s| s.len() == size));
        if !shape_ok {
            return Err(Error::domain("payoff table has the wrong shape"));
        }
        if let Some(v) = table.iter().flatten().flatten().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("payoff table holds non-finite value {v}")));
        }
        Ok(TableGame { n, m, num_states, table, symmetric: false })
    }

    /// Independent uniform payoffs in `[-1, 1]`.
    pub fn random(n: usize, m: usize, num_states: usize, rng: &mut dyn RngCore) -> Self {
        use rand::Rng;
        let size = m.pow(n as u32);
        let table = (0..n)
            .map(|_| (0..num_states).map(|_| (0..size).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
            .collect();
        TableGame { n, m, num_states, table, symmetric: false }
    }

    /// Two-player coordination: payoff 1 when actions match, else 0.
    pub fn coordination(m: usize) -> Self {
        let table = (0..2)
            .map(|_| vec![(0..m * m).map(|idx| if idx / m == idx % m { 1.0 } else { 0.0 }).collect()])
            .collect();
        TableGame { n: 2, m, num_states: 1, table, symmetric: true }
    }

    pub fn with_symmetric_flag(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    /// Belief over the state indices with the given probabilities.
    pub fn state_belief(&self, probs: Vec<f64>) -> Result<StateBelief> {
        StateBelief::categorical((0..self.num_states).map(|k| vec![k as f64]).collect(), probs)
    }

    fn profile_index(&self, joint: &[ActionId]) -> usize {
        joint.iter().fold(0, |acc, a| acc * self.m + a.slot())
    }

    pub fn set(&mut self, agent: usize, state: usize, joint: &[ActionId], value: f64) {
        let idx = self.profile_index(joint);
        self.table[agent][state][idx] = value;
    }
}

impl Game for TableGame {
    fn num_agents(&self) -> usize {
        self.n
    }

    fn num_actions(&self) -> usize {
        self.m
    }

    fn utility(&self, agent: usize, joint: &[ActionId], theta: &[f64]) -> f64 {
        let state = (theta[0].round() as usize).min(self.num_states - 1);
        self.table[agent][state][self.profile_index(joint)]
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        use rand::Rng;
        vec![rng.random_range(0..self.num_states) as f64]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_strategy(m: usize, rng: &mut impl Rng) -> Strategy {
        let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
        let s: f64 = raw.iter().sum();
        Strategy::new(raw.into_iter().map(|x| x / s).collect()).unwrap()
    }

    #[test]
    fn point_masses_recover_pure_payoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = TableGame::random(3, 3, 1, &mut rng);
        let joint = [ActionId::new(2, 3).unwrap(), ActionId::new(3, 3).unwrap(), ActionId::new(1, 3).unwrap()];
        let sigma: Vec<Strategy> = joint.iter().map(|a| Strategy::pure(*a, 3).unwrap()).collect();
        for i in 0..3 {
            let v = mixed_expected_utility(&g, i, &sigma, &[0.0]).unwrap();
            assert_eq!(v, g.utility(i, &joint, &[0.0]));
        }
    }

    #[test]
    fn uniform_two_by_two_is_table_mean() {
        let table = vec![vec![vec![1.0, 2.0, 3.0, 6.0]], vec![vec![0.0; 4]]];
        let g = TableGame::new(2, 2, 1, table).unwrap();
        let u = Strategy::uniform(2);
        let v = mixed_expected_utility(&g, 0, &[u.clone(), u], &[0.0]).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_utility_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = TableGame::random(3, 3, 1, &mut rng);
        let sigma: Vec<Strategy> = (0..3).map(|_| random_strategy(3, &mut rng)).collect();
        let exact = mixed_expected_utility(&g, 0, &sigma, &[0.0]).unwrap();
        let samples = 1_000_000;
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        let draw = |s: &Strategy, rng: &mut ChaCha8Rng| {
            let r: f64 = rng.random();
            let mut acc = 0.0;
            for (k, p) in s.probs().iter().enumerate() {
                acc += p;
                if r < acc {
                    return ActionId::from_slot(k);
                }
            }
            ActionId::from_slot(s.num_actions() - 1)
        };
        for _ in 0..samples {
            let joint: Vec<ActionId> = sigma.iter().map(|s| draw(s, &mut rng)).collect();
            let u = g.utility(0, &joint, &[0.0]);
            sum += u;
            sum_sq += u * u;
        }
        let mean = sum / samples as f64;
        let se = ((sum_sq / samples as f64 - mean * mean) / samples as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * se, "mc {mean} exact {exact} se {se}");
    }

    #[test]
    fn mixed_utility_dimension_errors() {
        let g = TableGame::coordination(2);
        let u = Strategy::uniform(2);
        assert!(mixed_expected_utility(&g, 0, std::slice::from_ref(&u), &[0.0]).is_err());
        assert!(mixed_expected_utility(&g, 0, &[u.clone(), Strategy::uniform(3)], &[0.0]).is_err());
    }

    #[test]
    fn enumeration_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = TableGame::random(3, 3, 4, &mut rng);
        let mu = g.state_belief(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let nu_full: Vec<Strategy> = (0..3).map(|_| random_strategy(3, &mut rng)).collect();
        let nu = BeliefProfile::from_full(1, &nu_full).unwrap();
        let a = ActionId::new(2, 3).unwrap();
        let got = expected_utility_under_beliefs(&g, 1, a, &nu, &mu).unwrap();
        let mut want = 0.0;
        for s in 0..4 {
            let ps = [0.1, 0.2, 0.3, 0.4][s];
            for b0 in 1..=3 {
                for b2 in 1..=3 {
                    let joint = [ActionId::new(b0, 3).unwrap(), a, ActionId::new(b2, 3).unwrap()];
                    let w = nu_full[0].probs()[b0 - 1] * nu_full[2].probs()[b2 - 1];
                    want += ps * w * g.utility(1, &joint, &[s as f64]);
                }
            }
        }
        assert!((got - want).abs() < 1e-9);
    }

    #[test]
    fn best_response_ties_go_low() {
        let g = TableGame::coordination(3);
        let nu = BeliefProfile::consensus(0, 2, &Strategy::uniform(3)).unwrap();
        let mu = g.state_belief(vec![1.0]).unwrap();
        assert_eq!(best_response(&g, 0, &nu, &mu).unwrap().index(), 1);
    }

    #[test]
    fn best_response_value_is_exhaustive_max() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let g = TableGame::random(3, 3, 2, &mut rng);
            let mu = g.state_belief(vec![0.3, 0.7]).unwrap();
            let full: Vec<Strategy> = (0..3).map(|_| random_strategy(3, &mut rng)).collect();
            let i = rng.random_range(0..3);
            let nu = BeliefProfile::from_full(i, &full).unwrap();
            let br = best_response(&g, i, &nu, &mu).unwrap();
            let v = best_response_value(&g, i, &nu, &mu).unwrap();
            let at_br = expected_utility_under_beliefs(&g, i, br, &nu, &mu).unwrap();
            assert_eq!(v, at_br);
            let exhaustive = (1..=3)
                .map(|k| expected_utility_under_beliefs(&g, i, ActionId::new(k, 3).unwrap(), &nu, &mu).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            assert!((v - exhaustive).abs() < 1e-12);
        }
    }

    #[test]
    fn best_response_is_shift_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let g = TableGame::random(3, 4, 1, &mut rng);
            let mut shifted = g.clone();
            let c = rng.random_range(-50.0..50.0);
            shifted.table.iter_mut().flatten().flatten().for_each(|v| *v += c);
            let mu = g.state_belief(vec![1.0]).unwrap();
            let full: Vec<Strategy> = (0..3).map(|_| random_strategy(4, &mut rng)).collect();
            let nu = BeliefProfile::from_full(0, &full).unwrap();
            assert_eq!(best_response(&g, 0, &nu, &mu).unwrap(), best_response(&shifted, 0, &nu, &mu).unwrap());
        }
    }

    #[test]
    fn non_finite_utilities_are_rejected() {
        let mut g = TableGame::coordination(2);
        g.table[0][0][0] = f64::NAN;
        let u = Strategy::uniform(2);
        assert!(matches!(mixed_expected_utility(&g, 0, &[u.clone(), u], &[0.0]), Err(Error::NonFinite { .. })));
        assert!(TableGame::new(1, 1, 1, vec![vec![vec![f64::INFINITY]]]).is_err());
    }
}
