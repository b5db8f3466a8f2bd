//! Beauty contest: each agent trades off tracking the state against
//! matching the average action of everyone else,
//!
//! ```text
//! u_i(a, theta) = -lambda (a_i - theta)^2 - (1 - lambda) (a_i - mean_{j != i} a_j)^2
//! ```
//!
//! Actions are headings on a finite grid of degrees.

use rand::{Rng, RngCore};

use crate::belief::{GaussianIntegration, StateBelief};
use crate::engine::Kinematics;
use crate::error::{Error, Result};
use crate::game::Game;
use crate::graph::Point;
use crate::strategy::{ActionId, BeliefProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct BeautyContest {
    n: usize,
    lambda: f64,
    grid: Vec<f64>,
}

impl BeautyContest {
    /// `lambda` may sit on either end of `[0, 1]`; the interior is the
    /// interesting regime.
    pub fn new(n: usize, lambda: f64, grid: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("beauty contest needs at least 2 agents"));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::domain(format!("lambda {lambda} outside [0, 1]")));
        }
        if grid.is_empty() || grid.iter().any(|g| !g.is_finite()) {
            return Err(Error::domain("action grid must be finite and nonempty"));
        }
        Ok(BeautyContest { n, lambda, grid })
    }

    /// Headings `0, 5, ..., 180` degrees.
    pub fn degree_grid() -> Vec<f64> {
        (0..=36).map(|k| 5.0 * k as f64).collect()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn value(&self, a: ActionId) -> f64 {
        self.grid[a.slot()]
    }

    /// The grid action at `value`, if any.
    pub fn action_at(&self, value: f64) -> Result<ActionId> {
        self.grid
            .iter()
            .position(|g| (g - value).abs() < 1e-9)
            .map(ActionId::from_slot)
            .ok_or_else(|| Error::domain(format!("action {value} is not on the grid")))
    }

    /// Grid point closest to `value`, lower index on ties.
    pub fn nearest_action(&self, value: f64) -> ActionId {
        let mut best = 0;
        for (k, g) in self.grid.iter().enumerate() {
            if (g - value).abs() < (self.grid[best] - value).abs() {
                best = k;
            }
        }
        ActionId::from_slot(best)
    }

    /// Per-agent payoffs for headings given in degrees.
    pub fn payoff(&self, headings: &[f64], theta: f64) -> Result<Vec<f64>> {
        if headings.len() != self.n {
            return Err(Error::domain(format!("expected {} headings", self.n)));
        }
        let joint: Vec<ActionId> = headings.iter().map(|h| self.action_at(*h)).collect::<Result<_>>()?;
        Ok((0..self.n).map(|i| self.utility(i, &joint, &[theta])).collect())
    }

    fn state_moments(mu: &StateBelief) -> (f64, f64) {
        (mu.mean()[0], mu.cov_trace())
    }

    /// Mean and variance of the others' average heading when they play
    /// independently according to `nu`.
    fn others_moments(&self, nu: &BeliefProfile) -> (f64, f64) {
        let k = (self.n - 1) as f64;
        let (mut mean, mut var) = (0.0, 0.0);
        for (_, s) in nu.others() {
            let m1 = s.expectation(&self.grid);
            let m2: f64 = s.probs().iter().zip(&self.grid).map(|(p, g)| p * g * g).sum();
            mean += m1;
            var += (m2 - m1 * m1).max(0.0);
        }
        (mean / k, var / (k * k))
    }

    fn closed_form_value(&self, a: f64, state: (f64, f64), others: (f64, f64)) -> f64 {
        let (m_theta, v_theta) = state;
        let (m_bar, v_bar) = others;
        -self.lambda * ((a - m_theta).powi(2) + v_theta) - (1.0 - self.lambda) * ((a - m_bar).powi(2) + v_bar)
    }
}

impl Game for BeautyContest {
    fn num_agents(&self) -> usize {
        self.n
    }

    fn num_actions(&self) -> usize {
        self.grid.len()
    }

    fn utility(&self, agent: usize, joint: &[ActionId], theta: &[f64]) -> f64 {
        let a = self.value(joint[agent]);
        let others: f64 = joint
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != agent)
            .map(|(_, b)| self.value(*b))
            .sum::<f64>()
            / (self.n - 1) as f64;
        -self.lambda * (a - theta[0]).powi(2) - (1.0 - self.lambda) * (a - others).powi(2)
    }

    fn closed_form(&self, _agent: usize, action: ActionId, nu: &BeliefProfile, mu: &StateBelief) -> Option<f64> {
        if mu.dim() != 1 {
            return None;
        }
        Some(self.closed_form_value(self.value(action), Self::state_moments(mu), self.others_moments(nu)))
    }

    /// Three Hermite nodes integrate the quadratic payoff exactly.
    fn gaussian_integration(&self) -> GaussianIntegration {
        GaussianIntegration::GaussHermite(3)
    }

    fn is_symmetric(&self) -> bool {
        true
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        let lo = self.grid.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        vec![if hi > lo { rng.random_range(lo..hi) } else { lo }]
    }

    fn action_value(&self, a: ActionId) -> f64 {
        self.value(a)
    }

    fn expected_utilities(&self, agent: usize, nu: &BeliefProfile, mu: &StateBelief) -> Result<Vec<f64>> {
        if mu.dim() != 1 {
            return Err(Error::domain("beauty contest state is a scalar"));
        }
        if nu.owner() != agent || nu.num_agents() != self.n || nu.num_actions() != self.grid.len() {
            return Err(Error::domain("belief profile does not fit the game"));
        }
        let state = Self::state_moments(mu);
        let others = self.others_moments(nu);
        Ok(self.grid.iter().map(|a| self.closed_form_value(*a, state, others)).collect())
    }
}

/// Each agent moves a fixed displacement along its chosen heading. Positions
/// are reporting-only; payoffs never read them.
#[derive(Clone, Debug)]
pub struct HeadingKinematics {
    grid: Vec<f64>,
    displacement: f64,
    positions: Vec<Point>,
}

impl HeadingKinematics {
    pub fn new(game: &BeautyContest, start: Vec<Point>, displacement: f64) -> Self {
        HeadingKinematics { grid: game.grid.clone(), displacement, positions: start }
    }
}

impl Kinematics for HeadingKinematics {
    fn positions(&self) -> &[Point] {
        &self.positions
    }

    fn advance(&mut self, joint: &[ActionId], _beliefs: &[StateBelief]) -> Result<()> {
        for (p, a) in self.positions.iter_mut().zip(joint) {
            let rad = self.grid[a.slot()].to_radians();
            p[0] += self.displacement * rad.cos();
            p[1] += self.displacement * rad.sin();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::Gaussian;
    use crate::game::{best_response, best_response_value, enumerate_expected_utility};
    use crate::strategy::Strategy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point(theta: f64) -> StateBelief {
        StateBelief::Gaussian(Gaussian::point_mass(&[theta]))
    }

    #[test]
    fn payoff_examples() {
        let g = BeautyContest::new(3, 0.5, BeautyContest::degree_grid()).unwrap();
        assert_eq!(g.payoff(&[90.0, 90.0, 90.0], 90.0).unwrap(), vec![0.0; 3]);
        let u = g.payoff(&[90.0, 90.0, 100.0], 90.0).unwrap();
        assert!((u[2] + 100.0).abs() < 1e-12);
        assert!((u[0] + 12.5).abs() < 1e-12);
        assert!(g.payoff(&[90.0, 91.0, 90.0], 90.0).is_err());

        let pure_estimation = BeautyContest::new(3, 1.0, BeautyContest::degree_grid()).unwrap();
        for others in [[0.0, 0.0], [180.0, 45.0]] {
            let u = pure_estimation.payoff(&[95.0, others[0], others[1]], 90.0).unwrap();
            assert!((u[0] + 25.0).abs() < 1e-12);
        }
    }

    #[test]
    fn estimation_only_best_response_is_the_mean() {
        let g = BeautyContest::new(4, 1.0, BeautyContest::degree_grid()).unwrap();
        let mu = StateBelief::Gaussian(Gaussian::isotropic(&[90.0], 400.0).unwrap());
        let nu = BeliefProfile::consensus(0, 4, &Strategy::uniform(37)).unwrap();
        assert_eq!(g.value(best_response(&g, 0, &nu, &mu).unwrap()), 90.0);
        // point mass: -(a - 90)^2 exactly, zero at the optimum
        let a = g.action_at(95.0).unwrap();
        assert!((g.closed_form(0, a, &nu, &point(90.0)).unwrap() + 25.0).abs() < 1e-12);
        assert_eq!(best_response_value(&g, 0, &nu, &point(90.0)).unwrap(), 0.0);
    }

    #[test]
    fn coordination_only_best_response_follows_others() {
        let g = BeautyContest::new(3, 0.0, BeautyContest::degree_grid()).unwrap();
        let at50 = Strategy::pure(g.action_at(50.0).unwrap(), 37).unwrap();
        let nu = BeliefProfile::consensus(1, 3, &at50).unwrap();
        assert_eq!(g.value(best_response(&g, 1, &nu, &point(120.0)).unwrap()), 50.0);
    }

    #[test]
    fn closed_form_ignores_others_when_lambda_is_one() {
        let g = BeautyContest::new(3, 1.0, vec![80.0, 90.0, 100.0]).unwrap();
        let mu = point(93.0);
        let a = ActionId::new(2, 3).unwrap();
        let v1 = g.closed_form(0, a, &BeliefProfile::consensus(0, 3, &Strategy::uniform(3)).unwrap(), &mu);
        let skew = Strategy::new(vec![0.9, 0.05, 0.05]).unwrap();
        let v2 = g.closed_form(0, a, &BeliefProfile::consensus(0, 3, &skew).unwrap(), &mu);
        assert_eq!(v1, v2);
    }

    #[test]
    fn closed_form_with_point_beliefs_equals_payoff() {
        let g = BeautyContest::new(3, 0.3, vec![80.0, 85.0, 90.0, 95.0, 100.0]).unwrap();
        let joint = [ActionId::new(1, 5).unwrap(), ActionId::new(4, 5).unwrap(), ActionId::new(5, 5).unwrap()];
        let pure: Vec<Strategy> = joint.iter().map(|a| Strategy::pure(*a, 5).unwrap()).collect();
        let nu = BeliefProfile::from_full(0, &pure).unwrap();
        let v = g.closed_form(0, joint[0], &nu, &point(88.0)).unwrap();
        assert!((v - g.utility(0, &joint, &[88.0])).abs() < 1e-9);
    }

    #[test]
    fn gaussian_quadrature_matches_closed_form() {
        let g = BeautyContest::new(3, 0.4, vec![80.0, 85.0, 90.0, 95.0, 100.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mu = StateBelief::Gaussian(Gaussian::isotropic(&[91.3], 57.0).unwrap());
        for _ in 0..50 {
            let full: Vec<Strategy> = (0..3)
                .map(|_| {
                    let raw: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
                    let s: f64 = raw.iter().sum();
                    Strategy::new(raw.iter().map(|x| x / s).collect()).unwrap()
                })
                .collect();
            let nu = BeliefProfile::from_full(2, &full).unwrap();
            for k in 1..=5 {
                let a = ActionId::new(k, 5).unwrap();
                let closed = g.closed_form(2, a, &nu, &mu).unwrap();
                let enumerated = enumerate_expected_utility(&g, 2, a, &nu, &mu).unwrap();
                assert!((closed - enumerated).abs() < 1e-9 * closed.abs().max(1.0));
            }
        }
    }

    #[test]
    fn translation_covariance() {
        let g = BeautyContest::new(3, 0.5, vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0]).unwrap();
        let u = g.payoff(&[0.0, 5.0, 15.0], 7.0).unwrap();
        let shifted = g.payoff(&[10.0, 15.0, 25.0], 17.0).unwrap();
        for (a, b) in u.iter().zip(&shifted) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn heading_motion() {
        let g = BeautyContest::new(2, 0.5, BeautyContest::degree_grid()).unwrap();
        let mut k = HeadingKinematics::new(&g, vec![[0.0, 0.0]; 2], 0.01);
        let joint = [g.action_at(0.0).unwrap(), g.action_at(90.0).unwrap()];
        k.advance(&joint, &[]).unwrap();
        assert!((k.positions()[0][0] - 0.01).abs() < 1e-12);
        assert!((k.positions()[1][1] - 0.01).abs() < 1e-12);
    }
}
