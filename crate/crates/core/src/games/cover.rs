//! Target covering: `n` robots pick among `n` targets and are paid
//! `h(x_i, theta_k) = |x_i - theta_k|^-2` for target `k` only when no other
//! robot picks it. `x_i` is the robot's initial position. The state vector
//! stacks the target positions as `[x_1, y_1, x_2, y_2, ...]`.

use rand::{Rng, RngCore};

use crate::belief::{integration_nodes, GaussianIntegration, StateBelief};
use crate::engine::Kinematics;
use crate::error::{Error, Result};
use crate::game::{check_finite, Game};
use crate::graph::Point;
use crate::strategy::{ActionId, BeliefProfile};

#[derive(Clone, Debug, PartialEq)]
pub struct TargetCover {
    robots: Vec<Point>,
    targets: Vec<Point>,
    obs_std: f64,
    capture_radius: f64,
    step_length: f64,
}

impl TargetCover {
    pub fn new(robots: Vec<Point>, targets: Vec<Point>) -> Result<Self> {
        let n = robots.len();
        if n < 2 || targets.len() != n {
            return Err(Error::domain("target covering needs n >= 2 robots and as many targets"));
        }
        if robots.iter().chain(&targets).flatten().any(|c| !c.is_finite()) {
            return Err(Error::domain("positions must be finite"));
        }
        Ok(TargetCover { robots, targets, obs_std: 0.2, capture_radius: 0.05, step_length: 0.02 })
    }

    /// Five robots near the origin and five targets around them.
    pub fn reference_instance() -> Self {
        TargetCover::new(
            vec![[-0.1, -0.1], [0.1, 0.1], [-0.1, 0.1], [0.1, -0.1], [0.0, 0.1]],
            vec![[-1.0, -1.0], [1.0, 1.0], [-1.0, 1.0], [1.0, -1.0], [0.0, 1.0]],
        )
        .expect("valid instance")
    }

    pub fn with_obs_std(mut self, obs_std: f64) -> Result<Self> {
        if !(obs_std > 0.0) {
            return Err(Error::domain("observation noise must be positive"));
        }
        self.obs_std = obs_std;
        Ok(self)
    }

    pub fn with_motion(mut self, step_length: f64, capture_radius: f64) -> Result<Self> {
        if !(step_length > 0.0) || !(capture_radius > 0.0) {
            return Err(Error::domain("step length and capture radius must be positive"));
        }
        self.step_length = step_length;
        self.capture_radius = capture_radius;
        Ok(self)
    }

    pub fn robots(&self) -> &[Point] {
        &self.robots
    }

    pub fn targets(&self) -> &[Point] {
        &self.targets
    }

    pub fn obs_std(&self) -> f64 {
        self.obs_std
    }

    pub fn capture_radius(&self) -> f64 {
        self.capture_radius
    }

    pub fn step_length(&self) -> f64 {
        self.step_length
    }

    /// True target positions as a state vector.
    pub fn state(&self) -> Vec<f64> {
        flatten(&self.targets)
    }

    pub fn reward(x: Point, target: Point) -> f64 {
        1.0 / ((x[0] - target[0]).powi(2) + (x[1] - target[1]).powi(2))
    }

    /// Per-robot payoffs for a joint target choice.
    pub fn payoff(&self, joint: &[ActionId], theta: &[f64]) -> Vec<f64> {
        (0..self.robots.len()).map(|i| self.utility(i, joint, theta)).collect()
    }

    /// Sum of all robots' payoffs.
    pub fn global_objective(&self, joint: &[ActionId], theta: &[f64]) -> f64 {
        self.payoff(joint, theta).iter().sum()
    }

    /// Probability that nobody but `agent` picks target `k` under `nu`.
    fn vacancy(nu: &BeliefProfile, k: ActionId) -> f64 {
        nu.others().map(|(_, s)| 1.0 - s.prob(k)).product()
    }

    fn expected_reward(&self, agent: usize, k: ActionId, mu: &StateBelief) -> Result<f64> {
        let nodes = integration_nodes(mu, GaussianIntegration::PlugInMean)?;
        let v = nodes
            .iter()
            .map(|(w, theta)| w * Self::reward(self.robots[agent], target_of(theta, k)))
            .sum();
        check_finite(agent, v)
    }
}

pub(crate) fn flatten(points: &[Point]) -> Vec<f64> {
    points.iter().flat_map(|p| [p[0], p[1]]).collect()
}

fn target_of(theta: &[f64], k: ActionId) -> Point {
    [theta[2 * k.slot()], theta[2 * k.slot() + 1]]
}

impl Game for TargetCover {
    fn num_agents(&self) -> usize {
        self.robots.len()
    }

    fn num_actions(&self) -> usize {
        self.targets.len()
    }

    fn utility(&self, agent: usize, joint: &[ActionId], theta: &[f64]) -> f64 {
        let k = joint[agent];
        let shared = joint.iter().enumerate().any(|(j, b)| j != agent && *b == k);
        if shared {
            0.0
        } else {
            Self::reward(self.robots[agent], target_of(theta, k))
        }
    }

    /// Vacancy probability under independent beliefs times the reward. Gaussian
    /// state beliefs are evaluated at their mean; categorical ones exactly.
    fn closed_form(&self, agent: usize, action: ActionId, nu: &BeliefProfile, mu: &StateBelief) -> Option<f64> {
        let reward = self.expected_reward(agent, action, mu).ok()?;
        Some(Self::vacancy(nu, action) * reward)
    }

    fn gaussian_integration(&self) -> GaussianIntegration {
        GaussianIntegration::PlugInMean
    }

    fn is_symmetric(&self) -> bool {
        self.robots.windows(2).all(|w| w[0] == w[1])
    }

    fn sample_state(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..2 * self.targets.len()).map(|_| rng.random_range(-1.5..1.5)).collect()
    }
}

/// Moves each robot `step` along the straight line toward the believed
/// position of its chosen target, stopping on arrival.
pub fn integrate_positions(step: f64, positions: &[Point], chosen: &[ActionId], believed: &[Vec<f64>]) -> Result<Vec<Point>> {
    if !(step > 0.0) {
        return Err(Error::domain("step length must be positive"));
    }
    if chosen.len() != positions.len() || believed.len() != positions.len() {
        return Err(Error::domain("one choice and one belief per robot"));
    }
    Ok(positions
        .iter()
        .zip(chosen)
        .zip(believed)
        .map(|((p, k), theta)| {
            let goal = target_of(theta, *k);
            let (dx, dy) = (goal[0] - p[0], goal[1] - p[1]);
            let dist = dx.hypot(dy);
            if dist <= step {
                goal
            } else {
                [p[0] + step * dx / dist, p[1] + step * dy / dist]
            }
        })
        .collect())
}

/// Robot positions during a run plus the coverage test against the true
/// targets.
#[derive(Clone, Debug)]
pub struct CoverKinematics {
    step: f64,
    capture_radius: f64,
    targets: Vec<Point>,
    positions: Vec<Point>,
}

impl CoverKinematics {
    pub fn new(game: &TargetCover) -> Self {
        CoverKinematics {
            step: game.step_length,
            capture_radius: game.capture_radius,
            targets: game.targets.clone(),
            positions: game.robots.clone(),
        }
    }

    /// Robots within the capture radius of target `k`.
    pub fn robots_at(&self, k: usize) -> usize {
        let t = self.targets[k];
        self.positions
            .iter()
            .filter(|p| (p[0] - t[0]).hypot(p[1] - t[1]) <= self.capture_radius)
            .count()
    }
}

impl Kinematics for CoverKinematics {
    fn positions(&self) -> &[Point] {
        &self.positions
    }

    fn advance(&mut self, joint: &[ActionId], beliefs: &[StateBelief]) -> Result<()> {
        let means: Vec<Vec<f64>> = beliefs.iter().map(StateBelief::mean).collect();
        self.positions = integrate_positions(self.step, &self.positions, joint, &means)?;
        Ok(())
    }

    /// Every target has exactly one robot inside its capture radius.
    fn all_covered(&self) -> bool {
        (0..self.targets.len()).all(|k| self.robots_at(k) == 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::Gaussian;
    use crate::game::best_response;
    use crate::strategy::Strategy;

    fn a(k: usize, m: usize) -> ActionId {
        ActionId::new(k, m).unwrap()
    }

    #[test]
    fn shared_target_pays_nothing() {
        let g = TargetCover::reference_instance();
        let joint = [a(1, 5), a(1, 5), a(3, 5), a(4, 5), a(5, 5)];
        let u = g.payoff(&joint, &g.state());
        assert_eq!((u[0], u[1]), (0.0, 0.0));
        assert!(u[2] > 0.0);
    }

    #[test]
    fn reference_assignment_objective() {
        let g = TargetCover::reference_instance();
        let joint: Vec<ActionId> = (1..=5).map(|k| a(k, 5)).collect();
        let v = g.global_objective(&joint, &g.state());
        assert!((v - (4.0 / 1.62 + 1.0 / 0.81)).abs() < 1e-12);
        assert!((v - 3.7037).abs() < 1e-4);
        let worst = [a(1, 5), a(5, 5), a(3, 5), a(4, 5), a(2, 5)];
        let w = g.global_objective(&worst, &g.state());
        assert!((w - (3.0 / 1.62 + 1.0 / 0.82 + 1.0 / 1.81)).abs() < 1e-12);
    }

    #[test]
    fn two_robot_rewards() {
        let g = TargetCover::new(vec![[0.0, 0.0]; 2], vec![[1.0, 0.0], [0.0, 2.0]]).unwrap();
        let u = g.payoff(&[a(1, 2), a(2, 2)], &g.state());
        assert_eq!(u, vec![1.0, 0.25]);
    }

    #[test]
    fn closed_form_examples() {
        let g = TargetCover::new(vec![[0.0, 0.0]; 2], vec![[1.0, 0.0], [0.5f64.sqrt(), 0.0]]).unwrap();
        let mu = StateBelief::Gaussian(Gaussian::point_mass(&g.state()));
        // E h = (1, 2), uniform beliefs over two targets
        let nu = BeliefProfile::consensus(0, 2, &Strategy::uniform(2)).unwrap();
        assert!((g.closed_form(0, a(2, 2), &nu, &mu).unwrap() - 1.0).abs() < 1e-12);
        let taken = BeliefProfile::consensus(0, 2, &Strategy::pure(a(2, 2), 2).unwrap()).unwrap();
        assert_eq!(g.closed_form(0, a(2, 2), &taken, &mu).unwrap(), 0.0);
    }

    #[test]
    fn best_response_avoids_claimed_target() {
        let g = TargetCover::new(vec![[0.0, 0.0]; 2], vec![[0.5, 0.0], [0.0, 1.0]]).unwrap();
        let mu = StateBelief::Gaussian(Gaussian::point_mass(&g.state()));
        let claimed = BeliefProfile::consensus(0, 2, &Strategy::pure(a(1, 2), 2).unwrap()).unwrap();
        assert_eq!(best_response(&g, 0, &claimed, &mu).unwrap(), a(2, 2));
    }

    #[test]
    fn duplicate_is_worse_than_moving_to_a_vacancy() {
        let g = TargetCover::reference_instance();
        let theta = g.state();
        let dup = [a(1, 5), a(1, 5), a(3, 5), a(4, 5), a(5, 5)];
        let moved = [a(1, 5), a(2, 5), a(3, 5), a(4, 5), a(5, 5)];
        assert!(g.global_objective(&dup, &theta) < g.global_objective(&moved, &theta));
    }

    #[test]
    fn motion_toward_belief() {
        let at_goal = integrate_positions(0.02, &[[1.0, 1.0]], &[a(1, 1)], &[vec![1.0, 1.0]]).unwrap();
        assert_eq!(at_goal[0], [1.0, 1.0]);
        let moved = integrate_positions(0.02, &[[0.0, 0.0]], &[a(1, 1)], &[vec![1.0, 0.0]]).unwrap();
        assert!((moved[0][0] - 0.02).abs() < 1e-12 && moved[0][1] == 0.0);
        assert!(integrate_positions(0.0, &[[0.0, 0.0]], &[a(1, 1)], &[vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn coverage_needs_exactly_one_robot_per_target() {
        let g = TargetCover::new(vec![[0.0, 0.0]; 2], vec![[1.0, 0.0], [0.0, 1.0]]).unwrap();
        let mut k = CoverKinematics::new(&g);
        k.positions = vec![[1.0, 0.01], [0.0, 0.99]];
        assert!(k.all_covered());
        k.positions = vec![[1.0, 0.01], [1.0, 0.0]];
        assert!(!k.all_covered());
    }
}
