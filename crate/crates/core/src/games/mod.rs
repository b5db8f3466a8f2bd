//! Benchmark games and randomized checks of their structure.

pub mod beauty;
pub mod cover;

use rand::{Rng, RngCore};

use crate::game::Game;
use crate::strategy::ActionId;

pub use beauty::{BeautyContest, HeadingKinematics};
pub use cover::{integrate_positions, CoverKinematics, TargetCover};

const STRUCTURE_TOL: f64 = 1e-9;

fn random_profile(n: usize, m: usize, rng: &mut dyn RngCore) -> Vec<ActionId> {
    (0..n).map(|_| ActionId::from_slot(rng.random_range(0..m))).collect()
}

fn distinct_pair(n: usize, rng: &mut dyn RngCore) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let j = (i + 1 + rng.random_range(0..n - 1)) % n;
    (i, j)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= STRUCTURE_TOL * a.abs().max(b.abs()).max(1.0)
}

/// Samples profiles, states, and agent pairs and checks that swapping two
/// agents together with their actions swaps their payoffs.
pub fn check_symmetry<G: Game + ?Sized>(game: &G, samples: usize, rng: &mut dyn RngCore) -> bool {
    let (n, m) = (game.num_agents(), game.num_actions());
    if n < 2 {
        return true;
    }
    (0..samples).all(|_| {
        let theta = game.sample_state(rng);
        let a = random_profile(n, m, rng);
        let (i, j) = distinct_pair(n, rng);
        let mut swapped = a.clone();
        swapped.swap(i, j);
        close(game.utility(i, &a, &theta), game.utility(j, &swapped, &theta))
    })
}

/// Four-cycle test of the potential property: along the closed path
/// `a -> (a_i', a_j) -> (a_i', a_j') -> (a_i, a_j') -> a`, the movers' payoff
/// changes must sum to zero.
pub fn check_potential_cycle<G: Game + ?Sized>(game: &G, samples: usize, rng: &mut dyn RngCore) -> bool {
    let (n, m) = (game.num_agents(), game.num_actions());
    if n < 2 {
        return true;
    }
    (0..samples).all(|_| {
        let theta = game.sample_state(rng);
        let a = random_profile(n, m, rng);
        let (i, j) = distinct_pair(n, rng);
        let ai2 = ActionId::from_slot(rng.random_range(0..m));
        let aj2 = ActionId::from_slot(rng.random_range(0..m));
        let with = |x: ActionId, y: ActionId| {
            let mut p = a.clone();
            p[i] = x;
            p[j] = y;
            p
        };
        let p0 = a.clone();
        let p1 = with(ai2, a[j]);
        let p2 = with(ai2, aj2);
        let p3 = with(a[i], aj2);
        let u = |k: usize, p: &[ActionId]| game.utility(k, p, &theta);
        let steps = [
            u(i, &p1) - u(i, &p0),
            u(j, &p2) - u(j, &p1),
            u(i, &p3) - u(i, &p2),
            u(j, &p0) - u(j, &p3),
        ];
        let scale = steps.iter().map(|s| s.abs()).fold(1.0, f64::max);
        steps.iter().sum::<f64>().abs() <= STRUCTURE_TOL * scale
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::TableGame;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn beauty_contest_is_a_symmetric_potential_game() {
        let g = BeautyContest::new(5, 0.5, BeautyContest::degree_grid()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(check_symmetry(&g, 10_000, &mut rng));
        assert!(check_potential_cycle(&g, 10_000, &mut rng));
    }

    #[test]
    fn common_start_cover_is_symmetric_and_potential() {
        let g = TargetCover::new(vec![[0.0, 0.0]; 5], TargetCover::reference_instance().targets().to_vec()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(g.is_symmetric());
        assert!(check_symmetry(&g, 10_000, &mut rng));
        assert!(check_potential_cycle(&g, 10_000, &mut rng));
    }

    #[test]
    fn distinct_start_cover_is_not_symmetric() {
        let g = TargetCover::reference_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(!g.is_symmetric());
        assert!(!check_symmetry(&g, 10_000, &mut rng));
    }

    #[test]
    fn distinct_start_cover_has_a_nonzero_four_cycle() {
        // i: 1 -> 2 -> 1 while j: 2 -> 3 -> 2, nobody else near targets 1..3;
        // the cycle sums to h(x_j, theta_2) - h(x_i, theta_2)
        let g = TargetCover::reference_instance();
        let theta = g.state();
        let id = |k| ActionId::new(k, 5).unwrap();
        let p0 = [id(1), id(2), id(4), id(4), id(5)];
        let p1 = [id(2), id(2), id(4), id(4), id(5)];
        let p2 = [id(2), id(3), id(4), id(4), id(5)];
        let p3 = [id(1), id(3), id(4), id(4), id(5)];
        let sum = (g.utility(0, &p1, &theta) - g.utility(0, &p0, &theta))
            + (g.utility(1, &p2, &theta) - g.utility(1, &p1, &theta))
            + (g.utility(0, &p3, &theta) - g.utility(0, &p2, &theta))
            + (g.utility(1, &p0, &theta) - g.utility(1, &p3, &theta));
        let expected = TargetCover::reward(g.robots()[1], [1.0, 1.0]) - TargetCover::reward(g.robots()[0], [1.0, 1.0]);
        assert!((sum - expected).abs() < 1e-12);
        assert!(sum.abs() > 0.1);
    }

    #[test]
    fn corrupted_utility_breaks_the_potential() {
        let mut g = BeautyContestTable::from_beauty();
        let id = |k| ActionId::new(k, 3).unwrap();
        g.0.set(0, 0, &[id(1), id(2)], 1e3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(!check_potential_cycle(&g.0, 10_000, &mut rng));
    }

    #[test]
    fn coordination_table_is_potential() {
        let g = TableGame::coordination(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!(check_potential_cycle(&g, 10_000, &mut rng));
        assert!(check_symmetry(&g, 10_000, &mut rng));
    }

    /// A 2-agent, 3-action beauty contest tabulated at a single state.
    struct BeautyContestTable(TableGame);

    impl BeautyContestTable {
        fn from_beauty() -> Self {
            let b = BeautyContest::new(2, 0.5, vec![80.0, 90.0, 100.0]).unwrap();
            let mut t = TableGame::new(2, 3, 1, vec![vec![vec![0.0; 9]]; 2]).unwrap();
            crate::game::for_each_profile(2, 3, |joint| {
                for i in 0..2 {
                    t.set(i, 0, joint, b.utility(i, joint, &[92.0]));
                }
                Ok(())
            })
            .unwrap();
            BeautyContestTable(t)
        }
    }
}
