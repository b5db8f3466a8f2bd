//! Structural and oracle checks on a scenario's game.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::scenario::BuiltGame;
use crate::belief::{Gaussian, StateBelief};
use crate::equilibria::{brute_force_expected_utility, DEFAULT_ENUMERATION_CAP};
use crate::error::Result;
use crate::game::{expected_utility_under_beliefs, Game};
use crate::games::{check_potential_cycle, check_symmetry, BeautyContest};
use crate::strategy::{ActionId, BeliefProfile, Strategy};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_strategy(m: usize, rng: &mut impl Rng) -> Strategy {
    let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    Strategy::new(w.into_iter().map(|x| x / total).collect()).expect("normalized weights")
}

/// Largest gap between the game's own expected utilities and the recursive
/// oracle over `samples` random belief draws.
pub fn oracle_gap<G: Game + ?Sized>(game: &G, samples: usize, rng: &mut impl Rng) -> Result<f64> {
    let (n, m) = (game.num_agents(), game.num_actions());
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let profile: Vec<Strategy> = (0..n).map(|_| random_strategy(m, rng)).collect();
        let i = rng.random_range(0..n);
        let nu = BeliefProfile::from_full(i, &profile)?;
        let theta = game.sample_state(rng);
        let spread = rng.random_range(0.0..0.5) * theta.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let mu = StateBelief::Gaussian(Gaussian::isotropic(&theta, spread * spread)?);
        let a = ActionId::new(rng.random_range(1..=m), m)?;
        let fast = expected_utility_under_beliefs(game, i, a, &nu, &mu)?;
        let slow = brute_force_expected_utility(game, i, a, &nu, &mu, DEFAULT_ENUMERATION_CAP)?;
        worst = worst.max((fast - slow).abs() / slow.abs().max(1.0));
    }
    Ok(worst)
}

/// Symmetry, potential-cycle and oracle checks. A game that does not claim
/// symmetry is not failed for lacking it. Oracle checks on beauty contests
/// use a three-agent copy so that enumeration stays small.
pub fn verify_game(game: &BuiltGame, samples: usize, seed: u64) -> Result<VerifyReport> {
    let g = game.as_game();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    let symmetric = check_symmetry(g, samples, &mut rng);
    checks.push(Check {
        name: "symmetry".into(),
        passed: symmetric || !g.is_symmetric(),
        detail: format!("swap test {} on {samples} samples; declared symmetric: {}", verdict(symmetric), g.is_symmetric()),
    });

    let potential = check_potential_cycle(g, samples, &mut rng);
    checks.push(Check {
        name: "potential-cycle".into(),
        passed: potential,
        detail: format!("four-cycle test {} on {samples} samples", verdict(potential)),
    });

    let oracle_samples = samples.min(1000);
    let gap = match game {
        BuiltGame::Beauty(b) => {
            let small = BeautyContest::new(3, b.lambda(), b.grid().to_vec())?;
            oracle_gap(&small, oracle_samples, &mut rng)?
        }
        BuiltGame::Cover(c) => oracle_gap(c, oracle_samples, &mut rng)?,
    };
    checks.push(Check {
        name: "oracle-equivalence".into(),
        passed: gap <= 1e-9,
        detail: format!("largest relative gap {gap:.3e} over {oracle_samples} samples"),
    });
    Ok(VerifyReport { checks })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "passed"
    } else {
        "failed"
    }
}
