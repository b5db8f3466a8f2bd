// Equilibrium sets of small instances and distances to them.

use dfplay::belief::StateBelief;
use dfplay::equilibria::{consensus_distance, epsilon_nash_check, pure_nash_set, ConsensusSearch, DEFAULT_ENUMERATION_CAP};
use dfplay::game::Game;
use dfplay::{BeautyContest, Strategy, TargetCover};

pub fn run_example() -> dfplay::Result<()> {
    let beauty = BeautyContest::new(3, 0.6, vec![80.0, 85.0, 90.0, 95.0, 100.0])?;
    let mu = StateBelief::point(&[90.0]);
    let pure = pure_nash_set(&beauty, &mu, DEFAULT_ENUMERATION_CAP)?;
    let shown: Vec<Vec<f64>> = pure.iter().map(|p| p.iter().map(|a| beauty.value(*a)).collect()).collect();
    println!("beauty contest pure equilibria: {shown:?}");

    let uniform = vec![Strategy::uniform(beauty.num_actions()); beauty.num_agents()];
    let d = consensus_distance(&uniform, &beauty, &mu, ConsensusSearch::default())?;
    println!("uniform play is {:.4} from the consensus set ({} members)", d.distance, d.members.len());
    println!("uniform play is a 1-equilibrium: {}", epsilon_nash_check(&beauty, &uniform, &mu, 1.0, true)?);

    let cover = TargetCover::reference_instance();
    let pure = pure_nash_set(&cover, &StateBelief::point(&cover.state()), DEFAULT_ENUMERATION_CAP)?;
    println!("target covering: {} pure equilibria, all of them permutations", pure.len());
    let best = pure
        .iter()
        .map(|p| (cover.global_objective(p, &cover.state()), p))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one equilibrium");
    let labels: Vec<usize> = best.1.iter().map(|a| a.index()).collect();
    println!("  best {labels:?} with objective {:.4}", best.0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("equilibria example failed");
}
