// Plugging a user-defined payoff table and belief process into the engine.

use dfplay::belief::StateBelief;
use dfplay::engine::StateLearning;
use dfplay::{run, Graph, Simulation, StopRule, TableGame, Variant};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every agent holds the same fixed belief over the table's states.
struct Fixed(StateBelief, usize);

impl StateLearning for Fixed {
    fn initial(&mut self, _: &mut dyn RngCore) -> dfplay::Result<Vec<StateBelief>> {
        Ok(vec![self.0.clone(); self.1])
    }

    fn advance(&mut self, beliefs: &[StateBelief], _: &mut dyn RngCore) -> dfplay::Result<Vec<StateBelief>> {
        Ok(beliefs.to_vec())
    }

    fn reference(&self) -> Option<StateBelief> {
        Some(self.0.clone())
    }
}

pub fn run_example() -> dfplay::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let game = TableGame::random(4, 3, 2, &mut rng);
    let belief = game.state_belief(vec![0.3, 0.7])?;
    let graph = Graph::ring(4)?;
    for variant in [Variant::ActionSharing, Variant::HistogramSharing] {
        let sim = Simulation::new(&game, &graph, variant, 200).with_stop(StopRule::None);
        let t = run(&sim, &mut Fixed(belief.clone(), 4), None, &mut rng)?;
        let last: Vec<usize> = t.final_actions().unwrap_or_default().iter().map(|a| a.index()).collect();
        println!("{variant:?}: final joint action {last:?} after {} rounds", t.len());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("custom game example failed");
}
