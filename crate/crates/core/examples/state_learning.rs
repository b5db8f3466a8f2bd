// Consensus averaging and Bayesian updating of a scalar state. Averaging
// agents approach the pooled belief; independent Bayesian agents approach
// the true state but stay wider than the all-signal posterior.

use dfplay::belief::{total_variation, StateBelief};
use dfplay::engine::{AveragingLearning, BayesLearning, StateLearning};
use dfplay::{Graph, SignalModel, WeightMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn trace(label: &str, learning: &mut dyn StateLearning, rounds: usize) -> dfplay::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut beliefs: Vec<StateBelief> = learning.initial(&mut rng)?;
    println!("{label}");
    for t in 1..=rounds {
        if t > 1 {
            beliefs = learning.advance(&beliefs, &mut rng)?;
        }
        if t == 1 || t % 10 == 0 {
            let reference = learning.reference().expect("reference belief");
            let worst = beliefs.iter().map(|b| total_variation(b, &reference)).collect::<dfplay::Result<Vec<_>>>()?;
            let worst = worst.into_iter().fold(0.0, f64::max);
            let miss = beliefs.iter().map(|b| (b.mean()[0] - 90.0).abs()).fold(0.0, f64::max);
            println!(
                "  round {t:>3}: max tv to reference {worst:.4}, max error to the true state {miss:.2}, reference mean {:.2}",
                reference.mean()[0]
            );
        }
    }
    Ok(())
}

pub fn run_example() -> dfplay::Result<()> {
    let graph = Graph::ring(12)?;
    let signal = SignalModel::isotropic(1, 20.0)?;
    let mut averaging = AveragingLearning::new(vec![90.0], signal.clone(), 400.0, WeightMatrix::metropolis(&graph)?)?;
    trace("averaging on a ring of 12", &mut averaging, 60)?;
    let mut bayes = BayesLearning::new(12, vec![90.0], signal)?;
    trace("independent bayesian updating", &mut bayes, 60)
}

#[allow(dead_code)]
fn main() {
    run_example().expect("state learning example failed");
}
