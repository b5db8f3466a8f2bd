// Communication graphs and their path statistics.

use dfplay::Graph;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn show(label: &str, g: &Graph) -> dfplay::Result<()> {
    let connected = g.is_strongly_connected();
    if connected {
        let (d, l) = g.diameter_and_mean_path()?;
        println!("{label}: {} edges, diameter {d}, mean path {l:.2}", g.edge_count());
    } else {
        println!("{label}: {} edges, disconnected", g.edge_count());
    }
    Ok(())
}

pub fn run_example() -> dfplay::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    show("star", &Graph::star(20)?)?;
    show("ring", &Graph::ring(20)?)?;
    show("path", &Graph::path(20)?)?;
    let geometric = loop {
        let (g, _) = Graph::random_geometric(50, 1.0, 0.3, &mut rng)?;
        if g.is_strongly_connected() {
            break g;
        }
    };
    show("geometric r=0.3", &geometric)?;
    for p in [0.05, 0.2, 0.5] {
        show(&format!("rewired p={p}"), &geometric.small_world_rewire(p, &mut rng)?)?;
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("network example failed");
}
