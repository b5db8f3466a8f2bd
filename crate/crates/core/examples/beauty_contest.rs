// Heading agreement on a random geometric network and its small-world
// rewiring, both drawn from the same seed.

use std::path::Path;

use dfplay::harness::{load_scenario, run_single, RunOutput};

fn describe(label: &str, out: &RunOutput) {
    let t = &out.trajectory;
    let pooled = t.reference.as_ref().map(|r| r.mean()[0]).unwrap_or(f64::NAN);
    match out.convergence_round() {
        Some(round) => {
            let value = t.action_values[t.final_actions().unwrap()[0].slot()];
            println!("{label}: agreed on {value} deg at round {round}, pooled signal mean {pooled:.1}");
        }
        None => println!("{label}: no agreement within {} rounds, pooled signal mean {pooled:.1}", t.len()),
    }
    println!("  diameter {}, mean path length {:.2}", out.graph.diameter, out.graph.mean_path_length);
}

pub fn run_example() -> dfplay::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    for (label, file) in [("geometric", "beauty_geometric.json"), ("small world", "beauty_small_world.json")] {
        let scenario = load_scenario(dir.join(file))?;
        describe(label, &run_single(&scenario, Some(3))?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("beauty contest example failed");
}
