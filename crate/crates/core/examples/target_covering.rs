// Five robots on a star network choose targets from noisy observations.

use std::path::Path;

use dfplay::harness::{load_scenario, run_single};

pub fn run_example() -> dfplay::Result<()> {
    let scenario = load_scenario(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/cover_star.json"))?;
    let out = run_single(&scenario, Some(7))?;
    let t = &out.trajectory;
    let chosen: Vec<usize> = t.final_actions().unwrap_or_default().iter().map(|a| a.index()).collect();
    match out.convergence_round() {
        Some(round) => println!("all targets covered at round {round}"),
        None => println!("coverage incomplete after {} rounds", t.len()),
    }
    println!("final assignment {chosen:?}");
    if let Some(c) = &out.cover {
        let best: Vec<usize> = c.baseline.assignment.iter().map(|a| a.index()).collect();
        println!("objective {:.4}, centralized assignment {best:?} scores {:.4}", c.objective, c.baseline.objective);
    }
    if let Some(last) = t.records.last().and_then(|r| r.positions.as_ref()) {
        for (i, p) in last.iter().enumerate() {
            println!("  robot {} at ({:.3}, {:.3})", i + 1, p[0], p[1]);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("target covering example failed");
}
