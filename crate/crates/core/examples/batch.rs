// A parallel seed sweep written out as a summary file.

use std::path::Path;

use dfplay::harness::{emit_summary, load_scenario, run_batch};

pub fn run_example() -> dfplay::Result<()> {
    let scenario = load_scenario(Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/cover_star.json"))?;
    let seeds: Vec<u64> = (0..8).collect();
    let summary = run_batch(&scenario, &seeds, 4)?;
    for row in &summary.runs {
        let objective = row.cover.as_ref().map_or(f64::NAN, |c| c.objective);
        println!("seed {}: covered at {:?}, objective {objective:.4}", row.seed, row.convergence_round);
    }
    println!(
        "{} of {} covered, mean round {:?}, baseline reached in {:?} of runs",
        summary.converged,
        seeds.len(),
        summary.mean_convergence,
        summary.fraction_reaching_baseline
    );
    let dir = std::env::temp_dir().join(format!("dfplay-batch-example-{}", std::process::id()));
    let path = emit_summary(&summary, &dir)?;
    println!("summary written to {}", path.display());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("batch example failed");
}
