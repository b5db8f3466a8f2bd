//! Seeded single runs and parallel batches.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::baseline::{centralized_baseline, Baseline};
use super::scenario::{stream, BuiltGame, Scenario, Stream};
use crate::engine::{run, Kinematics, Simulation, Termination, Trajectory};
use crate::equilibria::{beta_series, BetaSeries};
use crate::error::{Error, Result};
use crate::strategy::ActionId;

/// Shape statistics of the network a run used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub diameter: usize,
    pub mean_path_length: f64,
    pub redraws: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverOutcome {
    /// Global objective of the final assignment at the true targets.
    pub objective: f64,
    pub baseline: Baseline,
    pub reached_baseline: bool,
}

pub struct RunOutput {
    pub scenario: Scenario,
    pub trajectory: Trajectory,
    pub beta: Option<BetaSeries>,
    pub graph: GraphStats,
    pub cover: Option<CoverOutcome>,
}

impl RunOutput {
    /// First round of agreement or coverage; `None` when the run hit its horizon.
    pub fn convergence_round(&self) -> Option<usize> {
        match self.trajectory.termination {
            Termination::Horizon => None,
            Termination::Consensus { onset, .. } => Some(onset),
            Termination::Covered { round } => Some(round),
        }
    }
}

pub(crate) fn execute(scenario: &Scenario, with_beta: bool) -> Result<RunOutput> {
    scenario.validate()?;
    let instance = scenario.instantiate()?;
    let (diameter, mean_path_length) = instance.graph.diameter_and_mean_path()?;
    let mut learning = scenario.build_learning(&instance)?;
    let mut kinematics = scenario.build_kinematics(&instance);
    let game = instance.game.as_game();

    let mut sim = Simulation::new(game, &instance.graph, scenario.variant, scenario.horizon).with_stop(scenario.stop);
    sim.fingerprint = scenario.fingerprint();
    let mut rng = stream(scenario.seed, Stream::Signals);
    let kin = kinematics.as_mut().map(|k| k.as_mut() as &mut dyn Kinematics);
    let trajectory = run(&sim, learning.as_mut(), kin, &mut rng)?;

    let beta = match (&trajectory.reference, with_beta) {
        (Some(mu), true) => Some(beta_series(game, &trajectory, mu)?),
        _ => None,
    };
    let cover = match &instance.game {
        BuiltGame::Cover(g) => {
            let last = trajectory.final_actions().unwrap_or_default().to_vec();
            let baseline = centralized_baseline(scenario)?;
            Some(CoverOutcome {
                objective: g.global_objective(&last, &g.state()),
                reached_baseline: last == baseline.assignment,
                baseline,
            })
        }
        BuiltGame::Beauty(_) => None,
    };
    Ok(RunOutput {
        scenario: scenario.clone(),
        trajectory,
        beta,
        graph: GraphStats { diameter, mean_path_length, redraws: instance.graph_redraws },
        cover,
    })
}

/// Runs a scenario once, with its own seed unless `seed` overrides it.
pub fn run_single(scenario: &Scenario, seed: Option<u64>) -> Result<RunOutput> {
    let scenario = seed.map_or_else(|| scenario.clone(), |s| scenario.with_seed(s));
    execute(&scenario, true)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedRow {
    pub seed: u64,
    pub fingerprint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    pub rounds_played: usize,
    pub convergence_round: Option<usize>,
    /// Value of the agreed action, for consensus runs.
    pub consensus_value: Option<f64>,
    /// Final mean of the learning reference, per state coordinate.
    pub reference_mean: Option<Vec<f64>>,
    pub final_actions: Option<Vec<ActionId>>,
    pub graph: Option<GraphStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SeedRow {
    pub fn from_output(out: &RunOutput) -> Self {
        let t = &out.trajectory;
        SeedRow {
            seed: out.scenario.seed,
            fingerprint: t.fingerprint.clone(),
            termination: Some(t.termination.clone()),
            rounds_played: t.len(),
            convergence_round: out.convergence_round(),
            consensus_value: match t.termination {
                Termination::Consensus { action, .. } => Some(t.action_values[action.slot()]),
                _ => None,
            },
            reference_mean: t.reference.as_ref().map(|r| r.mean()),
            final_actions: t.final_actions().map(<[ActionId]>::to_vec),
            graph: Some(out.graph.clone()),
            cover: out.cover.clone(),
            error: None,
        }
    }

    fn failed(scenario: &Scenario, e: &Error) -> Self {
        SeedRow {
            seed: scenario.seed,
            fingerprint: scenario.fingerprint(),
            termination: None,
            rounds_played: 0,
            convergence_round: None,
            consensus_value: None,
            reference_mean: None,
            final_actions: None,
            graph: None,
            cover: None,
            error: Some(e.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub horizon: usize,
    pub runs: Vec<SeedRow>,
    pub converged: usize,
    /// Runs that reached the horizon without converging.
    pub failures: usize,
    /// Runs that stopped with an error.
    pub errors: usize,
    /// Mean and median over converged runs.
    pub mean_convergence: Option<f64>,
    pub median_convergence: Option<f64>,
    /// Mean with non-converged runs counted at the horizon.
    pub mean_convergence_censored: Option<f64>,
    pub mean_diameter: Option<f64>,
    pub mean_path_length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fraction_reaching_baseline: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_objective: Option<f64>,
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let xs: Vec<f64> = xs.into_iter().collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let k = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[k] } else { (xs[k - 1] + xs[k]) / 2.0 })
}

impl BatchSummary {
    /// Aggregates per-seed rows.
    pub fn from_rows(horizon: usize, runs: Vec<SeedRow>) -> Self {
        let ok: Vec<&SeedRow> = runs.iter().filter(|r| r.error.is_none()).collect();
        let times: Vec<f64> = ok.iter().filter_map(|r| r.convergence_round).map(|t| t as f64).collect();
        let cover: Vec<&CoverOutcome> = ok.iter().filter_map(|r| r.cover.as_ref()).collect();
        BatchSummary {
            horizon,
            converged: times.len(),
            failures: ok.len() - times.len(),
            errors: runs.len() - ok.len(),
            mean_convergence: mean(times.iter().copied()),
            median_convergence: median(times.clone()),
            mean_convergence_censored: mean(ok.iter().map(|r| r.convergence_round.unwrap_or(horizon) as f64)),
            mean_diameter: mean(ok.iter().filter_map(|r| r.graph.as_ref()).map(|g| g.diameter as f64)),
            mean_path_length: mean(ok.iter().filter_map(|r| r.graph.as_ref()).map(|g| g.mean_path_length)),
            fraction_reaching_baseline: mean(cover.iter().map(|c| if c.reached_baseline { 1.0 } else { 0.0 })),
            mean_objective: mean(cover.iter().map(|c| c.objective)),
            runs,
        }
    }
}

/// Runs one trajectory per seed on a pool of `parallelism` workers.
/// Per-seed errors are recorded in the summary rather than aborting the batch.
pub fn run_batch(scenario: &Scenario, seeds: &[u64], parallelism: usize) -> Result<BatchSummary> {
    if seeds.is_empty() {
        return Err(Error::config("seeds", "need at least one seed"));
    }
    scenario.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    let rows = pool.install(|| {
        seeds
            .par_iter()
            .map(|seed| {
                let s = scenario.with_seed(*seed);
                match execute(&s, false) {
                    Ok(out) => SeedRow::from_output(&out),
                    Err(e) => SeedRow::failed(&s, &e),
                }
            })
            .collect()
    });
    Ok(BatchSummary::from_rows(scenario.horizon, rows))
}
