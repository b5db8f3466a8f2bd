//! Scenario files: schema, validation and instantiation.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::belief::{SignalModel, WeightMatrix};
use crate::engine::{AveragingLearning, BayesLearning, Kinematics, StateLearning, StopRule, Variant};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::games::{check_symmetry, BeautyContest, CoverKinematics, HeadingKinematics, TargetCover};
use crate::graph::{Graph, Point};

/// Independent random streams drawn from one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Stream {
    Graph = 1,
    Signals = 2,
    Rewire = 3,
}

pub(crate) fn stream(seed: u64, which: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(which as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GameSpec {
    Beauty {
        n: usize,
        lambda: f64,
        /// True heading in degrees.
        theta: f64,
        /// Action values; 0 to 180 degrees in steps of 5 when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        grid: Option<Vec<f64>>,
        /// Distance moved per round along the chosen heading. Positions are
        /// only tracked when set.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        displacement: Option<f64>,
    },
    Cover {
        robots: Vec<Point>,
        targets: Vec<Point>,
        #[serde(default = "default_capture")]
        capture_radius: f64,
        #[serde(default = "default_step")]
        step_length: f64,
    },
}

fn default_capture() -> f64 {
    0.05
}

fn default_step() -> f64 {
    0.02
}

fn default_side() -> f64 {
    1.0
}

fn default_redraws() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    /// Random geometric graph in a `side x side` square, redrawn until
    /// connected. With `rewire`, the connected geometric graph is then
    /// rewired into a small world.
    Geometric {
        #[serde(default = "default_side")]
        side: f64,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rewire: Option<f64>,
        #[serde(default = "default_redraws")]
        max_redraws: usize,
    },
    Complete,
    /// Agent 0 is the hub.
    Star,
    Ring,
    Path,
    /// `[j, i]` means `i` observes `j`; both directions unless `directed`.
    Explicit {
        edges: Vec<[usize; 2]>,
        #[serde(default)]
        directed: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LearningSpec {
    /// One private signal each, then neighborhood averaging with
    /// Metropolis-Hastings weights.
    Averaging {
        signal_std: f64,
        /// Variance of the initial beliefs; the signal variance when absent.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nominal_variance: Option<f64>,
    },
    /// A fresh private signal every round and a Gaussian posterior.
    Bayes { signal_std: f64 },
}

impl LearningSpec {
    fn signal_std(&self) -> f64 {
        match self {
            LearningSpec::Averaging { signal_std, .. } | LearningSpec::Bayes { signal_std } => *signal_std,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub game: GameSpec,
    pub graph: GraphSpec,
    pub learning: LearningSpec,
    pub variant: Variant,
    pub horizon: usize,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub seed: u64,
}

/// The game a scenario describes.
#[derive(Clone, Debug)]
pub enum BuiltGame {
    Beauty(BeautyContest),
    Cover(TargetCover),
}

impl BuiltGame {
    pub fn as_game(&self) -> &dyn Game {
        match self {
            BuiltGame::Beauty(g) => g,
            BuiltGame::Cover(g) => g,
        }
    }

    /// The true state vector.
    pub fn truth(&self, spec: &GameSpec) -> Vec<f64> {
        match (self, spec) {
            (BuiltGame::Beauty(_), GameSpec::Beauty { theta, .. }) => vec![*theta],
            (BuiltGame::Cover(g), _) => g.state(),
            _ => unreachable!("game built from its own spec"),
        }
    }
}

/// Everything a seed fixes before play starts.
pub struct Instance {
    pub game: BuiltGame,
    pub graph: Graph,
    /// Node positions, for graphs that have them.
    pub positions: Option<Vec<Point>>,
    /// Disconnected draws discarded before the graph was accepted.
    pub graph_redraws: usize,
}

fn cfg(field: &str, message: impl Into<String>) -> Error {
    Error::config(field, message)
}

fn positive(field: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(cfg(field, format!("must be positive and finite, got {x}")))
    }
}

impl Scenario {
    pub fn num_agents(&self) -> usize {
        match &self.game {
            GameSpec::Beauty { n, .. } => *n,
            GameSpec::Cover { robots, .. } => robots.len(),
        }
    }

    /// Checks every field; errors name the offending field.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_agents();
        match &self.game {
            GameSpec::Beauty { n, lambda, theta, grid, displacement } => {
                if *n < 2 {
                    return Err(cfg("game.n", "need at least 2 agents"));
                }
                if !(*lambda > 0.0 && *lambda < 1.0) {
                    return Err(cfg("game.lambda", format!("must lie strictly between 0 and 1, got {lambda}")));
                }
                if !theta.is_finite() {
                    return Err(cfg("game.theta", "must be finite"));
                }
                if let Some(grid) = grid {
                    if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
                        return Err(cfg("game.grid", "must be a nonempty increasing list of finite values"));
                    }
                }
                if let Some(d) = displacement {
                    positive("game.displacement", *d)?;
                }
            }
            GameSpec::Cover { robots, targets, capture_radius, step_length } => {
                if robots.len() < 2 {
                    return Err(cfg("game.robots", "need at least 2 robots"));
                }
                if targets.len() != robots.len() {
                    return Err(cfg("game.targets", "need exactly one target per robot"));
                }
                if robots.iter().chain(targets).flatten().any(|c| !c.is_finite()) {
                    return Err(cfg("game.targets", "coordinates must be finite"));
                }
                positive("game.capture_radius", *capture_radius)?;
                positive("game.step_length", *step_length)?;
            }
        }
        match &self.graph {
            GraphSpec::Geometric { side, radius, rewire, max_redraws } => {
                positive("graph.side", *side)?;
                positive("graph.radius", *radius)?;
                if let Some(p) = rewire {
                    if !(0.0..=1.0).contains(p) {
                        return Err(cfg("graph.rewire", format!("must lie in [0, 1], got {p}")));
                    }
                }
                if *max_redraws == 0 {
                    return Err(cfg("graph.max_redraws", "must be at least 1"));
                }
            }
            GraphSpec::Explicit { edges, .. } => {
                if let Some(e) = edges.iter().find(|e| e[0] >= n || e[1] >= n || e[0] == e[1]) {
                    return Err(cfg("graph.edges", format!("edge {e:?} is a loop or leaves 0..{n}")));
                }
            }
            GraphSpec::Star | GraphSpec::Ring | GraphSpec::Path | GraphSpec::Complete => {
                if matches!(self.graph, GraphSpec::Ring) && n < 3 {
                    return Err(cfg("graph", "a ring needs at least 3 agents"));
                }
            }
        }
        positive("learning.signal_std", self.learning.signal_std())?;
        if let LearningSpec::Averaging { nominal_variance: Some(v), .. } = &self.learning {
            if !(v.is_finite() && *v >= 0.0) {
                return Err(cfg("learning.nominal_variance", "must be nonnegative and finite"));
            }
        }
        if self.horizon == 0 {
            return Err(cfg("horizon", "must be at least 1"));
        }
        match self.stop {
            StopRule::Consensus { window: 0 } => return Err(cfg("stop.window", "must be at least 1")),
            StopRule::Coverage if !matches!(self.game, GameSpec::Cover { .. }) => {
                return Err(cfg("stop", "coverage stopping needs a covering game"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Advisory messages about valid but questionable settings.
    pub fn warnings(&self) -> Result<Vec<String>> {
        let game = self.build_game()?;
        let mut rng = stream(self.seed, Stream::Graph);
        let symmetric = check_symmetry(game.as_game(), 1000, &mut rng);
        let mut out = Vec::new();
        if !symmetric && self.variant == Variant::ActionSharing {
            out.push(
                "the game is not symmetric; action sharing is only guaranteed to converge in symmetric games, \
                 consider histogram-sharing"
                    .to_string(),
            );
        }
        Ok(out)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("scenarios serialize");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn with_seed(&self, seed: u64) -> Scenario {
        Scenario { seed, ..self.clone() }
    }

    pub fn with_horizon(&self, horizon: usize) -> Scenario {
        Scenario { horizon, ..self.clone() }
    }

    pub fn build_game(&self) -> Result<BuiltGame> {
        match &self.game {
            GameSpec::Beauty { n, lambda, grid, .. } => {
                let grid = grid.clone().unwrap_or_else(BeautyContest::degree_grid);
                Ok(BuiltGame::Beauty(BeautyContest::new(*n, *lambda, grid)?))
            }
            GameSpec::Cover { robots, targets, capture_radius, step_length } => {
                let g = TargetCover::new(robots.clone(), targets.clone())?
                    .with_obs_std(self.learning.signal_std())?
                    .with_motion(*step_length, *capture_radius)?;
                Ok(BuiltGame::Cover(g))
            }
        }
    }

    fn build_graph(&self) -> Result<(Graph, Option<Vec<Point>>, usize)> {
        let n = self.num_agents();
        let g = match &self.graph {
            GraphSpec::Geometric { side, radius, rewire, max_redraws } => {
                let mut rng = stream(self.seed, Stream::Graph);
                let mut redraws = 0;
                let (g, pos) = loop {
                    let (g, pos) = Graph::random_geometric(n, *side, *radius, &mut rng)?;
                    if g.is_strongly_connected() {
                        break (g, pos);
                    }
                    redraws += 1;
                    if redraws >= *max_redraws {
                        return Err(Error::domain(format!("no connected geometric graph in {max_redraws} draws")));
                    }
                };
                let Some(p) = rewire else { return Ok((g, Some(pos), redraws)) };
                let mut rng = stream(self.seed, Stream::Rewire);
                let mut tries = 0;
                let rewired = loop {
                    let r = g.small_world_rewire(*p, &mut rng)?;
                    if r.is_strongly_connected() {
                        break r;
                    }
                    tries += 1;
                    if tries >= *max_redraws {
                        return Err(Error::domain(format!("no connected rewiring in {max_redraws} draws")));
                    }
                };
                return Ok((rewired, Some(pos), redraws + tries));
            }
            GraphSpec::Complete => Graph::complete(n),
            GraphSpec::Star => Graph::star(n)?,
            GraphSpec::Ring => Graph::ring(n)?,
            GraphSpec::Path => Graph::path(n)?,
            GraphSpec::Explicit { edges, directed } => Graph::from_edges(n, edges, *directed)?,
        };
        if !g.is_strongly_connected() {
            return Err(cfg("graph", "the network is not connected"));
        }
        Ok((g, None, 0))
    }

    /// Draws the graph for this scenario's seed.
    pub fn instantiate(&self) -> Result<Instance> {
        let game = self.build_game()?;
        let (graph, positions, graph_redraws) = self.build_graph()?;
        Ok(Instance { game, graph, positions, graph_redraws })
    }

    pub(crate) fn build_learning(&self, instance: &Instance) -> Result<Box<dyn StateLearning>> {
        let theta = instance.game.truth(&self.game);
        let signal = SignalModel::isotropic(theta.len(), self.learning.signal_std())?;
        Ok(match &self.learning {
            LearningSpec::Averaging { signal_std, nominal_variance } => {
                let weights = WeightMatrix::metropolis(&instance.graph)?;
                let v = nominal_variance.unwrap_or(signal_std * signal_std);
                Box::new(AveragingLearning::new(theta, signal, v, weights)?)
            }
            LearningSpec::Bayes { .. } => Box::new(BayesLearning::new(self.num_agents(), theta, signal)?),
        })
    }

    pub(crate) fn build_kinematics(&self, instance: &Instance) -> Option<Box<dyn Kinematics>> {
        match (&instance.game, &self.game) {
            (BuiltGame::Beauty(g), GameSpec::Beauty { displacement: Some(d), .. }) => {
                let start = instance.positions.clone().unwrap_or_else(|| vec![[0.0, 0.0]; self.num_agents()]);
                Some(Box::new(HeadingKinematics::new(g, start, *d)))
            }
            (BuiltGame::Cover(g), _) => Some(Box::new(CoverKinematics::new(g))),
            _ => None,
        }
    }
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse { path: path.to_path_buf(), message },
        other => other,
    })
}

/// Parses and validates scenario JSON.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let scenario: Scenario =
        serde_json::from_str(text).map_err(|e| Error::Parse { path: "<scenario>".into(), message: e.to_string() })?;
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beauty(extra: &str) -> String {
        format!(
            r#"{{"game": {{"type": "beauty", "n": 6, "lambda": 0.5, "theta": 90{extra}}},
                "graph": {{"type": "ring"}},
                "learning": {{"type": "averaging", "signal_std": 20}},
                "variant": "action-sharing", "horizon": 50}}"#
        )
    }

    #[test]
    fn parses_with_defaults() {
        let s = parse_scenario(&beauty("")).unwrap();
        assert_eq!(s.stop, StopRule::None);
        assert_eq!(s.seed, 0);
        assert_eq!(s.num_agents(), 6);
    }

    #[test]
    fn lambda_out_of_range_names_the_field() {
        let text = beauty("").replace("0.5", "1.5");
        match parse_scenario(&text) {
            Err(Error::Config { field, .. }) => assert!(field.contains("lambda")),
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(parse_scenario(&beauty(r#", "colour": 3"#)), Err(Error::Parse { .. })));
        let top = beauty("").replace(r#""horizon": 50"#, r#""horizon": 50, "extra": true"#);
        assert!(matches!(parse_scenario(&top), Err(Error::Parse { .. })));
    }

    #[test]
    fn coverage_stop_needs_cover_game() {
        let text = beauty("").replace(r#""horizon": 50"#, r#""horizon": 50, "stop": {"type": "coverage"}"#);
        assert!(matches!(parse_scenario(&text), Err(Error::Config { .. })));
    }

    #[test]
    fn fingerprint_tracks_content() {
        let s = parse_scenario(&beauty("")).unwrap();
        assert_eq!(s.fingerprint(), s.clone().fingerprint());
        assert_ne!(s.fingerprint(), s.with_seed(1).fingerprint());
        assert_eq!(s.fingerprint().len(), 64);
    }

    #[test]
    fn geometric_graphs_are_connected_and_paired() {
        let text = beauty("").replace(r#"{"type": "ring"}"#, r#"{"type": "geometric", "radius": 0.5}"#);
        let s = parse_scenario(&text).unwrap().with_seed(3);
        let a = s.instantiate().unwrap();
        assert!(a.graph.is_strongly_connected());
        let mut rewired = s.clone();
        rewired.graph = GraphSpec::Geometric { side: 1.0, radius: 0.5, rewire: Some(0.0), max_redraws: 1000 };
        let b = rewired.instantiate().unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.positions, b.positions);
    }

    #[test]
    fn asymmetric_game_with_action_sharing_warns() {
        let cover = Scenario {
            game: GameSpec::Cover {
                robots: TargetCover::reference_instance().robots().to_vec(),
                targets: TargetCover::reference_instance().targets().to_vec(),
                capture_radius: 0.05,
                step_length: 0.02,
            },
            graph: GraphSpec::Star,
            learning: LearningSpec::Bayes { signal_std: 0.2 },
            variant: Variant::ActionSharing,
            horizon: 10,
            stop: StopRule::Coverage,
            seed: 0,
        };
        assert_eq!(cover.warnings().unwrap().len(), 1);
        let fine = Scenario { variant: Variant::HistogramSharing, ..cover };
        assert!(fine.warnings().unwrap().is_empty());
        assert!(parse_scenario(&beauty("")).unwrap().warnings().unwrap().is_empty());
    }
}
