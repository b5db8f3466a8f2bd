//! Distributed fictitious play for networked potential games whose payoffs
//! depend on an uncertain world state.
//!
//! Agents sit on a communication graph, learn the state from private signals
//! and their neighbors, and best respond to local estimates of how everyone
//! else plays.

pub mod belief;
pub mod engine;
pub mod equilibria;
pub mod error;
pub mod game;
pub mod games;
pub mod graph;
pub mod harness;
pub mod strategy;

pub use belief::{Gaussian, GaussianIntegration, SignalModel, StateBelief, WeightMatrix};
pub use engine::{run, Simulation, StopRule, Termination, Trajectory, Variant};
pub use error::{Error, Result};
pub use game::{best_response, Game, TableGame};
pub use games::{BeautyContest, TargetCover};
pub use graph::Graph;
pub use strategy::{ActionId, BeliefProfile, Strategy};
