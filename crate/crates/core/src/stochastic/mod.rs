//! Seeded randomness, distributions and random graphs.

mod dist;
mod graph;
mod rng;
pub mod stats;

pub use dist::{race_winner, sample_exponential};
pub use graph::{configuration_model, degrees, gamma_degrees, DegreeGraph, DegreeSpec};
pub use rng::RngStream;
