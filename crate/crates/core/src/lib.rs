//! Deterministic average-distance estimation and the metric geometry around it.
//!
//! The crate is organised bottom-up:
//!
//! * [`metric`]: finite metrics, weighted graphs, shortest paths, distortion.
//! * [`transforms`]: concave metric transforms and truncation decompositions.
//! * [`cones`]: Euclidean cones, pointed `ℓ_p` products and unions, Mazur maps.
//! * [`graphs`]: rotation-map regular graphs, spectra, conductance, Poincaré constants.
//! * [`zigzag`]: zigzag product, Cesàro averages, edge completion, iteration.
//! * [`approximators`]: expander query sets, sampling baselines, the query game.
//! * [`adversary`]: the adaptive, non-adaptive and small-α lower-bound adversaries.
//! * [`embeddings`]: metric → 3-regular graph, degree extension, outer extension.
//! * [`hadamard`]: numeric CAT(0) and barycentric inequality checks.
//! * [`io`]: text formats for metrics, graphs and decompositions.

pub mod adversary;
pub mod approximators;
pub mod cones;
pub mod embeddings;
mod error;
pub mod game;
pub mod graphs;
pub mod hadamard;
pub mod io;
pub mod metric;
pub mod transforms;
pub mod zigzag;

pub use error::{Error, Result};
pub use metric::{FiniteMetric, WeightedGraph};
