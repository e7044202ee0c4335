//! Temporal independent cascade (T-IC) diffusion on evolving contact networks.
//!
//! The crate covers the whole pipeline: turning raw contacts into per-interval
//! propagation probabilities, simulating cascades, sampling random reachable
//! sets into a hypergraph, and selecting sentinel (reverse spread) or
//! susceptible (expected spread) node sets from it. Evaluation metrics and a
//! few intervention analyses sit on top.
//!
//! Monte Carlo loops run on rayon when the `parallel` feature is enabled (the
//! default) and fall back to plain iterators otherwise. Every stochastic entry
//! point takes a master seed; per-simulation streams are derived from it, so
//! results do not depend on the number of worker threads.

pub mod cascade;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod ingest;
pub mod interventions;
pub mod probability_model;
pub mod sampler;
pub mod solvers;
pub mod temporal_graph;

pub use cascade::{
    estimate_activation_probabilities, exact_activation_probabilities, run_tic, CascadeTrace,
    EdgeCoins, KeyedCoins,
};
pub use error::{Error, ErrorKind, Result};
pub use exec::{SimPlan, Workers};
pub use sampler::{build_hypergraph, Hypergraph};
pub use solvers::{Method, SolutionSet};
pub use temporal_graph::{EdgeRecord, NodeId, TemporalNetwork, Window};
