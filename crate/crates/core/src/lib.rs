//! Continuous-time multivariate Hegselmann-Krause opinion dynamics on finite
//! connected graphs, together with the observables and the Monte Carlo harness
//! used to estimate the probability of consensus.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the bottom of this file pin the common `f64` instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod invariants;
pub mod montecarlo;
pub mod numfmt;
pub mod rng;
pub mod scalar;
pub mod space;
pub mod trace;

pub use analysis::{
    check_event_a, classify_consensus, generator_drift, limit_graph, theoretical_bound, total_disagreement,
    BoundInputs, LimitGraph,
};
pub use dynamics::{
    apply_update, compatibility, gillespie_step, local_average, run_trial, stop_reached, CompatibilityView,
    Configuration, ModelParams, Step, StoppingSpec, Trial, TrialOptions, TrialOutcome,
};
pub use error::{Error, Result};
pub use graph::{graph_distance, parse_edge_list, GraphKind, SocialGraph};
pub use montecarlo::{run_estimate, wilson_interval, ExperimentSpec, MonteCarloReport};
pub use rng::RandomStream;
pub use scalar::Scalar;
pub use space::{
    center_and_radius, distance, expected_center_distance, sample_initial, ConvexShape, InitialDistribution, NormSpec,
    OpinionSpace, OpinionVector,
};

pub type OpinionVectorF64 = OpinionVector<f64>;
pub type OpinionSpaceF64 = OpinionSpace<f64>;
pub type ConvexShapeF64 = ConvexShape<f64>;
pub type InitialDistributionF64 = InitialDistribution<f64>;
pub type ConfigurationF64 = Configuration<f64>;
pub type ModelParamsF64 = ModelParams<f64>;
pub type StoppingSpecF64 = StoppingSpec<f64>;
pub type TrialOutcomeF64 = TrialOutcome<f64>;
pub type ExperimentSpecF64 = ExperimentSpec<f64>;
pub type MonteCarloReportF64 = MonteCarloReport<f64>;

pub type OpinionVectorF32 = OpinionVector<f32>;
pub type OpinionSpaceF32 = OpinionSpace<f32>;
pub type ConfigurationF32 = Configuration<f32>;
