//! Discretization machinery for large deviations of empirical measures:
//! compact exhaustions, nested tagged partitions, pushforward measures,
//! relative entropy, the bounded-Lipschitz metric and a verification
//! harness for Sanov-type rate statements.
//!
//! The numeric core is generic over [`Real`] (`f32`, `f64`); the `*64`
//! aliases fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bl;
pub mod entropy;
pub mod error;
pub mod harness;
pub mod measure;
pub mod partition;
pub mod rng;
pub mod scalar;
pub mod space;
pub mod special;

pub use bl::{bl_distance, bl_solution, coupling_bound, in_ball, projection_coupling_bound, projection_distance_bound, BlInstance, BlSolution};
pub use entropy::{
    entropy_inequality_check, entropy_ladder, martingale_trace, relative_entropy_integral, relative_entropy_variational, EntropyLadder,
    MartingaleTrace,
};
pub use error::{Error, Result};
pub use harness::{
    ball_inf_entropy, exp_equivalence_check, mc_rate, proposition_chain_check, supinf_ladder, types_probability, RateReport, TypesProbability,
};
pub use measure::{discretize, discretize_empirical, lift, sample_empirical, Discretize, EmpiricalMeasure, FiniteMeasure, Reweighted, SourceMeasure};
pub use partition::{build_sequence, refine_check, Cell, CellRecord, PartitionSequence, TaggedPartition, ValidationReport};
pub use scalar::{ExactScalar, Real};
pub use space::{build_exhaustion, CompactExhaustion, MetricSpace, Point, Region, Span};

pub type Point64 = Point<f64>;
pub type MetricSpace64 = MetricSpace<f64>;
pub type CompactExhaustion64 = CompactExhaustion<f64>;
pub type FiniteMeasure64 = FiniteMeasure<f64>;
pub type EmpiricalMeasure64 = EmpiricalMeasure<f64>;
pub type SourceMeasure64 = SourceMeasure<f64>;
pub type TaggedPartition64 = TaggedPartition<f64>;
pub type PartitionSequence64 = PartitionSequence<f64>;
