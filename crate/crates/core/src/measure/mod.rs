//! Finite, empirical and source measures; pushforward discretization and
//! the cell-wise lifting construction.

mod finite;
mod ops;
mod source;

pub use finite::{EmpiricalMeasure, FiniteMeasure};
pub use ops::{discretize, discretize_empirical, lift, lift_weights, pushforward_weights, sample_empirical, Discretize};
pub use source::{Reweighted, Sampler, SourceMeasure};
