pub mod bl;
pub mod discretize;
pub mod entropy;
pub mod rate;
pub mod verify;

use ldp_core::{build_exhaustion, build_sequence, MetricSpace, PartitionSequence, SourceMeasure};

use crate::error::CliResult;

pub(crate) fn sequence(mu: &SourceMeasure<f64>, space: &MetricSpace<f64>, depth: usize) -> CliResult<PartitionSequence<f64>> {
    let ex = build_exhaustion(mu, space, depth)?;
    Ok(build_sequence(space, &ex, depth)?)
}
