use ldp_core::harness::BallSet;
use ldp_core::{discretize, mc_rate};

use super::sequence;
use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, CliResult};
use crate::output::json;

/// Monte Carlo decay rate of `P(L_n ∈ B̄_r(center))` against the entropy
/// infimum over the ball.
pub fn run(cfg: &ExperimentConfig) -> CliResult<String> {
    let space = cfg.space()?;
    let mu = cfg.measure("mu", &space)?;
    let set = cfg.set.as_ref().ok_or_else(|| CliError::spec("set", "missing"))?;
    let center = set.center.build_finite("set.center", &space)?;
    if set.radius.is_nan() || set.radius <= 0.0 {
        return Err(CliError::spec("set.radius", "must be positive"));
    }
    let n_list = cfg.n_list()?;
    let reps = cfg.reps()?;
    let seed = cfg.seed()?;
    let reference = match mu.as_finite() {
        Some(fm) => fm.clone(),
        None => {
            let (_, max) = cfg.depths()?;
            let seq = sequence(&mu, &space, max)?;
            discretize(&mu, seq.at(max)?)?
        }
    };
    let report = mc_rate(&mu, &reference, &space, &BallSet { center, radius: set.radius }, &n_list, reps, seed)?;
    Ok(match cfg.format() {
        Format::Csv => report.to_csv(),
        Format::Json => json(&report),
    })
}
