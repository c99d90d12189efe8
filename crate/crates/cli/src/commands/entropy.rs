use ldp_core::{entropy_ladder, EntropyLadder};
use serde_json::json;

use super::sequence;
use crate::config::{ExperimentConfig, Format};
use crate::error::CliResult;
use crate::output::{json, num};

/// `H(ν^m|μ^m)` over the configured depth range.
pub fn run(cfg: &ExperimentConfig) -> CliResult<String> {
    let space = cfg.space()?;
    let mu = cfg.measure("mu", &space)?;
    let nu = cfg.measure("nu", &space)?;
    let (min, max) = cfg.depths()?;
    let seq = sequence(&mu, &space, max)?;
    let full = entropy_ladder(&nu, &mu, &seq)?;
    let keep = |v: &[f64]| v[min - 1..].to_vec();
    let ladder = EntropyLadder { depths: full.depths[min - 1..].to_vec(), values: keep(&full.values), limit_estimate: full.limit_estimate };
    Ok(match cfg.format() {
        Format::Csv => ladder.to_csv(),
        Format::Json => {
            let rows: Vec<_> = ladder.depths.iter().zip(&ladder.values).map(|(m, h)| json!({ "m": m, "H_m": value(*h) })).collect();
            json(&json!({ "ladder": rows, "limit_estimate": value(ladder.limit_estimate) }))
        }
    })
}

fn value(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(num(x))
    }
}
