use ldp_core::bl_solution;
use serde_json::json;

use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, CliResult};
use crate::output::{json, num};

/// `d_BL(ν, μ)` for two finite measures.
pub fn run(cfg: &ExperimentConfig) -> CliResult<String> {
    let space = cfg.space()?;
    let nu = cfg.nu.as_ref().ok_or_else(|| CliError::spec("nu", "missing"))?.build_finite("nu", &space)?;
    let mu = cfg.mu.as_ref().ok_or_else(|| CliError::spec("mu", "missing"))?.build_finite("mu", &space)?;
    let sol = bl_solution(&nu, &mu, &space)?;
    Ok(match cfg.format() {
        Format::Csv => format!("{}\n", num(sol.value)),
        Format::Json => json(&json!({ "distance": sol.value, "witness_value": sol.witness_value, "gap": sol.gap })),
    })
}
