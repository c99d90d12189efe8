use ldp_core::space::tail_budget;
use ldp_core::Discretize;
use serde::Serialize;

use super::sequence;
use crate::config::{ExperimentConfig, Format};
use crate::error::{CliError, CliResult};
use crate::output::{csv_table, json, num, point, write_file};

#[derive(Serialize)]
struct CellMass {
    index: usize,
    tag: String,
    mass: f64,
    good: bool,
}

#[derive(Serialize)]
struct DepthSummary {
    m: usize,
    cells: usize,
    good_cells: usize,
    total_mass: f64,
    bad_mass: f64,
    tail: f64,
    tail_budget: f64,
}

/// Writes `partition_m<m>.json`, `measure_m<m>.<ext>` and `summary.<ext>`
/// into the output directory; returns the summary.
pub fn run(cfg: &ExperimentConfig) -> CliResult<String> {
    let space = cfg.space()?;
    let mu = cfg.measure("mu", &space)?;
    let (min, max) = cfg.depths()?;
    let dir = cfg.out.clone().ok_or_else(|| CliError::spec("out", "discretize writes a directory; pass --out"))?;
    let format = cfg.format();
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let seq = sequence(&mu, &space, max)?;
    let records = seq.to_records();
    let mut summary = Vec::new();
    for m in min..=max {
        let p = seq.at(m)?;
        let depth_records: Vec<_> = records.iter().filter(|r| r.depth() == m).collect();
        write_file(&dir.join(format!("partition_m{m}.json")), &json(&depth_records))?;
        let masses = mu.cell_masses(p)?;
        let cells: Vec<CellMass> = p
            .cells()
            .iter()
            .zip(&masses)
            .enumerate()
            .map(|(index, (c, &mass))| CellMass { index, tag: point(&c.tag), mass, good: c.is_good })
            .collect();
        let body = match format {
            Format::Csv => csv_table(
                &["index", "tag", "mass", "good"],
                &cells.iter().map(|c| vec![c.index.to_string(), c.tag.clone(), num(c.mass), c.good.to_string()]).collect::<Vec<_>>(),
            )?,
            Format::Json => json(&cells),
        };
        write_file(&dir.join(format!("measure_m{m}.{ext}")), &body)?;
        summary.push(DepthSummary {
            m,
            cells: p.len(),
            good_cells: p.good_count(),
            total_mass: masses.iter().sum(),
            bad_mass: cells.iter().filter(|c| !c.good).map(|c| c.mass).sum(),
            tail: seq.exhaustion().tail_bound(m),
            tail_budget: tail_budget(m),
        });
    }
    let body = match format {
        Format::Csv => csv_table(
            &["m", "cells", "good_cells", "total_mass", "bad_mass", "tail", "tail_budget"],
            &summary
                .iter()
                .map(|s| {
                    vec![
                        s.m.to_string(),
                        s.cells.to_string(),
                        s.good_cells.to_string(),
                        num(s.total_mass),
                        num(s.bad_mass),
                        num(s.tail),
                        num(s.tail_budget),
                    ]
                })
                .collect::<Vec<_>>(),
        )?,
        Format::Json => json(&summary),
    };
    write_file(&dir.join(format!("summary.{ext}")), &body)?;
    Ok(body)
}
