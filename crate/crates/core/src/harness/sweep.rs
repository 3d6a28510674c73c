use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{OutputKind, SweepConfig};
use crate::error::Result;
use crate::optimize::max_purity;
use crate::system::System;

/// One grid point. Columns that were not requested, or that could not be
/// computed because the point failed, are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_value_ghz: f64,
    pub s_max: Option<f64>,
    pub c_plus_abs: Option<f64>,
    pub theta_rad: Option<f64>,
    pub s_diff: Option<f64>,
    pub a_pm: Option<f64>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    /// Row with the wall-time column cleared, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_ms: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Serial,
    Parallel,
}

/// Build → diagonalize → channel at `time_ns` → optimize → overlap metric.
pub fn evaluate_point(config: &SweepConfig, value_ghz: f64) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        sweep_value_ghz: value_ghz,
        s_max: None,
        c_plus_abs: None,
        theta_rad: None,
        s_diff: None,
        a_pm: None,
        wall_ms: 0.0,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let params = config
            .variable
            .apply(&config.base, value_ghz)
            .to_params(config.n_bath)?;
        let system = System::new(params, config.temperature)?;
        let needs_optimum = config.wants(OutputKind::SMax)
            || config.wants(OutputKind::SDiff)
            || config.wants(OutputKind::ArgmaxState);
        if needs_optimum {
            let report = max_purity(&system.channel(config.time_ns));
            if config.wants(OutputKind::SMax) {
                row.s_max = Some(report.s_max);
            }
            if config.wants(OutputKind::ArgmaxState) {
                row.c_plus_abs = Some(report.c_plus_abs());
                row.theta_rad = Some(report.theta());
            }
            if config.wants(OutputKind::SDiff) {
                row.s_diff = Some(report.s_diff);
            }
        }
        if config.wants(OutputKind::APm) {
            row.a_pm = Some(system.overlap_metric().a_plus_minus);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row = SweepRow {
            s_max: None,
            c_plus_abs: None,
            theta_rad: None,
            s_diff: None,
            a_pm: None,
            error: Some(format!("g = {value_ghz} GHz: {e}")),
            ..row
        };
    }
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

pub fn run_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    run_sweep_with(config, Execution::Parallel)
}

/// Rows come back in grid order. A failing point yields a row with `error`
/// set; the remaining points are still computed.
pub fn run_sweep_with(config: &SweepConfig, execution: Execution) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let grid = config.grid();
    let rows = match execution {
        Execution::Serial => grid.iter().map(|&v| evaluate_point(config, v)).collect(),
        Execution::Parallel => grid
            .par_iter()
            .map(|&v| evaluate_point(config, v))
            .collect(),
    };
    Ok(rows)
}
