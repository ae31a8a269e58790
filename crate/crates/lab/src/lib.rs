//! File formats, scenario config and the `odt-lab` command line around the
//! `odt-core` simulator.
//!
//! `run` simulates the `[system]` of a config over the demand levels; `sweep`
//! does the same for every system of `[[sweep.systems]]` with shared seeds
//! and compares their generalized-cost curves. Both write their tables and a
//! `manifest.json` with output hashes into one directory.

pub mod config;
pub mod io;
pub mod output;
pub mod report;
pub mod study;

use std::path::Path;

use anyhow::{Context, Result};

use config::Config;
use output::Outputs;
use study::Inputs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Run,
    Sweep,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Sweep => "sweep",
        }
    }
}

/// Simulates and analyses `cfg`, writing everything to `out`. Warnings
/// gathered on the way are appended to `warnings` and the manifest.
#[allow(clippy::too_many_arguments)]
pub fn execute(
    cfg: &Config,
    inputs: &Inputs,
    command: Command,
    seed: u64,
    jobs: usize,
    config_sha256: String,
    out: &Path,
    warnings: &mut Vec<String>,
) -> Result<()> {
    let a = &cfg.analysis;
    let systems = match command {
        Command::Run => vec![cfg.system.clone().context("run needs a [system] section")?],
        Command::Sweep => cfg.sweep_systems(),
    };
    let levels = &a.demand_levels;
    let runs = study::run_all(&systems, levels, inputs, seed, &cfg.costs, &a.surge_pct, jobs)?;
    for r in &runs {
        if r.costs.iter().any(|(_, c)| c.negative_trip_cost) {
            warnings.push(format!("{} at {}%: fare exceeds the per-trip ride-hailing cost", r.system.name, r.level));
        }
    }
    let curves = study::gc_curves(&runs, &systems, a.vot, a.served_threshold);
    let switching = study::crossings(&curves, warnings);
    let emissions = study::emissions_rows(&runs, &inputs.net, &cfg.emissions, &a.electrification_levels, warnings)?;
    let equity = study::equity_rows(&runs, cfg, &inputs.net, &a.equity_levels, warnings);
    for w in warnings.iter() {
        log::warn!("{w}");
    }
    let outputs = Outputs {
        command: command.as_str(),
        scenario: &cfg.scenario,
        seed,
        config_sha256,
        runs: &runs,
        curves: &curves,
        switching: &switching,
        emissions: &emissions,
        equity: &equity,
        warnings,
    };
    output::write_staged(out, |dir| output::write_all(&outputs, dir))
}
