//! Config-driven front end for `trackback-core`.

pub mod config;
pub mod output;

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use trackback_core::{
    compute_metrics, simulate, tune, Controls, Model, RecoveryMetrics, Trace, TuneResult,
};

pub use config::{load, parse_config, render, RunConfig};

pub const TRACE_FILE: &str = "trace.csv";
pub const METRICS_FILE: &str = "metrics.txt";
pub const HISTORY_FILE: &str = "history.csv";
pub const TUNED_CONFIG_FILE: &str = "tuned.toml";
pub const COMPARE_TRACE_FILE: &str = "compare.csv";
pub const COMPARE_METRICS_FILE: &str = "compare.txt";

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub controls: Controls,
    pub trace: Trace,
    pub metrics: RecoveryMetrics,
}

/// How the process should exit after a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Recovered, or a pure simulation that ran to the horizon.
    Ok,
    /// Controlled run that did not recover.
    NotRecovered,
    /// The vehicle left the speed range where the model is valid.
    SimulationFailed,
}

impl Verdict {
    pub fn of(outcome: &RunOutcome, controlled: bool) -> Self {
        if outcome.trace.failed() {
            Verdict::SimulationFailed
        } else if !controlled || outcome.metrics.recovered {
            Verdict::Ok
        } else {
            Verdict::NotRecovered
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Ok => 0,
            Verdict::NotRecovered => 1,
            Verdict::SimulationFailed => 3,
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Simulates a config without writing anything.
pub fn simulate_config(cfg: &RunConfig, controlled: bool) -> Result<RunOutcome> {
    let controls = if controlled {
        cfg.controls()?
    } else {
        Controls::uncontrolled(cfg.f_initial()?)
    };
    let trace = simulate(&cfg.scenario, &cfg.sim, &controls, &cfg.vehicle);
    let metrics = compute_metrics(&trace, &cfg.thresholds)?;
    Ok(RunOutcome {
        controls,
        trace,
        metrics,
    })
}

/// Simulates a config and writes the trace and metrics files into `out`.
pub fn run(cfg: &RunConfig, controlled: bool, out: &Path) -> Result<RunOutcome> {
    let outcome = simulate_config(cfg, controlled)?;
    prepare(out)?;
    write(out, TRACE_FILE, &output::trace_csv(&outcome.trace))?;
    write(
        out,
        METRICS_FILE,
        &output::metrics_text(
            cfg,
            &outcome.controls,
            controlled,
            &outcome.trace,
            &outcome.metrics,
        ),
    )?;
    Ok(outcome)
}

/// Tunes the config's controls, then writes the history, the tuned config,
/// and the trace and metrics of the best parameters.
pub fn tune_config(cfg: &RunConfig, out: &Path) -> Result<(TuneResult, RunConfig, RunOutcome)> {
    let spec = cfg.tune_spec()?.context("config has no [tune] section")?;
    let result = tune(&spec, &cfg.scenario, &cfg.sim, &cfg.vehicle)?;
    let tuned = cfg.with_controls(&result.best);
    prepare(out)?;
    write(out, HISTORY_FILE, &output::history_csv(&spec, &result))?;
    write(out, TUNED_CONFIG_FILE, &render(&tuned))?;
    let outcome = run(&tuned, true, out)?;
    Ok((result, tuned, outcome))
}

/// Column suffixes for a comparison: the model suffixes when the models
/// differ, otherwise `a` and `b`.
pub fn compare_suffixes(a: Model, b: Model) -> [&'static str; 2] {
    if a == b {
        ["a", "b"]
    } else {
        [a.suffix(), b.suffix()]
    }
}

/// Runs two configs on the same scenario and writes them side by side.
pub fn compare(a: &RunConfig, b: &RunConfig, out: &Path) -> Result<[RunOutcome; 2]> {
    if a.scenario != b.scenario {
        bail!(
            "configs describe different scenarios (`{}` vs `{}`)",
            a.scenario.label,
            b.scenario.label
        );
    }
    if a.sim.horizon != b.sim.horizon {
        bail!(
            "configs use different horizons ({} s vs {} s)",
            a.sim.horizon,
            b.sim.horizon
        );
    }
    if a.sim.dt * a.sim.record_stride as f64 != b.sim.dt * b.sim.record_stride as f64 {
        bail!("configs record at different intervals; align dt and record_stride");
    }
    let ra = simulate_config(a, true)?;
    let rb = simulate_config(b, true)?;
    let suffixes = compare_suffixes(a.sim.model, b.sim.model);
    prepare(out)?;
    write(
        out,
        COMPARE_TRACE_FILE,
        &output::merged_trace_csv(&ra.trace, &rb.trace, suffixes[0], suffixes[1]),
    )?;
    let labels = [
        format!("{} ({})", a.sim.model, suffixes[0]),
        format!("{} ({})", b.sim.model, suffixes[1]),
    ];
    write(
        out,
        COMPARE_METRICS_FILE,
        &output::comparison_text(
            [&labels[0], &labels[1]],
            [
                (a, &ra.controls, &ra.trace, &ra.metrics),
                (b, &rb.controls, &rb.trace, &rb.metrics),
            ],
        ),
    )?;
    Ok([ra, rb])
}
