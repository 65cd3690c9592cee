use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use trackback_cli::{compare, load, run, tune_config, RunConfig, Verdict};
use trackback_core::Model;

/// Post-impact trajectory restoration simulator.
///
/// CONFIG is a TOML file path or the name of a bundled config
/// (case1_generalized, case1_reference, case2_generalized, case2_reference).
#[derive(Parser)]
#[command(name = "trackback", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one config and write trace.csv and metrics.txt.
    ///
    /// Exits 0 when the run recovers (or with --no-control), 1 when a
    /// controlled run does not recover, 3 when the vehicle leaves the model's
    /// valid speed range.
    Run {
        config: String,
        /// Zero steering and constant cruise force.
        #[arg(long)]
        no_control: bool,
        /// Override the model named in the config.
        #[arg(long, value_parser = parse_model)]
        model: Option<Model>,
        /// Output directory (default: [output] dir, else out/<config name>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tune the free parameters listed in [tune]. Writes history.csv and
    /// tuned.toml next to the run outputs of the best parameters.
    Tune {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run two configs on the same scenario; write compare.csv and compare.txt.
    Compare {
        config_a: String,
        config_b: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse()
}

fn out_dir(flag: Option<PathBuf>, cfg: &RunConfig, name: &str) -> PathBuf {
    flag.or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(name))
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<u8> {
    match Cli::parse().command {
        Command::Run {
            config,
            no_control,
            model,
            out,
        } => {
            let (name, mut cfg) = load(&config)?;
            if let Some(m) = model {
                cfg.sim.model = m;
                cfg.validate()?;
            }
            let dir = out_dir(out, &cfg, &name);
            let outcome = run(&cfg, !no_control, &dir)?;
            summarize(
                &name,
                &dir,
                &outcome.metrics,
                outcome.trace.failure.as_ref(),
            );
            Ok(Verdict::of(&outcome, !no_control).exit_code())
        }
        Command::Tune { config, out } => {
            let (name, cfg) = load(&config)?;
            let dir = out_dir(out, &cfg, &format!("{name}_tuned"));
            let (result, _, outcome) = tune_config(&cfg, &dir)?;
            println!(
                "{name}: {} evaluations, best objective {:?}",
                result.evaluations, result.best_objective
            );
            summarize(
                &name,
                &dir,
                &outcome.metrics,
                outcome.trace.failure.as_ref(),
            );
            Ok(Verdict::of(&outcome, true).exit_code())
        }
        Command::Compare {
            config_a,
            config_b,
            out,
        } => {
            let (na, a) = load(&config_a)?;
            let (nb, b) = load(&config_b)?;
            let dir = out.unwrap_or_else(|| PathBuf::from("out").join(format!("{na}_vs_{nb}")));
            let [ra, rb] = compare(&a, &b, &dir)?;
            summarize(&na, &dir, &ra.metrics, ra.trace.failure.as_ref());
            summarize(&nb, &dir, &rb.metrics, rb.trace.failure.as_ref());
            Ok(0)
        }
    }
}

fn summarize(
    name: &str,
    dir: &std::path::Path,
    m: &trackback_core::RecoveryMetrics,
    failure: Option<&trackback_core::SimFailure>,
) {
    let ttr = m
        .time_to_recovery
        .map_or_else(|| "none".to_string(), |t| format!("{t:.2} s"));
    println!(
        "{name}: recovered={} time_to_recovery={ttr} final |y|={:.4} m final |psi|={:.5} rad -> {}",
        m.recovered,
        m.final_lateral_error,
        m.final_heading_error,
        dir.display()
    );
    if let Some(f) = failure {
        println!("{name}: simulation stopped {f}");
    }
}
