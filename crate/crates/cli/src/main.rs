//! `ringswarm` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use ringswarm::classifier::classify;
use ringswarm::integrator::{init_random, integrate};
use ringswarm::observables::observable_series;
use ringswarm::pipeline::{run_single, summarize};
use ringswarm::stability::{stability_report, StateKind};
use ringswarm::sweep::{run_sweep, SweepConfig};

use config::{load_config, Format, RunConfig, RunFlags};

const WORKERS_ENV: &str = "SWARM_WORKERS";

#[derive(Parser, Debug)]
#[command(name = "ringswarm", version, about = "Ring swarmalators with conformist and contrarian couplings")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one run and write trajectory, observables and a manifest
    #[command(allow_negative_numbers = true)]
    Simulate(RunFlags),
    /// Integrate one run in memory and print its label and statistics
    #[command(allow_negative_numbers = true)]
    Classify(RunFlags),
    /// Run a parameter sweep described by a JSON config
    #[command(allow_negative_numbers = true)]
    Sweep(SweepFlags),
    /// Evaluate the linear stability of the polarized or sync state
    #[command(allow_negative_numbers = true)]
    Stability(StabilityFlags),
}

#[derive(Args, Debug)]
struct SweepFlags {
    /// Sweep config (JSON)
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_path` from the config
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StabilityFlags {
    #[command(flatten)]
    run: RunFlags,
    /// Fixed point to analyse
    #[arg(long, default_value = "polarized", value_parser = ["polarized", "sync"])]
    state: String,
    /// Also diagonalise the finite-difference Jacobian (N <= 400)
    #[arg(long)]
    verify_numeric: bool,
}

/// Errors the user can fix by changing the invocation.
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn is_usage(e: &anyhow::Error) -> bool {
    use ringswarm::Error as E;
    if e.downcast_ref::<UsageError>().is_some() || e.downcast_ref::<serde_json::Error>().is_some() {
        return true;
    }
    matches!(
        e.downcast_ref::<E>(),
        Some(
            E::InvalidDistribution(_)
                | E::InvalidState(_)
                | E::InvalidConfig(_)
                | E::DimensionMismatch { .. }
                | E::UnsupportedDistribution(_)
                | E::Json(_)
        )
    )
}

fn resolve(flags: &RunFlags) -> anyhow::Result<RunConfig> {
    let base = match &flags.config {
        Some(path) => load_config(path).map_err(|e| anyhow::Error::new(UsageError(e)))?,
        None => RunConfig::default(),
    };
    let cfg = flags.apply(base);
    cfg.validate()?;
    Ok(cfg)
}

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn cmd_simulate(flags: &RunFlags) -> anyhow::Result<()> {
    let cfg = resolve(flags)?;
    let start = Instant::now();
    let params = cfg.params()?;
    let icfg = cfg.integration();
    let traj = integrate(&init_random(&params, cfg.seed), &params, &icfg)?;
    let series = observable_series(&traj, &params, &icfg)?;
    let stats = summarize(&traj, &params, &icfg)?;
    let label = classify(&stats, &cfg.thresholds);

    let out = &cfg.out;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut outputs = vec!["trajectory.csv", "trajectory_unwrapped.csv"];
    traj.write_csv(&out.join(outputs[0]))?;
    traj.write_unwrapped_csv(&out.join(outputs[1]))?;
    match cfg.format {
        Format::Csv => {
            outputs.push("observables.csv");
            series.write_csv(&out.join("observables.csv"))?;
        }
        Format::Json => {
            outputs.push("observables.json");
            write_json(&out.join("observables.json"), &series)?;
        }
    }
    let last = series.s_max.len() - 1;
    let summary = json!({
        "label": label,
        "stats": stats,
        "final_s_max": series.s_max[last],
        "final_s_min": series.s_min[last],
        "aliasing_steps": traj.aliasing_steps,
    });
    outputs.push("manifest.json");
    let manifest = json!({
        "tool": "ringswarm",
        "version": env!("CARGO_PKG_VERSION"),
        "command": "simulate",
        "config": cfg,
        "elapsed_seconds": start.elapsed().as_secs_f64(),
        "outputs": outputs,
        "summary": summary,
    });
    write_json(&out.join("manifest.json"), &manifest)?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

fn cmd_classify(flags: &RunFlags) -> anyhow::Result<()> {
    let cfg = resolve(flags)?;
    let params = cfg.params()?;
    let outcome = run_single(&params, &cfg.integration(), &cfg.thresholds, cfg.seed)?;
    println!("{}", serde_json::to_string(&json!({ "label": outcome.label, "stats": outcome.stats }))?);
    Ok(())
}

fn env_workers() -> anyhow::Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => {
            let w: usize = v
                .trim()
                .parse()
                .map_err(|_| UsageError(anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?;
            if w == 0 {
                return Err(UsageError(anyhow::anyhow!("{WORKERS_ENV} must be at least 1")).into());
            }
            Ok(Some(w))
        }
        Err(_) => Ok(None),
    }
}

fn cmd_sweep(flags: &SweepFlags) -> anyhow::Result<()> {
    let text = fs::read_to_string(&flags.config).with_context(|| format!("reading {}", flags.config.display()))?;
    let mut cfg: SweepConfig = serde_json::from_str(&text)
        .map_err(|e| UsageError(anyhow::Error::new(e).context(format!("parsing {}", flags.config.display()))))?;
    if let Some(out) = &flags.out {
        cfg.output_path = out.clone();
    }
    if let Some(cap) = env_workers()? {
        cfg.workers = Some(cfg.workers.map_or(cap, |w| w.min(cap)));
    }
    cfg.validate()?;
    let start = Instant::now();
    let results = run_sweep(&cfg)?;
    println!(
        "{}",
        serde_json::to_string(&json!({
            "cells": results.len(),
            "output_path": cfg.output_path,
            "elapsed_seconds": start.elapsed().as_secs_f64(),
        }))?
    );
    Ok(())
}

fn cmd_stability(flags: &StabilityFlags) -> anyhow::Result<()> {
    let cfg = resolve(&flags.run)?;
    let kind: StateKind = flags.state.parse()?;
    let report = stability_report(cfg.j, cfg.k_p, cfg.k_n, cfg.p, cfg.n, kind, flags.verify_numeric)?;
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(out) = &flags.run.out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        write_json(&out.join("stability.json"), &report)?;
    }
    println!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(f) => cmd_simulate(f),
        Command::Classify(f) => cmd_classify(f),
        Command::Sweep(f) => cmd_sweep(f),
        Command::Stability(f) => cmd_stability(f),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if is_usage(&e) => {
            eprintln!("error: {e:#}");
            eprintln!("run `ringswarm --help` for usage");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
