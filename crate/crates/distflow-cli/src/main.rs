//! Command line front end: run scenarios or the builtin battery, list the
//! battery, validate configuration files.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use distflow::scenario::{
    builtin_config, builtin_names, load_config, planned_theorems, run_battery, run_scenario,
    summarize, RunOptions, ScenarioArtifacts, ScenarioConfig,
};
use distflow::verify::Expectation;

#[derive(Parser)]
#[command(
    name = "distflow",
    version,
    about = "Verification battery for the distance function between hypersurfaces \
             under mean curvature flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a builtin scenario, a scenario file, or the full battery.
    Run {
        /// Builtin name or path to a scenario file; omit to run everything.
        target: Option<String>,
        /// Directory for CSV/JSON/SVG artifacts (env: DISTFLOW_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Mesh time step override; the default is CFL-limited.
        #[arg(long)]
        dt: Option<f64>,
        /// Multiply every tolerance by this factor.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Random seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the battery.
        #[arg(long)]
        jobs: Option<usize>,
        /// Emit the report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// List the builtin scenarios and what they check.
    List {
        /// Emit a JSON array instead of the table.
        #[arg(long)]
        json: bool,
        /// Keep only scenarios planning a check whose tag contains this.
        #[arg(long)]
        theorem: Option<String>,
    },
    /// Parse and validate a scenario file without running it.
    Validate {
        config: PathBuf,
        /// Emit the validation result as JSON.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(clean) => {
            if clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { target, out, dt, tolerance_scale, seed, jobs, json } => {
            let opts = RunOptions {
                out_dir: out.or_else(|| std::env::var_os("DISTFLOW_OUT").map(PathBuf::from)),
                dt,
                tolerance_scale,
                seed,
                jobs,
            };
            match target {
                Some(t) => run_one(&t, &opts, json),
                None => run_all(&opts, json),
            }
        }
        Command::List { json, theorem } => {
            list(json, theorem.as_deref());
            Ok(true)
        }
        Command::Validate { config, json } => validate(&config, json),
    }
}

fn resolve_target(target: &str) -> Result<ScenarioConfig> {
    if let Some(config) = builtin_config(target) {
        return Ok(config);
    }
    let path = PathBuf::from(target);
    if path.exists() {
        return load_config(&path).with_context(|| format!("loading {}", path.display()));
    }
    Err(anyhow!(
        "{target} is neither a builtin scenario nor an existing file; \
         `distflow list` shows the builtins"
    ))
}

fn run_one(target: &str, opts: &RunOptions, json: bool) -> Result<bool> {
    let config = resolve_target(target)?;
    let arts = run_scenario(&config, opts)?;
    if let Some(dir) = &opts.out_dir {
        let written = arts.write(dir)?;
        if !json {
            for p in written {
                eprintln!("wrote {}", p.display());
            }
        }
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&arts.report)?);
    } else {
        print_report(&arts);
    }
    Ok(arts.report.is_clean())
}

fn run_all(opts: &RunOptions, json: bool) -> Result<bool> {
    let artifacts = run_battery(opts)?;
    let summary = summarize(&artifacts);
    if json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        for (arts, entry) in artifacts.iter().zip(&summary.entries) {
            let verdict = if entry.clean { "clean" } else { "NOT CLEAN" };
            println!(
                "{:<34} {:>7} samples  {:>5.1}% skipped  {:>6.1}s  {}",
                entry.scenario,
                entry.total_samples,
                100.0 * entry.skipped_fraction,
                arts.elapsed_seconds,
                verdict,
            );
            if let Some(reason) = &entry.aborted {
                println!("    aborted: {reason}");
            }
            for theorem in &entry.unexpected {
                println!("    unexpected: {theorem}");
            }
        }
        println!(
            "battery: {}",
            if summary.all_clean { "all clean" } else { "unexpected results above" }
        );
    }
    Ok(summary.all_clean)
}

fn print_report(arts: &ScenarioArtifacts) {
    let report = &arts.report;
    println!(
        "{}: {} rows over t in [{}, {}], {:.1}% skipped, {:.2}s",
        report.scenario,
        report.total_samples,
        report.t_min,
        report.t_max,
        100.0 * report.skipped_fraction,
        arts.elapsed_seconds,
    );
    println!(
        "  {:<28} {:>7} {:>6} {:>6}  {:>13}  {}",
        "theorem", "pass", "fail", "skip", "worst", "verdict"
    );
    for t in &report.theorems {
        let verdict = match (&t.expectation, t.unexpected) {
            (_, true) => "UNEXPECTED",
            (Expectation::Hold, false) => "ok",
            (Expectation::Violate { .. }, false) => "fails as it must",
        };
        println!(
            "  {:<28} {:>7} {:>6} {:>6}  {:>13.4e}  {}",
            t.theorem, t.pass, t.fail, t.skipped, t.worst_residual, verdict
        );
    }
    if let Some(reason) = &report.aborted {
        println!("  aborted: {reason}");
    }
    println!("  verdict: {}", if report.is_clean() { "clean" } else { "NOT CLEAN" });
}

fn list(json: bool, theorem: Option<&str>) {
    let mut entries = Vec::new();
    for name in builtin_names() {
        let config = builtin_config(name).expect("listed builtins resolve");
        let theorems = planned_theorems(&config);
        if let Some(tag) = theorem {
            if !theorems.iter().any(|t| t.contains(tag)) {
                continue;
            }
        }
        entries.push((name, config, theorems));
    }
    if json {
        let arr: Vec<_> = entries
            .iter()
            .map(|(name, config, theorems)| {
                json!({
                    "name": name,
                    "description": config.description,
                    "dimension": config.dimension,
                    "theorems": theorems,
                })
            })
            .collect();
        println!("{}", serde_json::to_string_pretty(&arr).expect("plain data serializes"));
    } else {
        for (name, config, theorems) in &entries {
            println!("{:<34} n={}  {}", name, config.dimension - 1, config.description);
            println!("{:<34} checks: {}", "", theorems.join(", "));
        }
    }
}

fn validate(path: &PathBuf, json: bool) -> Result<bool> {
    let config = load_config(path).with_context(|| format!("loading {}", path.display()))?;
    let theorems = planned_theorems(&config);
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "name": config.name,
                "valid": true,
                "dimension": config.dimension,
                "theorems": theorems,
            }))?
        );
    } else {
        println!("{}: valid, plans {}", config.name, theorems.join(", "));
    }
    Ok(true)
}
