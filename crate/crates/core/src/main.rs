use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aacsim::harness::{builtin_scenarios, emit_plot_script, export_csv, simulate, Scenario};
use aacsim::verify::verify_scenario;
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;

/// Exit status when a stability check fails (as opposed to an error).
const CHECK_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "aacsim", version, about = "Adaptive approximation-based control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario file and write its CSV log.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Simulate every builtin scenario in parallel.
    RunAll {
        #[arg(long, required = true)]
        builtin: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Simulate a scenario and run its stability checks.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        /// Print the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Print the names of the builtin scenarios.
    ListBuiltins,
}

fn run(path: &Path, out: &Path, dt: Option<f64>, t_end: Option<f64>, seed: Option<u64>) -> Result<()> {
    let mut scn = Scenario::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(dt) = dt {
        scn.dt = dt;
    }
    if let Some(t) = t_end {
        scn.t_end = t;
    }
    if let Some(s) = seed {
        scn.seed = s;
    }
    let log = simulate(&scn)?;
    export_csv(&log, out).with_context(|| format!("writing {}", out.display()))?;
    let s = &log.summary;
    println!(
        "{}: {} steps, terminal |x| = {:.3e}, tail sup |x| = {:.3e}, max |u| = {:.3}",
        scn.name, s.steps, s.terminal_x_norm, s.tail_sup_x_norm, s.max_abs_u
    );
    Ok(())
}

fn run_all(out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let results: Vec<Result<String>> = builtin_scenarios()
        .par_iter()
        .map(|scn| {
            let base = out_dir.join(&scn.name);
            scn.save(base.with_extension("json"))?;
            let log = simulate(scn).with_context(|| scn.name.clone())?;
            let csv = base.with_extension("csv");
            export_csv(&log, &csv)?;
            let csv_name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            emit_plot_script(&log, &csv_name, base.with_extension("py"))?;
            Ok(format!("{:<6} tail sup |x| = {:.3e}", scn.name, log.summary.tail_sup_x_norm))
        })
        .collect();
    let mut failed = 0;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                eprintln!("error: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        bail!("{failed} scenario(s) failed");
    }
    Ok(())
}

fn verify(path: &Path, json: bool) -> Result<bool> {
    let scn = Scenario::load(path).with_context(|| format!("loading {}", path.display()))?;
    let report = verify_scenario(&scn)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.table());
    }
    Ok(report.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { scenario, out, dt, t_end, seed } => run(&scenario, &out, dt, t_end, seed).map(|_| true),
        Command::RunAll { out_dir, .. } => run_all(&out_dir).map(|_| true),
        Command::Verify { scenario, json } => verify(&scenario, json),
        Command::ListBuiltins => {
            for s in builtin_scenarios() {
                println!("{:<6} {}", s.name, s.description);
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
