use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bdflow::harness::{self, output, presets, study, RunConfig};
use bdflow::Error;

#[derive(Parser)]
#[command(name = "bdflow", version, about = "1D compressible Navier-Stokes with density-dependent viscosity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and write its diagnostics.
    Run(ConfigArgs),
    /// Grid refinement over study.dx_refinement.
    StudyDx(ConfigArgs),
    /// Regularization sequence over study.n_sequence.
    StudyN(ConfigArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a built-in preset.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides run.output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// `key=value` overrides, e.g. `--override params.n_reg=16`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> bdflow::Result<RunConfig> {
        let text = match &self.config {
            Some(p) => Some(std::fs::read_to_string(p)?),
            None => None,
        };
        let mut cfg = harness::load(text.as_deref(), self.preset.as_deref(), &self.overrides)?;
        if let Some(out) = &self.out {
            cfg.run.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

fn report(e: &Error) -> i32 {
    match e {
        Error::Config(fields) => {
            eprintln!("invalid configuration:");
            for f in fields {
                eprintln!("  {f}");
            }
        }
        other => eprintln!("error: {other}"),
    }
    harness::error_exit_code(e)
}

fn run(args: &ConfigArgs) -> bdflow::Result<i32> {
    let cfg = args.load()?;
    let out = harness::run_scenario(&cfg)?;
    let s = &out.summary;
    let v = &s.verdicts;
    println!(
        "{}: {:?} at t = {} after {} steps",
        s.name, s.status, s.t_final, s.steps
    );
    println!(
        "entropy_decay {} ({:.3e})  gronwall {} ({:.4})  mass_balance {} ({:.1e})  probe {:?}",
        pass(v.entropy_decay.pass),
        v.entropy_decay.value,
        pass(v.gronwall.pass),
        v.gronwall.value,
        pass(v.mass_balance.pass),
        v.mass_balance.accumulated_residual,
        v.regularization_probe.trend,
    );
    for w in &s.scenario.warnings {
        println!("warning: {w}");
    }
    if let Some(f) = &s.failure {
        eprintln!("solver failure: {f}");
    }
    println!("wrote {}", cfg.run.output_dir.display());
    Ok(out.exit_code)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4e}"))
}

fn study_dx(args: &ConfigArgs) -> bdflow::Result<i32> {
    let cfg = args.load()?;
    let rows = study::refinement_study(&cfg)?;
    println!("{:>8} {:>12} {:>12} {:>8} {:>12} {:>8}", "cells", "dx", "err_rho", "order", "err_m", "order");
    for r in &rows {
        println!(
            "{:>8} {:>12.4e} {:>12} {:>8} {:>12} {:>8}",
            r.cells,
            r.dx,
            fmt_opt(r.error_rho),
            r.order_rho.map_or("-".into(), |o| format!("{o:.3}")),
            fmt_opt(r.error_m),
            r.order_m.map_or("-".into(), |o| format!("{o:.3}")),
        );
    }
    std::fs::create_dir_all(&cfg.run.output_dir)?;
    output::write_rows(&cfg.run.output_dir.join("study_dx.csv"), &rows)?;
    Ok(study_exit(rows.iter().map(|r| r.status)))
}

fn study_n(args: &ConfigArgs) -> bdflow::Result<i32> {
    let cfg = args.load()?;
    let rows = study::n_sequence_study(&cfg)?;
    println!("{:>6} {:>12} {:>14} {:>14}", "n", "tau", "dist_limit", "dist_next");
    for r in &rows {
        println!(
            "{:>6} {:>12.4e} {:>14.6e} {:>14}",
            r.n.map_or("inf".into(), |n| n.to_string()),
            r.tau,
            r.distance_to_limit,
            fmt_opt(r.distance_to_next),
        );
    }
    std::fs::create_dir_all(&cfg.run.output_dir)?;
    output::write_rows(&cfg.run.output_dir.join("study_n.csv"), &rows)?;
    Ok(study_exit(rows.iter().map(|r| r.status)))
}

fn study_exit(mut statuses: impl Iterator<Item = bdflow::Status>) -> i32 {
    if statuses.all(|s| s == bdflow::Status::Completed) {
        harness::EXIT_OK
    } else {
        harness::EXIT_SOLVER
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::StudyDx(a) => study_dx(a),
        Command::StudyN(a) => study_n(a),
        Command::Presets => {
            for (name, about) in presets::PRESETS {
                println!("{name:<12} {about}");
            }
            Ok(harness::EXIT_OK)
        }
    };
    let code = result.unwrap_or_else(|e| report(&e));
    ExitCode::from(code as u8)
}
