//! Configured runs and studies.
//!
//! [`run_scenario`] builds the data of a [`RunConfig`], integrates it, and
//! writes `diagnostics.csv`, `snapshots.json` and `summary.json` into the
//! output directory. [`study`] holds the refinement and n-sequence studies.

pub mod config;
pub mod output;
pub mod presets;
pub mod study;

use std::path::Path;

use serde::Serialize;

use crate::diagnostics::{self, entropy_violation, gronwall_envelope};
use crate::error::{Error, Result};
use crate::initdata::{build_scenario, Scenario, ScenarioReport};
use crate::solver::{run_with, Flux, Formulation, Initial, Limiter, MassBalance, RunOptions, Status, Trajectory};

pub use config::{load, parse_config, GridConfig, RunConfig, RunSection, StudyConfig};
pub use presets::preset;

/// Allowed relative growth of the BD entropy.
pub const ENTROPY_TOL: f64 = 0.01;
/// Allowed relative excess over the Gronwall envelope.
pub const GRONWALL_TOL: f64 = 0.05;
/// Per-step mass residual, relative to the initial mass.
pub const MASS_STEP_TOL: f64 = 1e-13;
/// Mass residual accumulated over a run, relative to the initial mass.
pub const MASS_RUN_TOL: f64 = 1e-10;
/// `h1_phi1` ratio (fine over half resolution) above which a jump persists.
pub const PERSISTENT_RATIO: f64 = 1.2;
/// `|ratio − 1|` below which the density counts as regularized.
pub const REGULARIZED_BAND: f64 = 0.1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Process exit code for an error raised before or during a run.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::Scenario(_)
        | Error::Parameter(_)
        | Error::Domain { .. }
        | Error::UnsupportedExponent { .. } => EXIT_INVALID,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        Error::State { .. } | Error::VacuumBreach { .. } => EXIT_SOLVER,
    }
}

/// Builds the data and integrates it; nothing is written.
pub fn simulate(cfg: &RunConfig) -> Result<(Scenario, Trajectory)> {
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let scenario = build_scenario(&cfg.scenario, &grid)?;
    let initial = match cfg.scheme.formulation {
        Formulation::Primitive => Initial::Primitive(scenario.state.clone()),
        Formulation::Effective => Initial::Effective(scenario.effective.clone()),
    };
    let opts = RunOptions {
        t_end: cfg.run.t_end,
        record_every: cfg.run.record_every,
        probe: cfg.probe(),
        m2: cfg.m2,
    };
    let traj = run_with(initial, &grid, &cfg.scenario.params, &cfg.scheme, &opts, None)?;
    Ok((scenario, traj))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassVerdict {
    pub pass: bool,
    pub max_step_residual: f64,
    pub accumulated_residual: f64,
    pub step_tolerance: f64,
    pub accumulated_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    /// `h1_phi1` settles under refinement.
    Regularized,
    /// `h1_phi1` keeps growing like a jump.
    Persistent,
    Inconclusive,
}

/// `h1_phi1` at the final time against a half-resolution companion run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeVerdict {
    pub trend: Trend,
    pub h1_fine: f64,
    pub h1_coarse: Option<f64>,
    pub ratio: Option<f64>,
    pub jump_amp_initial: f64,
    pub jump_amp_final: f64,
}

impl ProbeVerdict {
    pub fn classify(ratio: f64) -> Trend {
        if ratio >= PERSISTENT_RATIO {
            Trend::Persistent
        } else if (ratio - 1.0).abs() < REGULARIZED_BAND {
            Trend::Regularized
        } else {
            Trend::Inconclusive
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdicts {
    pub entropy_decay: Verdict,
    pub gronwall: Verdict,
    pub mass_balance: MassVerdict,
    pub regularization_probe: ProbeVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub name: String,
    pub formulation: Formulation,
    pub flux: Flux,
    pub limiter: Limiter,
    pub cells: usize,
    pub dx: f64,
    pub t_end: f64,
    pub t_final: f64,
    pub status: Status,
    pub failure: Option<String>,
    pub steps: u64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub scenario: ScenarioReport,
    pub mass_balance: MassBalance,
    /// `(‖ρ − ρ̄‖₂ near ρ̄, ‖ρ − ρ̄‖_γ away from it)` at the final time.
    pub orlicz_pair: (f64, f64),
    pub max_dissipation_residual: f64,
    pub verdicts: Verdicts,
}

/// Verdicts for a finished trajectory. `h1_coarse` is the final `h1_phi1` of
/// the half-resolution companion, when one was run.
pub fn verdicts(traj: &Trajectory, h1_coarse: Option<f64>) -> Verdicts {
    let violation = entropy_violation(traj);
    let g = gronwall_envelope(traj, GRONWALL_TOL);
    let mb = traj.mass_balance;
    let first = &traj.first().record;
    let last = &traj.last().record;
    let ratio = h1_coarse.map(|c| last.h1_phi1 / c);
    Verdicts {
        entropy_decay: Verdict {
            pass: violation <= ENTROPY_TOL,
            value: violation,
            tolerance: ENTROPY_TOL,
        },
        gronwall: Verdict {
            pass: g.verdict,
            value: g.worst_ratio,
            tolerance: GRONWALL_TOL,
        },
        mass_balance: MassVerdict {
            pass: mb.max_step_residual <= MASS_STEP_TOL && mb.accumulated_residual <= MASS_RUN_TOL,
            max_step_residual: mb.max_step_residual,
            accumulated_residual: mb.accumulated_residual,
            step_tolerance: MASS_STEP_TOL,
            accumulated_tolerance: MASS_RUN_TOL,
        },
        regularization_probe: ProbeVerdict {
            trend: ratio
                .filter(|r| r.is_finite())
                .map_or(Trend::Inconclusive, ProbeVerdict::classify),
            h1_fine: last.h1_phi1,
            h1_coarse,
            ratio,
            jump_amp_initial: first.jump_amp,
            jump_amp_final: last.jump_amp,
        },
    }
}

/// Final `h1_phi1` of the same configuration at half the cell count.
fn companion_h1(cfg: &RunConfig) -> Option<f64> {
    let cells = cfg.grid.cells / 2;
    if cells < 4 {
        return None;
    }
    let mut half = cfg.clone();
    half.grid.cells = cells;
    half.run.record_every = None;
    half.run.probe_x = None;
    half.m2 = false;
    match simulate(&half) {
        Ok((_, t)) if t.status == Status::Completed => Some(t.last().record.h1_phi1),
        _ => None,
    }
}

pub fn summarize(cfg: &RunConfig, scenario: &Scenario, traj: &Trajectory) -> Result<Summary> {
    let grid = cfg.grid.build()?;
    let h1_coarse = if traj.status == Status::Completed {
        companion_h1(cfg)
    } else {
        None
    };
    let last = traj.last();
    Ok(Summary {
        schema_version: crate::DiagnosticsRecord::SCHEMA_VERSION,
        name: cfg.name.clone(),
        formulation: cfg.scheme.formulation,
        flux: cfg.scheme.flux,
        limiter: cfg.scheme.limiter,
        cells: grid.cells,
        dx: grid.dx,
        t_end: cfg.run.t_end,
        t_final: last.state.t,
        status: traj.status,
        failure: traj.failure.clone(),
        steps: traj.steps,
        dt_min: traj.dt_min,
        dt_max: traj.dt_max,
        scenario: scenario.report.clone(),
        mass_balance: traj.mass_balance,
        orlicz_pair: diagnostics::orlicz_pair(&last.state.rho, &grid, &cfg.scenario.params),
        max_dissipation_residual: diagnostics::dissipation_budget(traj).max_residual,
        verdicts: verdicts(traj, h1_coarse),
    })
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: Summary,
    pub trajectory: Trajectory,
    pub exit_code: i32,
}

/// Snapshots kept in `snapshots.json`.
pub const SNAPSHOT_LIMIT: usize = 11;

/// Runs `cfg` and writes its artifacts into `cfg.run.output_dir`.
pub fn run_scenario(cfg: &RunConfig) -> Result<RunOutcome> {
    let (scenario, traj) = simulate(cfg)?;
    let summary = summarize(cfg, &scenario, &traj)?;
    write_artifacts(&cfg.run.output_dir, cfg, &traj, &summary)?;
    let exit_code = if traj.status == Status::Completed {
        EXIT_OK
    } else {
        EXIT_SOLVER
    };
    Ok(RunOutcome {
        summary,
        trajectory: traj,
        exit_code,
    })
}

pub fn write_artifacts(dir: &Path, cfg: &RunConfig, traj: &Trajectory, summary: &Summary) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    output::write_diagnostics_csv(&dir.join("diagnostics.csv"), traj.records())?;
    output::write_snapshots_json(&dir.join("snapshots.json"), traj, &cfg.grid.build()?, SNAPSHOT_LIMIT)?;
    output::write_json(&dir.join("summary.json"), summary)
}
