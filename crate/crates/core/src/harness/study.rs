//! Grid refinement and regularization-index studies.
//!
//! Each resolution or index is an independent run; they are executed in
//! parallel and reported in the configured order.

use rayon::prelude::*;
use serde::Serialize;

use crate::diagnostics::{entropy_violation, gronwall_envelope};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::solver::{run_with, Initial, RunOptions, Source, Status, Trajectory};
use crate::state::State;
use crate::sum::sum;

use super::config::{RunConfig, StudyConfig};
use super::{simulate, GRONWALL_TOL};

/// One resolution of a refinement study.
///
/// With an exact solution the errors are L¹ distances to it at the cell
/// centres. Otherwise `error_*` compares this resolution with the next finer
/// one (restricted to this grid by averaging) and is empty on the finest row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub cells: usize,
    pub dx: f64,
    pub status: Status,
    pub error_rho: Option<f64>,
    pub error_m: Option<f64>,
    /// `log2` of the error ratio with the previous row, scaled by the
    /// refinement factor.
    pub order_rho: Option<f64>,
    pub order_m: Option<f64>,
    pub entropy_violation: f64,
    pub gronwall_ratio: f64,
    pub mass_residual: f64,
    pub h1_phi1: f64,
}

/// Fine cell values averaged onto a grid `ratio` times coarser.
pub fn restrict(fine: &[f64], ratio: usize) -> Vec<f64> {
    fine.chunks_exact(ratio)
        .map(|c| c.iter().sum::<f64>() / ratio as f64)
        .collect()
}

fn l1(a: &[f64], b: &[f64], dx: f64) -> f64 {
    dx * sum(a.iter().zip(b).map(|(x, y)| (x - y).abs()))
}

fn observed_order(e_coarse: Option<f64>, e_fine: Option<f64>, dx_coarse: f64, dx_fine: f64) -> Option<f64> {
    match (e_coarse, e_fine) {
        (Some(c), Some(f)) if c > 0.0 && f > 0.0 => Some((c / f).ln() / (dx_coarse / dx_fine).ln()),
        _ => None,
    }
}

fn row(grid: &Grid1D, traj: &Trajectory) -> RefinementRow {
    RefinementRow {
        cells: grid.cells,
        dx: grid.dx,
        status: traj.status,
        error_rho: None,
        error_m: None,
        order_rho: None,
        order_m: None,
        entropy_violation: entropy_violation(traj),
        gronwall_ratio: gronwall_envelope(traj, GRONWALL_TOL).worst_ratio,
        mass_residual: traj.mass_balance.accumulated_residual,
        h1_phi1: traj.last().record.h1_phi1,
    }
}

/// Exact `(ρ, m)` at `(x, t)`.
pub type Exact<'a> = &'a (dyn Fn(f64, f64) -> (f64, f64) + Sync);

/// Fills errors and orders from final states. Successive differences need
/// each cell count to divide the next.
fn fill_errors(rows: &mut [RefinementRow], finals: &[(Grid1D, State)], exact: Option<Exact>) -> Result<()> {
    for k in 0..rows.len() {
        let (grid, s) = &finals[k];
        let errs = match exact {
            Some(f) => {
                let (r, m): (Vec<f64>, Vec<f64>) = grid.centers().iter().map(|&x| f(x, s.t)).unzip();
                Some((l1(&s.rho, &r, grid.dx), l1(&s.m, &m, grid.dx)))
            }
            None if k + 1 < rows.len() => {
                let (fine_grid, fine) = &finals[k + 1];
                if fine_grid.cells % grid.cells != 0 {
                    return Err(Error::Parameter(format!(
                        "refinement from {} to {} cells is not an integer factor",
                        grid.cells, fine_grid.cells
                    )));
                }
                let ratio = fine_grid.cells / grid.cells;
                Some((
                    l1(&s.rho, &restrict(&fine.rho, ratio), grid.dx),
                    l1(&s.m, &restrict(&fine.m, ratio), grid.dx),
                ))
            }
            None => None,
        };
        rows[k].error_rho = errs.map(|e| e.0);
        rows[k].error_m = errs.map(|e| e.1);
    }
    for k in 1..rows.len() {
        let (c, f) = (&rows[k - 1], &rows[k]);
        let order_rho = observed_order(c.error_rho, f.error_rho, c.dx, f.dx);
        let order_m = observed_order(c.error_m, f.error_m, c.dx, f.dx);
        rows[k].order_rho = order_rho;
        rows[k].order_m = order_m;
    }
    Ok(())
}

fn study_of(cfg: &RunConfig) -> Result<&StudyConfig> {
    cfg.study
        .as_ref()
        .ok_or_else(|| Error::Parameter("configuration has no [study] section".into()))
}

/// Runs the configured scenario at every `study.dx_refinement` cell count.
pub fn refinement_study(cfg: &RunConfig) -> Result<Vec<RefinementRow>> {
    let study = study_of(cfg)?;
    if study.dx_refinement.is_empty() {
        return Err(Error::Parameter("study.dx_refinement is empty".into()));
    }
    let runs: Vec<(Grid1D, Trajectory)> = study
        .dx_refinement
        .par_iter()
        .map(|&cells| {
            let mut c = cfg.clone();
            c.grid.cells = cells;
            c.run.record_every = None;
            let (_, traj) = simulate(&c)?;
            Ok((c.grid.build()?, traj))
        })
        .collect::<Result<_>>()?;
    finish(runs, None)
}

/// Refinement over `cells` with caller-supplied data, forcing and exact
/// solution; grid and run settings come from `cfg`.
pub fn refinement_study_with(
    cfg: &RunConfig,
    cells: &[usize],
    initial: &(dyn Fn(&Grid1D) -> Result<Initial> + Sync),
    source: Option<&dyn Source>,
    exact: Option<Exact>,
) -> Result<Vec<RefinementRow>> {
    let p = &cfg.scenario.params;
    let opts = RunOptions {
        t_end: cfg.run.t_end,
        record_every: None,
        probe: None,
        m2: false,
    };
    let runs: Vec<(Grid1D, Trajectory)> = cells
        .par_iter()
        .map(|&n| {
            let grid = cfg.grid.with_cells(n).build()?;
            let traj = run_with(initial(&grid)?, &grid, p, &cfg.scheme, &opts, source)?;
            Ok((grid, traj))
        })
        .collect::<Result<_>>()?;
    finish(runs, exact)
}

fn finish(runs: Vec<(Grid1D, Trajectory)>, exact: Option<Exact>) -> Result<Vec<RefinementRow>> {
    let mut rows: Vec<RefinementRow> = runs.iter().map(|(g, t)| row(g, t)).collect();
    let finals: Vec<(Grid1D, State)> = runs
        .into_iter()
        .map(|(g, t)| (g, t.last().state.clone()))
        .collect();
    fill_errors(&mut rows, &finals, exact)?;
    Ok(rows)
}

/// One regularization index of an n-sequence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NSequenceRow {
    /// `None` is n = ∞.
    pub n: Option<u32>,
    pub tau: f64,
    pub status: Status,
    /// L¹ density distance at the final time to the last (largest n) run.
    pub distance_to_limit: f64,
    /// L¹ density distance to the next run in the sequence; empty on the last.
    pub distance_to_next: Option<f64>,
    pub entropy_violation: f64,
    pub gronwall_ratio: f64,
    pub h1_phi1: f64,
}

/// Orders n ascending with ∞ last.
fn n_key(n: &Option<u32>) -> (bool, u32) {
    (n.is_none(), n.unwrap_or(0))
}

/// Configuration used for index `n`: the viscosity term `ρ^θ/n` when
/// `study.n_viscosity`, and mollification time τ = 1/n (zero for n = ∞)
/// when `study.n_mollify`.
pub fn config_for_n(cfg: &RunConfig, study: &StudyConfig, n: Option<u32>) -> RunConfig {
    let mut c = cfg.clone();
    if study.n_viscosity {
        c.scenario.params.n_reg = n;
    }
    if study.n_mollify {
        c.scenario.mollify_cells = None;
        c.scenario.mollify_tau = n.map_or(0.0, |n| 1.0 / f64::from(n));
    }
    c.run.record_every = None;
    c
}

pub fn n_sequence_study(cfg: &RunConfig) -> Result<Vec<NSequenceRow>> {
    let study = study_of(cfg)?;
    let mut ns = study.n_sequence.clone();
    if ns.is_empty() {
        return Err(Error::Parameter("study.n_sequence is empty".into()));
    }
    ns.sort_by_key(n_key);
    ns.dedup();
    let grid = cfg.grid.build()?;
    let runs: Vec<(RunConfig, Trajectory)> = ns
        .par_iter()
        .map(|&n| {
            let c = config_for_n(cfg, study, n);
            let (_, traj) = simulate(&c)?;
            Ok((c, traj))
        })
        .collect::<Result<_>>()?;
    let finals: Vec<&[f64]> = runs.iter().map(|(_, t)| t.last().state.rho.as_slice()).collect();
    let limit = finals[finals.len() - 1];
    Ok(runs
        .iter()
        .enumerate()
        .map(|(k, (c, traj))| NSequenceRow {
            n: ns[k],
            tau: c.scenario.tau(&grid),
            status: traj.status,
            distance_to_limit: l1(finals[k], limit, grid.dx),
            distance_to_next: finals.get(k + 1).map(|f| l1(finals[k], f, grid.dx)),
            entropy_violation: entropy_violation(traj),
            gronwall_ratio: gronwall_envelope(traj, GRONWALL_TOL).worst_ratio,
            h1_phi1: traj.last().record.h1_phi1,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restrict_averages_pairs() {
        assert_eq!(restrict(&[1.0, 3.0, 5.0, 7.0], 2), vec![2.0, 6.0]);
    }

    #[test]
    fn order_of_halving() {
        let o = observed_order(Some(4e-4), Some(1e-4), 0.02, 0.01).unwrap();
        assert!((o - 2.0).abs() < 1e-12);
        assert_eq!(observed_order(None, Some(1.0), 0.02, 0.01), None);
    }

    #[test]
    fn n_order() {
        let mut ns = vec![None, Some(32), Some(8)];
        ns.sort_by_key(n_key);
        assert_eq!(ns, vec![Some(8), Some(32), None]);
    }
}
