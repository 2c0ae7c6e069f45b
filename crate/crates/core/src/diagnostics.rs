//! Functionals monitored along a trajectory.
//!
//! Space integrals use the midpoint rule on cell centres, gradients in the
//! regularization probes use face differences, and time accumulations use
//! the trapezoid rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::params::{pow, Params};
use crate::solver::Trajectory;
use crate::state::{grad_phi1, State};
use crate::sum::sum;

/// One row of `diagnostics.csv`. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub l1_rhou: f64,
    pub l1_rhov: f64,
    pub bd_entropy: f64,
    pub energy: f64,
    pub tv_rho: f64,
    pub rho_max: f64,
    pub rho_min: f64,
    pub h1_phi1: f64,
    pub jump_amp: f64,
    /// Gronwall envelope accumulated step by step since the start.
    pub gronwall_rhs: f64,
    /// BD dissipation accumulated step by step since the start.
    pub dissipation_bd: f64,
    /// `‖√ρ u + ∂ₓφ₂(ρ)‖_{L²}`; absent when disabled.
    pub m2_l2: Option<f64>,
}

impl DiagnosticsRecord {
    pub const SCHEMA_VERSION: u32 = 1;

    pub fn l1_sum(&self) -> f64 {
        self.l1_rhou + self.l1_rhov
    }
}

/// Window `[x0 − width/2, x0 + width/2]` for [`jump_amplitude`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub x0: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RecordOptions {
    pub probe: Option<Probe>,
    /// Also compute `m2_l2` (requires α ≠ ½).
    pub m2: bool,
}

pub fn mass(s: &State, grid: &Grid1D) -> f64 {
    grid.dx * sum(s.rho.iter().copied())
}

/// `(‖ρu‖₁, ‖ρv‖₁)`.
pub fn l1_momenta(s: &State, grid: &Grid1D, p: &Params) -> Result<(f64, f64)> {
    s.check()?;
    let g = grad_phi1(&s.rho, grid, p);
    let rhou = grid.dx * sum(s.m.iter().map(|m| m.abs()));
    let rhov = grid.dx * sum(s.m.iter().zip(&g).map(|(m, d)| (m + d).abs()));
    Ok((rhou, rhov))
}

/// `∫ (½ ρ v² + Π(ρ) − Π(ρ̄))`.
pub fn bd_entropy(s: &State, grid: &Grid1D, p: &Params) -> Result<f64> {
    s.check()?;
    let g = grad_phi1(&s.rho, grid, p);
    Ok(grid.dx
        * sum(s.rho.iter().zip(&s.m).zip(&g).map(|((&r, &m), &d)| {
            let w = m + d;
            0.5 * w * w / r + p.pi_rel(r)
        })))
}

/// `∫ (½ ρ u² + Π(ρ) − Π(ρ̄))`.
pub fn energy(s: &State, grid: &Grid1D, p: &Params) -> Result<f64> {
    s.check()?;
    Ok(grid.dx
        * sum(s
            .rho
            .iter()
            .zip(&s.m)
            .map(|(&r, &m)| 0.5 * m * m / r + p.pi_rel(r))))
}

/// `Σ |f[i+1] − f[i]|`.
pub fn total_variation(field: &[f64]) -> f64 {
    sum(field.windows(2).map(|w| (w[1] - w[0]).abs()))
}

/// Discrete `‖∂ₓφ₁(ρ)‖_{L²}` from face differences between interior cells.
///
/// A one-cell jump contributes `|Δφ₁| / √dx`.
pub fn h1_phi1(rho: &[f64], grid: &Grid1D, p: &Params) -> f64 {
    let phi: Vec<f64> = rho.iter().map(|&r| p.phi1_unchecked(r)).collect();
    (sum(phi.windows(2).map(|w| (w[1] - w[0]).powi(2))) / grid.dx).sqrt()
}

/// Largest `|ρ[i+1] − ρ[i]|` over faces whose both cells lie in the window.
pub fn jump_amplitude(rho: &[f64], grid: &Grid1D, x0: f64, width: f64) -> Result<f64> {
    let (lo, hi) = (x0 - 0.5 * width, x0 + 0.5 * width);
    if !(width >= 4.0 * grid.dx) {
        return Err(Error::Parameter(format!(
            "probe window {width} must span at least 4 cells (dx = {})",
            grid.dx
        )));
    }
    if lo < grid.x_min || hi > grid.x_max {
        return Err(Error::Parameter(format!(
            "probe window [{lo}, {hi}] leaves the domain [{}, {}]",
            grid.x_min, grid.x_max
        )));
    }
    let first = ((lo - grid.x_min) / grid.dx - 0.5).ceil().max(0.0) as usize;
    let last = (((hi - grid.x_min) / grid.dx - 0.5).floor() as usize).min(grid.cells - 1);
    Ok((first..last)
        .map(|i| (rho[i + 1] - rho[i]).abs())
        .fold(0.0, f64::max))
}

fn max_jump(rho: &[f64]) -> f64 {
    rho.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max)
}

/// BD dissipation `∫ μₙ(ρ) P'(ρ) |∂ₓρ|²/ρ²` written as
/// `Σ c_β |Δ ρ^β|² / dx` over the given face pairs, one term per
/// power law in the viscosity.
pub(crate) fn dissipation_faces(
    faces: impl Iterator<Item = (f64, f64)>,
    dx: f64,
    p: &Params,
) -> f64 {
    let b1 = 0.5 * (p.gamma + p.alpha - 1.0);
    let c1 = p.a * p.gamma * p.mu / (b1 * b1);
    let inv_n = p.inv_n();
    let b2 = 0.5 * (p.gamma + p.theta - 1.0);
    let c2 = p.a * p.gamma * inv_n / (b2 * b2);
    let total = sum(faces.map(|(l, r)| {
        if l == r {
            return 0.0;
        }
        let d1 = pow(r, b1) - pow(l, b1);
        let mut v = c1 * d1 * d1;
        if inv_n > 0.0 {
            let d2 = pow(r, b2) - pow(l, b2);
            v += c2 * d2 * d2;
        }
        v
    }));
    total / dx
}

/// Instantaneous BD dissipation rate of `rho`, far-field or periodic ghosts
/// included.
pub fn dissipation_rate(rho: &[f64], grid: &Grid1D, p: &Params) -> f64 {
    let mut padded = Vec::new();
    grid.pad_into(rho, p.rho_bar, &mut padded);
    let g = grid.ghost;
    let faces = (g..=g + rho.len()).map(|k| (padded[k - 1], padded[k]));
    dissipation_faces(faces, grid.dx, p)
}

/// Upper bound `(aγ/μ) ρ_max^{γ−α} + (aγ/n) ρ_max^{γ−θ}` of
/// `‖P'(ρ) ρ / μₙ(ρ)‖_∞`.
pub fn gronwall_rate_bound(rho_max: f64, p: &Params) -> f64 {
    let ag = p.a * p.gamma;
    ag / p.mu * pow(rho_max, p.gamma - p.alpha) + ag * p.inv_n() * pow(rho_max, p.gamma - p.theta)
}

/// `‖√ρ u + ∂ₓφ₂(ρ)‖_{L²}`.
pub fn m2_l2(s: &State, grid: &Grid1D, p: &Params) -> Result<f64> {
    s.check()?;
    let phi2 = s
        .rho
        .iter()
        .map(|&r| p.phi2(r))
        .collect::<Result<Vec<f64>>>()?;
    let d = grid.gradient(&phi2, p.phi2(p.rho_bar)?);
    Ok((grid.dx
        * sum(s
            .rho
            .iter()
            .zip(&s.m)
            .zip(&d)
            .map(|((&r, &m), &dp)| (m / r.sqrt() + dp).powi(2))))
    .sqrt())
}

/// Split replacement of the Orlicz-type norm of `ρ − ρ̄`: the L² norm over
/// cells with `|ρ − ρ̄| ≤ ρ̄/2` and the L^γ norm over the rest.
pub fn orlicz_pair(rho: &[f64], grid: &Grid1D, p: &Params) -> (f64, f64) {
    let near = sum(rho.iter().filter_map(|&r| {
        let d = (r - p.rho_bar).abs();
        (d <= 0.5 * p.rho_bar).then_some(d * d)
    }));
    let far = sum(rho.iter().filter_map(|&r| {
        let d = (r - p.rho_bar).abs();
        (d > 0.5 * p.rho_bar).then(|| pow(d, p.gamma))
    }));
    ((grid.dx * near).sqrt(), (grid.dx * far).powf(1.0 / p.gamma))
}

/// Computes every field of a record. `gronwall_rhs = None` stands for the
/// initial value `‖ρu‖₁ + ‖ρv‖₁`.
pub fn record(
    s: &State,
    grid: &Grid1D,
    p: &Params,
    opts: &RecordOptions,
    gronwall_rhs: Option<f64>,
    dissipation_bd: f64,
) -> Result<DiagnosticsRecord> {
    let (l1_rhou, l1_rhov) = l1_momenta(s, grid, p)?;
    let jump_amp = match opts.probe {
        Some(pr) => jump_amplitude(&s.rho, grid, pr.x0, pr.width)?,
        None => max_jump(&s.rho),
    };
    Ok(DiagnosticsRecord {
        t: s.t,
        mass: mass(s, grid),
        l1_rhou,
        l1_rhov,
        bd_entropy: bd_entropy(s, grid, p)?,
        energy: energy(s, grid, p)?,
        tv_rho: total_variation(&s.rho),
        rho_max: s.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        rho_min: s.rho.iter().copied().fold(f64::INFINITY, f64::min),
        h1_phi1: h1_phi1(&s.rho, grid, p),
        jump_amp,
        gronwall_rhs: gronwall_rhs.unwrap_or(l1_rhou + l1_rhov),
        dissipation_bd,
        m2_l2: if opts.m2 { Some(m2_l2(s, grid, p)?) } else { None },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GronwallReport {
    pub times: Vec<f64>,
    pub measured: Vec<f64>,
    pub envelope: Vec<f64>,
    /// Largest `measured / envelope` (zero when both vanish).
    pub worst_ratio: f64,
    pub verdict: bool,
}

/// Compares `‖ρu‖₁ + ‖ρv‖₁` against the envelope carried in each record
/// (`gronwall_rhs`, accumulated step by step by the driver); the verdict
/// holds when every snapshot stays below `envelope · (1 + tol)`.
pub fn gronwall_envelope(traj: &Trajectory, tol: f64) -> GronwallReport {
    let recs: Vec<&DiagnosticsRecord> = traj.records().collect();
    let envelope: Vec<f64> = recs.iter().map(|r| r.gronwall_rhs).collect();
    let measured: Vec<f64> = recs.iter().map(|r| r.l1_sum()).collect();
    let verdict = measured
        .iter()
        .zip(&envelope)
        .all(|(m, e)| *m <= e * (1.0 + tol));
    let worst_ratio = measured
        .iter()
        .zip(&envelope)
        .map(|(m, e)| if *e > 0.0 { m / e } else if *m > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);
    GronwallReport {
        times: recs.iter().map(|r| r.t).collect(),
        measured,
        envelope,
        worst_ratio,
        verdict,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DissipationBudget {
    pub times: Vec<f64>,
    /// Accumulated dissipation at each snapshot.
    pub dissipation: Vec<f64>,
    /// `bd_entropy(t) + dissipation(t) − bd_entropy(0)`.
    pub residual: Vec<f64>,
    pub max_residual: f64,
    pub bd_entropy_initial: f64,
}

/// Reads the per-step dissipation accumulated by the driver and forms the
/// entropy budget residual at each snapshot.
pub fn dissipation_budget(traj: &Trajectory) -> DissipationBudget {
    let recs: Vec<&DiagnosticsRecord> = traj.records().collect();
    let e0 = recs[0].bd_entropy;
    let residual: Vec<f64> = recs
        .iter()
        .map(|r| r.bd_entropy + r.dissipation_bd - e0)
        .collect();
    DissipationBudget {
        times: recs.iter().map(|r| r.t).collect(),
        dissipation: recs.iter().map(|r| r.dissipation_bd).collect(),
        max_residual: residual.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        residual,
        bd_entropy_initial: e0,
    }
}

/// `max(0, max_t bd_entropy(t)/bd_entropy(0) − 1)`; zero for a vanishing
/// initial entropy that stays zero.
pub fn entropy_violation(traj: &Trajectory) -> f64 {
    let e0 = traj.first().record.bd_entropy;
    let worst = traj
        .records()
        .map(|r| r.bd_entropy)
        .fold(f64::NEG_INFINITY, f64::max);
    if e0 > 0.0 {
        (worst / e0 - 1.0).max(0.0)
    } else if worst > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
