//! Explicit finite-volume time stepping for the primitive system and for the
//! effective-velocity formulation.
//!
//! Both formulations use forward Euler in time with MUSCL-reconstructed face
//! states. Since `dt` is bounded by the diffusive limit `dt = O(dx²)`, the
//! first-order time error is of the same size as the second-order spatial
//! error.
//!
//! * primitive: `(ρ, m)` with a Rusanov or upwind convective flux and the
//!   viscous flux `μₙ(ρ) ∂ₓu` using a harmonic-mean face viscosity;
//! * effective: `(ρ, w = ρv)`; the mass flux is the upwinded drift `ρv` minus
//!   the diffusion `(μₙ(ρ)/ρ) ∂ₓρ`, `w` is upwinded with `u`, and the
//!   relaxation of `v` toward `u` is integrated exactly over each step.

mod kernels;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, DiagnosticsRecord, Probe, RecordOptions};
use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::params::Params;
use crate::state::{check_fields, from_effective, to_effective, EffectiveState, State};
use crate::sum::{sum, Sum};

pub use kernels::relax;
use kernels::{StepOutcome, Work, REACH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    #[default]
    Primitive,
    Effective,
}

/// Convective flux of the primitive formulation. The effective formulation
/// always upwinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Flux {
    #[default]
    Rusanov,
    /// Face velocity upwinding with centred pressure.
    Upwind,
}

/// Slope limiter of the face reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Limiter {
    /// Piecewise constant (first order).
    Constant,
    Minmod,
    /// Monotonized central.
    #[default]
    Mc,
}

macro_rules! kebab_names {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl $ty {
            pub fn name(self) -> &'static str {
                match self { $(Self::$variant => $name),+ }
            }
        }

        impl std::str::FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    _ => Err(format!(
                        "unknown value '{s}' (expected one of: {})",
                        [$($name),+].join(", ")
                    )),
                }
            }
        }
    };
}

kebab_names!(Formulation { Primitive => "primitive", Effective => "effective" });
kebab_names!(Flux { Rusanov => "rusanov", Upwind => "upwind" });
kebab_names!(Limiter { Constant => "constant", Minmod => "minmod", Mc => "mc" });

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub formulation: Formulation,
    /// Fraction of the stability limit used per step, in (0, 1].
    pub cfl_safety: f64,
    pub flux: Flux,
    pub limiter: Limiter,
    /// Minimum admissible density; `None` means `1e-8 · ρ̄`.
    pub vacuum_floor: Option<f64>,
    pub max_steps: u64,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            formulation: Formulation::Primitive,
            cfl_safety: 0.4,
            flux: Flux::Rusanov,
            limiter: Limiter::Mc,
            vacuum_floor: None,
            max_steps: 50_000_000,
        }
    }
}

impl SchemeConfig {
    pub fn effective() -> Self {
        Self {
            formulation: Formulation::Effective,
            ..Self::default()
        }
    }

    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            out.push(("cfl_safety", "cfl_safety must lie in (0, 1]".to_string()));
        }
        if let Some(f) = self.vacuum_floor {
            if !(f > 0.0 && f.is_finite()) {
                out.push(("vacuum_floor", "vacuum_floor must be positive".to_string()));
            }
        }
        if self.max_steps == 0 {
            out.push(("max_steps", "max_steps must be positive".to_string()));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some((k, m)) => Err(Error::Parameter(format!("{k}: {m}"))),
        }
    }

    pub fn floor(&self, p: &Params) -> f64 {
        self.vacuum_floor.unwrap_or(1e-8 * p.rho_bar)
    }
}

/// Forcing added to the right-hand sides, evaluated at cell centres.
pub trait Source: Sync {
    /// `(mass, momentum)` forcing at `(x, t)`; the momentum part forces `m`
    /// in the primitive formulation and `w` in the effective one.
    fn eval(&self, x: f64, t: f64) -> (f64, f64);
}

/// A stepped state with the mass fluxes through the two domain boundaries.
#[derive(Debug, Clone)]
pub struct Stepped<S> {
    pub state: S,
    pub flux_left: f64,
    pub flux_right: f64,
}

fn full(grid: &Grid1D) -> (usize, usize) {
    (0, grid.cells)
}

fn state_error((index, reason): (usize, String)) -> Error {
    Error::State { index, reason }
}

/// Stable time step for `s` under `cfg`: `cfl_safety` times the smaller of
/// the advective bound `dx/(|u| + c)` (with `max(|u|, |v|)` for the effective
/// formulation) and the diffusive bound `½ dx² ρ/μₙ(ρ)`.
pub fn cfl_dt(s: &State, grid: &Grid1D, p: &Params, cfg: &SchemeConfig) -> Result<f64> {
    let dt = match cfg.formulation {
        Formulation::Primitive => kernels::stable_dt(grid, p, false, (&s.rho, &s.m), full(grid)),
        Formulation::Effective => {
            let e = to_effective(s, grid, p)?;
            kernels::stable_dt(grid, p, true, (&e.rho, &e.w), full(grid))
        }
    }
    .map_err(state_error)?;
    Ok(cfg.cfl_safety * dt)
}

fn check_step(
    outcome: &StepOutcome,
    floor: f64,
    t: f64,
) -> Result<()> {
    match outcome.breach {
        Some((index, rho)) => Err(Error::VacuumBreach {
            index,
            rho,
            floor,
            t,
        }),
        None => Ok(()),
    }
}

pub fn step_primitive(
    s: &State,
    dt: f64,
    grid: &Grid1D,
    p: &Params,
    cfg: &SchemeConfig,
) -> Result<Stepped<State>> {
    step_primitive_with_source(s, dt, grid, p, cfg, None)
}

pub fn step_primitive_with_source(
    s: &State,
    dt: f64,
    grid: &Grid1D,
    p: &Params,
    cfg: &SchemeConfig,
    source: Option<&dyn Source>,
) -> Result<Stepped<State>> {
    s.check()?;
    let mut next = s.clone();
    let floor = cfg.floor(p);
    let out = kernels::primitive_step(
        grid,
        p,
        cfg,
        floor,
        (&s.rho, &s.m),
        (&mut next.rho, &mut next.m),
        full(grid),
        s.t,
        dt,
        source,
        &mut Work::default(),
    );
    check_step(&out, floor, s.t + dt)?;
    next.t = s.t + dt;
    Ok(Stepped {
        state: next,
        flux_left: out.flux_left,
        flux_right: out.flux_right,
    })
}

pub fn step_effective(
    e: &EffectiveState,
    dt: f64,
    grid: &Grid1D,
    p: &Params,
    cfg: &SchemeConfig,
) -> Result<Stepped<EffectiveState>> {
    step_effective_with_source(e, dt, grid, p, cfg, None)
}

pub fn step_effective_with_source(
    e: &EffectiveState,
    dt: f64,
    grid: &Grid1D,
    p: &Params,
    cfg: &SchemeConfig,
    source: Option<&dyn Source>,
) -> Result<Stepped<EffectiveState>> {
    e.check()?;
    let mut next = e.clone();
    let floor = cfg.floor(p);
    let out = kernels::effective_step(
        grid,
        p,
        cfg,
        floor,
        (&e.rho, &e.w),
        (&mut next.rho, &mut next.w),
        full(grid),
        e.t,
        dt,
        source,
        &mut Work::default(),
    );
    check_step(&out, floor, e.t + dt)?;
    next.t = e.t + dt;
    Ok(Stepped {
        state: next,
        flux_left: out.flux_left,
        flux_right: out.flux_right,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Completed,
    VacuumBreach,
    StepBudgetExhausted,
}

/// Mass bookkeeping of a run, relative to the initial mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct MassBalance {
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Largest per-step `|ΔM − (F_left − F_right) dt − sources| / M₀`.
    pub max_step_residual: f64,
    /// `|M_end − M₀ − Σ predicted changes| / M₀` over the whole run.
    pub accumulated_residual: f64,
    /// Net mass that left through the boundaries.
    pub boundary_outflow: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub state: State,
    pub record: DiagnosticsRecord,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub formulation: Formulation,
    pub snapshots: Vec<Snapshot>,
    pub status: Status,
    /// Cause of an early stop.
    pub failure: Option<String>,
    pub steps: u64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub mass_balance: MassBalance,
}

impl Trajectory {
    pub fn first(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("trajectory has a first snapshot")
    }

    pub fn records(&self) -> impl Iterator<Item = &DiagnosticsRecord> {
        self.snapshots.iter().map(|s| &s.record)
    }

    /// Snapshot recorded at time `t` (to 1e-9 relative).
    pub fn at_time(&self, t: f64) -> Option<&Snapshot> {
        self.snapshots
            .iter()
            .find(|s| (s.state.t - t).abs() <= 1e-9 * t.abs().max(1.0))
    }
}

#[derive(Debug, Clone)]
pub enum Initial {
    Primitive(State),
    Effective(EffectiveState),
}

impl From<State> for Initial {
    fn from(s: State) -> Self {
        Initial::Primitive(s)
    }
}

impl From<EffectiveState> for Initial {
    fn from(e: EffectiveState) -> Self {
        Initial::Effective(e)
    }
}

impl Initial {
    fn time(&self) -> f64 {
        match self {
            Initial::Primitive(s) => s.t,
            Initial::Effective(e) => e.t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Absolute end time.
    pub t_end: f64,
    /// Recording cadence; first and last states are always recorded.
    pub record_every: Option<f64>,
    pub probe: Option<Probe>,
    pub m2: bool,
}

impl RunOptions {
    pub fn new(t_end: f64) -> Self {
        Self {
            t_end,
            record_every: None,
            probe: None,
            m2: false,
        }
    }

    pub fn record_every(mut self, dt: f64) -> Self {
        self.record_every = Some(dt);
        self
    }

    pub fn probe(mut self, probe: Probe) -> Self {
        self.probe = Some(probe);
        self
    }
}

/// Runs to `t_end`, recording every `record_every` (and at both ends).
pub fn run(
    initial: impl Into<Initial>,
    t_end: f64,
    grid: &Grid1D,
    p: &Params,
    cfg: &SchemeConfig,
    record_every: Option<f64>,
) -> Result<Trajectory> {
    let opts = RunOptions {
        record_every,
        ..RunOptions::new(t_end)
    };
    run_with(initial.into(), grid, p, cfg, &opts, None)
}

/// Driver state for one simulation.
struct Sim<'a> {
    grid: &'a Grid1D,
    p: &'a Params,
    cfg: &'a SchemeConfig,
    source: Option<&'a dyn Source>,
    rho: Vec<f64>,
    q: Vec<f64>,
    rho_next: Vec<f64>,
    q_next: Vec<f64>,
    /// Cells `[span.0, span.1)` updated each step; everything outside is
    /// exactly at the far-field equilibrium in both buffers.
    span: (usize, usize),
    work: Work,
    t: f64,
}

impl Sim<'_> {
    fn effective(&self) -> bool {
        self.cfg.formulation == Formulation::Effective
    }

    fn at_rest(&self, i: usize) -> bool {
        self.rho[i] == self.p.rho_bar && self.q[i] == 0.0
    }

    fn initial_span(&mut self) {
        let n = self.grid.cells;
        if self.grid.boundary == Boundary::Periodic || self.source.is_some() {
            self.span = (0, n);
            return;
        }
        let first = (0..n).find(|&i| !self.at_rest(i));
        let last = (0..n).rev().find(|&i| !self.at_rest(i));
        self.span = match (first, last) {
            (Some(a), Some(b)) => (a.saturating_sub(REACH), (b + 1 + REACH).min(n)),
            _ => (0, 0),
        };
    }

    /// Widens the span so every non-equilibrium cell keeps `REACH` cells of
    /// margin on each side.
    fn widen_span(&mut self) {
        let n = self.grid.cells;
        let (s, e) = self.span;
        if s == e {
            return;
        }
        if let Some(j) = (s..(s + REACH + 1).min(e)).find(|&i| !self.at_rest(i)) {
            self.span.0 = self.span.0.min(j.saturating_sub(REACH));
        }
        if let Some(j) = (e.saturating_sub(REACH + 1).max(s)..e).rev().find(|&i| !self.at_rest(i)) {
            self.span.1 = self.span.1.max((j + 1 + REACH).min(n));
        }
    }

    fn stable_dt(&self) -> Result<f64> {
        let dt = kernels::stable_dt(self.grid, self.p, self.effective(), (&self.rho, &self.q), self.span)
            .map_err(state_error)?;
        Ok(self.cfg.cfl_safety * dt)
    }

    fn step(&mut self, dt: f64) -> StepOutcome {
        let floor = self.cfg.floor(self.p);
        let f = if self.effective() {
            kernels::effective_step
        } else {
            kernels::primitive_step
        };
        f(
            self.grid,
            self.p,
            self.cfg,
            floor,
            (&self.rho, &self.q),
            (&mut self.rho_next, &mut self.q_next),
            self.span,
            self.t,
            dt,
            self.source,
            &mut self.work,
        )
    }

    fn commit(&mut self, t: f64) {
        std::mem::swap(&mut self.rho, &mut self.rho_next);
        std::mem::swap(&mut self.q, &mut self.q_next);
        self.t = t;
        self.widen_span();
    }

    fn state(&self) -> State {
        if self.effective() {
            let e = EffectiveState {
                rho: self.rho.clone(),
                w: self.q.clone(),
                t: self.t,
            };
            from_effective(&e, self.grid, self.p).expect("committed states pass the vacuum guard")
        } else {
            State {
                rho: self.rho.clone(),
                m: self.q.clone(),
                t: self.t,
            }
        }
    }

    /// BD dissipation rate and the Gronwall rate bound of the current state,
    /// restricted to the span (both vanish or are constant outside it).
    fn rates(&self) -> (f64, f64) {
        let (s, e) = self.span;
        let n = self.grid.cells;
        let rho_at = |j: isize| -> f64 {
            if (0..n as isize).contains(&j) {
                self.rho[j as usize]
            } else {
                match self.grid.boundary {
                    Boundary::FarField => self.p.rho_bar,
                    Boundary::Periodic => self.rho[j.rem_euclid(n as isize) as usize],
                }
            }
        };
        let faces = (s as isize..=e as isize).map(|f| (rho_at(f - 1), rho_at(f)));
        let dissipation = diagnostics::dissipation_faces(faces, self.grid.dx, self.p);
        let rho_max = self.rho[s..e]
            .iter()
            .copied()
            .fold(if (s, e) == (0, n) { f64::NEG_INFINITY } else { self.p.rho_bar }, f64::max);
        (dissipation, diagnostics::gronwall_rate_bound(rho_max, self.p))
    }
}

/// Runs with explicit options and an optional forcing.
pub fn run_with(
    initial: Initial,
    grid: &Grid1D,
    p: &Params,
    cfg: &SchemeConfig,
    opts: &RunOptions,
    source: Option<&dyn Source>,
) -> Result<Trajectory> {
    p.validate()?;
    cfg.validate()?;
    let t0 = initial.time();
    if !(opts.t_end.is_finite() && opts.t_end >= t0) {
        return Err(Error::Parameter(format!(
            "t_end must be finite and not before the initial time {t0} (got {})",
            opts.t_end
        )));
    }
    if let Some(r) = opts.record_every {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Parameter(format!(
                "record_every must be positive (got {r})"
            )));
        }
    }
    let (rho, q) = match (cfg.formulation, initial) {
        (Formulation::Primitive, Initial::Primitive(s)) => (s.rho, s.m),
        (Formulation::Primitive, Initial::Effective(e)) => {
            let s = from_effective(&e, grid, p)?;
            (s.rho, s.m)
        }
        (Formulation::Effective, Initial::Primitive(s)) => {
            let e = to_effective(&s, grid, p)?;
            (e.rho, e.w)
        }
        (Formulation::Effective, Initial::Effective(e)) => (e.rho, e.w),
    };
    check_fields(&rho, &q)?;
    if rho.len() != grid.cells {
        return Err(Error::Parameter(format!(
            "state has {} cells but the grid has {}",
            rho.len(),
            grid.cells
        )));
    }

    let mut sim = Sim {
        grid,
        p,
        cfg,
        source,
        rho_next: rho.clone(),
        q_next: q.clone(),
        rho,
        q,
        span: (0, 0),
        work: Work::default(),
        t: t0,
    };
    sim.initial_span();

    let rec_opts = RecordOptions {
        probe: opts.probe,
        m2: opts.m2,
    };
    let mut snapshots = Vec::new();
    let first = sim.state();
    let first_record = diagnostics::record(&first, grid, p, &rec_opts, None, 0.0)?;
    let l1_initial = first_record.l1_rhou + first_record.l1_rhov;
    snapshots.push(Snapshot {
        state: first,
        record: first_record,
    });

    let initial_mass = grid.dx * sum(sim.rho.iter().copied());
    let mut predicted = Sum::default();
    let mut outflow = Sum::default();
    let mut max_step_residual: f64 = 0.0;

    let (mut d_prev, mut g_prev) = sim.rates();
    let mut dissipation = 0.0;
    let mut gronwall_integral = 0.0;

    let mut k_record = 1u64;
    let next_target = |k: u64| -> f64 {
        match opts.record_every {
            Some(r) => (t0 + k as f64 * r).min(opts.t_end),
            None => opts.t_end,
        }
    };
    let mut status = Status::Completed;
    let mut failure = None;
    let mut steps = 0u64;
    let mut dt_min = f64::INFINITY;
    let mut dt_max: f64 = 0.0;
    let mut last_recorded = t0;

    while sim.t < opts.t_end {
        if steps >= cfg.max_steps {
            status = Status::StepBudgetExhausted;
            failure = Some(format!(
                "step budget of {} exhausted at t = {}",
                cfg.max_steps, sim.t
            ));
            break;
        }
        let target = next_target(k_record);
        let mut dt = sim.stable_dt()?;
        let remaining = target - sim.t;
        let hit = dt >= remaining;
        if hit {
            dt = remaining;
        } else if remaining - dt < 1e-3 * dt {
            dt = 0.5 * remaining;
        }
        let out = sim.step(dt);
        steps += 1;
        if let Some((index, rho)) = out.breach {
            status = Status::VacuumBreach;
            failure = Some(
                Error::VacuumBreach {
                    index,
                    rho,
                    floor: cfg.floor(p),
                    t: sim.t + dt,
                }
                .to_string(),
            );
            break;
        }
        let expected = (out.flux_left - out.flux_right) * dt + out.source_mass;
        max_step_residual = max_step_residual.max((out.mass_change - expected).abs() / initial_mass);
        predicted.add(expected);
        outflow.add((out.flux_right - out.flux_left) * dt);
        dt_min = dt_min.min(dt);
        dt_max = dt_max.max(dt);

        let t_new = if hit { target } else { sim.t + dt };
        sim.commit(t_new);

        let (d_now, g_now) = sim.rates();
        dissipation += 0.5 * dt * (d_prev + d_now);
        gronwall_integral += 0.5 * dt * (g_prev + g_now);
        d_prev = d_now;
        g_prev = g_now;

        if hit {
            k_record += 1;
            let state = sim.state();
            let record = diagnostics::record(
                &state,
                grid,
                p,
                &rec_opts,
                Some(l1_initial * (3.0 * gronwall_integral).exp()),
                dissipation,
            )?;
            snapshots.push(Snapshot { state, record });
            last_recorded = sim.t;
        }
    }
    if sim.t > last_recorded {
        let state = sim.state();
        let record = diagnostics::record(
            &state,
            grid,
            p,
            &rec_opts,
            Some(l1_initial * (3.0 * gronwall_integral).exp()),
            dissipation,
        )?;
        snapshots.push(Snapshot { state, record });
    }

    let final_mass = grid.dx * sum(sim.rho.iter().copied());
    let accumulated = ((final_mass - initial_mass) - predicted.value()).abs() / initial_mass;
    Ok(Trajectory {
        formulation: cfg.formulation,
        snapshots,
        status,
        failure,
        steps,
        dt_min: if steps == 0 { 0.0 } else { dt_min },
        dt_max,
        mass_balance: MassBalance {
            initial_mass,
            final_mass,
            max_step_residual,
            accumulated_residual: accumulated,
            boundary_outflow: outflow.value(),
        },
    })
}
