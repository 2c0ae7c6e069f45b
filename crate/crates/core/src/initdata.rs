//! Initial data: heat-kernel mollification, Dirac momenta, BV densities and
//! scenario construction for each hypothesis regime.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid1D};
use crate::params::Params;
use crate::state::{grad_phi1, to_effective, EffectiveState, State};
use crate::sum::sum;

/// Kernel support in standard deviations.
pub const KERNEL_SIGMAS: f64 = 8.0;

/// A sampled field produced by mollification.
#[derive(Debug, Clone, PartialEq)]
pub struct Mollified {
    pub values: Vec<f64>,
    /// Set when the kernel support around a non-trivial part of the input
    /// leaves the domain.
    pub truncated: bool,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "mollification time must be positive (got {tau})"
        )))
    }
}

fn kernel_half_width(tau: f64, dx: f64) -> usize {
    (KERNEL_SIGMAS * (2.0 * tau).sqrt() / dx).ceil() as usize
}

/// Discrete heat-kernel weights `exp(-(j dx)²/(4τ))`, `|j| ≤ J`, normalized to
/// unit sum. Index `J` is the centre.
fn kernel_weights(tau: f64, dx: f64) -> Vec<f64> {
    let half = kernel_half_width(tau, dx) as isize;
    let mut w: Vec<f64> = (-half..=half)
        .map(|j| {
            let s = j as f64 * dx;
            (-s * s / (4.0 * tau)).exp()
        })
        .collect();
    let z = sum(w.iter().copied());
    for v in &mut w {
        *v /= z;
    }
    w
}

/// Applies the heat semigroup at time `tau` to a sampled field.
///
/// Outside the domain the field is continued by its edge values (far field)
/// or periodically. Each output is written as `f[i] + Σ w_j (f[i+j] − f[i])`,
/// so cells whose neighbourhood is constant keep their value bit for bit.
pub fn heat_mollify(field: &[f64], tau: f64, grid: &Grid1D) -> Result<Mollified> {
    check_tau(tau)?;
    let n = field.len();
    if n == 0 {
        return Ok(Mollified {
            values: Vec::new(),
            truncated: false,
        });
    }
    let w = kernel_weights(tau, grid.dx);
    let half = (w.len() / 2) as isize;
    let periodic = grid.boundary == Boundary::Periodic;
    let at = |k: isize| -> f64 {
        if periodic {
            field[k.rem_euclid(n as isize) as usize]
        } else {
            field[k.clamp(0, n as isize - 1) as usize]
        }
    };

    // changes[k] counts jumps between consecutive samples left of k
    let mut changes = vec![0usize; n + 1];
    for k in 1..n {
        changes[k + 1] = changes[k] + usize::from(field[k] != field[k - 1]);
    }
    let first_change = (1..n).find(|&k| field[k] != field[k - 1]);
    let last_change = (1..n).rev().find(|&k| field[k] != field[k - 1]);

    let mut values = field.to_vec();
    if first_change.is_none() {
        return Ok(Mollified {
            values,
            truncated: false,
        });
    }
    for (i, out) in values.iter_mut().enumerate() {
        let i = i as isize;
        let flat = if periodic {
            false
        } else {
            let lo = (i - half).clamp(0, n as isize - 1) as usize;
            let hi = (i + half).clamp(0, n as isize - 1) as usize;
            changes[hi + 1] - changes[lo + 1] == 0
        };
        if flat {
            continue;
        }
        let centre = field[i as usize];
        let mut acc = 0.0;
        for (j, wj) in w.iter().enumerate() {
            acc += wj * (at(i + j as isize - half) - centre);
        }
        *out = centre + acc;
    }

    let truncated = !periodic
        && (first_change.unwrap() as isize - half <= 0
            || last_change.unwrap() as isize + half >= n as isize);
    Ok(Mollified { values, truncated })
}

/// Sum of mollified Dirac atoms `(x₀, mass)`.
///
/// Each atom becomes the heat kernel sampled at cell centres, rescaled so
/// that the samples carry exactly its mass (the normalization runs over the
/// whole lattice, including cells beyond the domain).
pub fn make_dirac_momentum(atoms: &[(f64, f64)], tau: f64, grid: &Grid1D) -> Result<Mollified> {
    check_tau(tau)?;
    let n = grid.cells;
    let mut values = vec![0.0; n];
    let mut truncated = false;
    let reach = KERNEL_SIGMAS * (2.0 * tau).sqrt();
    let periodic = grid.boundary == Boundary::Periodic;
    for &(x0, mass) in atoms {
        if !periodic && (x0 - reach < grid.x_min || x0 + reach > grid.x_max) {
            truncated = true;
        }
        // lattice indices (possibly outside 0..n) within the kernel reach
        let lo = ((x0 - reach - grid.x_min) / grid.dx - 0.5).floor() as isize;
        let hi = ((x0 + reach - grid.x_min) / grid.dx - 0.5).ceil() as isize;
        let kernel = |k: isize| {
            let s = grid.x_min + (k as f64 + 0.5) * grid.dx - x0;
            (-s * s / (4.0 * tau)).exp()
        };
        let z = sum((lo..=hi).map(kernel)) * grid.dx;
        if z == 0.0 {
            continue;
        }
        let scale = mass / z;
        for k in lo..=hi {
            let idx = if periodic {
                k.rem_euclid(n as isize)
            } else if (0..n as isize).contains(&k) {
                k
            } else {
                continue;
            };
            values[idx as usize] += scale * kernel(k);
        }
    }
    Ok(Mollified { values, truncated })
}

/// Heat-kernel mollification of a single atom list; alias of
/// [`make_dirac_momentum`] under the name of the general operation.
pub fn heat_mollify_atoms(atoms: &[(f64, f64)], tau: f64, grid: &Grid1D) -> Result<Mollified> {
    make_dirac_momentum(atoms, tau, grid)
}

/// Piecewise-constant density: `rho_left` at centres left of `x0`,
/// `rho_right` elsewhere.
pub fn make_shock_density(rho_left: f64, rho_right: f64, x0: f64, grid: &Grid1D) -> Vec<f64> {
    debug_assert!(rho_left > 0.0 && rho_right > 0.0);
    grid.centers()
        .into_iter()
        .map(|x| if x < x0 { rho_left } else { rho_right })
        .collect()
}

/// `exp(1 − 1/(1 − r²))` on `|r| < 1`, zero outside; peak 1 at `r = 0`.
fn smooth_bump(r: f64) -> f64 {
    if r.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensityProfile {
    /// The far-field density everywhere.
    Constant,
    /// `values[k]` on the k-th interval cut by the sorted `breaks`.
    Piecewise { breaks: Vec<f64>, values: Vec<f64> },
    /// `ρ̄ + amplitude · bump((x − center)/width)` with a compactly
    /// supported smooth bump.
    Bump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl Default for DensityProfile {
    fn default() -> Self {
        DensityProfile::Constant
    }
}

impl DensityProfile {
    pub fn sample(&self, x: f64, rho_bar: f64) -> f64 {
        match self {
            DensityProfile::Constant => rho_bar,
            DensityProfile::Piecewise { breaks, values } => {
                let k = breaks.iter().take_while(|&&b| x >= b).count();
                values[k]
            }
            DensityProfile::Bump {
                amplitude,
                center,
                width,
            } => rho_bar + amplitude * smooth_bump((x - center) / width),
        }
    }

    fn violations(&self, rho_bar: f64, boundary: Boundary, out: &mut Vec<String>) {
        match self {
            DensityProfile::Constant => {}
            DensityProfile::Piecewise { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    out.push(format!(
                        "density: {} values given for {} breaks (need breaks + 1)",
                        values.len(),
                        breaks.len()
                    ));
                    return;
                }
                if breaks.windows(2).any(|w| w[0] >= w[1]) {
                    out.push("density: breaks must be strictly increasing".into());
                }
                if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                    out.push("density: values must be positive (0 < c <= rho0 <= C)".into());
                }
                let far = |v: f64| (v - rho_bar).abs() <= 1e-12 * rho_bar;
                if boundary == Boundary::FarField
                    && !(far(values[0]) && far(values[values.len() - 1]))
                {
                    out.push("density: outermost values must equal rho_bar (far-field state)".into());
                }
            }
            DensityProfile::Bump {
                amplitude, width, ..
            } => {
                if !(width.is_finite() && *width > 0.0) {
                    out.push("density: bump width must be positive".into());
                }
                if !(rho_bar + amplitude.min(0.0) > 0.0) {
                    out.push("density: bump would reach vacuum (need rho_bar + amplitude > 0)".into());
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VelocityProfile {
    Zero,
    /// `amplitude · bump((x − center)/width)`, compactly supported.
    Bump {
        amplitude: f64,
        center: f64,
        width: f64,
    },
    /// `amplitude · exp(−((x − center)/width)²)`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

impl Default for VelocityProfile {
    fn default() -> Self {
        VelocityProfile::Zero
    }
}

impl VelocityProfile {
    pub fn sample(&self, x: f64) -> f64 {
        match *self {
            VelocityProfile::Zero => 0.0,
            VelocityProfile::Bump {
                amplitude,
                center,
                width,
            } => amplitude * smooth_bump((x - center) / width),
            VelocityProfile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let r = (x - center) / width;
                amplitude * (-r * r).exp()
            }
        }
    }

    fn violations(&self, out: &mut Vec<String>) {
        match *self {
            VelocityProfile::Zero => {}
            VelocityProfile::Bump {
                amplitude, width, ..
            }
            | VelocityProfile::Gaussian {
                amplitude, width, ..
            } => {
                if !(width.is_finite() && width > 0.0) {
                    out.push("velocity: width must be positive".into());
                }
                if !amplitude.is_finite() {
                    out.push("velocity: amplitude must be finite".into());
                }
            }
        }
    }
}

/// Hypothesis regime a scenario is built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    /// α > 0, α ≠ ½, γ ≥ α (and γ ≥ 2α − 1 if α > ½); BV density, `v₀ ∈ L²`.
    Theo1StrongCoupling,
    /// α > 0, γ ≥ α; `u₀ ∈ L²` plus Dirac momenta, so `ρ₀v₀` is a measure.
    CorbisWeakCoupling,
    /// Constant viscosity (α = 0); BV density, `v₀ ∈ L²`.
    Theo2ConstantVisc,
    /// Constant viscosity (α = 0); BV density, `u₀ ∈ L²`, no atoms.
    HoffL2Velocity,
    /// No hypothesis checks; velocity is `u₀`, atoms are added to `m₀`.
    Custom,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Theo1StrongCoupling,
        ScenarioKind::CorbisWeakCoupling,
        ScenarioKind::Theo2ConstantVisc,
        ScenarioKind::HoffL2Velocity,
        ScenarioKind::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Theo1StrongCoupling => "theo1-strong-coupling",
            ScenarioKind::CorbisWeakCoupling => "corbis-weak-coupling",
            ScenarioKind::Theo2ConstantVisc => "theo2-constant-visc",
            ScenarioKind::HoffL2Velocity => "hoff-l2-velocity",
            ScenarioKind::Custom => "custom",
        }
    }

    /// Whether the velocity profile prescribes the effective velocity `v₀`
    /// (otherwise it prescribes `u₀`).
    pub fn velocity_is_effective(self) -> bool {
        matches!(
            self,
            ScenarioKind::Theo1StrongCoupling | ScenarioKind::Theo2ConstantVisc
        )
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let short = [
            ("theo1", ScenarioKind::Theo1StrongCoupling),
            ("corbis", ScenarioKind::CorbisWeakCoupling),
            ("theo2", ScenarioKind::Theo2ConstantVisc),
            ("hoff", ScenarioKind::HoffL2Velocity),
        ];
        ScenarioKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .or_else(|| short.iter().find(|(n, _)| *n == s).map(|(_, k)| *k))
            .ok_or_else(|| {
                format!(
                    "unknown scenario kind '{s}' (expected one of: {})",
                    ScenarioKind::ALL.map(|k| k.name()).join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub density: DensityProfile,
    /// `v₀` for the constant-coupling kinds, `u₀` otherwise.
    pub velocity: VelocityProfile,
    /// Dirac atoms `(location, mass)` added to the momentum.
    pub atoms: Vec<(f64, f64)>,
    /// Mollification time τ = 1/n; zero leaves the data unsmoothed.
    pub mollify_tau: f64,
    /// When set, overrides `mollify_tau` with τ = ½(k·dx)², a kernel whose
    /// standard deviation is k cells.
    pub mollify_cells: Option<f64>,
    /// Smallness threshold for `‖∂ₓφ₁(ρ₀)‖₁ + ‖m₀‖₁`.
    pub eps0: f64,
    pub params: Params,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            kind: ScenarioKind::Custom,
            density: DensityProfile::Constant,
            velocity: VelocityProfile::Zero,
            atoms: Vec::new(),
            mollify_tau: 0.0,
            mollify_cells: None,
            eps0: 0.1,
            params: Params::default(),
        }
    }
}

impl ScenarioSpec {
    /// Mollification time actually used on `grid`.
    pub fn tau(&self, grid: &Grid1D) -> f64 {
        match self.mollify_cells {
            Some(k) => 0.5 * (k * grid.dx).powi(2),
            None => self.mollify_tau,
        }
    }

    /// Hypothesis violations, one message each; empty when the spec is valid.
    pub fn violations(&self, grid: &Grid1D) -> Vec<String> {
        let p = &self.params;
        let mut out: Vec<String> = p
            .violations()
            .into_iter()
            .map(|(k, m)| format!("params.{k}: {m}"))
            .collect();
        self.density.violations(p.rho_bar, grid.boundary, &mut out);
        self.velocity.violations(&mut out);

        let tau = self.tau(grid);
        if !(tau >= 0.0 && tau.is_finite()) {
            out.push(format!("mollification time must be >= 0 (got {tau})"));
        }
        if let Some(k) = self.mollify_cells {
            if !(k > 0.0 && k.is_finite()) {
                out.push(format!("mollify_cells must be positive (got {k})"));
            }
        }
        if !self.atoms.is_empty() && tau <= 0.0 {
            out.push("Dirac atoms require a positive mollification time".into());
        }
        if self
            .atoms
            .iter()
            .any(|&(x, m)| !(x.is_finite() && m.is_finite()))
        {
            out.push("atoms must have finite location and mass".into());
        }
        if !(self.eps0 > 0.0) {
            out.push("eps0 must be positive".into());
        }

        let no_atoms = |out: &mut Vec<String>, why: &str| {
            if !self.atoms.is_empty() {
                out.push(format!("{}: {why}", self.kind));
            }
        };
        match self.kind {
            ScenarioKind::Theo1StrongCoupling => {
                if !(p.alpha > 0.0) {
                    out.push(format!("{}: requires alpha > 0", self.kind));
                }
                if p.alpha == 0.5 {
                    out.push(format!("{}: requires alpha != 1/2", self.kind));
                }
                if p.gamma < p.alpha {
                    out.push(format!("{}: requires gamma >= alpha", self.kind));
                }
                if p.alpha > 0.5 && p.gamma < 2.0 * p.alpha - 1.0 {
                    out.push(format!(
                        "{}: requires gamma >= 2 alpha - 1 when alpha > 1/2",
                        self.kind
                    ));
                }
                no_atoms(&mut out, "effective velocity must be square integrable, atoms not allowed");
            }
            ScenarioKind::CorbisWeakCoupling => {
                if !(p.alpha > 0.0) {
                    out.push(format!("{}: requires alpha > 0", self.kind));
                }
                if p.gamma < p.alpha {
                    out.push(format!("{}: requires gamma >= alpha", self.kind));
                }
            }
            ScenarioKind::Theo2ConstantVisc => {
                if p.alpha != 0.0 {
                    out.push(format!("{}: requires alpha = 0", self.kind));
                }
                no_atoms(&mut out, "effective velocity must be square integrable, atoms not allowed");
            }
            ScenarioKind::HoffL2Velocity => {
                if p.alpha != 0.0 {
                    out.push(format!("{}: requires alpha = 0", self.kind));
                }
                no_atoms(&mut out, "velocity must be square integrable, atoms not allowed");
            }
            ScenarioKind::Custom => {}
        }
        out
    }
}

/// What was built, alongside the smallness and truncation checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub kind: ScenarioKind,
    pub tau: f64,
    /// `‖∂ₓφ₁(ρ₀)‖₁ + ‖m₀‖₁` of the built data.
    pub smallness: f64,
    pub eps0: f64,
    pub smallness_exceeded: bool,
    pub kernel_truncated: bool,
    pub rho_min: f64,
    pub rho_max: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub state: State,
    pub effective: EffectiveState,
    pub report: ScenarioReport,
}

/// Builds `(ρ₀, m₀)` and `(ρ₀, w₀)` for `spec` on `grid`.
///
/// For the kinds that prescribe `v₀`, `m₀ = ρ₀v₀ − Dφ₁(ρ₀)` is formed on the
/// unsmoothed density and both fields are then mollified. Otherwise
/// `m₀ = ρ₀u₀` plus the mollified atoms.
pub fn build_scenario(spec: &ScenarioSpec, grid: &Grid1D) -> Result<Scenario> {
    let violations = spec.violations(grid);
    if !violations.is_empty() {
        return Err(Error::Scenario(violations));
    }
    let p = &spec.params;
    let xs = grid.centers();
    let tau = spec.tau(grid);
    let mut warnings = Vec::new();
    let mut truncated = false;

    let mut rho: Vec<f64> = xs.iter().map(|&x| spec.density.sample(x, p.rho_bar)).collect();
    let vel: Vec<f64> = xs.iter().map(|&x| spec.velocity.sample(x)).collect();
    let mut m: Vec<f64> = if spec.kind.velocity_is_effective() {
        let g = grad_phi1(&rho, grid, p);
        rho.iter().zip(&vel).zip(&g).map(|((r, v), d)| r * v - d).collect()
    } else {
        rho.iter().zip(&vel).map(|(r, u)| r * u).collect()
    };

    if tau > 0.0 {
        let r = heat_mollify(&rho, tau, grid)?;
        let q = heat_mollify(&m, tau, grid)?;
        truncated |= r.truncated || q.truncated;
        rho = r.values;
        m = q.values;
        if !spec.atoms.is_empty() {
            let d = make_dirac_momentum(&spec.atoms, tau, grid)?;
            truncated |= d.truncated;
            for (mi, di) in m.iter_mut().zip(&d.values) {
                *mi += di;
            }
        }
    }
    if truncated {
        warnings.push("mollification kernel reaches the domain edge".to_string());
    }

    let state = State::new(rho, m, 0.0)?;
    if grid.boundary == Boundary::FarField {
        let edge = [state.rho[0], state.rho[state.len() - 1]];
        if edge.iter().any(|&r| (r - p.rho_bar).abs() > 1e-6 * p.rho_bar) {
            return Err(Error::Scenario(vec![format!(
                "density at the domain edges ({}, {}) does not match rho_bar = {}",
                edge[0], edge[1], p.rho_bar
            )]));
        }
    }
    let effective = to_effective(&state, grid, p)?;

    let dphi1 = grad_phi1(&state.rho, grid, p);
    let smallness = grid.dx * (sum(dphi1.iter().map(|d| d.abs())) + sum(state.m.iter().map(|v| v.abs())));
    let smallness_exceeded = smallness > spec.eps0;
    if smallness_exceeded {
        warnings.push(format!(
            "smallness {smallness:.4e} exceeds eps0 = {:.4e}",
            spec.eps0
        ));
    }
    let rho_min = state.rho.iter().copied().fold(f64::INFINITY, f64::min);
    let rho_max = state.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    Ok(Scenario {
        state,
        effective,
        report: ScenarioReport {
            kind: spec.kind,
            tau,
            smallness,
            eps0: spec.eps0,
            smallness_exceeded,
            kernel_truncated: truncated,
            rho_min,
            rho_max,
            warnings,
        },
    })
}
