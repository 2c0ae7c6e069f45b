//! Run configuration and its TOML text format.
//!
//! Every setting is addressed by a dotted key (`params.gamma`,
//! `scenario.density.values`, ...). A file is an ordinary TOML document whose
//! tables spell those keys; `--override key=value` takes the same keys with a
//! TOML value (bare words are read as strings).
//!
//! ```toml
//! preset = "theo1"            # optional starting point
//! [params]
//! n_reg = "inf"
//! [grid]
//! cells = 10240
//! [run]
//! t_end = 0.02
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;

use toml::Value;

use crate::error::{Error, FieldError, Result};
use crate::grid::{Boundary, Grid1D};
use crate::initdata::{DensityProfile, ScenarioKind, ScenarioSpec, VelocityProfile};
use crate::solver::{Flux, Formulation, Limiter, SchemeConfig};

use super::presets;

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
    pub boundary: Boundary,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: -20.0,
            x_max: 20.0,
            cells: 20480,
            boundary: Boundary::FarField,
        }
    }
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid1D> {
        Ok(Grid1D::new(self.x_min, self.x_max, self.cells)?.with_boundary(self.boundary))
    }

    pub fn with_cells(&self, cells: usize) -> Self {
        Self {
            cells,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub t_end: f64,
    pub record_every: Option<f64>,
    pub output_dir: PathBuf,
    /// Centre of the jump-amplitude window; the whole domain when absent.
    pub probe_x: Option<f64>,
    pub probe_window: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            t_end: 0.05,
            record_every: Some(0.005),
            output_dir: PathBuf::from("out"),
            probe_x: None,
            probe_window: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub dx_refinement: Vec<usize>,
    /// Regularization indices; `None` is n = ∞.
    pub n_sequence: Vec<Option<u32>>,
    /// Apply n to the viscosity `μₙ`.
    pub n_viscosity: bool,
    /// Apply n to the data through τ = 1/n.
    pub n_mollify: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            dx_refinement: Vec::new(),
            n_sequence: Vec::new(),
            n_viscosity: true,
            n_mollify: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub name: String,
    pub scenario: ScenarioSpec,
    pub grid: GridConfig,
    pub scheme: SchemeConfig,
    pub run: RunSection,
    pub study: Option<StudyConfig>,
    /// Record `‖√ρu + ∂ₓφ₂(ρ)‖₂`, which needs α ≠ ½.
    pub m2: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            name: "custom".into(),
            scenario: ScenarioSpec::default(),
            grid: GridConfig::default(),
            scheme: SchemeConfig::default(),
            run: RunSection::default(),
            study: None,
            m2: true,
        }
    }
}

impl RunConfig {
    pub fn probe(&self) -> Option<crate::diagnostics::Probe> {
        self.run.probe_x.map(|x0| crate::diagnostics::Probe {
            x0,
            width: self.run.probe_window,
        })
    }

    /// Field-level validation of the whole configuration.
    pub fn validate(&self) -> Result<()> {
        let errors = self.errors();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn errors(&self) -> Vec<FieldError> {
        let mut out = Vec::new();
        for (key, msg) in self.scenario.params.violations() {
            out.push(FieldError::new(format!("params.{key}"), msg));
        }
        for (key, msg) in self.scheme.violations() {
            out.push(FieldError::new(format!("scheme.{key}"), msg));
        }
        let g = &self.grid;
        let grid = match g.build() {
            Ok(grid) => Some(grid),
            Err(e) => {
                out.push(FieldError::new("grid", e.to_string()));
                None
            }
        };
        let r = &self.run;
        if !(r.t_end >= 0.0 && r.t_end.is_finite()) {
            out.push(FieldError::new("run.t_end", "t_end must be finite and >= 0"));
        }
        if let Some(every) = r.record_every {
            if !(every > 0.0 && every.is_finite()) {
                out.push(FieldError::new("run.record_every", "record_every must be positive"));
            }
        }
        if let (Some(x0), Some(grid)) = (r.probe_x, grid.as_ref()) {
            if !(r.probe_window >= 4.0 * grid.dx) {
                out.push(FieldError::new(
                    "run.probe_window",
                    format!("probe window must span at least 4 cells (dx = {})", grid.dx),
                ));
            }
            if x0 - 0.5 * r.probe_window < grid.x_min || x0 + 0.5 * r.probe_window > grid.x_max {
                out.push(FieldError::new("run.probe_x", "probe window leaves the domain"));
            }
        }
        if let Some(s) = &self.study {
            if s.dx_refinement.is_empty() && s.n_sequence.is_empty() {
                out.push(FieldError::new(
                    "study",
                    "a study needs dx_refinement or n_sequence",
                ));
            }
            if s.dx_refinement.windows(2).any(|w| w[0] >= w[1]) {
                out.push(FieldError::new(
                    "study.dx_refinement",
                    "cell counts must be strictly increasing",
                ));
            }
            if s.dx_refinement.iter().any(|&c| c < 4) {
                out.push(FieldError::new("study.dx_refinement", "cell counts must be >= 4"));
            }
            if s.n_sequence.iter().any(|n| *n == Some(0)) {
                out.push(FieldError::new("study.n_sequence", "entries must be positive or \"inf\""));
            }
        }
        if self.m2 && self.scenario.params.alpha == 0.5 {
            out.push(FieldError::new(
                "diagnostics.m2",
                "the m2 diagnostic uses phi2, which requires alpha != 1/2; set diagnostics.m2 = false",
            ));
        }
        if let Some(grid) = grid {
            if self.scenario.params.violations().is_empty() {
                for msg in self.scenario.violations(&grid) {
                    out.push(FieldError::new("scenario", msg));
                }
            }
        }
        out
    }
}

/// Flattens nested tables into dotted keys; arrays stay values.
fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

fn parse_table(text: &str) -> Result<BTreeMap<String, Value>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(vec![FieldError::new("<config>", e.message().to_string())]))?;
    let mut out = BTreeMap::new();
    flatten("", &table, &mut out);
    Ok(out)
}

/// Splits `key=value`; the value is read as TOML, falling back to a string.
pub fn parse_override(text: &str) -> std::result::Result<(String, Value), FieldError> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| FieldError::new(text, "override must have the form key=value"))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

/// Parses a configuration document on top of the defaults (or of the preset
/// named by its `preset` key).
pub fn parse_config(text: &str) -> Result<RunConfig> {
    load(Some(text), None, &[])
}

/// Builds a configuration from an optional document, an optional preset and
/// `key=value` overrides, applied in that order of increasing precedence
/// (a `--preset` argument wins over the document's `preset` key).
pub fn load(text: Option<&str>, preset: Option<&str>, overrides: &[String]) -> Result<RunConfig> {
    let mut keys = match text {
        Some(t) => parse_table(t)?,
        None => BTreeMap::new(),
    };
    let mut errors = Vec::new();
    let preset_name = match (preset, keys.remove("preset")) {
        (Some(p), _) => Some(p.to_string()),
        (None, Some(Value::String(p))) => Some(p),
        (None, Some(_)) => {
            errors.push(FieldError::new("preset", "must be a string"));
            None
        }
        (None, None) => None,
    };
    let mut cfg = match preset_name {
        Some(name) => match presets::preset(&name) {
            Some(c) => c,
            None => {
                errors.push(FieldError::new(
                    "preset",
                    format!("unknown preset '{name}' (known: {})", presets::names().join(", ")),
                ));
                RunConfig::default()
            }
        },
        None => RunConfig::default(),
    };
    for o in overrides {
        match parse_override(o) {
            Ok((k, v)) => {
                keys.insert(k, v);
            }
            Err(e) => errors.push(e),
        }
    }
    errors.extend(apply(&mut cfg, &keys));
    errors.extend(cfg.errors());
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(errors))
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn count(v: &Value) -> Option<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Some(*i as usize),
        _ => None,
    }
}

fn numbers(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(number).collect()
}

/// `"inf"` or a positive integer.
fn reg_index(v: &Value) -> Option<Option<u32>> {
    match v {
        Value::String(s) if s == "inf" || s == "infinity" => Some(None),
        Value::Integer(i) if *i > 0 && *i <= i64::from(u32::MAX) => Some(Some(*i as u32)),
        _ => None,
    }
}

#[derive(Default)]
struct ProfileFields {
    kind: Option<String>,
    breaks: Option<Vec<f64>>,
    values: Option<Vec<f64>>,
    amplitude: Option<f64>,
    center: Option<f64>,
    width: Option<f64>,
}

impl ProfileFields {
    fn from_density(d: &DensityProfile) -> Self {
        match d {
            DensityProfile::Constant => Self {
                kind: Some("constant".into()),
                ..Self::default()
            },
            DensityProfile::Piecewise { breaks, values } => Self {
                kind: Some("piecewise".into()),
                breaks: Some(breaks.clone()),
                values: Some(values.clone()),
                ..Self::default()
            },
            DensityProfile::Bump {
                amplitude,
                center,
                width,
            } => Self {
                kind: Some("bump".into()),
                amplitude: Some(*amplitude),
                center: Some(*center),
                width: Some(*width),
                ..Self::default()
            },
        }
    }

    fn from_velocity(v: &VelocityProfile) -> Self {
        let (kind, shape) = match *v {
            VelocityProfile::Zero => ("zero", None),
            VelocityProfile::Bump {
                amplitude,
                center,
                width,
            } => ("bump", Some((amplitude, center, width))),
            VelocityProfile::Gaussian {
                amplitude,
                center,
                width,
            } => ("gaussian", Some((amplitude, center, width))),
        };
        Self {
            kind: Some(kind.into()),
            amplitude: shape.map(|s| s.0),
            center: shape.map(|s| s.1),
            width: shape.map(|s| s.2),
            ..Self::default()
        }
    }

    /// Sets one field; returns an error message for a bad value.
    fn set(&mut self, field: &str, v: &Value) -> Option<std::result::Result<(), String>> {
        let res = match field {
            "kind" => v
                .as_str()
                .map(|s| self.kind = Some(s.to_string()))
                .ok_or_else(|| "must be a string".to_string()),
            "breaks" => numbers(v)
                .map(|b| self.breaks = Some(b))
                .ok_or_else(|| "must be an array of numbers".to_string()),
            "values" => numbers(v)
                .map(|b| self.values = Some(b))
                .ok_or_else(|| "must be an array of numbers".to_string()),
            "amplitude" => number(v)
                .map(|x| self.amplitude = Some(x))
                .ok_or_else(|| "must be a number".to_string()),
            "center" => number(v)
                .map(|x| self.center = Some(x))
                .ok_or_else(|| "must be a number".to_string()),
            "width" => number(v)
                .map(|x| self.width = Some(x))
                .ok_or_else(|| "must be a number".to_string()),
            _ => return None,
        };
        Some(res)
    }

    fn shape(&self) -> std::result::Result<(f64, f64, f64), String> {
        Ok((
            self.amplitude.ok_or("amplitude is required")?,
            self.center.unwrap_or(0.0),
            self.width.ok_or("width is required")?,
        ))
    }

    fn density(&self) -> std::result::Result<DensityProfile, String> {
        match self.kind.as_deref().unwrap_or("constant") {
            "constant" => Ok(DensityProfile::Constant),
            "piecewise" => Ok(DensityProfile::Piecewise {
                breaks: self.breaks.clone().ok_or("breaks are required")?,
                values: self.values.clone().ok_or("values are required")?,
            }),
            "bump" => {
                let (amplitude, center, width) = self.shape()?;
                Ok(DensityProfile::Bump {
                    amplitude,
                    center,
                    width,
                })
            }
            other => Err(format!(
                "unknown density kind '{other}' (expected constant, piecewise, bump)"
            )),
        }
    }

    fn velocity(&self) -> std::result::Result<VelocityProfile, String> {
        match self.kind.as_deref().unwrap_or("zero") {
            "zero" => Ok(VelocityProfile::Zero),
            "bump" => {
                let (amplitude, center, width) = self.shape()?;
                Ok(VelocityProfile::Bump {
                    amplitude,
                    center,
                    width,
                })
            }
            "gaussian" => {
                let (amplitude, center, width) = self.shape()?;
                Ok(VelocityProfile::Gaussian {
                    amplitude,
                    center,
                    width,
                })
            }
            other => Err(format!(
                "unknown velocity kind '{other}' (expected zero, bump, gaussian)"
            )),
        }
    }
}

/// Applies dotted keys to `cfg`, collecting one error per bad key.
pub fn apply(cfg: &mut RunConfig, keys: &BTreeMap<String, Value>) -> Vec<FieldError> {
    let mut errors = Vec::new();
    let mut density: Option<ProfileFields> = None;
    let mut velocity: Option<ProfileFields> = None;

    for (key, v) in keys {
        let bad = |msg: &str| FieldError::new(key.clone(), msg.to_string());
        macro_rules! set {
            ($target:expr, $conv:expr, $msg:literal) => {
                match $conv(v) {
                    Some(x) => $target = x,
                    None => errors.push(bad($msg)),
                }
            };
        }
        macro_rules! parsed {
            ($target:expr, $ty:ty) => {
                match v.as_str().map(|s| s.parse::<$ty>()) {
                    Some(Ok(x)) => $target = x,
                    Some(Err(e)) => errors.push(bad(&e)),
                    None => errors.push(bad("must be a string")),
                }
            };
        }
        match key.as_str() {
            "name" => set!(cfg.name, |v: &Value| v.as_str().map(String::from), "must be a string"),
            "scenario.kind" => parsed!(cfg.scenario.kind, ScenarioKind),
            "scenario.atoms" => {
                let atoms = v.as_array().and_then(|a| {
                    a.iter()
                        .map(|pair| match numbers(pair).as_deref() {
                            Some([x, m]) => Some((*x, *m)),
                            _ => None,
                        })
                        .collect::<Option<Vec<_>>>()
                });
                set!(cfg.scenario.atoms, |_| atoms.clone(), "must be an array of [location, mass] pairs");
            }
            "scenario.mollify_tau" => set!(cfg.scenario.mollify_tau, number, "must be a number"),
            "scenario.mollify_cells" => match v {
                Value::String(s) if s == "none" => cfg.scenario.mollify_cells = None,
                _ => set!(cfg.scenario.mollify_cells, |v| number(v).map(Some), "must be a number or \"none\""),
            },
            "scenario.eps0" => set!(cfg.scenario.eps0, number, "must be a number"),
            k if k.starts_with("scenario.density.") => {
                let f = density.get_or_insert_with(|| ProfileFields::from_density(&cfg.scenario.density));
                match f.set(&k["scenario.density.".len()..], v) {
                    Some(Ok(())) => {}
                    Some(Err(m)) => errors.push(bad(&m)),
                    None => errors.push(bad("unknown key")),
                }
            }
            k if k.starts_with("scenario.velocity.") => {
                let f = velocity.get_or_insert_with(|| ProfileFields::from_velocity(&cfg.scenario.velocity));
                match f.set(&k["scenario.velocity.".len()..], v) {
                    Some(Ok(())) => {}
                    Some(Err(m)) => errors.push(bad(&m)),
                    None => errors.push(bad("unknown key")),
                }
            }
            "params.mu" => set!(cfg.scenario.params.mu, number, "must be a number"),
            "params.alpha" => set!(cfg.scenario.params.alpha, number, "must be a number"),
            "params.a" => set!(cfg.scenario.params.a, number, "must be a number"),
            "params.gamma" => set!(cfg.scenario.params.gamma, number, "must be a number"),
            "params.rho_bar" => set!(cfg.scenario.params.rho_bar, number, "must be a number"),
            "params.theta" => set!(cfg.scenario.params.theta, number, "must be a number"),
            "params.n_reg" => set!(cfg.scenario.params.n_reg, reg_index, "must be a positive integer or \"inf\""),
            "grid.x_min" => set!(cfg.grid.x_min, number, "must be a number"),
            "grid.x_max" => set!(cfg.grid.x_max, number, "must be a number"),
            "grid.cells" => set!(cfg.grid.cells, count, "must be a non-negative integer"),
            "grid.boundary" => match v.as_str() {
                Some("far-field") => cfg.grid.boundary = Boundary::FarField,
                Some("periodic") => cfg.grid.boundary = Boundary::Periodic,
                _ => errors.push(bad("must be \"far-field\" or \"periodic\"")),
            },
            "scheme.formulation" => parsed!(cfg.scheme.formulation, Formulation),
            "scheme.flux" => parsed!(cfg.scheme.flux, Flux),
            "scheme.limiter" => parsed!(cfg.scheme.limiter, Limiter),
            "scheme.cfl_safety" => set!(cfg.scheme.cfl_safety, number, "must be a number"),
            "scheme.vacuum_floor" => set!(cfg.scheme.vacuum_floor, |v| number(v).map(Some), "must be a number"),
            "scheme.max_steps" => set!(cfg.scheme.max_steps, |v| count(v).map(|c| c as u64), "must be a non-negative integer"),
            "run.t_end" => set!(cfg.run.t_end, number, "must be a number"),
            "run.record_every" => match v {
                Value::String(s) if s == "none" => cfg.run.record_every = None,
                _ => set!(cfg.run.record_every, |v| number(v).map(Some), "must be a number or \"none\""),
            },
            "run.output_dir" => set!(cfg.run.output_dir, |v: &Value| v.as_str().map(PathBuf::from), "must be a string"),
            "run.probe_x" => match v {
                Value::String(s) if s == "none" => cfg.run.probe_x = None,
                _ => set!(cfg.run.probe_x, |v| number(v).map(Some), "must be a number or \"none\""),
            },
            "run.probe_window" => set!(cfg.run.probe_window, number, "must be a number"),
            "study.dx_refinement" => {
                let s = cfg.study.get_or_insert_with(StudyConfig::default);
                set!(
                    s.dx_refinement,
                    |v: &Value| v.as_array().and_then(|a| a.iter().map(count).collect()),
                    "must be an array of cell counts"
                );
            }
            "study.n_sequence" => {
                let s = cfg.study.get_or_insert_with(StudyConfig::default);
                set!(
                    s.n_sequence,
                    |v: &Value| v.as_array().and_then(|a| a.iter().map(reg_index).collect()),
                    "must be an array of positive integers or \"inf\""
                );
            }
            "study.n_viscosity" => {
                let s = cfg.study.get_or_insert_with(StudyConfig::default);
                set!(s.n_viscosity, Value::as_bool, "must be a boolean");
            }
            "study.n_mollify" => {
                let s = cfg.study.get_or_insert_with(StudyConfig::default);
                set!(s.n_mollify, Value::as_bool, "must be a boolean");
            }
            "diagnostics.m2" => set!(cfg.m2, Value::as_bool, "must be a boolean"),
            _ => errors.push(bad("unknown key")),
        }
    }
    if let Some(f) = density {
        match f.density() {
            Ok(d) => cfg.scenario.density = d,
            Err(m) => errors.push(FieldError::new("scenario.density", m)),
        }
    }
    if let Some(f) = velocity {
        match f.velocity() {
            Ok(v) => cfg.scenario.velocity = v,
            Err(m) => errors.push(FieldError::new("scenario.velocity", m)),
        }
    }
    errors
}
