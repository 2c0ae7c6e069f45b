//! One-dimensional compressible Navier–Stokes with density-dependent
//! viscosity `μₙ(ρ) = μρ^α + ρ^θ/n` and γ-law pressure.
//!
//! Two formulations are advanced in time: the primitive unknowns `(ρ, ρu)`
//! and the effective-velocity unknowns `(ρ, ρv)` with `v = u + ∂ₓφ(ρ)`.
//! [`diagnostics`] computes the BD entropy, the classical energy, L¹
//! momentum norms with their Gronwall envelope and the regularization probes,
//! and [`harness`] drives configured runs and refinement studies.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod initdata;
pub mod params;
pub mod solver;
pub mod state;
pub mod sum;

pub use diagnostics::DiagnosticsRecord;
pub use error::{Error, FieldError, Result};
pub use grid::{Boundary, Grid1D};
pub use initdata::{build_scenario, ScenarioKind, ScenarioSpec};
pub use params::Params;
pub use solver::{run, Formulation, SchemeConfig, Status, Trajectory};
pub use state::{effective_velocity, from_effective, to_effective, EffectiveState, State};
