//! Named starting configurations.

use crate::grid::Boundary;
use crate::initdata::{DensityProfile, ScenarioKind, ScenarioSpec, VelocityProfile};
use crate::params::Params;
use crate::solver::SchemeConfig;

use super::config::{GridConfig, RunConfig, RunSection};

pub const PRESETS: [(&str, &str); 6] = [
    ("equilibrium", "constant state rho = rho_bar, u = 0"),
    ("theo1", "strong coupling: density shock 1 -> 2 -> 1 with a small effective velocity, smoothed over one cell"),
    ("corbis", "weak coupling: density plateau at rest with a momentum atom, both smoothed over one cell"),
    ("theo2", "constant viscosity, density plateau with a small effective velocity"),
    ("hoff", "constant viscosity, density plateau with a small velocity bump"),
    ("acoustic", "small density bump on a coarse grid, run long enough to follow the sound waves"),
];

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

fn plateau() -> DensityProfile {
    DensityProfile::Piecewise {
        breaks: vec![-1.0, 1.0],
        values: vec![1.0, 2.0, 1.0],
    }
}

fn small_bump() -> VelocityProfile {
    VelocityProfile::Bump {
        amplitude: 0.1,
        center: 0.0,
        width: 3.0,
    }
}

fn base(name: &str, scenario: ScenarioSpec) -> RunConfig {
    RunConfig {
        name: name.to_string(),
        scenario,
        grid: GridConfig {
            x_min: -20.0,
            x_max: 20.0,
            cells: 20480,
            boundary: Boundary::FarField,
        },
        scheme: SchemeConfig::default(),
        run: RunSection {
            output_dir: format!("out/{name}").into(),
            probe_x: Some(-1.0),
            probe_window: 0.5,
            ..RunSection::default()
        },
        study: None,
        m2: true,
    }
}

pub fn preset(name: &str) -> Option<RunConfig> {
    let constant_visc = Params {
        alpha: 0.0,
        ..Params::default()
    };
    let cfg = match name {
        "equilibrium" => {
            let mut c = base(name, ScenarioSpec::default());
            c.run.probe_x = None;
            c
        }
        "theo1" => base(
            name,
            ScenarioSpec {
                kind: ScenarioKind::Theo1StrongCoupling,
                density: plateau(),
                velocity: small_bump(),
                mollify_cells: Some(1.0),
                ..ScenarioSpec::default()
            },
        ),
        "corbis" => base(
            name,
            ScenarioSpec {
                kind: ScenarioKind::CorbisWeakCoupling,
                density: plateau(),
                atoms: vec![(0.0, 0.1)],
                mollify_cells: Some(1.0),
                ..ScenarioSpec::default()
            },
        ),
        "theo2" => base(
            name,
            ScenarioSpec {
                kind: ScenarioKind::Theo2ConstantVisc,
                density: plateau(),
                velocity: small_bump(),
                mollify_cells: Some(1.0),
                params: constant_visc,
                ..ScenarioSpec::default()
            },
        ),
        "hoff" => base(
            name,
            ScenarioSpec {
                kind: ScenarioKind::HoffL2Velocity,
                density: plateau(),
                velocity: small_bump(),
                mollify_cells: Some(1.0),
                params: constant_visc,
                ..ScenarioSpec::default()
            },
        ),
        "acoustic" => {
            let mut c = base(
                name,
                ScenarioSpec {
                    density: DensityProfile::Bump {
                        amplitude: 1e-3,
                        center: 0.0,
                        width: 2.0,
                    },
                    ..ScenarioSpec::default()
                },
            );
            c.grid.cells = 1280;
            c.run.t_end = 8.0;
            c.run.record_every = Some(0.5);
            c.run.probe_x = None;
            c
        }
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_presets_validate() {
        for name in names() {
            let cfg = preset(name).unwrap();
            assert!(cfg.errors().is_empty(), "{name}: {:?}", cfg.errors());
        }
        assert!(preset("nope").is_none());
    }
}
