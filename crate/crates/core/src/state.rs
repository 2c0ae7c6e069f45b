//! Cell-averaged fields and the discrete effective-velocity map.
//!
//! The effective velocity is `v = u + ∂ₓφ(ρ)` with `φ' = μₙ(ρ)/ρ²`. Since
//! `ρ ∂ₓφ(ρ) = ∂ₓφ₁(ρ)`, the discrete map is written on momenta:
//!
//! ```text
//! w = ρv = m + D φ₁(ρ),     v = w / ρ
//! ```
//!
//! with `D` the shared centred gradient of [`Grid1D::gradient`]. The
//! identities `w − m = D φ₁(ρ)` and `from_effective ∘ to_effective = id` then
//! hold to rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::params::Params;

/// Density and momentum `m = ρu` per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub rho: Vec<f64>,
    pub m: Vec<f64>,
    pub t: f64,
}

/// Density and effective momentum `w = ρv` per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveState {
    pub rho: Vec<f64>,
    pub w: Vec<f64>,
    pub t: f64,
}

/// Rejects non-finite values and densities that are not strictly positive.
pub fn check_fields(rho: &[f64], other: &[f64]) -> Result<()> {
    if rho.len() != other.len() {
        return Err(Error::State {
            index: rho.len().min(other.len()),
            reason: format!("field lengths differ ({} vs {})", rho.len(), other.len()),
        });
    }
    for (i, (&r, &q)) in rho.iter().zip(other).enumerate() {
        if !(r.is_finite() && q.is_finite()) {
            return Err(Error::State {
                index: i,
                reason: "non-finite value".into(),
            });
        }
        if r <= 0.0 {
            return Err(Error::State {
                index: i,
                reason: format!("vacuum guard: density {r} is not positive"),
            });
        }
    }
    Ok(())
}

impl State {
    pub fn new(rho: Vec<f64>, m: Vec<f64>, t: f64) -> Result<Self> {
        check_fields(&rho, &m)?;
        Ok(Self { rho, m, t })
    }

    /// The far-field equilibrium `(ρ̄, 0)`.
    pub fn equilibrium(grid: &Grid1D, params: &Params) -> Self {
        Self {
            rho: vec![params.rho_bar; grid.cells],
            m: vec![0.0; grid.cells],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        check_fields(&self.rho, &self.m)
    }

    pub fn velocity(&self) -> Vec<f64> {
        self.m.iter().zip(&self.rho).map(|(m, r)| m / r).collect()
    }
}

impl EffectiveState {
    pub fn check(&self) -> Result<()> {
        check_fields(&self.rho, &self.w)
    }
}

/// `D φ₁(ρ)` with far-field ghosts at `φ₁(ρ̄)`.
pub fn grad_phi1(rho: &[f64], grid: &Grid1D, params: &Params) -> Vec<f64> {
    let phi1: Vec<f64> = rho.iter().map(|&r| params.phi1_unchecked(r)).collect();
    grid.gradient(&phi1, params.phi1_unchecked(params.rho_bar))
}

/// `w = m + D φ₁(ρ)`.
pub fn to_effective(s: &State, grid: &Grid1D, params: &Params) -> Result<EffectiveState> {
    s.check()?;
    let g = grad_phi1(&s.rho, grid, params);
    let w = s.m.iter().zip(&g).map(|(m, d)| m + d).collect();
    Ok(EffectiveState {
        rho: s.rho.clone(),
        w,
        t: s.t,
    })
}

/// `m = w − D φ₁(ρ)`.
pub fn from_effective(e: &EffectiveState, grid: &Grid1D, params: &Params) -> Result<State> {
    e.check()?;
    let g = grad_phi1(&e.rho, grid, params);
    let m = e.w.iter().zip(&g).map(|(w, d)| w - d).collect();
    Ok(State {
        rho: e.rho.clone(),
        m,
        t: e.t,
    })
}

/// Per-cell effective velocity `v = u + ∂ₓφ(ρ)`, discretized as
/// `(m + D φ₁(ρ)) / ρ`.
pub fn effective_velocity(s: &State, grid: &Grid1D, params: &Params) -> Result<Vec<f64>> {
    let e = to_effective(s, grid, params)?;
    Ok(e.w.iter().zip(&e.rho).map(|(w, r)| w / r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    fn smooth_state(grid: &Grid1D) -> State {
        let rho = grid.centers().iter().map(|x| 1.0 + 0.1 * x.sin()).collect();
        let m = grid.centers().iter().map(|x| 0.05 * x.cos()).collect();
        State::new(rho, m, 0.0).unwrap()
    }

    #[test]
    fn constant_states() {
        let grid = Grid1D::new(-5.0, 5.0, 64).unwrap();
        let params = Params::default();
        let eq = State::equilibrium(&grid, &params);
        assert!(effective_velocity(&eq, &grid, &params)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));

        let periodic = grid.with_boundary(Boundary::Periodic);
        let moving = State::new(vec![1.3; 64], vec![1.3 * 0.7; 64], 0.0).unwrap();
        let v = effective_velocity(&moving, &periodic, &params).unwrap();
        let u = moving.velocity();
        assert_eq!(v, u);
        let e = to_effective(&moving, &periodic, &params).unwrap();
        assert_eq!(e.w, moving.m);
    }

    #[test]
    fn round_trip_shares_gradient() {
        let grid = Grid1D::new(-3.0, 3.0, 200).unwrap();
        let params = Params {
            alpha: 0.7,
            n_reg: Some(16),
            ..Params::default()
        };
        let s = smooth_state(&grid);
        let back = from_effective(&to_effective(&s, &grid, &params).unwrap(), &grid, &params).unwrap();
        let err = s
            .m
            .iter()
            .zip(&back.m)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn vacuum_guard() {
        let grid = Grid1D::new(0.0, 1.0, 4).unwrap();
        let params = Params::default();
        let s = State {
            rho: vec![1.0, 0.0, 1.0, 1.0],
            m: vec![0.0; 4],
            t: 0.0,
        };
        assert!(matches!(
            effective_velocity(&s, &grid, &params),
            Err(Error::State { index: 1, .. })
        ));
        assert!(State::new(vec![1.0, f64::NAN], vec![0.0, 0.0], 0.0).is_err());
    }
}
