use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How ghost cells are filled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Ghost cells hold the far-field state (ρ̄, u = 0).
    #[default]
    FarField,
    /// Ghost cells wrap around the domain.
    Periodic,
}

/// Uniform cell-centred mesh on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
    pub dx: f64,
    /// Ghost cells per side.
    pub ghost: usize,
    pub boundary: Boundary,
}

impl Grid1D {
    pub const GHOST: usize = 2;

    pub fn new(x_min: f64, x_max: f64, cells: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return Err(Error::Parameter(format!(
                "grid bounds must satisfy x_min < x_max (got {x_min}, {x_max})"
            )));
        }
        if cells < 4 {
            return Err(Error::Parameter(format!(
                "grid needs at least 4 cells (got {cells})"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            cells,
            dx: (x_max - x_min) / cells as f64,
            ghost: Self::GHOST,
            boundary: Boundary::FarField,
        })
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Centre of interior cell `i`.
    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|i| self.center(i)).collect()
    }

    /// Index of the cell containing `x`, if inside the domain.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        if x < self.x_min || x > self.x_max {
            return None;
        }
        let i = ((x - self.x_min) / self.dx).floor() as usize;
        Some(i.min(self.cells - 1))
    }

    /// Same domain and boundary with a different cell count.
    pub fn resized(&self, cells: usize) -> Result<Self> {
        Ok(Self::new(self.x_min, self.x_max, cells)?.with_boundary(self.boundary))
    }

    /// Copies `interior` into `out` with `ghost` cells on each side, using
    /// `far` for far-field ghosts.
    pub(crate) fn pad_into(&self, interior: &[f64], far: f64, out: &mut Vec<f64>) {
        let g = self.ghost;
        let n = interior.len();
        out.clear();
        out.reserve(n + 2 * g);
        match self.boundary {
            Boundary::FarField => {
                out.extend(std::iter::repeat(far).take(g));
                out.extend_from_slice(interior);
                out.extend(std::iter::repeat(far).take(g));
            }
            Boundary::Periodic => {
                out.extend_from_slice(&interior[n - g..]);
                out.extend_from_slice(interior);
                out.extend_from_slice(&interior[..g]);
            }
        }
    }

    /// The shared discrete gradient: second-order centred differences of
    /// `values` on interior cells, with ghost neighbours filled from `far`
    /// (far field) or by wrapping (periodic).
    ///
    /// Every identity that couples the momentum and the effective momentum is
    /// written with this operator, so those identities hold to rounding.
    pub fn gradient(&self, values: &[f64], far: f64) -> Vec<f64> {
        let n = values.len();
        let inv = 0.5 / self.dx;
        let at = |j: isize| -> f64 {
            if j < 0 {
                match self.boundary {
                    Boundary::FarField => far,
                    Boundary::Periodic => values[(j + n as isize) as usize],
                }
            } else if j as usize >= n {
                match self.boundary {
                    Boundary::FarField => far,
                    Boundary::Periodic => values[j as usize - n],
                }
            } else {
                values[j as usize]
            }
        };
        (0..n as isize)
            .map(|i| (at(i + 1) - at(i - 1)) * inv)
            .collect()
    }
}
