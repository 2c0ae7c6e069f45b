//! Physical constants, the γ-law pressure, the density-dependent viscosity and
//! the transforms built on them.
//!
//! Viscosity is `μₙ(ρ) = μ ρ^α + ρ^θ / n`; with `n_reg = None` (n = ∞) the
//! regularizing term is absent. Every transform below is the antiderivative of
//! the corresponding integrand with the *full* regularized viscosity:
//!
//! | transform | derivative            |
//! |-----------|-----------------------|
//! | `phi`     | `μₙ(ρ) / ρ²`          |
//! | `phi1`    | `μₙ(ρ) / ρ`           |
//! | `phi2`    | `μₙ(ρ) / ρ^{3/2}`     |
//!
//! Additive constants are fixed by the closed forms (`ln 1 = 0`, `ρ^0 = 1`
//! terms are kept as written); only differences and gradients are consumed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `x^e` with cheap paths for the exponents that dominate the presets.
#[inline]
pub(crate) fn pow(x: f64, e: f64) -> f64 {
    if e == 1.0 {
        x
    } else if e == 0.0 {
        1.0
    } else if e == 2.0 {
        x * x
    } else if e == 0.5 {
        x.sqrt()
    } else if e == 0.25 {
        x.sqrt().sqrt()
    } else if e == e.trunc() && e.abs() <= 16.0 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Viscosity amplitude μ > 0.
    pub mu: f64,
    /// Viscosity exponent α ≥ 0.
    pub alpha: f64,
    /// Pressure amplitude a > 0.
    pub a: f64,
    /// Adiabatic exponent γ > 1.
    pub gamma: f64,
    /// Far-field density ρ̄ > 0.
    pub rho_bar: f64,
    /// Exponent of the regularizing viscosity term, θ ∈ [0, ½).
    pub theta: f64,
    /// Regularization index n; `None` stands for n = ∞.
    pub n_reg: Option<u32>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            mu: 1.0,
            alpha: 1.0,
            a: 1.0,
            gamma: 2.0,
            rho_bar: 1.0,
            theta: 0.25,
            n_reg: None,
        }
    }
}

impl Params {
    /// Checks the parameter invariants, returning one message per violation.
    pub fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let finite = |v: f64| v.is_finite();
        if !(finite(self.mu) && self.mu > 0.0) {
            out.push(("mu", "mu must be positive".to_string()));
        }
        if !(finite(self.alpha) && self.alpha >= 0.0) {
            out.push(("alpha", "alpha must be non-negative".to_string()));
        }
        if !(finite(self.a) && self.a > 0.0) {
            out.push(("a", "a must be positive".to_string()));
        }
        if !(finite(self.gamma) && self.gamma > 1.0) {
            out.push(("gamma", "gamma must exceed 1".to_string()));
        }
        if !(finite(self.rho_bar) && self.rho_bar > 0.0) {
            out.push(("rho_bar", "rho_bar must be positive".to_string()));
        }
        if !(finite(self.theta) && (0.0..0.5).contains(&self.theta)) {
            out.push(("theta", "theta must lie in [0, 1/2)".to_string()));
        }
        if self.n_reg == Some(0) {
            out.push(("n_reg", "n_reg must be a positive integer or inf".to_string()));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().first() {
            None => Ok(()),
            Some((key, msg)) => Err(Error::Parameter(format!("{key}: {msg}"))),
        }
    }

    /// `1/n`, zero for n = ∞.
    #[inline]
    pub fn inv_n(&self) -> f64 {
        match self.n_reg {
            Some(n) if n > 0 => 1.0 / f64::from(n),
            _ => 0.0,
        }
    }

    /// Hypotheses on (α, γ) of the strong-coupling existence theorem:
    /// α > 0, α ≠ ½, γ ≥ α and γ ≥ 2α − 1 when α > ½.
    pub fn strong_coupling_regime(&self) -> bool {
        self.alpha > 0.0
            && self.alpha != 0.5
            && self.gamma >= self.alpha
            && (self.alpha <= 0.5 || self.gamma >= 2.0 * self.alpha - 1.0)
    }

    /// `P(ρ) = a ρ^γ`.
    #[inline]
    pub fn pressure(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.a * pow(rho, self.gamma)
    }

    /// `P'(ρ) = a γ ρ^{γ-1}`.
    #[inline]
    pub fn pressure_derivative(&self, rho: f64) -> f64 {
        self.a * self.gamma * pow(rho, self.gamma - 1.0)
    }

    /// `μₙ(ρ) = μ ρ^α + ρ^θ / n`.
    #[inline]
    pub fn viscosity(&self, rho: f64) -> f64 {
        let main = self.mu * pow(rho, self.alpha);
        let inv_n = self.inv_n();
        if inv_n == 0.0 {
            main
        } else {
            main + inv_n * pow(rho, self.theta)
        }
    }

    /// `√(P'(ρ))`.
    #[inline]
    pub fn sound_speed(&self, rho: f64) -> f64 {
        self.pressure_derivative(rho).sqrt()
    }

    /// Relaxation rate `P'(ρ) ρ / μₙ(ρ)` of the effective velocity toward `u`.
    #[inline]
    pub fn relaxation_rate(&self, rho: f64) -> f64 {
        self.pressure_derivative(rho) * rho / self.viscosity(rho)
    }

    /// Antiderivative of `μₙ(ρ)/ρ²`.
    pub fn phi(&self, rho: f64) -> Result<f64> {
        check_density("phi", rho)?;
        let main = if self.alpha == 1.0 {
            self.mu * rho.ln()
        } else {
            self.mu / (self.alpha - 1.0) * pow(rho, self.alpha - 1.0)
        };
        let inv_n = self.inv_n();
        let reg = if inv_n == 0.0 {
            0.0
        } else {
            // θ < ½, so θ − 1 never vanishes
            inv_n / (self.theta - 1.0) * pow(rho, self.theta - 1.0)
        };
        Ok(main + reg)
    }

    /// Antiderivative of `μₙ(ρ)/ρ`.
    pub fn phi1(&self, rho: f64) -> Result<f64> {
        check_density("phi1", rho)?;
        Ok(self.phi1_unchecked(rho))
    }

    #[inline]
    pub(crate) fn phi1_unchecked(&self, rho: f64) -> f64 {
        let main = if self.alpha == 0.0 {
            self.mu * rho.ln()
        } else {
            self.mu / self.alpha * pow(rho, self.alpha)
        };
        let inv_n = self.inv_n();
        if inv_n == 0.0 {
            main
        } else if self.theta == 0.0 {
            main + inv_n * rho.ln()
        } else {
            main + inv_n / self.theta * pow(rho, self.theta)
        }
    }

    /// Antiderivative of `μₙ(ρ)/ρ^{3/2}`; α = ½ is rejected.
    pub fn phi2(&self, rho: f64) -> Result<f64> {
        if self.alpha == 0.5 {
            return Err(Error::UnsupportedExponent {
                function: "phi2",
                alpha: self.alpha,
            });
        }
        check_density("phi2", rho)?;
        let main = self.mu / (self.alpha - 0.5) * pow(rho, self.alpha - 0.5);
        let inv_n = self.inv_n();
        let reg = if inv_n == 0.0 {
            0.0
        } else {
            inv_n / (self.theta - 0.5) * pow(rho, self.theta - 0.5)
        };
        Ok(main + reg)
    }

    /// Relative pressure potential `Π(ρ) − Π(ρ̄)` with
    /// `Π(s) = s (∫_ρ̄^s P(z)/z² dz − P(ρ̄)/ρ̄)`.
    ///
    /// For the γ-law this is `a ρ̄^γ/(γ−1) · (r^γ − 1 − γ(r − 1))`, `r = ρ/ρ̄`,
    /// evaluated without cancellation near `r = 1`.
    pub fn pi_rel(&self, rho: f64) -> f64 {
        let rho = rho.max(0.0);
        let g = self.gamma;
        let r = rho / self.rho_bar;
        let d = r - 1.0;
        let bracket = if d.abs() < 1e-4 {
            // generalized binomial series of r^γ − 1 − γ d, terms d² … d⁵
            let c2 = g * (g - 1.0) / 2.0;
            let c3 = c2 * (g - 2.0) / 3.0;
            let c4 = c3 * (g - 3.0) / 4.0;
            let c5 = c4 * (g - 4.0) / 5.0;
            d * d * (c2 + d * (c3 + d * (c4 + d * c5)))
        } else {
            (g * d.ln_1p()).exp_m1() - g * d
        };
        (self.a * pow(self.rho_bar, g) / (g - 1.0) * bracket).max(0.0)
    }
}

fn check_density(function: &'static str, rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { function, rho })
    }
}
