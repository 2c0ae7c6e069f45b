//! Shared helpers for the integration tests.
#![allow(dead_code)]

use bdflow::solver::{run_with, Initial, RunOptions, SchemeConfig, Source};
use bdflow::{Boundary, Grid1D, Params, State};

/// Travelling wave `ρ = 1 + A sin(x − t)`, `u = A sin(x − t)` on the periodic
/// interval `[0, 2π]`.
#[derive(Debug, Clone, Copy)]
pub struct Wave {
    pub amp: f64,
    pub params: Params,
}

struct Point {
    rho: f64,
    rho_x: f64,
    rho_t: f64,
    rho_xx: f64,
    rho_xt: f64,
    u: f64,
    u_x: f64,
    u_t: f64,
    u_xx: f64,
}

impl Wave {
    pub fn new(params: Params) -> Self {
        Self { amp: 0.1, params }
    }

    fn point(&self, x: f64, t: f64) -> Point {
        let a = self.amp;
        let (s, c) = (x - t).sin_cos();
        Point {
            rho: 1.0 + a * s,
            rho_x: a * c,
            rho_t: -a * c,
            rho_xx: -a * s,
            rho_xt: a * s,
            u: a * s,
            u_x: a * c,
            u_t: -a * c,
            u_xx: -a * s,
        }
    }

    fn mu_prime(&self, rho: f64) -> f64 {
        let p = &self.params;
        let mut d = p.mu * p.alpha * rho.powf(p.alpha - 1.0);
        if let Some(n) = p.n_reg {
            d += p.theta / f64::from(n) * rho.powf(p.theta - 1.0);
        }
        d
    }

    pub fn rho(&self, x: f64, t: f64) -> f64 {
        self.point(x, t).rho
    }

    pub fn m(&self, x: f64, t: f64) -> f64 {
        let q = self.point(x, t);
        q.rho * q.u
    }

    pub fn state(&self, grid: &Grid1D, t: f64) -> State {
        let xs = grid.centers();
        State::new(
            xs.iter().map(|&x| self.rho(x, t)).collect(),
            xs.iter().map(|&x| self.m(x, t)).collect(),
            t,
        )
        .unwrap()
    }

    pub fn grid(cells: usize) -> Grid1D {
        Grid1D::new(0.0, 2.0 * std::f64::consts::PI, cells)
            .unwrap()
            .with_boundary(Boundary::Periodic)
    }

    fn mass_source(&self, q: &Point) -> f64 {
        q.rho_t + q.rho_x * q.u + q.rho * q.u_x
    }
}

/// Forcing of the primitive momentum equation.
pub struct PrimitiveForcing(pub Wave);

impl Source for PrimitiveForcing {
    fn eval(&self, x: f64, t: f64) -> (f64, f64) {
        let w = &self.0;
        let p = &w.params;
        let q = w.point(x, t);
        let m_t = q.rho_t * q.u + q.rho * q.u_t;
        let conv = q.rho_x * q.u * q.u + 2.0 * q.rho * q.u * q.u_x;
        let pres = p.pressure_derivative(q.rho) * q.rho_x;
        let visc = w.mu_prime(q.rho) * q.rho_x * q.u_x + p.viscosity(q.rho) * q.u_xx;
        (w.mass_source(&q), m_t + conv + pres - visc)
    }
}

/// Forcing of the effective momentum `w = ρu + (μₙ(ρ)/ρ) ρ_x`.
pub struct EffectiveForcing(pub Wave);

impl Source for EffectiveForcing {
    fn eval(&self, x: f64, t: f64) -> (f64, f64) {
        let w = &self.0;
        let p = &w.params;
        let q = w.point(x, t);
        let mu = p.viscosity(q.rho);
        let h = mu / q.rho;
        let h_rho = (w.mu_prime(q.rho) * q.rho - mu) / (q.rho * q.rho);
        let g = h * q.rho_x;
        let g_t = h_rho * q.rho_t * q.rho_x + h * q.rho_xt;
        let g_x = h_rho * q.rho_x * q.rho_x + h * q.rho_xx;
        let m = q.rho * q.u;
        let m_t = q.rho_t * q.u + q.rho * q.u_t;
        let m_x = q.rho_x * q.u + q.rho * q.u_x;
        let w_val = m + g;
        let w_t = m_t + g_t;
        let w_x = m_x + g_x;
        let k = p.relaxation_rate(q.rho);
        (w.mass_source(&q), w_t + q.u_x * w_val + q.u * w_x + k * g)
    }
}

/// L¹ errors of density and momentum at `t_end` for one resolution.
pub fn wave_errors(wave: Wave, cells: usize, cfg: &SchemeConfig, t_end: f64) -> (f64, f64) {
    let grid = Wave::grid(cells);
    let init = wave.state(&grid, 0.0);
    let source: Box<dyn Source> = match cfg.formulation {
        bdflow::Formulation::Primitive => Box::new(PrimitiveForcing(wave)),
        bdflow::Formulation::Effective => Box::new(EffectiveForcing(wave)),
    };
    let traj = run_with(
        Initial::Primitive(init),
        &grid,
        &wave.params,
        cfg,
        &RunOptions::new(t_end),
        Some(source.as_ref()),
    )
    .unwrap();
    let last = &traj.last().state;
    let xs = grid.centers();
    let e_rho: f64 = xs
        .iter()
        .zip(&last.rho)
        .map(|(&x, r)| (r - wave.rho(x, t_end)).abs())
        .sum::<f64>()
        * grid.dx;
    let e_m: f64 = xs
        .iter()
        .zip(&last.m)
        .map(|(&x, m)| (m - wave.m(x, t_end)).abs())
        .sum::<f64>()
        * grid.dx;
    (e_rho, e_m)
}

/// Cell counts giving `dx ≈ 1/128, 1/256, 1/512` on `[0, 2π]`.
pub const WAVE_CELLS: [usize; 3] = [804, 1608, 3216];

pub fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

/// `∫_a^b f` by double-exponential quadrature. Intervals with positive
/// bounds are split geometrically (ratio ≤ 2) so power laws near zero stay
/// well resolved.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let knots: Vec<f64> = if lo > 0.0 {
        let k = ((hi / lo).log2().ceil() as usize).max(1);
        (0..=k).map(|j| lo * (hi / lo).powf(j as f64 / k as f64)).collect()
    } else {
        (0..=16).map(|j| lo + (hi - lo) * j as f64 / 16.0).collect()
    };
    let total: f64 = knots
        .windows(2)
        .map(|w| {
            let mid = f(0.5 * (w[0] + w[1])).abs() * (w[1] - w[0]);
            quadrature::double_exponential::integrate(&f, w[0], w[1], 1e-15 * mid.max(1e-300)).integral
        })
        .sum();
    sign * total
}

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_space(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

/// Worst relative mismatch of `phi`, `phi1`, `phi2` (when defined) and
/// `pi_rel` against quadrature of their defining integrands.
pub fn potential_mismatch(p: &Params, densities: &[f64]) -> f64 {
    let mu = |z: f64| p.viscosity(z);
    let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1e-300);
    let mut worst: f64 = 0.0;
    for &r in densities {
        let checks = [
            (p.phi(r).unwrap() - p.phi(1.0).unwrap(), integrate(|z| mu(z) / (z * z), 1.0, r)),
            (p.phi1(r).unwrap() - p.phi1(1.0).unwrap(), integrate(|z| mu(z) / z, 1.0, r)),
        ];
        for (got, want) in checks {
            worst = worst.max(rel(got, want));
        }
        if p.alpha != 0.5 {
            let got = p.phi2(r).unwrap() - p.phi2(1.0).unwrap();
            worst = worst.max(rel(got, integrate(|z| mu(z) / z.powf(1.5), 1.0, r)));
        }
        let rb = p.rho_bar;
        let pi = r * integrate(|z| p.pressure(z) / (z * z), rb, r) - (r - rb) * p.pressure(rb) / rb;
        worst = worst.max(rel(p.pi_rel(r), pi));
    }
    worst
}
