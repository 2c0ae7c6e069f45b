//! Single-step update kernels for both formulations.
//!
//! Both kernels work on a contiguous range of cells `[s, e)`. Padded arrays
//! use index `k = i + 2` for interior cell `i`; face `f` separates interior
//! cells `f − 1` and `f` (padded `f + 1` and `f + 2`). The flux at a face
//! reads cells `f − 2 ..= f + 1`, so cells further than [`REACH`] from any
//! non-equilibrium cell are left exactly unchanged by a full update, which
//! lets the driver restrict work to an active range.

use crate::grid::{Boundary, Grid1D};
use crate::params::Params;
use crate::sum::Sum;

use super::{Flux, Limiter, SchemeConfig, Source};

/// Stencil reach of one step, in cells.
pub(crate) const REACH: usize = 3;
const G: usize = Grid1D::GHOST;

#[derive(Debug, Default)]
pub(crate) struct Work {
    rp: Vec<f64>,
    qp: Vec<f64>,
    up: Vec<f64>,
    vp: Vec<f64>,
    phip: Vec<f64>,
    coef: Vec<f64>,
    sr: Vec<f64>,
    sq: Vec<f64>,
    fm: Vec<f64>,
    fq: Vec<f64>,
}

impl Work {
    fn ensure(&mut self, n: usize) {
        let len = n + 2 * G;
        for v in [
            &mut self.rp,
            &mut self.qp,
            &mut self.up,
            &mut self.vp,
            &mut self.phip,
            &mut self.coef,
            &mut self.sr,
            &mut self.sq,
        ] {
            if v.len() != len {
                v.resize(len, 0.0);
            }
        }
        for v in [&mut self.fm, &mut self.fq] {
            if v.len() != n + 1 {
                v.resize(n + 1, 0.0);
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct StepOutcome {
    /// Mass flux through the left and right domain boundaries (positive to
    /// the right).
    pub flux_left: f64,
    pub flux_right: f64,
    /// `dt · Σ S_ρ dx` injected by a source.
    pub source_mass: f64,
    /// Exactly accumulated `Σ (ρ_new − ρ_old) dx` over the range.
    pub mass_change: f64,
    /// First cell that fell below the floor or became non-finite.
    pub breach: Option<(usize, f64)>,
}

/// Interior index of padded cell `k`, or `None` for a far-field ghost.
#[inline]
fn interior(k: usize, n: usize, boundary: Boundary) -> Option<usize> {
    let i = k as isize - G as isize;
    if (0..n as isize).contains(&i) {
        Some(i as usize)
    } else {
        match boundary {
            Boundary::FarField => None,
            Boundary::Periodic => Some(i.rem_euclid(n as isize) as usize),
        }
    }
}

/// Limited slope from the backward difference `a` and forward difference `b`.
#[inline]
pub(crate) fn slope(limiter: Limiter, a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        return 0.0;
    }
    match limiter {
        Limiter::Constant => 0.0,
        Limiter::Minmod => {
            if a > 0.0 {
                a.min(b)
            } else {
                a.max(b)
            }
        }
        Limiter::Mc => {
            let c = 0.5 * (a + b);
            let m = (2.0 * a).abs().min((2.0 * b).abs()).min(c.abs());
            m.copysign(c)
        }
    }
}

#[inline]
fn harmonic(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}

/// Pointwise exact solution of `v' = −k (v − u)` over `dt` with `u` frozen.
#[inline]
pub fn relax(v: f64, u: f64, k: f64, dt: f64) -> f64 {
    u + (v - u) * (-k * dt).exp()
}

fn limited_slopes(limiter: Limiter, q: &[f64], out: &mut [f64], lo: usize, hi: usize) {
    for k in lo..=hi {
        out[k] = slope(limiter, q[k] - q[k - 1], q[k + 1] - q[k]);
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn primitive_step(
    grid: &Grid1D,
    p: &Params,
    cfg: &SchemeConfig,
    floor: f64,
    (rho, m): (&[f64], &[f64]),
    (rho_new, m_new): (&mut [f64], &mut [f64]),
    (s, e): (usize, usize),
    t: f64,
    dt: f64,
    source: Option<&dyn Source>,
    w: &mut Work,
) -> StepOutcome {
    let n = grid.cells;
    w.ensure(n);
    let dx = grid.dx;

    for k in s..=e + 3 {
        let (r, u) = match interior(k, n, grid.boundary) {
            Some(i) => (rho[i], m[i] / rho[i]),
            None => (p.rho_bar, 0.0),
        };
        w.rp[k] = r;
        w.up[k] = u;
        w.coef[k] = p.viscosity(r);
    }
    limited_slopes(cfg.limiter, &w.rp, &mut w.sr, s + 1, e + 2);
    limited_slopes(cfg.limiter, &w.up, &mut w.sq, s + 1, e + 2);

    for f in s..=e {
        let (l, r) = (f + 1, f + 2);
        let rl = w.rp[l] + 0.5 * w.sr[l];
        let rr = w.rp[r] - 0.5 * w.sr[r];
        let ul = w.up[l] + 0.5 * w.sq[l];
        let ur = w.up[r] - 0.5 * w.sq[r];
        let ml = rl * ul;
        let mr = rr * ur;
        let pl = p.pressure(rl);
        let pr = p.pressure(rr);
        let (fm, fq) = match cfg.flux {
            Flux::Rusanov => {
                let lam = (ul.abs() + p.sound_speed(rl)).max(ur.abs() + p.sound_speed(rr));
                (
                    0.5 * (ml + mr) - 0.5 * lam * (rr - rl),
                    0.5 * (ml * ul + pl + mr * ur + pr) - 0.5 * lam * (mr - ml),
                )
            }
            Flux::Upwind => {
                let uf = 0.5 * (ul + ur);
                let (ru, mu) = if uf >= 0.0 { (rl, ml) } else { (rr, mr) };
                (uf * ru, uf * mu + 0.5 * (pl + pr))
            }
        };
        let visc = harmonic(w.coef[l], w.coef[r]) * (w.up[r] - w.up[l]) / dx;
        w.fm[f] = fm;
        w.fq[f] = fq - visc;
    }

    let c = dt / dx;
    let mut change = Sum::default();
    let mut injected = Sum::default();
    let mut breach = None;
    for i in s..e {
        let mut r = rho[i] - c * (w.fm[i + 1] - w.fm[i]);
        let mut q = m[i] - c * (w.fq[i + 1] - w.fq[i]);
        if let Some(src) = source {
            let x = grid.center(i);
            let (sm, sq) = src.eval(x, t);
            let sr = dt * sm;
            r += sr;
            q += dt * sq;
            injected.add(sr);
        }
        if breach.is_none() && !(r >= floor && r.is_finite() && q.is_finite()) {
            breach = Some((i, r));
        }
        change.add(r - rho[i]);
        rho_new[i] = r;
        m_new[i] = q;
    }
    StepOutcome {
        flux_left: if s == 0 { w.fm[0] } else { 0.0 },
        flux_right: if e == n { w.fm[n] } else { 0.0 },
        source_mass: injected.value() * dx,
        mass_change: change.value() * dx,
        breach,
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn effective_step(
    grid: &Grid1D,
    p: &Params,
    cfg: &SchemeConfig,
    floor: f64,
    (rho, wm): (&[f64], &[f64]),
    (rho_new, w_new): (&mut [f64], &mut [f64]),
    (s, e): (usize, usize),
    t: f64,
    dt: f64,
    source: Option<&dyn Source>,
    w: &mut Work,
) -> StepOutcome {
    let n = grid.cells;
    w.ensure(n);
    let dx = grid.dx;
    let inv2dx = 0.5 / dx;
    let phi_far = p.phi1_unchecked(p.rho_bar);

    for k in s..=e + 3 {
        match interior(k, n, grid.boundary) {
            Some(i) => {
                w.rp[k] = rho[i];
                w.qp[k] = wm[i];
                w.phip[k] = p.phi1_unchecked(rho[i]);
            }
            None => {
                w.rp[k] = p.rho_bar;
                w.qp[k] = 0.0;
                w.phip[k] = phi_far;
            }
        }
    }
    for k in s + 1..=e + 2 {
        let r = w.rp[k];
        if interior(k, n, grid.boundary).is_some() {
            let d = (w.phip[k + 1] - w.phip[k - 1]) * inv2dx;
            w.up[k] = (w.qp[k] - d) / r;
            w.vp[k] = w.qp[k] / r;
        } else {
            w.up[k] = 0.0;
            w.vp[k] = 0.0;
        }
        w.coef[k] = p.viscosity(r) / r;
    }
    limited_slopes(cfg.limiter, &w.rp, &mut w.sr, s + 1, e + 2);
    limited_slopes(cfg.limiter, &w.qp, &mut w.sq, s + 1, e + 2);

    for f in s..=e {
        let (l, r) = (f + 1, f + 2);
        let vf = 0.5 * (w.vp[l] + w.vp[r]);
        let uf = 0.5 * (w.up[l] + w.up[r]);
        let drift = if vf >= 0.0 {
            vf * (w.rp[l] + 0.5 * w.sr[l])
        } else {
            vf * (w.rp[r] - 0.5 * w.sr[r])
        };
        let diffusion = harmonic(w.coef[l], w.coef[r]) * (w.rp[r] - w.rp[l]) / dx;
        w.fm[f] = drift - diffusion;
        w.fq[f] = if uf >= 0.0 {
            uf * (w.qp[l] + 0.5 * w.sq[l])
        } else {
            uf * (w.qp[r] - 0.5 * w.sq[r])
        };
    }

    let c = dt / dx;
    let mut change = Sum::default();
    let mut injected = Sum::default();
    let mut breach = None;
    for i in s..e {
        let k = i + G;
        let mut r = rho[i] - c * (w.fm[i + 1] - w.fm[i]);
        let mut q = wm[i] - c * (w.fq[i + 1] - w.fq[i]);
        if let Some(src) = source {
            let x = grid.center(i);
            let (sm, sq) = src.eval(x, t);
            let sr = dt * sm;
            r += sr;
            q += dt * sq;
            injected.add(sr);
        }
        if breach.is_none() && !(r >= floor && r.is_finite() && q.is_finite()) {
            breach = Some((i, r));
        }
        let u = w.up[k];
        let v = relax(q / r, u, p.relaxation_rate(rho[i]), dt);
        change.add(r - rho[i]);
        rho_new[i] = r;
        w_new[i] = r * v;
    }
    StepOutcome {
        flux_left: if s == 0 { w.fm[0] } else { 0.0 },
        flux_right: if e == n { w.fm[n] } else { 0.0 },
        source_mass: injected.value() * dx,
        mass_change: change.value() * dx,
        breach,
    }
}

/// Largest stable step over cells `[s, e)`; when the range does not cover
/// the grid the far-field equilibrium bound is included.
pub(crate) fn stable_dt(
    grid: &Grid1D,
    p: &Params,
    effective: bool,
    (rho, q): (&[f64], &[f64]),
    (s, e): (usize, usize),
) -> std::result::Result<f64, (usize, String)> {
    let n = grid.cells;
    let dx = grid.dx;
    let bound = |r: f64, speed: f64| {
        let adv = dx / (speed + p.sound_speed(r));
        let diff = 0.5 * dx * dx * r / p.viscosity(r);
        adv.min(diff)
    };
    let mut dt = if s == 0 && e == n {
        f64::INFINITY
    } else {
        bound(p.rho_bar, 0.0)
    };
    let phi = |j: isize| -> f64 {
        if (0..n as isize).contains(&j) {
            p.phi1_unchecked(rho[j as usize])
        } else {
            match grid.boundary {
                Boundary::FarField => p.phi1_unchecked(p.rho_bar),
                Boundary::Periodic => p.phi1_unchecked(rho[j.rem_euclid(n as isize) as usize]),
            }
        }
    };
    for i in s..e {
        let r = rho[i];
        if !(r.is_finite() && q[i].is_finite()) {
            return Err((i, "non-finite value".into()));
        }
        if r <= 0.0 {
            return Err((i, format!("vacuum guard: density {r} is not positive")));
        }
        let speed = if effective {
            let d = (phi(i as isize + 1) - phi(i as isize - 1)) * (0.5 / dx);
            ((q[i] - d) / r).abs().max((q[i] / r).abs())
        } else {
            (q[i] / r).abs()
        };
        dt = dt.min(bound(r, speed));
    }
    Ok(dt)
}
