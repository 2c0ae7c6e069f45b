mod common;

use bdflow::initdata::{heat_mollify, make_dirac_momentum};
use bdflow::solver::relax;
use bdflow::solver::{cfl_dt, step_effective, step_primitive, Flux, SchemeConfig};
use bdflow::{effective_velocity, from_effective, to_effective, Boundary, Grid1D, Params, State};
use proptest::prelude::*;

fn params_strategy() -> impl Strategy<Value = Params> {
    (
        prop::sample::select(vec![0.0, 0.3, 0.5, 1.0, 1.5, 2.0]),
        prop::sample::select(vec![1.4, 2.0, 3.0]),
        prop::option::of(1u32..64),
        0.2f64..5.0,
    )
        .prop_map(|(alpha, gamma, n_reg, mu)| Params {
            mu,
            alpha,
            gamma,
            n_reg,
            ..Params::default()
        })
}

fn grid(cells: usize) -> Grid1D {
    Grid1D::new(-1.0, 1.0, cells).unwrap()
}

/// Rough but admissible states with far-field edges.
fn state_strategy(cells: usize) -> impl Strategy<Value = State> {
    (
        prop::collection::vec(0.3f64..3.0, cells),
        prop::collection::vec(-1.0f64..1.0, cells),
    )
        .prop_map(move |(mut rho, u)| {
            for k in 0..3 {
                rho[k] = 1.0;
                rho[cells - 1 - k] = 1.0;
            }
            let mut m: Vec<f64> = rho.iter().zip(&u).map(|(r, u)| r * u).collect();
            for k in 0..3 {
                m[k] = 0.0;
                m[cells - 1 - k] = 0.0;
            }
            State::new(rho, m, 0.0).unwrap()
        })
}

proptest! {
    #[test]
    fn potentials_differentiate_to_their_integrands(p in params_strategy(), e in -3.0f64..3.0) {
        let r = 10f64.powf(e);
        let h = 1e-5 * r;
        let fd = |f: &dyn Fn(f64) -> f64| (f(r + h) - f(r - h)) / (2.0 * h);
        let mu = p.viscosity(r);
        let close = |got: f64, want: f64| (got - want).abs() <= 1e-6 * want.abs();
        prop_assert!(close(fd(&|x| p.phi(x).unwrap()), mu / (r * r)));
        prop_assert!(close(fd(&|x| p.phi1(x).unwrap()), mu / r));
        if p.alpha != 0.5 {
            prop_assert!(close(fd(&|x| p.phi2(x).unwrap()), mu / r.powf(1.5)));
        } else {
            prop_assert!(p.phi2(r).is_err());
        }
        // d/ds Π_rel = ∫_ρ̄^s P/z² + P(s)/s − P(ρ̄)/ρ̄ = φ-like potential of P.
        let want = common::integrate(|z| p.pressure(z) / (z * z), p.rho_bar, r) + p.pressure(r) / r - p.pressure(p.rho_bar) / p.rho_bar;
        let got = fd(&|x| p.pi_rel(x));
        prop_assert!((got - want).abs() <= 1e-6 * want.abs().max(1e-6), "{got} {want}");
        prop_assert!(p.pressure(r).is_finite() && p.viscosity(r).is_finite());
    }

    #[test]
    fn constant_state_effective_velocity(rho in 0.1f64..10.0, u in -3.0f64..3.0, p in params_strategy()) {
        let g = grid(16);
        let p = Params { rho_bar: rho, ..p };
        let s = State::new(vec![rho; 16], vec![rho * u; 16], 0.0).unwrap();
        for v in effective_velocity(&s, &g, &p).unwrap() {
            prop_assert!((v - u).abs() <= 1e-15 * u.abs().max(1.0));
        }
    }

    #[test]
    fn effective_round_trip(s in state_strategy(32), p in params_strategy()) {
        let g = grid(32);
        let back = from_effective(&to_effective(&s, &g, &p).unwrap(), &g, &p).unwrap();
        for (a, b) in s.m.iter().zip(&back.m) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
        prop_assert_eq!(&back.rho, &s.rho);
    }

    #[test]
    fn mollification_is_linear_and_positive(
        f in prop::collection::vec(0.0f64..1.0, 64),
        g in prop::collection::vec(0.0f64..1.0, 64),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        tau in 1e-5f64..1e-2,
    ) {
        let grid = grid(64);
        let mf = heat_mollify(&f, tau, &grid).unwrap().values;
        let mg = heat_mollify(&g, tau, &grid).unwrap().values;
        let mix: Vec<f64> = f.iter().zip(&g).map(|(x, y)| a * x + b * y).collect();
        let mm = heat_mollify(&mix, tau, &grid).unwrap().values;
        for i in 0..64 {
            prop_assert!((mm[i] - (a * mf[i] + b * mg[i])).abs() <= 1e-12);
            prop_assert!(mf[i] >= 0.0);
        }
    }

    #[test]
    fn mollified_atoms_translate(k in 0usize..20, x0 in -0.5f64..-0.2, mass in -1.0f64..1.0) {
        let grid = Grid1D::new(-4.0, 4.0, 400).unwrap();
        let tau = 1e-3;
        let a = make_dirac_momentum(&[(x0, mass)], tau, &grid).unwrap().values;
        let b = make_dirac_momentum(&[(x0 + k as f64 * grid.dx, mass)], tau, &grid).unwrap().values;
        let peak = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..400 - k {
            prop_assert!((a[i] - b[i + k]).abs() <= 1e-12 * peak);
        }
    }

    #[test]
    fn relaxation_is_monotone(v in -5.0f64..5.0, u in -5.0f64..5.0, k in 0.0f64..1e4, dt in 0.0f64..1e-2) {
        let r = relax(v, u, k, dt);
        prop_assert!((r - u).abs() <= (v - u).abs());
        prop_assert!((r - u) * (v - u) >= 0.0);
        let later = relax(v, u, k, 2.0 * dt);
        prop_assert!((later - u).abs() <= (r - u).abs());
    }

    #[test]
    fn steps_keep_density_positive_and_mass_balanced(s in state_strategy(48), upwind in any::<bool>(), effective in any::<bool>()) {
        let g = grid(48);
        let p = Params::default();
        let cfg = SchemeConfig {
            flux: if upwind { Flux::Upwind } else { Flux::Rusanov },
            ..if effective { SchemeConfig::effective() } else { SchemeConfig::default() }
        };
        let dt = cfl_dt(&s, &g, &p, &cfg).unwrap();
        let m0: f64 = s.rho.iter().sum::<f64>() * g.dx;
        let (rho, fl, fr) = if effective {
            let e = to_effective(&s, &g, &p).unwrap();
            let out = step_effective(&e, dt, &g, &p, &cfg).unwrap();
            (out.state.rho, out.flux_left, out.flux_right)
        } else {
            let out = step_primitive(&s, dt, &g, &p, &cfg).unwrap();
            (out.state.rho, out.flux_left, out.flux_right)
        };
        prop_assert!(rho.iter().all(|&r| r > 0.0));
        let m1: f64 = rho.iter().sum::<f64>() * g.dx;
        prop_assert!(((m1 - m0) - (fl - fr) * dt).abs() <= 1e-13 * m0);
    }

    #[test]
    fn steps_commute_with_reflection(s in state_strategy(40), upwind in any::<bool>(), effective in any::<bool>()) {
        let g = grid(40);
        let p = Params::default();
        let cfg = SchemeConfig {
            flux: if upwind { Flux::Upwind } else { Flux::Rusanov },
            ..if effective { SchemeConfig::effective() } else { SchemeConfig::default() }
        };
        let mirror = |s: &State| State::new(
            s.rho.iter().rev().copied().collect(),
            s.m.iter().rev().map(|m| -m).collect(),
            s.t,
        ).unwrap();
        let step = |s: &State| -> State {
            if effective {
                let e = to_effective(s, &g, &p).unwrap();
                from_effective(&step_effective(&e, 1e-4, &g, &p, &cfg).unwrap().state, &g, &p).unwrap()
            } else {
                step_primitive(s, 1e-4, &g, &p, &cfg).unwrap().state
            }
        };
        let a = mirror(&step(&s));
        let b = step(&mirror(&s));
        for i in 0..40 {
            prop_assert!((a.rho[i] - b.rho[i]).abs() <= 1e-13);
            prop_assert!((a.m[i] - b.m[i]).abs() <= 1e-12);
        }
    }
}

#[test]
fn pi_rel_nonnegative() {
    for (gamma, rho_bar) in [(2.0, 1.0), (1.4, 0.7), (3.0, 2.5)] {
        let p = Params {
            gamma,
            rho_bar,
            ..Params::default()
        };
        for r in common::log_space(1e-3, 1e3, 1000) {
            let v = p.pi_rel(r);
            assert!(v > 0.0 || (v == 0.0 && r == rho_bar), "gamma={gamma} rho={r}: {v}");
        }
        assert_eq!(p.pi_rel(rho_bar), 0.0);
    }
}

#[test]
fn periodic_grids_reflect_too() {
    let g = Grid1D::new(0.0, 1.0, 32).unwrap().with_boundary(Boundary::Periodic);
    let p = Params::default();
    let rho: Vec<f64> = g.centers().iter().map(|x| 1.0 + 0.3 * (6.0 * x).sin().powi(2)).collect();
    let s = State::new(rho, vec![0.1; 32], 0.0).unwrap();
    let out = step_primitive(&s, 1e-4, &g, &p, &SchemeConfig::default()).unwrap();
    assert_eq!(out.flux_left, out.flux_right);
}
