//! Closed forms and discrete operators against independent oracles.

mod common;

use bdflow::diagnostics::{self, bd_entropy, energy, h1_phi1, jump_amplitude, l1_momenta, total_variation};
use bdflow::initdata::{
    build_scenario, heat_mollify, make_dirac_momentum, make_shock_density, DensityProfile, ScenarioKind, ScenarioSpec,
};
use bdflow::state::grad_phi1;
use bdflow::{effective_velocity, to_effective, Boundary, Grid1D, Params, State};
use common::{integrate, log_space, potential_mismatch};

fn periodic(cells: usize) -> Grid1D {
    Grid1D::new(0.0, 2.0 * std::f64::consts::PI, cells)
        .unwrap()
        .with_boundary(Boundary::Periodic)
}

fn params(mu: f64, alpha: f64, gamma: f64, n_reg: Option<u32>) -> Params {
    Params {
        mu,
        alpha,
        gamma,
        n_reg,
        ..Params::default()
    }
}

#[test]
fn potentials_match_quadrature() {
    let rhos = log_space(1e-3, 1e3, 100);
    for (alpha, gamma, n) in [(0.0, 2.0, None), (1.0, 2.0, None), (1.5, 3.0, None), (0.5, 2.0, None), (1.0, 2.0, Some(4))] {
        let worst = potential_mismatch(&params(1.0, alpha, gamma, n), &rhos);
        assert!(worst < 1e-8, "alpha={alpha} gamma={gamma} n={n:?}: {worst:e}");
    }
}

#[test]
fn potential_examples() {
    let p = params(1.0, 2.0, 2.0, None);
    let q = integrate(|z| p.viscosity(z) / (z * z), 1.0, 2.0);
    assert!((p.phi(2.0).unwrap() - p.phi(1.0).unwrap() - q).abs() < 1e-10);

    let p = params(1.0, 1.0, 2.0, None);
    let q = integrate(|z| p.viscosity(z) / z.powf(1.5), 1.0, 3.0);
    assert!((p.phi2(3.0).unwrap() - p.phi2(1.0).unwrap() - q).abs() < 1e-10);

    let p = Params::default();
    assert_eq!(p.pi_rel(0.0), p.pressure(p.rho_bar));
    let small = 1e-9;
    let q = small * integrate(|z| p.pressure(z) / (z * z), 1.0, small) - (small - 1.0) * p.pressure(1.0);
    assert!((q - p.pi_rel(0.0)).abs() < 1e-6);
    let q = 2.0 * integrate(|z| p.pressure(z) / (z * z), 1.0, 2.0) - p.pressure(1.0);
    assert!((p.pi_rel(2.0) - q).abs() < 1e-10);
}

#[test]
fn pressure_derivative_by_central_difference() {
    let p = Params::default();
    let h = 1e-6;
    let fd = (p.pressure(1.7 + h) - p.pressure(1.7 - h)) / (2.0 * h);
    assert!((fd / p.pressure_derivative(1.7) - 1.0).abs() < 1e-6);
}

/// Max-norm error of `v` for `ρ = 1 + 0.1 sin x`, `u = 0`, against `μρ^{α−2}ρ'`.
fn effective_velocity_error(alpha: f64, cells: usize) -> f64 {
    let p = params(1.0, alpha, 2.0, None);
    let grid = periodic(cells);
    let xs = grid.centers();
    let rho: Vec<f64> = xs.iter().map(|x| 1.0 + 0.1 * x.sin()).collect();
    let s = State::new(rho, vec![0.0; cells], 0.0).unwrap();
    let v = effective_velocity(&s, &grid, &p).unwrap();
    xs.iter()
        .zip(&v)
        .map(|(x, v)| {
            let r = 1.0 + 0.1 * x.sin();
            (v - p.mu * r.powf(alpha - 2.0) * 0.1 * x.cos()).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn effective_velocity_second_order() {
    for alpha in [0.0, 1.0] {
        let (c, f) = (effective_velocity_error(alpha, 200), effective_velocity_error(alpha, 400));
        assert!(c < 1e-4, "alpha={alpha}: {c:e}");
        assert!((c / f - 4.0).abs() < 0.1, "alpha={alpha}: ratio {}", c / f);
    }
}

#[test]
fn constant_states_have_trivial_effective_velocity() {
    let p = Params::default();
    let grid = Grid1D::new(-1.0, 1.0, 32).unwrap();
    let s = State::equilibrium(&grid, &p);
    assert!(effective_velocity(&s, &grid, &p).unwrap().iter().all(|&v| v == 0.0));
    let s = State::new(vec![1.0; 32], vec![0.3; 32], 0.0).unwrap();
    assert!(effective_velocity(&s, &grid, &p).unwrap().iter().all(|&v| (v - 0.3).abs() < 1e-15));
    assert_eq!(to_effective(&s, &grid, &p).unwrap().w, s.m);
}

#[test]
fn effective_momentum_difference_second_order() {
    let p = params(1.0, 1.0, 2.0, Some(4));
    let err = |cells: usize| {
        let grid = periodic(cells);
        let xs = grid.centers();
        let rho: Vec<f64> = xs.iter().map(|x| 1.0 + 0.2 * (2.0 * x).sin()).collect();
        let m: Vec<f64> = xs.iter().map(|x| 0.1 * x.cos()).collect();
        let s = State::new(rho, m, 0.0).unwrap();
        let e = to_effective(&s, &grid, &p).unwrap();
        xs.iter()
            .enumerate()
            .map(|(i, x)| {
                let r = 1.0 + 0.2 * (2.0 * x).sin();
                let want = p.viscosity(r) / r * 0.4 * (2.0 * x).cos();
                (e.w[i] - s.m[i] - want).abs()
            })
            .fold(0.0, f64::max)
    };
    let (c, f) = (err(256), err(512));
    assert!((c / f - 4.0).abs() < 0.1, "{c:e} {f:e}");
}

#[test]
fn h1_phi1_converges_for_smooth_density() {
    let p = Params::default();
    let exact = integrate(|x| (0.1 * x.cos()).powi(2), 0.0, 2.0 * std::f64::consts::PI).sqrt();
    let err = |cells| {
        let grid = periodic(cells);
        let rho: Vec<f64> = grid.centers().iter().map(|x| 1.0 + 0.1 * x.sin()).collect();
        (h1_phi1(&rho, &grid, &p) - exact).abs()
    };
    let (c, f) = (err(256), err(1024));
    assert!(f < c && f < 1e-3 * exact, "{c:e} {f:e}");
}

#[test]
fn h1_phi1_of_a_sharp_jump() {
    let p = Params::default();
    let grid = Grid1D::new(-2.0, 2.0, 400).unwrap();
    let rho = make_shock_density(1.0, 2.0, 0.0, &grid);
    let want = 1.0 / grid.dx.sqrt();
    assert!((h1_phi1(&rho, &grid, &p) / want - 1.0).abs() < 1e-12);
    assert_eq!(h1_phi1(&vec![1.3; 400], &grid, &p), 0.0);
}

#[test]
fn heat_kernel_second_moment() {
    let grid = Grid1D::new(-5.0, 5.0, 1000).unwrap();
    let xs = grid.centers();
    let f: Vec<f64> = xs.iter().map(|x| (-4.0 * x * x).exp() * 2.0 / std::f64::consts::PI.sqrt()).collect();
    let tau = 0.01;
    let g = heat_mollify(&f, tau, &grid).unwrap().values;
    let moment = |h: &[f64]| grid.dx * xs.iter().zip(h).map(|(x, v)| x * x * v).sum::<f64>();
    let mass = grid.dx * f.iter().sum::<f64>();
    assert!((moment(&g) - moment(&f) - 2.0 * tau * mass).abs() < 1e-6);
}

#[test]
fn dirac_atoms() {
    let grid = Grid1D::new(-5.0, 5.0, 2000).unwrap();
    let one = make_dirac_momentum(&[(0.0, 1.0)], 0.01, &grid).unwrap().values;
    let l1 = grid.dx * one.iter().map(|v| v.abs()).sum::<f64>();
    assert!((l1 - 1.0).abs() < 1e-10);

    let two = make_dirac_momentum(&[(-1.0, -0.5), (1.0, 0.5)], 0.005, &grid).unwrap().values;
    let total = grid.dx * two.iter().sum::<f64>();
    let l1 = grid.dx * two.iter().map(|v| v.abs()).sum::<f64>();
    assert!(total.abs() < 1e-12);
    assert!((l1 - 1.0).abs() < 1e-9);
}

#[test]
fn shock_total_variation_survives_mollification() {
    let grid = Grid1D::new(-2.0, 2.0, 800).unwrap();
    let rho = make_shock_density(1.0, 2.0, 0.0, &grid);
    assert_eq!(total_variation(&rho), 1.0);
    let smooth = heat_mollify(&rho, 1e-3, &grid).unwrap().values;
    assert!((total_variation(&smooth) - 1.0).abs() < 1e-10);
}

#[test]
fn theo1_shock_momentum_pulse() {
    let grid = Grid1D::new(-10.0, 10.0, 4000).unwrap();
    let spec = ScenarioSpec {
        kind: ScenarioKind::Theo1StrongCoupling,
        density: DensityProfile::Piecewise {
            breaks: vec![0.0, 5.0],
            values: vec![1.0, 2.0, 1.0],
        },
        mollify_tau: 1e-3,
        ..ScenarioSpec::default()
    };
    let sc = build_scenario(&spec, &grid).unwrap();
    let p = &spec.params;
    let want = -(p.phi1(2.0).unwrap() - p.phi1(1.0).unwrap());
    let xs = grid.centers();
    let pulse: f64 = grid.dx * xs.iter().zip(&sc.state.m).filter(|(x, _)| **x < 2.5).map(|(_, m)| m).sum::<f64>();
    assert!((pulse - want).abs() < 1e-10, "{pulse}");
    assert!(sc.state.m.iter().zip(&xs).filter(|(_, x)| x.abs() < 1.0).all(|(m, _)| *m <= 1e-12));
}

#[test]
fn corbis_atom_norm() {
    let grid = Grid1D::new(-5.0, 5.0, 2000).unwrap();
    let spec = ScenarioSpec {
        kind: ScenarioKind::CorbisWeakCoupling,
        atoms: vec![(0.0, 0.1)],
        mollify_tau: 1e-3,
        ..ScenarioSpec::default()
    };
    let sc = build_scenario(&spec, &grid).unwrap();
    let l1 = grid.dx * sc.state.m.iter().map(|v| v.abs()).sum::<f64>();
    assert!((l1 - 0.1).abs() < 1e-10);
    let (rhou, _) = l1_momenta(&sc.state, &grid, &spec.params).unwrap();
    assert!((rhou - 0.1).abs() < 1e-10);
}

#[test]
fn momentum_norms_against_quadrature() {
    let p = Params::default();
    let grid = Grid1D::new(-20.0, 20.0, 8000).unwrap();
    let xs = grid.centers();
    let m_of = |x: f64| 0.1 * (-x * x).exp();
    let rho: Vec<f64> = xs.iter().map(|x| 1.0 + 0.2 * (-x * x).exp()).collect();
    let s = State::new(rho, xs.iter().map(|&x| m_of(x)).collect(), 0.0).unwrap();
    let (rhou, rhov) = l1_momenta(&s, &grid, &p).unwrap();
    let want = integrate(m_of, -20.0, 20.0);
    assert!((rhou / want - 1.0).abs() < 1e-8, "{rhou} {want}");
    // ρv = m + μρ' for α = 1, which changes sign at x = 1/4.
    let mv = |x: f64| m_of(x) - 0.4 * x * (-x * x).exp();
    let want_v = integrate(|x| mv(x).abs(), -20.0, 0.25) + integrate(|x| mv(x).abs(), 0.25, 20.0);
    assert!((rhov / want_v - 1.0).abs() < 1e-4);
}

#[test]
fn entropy_of_a_velocity_plateau() {
    let p = Params::default();
    let (u0, half, w) = (0.3, 2.0, 0.2);
    let u = |x: f64| 0.5 * u0 * (((x + half) / w).tanh() - ((x - half) / w).tanh());
    for cells in [4000, 16000] {
        let grid = Grid1D::new(-20.0, 20.0, cells).unwrap();
        let m = grid.centers().iter().map(|&x| u(x)).collect();
        let s = State::new(vec![1.0; cells], m, 0.0).unwrap();
        let want = integrate(|x| 0.5 * u(x) * u(x), -20.0, 20.0);
        let got = bd_entropy(&s, &grid, &p).unwrap();
        assert!((got / want - 1.0).abs() < 1e-6);
        assert!((want / (0.5 * u0 * u0 * 2.0 * half) - 1.0).abs() < 0.1);
        assert_eq!(energy(&s, &grid, &p).unwrap(), got);
    }
}

#[test]
fn entropy_and_energy_of_a_density_perturbation() {
    let p = Params::default();
    let grid = Grid1D::new(-10.0, 10.0, 2000).unwrap();
    let rho: Vec<f64> = grid.centers().iter().map(|x| 1.0 + 0.3 * (-x * x).exp()).collect();
    let s = State::new(rho.clone(), vec![0.0; 2000], 0.0).unwrap();
    let pi = grid.dx * rho.iter().map(|&r| p.pi_rel(r)).sum::<f64>();
    assert!((energy(&s, &grid, &p).unwrap() - pi).abs() < 1e-14);
    assert!(bd_entropy(&s, &grid, &p).unwrap() > pi);
}

#[test]
fn total_variation_is_the_supremum() {
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let f: Vec<f64> = (0..100).map(|_| next()).collect();
    let tv = total_variation(&f);
    for _ in 0..200 {
        let sub: Vec<f64> = f.iter().copied().filter(|_| next() < 0.5).collect();
        assert!(total_variation(&sub) <= tv + 1e-12);
    }
    let brute: f64 = (1..100).map(|i| (f[i] - f[i - 1]).abs()).sum();
    assert!((tv - brute).abs() < 1e-12);
    assert_eq!(total_variation(&[1.0, 3.0]), 2.0);
}

#[test]
fn jump_amplitude_of_shocks() {
    let grid = Grid1D::new(-2.0, 2.0, 800).unwrap();
    let rho = make_shock_density(1.0, 2.0, 0.0, &grid);
    assert_eq!(jump_amplitude(&rho, &grid, 0.0, 0.5).unwrap(), 1.0);
    assert_eq!(jump_amplitude(&vec![1.0; 800], &grid, 0.0, 0.5).unwrap(), 0.0);
    let mut prev = 1.0;
    for tau in [1e-4, 1e-3, 1e-2] {
        let s = heat_mollify(&rho, tau, &grid).unwrap().values;
        let amp = jump_amplitude(&s, &grid, 0.0, 0.5).unwrap();
        let slope = 1.0 / (2.0 * (std::f64::consts::PI * tau).sqrt());
        assert!((amp / (slope * grid.dx) - 1.0).abs() < 0.05, "tau={tau}: {amp}");
        assert!(amp < prev);
        prev = amp;
    }
    assert!(jump_amplitude(&rho, &grid, 0.0, 2.0 * grid.dx).is_err());
}

#[test]
fn orlicz_pair_splits_near_and_far() {
    let p = Params::default();
    let grid = Grid1D::new(0.0, 4.0, 4).unwrap();
    let (near, far) = diagnostics::orlicz_pair(&[1.0, 1.2, 2.0, 1.0], &grid, &p);
    assert!((near - 0.2).abs() < 1e-12);
    assert!((far - 1.0).abs() < 1e-12);
}

#[test]
fn dirac_gradient_of_a_shock() {
    let p = Params::default();
    let grid = Grid1D::new(-1.0, 1.0, 200).unwrap();
    let rho: Vec<f64> = (0..200).map(|i| if (80..120).contains(&i) { 2.0 } else { 1.0 }).collect();
    let g = grad_phi1(&rho, &grid, &p);
    let total = grid.dx * g.iter().sum::<f64>();
    assert!(total.abs() < 1e-14);
    let left = grid.dx * g[..100].iter().sum::<f64>();
    assert!((left - 1.0).abs() < 1e-14);
}
