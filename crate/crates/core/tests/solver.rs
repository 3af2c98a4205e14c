use cwave_core::diagnostics::simulation_convergence;
use cwave_core::solver::{evolve_forced, interior_mass, Limiter, Perturbation, SchemeConfig, Simulation};
use cwave_core::waves::{ProfileOrigin, WaveParameters};
use cwave_core::grid::Grid;
use cwave_core::{Error, Mesh};

const MU: f64 = 1.0;
const SIGMA: f64 = 3.0;

/// Smooth travelling front with the forcing that makes it an exact solution of
/// `u_t + (u³ − σu)_ξ = μu_ξξ + S`.
fn exact(t: f64, x: f64) -> f64 {
    0.5 + 0.3 * (x - 0.4 * t).tanh()
}

fn forcing(t: f64, x: f64) -> f64 {
    let th = (x - 0.4 * t).tanh();
    let sech2 = 1.0 - th * th;
    let u = exact(t, x);
    let ux = 0.3 * sech2;
    let uxx = -0.6 * th * sech2;
    -0.4 * ux + (3.0 * u * u - SIGMA) * ux - MU * uxx
}

fn manufactured_error(n: usize, limiter: Limiter) -> f64 {
    let grid = Mesh::new(-8.0, 8.0, n).unwrap();
    let end = 0.5;
    let u = evolve_forced(&grid, MU, SIGMA, limiter, 0.4, end, &|x| exact(0.0, x), &|t| (exact(t, -8.0), exact(t, 8.0)), &forcing)
        .unwrap();
    u.iter().zip(&grid.nodes).map(|(v, &x)| (v - exact(end, x)).abs()).fold(0.0, f64::max)
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    for limiter in [Limiter::VanLeer, Limiter::Minmod] {
        let e: Vec<f64> = [80, 160, 320].iter().map(|&n| manufactured_error(n, limiter)).collect();
        let order = (e[1] / e[2]).log2();
        assert!(order > 1.8, "{limiter:?}: errors {e:?}, order {order}");
    }
}

fn steady(n: usize, pert: Perturbation<f64>) -> Simulation<f64> {
    let params = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
    let grid = Mesh::new(-30.0, 60.0, n).unwrap();
    let scheme = SchemeConfig { end_time: 1.0, output_interval: 0.5, ..SchemeConfig::default() };
    Simulation::new(params, grid, scheme, ProfileOrigin::ZeroCrossing, &pert).unwrap()
}

#[test]
fn exact_profile_is_nearly_steady() {
    let drift = |n: usize| {
        let mut sim = steady(n, Perturbation::Zero);
        sim.advance_to(1.0).unwrap();
        simulation_convergence(&sim).unwrap().sup_error
    };
    let coarse = drift(900);
    let fine = drift(1800);
    assert!(coarse < 0.05, "{coarse}");
    assert!(fine < coarse / 3.0, "{coarse} -> {fine}");
}

#[test]
fn mass_changes_only_through_the_boundaries() {
    let mut sim = steady(900, Perturbation::Gaussian { amplitude: 0.1, center: 0.0, width: 1.0 });
    let h = sim.grid.h;
    let mut expected = interior_mass(&sim.state.u, h);
    for _ in 0..200 {
        let rep = sim.step().unwrap();
        expected += rep.interior_transfer;
    }
    let actual = interior_mass(&sim.state.u, h);
    assert!((actual - expected).abs() < 1e-11 * expected.abs().max(1.0), "{actual} vs {expected}");
}

#[test]
fn phi_is_consistent_with_u() {
    let mut sim = steady(600, Perturbation::Gaussian { amplitude: 0.05, center: 1.0, width: 2.0 });
    sim.advance_to(0.3).unwrap();
    assert!((sim.state.t - 0.3).abs() < 1e-12);
    for (i, a) in sim.state.ansatz.iter().enumerate() {
        assert!((sim.state.u[i] - a.value - sim.state.phi[i]).abs() < 1e-14);
    }
    assert_eq!(sim.state.shift.history.len(), sim.state.steps);
}

#[test]
fn uncoupled_shift_stays_at_zero() {
    let params = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
    let grid = Mesh::new(-30.0, 60.0, 600).unwrap();
    let scheme = SchemeConfig { couple_shift: false, ..SchemeConfig::default() };
    let pert = Perturbation::Gaussian { amplitude: 0.1, center: 0.0, width: 1.0 };
    let mut sim = Simulation::new(params, grid, scheme, ProfileOrigin::ZeroCrossing, &pert).unwrap();
    sim.advance_to(0.2).unwrap();
    assert_eq!(sim.state.shift.x, 0.0);
}

#[test]
fn blow_up_is_reported() {
    let params = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
    let grid = Mesh::new(-30.0, 60.0, 600).unwrap();
    let scheme = SchemeConfig { blowup_threshold: 2.05, ..SchemeConfig::default() };
    let pert = Perturbation::Gaussian { amplitude: -0.2, center: -10.0, width: 1.0 };
    let mut sim = Simulation::new(params, grid, scheme, ProfileOrigin::ZeroCrossing, &pert).unwrap();
    assert!(matches!(sim.step(), Err(Error::BlowUp { .. })));
}

#[test]
fn oversized_fixed_step_is_rejected() {
    let params = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
    let grid = Mesh::new(-30.0, 60.0, 600).unwrap();
    let scheme = SchemeConfig { fixed_dt: Some(1.0), ..SchemeConfig::default() };
    let res = Simulation::new(params, grid, scheme, ProfileOrigin::ZeroCrossing, &Perturbation::Zero).and_then(|mut s| s.step().map(|_| ()));
    assert!(matches!(res, Err(Error::Cfl { .. }) | Err(Error::Config(_))));
}

#[test]
fn f32_simulation_runs() {
    let params = WaveParameters::<f32>::pure_shock(-2.0, 1.0).unwrap();
    let grid = Grid::<f32>::new(-30.0, 60.0, 900).unwrap();
    let scheme = SchemeConfig::<f32> { tolerance: 1e-5, ..SchemeConfig::default() };
    let pert = Perturbation::Gaussian { amplitude: 0.1, center: 0.0, width: 1.0 };
    let mut sim = Simulation::new(params, grid, scheme, ProfileOrigin::ZeroCrossing, &pert).unwrap();
    sim.advance_to(0.5).unwrap();
    assert!(sim.state.u.iter().all(|v| v.is_finite()));
    assert!(simulation_convergence(&sim).unwrap().sup_error < 0.1);
}
