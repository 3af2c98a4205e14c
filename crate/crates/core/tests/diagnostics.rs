use cwave_core::diagnostics::{
    contraction_monitor, convergence_trend, instantaneous_identity, simulation_breakdown, weighted_energy, ConvergenceRow,
};
use cwave_core::solver::{Perturbation, SchemeConfig, Simulation};
use cwave_core::waves::{ProfileOrigin, ShockProfile, WaveParameters};
use cwave_core::weight::WeightFunction;
use cwave_core::Mesh;

fn identity_residual(n: usize, u_plus: f64) -> f64 {
    let params = WaveParameters::new(-2.0, u_plus, 1.0).unwrap();
    let grid = Mesh::new(-10.0, 20.0, n).unwrap();
    let pert = Perturbation::Gaussian { amplitude: 0.05, center: 0.0, width: 1.0 };
    let mut sim = Simulation::new(params, grid, SchemeConfig::default(), ProfileOrigin::ZeroCrossing, &pert).unwrap();
    sim.advance_to(0.25).unwrap();
    instantaneous_identity(&sim, 1e-7).unwrap().0.residual.abs()
}

#[test]
fn energy_identity_residual_converges() {
    for u_plus in [1.0, 1.1] {
        let r: Vec<f64> = [300, 600, 1200].iter().map(|&n| identity_residual(n, u_plus)).collect();
        let order = (r[1] / r[2]).log2();
        assert!(order >= 1.9, "u_+ = {u_plus}: residuals {r:?}, order {order}");
    }
}

#[test]
fn breakdown_is_finite_and_gs_bound_holds() {
    let params = WaveParameters::new(-2.0, 1.2, 1.0).unwrap();
    let grid = Mesh::new(-20.0, 40.0, 1200).unwrap();
    let pert = Perturbation::RandomSmooth { amplitude: 0.05, modes: 4, width: 2.0, center: 0.0, seed: 3 };
    let sim = Simulation::new(params, grid, SchemeConfig::default(), ProfileOrigin::ZeroCrossing, &pert).unwrap();
    let b = simulation_breakdown(&sim).unwrap();
    for v in [b.e_w, b.gs, b.gr, b.gsr, b.j_good, b.j_bad, b.f_term, b.y, b.dissipation] {
        assert!(v.is_finite());
    }
    assert!(b.e_w > 0.0 && b.gs >= b.gs_lower_bound(&params));
    let verdict = contraction_monitor(&[b], &params, 0.0);
    assert!(verdict.inequality_holds && verdict.energy_monotone.is_none());
}

#[test]
fn weighted_energy_of_a_constant() {
    let params = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
    let shock = ShockProfile::build(params, ProfileOrigin::ZeroCrossing, 1e-12).unwrap();
    let wf = WeightFunction::new(params);
    let grid = Mesh::new(-5.0, 5.0, 2000).unwrap();
    let e = weighted_energy(&vec![0.0; grid.len()], &shock, &wf, 0.0, &grid).unwrap();
    assert_eq!(e, 0.0);
    let one = weighted_energy(&vec![1.0; grid.len()], &shock, &wf, 0.0, &grid).unwrap();
    assert!(one > 10.0 * wf.inf() && one < 10.0 * wf.sup());
    assert!(weighted_energy(&[1.0], &shock, &wf, 0.0, &grid).is_err());
}

fn rows(sup: &[f64]) -> Vec<ConvergenceRow<f64>> {
    sup.iter()
        .enumerate()
        .map(|(k, &s)| {
            let t = (k + 1) as f64 * 10.0;
            ConvergenceRow { t, sup_error: s, xdot: s / 10.0, x_over_t: s / 100.0 }
        })
        .collect()
}

#[test]
fn trend_verdicts() {
    let decaying: Vec<f64> = (0..50).map(|k| 0.1 / (1.0 + k as f64)).collect();
    let v = convergence_trend(&rows(&decaying), 5).unwrap();
    assert!(v.passed(0.2));
    assert!((v.final_over_peak - 0.02).abs() < 1e-12);

    let mut bumpy = decaying.clone();
    bumpy[49] = 0.09;
    assert!(!convergence_trend(&rows(&bumpy), 20).unwrap().passed(0.2));
    assert!(convergence_trend::<f64>(&[], 5).is_err());
}

#[test]
fn contraction_monitor_flags_growth() {
    let params = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
    let grid = Mesh::new(-20.0, 40.0, 600).unwrap();
    let pert = Perturbation::Gaussian { amplitude: 0.05, center: 0.0, width: 1.0 };
    let sim = Simulation::new(params, grid, SchemeConfig::default(), ProfileOrigin::ZeroCrossing, &pert).unwrap();
    let a = simulation_breakdown(&sim).unwrap();
    let mut b = a;
    b.t += 1.0;
    b.e_w *= 1.5;
    let v = contraction_monitor(&[a, b], &params, 0.1);
    assert_eq!(v.energy_monotone, Some(false));
    assert!((v.max_relative_increase - 0.5).abs() < 1e-12);
    b.e_w = a.e_w * 0.5;
    assert_eq!(contraction_monitor(&[a, b], &params, 0.0).energy_monotone, Some(true));
}
