use cwave_core::ansatz::ShiftState;
use cwave_core::waves::{classify_riemann, ApproxRarefaction, ProfileOrigin, ShockProfile, WaveParameters, WavePattern};
use cwave_core::weight::{poincare_check, WeightFunction};
use num_rational::Ratio;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn weight_bounds(u_minus in -5.0f64..-0.2, frac in 0.0f64..1.0) {
        let p = WaveParameters::pure_shock(u_minus, 1.0).unwrap();
        let um = p.u_mid;
        let u = u_minus + frac * (um - u_minus);
        let v = WeightFunction::new(p).eval(u).unwrap();
        let tol = 1e-12 * um * um;
        prop_assert!(v.w >= 15.0 / 8.0 * um * um - tol && v.w <= 7.5 * um * um + tol);
        prop_assert!(v.w1 <= tol && v.w1 >= -2.5 * um - tol);
        prop_assert!(v.w2 >= -tol && v.w2 <= 7.5 + tol);
    }

    #[test]
    fn h_sum_lower_bound(u_minus in -5.0f64..-0.2, frac in 0.0f64..1.0) {
        let p = WaveParameters::pure_shock(u_minus, 1.0).unwrap();
        let wf = WeightFunction::new(p);
        let u = u_minus + frac * (p.u_star - u_minus);
        let def = wf.h1_definition(u) + wf.h2_definition(u);
        let closed = wf.h_sum_closed_form(u);
        prop_assert!(def > 2.0 * p.u_mid.powi(4));
        prop_assert!((def - closed).abs() <= 1e-8 * closed.abs().max(p.u_mid.powi(4)));
        prop_assert!(wf.poincare_factor(u) > 1.0 / 6.0);
    }

    #[test]
    fn profile_is_increasing_and_solves_the_ode(
        u_minus in -4.0f64..-0.5,
        mu in 0.2f64..3.0,
        a in -30.0f64..30.0,
        gap in 1e-3f64..5.0,
    ) {
        let p = WaveParameters::pure_shock(u_minus, mu).unwrap();
        let s = ShockProfile::build(p, ProfileOrigin::ZeroCrossing, 1e-12).unwrap();
        let l = s.length_scale();
        let (x0, x1) = (a * l, (a + gap) * l);
        let (u0, u1) = (s.eval(x0).unwrap(), s.eval(x1).unwrap());
        prop_assert!(u0 <= u1);
        prop_assert!(u0 >= u_minus && u1 <= p.u_mid);
        let scale = p.delta_s.powi(3);
        prop_assert!(s.ode_residual(x0).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn profile_inversion_round_trips(u_minus in -4.0f64..-0.5, frac in 0.01f64..0.99) {
        let p = WaveParameters::pure_shock(u_minus, 1.0).unwrap();
        let s = ShockProfile::build(p, ProfileOrigin::ZeroCrossing, 1e-12).unwrap();
        let u = u_minus + frac * (p.u_mid - u_minus);
        let xi = s.xi_of_u(u).unwrap();
        prop_assert!((s.eval(xi).unwrap() - u).abs() <= 1e-10 * p.delta_s);
    }

    #[test]
    fn rarefaction_is_increasing(t in 0.0f64..200.0, x in -50.0f64..400.0, dx in 1e-3f64..5.0, u_plus in 1.01f64..2.0) {
        let p = WaveParameters::new(-2.0, u_plus, 1.0).unwrap();
        let r = ApproxRarefaction::build(p, 1e-12).unwrap();
        let (a, b) = (r.eval(t, x).unwrap(), r.eval(t, x + dx).unwrap());
        prop_assert!(a <= b);
        prop_assert!(a >= p.u_mid - 1e-15 && b <= u_plus + 1e-15);
    }

    #[test]
    fn degenerate_iff_tangent_on_rationals(n in -50i64..-1, d in 1i64..50, k in -3i64..3) {
        let u_minus = Ratio::new(n, d);
        let u_plus = -u_minus / Ratio::from_integer(2) + Ratio::new(k, 997);
        let got = classify_riemann(u_minus, u_plus).unwrap();
        prop_assert_eq!(got == WavePattern::DegenerateShock, k == 0);
    }

    #[test]
    fn poincare_holds_for_cubics(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let f = |y: f64| a * y + b * y * y + c * y * y * y;
        let df = |y: f64| a + 2.0 * b * y + 3.0 * c * y * y;
        let r = poincare_check(f, df, 2048).unwrap();
        prop_assert!(r.satisfied);
    }

    #[test]
    fn shift_telescopes(rates in prop::collection::vec(-1.0f64..1.0, 1..50), dt in 1e-3f64..0.5) {
        let mut s = ShiftState::default();
        let mut x = 0.0;
        for &r in &rates {
            s.advance(r, dt).unwrap();
            x += dt * r;
        }
        prop_assert_eq!(s.x, x);
        prop_assert_eq!(s.history.len(), rates.len());
        prop_assert_eq!(s.history[0].x, 0.0);
    }

    #[test]
    fn f32_profile_tracks_f64(xi in -3.0f64..30.0) {
        let p64 = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
        let p32 = WaveParameters::<f32>::pure_shock(-2.0, 1.0).unwrap();
        let s64 = ShockProfile::build(p64, ProfileOrigin::ZeroCrossing, 1e-12).unwrap();
        let s32 = ShockProfile::build(p32, ProfileOrigin::ZeroCrossing, 1e-5).unwrap();
        let (a, b) = (s64.eval(xi).unwrap(), s32.eval(xi as f32).unwrap() as f64);
        prop_assert!((a - b).abs() < 1e-5, "{} vs {}", a, b);
    }
}
