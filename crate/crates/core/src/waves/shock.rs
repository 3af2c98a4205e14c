use serde::{Deserialize, Serialize};

use super::params::WaveParameters;
use crate::error::{Error, Result};
use crate::numerics::fit::{fit_exponential, fit_power_law, linspace, logspace};
use crate::scalar::Scalar;

/// Which point of the profile sits at `ξ = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule", content = "value")]
pub enum ProfileOrigin<T> {
    /// `U(0) = 0`, the crossing of the flux inflection point.
    ZeroCrossing,
    /// `U(0) = u_m/2`.
    StarPoint,
    /// `U(0) = v` for some `u_- < v < u_m`.
    Value(T),
}

/// One evaluation of the profile with its derivatives and the distances to both end states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample<T> {
    pub u: T,
    pub u_xi: T,
    pub u_xixi: T,
    /// `U − u_-`, computed without cancellation.
    pub gap_left: T,
    /// `u_m − U`, computed without cancellation.
    pub gap_right: T,
}

/// Degenerate viscous shock `μU' = (U − u_-)(U − u_m)²` connecting `u_-` to `u_m`.
///
/// With `s = ln((U − u_-)/(u_m − U))` the travelling-wave ODE integrates in closed form to
/// `s + e^s = δ_S² ξ/μ + c₀`, so evaluation reduces to a scalar monotone root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockProfile<T> {
    params: WaveParameters<T>,
    origin: ProfileOrigin<T>,
    tolerance: T,
    /// `c₀ = s_o + e^{s_o}` at the origin value.
    offset: T,
    xi_1: T,
    xi_star: T,
}

impl<T: Scalar> ShockProfile<T> {
    pub fn build(params: WaveParameters<T>, origin: ProfileOrigin<T>, tolerance: T) -> Result<Self> {
        if !(tolerance > T::zero() && tolerance.is_finite()) {
            return Err(Error::Config(format!("profile tolerance must be positive, got {}", tolerance)));
        }
        if params.u_mid != -params.u_minus / T::lit(2.0) {
            return Err(Error::Config("profile requires the degenerate state u_m = -u_-/2".into()));
        }
        let u0 = match origin {
            ProfileOrigin::ZeroCrossing => T::zero(),
            ProfileOrigin::StarPoint => params.u_star,
            ProfileOrigin::Value(v) => {
                if !(v > params.u_minus && v < params.u_mid) {
                    return Err(Error::Config(format!(
                        "profile origin value {} must lie strictly between u_- = {} and u_m = {}",
                        v, params.u_minus, params.u_mid
                    )));
                }
                v
            }
        };
        let s0 = Self::logit(&params, u0);
        let mut p = Self { params, origin, tolerance, offset: s0 + s0.exp(), xi_1: T::zero(), xi_star: T::zero() };
        p.xi_1 = p.xi_of_s(Self::logit(&params, T::zero()));
        p.xi_star = p.xi_of_s(Self::logit(&params, params.u_star));
        Ok(p)
    }

    fn logit(params: &WaveParameters<T>, u: T) -> T {
        ((u - params.u_minus) / (params.u_mid - u)).ln()
    }

    pub fn params(&self) -> &WaveParameters<T> {
        &self.params
    }

    pub fn origin(&self) -> ProfileOrigin<T> {
        self.origin
    }

    pub fn tolerance(&self) -> T {
        self.tolerance
    }

    /// Where `U = 0`.
    pub fn xi_1(&self) -> T {
        self.xi_1
    }

    /// Where `U = u_m/2`.
    pub fn xi_star(&self) -> T {
        self.xi_star
    }

    /// Intrinsic width `μ/δ_S²` of the shock layer.
    pub fn length_scale(&self) -> T {
        self.params.mu / (self.params.delta_s * self.params.delta_s)
    }

    /// Position of the logit value `s`.
    pub fn xi_of_s(&self, s: T) -> T {
        self.length_scale() * (s + s.exp() - self.offset)
    }

    /// Position at which the profile takes the value `u ∈ (u_-, u_m)`.
    pub fn xi_of_u(&self, u: T) -> Result<T> {
        if !(u > self.params.u_minus && u < self.params.u_mid) {
            return Err(Error::Domain(format!("profile never takes the value {}", u)));
        }
        Ok(self.xi_of_s(Self::logit(&self.params, u)))
    }

    /// Logit variable at `ξ`, i.e. the root of `s + e^s = c(ξ)`.
    pub fn s_of_xi(&self, xi: T) -> Result<T> {
        self.solve_s(xi, None)
    }

    /// As [`s_of_xi`](Self::s_of_xi), starting Newton from `guess`.
    pub fn s_of_xi_from(&self, xi: T, guess: T) -> Result<T> {
        self.solve_s(xi, Some(guess))
    }

    fn solve_s(&self, xi: T, guess: Option<T>) -> Result<T> {
        self.solve_s_exp(xi, guess).map(|(s, _)| s)
    }

    /// Root `s` of `s + e^s = c(ξ)` together with `e^s`.
    fn solve_s_exp(&self, xi: T, guess: Option<T>) -> Result<(T, T)> {
        if !xi.is_finite() {
            return Err(Error::NonFinite(format!("profile queried at xi = {}", xi)));
        }
        let c = xi / self.length_scale() + self.offset;
        let one = T::one();
        let two = T::lit(2.0);
        // g(s) = s + e^s - c is convex and increasing with g' >= 1; the root never exceeds c,
        // nor ln c when c >= 1.
        let hi = || if c >= one { c.ln() } else { c };
        let mut x = match guess {
            Some(g) if g.is_finite() && g <= c => g,
            _ => hi(),
        };
        let floor = T::lit(8.0) * T::epsilon();
        for _ in 0..100 {
            let e = x.exp();
            let v = x + e - c;
            if v.abs() <= floor * (x.abs() + e + c.abs()) {
                return Ok((x, e));
            }
            let d1 = one + e;
            let den = two * d1 * d1 - v * e;
            let mut next = if den > T::zero() { x - two * v * d1 / den } else { x - v / d1 };
            if v < T::zero() && next > c {
                next = hi();
            }
            if !next.is_finite() {
                next = hi();
            }
            let done = (next - x).abs() <= floor * one.max(x.abs());
            x = next;
            if done {
                break;
            }
        }
        let e = x.exp();
        let residual = (x + e - c).abs();
        let tol = self.tolerance * one.max(c.abs());
        if residual <= tol {
            Ok((x, e))
        } else {
            Err(Error::NoConvergence { what: "profile inversion", iterations: 100, residual: residual.as_f64(), tolerance: tol.as_f64() })
        }
    }

    /// Value and derivatives at `ξ`, warm-starting the inversion from `guess`; also returns `s`.
    pub fn sample_from(&self, xi: T, guess: Option<T>) -> Result<(ProfileSample<T>, T)> {
        let (s, e) = self.solve_s_exp(xi, guess)?;
        Ok((self.sample_with_exp(s, e), s))
    }

    /// Profile and derivatives at logit value `s` (no root finding).
    pub fn sample_at_s(&self, s: T) -> ProfileSample<T> {
        self.sample_with_exp(s, s.exp())
    }

    fn sample_with_exp(&self, s: T, es: T) -> ProfileSample<T> {
        let p = &self.params;
        let d = p.delta_s;
        let one = T::one();
        // e = e^{-|s|} keeps both gaps free of overflow and cancellation.
        let e = if s >= T::zero() { one / es } else { es };
        let (big, small) = (d / (one + e), d * e / (one + e));
        let (gap_left, gap_right) = if s >= T::zero() { (big, small) } else { (small, big) };
        let u = if s < T::zero() { p.u_minus + gap_left } else { p.u_mid - gap_right };
        let u_xi = gap_left * gap_right * gap_right / p.mu;
        let u_xixi = u_xi * (gap_right * gap_right - T::lit(2.0) * gap_left * gap_right) / p.mu;
        ProfileSample { u, u_xi, u_xixi, gap_left, gap_right }
    }

    pub fn sample(&self, xi: T) -> Result<ProfileSample<T>> {
        Ok(self.sample_at_s(self.s_of_xi(xi)?))
    }

    pub fn eval(&self, xi: T) -> Result<T> {
        Ok(self.sample(xi)?.u)
    }

    pub fn eval_deriv(&self, xi: T) -> Result<T> {
        Ok(self.sample(xi)?.u_xi)
    }

    /// Right-hand side `(U − u_-)(U − u_m)²/μ` of the profile ODE as a function of the state.
    pub fn ode_rhs(&self, u: T) -> T {
        let p = &self.params;
        (u - p.u_minus) * (u - p.u_mid) * (u - p.u_mid) / p.mu
    }

    /// `|μU' − (U − u_-)(U − u_m)²|` with `U'` taken from a fourth-order central difference of
    /// the evaluated profile, so the check is independent of the closed-form derivative.
    pub fn ode_residual(&self, xi: T) -> Result<T> {
        let h = T::lit(2e-3) * self.length_scale();
        let f = |k: f64| self.eval(xi + h * T::lit(k));
        let du = (f(-2.0)? - T::lit(8.0) * f(-1.0)? + T::lit(8.0) * f(1.0)? - f(2.0)?) / (T::lit(12.0) * h);
        let s = self.sample(xi)?;
        let p = &self.params;
        Ok((p.mu * du - s.gap_left * s.gap_right * s.gap_right).abs())
    }

    /// `∫ U_ξ` over `[a, b]`, i.e. `U(b) − U(a)`, evaluated via the gaps to avoid cancellation.
    pub fn mass_between(&self, a: T, b: T) -> Result<T> {
        let (sa, sb) = (self.sample(a)?, self.sample(b)?);
        Ok(self.params.delta_s - sa.gap_left - sb.gap_right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSide {
    Left,
    Right,
}

/// Fitted decay of one profile tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailFit<T> {
    pub side: TailSide,
    /// Left: exponential rate `r` in `U − u_- ~ e^{−r|ξ|}`. Right: algebraic order `p` in
    /// `u_m − U ~ |ξ|^{−p}`.
    pub rate: T,
    pub prefactor: T,
    pub r_squared: T,
    /// `sup |U_ξξ| / (δ_S² |U_ξ|)` over the sampled window.
    pub curvature_constant: T,
    pub window: (T, T),
}

/// Fits the decay law of one tail on `window` (defaults: `[ξ₁ − 45ℓ, ξ₁ − 9ℓ]` on the left and
/// `[ξ* + 900ℓ, ξ* + 45000ℓ]` on the right, with `ℓ = μ/δ_S²`). Refuses fits with R² < 0.98.
pub fn shock_tail_bounds<T: Scalar>(
    profile: &ShockProfile<T>,
    side: TailSide,
    window: Option<(T, T)>,
    samples: usize,
) -> Result<TailFit<T>> {
    let l = profile.length_scale();
    let (a, b) = window.unwrap_or(match side {
        TailSide::Left => (profile.xi_1() - T::lit(45.0) * l, profile.xi_1() - T::lit(9.0) * l),
        TailSide::Right => (profile.xi_star() + T::lit(900.0) * l, profile.xi_star() + T::lit(45000.0) * l),
    });
    if samples < 3 || !(b > a) {
        return Err(Error::Empty(format!("tail window [{}, {}] with {} samples", a, b, samples)));
    }
    let threshold = T::lit(0.98);
    let d2 = profile.params().delta_s * profile.params().delta_s;
    let mut curvature = T::zero();
    let fit = match side {
        TailSide::Left => {
            let xs = linspace(a, b, samples);
            let mut gaps = Vec::with_capacity(samples);
            for &x in &xs {
                let s = profile.sample(x)?;
                curvature = curvature.max(s.u_xixi.abs() / (d2 * s.u_xi));
                gaps.push(s.gap_left);
            }
            let f = fit_exponential(&xs, &gaps)?;
            (f.slope, f.prefactor, f.r_squared)
        }
        TailSide::Right => {
            if !(a > T::zero()) {
                return Err(Error::Domain("right-tail window must be at positive xi".into()));
            }
            let xs = logspace(a, b, samples);
            let mut gaps = Vec::with_capacity(samples);
            for &x in &xs {
                let s = profile.sample(x)?;
                curvature = curvature.max(s.u_xixi.abs() / (d2 * s.u_xi));
                gaps.push(s.gap_right);
            }
            let f = fit_power_law(&xs, &gaps)?;
            (-f.exponent, f.prefactor, f.r_squared)
        }
    };
    if fit.2 < threshold {
        return Err(Error::FitQuality { r_squared: fit.2.as_f64(), threshold: threshold.as_f64() });
    }
    Ok(TailFit { side, rate: fit.0, prefactor: fit.1, r_squared: fit.2, curvature_constant: curvature, window: (a, b) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn profile() -> ShockProfile<f64> {
        ShockProfile::build(WaveParameters::pure_shock(-2.0, 1.0).unwrap(), ProfileOrigin::ZeroCrossing, 1e-12).unwrap()
    }

    #[test]
    fn normalisation_and_landmarks() {
        let p = profile();
        assert_eq!(p.xi_1(), 0.0);
        assert!(p.eval(0.0).unwrap().abs() < 1e-15);
        assert_relative_eq!(p.eval(p.xi_star()).unwrap(), 0.5, epsilon = 1e-13);
        assert!(p.xi_star() > p.xi_1());
        let q = ShockProfile::build(*p.params(), ProfileOrigin::StarPoint, 1e-12).unwrap();
        assert_relative_eq!(q.eval(0.0).unwrap(), 0.5, epsilon = 1e-14);
        assert_relative_eq!(q.xi_star(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn implicit_integral_closed_form() {
        // G(U) = ln((U+2)/(1-U))/9 + 1/(3(1-U)); xi = G(U) - G(0) for mu = 1
        let p = profile();
        let g = |u: f64| ((u + 2.0) / (1.0 - u)).ln() / 9.0 + 1.0 / (3.0 * (1.0 - u));
        for &u in &[-1.9, -1.0, -0.3, 0.25, 0.8, 0.99] {
            assert_relative_eq!(p.xi_of_u(u).unwrap(), g(u) - g(0.0), epsilon = 1e-13);
            assert_relative_eq!(p.eval(g(u) - g(0.0)).unwrap(), u, epsilon = 1e-13);
        }
    }

    #[test]
    fn far_right_matches_algebraic_asymptote() {
        let u = profile().eval(100.0).unwrap();
        let approx = 1.0 - 1.0 / 300.0;
        assert!(((1.0 - u) - (1.0 - approx)).abs() / (1.0 - approx) < 0.05);
    }

    #[test]
    fn extreme_arguments_stay_finite() {
        let p = profile();
        let l = p.sample(-200.0).unwrap();
        assert_eq!(l.u, -2.0);
        assert!(l.gap_left >= 0.0 && l.u_xi >= 0.0);
        let r = p.sample(1e12).unwrap();
        assert!(r.gap_right > 0.0 && r.gap_right < 1e-11);
        assert!(p.sample(f64::NAN).is_err());
    }

    #[test]
    fn bad_configuration() {
        let params = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
        assert!(ShockProfile::build(params, ProfileOrigin::ZeroCrossing, 0.0).is_err());
        assert!(ShockProfile::build(params, ProfileOrigin::Value(1.5), 1e-12).is_err());
    }

    #[test]
    fn residual_is_tiny() {
        let p = profile();
        for &xi in &[-3.0, -0.5, 0.0, 0.3, 2.0, 50.0, 4000.0] {
            assert!(p.ode_residual(xi).unwrap() < 1e-10, "xi = {xi}");
        }
    }

    #[test]
    fn tail_fits() {
        let p = profile();
        let left = shock_tail_bounds(&p, TailSide::Left, None, 200).unwrap();
        assert!((left.rate - 9.0).abs() < 0.9, "{left:?}");
        let right = shock_tail_bounds(&p, TailSide::Right, None, 200).unwrap();
        assert!((right.rate - 1.0).abs() < 0.1, "{right:?}");
        assert!(right.curvature_constant.is_finite());
        assert!(shock_tail_bounds(&p, TailSide::Right, Some((-5.0, 5.0)), 50).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let p = ShockProfile::build(WaveParameters::<f32>::pure_shock(-2.0, 1.0).unwrap(), ProfileOrigin::ZeroCrossing, 1e-5)
            .unwrap();
        assert!(p.eval(0.0).unwrap().abs() < 1e-6);
        assert!((p.eval(p.xi_star()).unwrap() - 0.5).abs() < 1e-5);
    }
}
