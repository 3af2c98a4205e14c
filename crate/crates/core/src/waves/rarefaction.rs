use serde::Serialize;

use super::params::WaveParameters;
use crate::error::{Error, Result};
use crate::numerics::fit::{fit_power_law, PowerLawFit};
use crate::numerics::quadrature::gauss_panels;
use crate::numerics::roots::{newton_increasing, scan_max};
use crate::scalar::Scalar;

/// Half-width of the foot-point interval on which `w₀'` is not negligible (`e^{-2·25}`).
const FOOT_RANGE: f64 = 25.0;

/// Evaluation of the smoothed rarefaction at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RarefactionSample<T> {
    /// Foot point `x₀` of the characteristic through `(t, x)`.
    pub x0: T,
    /// Burgers variable `w = λ(u) = 3u²`.
    pub w: T,
    pub u: T,
    pub u_x: T,
    pub u_xx: T,
    /// `u − u_m`, without cancellation.
    pub gap_left: T,
    /// `u_+ − u`, without cancellation.
    pub gap_right: T,
}

/// Smooth rarefaction `u^R` from Burgers characteristics with `tanh` data:
/// `w_t + w w_x = 0`, `w(0,x) = (λ_+ + λ_-)/2 + (λ_+ − λ_-)/2 · tanh x`, `u = sqrt(w/3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxRarefaction<T> {
    params: WaveParameters<T>,
    tolerance: T,
    lambda_minus: T,
    lambda_plus: T,
}

impl<T: Scalar> ApproxRarefaction<T> {
    pub fn build(params: WaveParameters<T>, tolerance: T) -> Result<Self> {
        if !params.has_rarefaction() {
            return Err(Error::Config(format!(
                "rarefaction needs u_m < u_+, got u_m = {} and u_+ = {}",
                params.u_mid, params.u_plus
            )));
        }
        if !(tolerance > T::zero() && tolerance.is_finite()) {
            return Err(Error::Config(format!("rarefaction tolerance must be positive, got {}", tolerance)));
        }
        Ok(Self { params, tolerance, lambda_minus: params.lambda_minus(), lambda_plus: params.lambda_plus() })
    }

    pub fn params(&self) -> &WaveParameters<T> {
        &self.params
    }

    pub fn lambda_minus(&self) -> T {
        self.lambda_minus
    }

    pub fn lambda_plus(&self) -> T {
        self.lambda_plus
    }

    fn jump(&self) -> T {
        self.lambda_plus - self.lambda_minus
    }

    fn centre(&self) -> T {
        T::lit(0.5) * (self.lambda_plus + self.lambda_minus)
    }

    /// `w₀(z) − λ_-`, accurate for very negative `z`.
    fn lift(&self, z: T) -> T {
        let e = (-T::lit(2.0) * z.abs()).exp();
        if z >= T::zero() {
            self.jump() / (T::one() + e)
        } else {
            self.jump() * e / (T::one() + e)
        }
    }

    /// `λ_+ − w₀(z)`, accurate for very positive `z`.
    fn drop(&self, z: T) -> T {
        let e = (-T::lit(2.0) * z.abs()).exp();
        if z >= T::zero() {
            self.jump() * e / (T::one() + e)
        } else {
            self.jump() / (T::one() + e)
        }
    }

    /// Initial Burgers datum `w₀(z)`.
    pub fn w0(&self, z: T) -> T {
        if z < T::zero() {
            self.lambda_minus + self.lift(z)
        } else {
            self.lambda_plus - self.drop(z)
        }
    }

    /// `w₀'(z) = (Δ/2) sech² z`.
    pub fn w0_prime(&self, z: T) -> T {
        let e = (-T::lit(2.0) * z.abs()).exp();
        T::lit(2.0) * self.jump() * e / ((T::one() + e) * (T::one() + e))
    }

    /// `x = z + w₀(z) t`: where the characteristic from `z` is at time `t`.
    pub fn position_of_foot(&self, t: T, z: T) -> T {
        z + self.w0(z) * t
    }

    pub fn foot_point(&self, t: T, x: T) -> Result<T> {
        self.foot_point_from(t, x, None)
    }

    /// Foot point by safeguarded Newton on `z + (Δ/2) t tanh z = x − (λ_+ + λ_-) t/2`, which is
    /// the characteristic relation written in a centred variable to avoid cancellation.
    pub fn foot_point_from(&self, t: T, x: T, guess: Option<T>) -> Result<T> {
        if !(t >= T::zero()) || !x.is_finite() || !t.is_finite() {
            return Err(Error::Domain(format!("rarefaction queried at t = {}, x = {}", t, x)));
        }
        let a = T::lit(0.5) * self.jump() * t;
        let y = x - self.centre() * t;
        if a == T::zero() {
            return Ok(y);
        }
        let (lo, hi) = (y - a, y + a);
        let start = guess.unwrap_or(y / (T::one() + a)).max(lo).min(hi);
        let scale = T::one().max(y.abs()).max(a);
        newton_increasing(
            |z| {
                let th = z.tanh();
                (z + a * th - y, T::one() + a * (T::one() - th * th))
            },
            lo,
            hi,
            start,
            self.tolerance,
            scale,
            "rarefaction foot point",
        )
    }

    /// State and derivatives at time `t` on the characteristic with foot point `z`.
    pub fn sample_at_foot(&self, t: T, z: T) -> Result<RarefactionSample<T>> {
        let three = T::lit(3.0);
        let lift = self.lift(z);
        let drop = self.drop(z);
        let w = if z < T::zero() { self.lambda_minus + lift } else { self.lambda_plus - drop };
        if !(w > T::zero()) {
            return Err(Error::Domain(format!("Burgers variable w = {} not positive", w)));
        }
        let u = (w / three).sqrt();
        let g = self.w0_prime(z);
        let dg = -T::lit(2.0) * z.tanh() * g;
        let jac = T::one() + g * t;
        let w_x = g / jac;
        let w_xx = dg / (jac * jac * jac);
        let six_u = T::lit(6.0) * u;
        let u_x = w_x / six_u;
        let u_xx = w_xx / six_u - w_x * w_x / (T::lit(36.0) * u * u * u);
        Ok(RarefactionSample {
            x0: z,
            w,
            u,
            u_x,
            u_xx,
            gap_left: lift / (three * (u + self.params.u_mid)),
            gap_right: drop / (three * (u + self.params.u_plus)),
        })
    }

    pub fn sample(&self, t: T, x: T) -> Result<RarefactionSample<T>> {
        self.sample_at_foot(t, self.foot_point(t, x)?)
    }

    /// As [`sample`](Self::sample), warm-starting the foot-point solve at `guess`.
    pub fn sample_from(&self, t: T, x: T, guess: T) -> Result<RarefactionSample<T>> {
        self.sample_at_foot(t, self.foot_point_from(t, x, Some(guess))?)
    }

    pub fn eval(&self, t: T, x: T) -> Result<T> {
        Ok(self.sample(t, x)?.u)
    }

    pub fn eval_x(&self, t: T, x: T) -> Result<T> {
        Ok(self.sample(t, x)?.u_x)
    }

    pub fn eval_xx(&self, t: T, x: T) -> Result<T> {
        Ok(self.sample(t, x)?.u_xx)
    }

    /// `‖∂ₓ^k u^R(t)‖_{L^p}` for `k ∈ {1, 2}`, integrating in the foot-point variable where
    /// `dx = (1 + w₀'(z) t) dz`. `p = ∞` is a maximisation.
    fn derivative_norm(&self, t: T, p: T, order: u8) -> Result<T> {
        let pick = |z: T| -> T {
            match self.sample_at_foot(t, z) {
                Ok(s) if order == 1 => s.u_x.abs(),
                Ok(s) => s.u_xx.abs(),
                Err(_) => T::nan(),
            }
        };
        let range = T::lit(FOOT_RANGE);
        let value = if p.is_infinite() {
            scan_max(pick, -range, range, 4001).1
        } else {
            let integral = gauss_panels(
                |z: T| {
                    let jac = T::one() + self.w0_prime(z) * t;
                    pick(z).powf(p) * jac
                },
                -range,
                range,
                400,
            );
            integral.powf(T::one() / p)
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFinite(format!("rarefaction derivative norm at t = {}", t)))
        }
    }

    pub fn ux_norm(&self, t: T, p: T) -> Result<T> {
        self.derivative_norm(t, p, 1)
    }

    pub fn uxx_norm(&self, t: T, p: T) -> Result<T> {
        self.derivative_norm(t, p, 2)
    }
}

/// Self-similar fan `u^r(x/t)` between `u_m` and `u_+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactRarefaction<T> {
    params: WaveParameters<T>,
}

impl<T: Scalar> ExactRarefaction<T> {
    pub fn new(params: WaveParameters<T>) -> Self {
        Self { params }
    }

    pub fn eval(&self, t: T, x: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::Domain(format!("exact fan needs t > 0, got {}", t)));
        }
        Ok(self.eval_ratio(x / t))
    }

    /// Fan value at the similarity variable `y = x/t`.
    pub fn eval_ratio(&self, y: T) -> T {
        let w = y.max(self.params.lambda_minus()).min(self.params.lambda_plus());
        (w / T::lit(3.0)).sqrt()
    }
}

/// `sup_x |u^R(t, x) − u^r(x/t)|`, parametrised by the foot point so both fan edges are
/// resolved at any `t`.
pub fn approx_exact_sup_gap<T: Scalar>(r: &ApproxRarefaction<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("fan comparison needs t > 0, got {}", t)));
    }
    let three = T::lit(3.0);
    let (lm, lp) = (r.lambda_minus(), r.lambda_plus());
    let um = r.params().u_mid;
    let gap = |z: T| -> T {
        let lift = r.lift(z);
        let u_r = ((lm + lift) / three).sqrt();
        let theta = (lift + z / t).max(T::zero()).min(lp - lm);
        let u_f = ((lm + theta) / three).sqrt();
        (lift / (three * (u_r + um)) - theta / (three * (u_f + um))).abs()
    };
    let range = T::lit(40.0);
    Ok(scan_max(gap, -range, range, 16001).1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow<T> {
    pub t: T,
    pub p: T,
    pub ux_norm: T,
    pub uxx_norm: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFitRow<T> {
    pub p: T,
    pub ux: PowerLawFit<T>,
    pub uxx: PowerLawFit<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport<T> {
    pub rows: Vec<DecayRow<T>>,
    pub fits: Vec<DecayFitRow<T>>,
}

/// `L^p` norms of `u^R_x` and `u^R_xx` over `times` with log–log fitted exponents per `p`.
pub fn rarefaction_decay_report<T: Scalar>(r: &ApproxRarefaction<T>, times: &[T], p_values: &[T]) -> Result<DecayReport<T>> {
    if times.is_empty() || p_values.is_empty() {
        return Err(Error::Empty("decay report needs times and exponents".into()));
    }
    if let Some(t) = times.iter().find(|&&t| !(t >= T::one())) {
        return Err(Error::Domain(format!("decay report times must be >= 1, got {}", t)));
    }
    if let Some(p) = p_values.iter().find(|&&p| !(p >= T::one())) {
        return Err(Error::Domain(format!("norm exponent must be >= 1, got {}", p)));
    }
    let mut rows = Vec::new();
    let mut fits = Vec::new();
    for &p in p_values {
        let mut a = Vec::with_capacity(times.len());
        let mut b = Vec::with_capacity(times.len());
        for &t in times {
            let row = DecayRow { t, p, ux_norm: r.ux_norm(t, p)?, uxx_norm: r.uxx_norm(t, p)? };
            a.push(row.ux_norm);
            b.push(row.uxx_norm);
            rows.push(row);
        }
        if times.len() >= 2 {
            fits.push(DecayFitRow { p, ux: fit_power_law(times, &a)?, uxx: fit_power_law(times, &b)? });
        }
    }
    Ok(DecayReport { rows, fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rare() -> ApproxRarefaction<f64> {
        ApproxRarefaction::build(WaveParameters::new(-2.0, 1.2, 1.0).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn initial_data() {
        let r = rare();
        let s = r.sample(0.0, 0.0).unwrap();
        assert_relative_eq!(s.w, (3.0 + 4.32) / 2.0, epsilon = 1e-14);
        assert_relative_eq!(s.u, ((3.0 + 4.32) / 6.0f64).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(r.eval(0.0, 60.0).unwrap(), 1.2, epsilon = 1e-15);
        assert_relative_eq!(r.eval(0.0, -60.0).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn characteristic_relation_holds() {
        let r = rare();
        for &(t, x) in &[(1.0, 3.5), (10.0, 31.0), (1e3, 3500.0), (1e4, 43000.0), (1e4, -10.0)] {
            let z = r.foot_point(t, x).unwrap();
            let resid = (x - r.position_of_foot(t, z)).abs();
            assert!(resid <= 1e-12 * x.abs().max(1.0).max(0.66 * t), "t={t} x={x} resid={resid}");
        }
    }

    #[test]
    fn left_edge_is_exponentially_close() {
        let r = rare();
        let t = 1e3;
        let s = r.sample(t, 3.0 * t - 20.0).unwrap();
        // foot point z ≈ −20, so u^R − u_m ≈ (λ_+ − λ_-) e^{2z} / (6 u_m)
        let expect = (4.32 - 3.0) / 6.0 * (-40.0f64).exp();
        assert_relative_eq!(s.gap_left, expect, max_relative = 1e-6);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let r = rare();
        let (t, x, h) = (5.0, 18.0, 1e-4);
        let s = r.sample(t, x).unwrap();
        let fd1 = (r.eval(t, x + h).unwrap() - r.eval(t, x - h).unwrap()) / (2.0 * h);
        let fd2 = (r.eval_x(t, x + h).unwrap() - r.eval_x(t, x - h).unwrap()) / (2.0 * h);
        assert_relative_eq!(s.u_x, fd1, max_relative = 1e-7);
        assert_relative_eq!(s.u_xx, fd2, max_relative = 1e-6);
    }

    #[test]
    fn l1_norm_is_total_variation() {
        let r = rare();
        for &t in &[1.0, 10.0, 1e3, 1e4] {
            assert_relative_eq!(r.ux_norm(t, 1.0).unwrap(), 0.2, epsilon = 1e-10);
        }
    }

    #[test]
    fn exact_fan_values() {
        let f = ExactRarefaction::new(WaveParameters::new(-2.0, 1.2, 1.0).unwrap());
        let t = 7.0;
        assert_relative_eq!(f.eval(t, 3.0 * t).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.eval(t, 4.32 * t).unwrap(), 1.2, epsilon = 1e-15);
        assert_relative_eq!(f.eval(t, 3.66 * t).unwrap(), (7.32f64 / 6.0).sqrt(), epsilon = 1e-15);
        assert!(f.eval(0.0, 1.0).is_err());
    }

    #[test]
    fn errors() {
        let shock_only = WaveParameters::pure_shock(-2.0, 1.0).unwrap();
        assert!(ApproxRarefaction::build(shock_only, 1e-12).is_err());
        assert!(rare().sample(-1.0, 0.0).is_err());
        assert!(rarefaction_decay_report(&rare(), &[], &[1.0]).is_err());
        assert!(rarefaction_decay_report(&rare(), &[0.5], &[1.0]).is_err());
    }
}
