//! The piecewise weight `w(u^S)` of the weighted relative-entropy method, the algebraic
//! quantities `H1`, `H2` that make the shock part of the energy coercive, and the weighted
//! Poincaré inequality on `[0, 1]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quadrature::simpson_with_bound;
use crate::scalar::Scalar;
use crate::waves::WaveParameters;

/// `w` and its first two derivatives with respect to the state value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightValues<T> {
    pub w: T,
    pub w1: T,
    pub w2: T,
}

/// `w(u) = (5/2)u_m(u_m − u)` for `u < 0`, `(5/(2u_m²))(u_m − u)(4u³ + u_m³)` for
/// `0 ≤ u < u_m/2`, and `(15/8)u_m²` above. The pieces join in `C²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightFunction<T> {
    params: WaveParameters<T>,
}

impl<T: Scalar> WeightFunction<T> {
    pub fn new(params: WaveParameters<T>) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &WaveParameters<T> {
        &self.params
    }

    /// Branch valid for `u < 0`.
    pub fn left_branch(&self, u: T) -> WeightValues<T> {
        let m = self.params.u_mid;
        let k = T::lit(2.5) * m;
        WeightValues { w: k * (m - u), w1: -k, w2: T::zero() }
    }

    /// Branch valid for `0 ≤ u < u_m/2`.
    pub fn middle_branch(&self, u: T) -> WeightValues<T> {
        let m = self.params.u_mid;
        let (u2, u3) = (u * u, u * u * u);
        let w = T::lit(2.5) / (m * m) * (m - u) * (T::lit(4.0) * u3 + m * m * m);
        let w1 = -T::lit(40.0) * u3 / (m * m) + T::lit(30.0) * u2 / m - T::lit(2.5) * m;
        let w2 = -T::lit(120.0) * u2 / (m * m) + T::lit(60.0) * u / m;
        WeightValues { w, w1, w2 }
    }

    /// Branch valid for `u ≥ u_m/2`.
    pub fn right_branch(&self) -> WeightValues<T> {
        let m = self.params.u_mid;
        WeightValues { w: T::lit(1.875) * m * m, w1: T::zero(), w2: T::zero() }
    }

    /// Piecewise evaluation without a domain check.
    #[inline]
    pub fn eval_unchecked(&self, u: T) -> WeightValues<T> {
        if u < T::zero() {
            self.left_branch(u)
        } else if u < self.params.u_star {
            self.middle_branch(u)
        } else {
            self.right_branch()
        }
    }

    /// Evaluates on the closed range `[u_-, u_m]`; the open ends get their limit values.
    pub fn eval(&self, u: T) -> Result<WeightValues<T>> {
        if !(u >= self.params.u_minus && u <= self.params.u_mid) {
            return Err(Error::Domain(format!(
                "weight defined on [{}, {}], got {}",
                self.params.u_minus, self.params.u_mid, u
            )));
        }
        Ok(self.eval_unchecked(u))
    }

    /// `sup w = (15/2)u_m²`, the limit at `u_-`.
    pub fn sup(&self) -> T {
        T::lit(7.5) * self.params.u_mid * self.params.u_mid
    }

    /// `inf w = (15/8)u_m²`.
    pub fn inf(&self) -> T {
        T::lit(1.875) * self.params.u_mid * self.params.u_mid
    }

    /// `H1` from its definition, with `μU_ξ = (u − u_-)(u − u_m)²` substituted.
    pub fn h1_definition(&self, u: T) -> T {
        let p = &self.params;
        let v = self.eval_unchecked(u);
        let mu_u_xi = (u - p.u_minus) * (u - p.u_mid) * (u - p.u_mid);
        let three = T::lit(3.0);
        (p.sigma * v.w1 - three * u * u * v.w1 + three * u * v.w - T::lit(0.5) * v.w2 * mu_u_xi) * (p.u_star - p.u_minus)
    }

    /// `H2` from its definition.
    pub fn h2_definition(&self, u: T) -> T {
        let p = &self.params;
        let v = self.eval_unchecked(u);
        v.w * v.w2 * (p.u_star - u) * (u + T::lit(2.0) * p.u_mid)
            + T::lit(2.0) * v.w * v.w
            + v.w * v.w1 * (p.u_star + p.u_minus - T::lit(2.0) * u)
    }

    /// Expanded polynomial forms of `(H1, H2)` on each weight branch.
    pub fn h_closed_form(&self, u: T) -> (T, T) {
        let m = self.params.u_mid;
        let c = |x: f64| T::lit(x);
        let (m2, m3, m4) = (m * m, m * m * m, m * m * m * m);
        if u < T::zero() {
            (c(-75.0 / 4.0) * m4 + c(75.0 / 4.0) * m3 * u, c(175.0 / 8.0) * m4 - c(175.0 / 8.0) * m3 * u)
        } else if u < self.params.u_star {
            let h1 = c(375.0) / m * u.powi(5) - c(225.0) * u.powi(4) - c(750.0) * m * u.powi(3) + c(750.0) * m2 * u * u
                - c(525.0 / 4.0) * m3 * u
                - c(75.0 / 4.0) * m4;
            let h2 = -c(1800.0) / m4 * u.powi(8) + c(400.0) / m3 * u.powi(7) + c(3950.0) / m2 * u.powi(6)
                - c(3600.0) / m * u.powi(5)
                + c(1225.0 / 2.0) * u.powi(4)
                + c(1075.0) * m * u.powi(3)
                - c(1575.0 / 2.0) * m2 * u * u
                + c(1025.0 / 8.0) * m3 * u
                + c(175.0 / 8.0) * m4;
            (h1, h2)
        } else {
            (c(225.0 / 16.0) * m3 * u, c(225.0 / 32.0) * m4)
        }
    }

    /// Closed form of `H1 + H2`: `(25/8)u_m³(u_m − u)` left of zero, the degree-eight
    /// polynomial on `[0, u_*)`.
    pub fn h_sum_closed_form(&self, u: T) -> T {
        let m = self.params.u_mid;
        let c = |x: f64| T::lit(x);
        let (m2, m3, m4) = (m * m, m * m * m, m * m * m * m);
        if u < T::zero() {
            c(25.0 / 8.0) * m3 * (m - u)
        } else if u < self.params.u_star {
            -c(1800.0) / m4 * u.powi(8) + c(400.0) / m3 * u.powi(7) + c(3950.0) / m2 * u.powi(6)
                - c(3225.0) / m * u.powi(5)
                + c(775.0 / 2.0) * u.powi(4)
                + c(325.0) * m * u.powi(3)
                - c(75.0 / 2.0) * m2 * u * u
                - c(25.0 / 8.0) * m3 * u
                + c(25.0 / 8.0) * m4
        } else {
            let (h1, h2) = self.h_closed_form(u);
            h1 + h2
        }
    }

    /// `1 − w (u_* − u)/(u_m − u)² · 2/(5u_m)`, the factor left after the Poincaré step.
    pub fn poincare_factor(&self, u: T) -> T {
        let p = &self.params;
        let w = self.eval_unchecked(u).w;
        T::one() - w * (p.u_star - u) / ((p.u_mid - u) * (p.u_mid - u)) * T::lit(2.0) / (T::lit(5.0) * p.u_mid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightAlgebraRow<T> {
    pub u_s: T,
    pub w: T,
    pub w1: T,
    pub w2: T,
    pub h1: T,
    pub h2: T,
    pub h_sum: T,
    pub h_sum_closed: T,
    pub poincare_factor: T,
}

/// A sample where one of the algebraic inequalities fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample<T> {
    pub u_s: T,
    pub check: &'static str,
    pub value: T,
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightAlgebraReport<T> {
    pub rows: Vec<WeightAlgebraRow<T>>,
    /// Largest `|definition − closed form|` over `H1`, `H2` and their sum, relative to
    /// `max(|value|, u_m⁴)`.
    pub max_relative_discrepancy: T,
    pub min_h_sum: T,
    /// Minimum of the Poincaré factor over samples with `u_- < u < u_*`.
    pub min_poincare_factor: T,
    /// Largest one-sided jump of `w`, `w'`, `w''` at the two junctions, relative to `max(1, |value|)`.
    pub junction_mismatch: T,
    pub counterexamples: Vec<Counterexample<T>>,
}

impl<T: Scalar> WeightAlgebraReport<T> {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Sweeps `n_samples` uniform states in `[u_-, u_m)` and evaluates every algebraic claim.
pub fn weight_algebra<T: Scalar>(wf: &WeightFunction<T>, n_samples: usize) -> Result<WeightAlgebraReport<T>> {
    if n_samples < 100 {
        return Err(Error::Config(format!("weight algebra needs at least 100 samples, got {}", n_samples)));
    }
    let p = *wf.params();
    let m4 = p.u_mid.powi(4);
    let agreement = T::lit(1e-8);
    let h_bound = T::lit(2.0) * m4;
    let factor_bound = T::one() / T::lit(6.0);
    let step = (p.u_mid - p.u_minus) / T::from_usize_exact(n_samples);
    let mut rows = Vec::with_capacity(n_samples);
    let mut counterexamples = Vec::new();
    let mut max_rel = T::zero();
    let mut min_sum = T::infinity();
    let mut min_factor = T::infinity();
    let rel = |a: T, b: T| (a - b).abs() / a.abs().max(b.abs()).max(m4);
    for i in 0..n_samples {
        let u = p.u_minus + step * T::from_usize_exact(i);
        let v = wf.eval_unchecked(u);
        let (h1, h2) = (wf.h1_definition(u), wf.h2_definition(u));
        let (c1, c2) = wf.h_closed_form(u);
        let sum = h1 + h2;
        let sum_closed = wf.h_sum_closed_form(u);
        let d = rel(h1, c1).max(rel(h2, c2)).max(rel(sum, sum_closed)).max(rel(c1 + c2, sum_closed));
        max_rel = max_rel.max(d);
        if !(d <= agreement) {
            counterexamples.push(Counterexample { u_s: u, check: "closed form agreement", value: d, bound: agreement });
        }
        min_sum = min_sum.min(sum);
        if !(sum > h_bound) {
            counterexamples.push(Counterexample { u_s: u, check: "H1+H2 > 2 u_m^4", value: sum, bound: h_bound });
        }
        let factor = wf.poincare_factor(u);
        // the profile takes values in the open interval (u_-, u_*); at u_- the factor is exactly 1/6
        if u > p.u_minus && u < p.u_star {
            min_factor = min_factor.min(factor);
            if !(factor > factor_bound) {
                counterexamples.push(Counterexample { u_s: u, check: "poincare factor > 1/6", value: factor, bound: factor_bound });
            }
        }
        if ![v.w, v.w1, v.w2, h1, h2, sum_closed, factor].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite(format!("weight algebra at u = {}", u)));
        }
        rows.push(WeightAlgebraRow {
            u_s: u,
            w: v.w,
            w1: v.w1,
            w2: v.w2,
            h1,
            h2,
            h_sum: sum,
            h_sum_closed: sum_closed,
            poincare_factor: factor,
        });
    }
    let junction_mismatch = junction_mismatch(wf);
    let c2_bound = T::lit(1e-6);
    if !(junction_mismatch < c2_bound) {
        counterexamples.push(Counterexample { u_s: T::zero(), check: "C2 junctions", value: junction_mismatch, bound: c2_bound });
    }
    Ok(WeightAlgebraReport {
        rows,
        max_relative_discrepancy: max_rel,
        min_h_sum: min_sum,
        min_poincare_factor: min_factor,
        junction_mismatch,
        counterexamples,
    })
}

/// One-sided branch values compared at `u = 0` and `u = u_*`.
pub fn junction_mismatch<T: Scalar>(wf: &WeightFunction<T>) -> T {
    let pairs = [
        (wf.left_branch(T::zero()), wf.middle_branch(T::zero())),
        (wf.middle_branch(wf.params().u_star), wf.right_branch()),
    ];
    let mut worst = T::zero();
    for (a, b) in pairs {
        for (x, y) in [(a.w, b.w), (a.w1, b.w1), (a.w2, b.w2)] {
            worst = worst.max((x - y).abs() / T::one().max(x.abs()));
        }
    }
    worst
}

/// Largest jump of the centred finite-difference first and second derivatives of `w` across the
/// junctions, compared with the same differences one step away. Detects derivative jumps.
pub fn junction_fd_jump<T: Scalar>(wf: &WeightFunction<T>, h: T) -> T {
    let w = |u: T| wf.eval_unchecked(u).w;
    let d1 = |u: T| (w(u + h) - w(u - h)) / (T::lit(2.0) * h);
    let d2 = |u: T| (w(u + h) - T::lit(2.0) * w(u) + w(u - h)) / (h * h);
    let mut worst = T::zero();
    for j in [T::zero(), wf.params().u_star] {
        let left = j - T::lit(2.0) * h;
        let right = j + T::lit(2.0) * h;
        // Derivatives are Lipschitz, so a smooth join moves them by O(h) over 4h.
        worst = worst.max((d1(left) - d1(right)).abs() - wf.params().u_mid * T::lit(200.0) * h);
        worst = worst.max((d2(left) - d2(right)).abs() - T::lit(2000.0) * h);
    }
    worst.max(T::zero())
}

/// Result of one weighted Poincaré check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoincareResult<T> {
    /// `∫f² − (∫f)²`.
    pub lhs: T,
    /// `(1/2)∫ y(1−y) f'²`.
    pub rhs: T,
    pub quadrature_bound: T,
    pub satisfied: bool,
}

/// Evaluates both sides of `∫₀¹ f² − (∫₀¹ f)² ≤ ½∫₀¹ y(1−y)|f'|²` by composite Simpson on
/// `intervals` subintervals. The verdict allows the combined quadrature error estimate.
pub fn poincare_check<T: Scalar, F, D>(f: F, df: D, intervals: usize) -> Result<PoincareResult<T>>
where
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let (a, b) = (T::zero(), T::one());
    let sq = simpson_with_bound(|y| f(y) * f(y), a, b, intervals);
    let mean = simpson_with_bound(&f, a, b, intervals);
    let dir = simpson_with_bound(|y| y * (T::one() - y) * df(y) * df(y), a, b, intervals);
    let vals = [sq.value, mean.value, dir.value];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Poincare integrand".into()));
    }
    let lhs = sq.value - mean.value * mean.value;
    let rhs = T::lit(0.5) * dir.value;
    let bound = sq.error_bound
        + (T::lit(2.0) * mean.value.abs() + mean.error_bound) * mean.error_bound
        + T::lit(0.5) * dir.error_bound;
    Ok(PoincareResult { lhs, rhs, quadrature_bound: bound, satisfied: lhs <= rhs + bound })
}

/// Random trigonometric polynomial on `[0, 1]` with up to `modes` cosine and sine terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial<T> {
    pub constant: T,
    pub cos: Vec<T>,
    pub sin: Vec<T>,
}

impl<T: Scalar> TrigPolynomial<T> {
    pub fn random(rng: &mut ChaCha8Rng, modes: usize) -> Self {
        let k = rng.gen_range(1..=modes.max(1));
        let mut draw = || T::lit(rng.gen_range(-1.0..1.0));
        Self { constant: draw(), cos: (0..k).map(|_| draw()).collect(), sin: (0..k).map(|_| draw()).collect() }
    }

    pub fn value(&self, y: T) -> T {
        let pi = T::PI();
        let mut acc = self.constant;
        for (j, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let arg = pi * T::from_usize_exact(j + 1) * y;
            acc += *c * arg.cos() + *s * arg.sin();
        }
        acc
    }

    pub fn derivative(&self, y: T) -> T {
        let pi = T::PI();
        let mut acc = T::zero();
        for (j, (c, s)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = pi * T::from_usize_exact(j + 1);
            let arg = k * y;
            acc += k * (*s * arg.cos() - *c * arg.sin());
        }
        acc
    }
}

/// Summary of the Poincaré inequality over many random test functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareSweep<T> {
    pub trials: usize,
    pub violations: usize,
    /// Smallest `(rhs − lhs)/rhs` seen.
    pub min_relative_margin: T,
}

pub fn poincare_sweep<T: Scalar>(trials: usize, modes: usize, seed: u64, intervals: usize) -> Result<PoincareSweep<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut min_margin = T::infinity();
    for _ in 0..trials {
        let poly = TrigPolynomial::<T>::random(&mut rng, modes);
        let r = poincare_check(|y| poly.value(y), |y| poly.derivative(y), intervals)?;
        if !r.satisfied {
            violations += 1;
        }
        if r.rhs > T::zero() {
            min_margin = min_margin.min((r.rhs - r.lhs) / r.rhs);
        }
    }
    Ok(PoincareSweep { trials, violations, min_relative_margin: min_margin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wf() -> WeightFunction<f64> {
        WeightFunction::new(WaveParameters::pure_shock(-2.0, 1.0).unwrap())
    }

    #[test]
    fn branch_values() {
        let w = wf();
        assert_relative_eq!(w.eval(-2.0).unwrap().w, 7.5);
        assert_relative_eq!(w.eval(0.5).unwrap().w, 15.0 / 8.0);
        assert_relative_eq!(w.left_branch(0.0).w, 2.5);
        assert_relative_eq!(w.middle_branch(0.0).w, 2.5);
        assert!(w.eval(-2.1).is_err() && w.eval(1.01).is_err());
    }

    #[test]
    fn h_sum_examples() {
        let w = wf();
        assert_relative_eq!(w.h1_definition(0.0) + w.h2_definition(0.0), 25.0 / 8.0, epsilon = 1e-12);
        // left-region closed forms evaluated at the junction
        let (h1, h2) = w.h_closed_form(-1e-300);
        assert_relative_eq!(h1 + h2, 25.0 / 8.0, epsilon = 1e-12);
        assert_relative_eq!(w.h1_definition(-2.0) + w.h2_definition(-2.0), 75.0 / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn poincare_factor_closed_form() {
        let w = wf();
        for &u in &[-1.5, -0.2] {
            assert_relative_eq!(w.poincare_factor(u), 0.5 / (1.0 - u), epsilon = 1e-13);
        }
        for &u in &[0.0f64, 0.2, 0.45] {
            let closed = (8.0 * u.powi(4) - 4.0 * u.powi(3) + 1.0) / (2.0 * (1.0 - u));
            assert_relative_eq!(w.poincare_factor(u), closed, epsilon = 1e-13);
        }
    }

    #[test]
    fn poincare_examples() {
        let c = poincare_check(|_: f64| 3.0, |_| 0.0, 2048).unwrap();
        assert!(c.lhs.abs() < 1e-14 && c.rhs == 0.0 && c.satisfied);
        let lin = poincare_check(|y: f64| y, |_| 1.0, 2048).unwrap();
        assert_relative_eq!(lin.lhs, 1.0 / 12.0, epsilon = 1e-15);
        assert_relative_eq!(lin.rhs, 1.0 / 12.0, epsilon = 1e-15);
        assert!((lin.lhs - lin.rhs).abs() <= lin.quadrature_bound && lin.satisfied);
        let sq = poincare_check(|y: f64| y * y, |y: f64| 2.0 * y, 2048).unwrap();
        assert_relative_eq!(sq.lhs, 4.0 / 45.0, epsilon = 1e-14);
        assert_relative_eq!(sq.rhs, 0.1, epsilon = 1e-12);
        assert!(sq.lhs < sq.rhs && sq.satisfied);
    }
}
