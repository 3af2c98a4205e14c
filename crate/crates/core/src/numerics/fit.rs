use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
    pub n: usize,
}

pub fn least_squares<T: Scalar>(x: &[T], y: &[T]) -> Result<LinearFit<T>> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!("fit: {} abscissae vs {} ordinates", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Empty("fit needs at least two points".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit input".into()));
    }
    let n = T::from_usize_exact(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == T::zero() {
        return Err(Error::Domain("fit: all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: T = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    // A perfectly flat series is fitted exactly.
    let r_squared = if syy <= T::epsilon() * T::epsilon() * my * my {
        T::one()
    } else {
        T::one() - ss_res / syy
    };
    Ok(LinearFit { slope, intercept, r_squared, n: x.len() })
}

/// `v ≈ prefactor · t^exponent`, fitted on log–log axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit<T> {
    pub exponent: T,
    pub prefactor: T,
    pub r_squared: T,
}

impl<T: Scalar> PowerLawFit<T> {
    pub fn is_conclusive(&self, threshold: T) -> bool {
        self.r_squared >= threshold
    }

    /// Returns the fit only if its R² reaches `threshold`.
    pub fn require(self, threshold: T) -> Result<Self> {
        if self.is_conclusive(threshold) {
            Ok(self)
        } else {
            Err(Error::FitQuality { r_squared: self.r_squared.as_f64(), threshold: threshold.as_f64() })
        }
    }
}

pub fn fit_power_law<T: Scalar>(t: &[T], v: &[T]) -> Result<PowerLawFit<T>> {
    if t.iter().chain(v.iter()).any(|&a| !(a > T::zero())) {
        return Err(Error::Domain("power-law fit needs positive data".into()));
    }
    let lx: Vec<T> = t.iter().map(|a| a.ln()).collect();
    let ly: Vec<T> = v.iter().map(|a| a.ln()).collect();
    let f = least_squares(&lx, &ly)?;
    Ok(PowerLawFit { exponent: f.slope, prefactor: f.intercept.exp(), r_squared: f.r_squared })
}

/// `v ≈ prefactor · exp(slope·x)`, fitted on log–linear axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialFit<T> {
    pub slope: T,
    pub prefactor: T,
    pub r_squared: T,
}

pub fn fit_exponential<T: Scalar>(x: &[T], v: &[T]) -> Result<ExponentialFit<T>> {
    if v.iter().any(|&a| !(a > T::zero())) {
        return Err(Error::Domain("exponential fit needs positive data".into()));
    }
    let ly: Vec<T> = v.iter().map(|a| a.ln()).collect();
    let f = least_squares(x, &ly)?;
    Ok(ExponentialFit { slope: f.slope, prefactor: f.intercept.exp(), r_squared: f.r_squared })
}

/// Logarithmically spaced points from `a` to `b` inclusive.
pub fn logspace<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![a];
    }
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| (la + (lb - la) * T::from_usize_exact(i) / T::from_usize_exact(n - 1)).exp())
        .collect()
}

/// Uniformly spaced points from `a` to `b` inclusive.
pub fn linspace<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * T::from_usize_exact(i) / T::from_usize_exact(n - 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_power_law() {
        let t = logspace(10.0f64, 1e4, 9);
        let v: Vec<f64> = t.iter().map(|x| 3.0 * x.powf(-0.8)).collect();
        let f = fit_power_law(&t, &v).unwrap();
        assert_relative_eq!(f.exponent, -0.8, epsilon = 1e-12);
        assert_relative_eq!(f.prefactor, 3.0, epsilon = 1e-10);
        assert_relative_eq!(f.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn flat_series_has_unit_r2() {
        let f = fit_power_law(&[1.0f64, 10.0, 100.0], &[2.0, 2.0, 2.0]).unwrap();
        assert!(f.exponent.abs() < 1e-14 && f.r_squared == 1.0);
    }

    #[test]
    fn noisy_data_is_refused() {
        let t = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let v = [1.0, 5.0, 0.5, 4.0, 0.7, 3.0];
        let f = fit_power_law(&t, &v).unwrap();
        assert!(matches!(f.require(0.98), Err(Error::FitQuality { .. })));
    }

    #[test]
    fn exponential_rate() {
        let x = linspace(-5.0f64, -1.0, 20);
        let v: Vec<f64> = x.iter().map(|a| 0.5 * (9.0 * a).exp()).collect();
        let f = fit_exponential(&x, &v).unwrap();
        assert_relative_eq!(f.slope, 9.0, epsilon = 1e-10);
    }
}
