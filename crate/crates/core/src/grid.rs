use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::quadrature::trapezoid;
use crate::scalar::Scalar;
use crate::waves::ShockProfile;

/// Uniform grid with `n` cells and `n + 1` nodes on `[xi_min, xi_max]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid<T> {
    pub xi_min: T,
    pub xi_max: T,
    pub n: usize,
    pub h: T,
    #[serde(skip)]
    pub nodes: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(xi_min: T, xi_max: T, n: usize) -> Result<Self> {
        if !(xi_min.is_finite() && xi_max.is_finite() && xi_max > xi_min) {
            return Err(Error::Config(format!("grid needs xi_min < xi_max, got [{}, {}]", xi_min, xi_max)));
        }
        if n < 4 {
            return Err(Error::Config(format!("grid needs at least 4 cells, got {}", n)));
        }
        let h = (xi_max - xi_min) / T::from_usize_exact(n);
        let nodes = (0..=n).map(|i| if i == n { xi_max } else { xi_min + h * T::from_usize_exact(i) }).collect();
        Ok(Self { xi_min, xi_max, n, h, nodes })
    }

    pub fn len(&self) -> usize {
        self.n + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn integrate(&self, values: &[T]) -> T {
        trapezoid(values, self.h)
    }

    /// Requires `xi_min < ξ₁ − 20ℓ` and `xi_max > ξ* + 50ℓ` with `ℓ = μ/δ_S²`.
    pub fn check_covers(&self, profile: &ShockProfile<T>) -> Result<()> {
        let l = profile.length_scale();
        let lo = profile.xi_1() - T::lit(20.0) * l;
        let hi = profile.xi_star() + T::lit(50.0) * l;
        if self.xi_min < lo && self.xi_max > hi {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "grid [{}, {}] must extend beyond [{}, {}] to contain both profile tails",
                self.xi_min, self.xi_max, lo, hi
            )))
        }
    }
}
