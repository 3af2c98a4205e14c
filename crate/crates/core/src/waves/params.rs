use num_traits::Num;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Far-field and intermediate states of the composite wave `u_- → u_m → u_+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveParameters<T> {
    pub u_minus: T,
    pub u_plus: T,
    /// `−u_minus/2`: the sonic state reached by the degenerate shock.
    pub u_mid: T,
    /// `u_mid/2`: second junction of the weight.
    pub u_star: T,
    /// Shock speed `3 u_mid²`, equal to `f'(u_mid)`.
    pub sigma: T,
    pub delta_s: T,
    pub delta_r: T,
    pub mu: T,
}

impl<T: Scalar> WaveParameters<T> {
    /// Validates `u_- < 0 < u_* < u_m ≤ u_+` and `μ > 0`. `u_+ = u_m` is the pure-shock case.
    pub fn new(u_minus: T, u_plus: T, mu: T) -> Result<Self> {
        if !(u_minus.is_finite() && u_plus.is_finite() && mu.is_finite()) {
            return Err(Error::Config("wave parameters must be finite".into()));
        }
        if !(mu > T::zero()) {
            return Err(Error::Config(format!("viscosity must be positive, got mu = {}", mu)));
        }
        if !(u_minus < T::zero()) {
            return Err(Error::Config(format!(
                "composite-wave ordering u_- < 0 < u_* < u_m <= u_+ violated: u_- = {} is not negative",
                u_minus
            )));
        }
        let two = T::lit(2.0);
        let u_mid = -u_minus / two;
        if u_plus < u_mid {
            return Err(Error::Config(format!(
                "composite-wave ordering u_- < 0 < u_* < u_m <= u_+ violated: u_+ = {} < u_m = {}",
                u_plus, u_mid
            )));
        }
        Ok(Self {
            u_minus,
            u_plus,
            u_mid,
            u_star: u_mid / two,
            sigma: T::lit(3.0) * u_mid * u_mid,
            delta_s: u_mid - u_minus,
            delta_r: u_plus - u_mid,
            mu,
        })
    }

    /// Degenerate shock alone: `u_+ = u_m`.
    pub fn pure_shock(u_minus: T, mu: T) -> Result<Self> {
        Self::new(u_minus, -u_minus / T::lit(2.0), mu)
    }

    pub fn has_rarefaction(&self) -> bool {
        self.delta_r > T::zero()
    }

    pub fn lambda_minus(&self) -> T {
        self.sigma
    }

    pub fn lambda_plus(&self) -> T {
        T::lit(3.0) * self.u_plus * self.u_plus
    }

    pub fn flux(u: T) -> T {
        u * u * u
    }

    pub fn flux_prime(u: T) -> T {
        T::lit(3.0) * u * u
    }
}

/// Structure of the entropy solution of the Riemann problem for `u^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WavePattern {
    Shock,
    DegenerateShock,
    Rarefaction,
    ShockPlusRarefaction,
}

/// Classifies the Riemann data `(u_-, u_+)` for the flux `u^3`.
///
/// Generic over any ordered numeric type, so rational inputs decide the degenerate case
/// `u_+ = −u_-/2` exactly.
pub fn classify_riemann<N>(u_minus: N, u_plus: N) -> Result<WavePattern>
where
    N: Num + PartialOrd + Copy,
{
    if u_minus == u_plus {
        return Err(Error::Domain("Riemann data must have distinct states".into()));
    }
    let zero = N::zero();
    // Work with 2u_+ against −u_- to avoid division.
    let twice_plus = u_plus + u_plus;
    let tangent = zero - u_minus;
    let pattern = if u_minus < zero {
        if u_plus < u_minus {
            WavePattern::Rarefaction
        } else if twice_plus < tangent {
            WavePattern::Shock
        } else if twice_plus == tangent {
            WavePattern::DegenerateShock
        } else {
            WavePattern::ShockPlusRarefaction
        }
    } else if u_minus > zero {
        if u_plus > u_minus {
            WavePattern::Rarefaction
        } else if twice_plus > tangent {
            WavePattern::Shock
        } else if twice_plus == tangent {
            WavePattern::DegenerateShock
        } else {
            WavePattern::ShockPlusRarefaction
        }
    } else {
        // Starting at the inflection point the data always spread.
        WavePattern::Rarefaction
    };
    Ok(pattern)
}
