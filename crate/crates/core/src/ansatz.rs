//! Shifted composite ansatz `ũ^X(t,ξ) = U(ξ+X) + u^R(1+t, ξ+σt+X) − u_m`, its source term,
//! and the shift ODE.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;
use crate::waves::{ApproxRarefaction, ProfileOrigin, ProfileSample, ShockProfile, WaveParameters};
use crate::weight::{WeightFunction, WeightValues};

/// Rarefaction contribution at one point; identically `u_m` when the wave is absent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RarefactionPart<T> {
    pub u: T,
    pub u_x: T,
    pub u_xx: T,
    /// `u^R − u_m`.
    pub gap_left: T,
    pub x0: T,
}

/// Ansatz value and its first two `ξ` derivatives, with the member evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzSample<T> {
    pub value: T,
    pub d1: T,
    pub d2: T,
    pub shock: ProfileSample<T>,
    pub rare: RarefactionPart<T>,
}

/// Per-point warm starts for the two scalar solves.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeHint<T> {
    pub s: Option<T>,
    pub x0: Option<T>,
    /// Profile argument of the last solve and `ds/dη` there, for a first-order predictor.
    pub eta: T,
    pub ds_deta: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeAnsatz<T> {
    params: WaveParameters<T>,
    shock: Option<ShockProfile<T>>,
    rarefaction: Option<ApproxRarefaction<T>>,
}

impl<T: Scalar> CompositeAnsatz<T> {
    /// Shock always present; rarefaction present iff `u_+ > u_m`.
    pub fn new(params: WaveParameters<T>, origin: ProfileOrigin<T>, tolerance: T) -> Result<Self> {
        let shock = ShockProfile::build(params, origin, tolerance)?;
        let rarefaction = if params.has_rarefaction() { Some(ApproxRarefaction::build(params, tolerance)?) } else { None };
        Ok(Self { params, shock: Some(shock), rarefaction })
    }

    /// Either member may be dropped; a dropped member contributes the constant `u_m`.
    pub fn from_parts(params: WaveParameters<T>, shock: Option<ShockProfile<T>>, rarefaction: Option<ApproxRarefaction<T>>) -> Self {
        Self { params, shock, rarefaction }
    }

    pub fn params(&self) -> &WaveParameters<T> {
        &self.params
    }

    pub fn shock(&self) -> Option<&ShockProfile<T>> {
        self.shock.as_ref()
    }

    pub fn rarefaction(&self) -> Option<&ApproxRarefaction<T>> {
        self.rarefaction.as_ref()
    }

    /// Shock member at the already shifted position `eta = ξ + X`.
    pub fn shock_at(&self, eta: T, hint: Option<T>) -> Result<(ProfileSample<T>, T)> {
        match &self.shock {
            Some(p) => {
                p.sample_from(eta, hint)
            }
            None => Ok((
                ProfileSample {
                    u: self.params.u_mid,
                    u_xi: T::zero(),
                    u_xixi: T::zero(),
                    gap_left: self.params.delta_s,
                    gap_right: T::zero(),
                },
                T::zero(),
            )),
        }
    }

    /// Rarefaction member `u^R(1+t, x)` with `x = ξ + σt + X`.
    pub fn rarefaction_at(&self, t: T, x: T, hint: Option<T>) -> Result<RarefactionPart<T>> {
        match &self.rarefaction {
            Some(r) => {
                let tau = T::one() + t;
                let s = match hint {
                    Some(g) => r.sample_from(tau, x, g)?,
                    None => r.sample(tau, x)?,
                };
                Ok(RarefactionPart { u: s.u, u_x: s.u_x, u_xx: s.u_xx, gap_left: s.gap_left, x0: s.x0 })
            }
            None => Ok(RarefactionPart { u: self.params.u_mid, u_x: T::zero(), u_xx: T::zero(), gap_left: T::zero(), x0: T::zero() }),
        }
    }

    pub fn eval(&self, t: T, xi: T, shift: T) -> Result<AnsatzSample<T>> {
        let mut hint = NodeHint::default();
        self.eval_hinted(t, xi, shift, &mut hint)
    }

    /// As [`eval`](Self::eval), warm-starting from and updating `hint`.
    pub fn eval_hinted(&self, t: T, xi: T, shift: T, hint: &mut NodeHint<T>) -> Result<AnsatzSample<T>> {
        if !(t >= T::zero()) {
            return Err(Error::Domain(format!("ansatz needs t >= 0, got {}", t)));
        }
        let eta = xi + shift;
        let (shock, s) = self.shock_at(eta, hint.s.map(|s| s + (eta - hint.eta) * hint.ds_deta))?;
        let rare = self.rarefaction_at(t, xi + self.params.sigma * t + shift, hint.x0)?;
        hint.s = Some(s);
        hint.eta = eta;
        // ds/dη = 1/(ℓ(1 + e^s)) = (u_m - U)/(ℓ δ_S) = gap_right/μ · δ_S.
        hint.ds_deta = shock.gap_right * self.params.delta_s / self.params.mu;
        hint.x0 = Some(rare.x0);
        Ok(AnsatzSample {
            value: if self.rarefaction.is_some() { shock.u + rare.u - self.params.u_mid } else { shock.u },
            d1: shock.u_xi + rare.u_x,
            d2: shock.u_xixi + rare.u_xx,
            shock,
            rare,
        })
    }
}

/// Source term `F = F1 + F2` left by the ansatz in the shock-frame equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SourceSample<T> {
    pub total: T,
    /// Wave interaction `(f'(ũ) − f'(U))U_ξ + (f'(ũ) − f'(u^R))u^R_ξ`.
    pub f1: T,
    /// `−μ u^R_ξξ`.
    pub f2: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceTerm<T> {
    ansatz: CompositeAnsatz<T>,
}

impl<T: Scalar> SourceTerm<T> {
    pub fn new(ansatz: CompositeAnsatz<T>) -> Self {
        Self { ansatz }
    }

    pub fn from_sample(params: &WaveParameters<T>, a: &AnsatzSample<T>) -> SourceSample<T> {
        let three = T::lit(3.0);
        let fp = |u: T| three * u * u;
        let ft = fp(a.value);
        let f1 = (ft - fp(a.shock.u)) * a.shock.u_xi + (ft - fp(a.rare.u)) * a.rare.u_x;
        let f2 = -params.mu * a.rare.u_xx;
        SourceSample { total: f1 + f2, f1, f2 }
    }

    pub fn eval(&self, t: T, xi: T, shift: T) -> Result<SourceSample<T>> {
        let a = self.ansatz.eval(t, xi, shift)?;
        Ok(Self::from_sample(self.ansatz.params(), &a))
    }

    /// `f(ũ) − f(u^R) − f(U)`, whose `ξ` derivative is `F1`.
    pub fn conservative_bracket(&self, t: T, xi: T, shift: T) -> Result<T> {
        let a = self.ansatz.eval(t, xi, shift)?;
        let f = |u: T| u * u * u;
        Ok(f(a.value) - f(a.rare.u) - f(a.shock.u))
    }
}

/// Profile quantities at `ξ_i + X` on every grid node, refreshed with warm starts.
#[derive(Debug, Clone, PartialEq)]
pub struct ShockLayer<T> {
    pub shift: T,
    pub samples: Vec<ProfileSample<T>>,
    pub weights: Vec<WeightValues<T>>,
    s: Vec<Option<T>>,
}

impl<T: Scalar> ShockLayer<T> {
    pub fn new(len: usize) -> Self {
        Self { shift: T::nan(), samples: Vec::with_capacity(len), weights: Vec::with_capacity(len), s: vec![None; len] }
    }

    pub fn update(&mut self, ansatz: &CompositeAnsatz<T>, wf: &WeightFunction<T>, grid: &Grid<T>, shift: T) -> Result<()> {
        if self.s.len() != grid.len() {
            self.s = vec![None; grid.len()];
        }
        self.samples.clear();
        self.weights.clear();
        for (i, &xi) in grid.nodes.iter().enumerate() {
            let (sample, s) = ansatz.shock_at(xi + shift, self.s[i])?;
            self.s[i] = Some(s);
            self.weights.push(wf.eval_unchecked(sample.u));
            self.samples.push(sample);
        }
        self.shift = shift;
        Ok(())
    }

    /// `∫ U_ξ(ξ+X)` over the grid.
    pub fn captured_mass(&self, h: T) -> T {
        crate::numerics::quadrature::trapezoid_by(self.samples.len(), h, |i| self.samples[i].u_xi)
    }
}

/// Shift rate together with the quadrature bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftRate<T> {
    pub xdot: T,
    /// `∫ U_ξ(ξ+X)` captured by the grid.
    pub captured_mass: T,
    /// Bound on the part of the shift integral lying outside the grid.
    pub tail_bound: T,
}

/// `32/(25 u_m²)`.
pub fn shift_coefficient<T: Scalar>(params: &WaveParameters<T>) -> T {
    T::lit(32.0) / (T::lit(25.0) * params.u_mid * params.u_mid)
}

/// `Ẋ = 32/(25u_m²) ∫ φ w(U(ξ+X)) U_ξ(ξ+X) dξ` by the trapezoid rule on a precomputed layer.
pub fn shift_rate_from_layer<T: Scalar>(phi: &[T], layer: &ShockLayer<T>, params: &WaveParameters<T>, grid: &Grid<T>) -> Result<ShiftRate<T>> {
    if phi.len() != grid.len() || layer.samples.len() != grid.len() {
        return Err(Error::Domain(format!("field of length {} on a grid of {} nodes", phi.len(), grid.len())));
    }
    let captured = layer.captured_mass(grid.h);
    let required = T::lit(0.99) * params.delta_s;
    if !(captured >= required) {
        return Err(Error::Coverage { captured: captured.as_f64(), required: required.as_f64() });
    }
    let integral =
        crate::numerics::quadrature::trapezoid_by(phi.len(), grid.h, |i| phi[i] * layer.weights[i].w * layer.samples[i].u_xi);
    let coef = shift_coefficient(params);
    let xdot = coef * integral;
    if !xdot.is_finite() {
        return Err(Error::NonFinite("shift rate".into()));
    }
    let phi_max = phi.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let outside = layer.samples[0].gap_left + layer.samples[layer.samples.len() - 1].gap_right;
    let sup_w = T::lit(7.5) * params.u_mid * params.u_mid;
    Ok(ShiftRate { xdot, captured_mass: captured, tail_bound: coef * phi_max * sup_w * outside })
}

/// Shift rate for a perturbation field on `grid`, with profile and weight evaluated at `ξ + X`.
pub fn shift_rhs<T: Scalar>(phi: &[T], shock: &ShockProfile<T>, wf: &WeightFunction<T>, shift: T, grid: &Grid<T>) -> Result<ShiftRate<T>> {
    if phi.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("perturbation passed to shift_rhs".into()));
    }
    let ansatz = CompositeAnsatz::from_parts(*shock.params(), Some(*shock), None);
    let mut layer = ShockLayer::new(grid.len());
    layer.update(&ansatz, wf, grid, shift)?;
    shift_rate_from_layer(phi, &layer, shock.params(), grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShiftRecord<T> {
    pub t: T,
    pub x: T,
    pub xdot: T,
}

/// Shift `X(t)`, its current rate, and the history of `(t, X, Ẋ)` used by each step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftState<T> {
    pub t: T,
    pub x: T,
    pub xdot: T,
    pub history: Vec<ShiftRecord<T>>,
}

impl<T: Scalar> Default for ShiftState<T> {
    fn default() -> Self {
        Self { t: T::zero(), x: T::zero(), xdot: T::zero(), history: Vec::new() }
    }
}

impl<T: Scalar> ShiftState<T> {
    /// Explicit Euler: records `(t, X, Ẋ)` and moves to `(t + dt, X + dt Ẋ)`.
    pub fn advance(&mut self, xdot: T, dt: T) -> Result<()> {
        if !xdot.is_finite() {
            return Err(Error::NonFinite(format!("shift rate {} at t = {}", xdot, self.t)));
        }
        if !(dt > T::zero()) {
            return Err(Error::Domain(format!("shift step needs dt > 0, got {}", dt)));
        }
        self.xdot = xdot;
        self.history.push(ShiftRecord { t: self.t, x: self.x, xdot });
        self.x += dt * xdot;
        self.t += dt;
        Ok(())
    }
}

pub fn advance_shift<T: Scalar>(mut state: ShiftState<T>, xdot: T, dt: T) -> Result<ShiftState<T>> {
    state.advance(xdot, dt)?;
    Ok(state)
}
