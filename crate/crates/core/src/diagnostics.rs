//! Weighted-energy functionals, contraction checks, convergence metrics, and the wave
//! interaction integrals.

use serde::Serialize;

use crate::ansatz::{AnsatzSample, SourceTerm};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numerics::fit::{fit_power_law, least_squares, PowerLawFit};
use crate::numerics::quadrature::{adaptive_gauss, trapezoid_by};
use crate::scalar::{logistic, Scalar};
use crate::solver::{centred_derivative, second_difference, Simulation};
use crate::waves::{ApproxRarefaction, ExactRarefaction, ShockProfile, WaveParameters};
use crate::weight::WeightFunction;

/// `∫ φ² w(U(ξ+X)) dξ` by the trapezoid rule.
pub fn weighted_energy<T: Scalar>(phi: &[T], shock: &ShockProfile<T>, wf: &WeightFunction<T>, shift: T, grid: &Grid<T>) -> Result<T> {
    if phi.len() != grid.len() {
        return Err(Error::Domain(format!("field has {} values, grid has {} nodes", phi.len(), grid.len())));
    }
    let mut guess = None;
    let mut vals = Vec::with_capacity(phi.len());
    for (p, &xi) in phi.iter().zip(&grid.nodes) {
        let s = match guess {
            Some(g) => shock.s_of_xi_from(xi + shift, g)?,
            None => shock.s_of_xi(xi + shift)?,
        };
        guess = Some(s);
        vals.push(*p * *p * wf.eval_unchecked(shock.sample_at_s(s).u).w);
    }
    Ok(grid.integrate(&vals))
}

/// Every functional of the weighted relative-energy balance at one time. Integrals are taken
/// on the solver grid with the waves sampled at `ξ_i + X`, which is the unshifted frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyBreakdown<T> {
    pub t: T,
    pub x: T,
    pub xdot: T,
    pub e_w: T,
    pub gs: T,
    pub gr: T,
    pub gsr: T,
    pub n: T,
    pub j: T,
    pub y: T,
    pub j_good: T,
    pub j_bad: T,
    pub f_term: T,
    pub gs1: T,
    pub gs2: T,
    /// `∫ μ w φ_ξ²`.
    pub dissipation: T,
    /// `∫ μ φ_ξ²`.
    pub dissipation_unweighted: T,
    /// `∫ φ² U_ξ`.
    pub phi2_shock_xi: T,
    /// `∫ φ⁴ |w'| U_ξ`.
    pub quartic_abs: T,
    /// `∫ φ w U_ξ`.
    pub shift_integral: T,
    /// `(ẊY + J^good + J^bad) − (GS + GR + GSR + N + J)`.
    pub identity_residual: T,
    pub phi_sup: T,
    pub phi_l2: T,
    pub phi_xi_l2: T,
    pub phi_xixi_l2: T,
    pub source_l1: T,
}

impl<T: Scalar> EnergyBreakdown<T> {
    /// Right side of the lower bound on `GS`:
    /// `(5/16)u_m² ∫μφ_ξ² + (4/5)u_m³ ∫φ²U_ξ + (25/64)u_m² Ẋ² + (3/4)∫φ⁴|w'|U_ξ`.
    pub fn gs_lower_bound(&self, params: &WaveParameters<T>) -> T {
        let um = params.u_mid;
        let um2 = um * um;
        T::lit(5.0 / 16.0) * um2 * self.dissipation_unweighted
            + T::lit(0.8) * um2 * um * self.phi2_shock_xi
            + T::lit(25.0 / 64.0) * um2 * self.xdot * self.xdot
            + T::lit(0.75) * self.quartic_abs
    }

    /// `ẊY + J^good + J^bad`.
    pub fn balance_left(&self) -> T {
        self.xdot * self.y + self.j_good + self.j_bad
    }
}

/// Evaluates every functional for perturbation `phi` against ansatz samples taken at `(t, X)`.
#[allow(clippy::too_many_arguments)]
pub fn energy_breakdown<T: Scalar>(
    t: T,
    x: T,
    xdot: T,
    phi: &[T],
    samples: &[AnsatzSample<T>],
    params: &WaveParameters<T>,
    wf: &WeightFunction<T>,
    grid: &Grid<T>,
) -> Result<EnergyBreakdown<T>> {
    let len = grid.len();
    if phi.len() != len || samples.len() != len {
        return Err(Error::Domain(format!(
            "field sizes {} and {} do not match the grid ({} nodes)",
            phi.len(),
            samples.len(),
            len
        )));
    }
    let h = grid.h;
    let dphi = centred_derivative(phi, h);
    let ddphi = second_difference(phi, h);
    let (mu, sigma, um, us) = (params.mu, params.sigma, params.u_mid, params.u_star);
    let (half, two, three, quarter3) = (T::lit(0.5), T::lit(2.0), T::lit(3.0), T::lit(0.75));

    #[derive(Default, Clone, Copy)]
    struct Acc<T> {
        ew: T,
        dw: T,
        d: T,
        a: T,
        s1: T,
        q4: T,
        q4abs: T,
        pu: T,
        gr: T,
        gsr: T,
        n_rest: T,
        n_x1: T,
        n_x2: T,
        j: T,
        jgood: T,
        jbad: T,
        f: T,
        dw_l: T,
        a_l: T,
        s1_l: T,
        dw_r: T,
        a_r: T,
        l2: T,
        dl2: T,
        ddl2: T,
        src: T,
    }
    let mut acc = Acc::<T>::default();
    let mut sup = T::zero();
    for i in 0..len {
        let c = if i == 0 || i + 1 == len { half * h } else { h };
        let smp = &samples[i];
        let (u, up) = (smp.shock.u, smp.shock.u_xi);
        let (ur, urp, g) = (smp.rare.u, smp.rare.u_x, smp.rare.gap_left);
        let wv = wf.eval_unchecked(u);
        let (w, w1, w2) = (wv.w, wv.w1, wv.w2);
        let p = phi[i];
        let px = dphi[i];
        let p2 = p * p;
        let p3 = p2 * p;
        let p4 = p2 * p2;
        let f = SourceTerm::from_sample(params, smp).total;

        let dw = mu * w * px * px;
        let a = p2 * up * (sigma * w1 - three * u * u * w1 + three * u * w - half * w2 * mu * up);
        let s1 = p * w * up;
        let q4 = p4 * w1 * up;
        let gsr = three * p2 * w * g * up - T::lit(1.5) * p2 * g * g * w1 * up;
        let n_rest = p3 * w * (up + urp) - two * p3 * (u + ur - um) * w1 * up - three * p2 * g * u * w1 * up;
        let jgood = dw - three * p2 * u * u * w1 * up + three * p2 * g * w * up + three * p2 * ur * w * urp
            - T::lit(1.5) * p2 * g * g * w1 * up
            - quarter3 * q4;
        let jbad = three * p2 * w * u * up + three * p2 * w * (u - um) * urp - three * p2 * g * u * w1 * up + sigma * p2 * w1 * up
            - half * p2 * mu * up * up * w2
            + p3 * w * (up + urp)
            - two * p3 * (u + ur - um) * w1 * up;

        acc.ew += c * p2 * w;
        acc.dw += c * dw;
        acc.d += c * mu * px * px;
        acc.a += c * a;
        acc.s1 += c * s1;
        acc.q4 += c * q4;
        acc.q4abs += c * p4 * w1.abs() * up;
        acc.pu += c * p2 * up;
        acc.gr += c * three * p2 * w * ur * urp;
        acc.gsr += c * gsr;
        acc.n_rest += c * n_rest;
        acc.n_x1 += c * p * w * urp;
        acc.n_x2 += c * p2 * w1 * up;
        acc.j += c * three * p2 * (u - um) * w * urp;
        acc.jgood += c * jgood;
        acc.jbad += c * jbad;
        acc.f += -c * f * p * w;
        if u < us {
            acc.dw_l += c * dw;
            acc.a_l += c * a;
            acc.s1_l += c * s1;
        } else {
            acc.dw_r += c * dw;
            acc.a_r += c * three * p2 * u * w * up;
        }
        acc.l2 += c * p2;
        acc.dl2 += c * px * px;
        acc.ddl2 += c * ddphi[i] * ddphi[i];
        acc.src += c * f.abs();
        sup = sup.max(p.abs());
    }
    let k = T::lit(8.0 / 25.0) / (um * um);
    let gs = acc.dw + acc.a + xdot * acc.s1 - quarter3 * acc.q4;
    let n = xdot * (acc.n_x1 - half * acc.n_x2) + acc.n_rest;
    let y = acc.s1 + acc.n_x1 - half * acc.n_x2;
    let gs1 = acc.dw_l + acc.a_l + k * acc.s1_l * acc.s1_l;
    let gs2 = acc.dw_r + acc.a_r + xdot * acc.s1 - k * acc.s1_l * acc.s1_l - quarter3 * acc.q4;
    let right = gs + acc.gr + acc.gsr + n + acc.j;
    let left = xdot * y + acc.jgood + acc.jbad;
    Ok(EnergyBreakdown {
        t,
        x,
        xdot,
        e_w: acc.ew,
        gs,
        gr: acc.gr,
        gsr: acc.gsr,
        n,
        j: acc.j,
        y,
        j_good: acc.jgood,
        j_bad: acc.jbad,
        f_term: acc.f,
        gs1,
        gs2,
        dissipation: acc.dw,
        dissipation_unweighted: acc.d,
        phi2_shock_xi: acc.pu,
        quartic_abs: acc.q4abs,
        shift_integral: acc.s1,
        identity_residual: left - right,
        phi_sup: sup,
        phi_l2: acc.l2.sqrt(),
        phi_xi_l2: acc.dl2.sqrt(),
        phi_xixi_l2: acc.ddl2.sqrt(),
        source_l1: acc.src,
    })
}

/// Breakdown of the simulation's current state.
pub fn simulation_breakdown<T: Scalar>(sim: &Simulation<T>) -> Result<EnergyBreakdown<T>> {
    let st = &sim.state;
    energy_breakdown(st.t, st.shift.x, st.rate.xdot, &st.phi, &st.ansatz, &sim.params, &sim.wf, &sim.grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractionRow<T> {
    pub t: T,
    pub gs: T,
    pub bound: T,
    pub e_w: T,
    pub inequality_holds: bool,
}

/// Verdict of [`contraction_monitor`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionVerdict<T> {
    pub rows: Vec<ContractionRow<T>>,
    pub inequality_holds: bool,
    /// `None` when the monotonicity check does not apply (rarefaction present).
    pub energy_monotone: Option<bool>,
    /// Largest `(E_w(t_{k+1}) − E_w(t_k)) / E_w(t_k)` seen.
    pub max_relative_increase: T,
    pub first_inequality_failure: Option<T>,
}

impl<T> ContractionVerdict<T> {
    pub fn passed(&self) -> bool {
        self.inequality_holds && self.energy_monotone != Some(false)
    }
}

/// Checks `GS ≥ gs_lower_bound` at every sample and, for pure-shock runs, that `E_w` never
/// increases by more than `relative_slack`.
pub fn contraction_monitor<T: Scalar>(
    breakdowns: &[EnergyBreakdown<T>],
    params: &WaveParameters<T>,
    relative_slack: T,
) -> ContractionVerdict<T> {
    let rows: Vec<ContractionRow<T>> = breakdowns
        .iter()
        .map(|b| {
            let bound = b.gs_lower_bound(params);
            ContractionRow { t: b.t, gs: b.gs, bound, e_w: b.e_w, inequality_holds: b.gs >= bound }
        })
        .collect();
    let first_inequality_failure = rows.iter().find(|r| !r.inequality_holds).map(|r| r.t);
    let mut max_inc = T::neg_infinity();
    for pair in breakdowns.windows(2) {
        let base = pair[0].e_w;
        let inc = if base > T::zero() {
            (pair[1].e_w - base) / base
        } else if pair[1].e_w > T::zero() {
            T::infinity()
        } else {
            T::zero()
        };
        max_inc = max_inc.max(inc);
    }
    if breakdowns.len() < 2 {
        max_inc = T::zero();
    }
    let energy_monotone = if params.has_rarefaction() { None } else { Some(max_inc <= relative_slack) };
    ContractionVerdict {
        inequality_holds: first_inequality_failure.is_none(),
        rows,
        energy_monotone,
        max_relative_increase: max_inc,
        first_inequality_failure,
    }
}

/// One centred-difference audit of `dE_w/dt + 2(ẊY + J^good + J^bad) = 2F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityRow<T> {
    pub t: T,
    pub de_dt: T,
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
}

/// Audits the energy balance at interior samples, differencing `E_w` across neighbours.
pub fn energy_identity_residuals<T: Scalar>(breakdowns: &[EnergyBreakdown<T>]) -> Vec<IdentityRow<T>> {
    breakdowns
        .windows(3)
        .map(|w| {
            let de_dt = (w[2].e_w - w[0].e_w) / (w[2].t - w[0].t);
            let b = &w[1];
            let lhs = de_dt + T::lit(2.0) * b.balance_left();
            let rhs = T::lit(2.0) * b.f_term;
            IdentityRow { t: b.t, de_dt, lhs, rhs, residual: lhs - rhs }
        })
        .collect()
}

/// Audits the energy balance at the current state of `sim`, taking `dE_w/dt` from one solver
/// step of length `probe_dt` on a copy. The residual then measures the spatial consistency of
/// the functionals with the discrete dynamics, up to `O(probe_dt)`.
pub fn instantaneous_identity<T: Scalar>(sim: &Simulation<T>, probe_dt: T) -> Result<(IdentityRow<T>, EnergyBreakdown<T>)> {
    let b0 = simulation_breakdown(sim)?;
    let mut next = sim.clone();
    next.step_limited(probe_dt)?;
    let b1 = simulation_breakdown(&next)?;
    let de_dt = (b1.e_w - b0.e_w) / (b1.t - b0.t);
    let lhs = de_dt + T::lit(2.0) * b0.balance_left();
    let rhs = T::lit(2.0) * b0.f_term;
    Ok((IdentityRow { t: b0.t, de_dt, lhs, rhs, residual: lhs - rhs }, b0))
}

/// Large-time error against the composite built from the exact fan, with the shift rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow<T> {
    pub t: T,
    pub sup_error: T,
    pub xdot: T,
    pub x_over_t: T,
}

/// `sup_i |u_i − (U(ξ_i+X) + u^r((ξ_i+σt+X)/(1+t)) − u_m)|` with the exact centred fan `u^r`.
pub fn convergence_row<T: Scalar>(
    t: T,
    x: T,
    xdot: T,
    u: &[T],
    samples: &[AnsatzSample<T>],
    params: &WaveParameters<T>,
    grid: &Grid<T>,
) -> Result<ConvergenceRow<T>> {
    if u.len() != grid.len() || samples.len() != grid.len() {
        return Err(Error::Domain("convergence metric needs fields on the grid".into()));
    }
    let fan = if params.has_rarefaction() { Some(ExactRarefaction::new(*params)) } else { None };
    let tau = T::one() + t;
    let mut sup = T::zero();
    for i in 0..u.len() {
        let ur = match &fan {
            Some(f) => f.eval_ratio((grid.nodes[i] + params.sigma * t + x) / tau),
            None => params.u_mid,
        };
        let target = samples[i].shock.u + ur - params.u_mid;
        sup = sup.max((u[i] - target).abs());
    }
    let x_over_t = if t > T::zero() { x / t } else { T::zero() };
    Ok(ConvergenceRow { t, sup_error: sup, xdot, x_over_t })
}

pub fn simulation_convergence<T: Scalar>(sim: &Simulation<T>) -> Result<ConvergenceRow<T>> {
    let st = &sim.state;
    convergence_row(st.t, st.shift.x, st.rate.xdot, &st.u, &st.ansatz, &sim.params, &sim.grid)
}

/// Trend of the three convergence series over the last half of the run in log-time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendVerdict<T> {
    pub times: Vec<T>,
    pub sup_monotone: bool,
    pub xdot_monotone: bool,
    pub x_over_t_monotone: bool,
    pub final_sup: T,
    pub peak_sup: T,
    /// `final_sup / peak_sup`.
    pub final_over_peak: T,
}

impl<T: Scalar> TrendVerdict<T> {
    pub fn passed(&self, peak_fraction: T) -> bool {
        self.sup_monotone && self.xdot_monotone && self.x_over_t_monotone && self.final_over_peak < peak_fraction
    }
}

/// Checks that `sup_error`, `|Ẋ|` and `|X/t|` are non-increasing at `checkpoints` times log-spaced
/// over `[sqrt(T), T]` (the rows nearest each time are used).
pub fn convergence_trend<T: Scalar>(rows: &[ConvergenceRow<T>], checkpoints: usize) -> Result<TrendVerdict<T>> {
    let last = rows.last().ok_or_else(|| Error::Empty("no convergence rows".into()))?;
    if !(last.t > T::one()) || checkpoints < 2 {
        return Err(Error::Domain("trend needs a run beyond t = 1 and at least two checkpoints".into()));
    }
    let targets = crate::numerics::fit::logspace(last.t.sqrt(), last.t, checkpoints);
    let picked: Vec<&ConvergenceRow<T>> = targets
        .iter()
        .map(|&tt| {
            rows.iter()
                .min_by(|a, b| (a.t - tt).abs().partial_cmp(&(b.t - tt).abs()).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap_or(last)
        })
        .collect();
    let mono = |f: &dyn Fn(&ConvergenceRow<T>) -> T| picked.windows(2).all(|w| f(w[1]) <= f(w[0]));
    let peak = rows.iter().fold(T::zero(), |m, r| m.max(r.sup_error));
    Ok(TrendVerdict {
        times: picked.iter().map(|r| r.t).collect(),
        sup_monotone: mono(&|r| r.sup_error),
        xdot_monotone: mono(&|r| r.xdot.abs()),
        x_over_t_monotone: mono(&|r| r.x_over_t.abs()),
        final_sup: last.sup_error,
        peak_sup: peak,
        final_over_peak: if peak > T::zero() { last.sup_error / peak } else { T::zero() },
    })
}

/// Recorded output of a simulation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory<T> {
    pub breakdowns: Vec<EnergyBreakdown<T>>,
    pub convergence: Vec<ConvergenceRow<T>>,
    /// `(t, u, φ)` at every `snapshot_every`-th output.
    pub snapshots: Vec<(T, Vec<T>, Vec<T>)>,
    pub min_u: T,
    pub max_u: T,
}

/// Trajectory plus the error that stopped the run early, if any.
#[derive(Debug)]
pub struct RunOutcome<T> {
    pub trajectory: Trajectory<T>,
    pub failure: Option<Error>,
}

/// Runs `sim` to its end time, recording diagnostics at every output time.
pub fn record_run<T: Scalar>(sim: &mut Simulation<T>, snapshot_every: Option<usize>) -> RunOutcome<T> {
    let mut traj = Trajectory { min_u: T::infinity(), max_u: T::neg_infinity(), ..Trajectory::default() };
    let mut count = 0usize;
    let result = sim.run_with(|s| {
        traj.breakdowns.push(simulation_breakdown(s)?);
        traj.convergence.push(simulation_convergence(s)?);
        for &v in &s.state.u {
            traj.min_u = traj.min_u.min(v);
            traj.max_u = traj.max_u.max(v);
        }
        if let Some(k) = snapshot_every {
            if k > 0 && count.is_multiple_of(k) {
                traj.snapshots.push((s.state.t, s.state.u.clone(), s.state.phi.clone()));
            }
        }
        count += 1;
        Ok(())
    });
    RunOutcome { trajectory: traj, failure: result.err() }
}

/// The six shock/rarefaction interaction integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionKind {
    /// `∫_{−∞}^0 |U − u_m| u^R_ξ dξ`.
    ShockGapRarefactionSlopeLeft,
    /// `∫_0^∞ |U − u_m| u^R_ξ dξ`.
    ShockGapRarefactionSlopeRight,
    /// `∫_{−∞}^0 |u^R − u_m| U_ξ dξ`.
    RarefactionGapShockSlopeLeft,
    /// `∫_0^L |u^R − u^r| U_ξ dξ` with `L = (λ_+ − σ)(1+t)`.
    ApproxExactGapShockSlope,
    /// `∫_0^L |u^r − u_m| U_ξ dξ`; decays with a logarithmic correction.
    FanGapShockSlope,
    /// `∫_L^∞ |u^R − u_m| U_ξ dξ`.
    RarefactionGapShockSlopeFar,
}

impl InteractionKind {
    pub const ALL: [InteractionKind; 6] = [
        InteractionKind::ShockGapRarefactionSlopeLeft,
        InteractionKind::ShockGapRarefactionSlopeRight,
        InteractionKind::RarefactionGapShockSlopeLeft,
        InteractionKind::ApproxExactGapShockSlope,
        InteractionKind::FanGapShockSlope,
        InteractionKind::RarefactionGapShockSlopeFar,
    ];

    /// Decay exponent the integral is expected to show in `1 + t`.
    pub fn target_exponent(self) -> f64 {
        match self {
            InteractionKind::RarefactionGapShockSlopeFar => -1.0,
            _ => -0.8,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            InteractionKind::ShockGapRarefactionSlopeLeft => "shock_gap_rare_slope_left",
            InteractionKind::ShockGapRarefactionSlopeRight => "shock_gap_rare_slope_right",
            InteractionKind::RarefactionGapShockSlopeLeft => "rare_gap_shock_slope_left",
            InteractionKind::ApproxExactGapShockSlope => "approx_exact_gap_shock_slope",
            InteractionKind::FanGapShockSlope => "fan_gap_shock_slope",
            InteractionKind::RarefactionGapShockSlopeFar => "rare_gap_shock_slope_far",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionRow<T> {
    pub t: T,
    pub values: [T; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteractionFit<T> {
    pub kind: InteractionKind,
    pub target_exponent: T,
    pub exponent: T,
    pub prefactor: T,
    pub r_squared: T,
    /// R² reached the conclusiveness threshold.
    pub conclusive: bool,
    /// Constant `C` inside `ln^{4/5}(1 + C t)` for the logarithmically corrected integral.
    pub log_constant: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionReport<T> {
    pub rows: Vec<InteractionRow<T>>,
    pub fits: Vec<InteractionFit<T>>,
    pub r_squared_threshold: T,
}

const S_LOW: f64 = -40.0;
const S_HIGH: f64 = 36.0;
const Z_SPAN: f64 = 40.0;

/// Absolute tolerance `abs_tol` should sit above the root-solver noise of the integrand.
fn integrate<T: Scalar, F: FnMut(T) -> T>(f: F, a: T, b: T, abs_tol: T) -> Result<T> {
    if !(b > a) {
        return Ok(T::zero());
    }
    adaptive_gauss(f, a, b, 64, abs_tol, T::lit(1e-10), 40)
}

/// The six integrals at time `t`.
pub fn interaction_values<T: Scalar>(shock: &ShockProfile<T>, rare: &ApproxRarefaction<T>, t: T) -> Result<[T; 6]> {
    let p = shock.params();
    let (sigma, um) = (p.sigma, p.u_mid);
    let tau = T::one() + t;
    let fan = ExactRarefaction::new(*p);
    let gap_r = |xi: T| -> Result<T> { Ok(shock.sample(xi)?.gap_right) };
    let abs_tol = T::lit(1e-14) * p.delta_s * p.delta_r.max(T::epsilon());

    // In the foot variable z: ξ(z) = z + w₀(z)(1+t) − σt and u^R_ξ dξ = w₀'(z)/(6u^R) dz.
    let z0 = rare.foot_point(tau, sigma * t)?;
    let mut err: Option<Error> = None;
    let mut shock_gap_term = |z: T| -> T {
        let xi = rare.position_of_foot(tau, z) - sigma * t;
        let w = rare.w0(z);
        let du = rare.w0_prime(z) / (T::lit(6.0) * (w / T::lit(3.0)).sqrt());
        match gap_r(xi) {
            Ok(g) => g * du,
            Err(e) => {
                err.get_or_insert(e);
                T::zero()
            }
        }
    };
    let i1 = integrate(&mut shock_gap_term, -T::lit(Z_SPAN), z0, abs_tol)?;
    let i2 = integrate(&mut shock_gap_term, z0, T::lit(Z_SPAN), abs_tol)?;
    if let Some(e) = err.take() {
        return Err(e);
    }

    // In the logit variable s: U_ξ dξ = dU = δ_S σ(s)σ(−s) ds.
    let d = p.delta_s;
    let du = move |s: T| d * logistic(s) * logistic(-s);
    let big_l = (p.lambda_plus() - sigma) * tau;
    let s0 = shock.s_of_xi(T::zero())?;
    let s_l = shock.s_of_xi(big_l)?;
    let mut rare_err: Option<Error> = None;
    let mut rare_gap = |s: T, which: u8| -> T {
        let xi = shock.xi_of_s(s);
        let x = xi + sigma * t;
        let ur = match rare.sample(tau, x) {
            Ok(r) => r,
            Err(e) => {
                rare_err.get_or_insert(e);
                return T::zero();
            }
        };
        let v = match which {
            0 => ur.gap_left,
            1 => (ur.u - fan.eval_ratio((xi + sigma * tau) / tau)).abs(),
            _ => fan.eval_ratio((xi + sigma * tau) / tau) - um,
        };
        v.abs() * du(s)
    };
    let i3 = integrate(|s| rare_gap(s, 0), T::lit(S_LOW), s0, abs_tol)?;
    let i4 = integrate(|s| rare_gap(s, 1), s0, s_l, abs_tol)?;
    let i5 = integrate(|s| rare_gap(s, 2), s0, s_l, abs_tol)?;
    let i6 = integrate(|s| rare_gap(s, 0), s_l, T::lit(S_HIGH), abs_tol)?;
    if let Some(e) = rare_err {
        return Err(e);
    }
    Ok([i1, i2, i3, i4, i5, i6])
}

/// Fits `v ≈ A (1+t)^p ln^{4/5}(1 + C(1+t))` with `C` chosen by a grid search in `log₁₀ C ∈ [−4, 4]`.
fn fit_with_log<T: Scalar>(tau: &[T], v: &[T]) -> Result<(PowerLawFit<T>, T)> {
    let mut best: Option<(PowerLawFit<T>, T)> = None;
    for k in 0..=160 {
        let c = T::lit(10f64.powf(-4.0 + 0.05 * k as f64));
        let scaled: Vec<T> = tau.iter().zip(v).map(|(&t, &y)| y / (T::one() + c * t).ln().powf(T::lit(0.8))).collect();
        let fit = fit_power_law(tau, &scaled)?;
        if best.as_ref().is_none_or(|(b, _)| fit.r_squared > b.r_squared) {
            best = Some((fit, c));
        }
    }
    best.ok_or_else(|| Error::Empty("no log-constant candidates".into()))
}

/// Integrals at each time and their decay fits in `1 + t`. Times must span two decades.
pub fn interaction_integrals<T: Scalar>(
    shock: &ShockProfile<T>,
    rare: &ApproxRarefaction<T>,
    times: &[T],
    r_squared_threshold: T,
) -> Result<InteractionReport<T>> {
    let (lo, hi) = times
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(a, b), &t| (a.min(t), b.max(t)));
    if times.len() < 3 || !(lo > T::zero()) || !(hi / lo >= T::lit(100.0 - 1e-9)) {
        return Err(Error::Config("interaction times must be positive and span at least two decades".into()));
    }
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        rows.push(InteractionRow { t, values: interaction_values(shock, rare, t)? });
    }
    let tau: Vec<T> = times.iter().map(|&t| T::one() + t).collect();
    let mut fits = Vec::with_capacity(6);
    for (k, kind) in InteractionKind::ALL.iter().enumerate() {
        let v: Vec<T> = rows.iter().map(|r| r.values[k]).collect();
        let (fit, log_constant) = if *kind == InteractionKind::FanGapShockSlope {
            let (f, c) = fit_with_log(&tau, &v)?;
            (f, Some(c))
        } else {
            (fit_power_law(&tau, &v)?, None)
        };
        fits.push(InteractionFit {
            kind: *kind,
            target_exponent: T::lit(kind.target_exponent()),
            exponent: fit.exponent,
            prefactor: fit.prefactor,
            r_squared: fit.r_squared,
            conclusive: fit.is_conclusive(r_squared_threshold),
            log_constant,
        });
    }
    Ok(InteractionReport { rows, fits, r_squared_threshold })
}

/// Least-squares slope of `y` against `x`, re-exported for trend summaries.
pub fn slope<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    Ok(least_squares(x, y)?.slope)
}

/// `∫ |F| dξ` of the ansatz source at `(t, X)`.
pub fn source_l1<T: Scalar>(samples: &[AnsatzSample<T>], params: &WaveParameters<T>, grid: &Grid<T>) -> T {
    trapezoid_by(samples.len(), grid.h, |i| SourceTerm::from_sample(params, &samples[i]).total.abs())
}
