//! Explicit finite-volume/finite-difference solver for the shock-frame equation
//! `u_t − σu_ξ + (u³)_ξ = μu_ξξ` with Dirichlet data pinned to the shifted ansatz.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{shift_coefficient, AnsatzSample, CompositeAnsatz, NodeHint, ShiftRate, ShiftState};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::numerics::quadrature::trapezoid_by;
use crate::scalar::Scalar;
use crate::waves::{ProfileOrigin, WaveParameters};
use crate::weight::WeightFunction;

pub use crate::grid::Grid as SolverGrid;

/// Slope limiter for the MUSCL reconstruction feeding the Rusanov flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limiter {
    /// Piecewise-constant states (first order).
    FirstOrder,
    Minmod,
    #[default]
    VanLeer,
    /// Central slopes with no limiting.
    Unlimited,
}

impl Limiter {
    #[inline]
    fn slope<T: Scalar>(self, back: T, fwd: T) -> T {
        match self {
            Limiter::FirstOrder => T::zero(),
            Limiter::Unlimited => T::lit(0.5) * (back + fwd),
            Limiter::Minmod => {
                if back * fwd <= T::zero() {
                    T::zero()
                } else if back.abs() < fwd.abs() {
                    back
                } else {
                    fwd
                }
            }
            Limiter::VanLeer => {
                let p = back * fwd;
                if p <= T::zero() {
                    T::zero()
                } else {
                    T::lit(2.0) * p / (back + fwd)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SchemeConfig<T> {
    /// Safety factor on the explicit stability limit.
    pub cfl: T,
    pub limiter: Limiter,
    pub end_time: T,
    pub output_interval: T,
    /// Fixed step; rejected if it exceeds the stability limit of the initial data.
    pub fixed_dt: Option<T>,
    /// `|u|` above this aborts the run as a blow-up.
    pub blowup_threshold: T,
    /// Root-finder tolerance for the wave evaluators.
    pub tolerance: T,
    /// When false the shift stays at zero.
    pub couple_shift: bool,
}

impl<T: Scalar> Default for SchemeConfig<T> {
    fn default() -> Self {
        Self {
            cfl: T::lit(0.4),
            limiter: Limiter::VanLeer,
            end_time: T::lit(500.0),
            output_interval: T::one(),
            fixed_dt: None,
            blowup_threshold: T::lit(1e3),
            tolerance: T::lit(1e-12),
            couple_shift: true,
        }
    }
}

impl<T: Scalar> SchemeConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > T::zero() && self.cfl <= T::one()) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.end_time >= T::zero() && self.end_time.is_finite()) {
            return Err(Error::Config(format!("end time must be finite and >= 0, got {}", self.end_time)));
        }
        if !(self.output_interval > T::zero()) {
            return Err(Error::Config(format!("output interval must be positive, got {}", self.output_interval)));
        }
        if !(self.tolerance > T::zero()) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > T::zero()) {
                return Err(Error::Config(format!("fixed dt must be positive, got {}", dt)));
            }
        }
        Ok(())
    }
}

/// Semi-discrete operator for `−(u³ − σu)_ξ + μu_ξξ` on interior nodes.
#[derive(Debug, Clone)]
pub struct Discretization<T> {
    pub h: T,
    pub mu: T,
    pub sigma: T,
    pub limiter: Limiter,
    slopes: Vec<T>,
    fluxes: Vec<T>,
}

impl<T: Scalar> Discretization<T> {
    pub fn new(h: T, mu: T, sigma: T, limiter: Limiter) -> Self {
        Self { h, mu, sigma, limiter, slopes: Vec::new(), fluxes: Vec::new() }
    }

    #[inline]
    fn g(&self, u: T) -> T {
        u * u * u - self.sigma * u
    }

    #[inline]
    fn dg(&self, u: T) -> T {
        T::lit(3.0) * u * u - self.sigma
    }

    /// Largest `|g'|` over the range spanned by `u`; `g' = 3u² − σ` is extremal at the ends or at 0.
    pub fn max_speed(&self, u: &[T]) -> T {
        let (lo, hi) = u.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
        let mut a = self.dg(lo).abs().max(self.dg(hi).abs());
        if lo <= T::zero() && hi >= T::zero() {
            a = a.max(self.sigma.abs());
        }
        a
    }

    /// `dt ≤ cfl · min(h / max|g'|, h²/(2μ))`.
    pub fn stable_dt(&self, u: &[T], cfl: T) -> T {
        let a = self.max_speed(u);
        let conv = if a > T::zero() { self.h / a } else { T::infinity() };
        let diff = self.h * self.h / (T::lit(2.0) * self.mu);
        cfl * conv.min(diff)
    }

    /// Writes `du/dt` for interior nodes into `out` (boundary entries zero) and returns the net
    /// transfer `B` with `h Σ_interior du_i/dt = B`.
    pub fn apply(&mut self, u: &[T], out: &mut [T]) -> T {
        let n = u.len() - 1;
        self.slopes.resize(n + 1, T::zero());
        self.fluxes.resize(n, T::zero());
        self.slopes[0] = T::zero();
        self.slopes[n] = T::zero();
        for i in 1..n {
            self.slopes[i] = self.limiter.slope(u[i] - u[i - 1], u[i + 1] - u[i]);
        }
        let half = T::lit(0.5);
        for i in 0..n {
            let ul = u[i] + half * self.slopes[i];
            let ur = u[i + 1] - half * self.slopes[i + 1];
            let mut a = self.dg(ul).abs().max(self.dg(ur).abs());
            if ul * ur <= T::zero() {
                a = a.max(self.sigma.abs());
            }
            self.fluxes[i] = half * (self.g(ul) + self.g(ur)) - half * a * (ur - ul);
        }
        let inv_h = T::one() / self.h;
        let nu = self.mu * inv_h * inv_h;
        out[0] = T::zero();
        out[n] = T::zero();
        for i in 1..n {
            out[i] = -(self.fluxes[i] - self.fluxes[i - 1]) * inv_h + nu * (u[i + 1] - T::lit(2.0) * u[i] + u[i - 1]);
        }
        self.fluxes[0] - self.fluxes[n - 1] + self.mu * inv_h * ((u[n] - u[n - 1]) - (u[1] - u[0]))
    }
}

/// Outcome of one Heun step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepReport<T> {
    pub dt: T,
    /// `Σ_interior h (u^{n+1} − u^n)` accounted for by boundary fluxes and forcing.
    pub interior_transfer: T,
}

/// Scratch space for the two-stage Heun (SSP-RK2) method.
#[derive(Debug, Clone, Default)]
pub struct Heun<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    u1: Vec<T>,
}

impl<T: Scalar> Heun<T> {
    /// Advances `u` by `dt`. `next_boundary` gives the Dirichlet values at `t + dt`; `forcing`
    /// adds a source `S(t, ξ)` at each interior node.
    #[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
    pub fn step(
        &mut self,
        disc: &mut Discretization<T>,
        nodes: &[T],
        u: &mut [T],
        t: T,
        dt: T,
        next_boundary: (T, T),
        forcing: Option<&dyn Fn(T, T) -> T>,
    ) -> StepReport<T> {
        let n = u.len() - 1;
        self.k1.resize(n + 1, T::zero());
        self.k2.resize(n + 1, T::zero());
        self.u1.resize(n + 1, T::zero());
        let mut b1 = disc.apply(u, &mut self.k1);
        if let Some(f) = forcing {
            for i in 1..n {
                let s = f(t, nodes[i]);
                self.k1[i] += s;
                b1 += disc.h * s;
            }
        }
        for i in 0..=n {
            self.u1[i] = u[i] + dt * self.k1[i];
        }
        self.u1[0] = next_boundary.0;
        self.u1[n] = next_boundary.1;
        let mut b2 = disc.apply(&self.u1, &mut self.k2);
        if let Some(f) = forcing {
            for i in 1..n {
                let s = f(t + dt, nodes[i]);
                self.k2[i] += s;
                b2 += disc.h * s;
            }
        }
        let half = T::lit(0.5);
        for i in 1..n {
            u[i] = half * (u[i] + self.u1[i] + dt * self.k2[i]);
        }
        u[0] = next_boundary.0;
        u[n] = next_boundary.1;
        StepReport { dt, interior_transfer: half * dt * (b1 + b2) }
    }
}

/// `h Σ_{interior} u_i`.
pub fn interior_mass<T: Scalar>(u: &[T], h: T) -> T {
    u[1..u.len() - 1].iter().copied().sum::<T>() * h
}

/// Evolves `u` under the forced equation with time-dependent Dirichlet data, for manufactured
/// solutions. Returns the field at `end_time`.
#[allow(clippy::too_many_arguments)]
pub fn evolve_forced<T: Scalar>(
    grid: &Grid<T>,
    mu: T,
    sigma: T,
    limiter: Limiter,
    cfl: T,
    end_time: T,
    initial: &dyn Fn(T) -> T,
    boundary: &dyn Fn(T) -> (T, T),
    forcing: &dyn Fn(T, T) -> T,
) -> Result<Vec<T>> {
    let mut disc = Discretization::new(grid.h, mu, sigma, limiter);
    let mut heun = Heun::default();
    let mut u: Vec<T> = grid.nodes.iter().map(|&x| initial(x)).collect();
    let mut t = T::zero();
    while t < end_time {
        let dt = disc.stable_dt(&u, cfl).min(end_time - t);
        heun.step(&mut disc, &grid.nodes, &mut u, t, dt, boundary(t + dt), Some(forcing));
        t += dt;
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { t: t.as_f64(), detail: "non-finite value in forced run".into() });
        }
    }
    Ok(u)
}

/// Initial perturbation families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Perturbation<T> {
    Zero,
    /// `amplitude · exp(−(ξ − center)²/width²)`.
    Gaussian { amplitude: T, center: T, width: T },
    /// Start from the ansatz shifted by `shift`: `u₀ = ũ^{shift}(0, ξ)`.
    Translate { shift: T },
    /// Band-limited noise `amplitude · env(ξ) · Σ_k (a_k cos(kξ/width) + b_k sin(kξ/width))/modes`
    /// under a Gaussian envelope of half-width `4·width`, with seeded coefficients in `[−1, 1]`.
    RandomSmooth { amplitude: T, modes: usize, width: T, center: T, seed: u64 },
}

impl<T: Scalar> Perturbation<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            Perturbation::Gaussian { width, amplitude, .. } if !(*width > T::zero() && amplitude.is_finite()) => {
                Err(Error::Config("gaussian perturbation needs positive width".into()))
            }
            Perturbation::RandomSmooth { width, modes, .. } if !(*width > T::zero() && *modes > 0) => {
                Err(Error::Config("random perturbation needs positive width and at least one mode".into()))
            }
            Perturbation::Translate { shift } if !shift.is_finite() => Err(Error::Config("translate shift must be finite".into())),
            _ => Ok(()),
        }
    }

    /// Additive perturbation on `nodes` (zero for `Translate`, which acts through the ansatz).
    pub fn sample(&self, nodes: &[T]) -> Vec<T> {
        match self {
            Perturbation::Zero | Perturbation::Translate { .. } => vec![T::zero(); nodes.len()],
            Perturbation::Gaussian { amplitude, center, width } => nodes
                .iter()
                .map(|&x| {
                    let r = (x - *center) / *width;
                    *amplitude * (-r * r).exp()
                })
                .collect(),
            Perturbation::RandomSmooth { amplitude, modes, width, center, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let coeffs: Vec<(T, T)> =
                    (0..*modes).map(|_| (T::lit(rng.gen_range(-1.0..1.0)), T::lit(rng.gen_range(-1.0..1.0)))).collect();
                let m = T::from_usize_exact(*modes);
                nodes
                    .iter()
                    .map(|&x| {
                        let r = (x - *center) / (T::lit(4.0) * *width);
                        let env = (-r * r).exp();
                        let y = (x - *center) / *width;
                        let series: T = coeffs
                            .iter()
                            .enumerate()
                            .map(|(k, (a, b))| {
                                let arg = T::from_usize_exact(k + 1) * y;
                                *a * arg.cos() + *b * arg.sin()
                            })
                            .sum();
                        *amplitude * env * series / m
                    })
                    .collect()
            }
        }
    }

    fn ansatz_offset(&self) -> T {
        match self {
            Perturbation::Translate { shift } => *shift,
            _ => T::zero(),
        }
    }
}

/// Discrete `H¹` norm `sqrt(∫φ² + ∫φ_ξ²)` with centred differences.
pub fn h1_norm<T: Scalar>(phi: &[T], h: T) -> T {
    let d = centred_derivative(phi, h);
    let l2 = trapezoid_by(phi.len(), h, |i| phi[i] * phi[i]);
    let d2 = trapezoid_by(d.len(), h, |i| d[i] * d[i]);
    (l2 + d2).sqrt()
}

/// Centred first differences with one-sided differences at the ends.
pub fn centred_derivative<T: Scalar>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let mut d = vec![T::zero(); n];
    if n < 2 {
        return d;
    }
    d[0] = (v[1] - v[0]) / h;
    d[n - 1] = (v[n - 1] - v[n - 2]) / h;
    let two_h = T::lit(2.0) * h;
    for i in 1..n - 1 {
        d[i] = (v[i + 1] - v[i - 1]) / two_h;
    }
    d
}

/// Second differences with zero at the ends.
pub fn second_difference<T: Scalar>(v: &[T], h: T) -> Vec<T> {
    let n = v.len();
    let mut d = vec![T::zero(); n];
    for i in 1..n.saturating_sub(1) {
        d[i] = (v[i + 1] - T::lit(2.0) * v[i] + v[i - 1]) / (h * h);
    }
    d
}

/// Time, solution, derived perturbation and shift of a running simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState<T> {
    pub t: T,
    pub u: Vec<T>,
    /// `φ = u − ũ^X`, consistent with `u`, `t` and `X` after every step.
    pub phi: Vec<T>,
    pub shift: ShiftState<T>,
    pub steps: usize,
    /// Ansatz members at every node for the current `(t, X)`.
    pub ansatz: Vec<AnsatzSample<T>>,
    pub rate: ShiftRate<T>,
    /// `H¹` norm of the initial perturbation.
    pub initial_h1: T,
}

/// Shock-frame simulation around the shifted composite ansatz.
#[derive(Debug, Clone)]
pub struct Simulation<T> {
    pub params: WaveParameters<T>,
    pub grid: Grid<T>,
    pub scheme: SchemeConfig<T>,
    pub ansatz: CompositeAnsatz<T>,
    pub wf: WeightFunction<T>,
    pub state: SimulationState<T>,
    disc: Discretization<T>,
    heun: Heun<T>,
    hints: Vec<NodeHint<T>>,
}

impl<T: Scalar> Simulation<T> {
    pub fn new(
        params: WaveParameters<T>,
        grid: Grid<T>,
        scheme: SchemeConfig<T>,
        origin: ProfileOrigin<T>,
        initial: &Perturbation<T>,
    ) -> Result<Self> {
        let ansatz = CompositeAnsatz::new(params, origin, scheme.tolerance)?;
        Self::with_ansatz(ansatz, grid, scheme, initial)
    }

    pub fn with_ansatz(ansatz: CompositeAnsatz<T>, grid: Grid<T>, scheme: SchemeConfig<T>, initial: &Perturbation<T>) -> Result<Self> {
        scheme.validate()?;
        initial.validate()?;
        let params = *ansatz.params();
        if let Some(p) = ansatz.shock() {
            grid.check_covers(p)?;
        }
        let disc = Discretization::new(grid.h, params.mu, params.sigma, scheme.limiter);
        let offset = initial.ansatz_offset();
        let bump = initial.sample(&grid.nodes);
        let mut hints = vec![NodeHint::default(); grid.len()];
        let mut u = Vec::with_capacity(grid.len());
        for (i, &xi) in grid.nodes.iter().enumerate() {
            u.push(ansatz.eval_hinted(T::zero(), xi, offset, &mut hints[i])?.value + bump[i]);
        }
        let state = SimulationState {
            t: T::zero(),
            u,
            phi: Vec::new(),
            shift: ShiftState::default(),
            steps: 0,
            ansatz: Vec::with_capacity(grid.len()),
            rate: ShiftRate { xdot: T::zero(), captured_mass: T::zero(), tail_bound: T::zero() },
            initial_h1: T::zero(),
        };
        let mut sim = Self { params, grid, scheme, ansatz, wf: WeightFunction::new(params), state, disc, heun: Heun::default(), hints };
        sim.refresh()?;
        sim.state.initial_h1 = h1_norm(&sim.state.phi, sim.grid.h);
        if let Some(dt) = sim.scheme.fixed_dt {
            let limit = sim.disc.stable_dt(&sim.state.u, T::one());
            if dt > limit {
                return Err(Error::Cfl { dt: dt.as_f64(), limit: limit.as_f64() });
            }
        }
        Ok(sim)
    }

    /// Recomputes the ansatz at the current `(t, X)`, pins the boundary values, and updates `φ`
    /// and the shift rate.
    pub fn refresh(&mut self) -> Result<()> {
        let (t, x) = (self.state.t, self.state.shift.x);
        self.state.ansatz.clear();
        for (i, &xi) in self.grid.nodes.iter().enumerate() {
            let a = self.ansatz.eval_hinted(t, xi, x, &mut self.hints[i])?;
            self.state.ansatz.push(a);
        }
        let n = self.grid.n;
        self.state.u[0] = self.state.ansatz[0].value;
        self.state.u[n] = self.state.ansatz[n].value;
        self.state.phi.clear();
        self.state.phi.extend(self.state.u.iter().zip(&self.state.ansatz).map(|(u, a)| *u - a.value));
        self.state.rate = self.shift_rate()?;
        Ok(())
    }

    fn shift_rate(&self) -> Result<ShiftRate<T>> {
        let h = self.grid.h;
        let a = &self.state.ansatz;
        let phi = &self.state.phi;
        if self.ansatz.shock().is_none() {
            return Ok(ShiftRate { xdot: T::zero(), captured_mass: T::zero(), tail_bound: T::zero() });
        }
        let captured = trapezoid_by(a.len(), h, |i| a[i].shock.u_xi);
        let required = T::lit(0.99) * self.params.delta_s;
        if !(captured >= required) {
            return Err(Error::Coverage { captured: captured.as_f64(), required: required.as_f64() });
        }
        let integral = trapezoid_by(a.len(), h, |i| phi[i] * self.wf.eval_unchecked(a[i].shock.u).w * a[i].shock.u_xi);
        let coef = shift_coefficient(&self.params);
        let xdot = if self.scheme.couple_shift { coef * integral } else { T::zero() };
        if !xdot.is_finite() {
            return Err(Error::BlowUp { t: self.state.t.as_f64(), detail: "non-finite shift rate".into() });
        }
        let phi_max = phi.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let outside = a[0].shock.gap_left + a[a.len() - 1].shock.gap_right;
        Ok(ShiftRate { xdot, captured_mass: captured, tail_bound: coef * phi_max * self.wf.sup() * outside })
    }

    /// Stable step for the current field.
    pub fn stable_dt(&self) -> T {
        self.disc.stable_dt(&self.state.u, self.scheme.cfl)
    }

    /// One step of at most `max_dt`.
    pub fn step_limited(&mut self, max_dt: T) -> Result<StepReport<T>> {
        let limit = self.stable_dt();
        let dt = match self.scheme.fixed_dt {
            Some(dt) => {
                let hard = self.disc.stable_dt(&self.state.u, T::one());
                if dt > hard {
                    return Err(Error::Cfl { dt: dt.as_f64(), limit: hard.as_f64() });
                }
                dt.min(max_dt)
            }
            None => limit.min(max_dt),
        };
        if !(dt > T::zero()) {
            return Err(Error::Domain(format!("non-positive time step {}", dt)));
        }
        let xdot = self.state.rate.xdot;
        let (t, x) = (self.state.t, self.state.shift.x);
        let x_next = x + dt * xdot;
        let n = self.grid.n;
        let mut h0 = self.hints[0];
        let mut hn = self.hints[n];
        let left = self.ansatz.eval_hinted(t + dt, self.grid.nodes[0], x_next, &mut h0)?.value;
        let right = self.ansatz.eval_hinted(t + dt, self.grid.nodes[n], x_next, &mut hn)?.value;
        let report = self.heun.step(&mut self.disc, &self.grid.nodes, &mut self.state.u, t, dt, (left, right), None);
        self.state.shift.advance(xdot, dt)?;
        self.state.t = self.state.shift.t;
        self.state.steps += 1;
        let threshold = self.scheme.blowup_threshold;
        if let Some((i, v)) = self.state.u.iter().enumerate().find(|(_, v)| !(v.abs() <= threshold)) {
            return Err(Error::BlowUp {
                t: self.state.t.as_f64(),
                detail: format!("u = {} at xi = {}", v, self.grid.nodes[i]),
            });
        }
        self.refresh()?;
        Ok(report)
    }

    pub fn step(&mut self) -> Result<StepReport<T>> {
        self.step_limited(T::infinity())
    }

    /// Steps until `t_target`, landing on it exactly.
    pub fn advance_to(&mut self, t_target: T) -> Result<()> {
        let eps = T::lit(1e-12) * T::one().max(t_target.abs());
        while t_target - self.state.t > eps {
            self.step_limited(t_target - self.state.t)?;
        }
        Ok(())
    }

    /// Runs to the configured end time, calling `observer` at `t = 0` and at every output time.
    pub fn run_with<F>(&mut self, mut observer: F) -> Result<()>
    where
        F: FnMut(&Simulation<T>) -> Result<()>,
    {
        observer(self)?;
        let mut k = 1usize;
        loop {
            let target = (self.scheme.output_interval * T::from_usize_exact(k)).min(self.scheme.end_time);
            if target <= self.state.t {
                break;
            }
            self.advance_to(target)?;
            observer(self)?;
            if target >= self.scheme.end_time {
                break;
            }
            k += 1;
        }
        Ok(())
    }
}
