use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use cwave_core::solver::{Perturbation, SchemeConfig};
use cwave_core::waves::{ProfileOrigin, ShockProfile, WaveParameters};
use cwave_core::{Error, Mesh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ExperimentKind {
    Profile,
    Rarefaction,
    WeightAlgebra,
    Poincare,
    Interactions,
    Evolve,
    TheoremSuite,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Profile => "profile",
            ExperimentKind::Rarefaction => "rarefaction",
            ExperimentKind::WeightAlgebra => "weight_algebra",
            ExperimentKind::Poincare => "poincare",
            ExperimentKind::Interactions => "interactions",
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::TheoremSuite => "theorem_suite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveConfig {
    pub u_minus: f64,
    pub u_plus: f64,
    pub mu: f64,
    pub origin: ProfileOrigin<f64>,
    /// Root-finder tolerance for the profile and the rarefaction.
    pub tolerance: f64,
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self { u_minus: -2.0, u_plus: 1.1, mu: 1.0, origin: ProfileOrigin::ZeroCrossing, tolerance: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub xi_min: f64,
    pub xi_max: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { xi_min: -200.0, xi_max: 400.0, n: 6000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub xi_min: f64,
    pub xi_max: f64,
    pub samples: usize,
    pub tail_samples: usize,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        Self { xi_min: -50.0, xi_max: 5000.0, samples: 1000, tail_samples: 60 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RarefactionConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub times: usize,
    /// Points per snapshot in `rarefaction.csv`.
    pub x_samples: usize,
}

impl Default for RarefactionConfig {
    fn default() -> Self {
        Self { t_min: 10.0, t_max: 1e4, times: 13, x_samples: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightConfig {
    pub samples: usize,
}

impl Default for WeightConfig {
    fn default() -> Self {
        Self { samples: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareConfig {
    pub intervals: usize,
    pub trials: usize,
    pub modes: usize,
}

impl Default for PoincareConfig {
    fn default() -> Self {
        Self { intervals: 4096, trials: 1000, modes: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InteractionConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub times: usize,
    pub r_squared_threshold: f64,
    /// Allowed distance between fitted and target exponents.
    pub exponent_tolerance: f64,
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self { t_min: 100.0, t_max: 1e4, times: 11, r_squared_threshold: 0.95, exponent_tolerance: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    /// Keep every k-th output as a snapshot; 0 disables snapshots.
    pub snapshot_every: usize,
    pub contraction_slack: f64,
    pub trend_checkpoints: usize,
    /// Final sup error must fall below this fraction of its peak.
    pub peak_fraction: f64,
    /// Gaussian amplitudes for an extra smallness sweep (same centre and width as the
    /// configured Gaussian, or 0 and 1 otherwise). Empty disables the sweep.
    pub amplitude_sweep: Vec<f64>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self { snapshot_every: 50, contraction_slack: 1e-8, trend_checkpoints: 10, peak_fraction: 0.2, amplitude_sweep: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub wave: WaveConfig,
    pub grid: GridConfig,
    pub scheme: SchemeConfig<f64>,
    pub perturbation: Perturbation<f64>,
    pub output_dir: PathBuf,
    /// Seeds random perturbations and the random Poincaré sweep. Overrides the seed inside a
    /// `random_smooth` perturbation.
    pub seed: u64,
    /// Wall-clock cap for `theorem_suite`; other kinds ignore it.
    pub budget_seconds: f64,
    pub profile: ProfileConfig,
    pub rarefaction: RarefactionConfig,
    pub weight: WeightConfig,
    pub poincare: PoincareConfig,
    pub interactions: InteractionConfig,
    pub evolve: EvolveConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Profile,
            wave: WaveConfig::default(),
            grid: GridConfig::default(),
            scheme: SchemeConfig::default(),
            perturbation: Perturbation::Gaussian { amplitude: 0.05, center: 0.0, width: 1.0 },
            output_dir: PathBuf::from("cwave-out"),
            seed: 20240601,
            budget_seconds: 1800.0,
            profile: ProfileConfig::default(),
            rarefaction: RarefactionConfig::default(),
            weight: WeightConfig::default(),
            poincare: PoincareConfig::default(),
            interactions: InteractionConfig::default(),
            evolve: EvolveConfig::default(),
        }
    }
}

fn bad(msg: String) -> Error {
    Error::Config(msg)
}

fn positive(name: &str, v: f64) -> Result<(), Error> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {v}")))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<(), Error> {
    if v >= min {
        Ok(())
    } else {
        Err(bad(format!("{name} must be at least {min}, got {v}")))
    }
}

fn time_window(name: &str, lo: f64, hi: f64, count: usize, min_ratio: f64) -> Result<(), Error> {
    positive(&format!("{name}.t_min"), lo)?;
    if !(hi.is_finite() && hi / lo >= min_ratio * (1.0 - 1e-12)) {
        return Err(bad(format!("{name} window [{lo}, {hi}] must have t_max >= {min_ratio} t_min")));
    }
    at_least(&format!("{name}.times"), count, 3)
}

impl ExperimentConfig {
    /// Copies the top-level seed into a random perturbation so the manifest echoes what runs.
    pub fn apply_seed(&mut self) {
        if let Perturbation::RandomSmooth { seed, .. } = &mut self.perturbation {
            *seed = self.seed;
        }
    }

    pub fn wave_parameters(&self) -> Result<WaveParameters<f64>, Error> {
        WaveParameters::new(self.wave.u_minus, self.wave.u_plus, self.wave.mu)
    }

    pub fn mesh(&self) -> Result<Mesh, Error> {
        Mesh::new(self.grid.xi_min, self.grid.xi_max, self.grid.n)
    }

    fn needs_rarefaction(&self) -> bool {
        matches!(self.kind, ExperimentKind::Rarefaction | ExperimentKind::Interactions)
    }

    fn needs_grid(&self) -> bool {
        matches!(self.kind, ExperimentKind::Evolve | ExperimentKind::TheoremSuite)
    }

    /// Checks every precondition of the selected experiment without running it.
    pub fn validate(&self) -> Result<(), Error> {
        let params = self.wave_parameters()?;
        positive("wave.tolerance", self.wave.tolerance)?;
        let profile = ShockProfile::build(params, self.wave.origin, self.wave.tolerance)?;
        if self.needs_rarefaction() && !params.has_rarefaction() {
            return Err(bad(format!(
                "experiment '{}' needs a rarefaction (u_+ > u_m), got u_+ = {} = u_m",
                self.kind.name(),
                params.u_plus
            )));
        }
        if self.needs_grid() {
            let grid = self.mesh()?;
            grid.check_covers(&profile)?;
            self.scheme.validate()?;
            self.perturbation.validate()?;
            at_least("evolve.trend_checkpoints", self.evolve.trend_checkpoints, 2)?;
            if !(self.evolve.contraction_slack >= 0.0) {
                return Err(bad(format!("evolve.contraction_slack must be >= 0, got {}", self.evolve.contraction_slack)));
            }
            positive("evolve.peak_fraction", self.evolve.peak_fraction)?;
            if let Some(a) = self.evolve.amplitude_sweep.iter().find(|a| !a.is_finite()) {
                return Err(bad(format!("amplitude sweep entries must be finite, got {a}")));
            }
        }
        match self.kind {
            ExperimentKind::Profile | ExperimentKind::TheoremSuite => {
                if !(self.profile.xi_max > self.profile.xi_min) {
                    return Err(bad("profile.xi_max must exceed profile.xi_min".into()));
                }
                at_least("profile.samples", self.profile.samples, 2)?;
                at_least("profile.tail_samples", self.profile.tail_samples, 3)?;
            }
            _ => {}
        }
        if matches!(self.kind, ExperimentKind::Rarefaction | ExperimentKind::TheoremSuite) {
            let r = &self.rarefaction;
            if !(r.t_min >= 1.0) {
                return Err(bad(format!("rarefaction.t_min must be >= 1, got {}", r.t_min)));
            }
            time_window("rarefaction", r.t_min, r.t_max, r.times, 10.0)?;
            at_least("rarefaction.x_samples", r.x_samples, 2)?;
        }
        if matches!(self.kind, ExperimentKind::WeightAlgebra | ExperimentKind::TheoremSuite) {
            at_least("weight.samples", self.weight.samples, 100)?;
        }
        if matches!(self.kind, ExperimentKind::Poincare | ExperimentKind::TheoremSuite) {
            at_least("poincare.intervals", self.poincare.intervals, 2)?;
            if !self.poincare.intervals.is_multiple_of(2) {
                return Err(bad(format!("poincare.intervals must be even, got {}", self.poincare.intervals)));
            }
            at_least("poincare.modes", self.poincare.modes, 1)?;
        }
        if matches!(self.kind, ExperimentKind::Interactions | ExperimentKind::TheoremSuite) {
            let c = &self.interactions;
            time_window("interactions", c.t_min, c.t_max, c.times, 100.0)?;
            if !(c.r_squared_threshold > 0.0 && c.r_squared_threshold <= 1.0) {
                return Err(bad(format!("interactions.r_squared_threshold must lie in (0, 1], got {}", c.r_squared_threshold)));
            }
            positive("interactions.exponent_tolerance", c.exponent_tolerance)?;
        }
        if self.kind == ExperimentKind::TheoremSuite {
            positive("budget_seconds", self.budget_seconds)?;
        }
        Ok(())
    }
}
