//! Wave building blocks for the flux `f(u) = u^3`: Riemann classification, the degenerate
//! viscous shock profile, and the exact and smoothed rarefaction fans.

mod params;
mod rarefaction;
mod shock;

pub use params::{classify_riemann, WaveParameters, WavePattern};
pub use rarefaction::{
    approx_exact_sup_gap, rarefaction_decay_report, ApproxRarefaction, DecayFitRow, DecayReport, DecayRow,
    ExactRarefaction, RarefactionSample,
};
pub use shock::{shock_tail_bounds, ProfileOrigin, ProfileSample, ShockProfile, TailFit, TailSide};
