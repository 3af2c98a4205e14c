//! Numerical laboratory for the viscous conservation law `u_t + (u^3)_x = μ u_xx` around a
//! composite wave made of a degenerate (sonic) Oleinik shock and an attached rarefaction.
//!
//! Everything is generic over [`Scalar`] (`f32` or `f64`); the aliases below fix `f64`.

// `!(a > b)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ansatz;
pub mod diagnostics;
pub mod error;
pub mod export;
pub mod grid;
pub mod numerics;
pub mod scalar;
pub mod solver;
pub mod waves;
pub mod weight;

pub use error::{Error, ErrorClass, Result};
pub use scalar::Scalar;

pub type WaveParams = waves::WaveParameters<f64>;
pub type Profile = waves::ShockProfile<f64>;
pub type Rarefaction = waves::ApproxRarefaction<f64>;
pub type Fan = waves::ExactRarefaction<f64>;
pub type Weight = weight::WeightFunction<f64>;
pub type Ansatz = ansatz::CompositeAnsatz<f64>;
pub type Mesh = grid::Grid<f64>;
pub type Scheme = solver::SchemeConfig<f64>;
pub type Sim = solver::Simulation<f64>;
