//! Small numerical kernels: bracketed root finding, quadrature and least-squares fits.

pub mod fit;
pub mod quadrature;
pub mod roots;
