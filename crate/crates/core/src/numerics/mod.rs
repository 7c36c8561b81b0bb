//! Numeric services shared by every other module.

mod fourier;
mod grid;
mod interp;
mod quadrature;
mod regression;
mod special;

pub use fourier::{forward_transform, inverse_transform, spectral_y_derivative, FourierPlan, Spectrum};
pub use grid::{Domain, Grid1D, GridFunction};
pub use interp::PeriodicInterpolator;
pub use quadrature::{adaptive_quadrature, adaptive_quadrature_real, Quadrature};
pub use regression::{linear_fit, loglog_fit, RegressionFit};
pub use special::{gamma_fn, gaussian_moment};

/// Half-width of the truncated integration range for `e^{-y²}`-weighted
/// integrals. The weight is below `1e-62` outside.
pub const GAUSSIAN_TRUNCATION: f64 = 12.0;
