//! Numerical laboratory for the loss of spatial regularity in semilinear
//! parabolic and dispersive equations of the form
//!
//! ```text
//! u_t = e^{iθ} Δu + λ |u|^α u
//! ```
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: grids, adaptive quadrature, Γ and Gaussian moments,
//!   discrete Fourier transforms and log-log regression.
//! - [`ode`]: exact and numerical solutions of `w_t = λ|w|^α w + h`, the
//!   integrating-factor representation of `∂_y w`, and the Hölder defect probe.
//! - [`kernel`]: heat-kernel smoothing and the closed-form fifth derivative
//!   at the origin of the smoothed odd power `|y|^α y`.
//! - [`evolution`]: Strang-split pseudospectral solver on the periodic torus.
//! - [`diagnostics`]: Hölder seminorms, `H^s` norms, Duhamel divergence
//!   rates, the scaling transform and randomized inequality checks.
//! - [`io`]: the binary trajectory format and the key=value config parser.
//! - [`report`]: machine-readable diagnostics records.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod io;
pub mod kernel;
pub mod numerics;
pub mod ode;
pub mod report;

pub use error::{Error, Result};
pub use num_complex::Complex64;
