//! The scalar ODE `w_t = λ|w|^α w + h` and its spatial derivative.
//!
//! Every grid point `y` carries an independent ODE; `v = ∂_y w` is advanced
//! by its own variational equation instead of by differencing `w`.

mod defect;
mod exact;
mod params;
mod perturbed;

pub use defect::{holder_defect, HolderDefect};
pub use exact::{exact_first_derivative, exact_second_derivative, exact_solution, nonlinearity};
pub use params::NonlinearityParams;
pub use perturbed::{
    integrate_perturbed, integrate_perturbed_with, integrating_factor, representation_check,
    scalar_blowup_time, Forcing, InitialProfile, IntegratingFactor, OdeOptions, OdeRun,
};
