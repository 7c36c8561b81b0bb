//! Pseudospectral solver for `u_t = e^{iθ}Δu + λ|u|^α u` on a periodic box,
//! with odd initial data and trajectory recording.

mod initial;
mod remainder;
mod stepper;
mod trajectory;

pub use initial::{make_odd_bump, InitialData, InitialKind};
pub use remainder::{eta_track, remainder_decomposition, EtaTrack, Remainder};
pub use stepper::{solve, solve_from, solve_with, step, SolverOptions, SpectralStepper};
pub use trajectory::{Scheme, Trajectory};
