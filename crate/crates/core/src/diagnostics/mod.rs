//! Regularity measurements on grid functions and trajectories.

mod appendix;
mod duhamel;
mod holder;
mod scaling;
mod sobolev;

pub use appendix::{appendix_inequality_checks, AppendixReport, InequalityRow};
pub use duhamel::{
    duhamel_fifth_derivative_rate, duhamel_integral, duhamel_integral_with, slice_fifth_derivative,
    DuhamelProbe, DuhamelRate,
};
pub use holder::{
    holder_seminorm, third_derivative_holder_scan, third_derivative_holder_scan_with, HolderIndex,
    HolderValue, LadderSpec, ThirdDerivativeScan,
};
pub use scaling::{
    illposedness_exponent_report, scaling_transform, IllposednessReport, ScalingParams, ScalingVerdict,
};
pub use sobolev::{hs_norm, SobolevIndex};
