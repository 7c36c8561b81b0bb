use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent `α`, coupling `λ` and rotation angle `θ` of
/// `u_t = e^{iθ}Δu + λ|u|^α u`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsRecord", into = "ParamsRecord")]
pub struct NonlinearityParams {
    alpha: f64,
    lambda: Complex64,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
struct ParamsRecord {
    alpha: f64,
    lambda_re: f64,
    lambda_im: f64,
    theta: f64,
}

impl From<NonlinearityParams> for ParamsRecord {
    fn from(p: NonlinearityParams) -> Self {
        Self {
            alpha: p.alpha,
            lambda_re: p.lambda.re,
            lambda_im: p.lambda.im,
            theta: p.theta,
        }
    }
}

impl TryFrom<ParamsRecord> for NonlinearityParams {
    type Error = Error;
    fn try_from(r: ParamsRecord) -> Result<Self> {
        Self::from_parts(r.alpha, Complex64::new(r.lambda_re, r.lambda_im), r.theta)
    }
}

impl NonlinearityParams {
    /// As [`NonlinearityParams::new`], but `λ = 0` gives the linear control.
    pub fn from_parts(alpha: f64, lambda: Complex64, theta: f64) -> Result<Self> {
        if lambda == Complex64::new(0.0, 0.0) {
            Self::linear_control(alpha, theta)
        } else {
            Self::new(alpha, lambda, theta)
        }
    }

    pub fn new(alpha: f64, lambda: Complex64, theta: f64) -> Result<Self> {
        let p = Self::validated(alpha, lambda, theta)?;
        if lambda.norm() == 0.0 {
            return Err(Error::domain("lambda must be nonzero (use linear_control for λ = 0)"));
        }
        Ok(p)
    }

    /// `λ = 0`: the nonlinearity is switched off. Used as the smooth control
    /// in every experiment.
    pub fn linear_control(alpha: f64, theta: f64) -> Result<Self> {
        Self::validated(alpha, Complex64::new(0.0, 0.0), theta)
    }

    fn validated(alpha: f64, lambda: Complex64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")));
        }
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::domain("lambda must be finite"));
        }
        if !(theta.abs() <= FRAC_PI_2 * (1.0 + 1e-15)) {
            return Err(Error::domain(format!("theta must lie in [-π/2, π/2], got {theta}")));
        }
        Ok(Self {
            alpha,
            lambda,
            theta: theta.clamp(-FRAC_PI_2, FRAC_PI_2),
        })
    }

    /// Heat equation with real coupling `λ`.
    pub fn heat(alpha: f64, lambda: f64) -> Result<Self> {
        Self::new(alpha, Complex64::new(lambda, 0.0), 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_linear(&self) -> bool {
        self.lambda.norm() == 0.0
    }

    /// Blow-up time `1/(α|φ|^α Re λ)` of the pure ODE from value `φ`, if any.
    pub fn blowup_time(&self, phi_abs: f64) -> Option<f64> {
        let rate = self.alpha * phi_abs.powf(self.alpha) * self.lambda.re;
        (rate > 0.0).then(|| 1.0 / rate)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let one = Complex64::new(1.0, 0.0);
        assert!(NonlinearityParams::new(0.0, one, 0.0).is_err());
        assert!(NonlinearityParams::new(2.0, one, 0.0).is_err());
        assert!(NonlinearityParams::new(-1.0, one, 0.0).is_err());
        assert!(NonlinearityParams::new(0.5, Complex64::new(0.0, 0.0), 0.0).is_err());
        assert!(NonlinearityParams::new(0.5, one, 1.6).is_err());
        assert!(NonlinearityParams::new(0.5, one, -FRAC_PI_2).is_ok());
        assert!(NonlinearityParams::linear_control(0.5, 0.0).unwrap().is_linear());
    }

    #[test]
    fn serde_round_trip_revalidates() {
        let p = NonlinearityParams::new(0.75, Complex64::new(1.0, -2.0), 0.3).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<NonlinearityParams>(&s).unwrap(), p);
        let bad = r#"{"alpha":3.0,"lambda_re":1.0,"lambda_im":0.0,"theta":0.0}"#;
        assert!(serde_json::from_str::<NonlinearityParams>(bad).is_err());
    }

    #[test]
    fn blowup_time_only_for_positive_real_part() {
        let p = NonlinearityParams::heat(0.5, 1.0).unwrap();
        assert_eq!(p.blowup_time(1.0), Some(2.0));
        let q = NonlinearityParams::new(0.5, Complex64::new(-1.0, 1.0), 0.0).unwrap();
        assert_eq!(q.blowup_time(1.0), None);
    }
}
