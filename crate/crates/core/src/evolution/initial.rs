use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Domain, GridFunction};

type Profile = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    OddBump1d,
    OddBump2d,
    Custom,
}

/// Initial data `φ(x', y)`, odd in `y`, supported in `|(x', y)| < R`.
#[derive(Clone)]
pub struct InitialData {
    kind: InitialKind,
    amplitude: f64,
    support_radius: f64,
    profile: Arc<Profile>,
}

impl std::fmt::Debug for InitialData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialData")
            .field("kind", &self.kind)
            .field("amplitude", &self.amplitude)
            .field("support_radius", &self.support_radius)
            .finish()
    }
}

/// `φ(x', y) = A·y·exp(−1/(1 − r²))` with `r² = (|x'|² + y²)/R²` inside the
/// ball and 0 outside, so `∂_yφ(0, 0) = A/e`.
pub fn make_odd_bump(dimension: usize, amplitude: f64, support_radius: f64) -> Result<InitialData> {
    let kind = match dimension {
        1 => InitialKind::OddBump1d,
        2 => InitialKind::OddBump2d,
        d => return Err(Error::domain(format!("dimension must be 1 or 2, got {d}"))),
    };
    if !(amplitude > 0.0 && amplitude.is_finite()) {
        return Err(Error::domain(format!("amplitude must be positive, got {amplitude}")));
    }
    if !(support_radius > 0.0 && support_radius.is_finite()) {
        return Err(Error::domain(format!("support radius must be positive, got {support_radius}")));
    }
    let r2inv = 1.0 / (support_radius * support_radius);
    let profile = move |xp: f64, y: f64| {
        let r2 = (xp * xp + y * y) * r2inv;
        if r2 >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        Complex64::new(amplitude * y * (-1.0 / (1.0 - r2)).exp(), 0.0)
    };
    Ok(InitialData {
        kind,
        amplitude,
        support_radius,
        profile: Arc::new(profile),
    })
}

impl InitialData {
    /// Arbitrary profile; it is odd-projected when sampled.
    pub fn custom(
        support_radius: f64,
        profile: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::domain(format!("support radius must be positive, got {support_radius}")));
        }
        Ok(Self {
            kind: InitialKind::Custom,
            amplitude: 1.0,
            support_radius,
            profile: Arc::new(profile),
        })
    }

    pub fn kind(&self) -> InitialKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn value(&self, xp: f64, y: f64) -> Complex64 {
        (self.profile)(xp, y)
    }

    /// `∂_yφ(0, 0)`: exact for the bump kinds, centred differences otherwise.
    pub fn dy_at_origin(&self) -> Complex64 {
        match self.kind {
            InitialKind::OddBump1d | InitialKind::OddBump2d => {
                Complex64::new(self.amplitude * (-1.0f64).exp(), 0.0)
            }
            InitialKind::Custom => {
                let h = 1e-5 * self.support_radius;
                (self.value(0.0, h) - self.value(0.0, -h)) / (2.0 * h)
            }
        }
    }

    /// Samples on `domain`; the box must satisfy `L ≥ 4R` on every axis.
    pub fn sample(&self, domain: &Domain) -> Result<GridFunction> {
        let expected = match self.kind {
            InitialKind::OddBump1d => Some(1),
            InitialKind::OddBump2d => Some(2),
            InitialKind::Custom => None,
        };
        if let Some(d) = expected {
            if domain.dimension() != d {
                return Err(Error::domain(format!(
                    "{d}-dimensional data on a {}-dimensional grid",
                    domain.dimension()
                )));
            }
        }
        if 4.0 * self.support_radius > domain.min_half_length() {
            return Err(Error::domain(format!(
                "support radius {} needs a box half-length of at least {}",
                self.support_radius,
                4.0 * self.support_radius
            )));
        }
        let mut u = GridFunction::from_fn(*domain, |xp, y| self.value(xp, y))?;
        if self.kind == InitialKind::Custom {
            u.project_odd();
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid1D;

    #[test]
    fn bump_examples() {
        let b = make_odd_bump(1, 1.0, 1.0).unwrap();
        assert_eq!(b.value(0.0, 0.0).norm(), 0.0);
        assert_eq!(b.value(0.0, 0.5), -b.value(0.0, -0.5));
        assert!((b.dy_at_origin().re - 0.367_879_4).abs() < 1e-7);
        let h = 1e-5;
        let fd = (b.value(0.0, h) - b.value(0.0, -h)) / (2.0 * h);
        assert!((fd - b.dy_at_origin()).norm() < 1e-9);
        assert!(b.value(0.0, 1.0).norm() == 0.0 && b.value(0.0, 3.0).norm() == 0.0);
        assert!(make_odd_bump(3, 1.0, 1.0).is_err());
        assert!(make_odd_bump(1, 0.0, 1.0).is_err());
    }

    #[test]
    fn sampling_checks_box_and_dimension() {
        let b = make_odd_bump(1, 2.0, 1.0).unwrap();
        let small = Domain::Line(Grid1D::new(256, 3.0).unwrap());
        assert!(matches!(b.sample(&small), Err(Error::Domain(_))));
        let line = Domain::Line(Grid1D::new(256, 4.0).unwrap());
        let u = b.sample(&line).unwrap();
        assert_eq!(u.odd_asymmetry(), 0.0);
        let plane = Domain::Plane {
            x: Grid1D::new(64, 4.0).unwrap(),
            y: Grid1D::new(64, 4.0).unwrap(),
        };
        assert!(b.sample(&plane).is_err());
        let b2 = make_odd_bump(2, 2.0, 1.0).unwrap();
        assert_eq!(b2.sample(&plane).unwrap().odd_asymmetry(), 0.0);
    }
}
