use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{forward_transform, GridFunction};

/// Smoothness index `s` of the `H^s = H^{s,2}` norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SobolevIndex {
    s: f64,
}

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::domain(format!("Sobolev index must be >= 0, got {s}")));
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

/// `(|box| Σ_k (1 + |ξ_k|²)^s |û_k|²)^{1/2}`; at `s = 0` this is the discrete
/// `L²` norm by Parseval.
pub fn hs_norm(u: &GridFunction, idx: &SobolevIndex) -> Result<f64> {
    let spec = forward_transform(u)?;
    let d = u.domain();
    let yw = d.y_axis().fft_wavenumbers();
    let xw = d.x_axis().map_or_else(|| vec![0.0], |g| g.fft_wavenumbers());
    let volume: f64 = d.axes().iter().map(|g| 2.0 * g.half_length()).product();
    let c = spec.coefficients();
    let n = yw.len();
    let mut acc = 0.0;
    for (r, kx) in xw.iter().enumerate() {
        for (m, ky) in yw.iter().enumerate() {
            acc += (1.0 + kx * kx + ky * ky).powf(idx.s) * c[r * n + m].norm_sqr();
        }
    }
    Ok((volume * acc).sqrt())
}
