use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{Domain, GridFunction};
use crate::error::{Error, Result};

/// Discrete Fourier coefficients in FFT slot order, normalised so that
/// `u_j = Σ_k û_k e^{i ξ_k x_j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    domain: Domain,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(domain: Domain, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                found: coefficients.len(),
            });
        }
        Ok(Self {
            domain,
            coefficients,
        })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Coefficient of signed frequency `k` along `y` (row `row` in the plane,
    /// where rows are indexed by FFT slot of the `x'` frequency).
    pub fn coefficient(&self, row: usize, k: isize) -> Option<Complex64> {
        let y = self.domain.y_axis();
        let slot = y.slot_of(k)?;
        self.coefficients.get(row * y.n_points() + slot).copied()
    }

    /// Multiplies every coefficient by `m(ξ_{x'}, ξ_y)`.
    pub fn apply_multiplier(&mut self, m: impl Fn(f64, f64) -> Complex64) {
        let yw = self.domain.y_axis().fft_wavenumbers();
        let xw = self
            .domain
            .x_axis()
            .map_or_else(|| vec![0.0], |g| g.fft_wavenumbers());
        let n = yw.len();
        for (r, &kx) in xw.iter().enumerate() {
            for (c, &ky) in yw.iter().enumerate() {
                self.coefficients[r * n + c] *= m(kx, ky);
            }
        }
    }
}

/// Cached forward and inverse transforms for one [`Domain`].
#[derive(Clone)]
pub struct FourierPlan {
    domain: Domain,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    fwd_x: Option<Arc<dyn Fft<f64>>>,
    inv_x: Option<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for FourierPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierPlan").field("domain", &self.domain).finish()
    }
}

impl FourierPlan {
    pub fn new(domain: Domain) -> Self {
        let mut planner = FftPlanner::new();
        let ny = domain.y_axis().n_points();
        let (fwd_x, inv_x) = match domain.x_axis() {
            Some(g) => (
                Some(planner.plan_fft_forward(g.n_points())),
                Some(planner.plan_fft_inverse(g.n_points())),
            ),
            None => (None, None),
        };
        Self {
            domain,
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
            fwd_x,
            inv_x,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// In-place forward transform, including the `1/N` normalisation and the
    /// phase shift from the grid starting at `-L`.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.domain.len());
        self.fwd_y.process(buf);
        if let Some(fx) = &self.fwd_x {
            self.along_x(buf, fx);
        }
        let scale = 1.0 / self.domain.len() as f64;
        self.shift_phase(buf, scale);
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.domain.len());
        self.shift_phase(buf, 1.0);
        self.inv_y.process(buf);
        if let Some(ix) = &self.inv_x {
            self.along_x(buf, ix);
        }
    }

    // Storage starts at x = -L, so slot k carries a factor (-1)^k.
    fn shift_phase(&self, buf: &mut [Complex64], scale: f64) {
        let y = self.domain.y_axis();
        let n = y.n_points();
        let rows = self.domain.rows();
        for r in 0..rows {
            let kx = self.domain.x_axis().map_or(0, |g| g.signed_frequency(r));
            for c in 0..n {
                let k = y.signed_frequency(c) + kx;
                let sign = if k.rem_euclid(2) == 0 { scale } else { -scale };
                buf[r * n + c] *= sign;
            }
        }
    }

    fn along_x(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let ny = self.domain.y_axis().n_points();
        let nx = self.domain.rows();
        let mut t = vec![Complex64::new(0.0, 0.0); buf.len()];
        for r in 0..nx {
            for c in 0..ny {
                t[c * nx + r] = buf[r * ny + c];
            }
        }
        fft.process(&mut t);
        for r in 0..nx {
            for c in 0..ny {
                buf[r * ny + c] = t[c * nx + r];
            }
        }
    }

    pub fn forward(&self, u: &GridFunction) -> Result<Spectrum> {
        self.check(u.domain())?;
        let mut buf = u.values().to_vec();
        self.forward_in_place(&mut buf);
        Ok(Spectrum {
            domain: self.domain,
            coefficients: buf,
        })
    }

    pub fn inverse(&self, s: &Spectrum) -> Result<GridFunction> {
        self.check(s.domain())?;
        let mut buf = s.coefficients.clone();
        self.inverse_in_place(&mut buf);
        GridFunction::new(self.domain, buf)
    }

    fn check(&self, d: &Domain) -> Result<()> {
        if *d != self.domain {
            return Err(Error::SizeMismatch {
                expected: self.domain.len(),
                found: d.len(),
            });
        }
        Ok(())
    }
}

/// `∂_y^order u` by Fourier differentiation along the `y` axis only. For odd
/// orders the Nyquist mode is dropped so real odd data stay real and odd.
pub fn spectral_y_derivative(u: &GridFunction, order: u32) -> GridFunction {
    let y = u.domain().y_axis();
    let n = y.n_points();
    let plan = FourierPlan::new(Domain::Line(y));
    let factors: Vec<Complex64> = (0..n)
        .map(|m| {
            let k = y.signed_frequency(m);
            if order % 2 == 1 && k == -(n as isize) / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, y.wavenumber(k)).powu(order)
            }
        })
        .collect();
    let mut out = u.values().to_vec();
    for row in out.chunks_mut(n) {
        plan.forward_in_place(row);
        for (c, f) in row.iter_mut().zip(&factors) {
            *c *= f;
        }
        plan.inverse_in_place(row);
    }
    GridFunction::from_raw(*u.domain(), out)
}

pub fn forward_transform(u: &GridFunction) -> Result<Spectrum> {
    FourierPlan::new(*u.domain()).forward(u)
}

pub fn inverse_transform(s: &Spectrum) -> Result<GridFunction> {
    FourierPlan::new(*s.domain()).inverse(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid1D;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_mode_lands_in_its_slot() {
        let g = Grid1D::new(32, 3.0).unwrap();
        let d = Domain::Line(g);
        for k in [-16isize, -5, 0, 1, 7, 15] {
            let xi = g.wavenumber(k);
            let u = GridFunction::from_fn(d, |_, y| (c(0.0, xi * y)).exp() * 2.5).unwrap();
            let s = forward_transform(&u).unwrap();
            for m in -16..16 {
                let expect = if m == k { 2.5 } else { 0.0 };
                assert!((s.coefficient(0, m).unwrap() - c(expect, 0.0)).norm() < 1e-12, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn round_trip_plane() {
        let d = Domain::Plane {
            x: Grid1D::new(16, 2.0).unwrap(),
            y: Grid1D::new(32, 1.5).unwrap(),
        };
        let u = GridFunction::from_fn(d, |x, y| c((x * y).sin() + x, (PI * y).cos() * x * x)).unwrap();
        let back = inverse_transform(&forward_transform(&u).unwrap()).unwrap();
        assert!(u.max_abs_diff(&back).unwrap() < 1e-12);
    }

    #[test]
    fn plane_mode_phase() {
        let gx = Grid1D::new(16, 2.0).unwrap();
        let gy = Grid1D::new(16, 1.0).unwrap();
        let d = Domain::Plane { x: gx, y: gy };
        let (kx, ky) = (3isize, -2isize);
        let u = GridFunction::from_fn(d, |x, y| c(0.0, gx.wavenumber(kx) * x + gy.wavenumber(ky) * y).exp()).unwrap();
        let s = forward_transform(&u).unwrap();
        let row = gx.slot_of(kx).unwrap();
        assert!((s.coefficient(row, ky).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn y_derivative_of_smooth_profile() {
        let d = Domain::Plane {
            x: Grid1D::new(8, 1.0).unwrap(),
            y: Grid1D::new(128, 8.0).unwrap(),
        };
        let u = GridFunction::from_fn(d, |x, y| c((1.0 + x) * y * (-y * y).exp(), 0.0)).unwrap();
        let d1 = spectral_y_derivative(&u, 1);
        let d3 = spectral_y_derivative(&u, 3);
        for idx in [5usize, 300, 700, 1000] {
            let (x, y) = d.point(idx);
            let g = (-y * y).exp();
            let e1 = (1.0 + x) * (1.0 - 2.0 * y * y) * g;
            let e3 = (1.0 + x) * (-6.0 + 24.0 * y * y - 8.0 * y.powi(4)) * g;
            assert!((d1.values()[idx] - c(e1, 0.0)).norm() < 1e-10);
            assert!((d3.values()[idx] - c(e3, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn parseval() {
        let g = Grid1D::new(64, 2.0).unwrap();
        let d = Domain::Line(g);
        let u = GridFunction::from_fn(d, |_, y| c((3.0 * y).sin() + y, (y * y).cos())).unwrap();
        let s = forward_transform(&u).unwrap();
        let lhs: f64 = u.values().iter().map(|z| z.norm_sqr()).sum::<f64>() / 64.0;
        let rhs: f64 = s.coefficients().iter().map(|z| z.norm_sqr()).sum();
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn rejects_foreign_domain() {
        let a = Domain::Line(Grid1D::new(16, 1.0).unwrap());
        let b = Domain::Line(Grid1D::new(32, 1.0).unwrap());
        let plan = FourierPlan::new(a);
        assert!(plan.forward(&GridFunction::zeros(b)).is_err());
    }
}
