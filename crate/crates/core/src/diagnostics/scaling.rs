use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{forward_transform, Grid1D, GridFunction};

/// Dilation `φ^μ(x) = μ^{2/α} φ(μx)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScalingParams {
    mu: f64,
    alpha: f64,
}

impl ScalingParams {
    pub fn new(mu: f64, alpha: f64) -> Result<Self> {
        if !(mu >= 1.0 && mu.is_finite()) {
            return Err(Error::domain(format!("dilation factor must be >= 1, got {mu}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { mu, alpha })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn amplitude(&self) -> f64 {
        self.mu.powf(2.0 / self.alpha)
    }
}

/// Where a dilated grid point `μ x_j` lands.
struct Target {
    /// Grid index when the point is a grid point.
    grid: Option<usize>,
    /// `e^{iξ_k μ x_j}` per FFT slot, or `None` outside `[−L, L)`.
    phases: Option<Vec<Complex64>>,
}

impl Target {
    fn spectral(&self, coeffs: &[Complex64]) -> Complex64 {
        self.phases
            .as_ref()
            .map_or(Complex64::new(0.0, 0.0), |p| p.iter().zip(coeffs).map(|(e, c)| e * c).sum())
    }
}

fn targets(g: &Grid1D, mu: f64) -> Vec<Target> {
    let n = g.n_points();
    let l = g.half_length();
    (0..n)
        .map(|j| {
            let target = mu * g.coord(j);
            if target < -l || target >= l {
                return Target { grid: None, phases: None };
            }
            let phases = (0..n)
                .map(|m| {
                    let k = g.signed_frequency(m);
                    let phase = g.wavenumber(k) * target;
                    // The Nyquist mode is real on the grid; keep its real part.
                    if 2 * k.unsigned_abs() == n {
                        Complex64::new(phase.cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, phase)
                    }
                })
                .collect();
            Target {
                grid: g.index_of(target),
                phases: Some(phases),
            }
        })
        .collect()
}

/// Resamples `μ^{2/α} φ(μ·)` on the grid of `phi`, by exact lookup where the
/// dilated point is a grid point and spectral interpolation elsewhere. Points
/// mapped outside the box get 0.
pub fn scaling_transform(phi: &GridFunction, params: &ScalingParams) -> Result<GridFunction> {
    let d = *phi.domain();
    let ny = d.y_axis().n_points();
    let ty = targets(&d.y_axis(), params.mu);
    let amp = params.amplitude();
    let coeffs = forward_transform(phi)?.coefficients().to_vec();
    let out = match d.x_axis() {
        None => ty
            .iter()
            .map(|t| match t.grid {
                Some(i) => phi.values()[i] * amp,
                None => t.spectral(&coeffs) * amp,
            })
            .collect(),
        Some(x) => {
            let nx = x.n_points();
            let tx = targets(&x, params.mu);
            // Sum over y-frequencies first for every x-frequency row.
            let mut partial = vec![Complex64::new(0.0, 0.0); nx * ny];
            for r in 0..nx {
                for (j, t) in ty.iter().enumerate() {
                    partial[r * ny + j] = t.spectral(&coeffs[r * ny..(r + 1) * ny]);
                }
            }
            let mut out = vec![Complex64::new(0.0, 0.0); nx * ny];
            for (i, a) in tx.iter().enumerate() {
                for (j, b) in ty.iter().enumerate() {
                    out[i * ny + j] = amp
                        * match (a.grid, b.grid, &a.phases) {
                            (Some(p), Some(q), _) => phi.values()[p * ny + q],
                            (_, _, None) => Complex64::new(0.0, 0.0),
                            (_, _, Some(ph)) => (0..nx).map(|r| ph[r] * partial[r * ny + j]).sum(),
                        };
                }
            }
            out
        }
    };
    GridFunction::new(d, out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingVerdict {
    /// The dilated data shrink in `H^s` while the blow-up time shrinks.
    Applies,
    DoesNotApply,
    /// Exponent zero within rounding.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct IllposednessReport {
    pub alpha: f64,
    pub dimension: u32,
    pub s: f64,
    /// `2/α + s − N/2`: `‖φ^μ‖_{Ḣ^s} = μ^{exponent}‖φ‖_{Ḣ^s}`.
    pub exponent: f64,
    pub verdict: ScalingVerdict,
    /// `T_max(φ^μ) = μ^{blowup_time_exponent} T_max(φ)`.
    pub blowup_time_exponent: f64,
    /// `N − 2s − 4/α`.
    pub margin: f64,
    /// `N > 11 + 4/α`.
    pub dimension_condition: bool,
}

pub fn illposedness_exponent_report(alpha: f64, dimension: u32, s: f64) -> Result<IllposednessReport> {
    if !(alpha > 0.0 && alpha.is_finite()) || !s.is_finite() || dimension == 0 {
        return Err(Error::domain("need alpha > 0, finite s and N >= 1"));
    }
    let n = dimension as f64;
    let exponent = 2.0 / alpha + s - n / 2.0;
    let verdict = if exponent.abs() <= 1e-12 {
        ScalingVerdict::Inconclusive
    } else if exponent < 0.0 {
        ScalingVerdict::Applies
    } else {
        ScalingVerdict::DoesNotApply
    };
    Ok(IllposednessReport {
        alpha,
        dimension,
        s,
        exponent,
        verdict,
        blowup_time_exponent: -2.0,
        margin: n - 2.0 * s - 4.0 / alpha,
        dimension_condition: n > 11.0 + 4.0 / alpha,
    })
}
