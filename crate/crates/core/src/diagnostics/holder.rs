use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::numerics::{loglog_fit, spectral_y_derivative, GridFunction, RegressionFit};

/// Exponent `ℓ` and pair-distance window of a Hölder seminorm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderIndex {
    ell: f64,
    window: f64,
}

impl HolderIndex {
    pub fn new(ell: f64, window: f64) -> Result<Self> {
        if !(ell > 0.0 && ell <= 1.0) {
            return Err(Error::domain(format!("Hölder exponent must lie in (0, 1], got {ell}")));
        }
        if !(window > 0.0 && window.is_finite()) {
            return Err(Error::domain(format!("window must be positive, got {window}")));
        }
        Ok(Self { ell, window })
    }

    /// Window of a quarter of the support radius.
    pub fn for_support(ell: f64, support_radius: f64) -> Result<Self> {
        Self::new(ell, 0.25 * support_radius)
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn window(&self) -> f64 {
        self.window
    }
}

/// The discrete sup and the first pair `(i, j)`, `i < j`, attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderValue {
    pub value: f64,
    pub pair: Option<(usize, usize)>,
}

/// `sup |u(x) − u(y)| / |x − y|^ℓ` over grid pairs with `0 < |x − y| ≤ window`.
/// On a plane the `y`-profile through `x' = 0` is used.
pub fn holder_seminorm(u: &GridFunction, idx: &HolderIndex) -> Result<HolderValue> {
    let d = u.domain();
    let g = d.y_axis();
    let h = g.spacing();
    if idx.window < 2.0 * h {
        return Err(Error::degenerate(format!(
            "window {} is below two grid spacings ({})",
            idx.window,
            2.0 * h
        )));
    }
    let row = u.row(d.origin_row());
    let reach = ((idx.window / h) * (1.0 + 1e-12)).floor() as usize;
    let mut best = HolderValue {
        value: 0.0,
        pair: None,
    };
    for i in 0..row.len() {
        for j in i + 1..row.len().min(i + reach + 1) {
            let q = (row[i] - row[j]).norm() / ((j - i) as f64 * h).powf(idx.ell);
            if q > best.value {
                best = HolderValue {
                    value: q,
                    pair: Some((i, j)),
                };
            }
        }
    }
    Ok(best)
}

/// Dyadic ladder `y_k = top·2^{-k}` down to `bottom` (default four spacings).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LadderSpec {
    pub top: f64,
    pub bottom: Option<f64>,
}

impl Default for LadderSpec {
    fn default() -> Self {
        Self {
            top: 0.25,
            bottom: None,
        }
    }
}

/// Increments of `∂³_y u` against `y = 0` and their power-law fits.
#[derive(Clone, Debug, Serialize)]
pub struct ThirdDerivativeScan {
    pub t: f64,
    pub ys: Vec<f64>,
    pub increments: Vec<f64>,
    /// `log q` against `log y`; slope ≈ α for the nonlinear problem.
    pub fit: RegressionFit,
    /// For each `β`, the fit of the difference quotient `q(y)/y^β` against
    /// the window `y`; slope ≈ α − β.
    pub beta_fits: Vec<(f64, RegressionFit)>,
}

pub fn third_derivative_holder_scan(traj: &Trajectory, t: f64, betas: &[f64]) -> Result<ThirdDerivativeScan> {
    third_derivative_holder_scan_with(traj, t, betas, &LadderSpec::default())
}

pub fn third_derivative_holder_scan_with(
    traj: &Trajectory,
    t: f64,
    betas: &[f64],
    ladder: &LadderSpec,
) -> Result<ThirdDerivativeScan> {
    if traj.domain().dimension() != 1 {
        return Err(Error::domain("third-derivative scan needs a one-dimensional trajectory"));
    }
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
        return Err(Error::domain(format!("beta must lie in (0, 1], got {b}")));
    }
    let u = traj.snapshot_at(t)?;
    if u.odd_asymmetry() > 1e-10 * u.sup_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Invariant("third-derivative scan needs odd data".into()));
    }
    let g = traj.domain().y_axis();
    let bottom = ladder.bottom.unwrap_or(4.0 * g.spacing());
    let idx: Vec<usize> = g
        .dyadic_ladder(ladder.top, 1.0)?
        .into_iter()
        .filter(|&j| g.coord(j) >= bottom * (1.0 - 1e-12))
        .collect();
    if idx.len() < 4 {
        return Err(Error::Resolution(format!("dyadic ladder has {} points; need 4", idx.len())));
    }
    let d3 = spectral_y_derivative(u, 3);
    let v = d3.values();
    let v0 = v[g.origin_index()];
    let ys: Vec<f64> = idx.iter().map(|&j| g.coord(j)).collect();
    let increments: Vec<f64> = idx.iter().map(|&j| (v[j] - v0).norm()).collect();
    let fit = loglog_fit(&ys, &increments)?;
    let beta_fits = betas
        .iter()
        .map(|&b| {
            let q: Vec<f64> = ys.iter().zip(&increments).map(|(y, q)| q / y.powf(b)).collect();
            loglog_fit(&ys, &q).map(|f| (b, f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThirdDerivativeScan {
        t,
        ys,
        increments,
        fit,
        beta_fits,
    })
}
