use serde::Serialize;

use super::perturbed::OdeRun;
use crate::error::{Error, Result};
use crate::numerics::{loglog_fit, RegressionFit};

/// Increments `q(y) = |v(t,y) − v(t,0)|` on a dyadic ladder and their fits.
#[derive(Clone, Debug, Serialize)]
pub struct HolderDefect {
    pub t: f64,
    pub ys: Vec<f64>,
    pub increments: Vec<f64>,
    /// `log q` against `log y`; slope ≈ α when the derivative has a defect.
    pub fit: RegressionFit,
    /// For each `β`, the fit of `q/y^β` against `y` (slope ≈ α − β).
    pub exponent_fits: Vec<(f64, RegressionFit)>,
    /// `min_k q(y_k)/y_k^α`.
    pub liminf_proxy: f64,
    /// `t|λ||z|^{α+1}/2`, the lower bound the proxy is compared with.
    pub lower_bound_constant: f64,
}

/// Default ladder top inside the `[-1, 1)` window.
pub const DEFAULT_LADDER_TOP: f64 = 0.5;

pub fn holder_defect(run: &OdeRun, t: f64, exponents: &[f64]) -> Result<HolderDefect> {
    if let Some(b) = exponents.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
        return Err(Error::domain(format!("exponents must lie in (0, 1], got {b}")));
    }
    let i = run.time_index(t)?;
    let grid = run.grid();
    let top = DEFAULT_LADDER_TOP.min(0.5 * grid.half_length());
    let ladder = grid.dyadic_ladder(top, 4.0)?;
    let v = run.v_at(i);
    let v0 = v[grid.origin_index()];
    let (ys, increments): (Vec<f64>, Vec<f64>) = ladder
        .iter()
        .map(|&j| (grid.coord(j), (v[j] - v0).norm()))
        .filter(|&(_, q)| q > 0.0)
        .unzip();
    if ys.len() < 4 {
        return Err(Error::degenerate(format!(
            "holder defect needs 4 usable ladder points, found {}",
            ys.len()
        )));
    }
    let fit = loglog_fit(&ys, &increments)?;
    let exponent_fits = exponents
        .iter()
        .map(|&b| {
            let scaled: Vec<f64> = ys.iter().zip(&increments).map(|(y, q)| q / y.powf(b)).collect();
            loglog_fit(&ys, &scaled).map(|f| (b, f))
        })
        .collect::<Result<Vec<_>>>()?;
    let alpha = run.params().alpha();
    let liminf_proxy = ys
        .iter()
        .zip(&increments)
        .map(|(y, q)| q / y.powf(alpha))
        .fold(f64::INFINITY, f64::min);
    let lower_bound_constant = t * run.params().lambda().norm() * run.z0().norm().powf(alpha + 1.0) / 2.0;
    Ok(HolderDefect {
        t,
        ys,
        increments,
        fit,
        exponent_fits,
        liminf_proxy,
        lower_bound_constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Grid1D;
    use crate::ode::{exact_first_derivative, integrate_perturbed, Forcing, InitialProfile, NonlinearityParams};

    #[test]
    fn unperturbed_slope_matches_closed_form_increments() {
        let p = NonlinearityParams::heat(0.5, 1.0).unwrap();
        let g = Grid1D::new(256, 1.0).unwrap();
        let run = integrate_perturbed(&p, &InitialProfile::identity(), &Forcing::zero(), 0.05, g, 5e-5).unwrap();
        let d = holder_defect(&run, 0.05, &[0.5, 1.0]).unwrap();
        let v0 = exact_first_derivative(&p, 0.0, 0.05).unwrap();
        let oracle: Vec<f64> = d.ys.iter().map(|&y| (exact_first_derivative(&p, y, 0.05).unwrap() - v0).norm()).collect();
        let of = loglog_fit(&d.ys, &oracle).unwrap();
        assert!((d.fit.slope - of.slope).abs() < 1e-6);
        assert!((d.fit.slope - 0.5).abs() < 0.05);
        assert!((d.exponent_fits[0].1.slope - 0.0).abs() < 0.05);
        assert!(d.liminf_proxy >= d.lower_bound_constant);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = NonlinearityParams::heat(0.5, 1.0).unwrap();
        let g = Grid1D::new(64, 1.0).unwrap();
        let run = integrate_perturbed(&p, &InitialProfile::identity(), &Forcing::zero(), 0.01, g, 1e-5).unwrap();
        assert!(holder_defect(&run, 0.01, &[1.5]).is_err());
        assert!(holder_defect(&run, 0.0123, &[0.5]).is_err());
        // 64 points on [-1, 1): ladder 0.5..0.125 has only 3 rungs.
        assert!(matches!(holder_defect(&run, 0.01, &[0.5]), Err(Error::DegenerateInput(_))));
    }
}
