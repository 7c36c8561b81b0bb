use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::Trajectory;
use crate::kernel::{c_alpha, fifth_derivative_with};
use crate::numerics::{
    loglog_fit, spectral_y_derivative, Domain, FourierPlan, GridFunction, PeriodicInterpolator, Quadrature,
    RegressionFit,
};

/// Quadrature tolerance for one time slice of `∂⁵_y NH`.
const SLICE_REL_TOL: f64 = 1e-9;
/// Stencil width of the interpolation used to evaluate a slice off-grid.
const INTERPOLATION_ORDER: usize = 8;
/// Shortest span of `τ − t`, in decades, accepted by the rate fit.
const MIN_DECADES: f64 = 1.45;

fn odd_power(alpha: f64, z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z * r.powf(alpha)
    }
}

/// Snapshots up to time `t` of a trajectory, and the evaluation times `τ > t`
/// of `NH(t, τ) = ∫_0^t e^{(τ−s)Δ}|u(s)|^α u(s) ds`.
#[derive(Clone, Debug)]
pub struct DuhamelProbe<'a> {
    traj: &'a Trajectory,
    t: f64,
    t_index: usize,
    tau_ladder: Vec<f64>,
    x_prime_window: f64,
}

impl<'a> DuhamelProbe<'a> {
    pub fn new(traj: &'a Trajectory, t: f64, tau_ladder: Vec<f64>, x_prime_window: f64) -> Result<Self> {
        let t_index = traj.time_index(t)?;
        if t_index == 0 {
            return Err(Error::domain("Duhamel integral needs t > 0"));
        }
        if tau_ladder.is_empty() || tau_ladder.iter().any(|&tau| !(tau > t && tau.is_finite())) {
            return Err(Error::domain("every τ must be finite and exceed t"));
        }
        if !(x_prime_window >= 0.0) {
            return Err(Error::domain("x' window must be non-negative"));
        }
        Ok(Self {
            traj,
            t,
            t_index,
            tau_ladder,
            x_prime_window,
        })
    }

    /// `τ = t + δ` for `count` geometrically spaced `δ ∈ [lo, hi]`.
    pub fn geometric_ladder(t: f64, lo: f64, hi: f64, count: usize) -> Vec<f64> {
        let r = (hi / lo).ln();
        (0..count)
            .map(|k| t + lo * (r * k as f64 / (count - 1).max(1) as f64).exp())
            .collect()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tau_ladder(&self) -> &[f64] {
        &self.tau_ladder
    }

    fn times(&self) -> &[f64] {
        &self.traj.times()[..=self.t_index]
    }

    fn weights(&self) -> Vec<f64> {
        let ts = self.times();
        let mut w = vec![0.0; ts.len()];
        for k in 1..ts.len() {
            let h = 0.5 * (ts[k] - ts[k - 1]);
            w[k - 1] += h;
            w[k] += h;
        }
        w
    }

    fn check_density(&self, tau: f64) -> Result<()> {
        let gap = self.times().windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        if gap > (tau - self.t) / 4.0 * (1.0 + 1e-9) {
            return Err(Error::InsufficientSnapshots(format!(
                "snapshot spacing {gap:e} exceeds (τ − t)/4 = {:e}",
                (tau - self.t) / 4.0
            )));
        }
        Ok(())
    }
}

/// `NH(t, τ)` on the grid by the trapezoidal rule over snapshots, each term
/// propagated with the heat multiplier `e^{−(τ−s)|ξ|²}`.
pub fn duhamel_integral(probe: &DuhamelProbe<'_>, tau: f64) -> Result<GridFunction> {
    let alpha = probe.traj.params().alpha();
    duhamel_integral_with(probe, tau, move |z| odd_power(alpha, z))
}

/// As [`duhamel_integral`] with an arbitrary pointwise integrand `f(u)`.
pub fn duhamel_integral_with(
    probe: &DuhamelProbe<'_>,
    tau: f64,
    f: impl Fn(Complex64) -> Complex64 + Sync,
) -> Result<GridFunction> {
    if !(tau > probe.t) {
        return Err(Error::domain("τ must exceed t"));
    }
    probe.check_density(tau)?;
    let domain = *probe.traj.domain();
    let plan = FourierPlan::new(domain);
    let k2 = squared_wavenumbers(&domain, true);
    let weights = probe.weights();
    let mut acc = vec![Complex64::new(0.0, 0.0); domain.len()];
    for (i, (&s, w)) in probe.times().iter().zip(&weights).enumerate() {
        let mut buf: Vec<Complex64> = probe.traj.snapshots()[i].values().iter().map(|&z| f(z)).collect();
        plan.forward_in_place(&mut buf);
        for ((a, b), k) in acc.iter_mut().zip(&buf).zip(&k2) {
            *a += b * (w * (-(tau - s) * k).exp());
        }
    }
    plan.inverse_in_place(&mut acc);
    GridFunction::new(domain, acc)
}

/// `|ξ|²` per coefficient; with `include_y = false` only the `x'` part.
fn squared_wavenumbers(domain: &Domain, include_y: bool) -> Vec<f64> {
    let yw = domain.y_axis().fft_wavenumbers();
    let xw = domain.x_axis().map_or_else(|| vec![0.0], |g| g.fft_wavenumbers());
    xw.iter()
        .flat_map(|kx| {
            yw.iter()
                .map(move |ky| kx * kx + if include_y { ky * ky } else { 0.0 })
        })
        .collect()
}

/// `∂⁵_y` at `y = 0` of `e^{(σ/4)∂²_y}[|ψ|^α ψ]`.
pub fn slice_fifth_derivative(profile: impl Fn(f64) -> Complex64, alpha: f64, sigma: f64) -> Result<Complex64> {
    fifth_derivative_with(
        |y| odd_power(alpha, profile(y)),
        sigma,
        &Quadrature::with_rel_tol(SLICE_REL_TOL),
    )
}

/// `∂⁵_y NH(t, τ, 0, 0)` across the `τ` ladder, its power-law fit and the
/// leading-order prediction.
#[derive(Clone, Debug, Serialize)]
pub struct DuhamelRate {
    pub t: f64,
    pub alpha: f64,
    /// `τ − t` for each rung.
    pub deltas: Vec<f64>,
    pub values: Vec<Complex64>,
    pub fit: RegressionFit,
    pub expected_slope: f64,
    pub eta0: Complex64,
    /// `(2/(2−α))·C_α·4^{−2+α/2}|η₀|^{α+1}`.
    pub predicted_constant: f64,
    /// `−K[(τ−t)^{−(2−α)/2} − τ^{−(2−α)/2}]` with `K` the predicted constant.
    pub predicted: Vec<f64>,
    /// `(iξ)⁵` differentiation of the grid `NH` at `y = 0`.
    pub spectral_values: Vec<Complex64>,
    pub spectral_fit: RegressionFit,
    /// Smallest `|∂⁵_y NH|` over `|x'| ≤ window` relative to `x' = 0`, at the
    /// smallest `τ − t` (1 on a line).
    pub window_min_ratio: f64,
}

impl DuhamelRate {
    pub fn slope_error(&self) -> f64 {
        (self.fit.slope - self.expected_slope).abs()
    }
}

/// Per-slice values `∂⁵_y e^{(τ−s)Δ}[|u(s)|^α u(s)]` at `y = 0` on transverse
/// row `row`, for every snapshot `s ≤ t`.
fn slice_values(probe: &DuhamelProbe<'_>, tau: f64, row: usize) -> Result<Vec<Complex64>> {
    let traj = probe.traj;
    let domain = *traj.domain();
    let g = domain.y_axis();
    let alpha = traj.params().alpha();
    let plan = (domain.dimension() == 2).then(|| FourierPlan::new(domain));
    let kx2 = squared_wavenumbers(&domain, false);
    probe
        .times()
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let sigma = 4.0 * (tau - s);
            let snap = &traj.snapshots()[i];
            match &plan {
                None => {
                    let it = PeriodicInterpolator::new(g, snap.row(0), INTERPOLATION_ORDER);
                    slice_fifth_derivative(|y| it.eval(y), alpha, sigma)
                }
                Some(plan) => {
                    // Transverse heat flow first, then the y-kernel on one row.
                    let mut buf: Vec<Complex64> = snap.values().iter().map(|&z| odd_power(alpha, z)).collect();
                    plan.forward_in_place(&mut buf);
                    for (b, k) in buf.iter_mut().zip(&kx2) {
                        *b *= (-(tau - s) * k).exp();
                    }
                    plan.inverse_in_place(&mut buf);
                    let n = g.n_points();
                    let line = &buf[row * n..(row + 1) * n];
                    let it = PeriodicInterpolator::new(g, line, INTERPOLATION_ORDER);
                    fifth_derivative_with(|y| it.eval(y), sigma, &Quadrature::with_rel_tol(SLICE_REL_TOL))
                }
            }
        })
        .collect()
}

fn time_integral(probe: &DuhamelProbe<'_>, tau: f64, row: usize) -> Result<Complex64> {
    probe.check_density(tau)?;
    let vals = slice_values(probe, tau, row)?;
    Ok(vals.iter().zip(probe.weights()).map(|(v, w)| v * w).sum())
}

pub fn duhamel_fifth_derivative_rate(probe: &DuhamelProbe<'_>) -> Result<DuhamelRate> {
    let traj = probe.traj;
    let domain = *traj.domain();
    let alpha = traj.params().alpha();
    let t = probe.t;
    let deltas: Vec<f64> = probe.tau_ladder.iter().map(|tau| tau - t).collect();
    if deltas.len() < 3 {
        return Err(Error::degenerate("rate fit needs at least 3 values of τ"));
    }
    let (lo, hi) = deltas.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &d| (a.min(d), b.max(d)));
    if (hi / lo).log10() < MIN_DECADES {
        return Err(Error::domain(format!(
            "τ − t spans {:.2} decades; need {MIN_DECADES}",
            (hi / lo).log10()
        )));
    }
    let row0 = domain.origin_row();
    let values = probe
        .tau_ladder
        .iter()
        .map(|&tau| time_integral(probe, tau, row0))
        .collect::<Result<Vec<_>>>()?;
    let mags: Vec<f64> = values.iter().map(|v| v.norm()).collect();
    let fit = loglog_fit(&deltas, &mags)?;

    let j0 = domain.y_axis().origin_index();
    let eta0 = spectral_y_derivative(&traj.snapshots()[0], 1).row(row0)[j0];
    let p = (2.0 - alpha) / 2.0;
    let predicted_constant =
        2.0 / (2.0 - alpha) * c_alpha(alpha)? * 4f64.powf(-2.0 + alpha / 2.0) * eta0.norm().powf(alpha + 1.0);
    let predicted = probe
        .tau_ladder
        .iter()
        .map(|&tau| -predicted_constant * ((tau - t).powf(-p) - tau.powf(-p)))
        .collect();

    let spectral_values = probe
        .tau_ladder
        .iter()
        .map(|&tau| Ok(spectral_y_derivative(&duhamel_integral(probe, tau)?, 5).row(row0)[j0]))
        .collect::<Result<Vec<_>>>()?;
    let spectral_mags: Vec<f64> = spectral_values.iter().map(|v| v.norm().max(f64::MIN_POSITIVE)).collect();
    let spectral_fit = loglog_fit(&deltas, &spectral_mags)?;

    let mut window_min_ratio = 1.0;
    if let Some(x) = domain.x_axis() {
        let i_min = deltas
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let tau = probe.tau_ladder[i_min];
        for r in 0..x.n_points() {
            if r != row0 && x.coord(r).abs() <= probe.x_prime_window {
                let v = time_integral(probe, tau, r)?;
                window_min_ratio = f64::min(window_min_ratio, v.norm() / mags[i_min]);
            }
        }
    }

    Ok(DuhamelRate {
        t,
        alpha,
        deltas,
        values,
        fit,
        expected_slope: -p,
        eta0,
        predicted_constant,
        predicted,
        spectral_values,
        spectral_fit,
        window_min_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{solve_from, Scheme, SolverOptions};
    use crate::numerics::Grid1D;
    use crate::ode::NonlinearityParams;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// `u(s, y) = η₀ y` at every snapshot.
    fn linear_profile_trajectory(alpha: f64, eta0: f64, times: &[f64]) -> Trajectory {
        let d = Domain::Line(Grid1D::new(1024, 4.0).unwrap());
        let u = GridFunction::from_fn(d, |_, y| c(eta0 * y, 0.0)).unwrap();
        Trajectory::new(
            NonlinearityParams::heat(alpha, 1.0).unwrap(),
            d,
            times.to_vec(),
            vec![u; times.len()],
            times[1] - times[0],
            Scheme::StrangExactNl,
            None,
        )
        .unwrap()
    }

    #[test]
    fn synthetic_slices_match_closed_form() {
        for alpha in [0.5, 1.5] {
            let eta0 = 2.7;
            let times: Vec<f64> = (0..=20).map(|k| k as f64 * 1e-3).collect();
            let traj = linear_profile_trajectory(alpha, eta0, &times);
            let tau = 0.0205;
            let probe = DuhamelProbe::new(&traj, 0.02, vec![tau], 0.0).unwrap();
            let vals = slice_values(&probe, tau, 0).unwrap();
            let ca = c_alpha(alpha).unwrap();
            for (v, s) in vals.iter().zip(&times) {
                let expect = -ca * (4.0 * (tau - s)).powf(-2.0 + alpha / 2.0) * eta0.powf(alpha + 1.0);
                assert!((v - c(expect, 0.0)).norm() < 1e-6 * expect.abs(), "alpha={alpha} s={s}");
            }
        }
    }

    #[test]
    fn integral_of_single_mode_matches_closed_form() {
        let alpha = 0.5;
        let p = NonlinearityParams::linear_control(alpha, 0.0).unwrap();
        let g = Grid1D::new(64, 4.0).unwrap();
        let xi = g.wavenumber(3);
        let d = Domain::Line(g);
        let u0 = GridFunction::from_fn(d, |_, y| c(0.0, xi * y).exp()).unwrap();
        let opts = SolverOptions {
            project_odd: false,
            ..SolverOptions::default()
        };
        let (t, tau) = (0.1, 0.15);
        let traj = solve_from(&p, u0, t, 1e-5, &opts).unwrap();
        let probe = DuhamelProbe::new(&traj, t, vec![tau], 0.0).unwrap();
        let nh = duhamel_integral(&probe, tau).unwrap();
        let k2 = xi * xi;
        let amp = (-tau * k2).exp() * (1.0 - (-alpha * k2 * t).exp()) / (alpha * k2);
        for (j, v) in nh.values().iter().enumerate() {
            let y = g.coord(j);
            assert!((v - c(0.0, xi * y).exp() * amp).norm() < 1e-8);
        }
    }

    #[test]
    fn integral_is_linear_in_the_integrand() {
        let p = NonlinearityParams::linear_control(0.5, 0.0).unwrap();
        let d = Domain::Line(Grid1D::new(128, 4.0).unwrap());
        let a = GridFunction::from_fn(d, |_, y| c(y * (-y * y).exp(), 0.0)).unwrap();
        let b = GridFunction::from_fn(d, |_, y| c((2.0 * y).sin() * (-y * y).exp(), y * (-2.0 * y * y).exp())).unwrap();
        let ab = GridFunction::new(d, a.values().iter().zip(b.values()).map(|(x, y)| x + y * 3.0).collect()).unwrap();
        let opts = SolverOptions::default();
        let run = |u: GridFunction| solve_from(&p, u, 0.01, 1e-4, &opts).unwrap();
        let (ta, tb, tab) = (run(a), run(b), run(ab));
        let nh = |tr: &Trajectory| {
            let probe = DuhamelProbe::new(tr, 0.01, vec![0.02], 0.0).unwrap();
            duhamel_integral_with(&probe, 0.02, |z| z).unwrap()
        };
        let (na, nb, nab) = (nh(&ta), nh(&tb), nh(&tab));
        for ((x, y), z) in na.values().iter().zip(nb.values()).zip(nab.values()) {
            assert!((x + y * 3.0 - z).norm() < 1e-12);
        }
    }

    #[test]
    fn odd_integrand_vanishes_on_axis() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 1e-3).collect();
        let traj = linear_profile_trajectory(0.5, 1.0, &times);
        let probe = DuhamelProbe::new(&traj, 0.01, vec![0.02], 0.0).unwrap();
        // The linear profile is odd except at the wrap point; restrict to a bump.
        let nh = duhamel_integral_with(&probe, 0.02, |z| z * (-z.norm_sqr()).exp()).unwrap();
        assert!(nh.values()[traj.domain().y_axis().origin_index()].norm() < 1e-13);
    }

    #[test]
    fn sparse_snapshots_are_rejected() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 1e-3).collect();
        let traj = linear_profile_trajectory(0.5, 1.0, &times);
        let probe = DuhamelProbe::new(&traj, 0.01, vec![0.011], 0.0).unwrap();
        assert!(matches!(duhamel_integral(&probe, 0.011), Err(Error::InsufficientSnapshots(_))));
        assert!(DuhamelProbe::new(&traj, 0.01, vec![0.005], 0.0).is_err());
    }
}
