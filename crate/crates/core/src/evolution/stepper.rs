use num_complex::Complex64;

use super::initial::InitialData;
use super::trajectory::{Scheme, Trajectory};
use crate::error::{Error, Result};
use crate::numerics::{Domain, FourierPlan, GridFunction};
use crate::ode::{exact_solution, NonlinearityParams};

/// Fewest grid points allowed across the support radius of the data.
pub const MIN_POINTS_PER_RADIUS: f64 = 32.0;

/// One Strang step: half exact nonlinear flow, the linear multiplier
/// `exp(−dt·e^{iθ}|ξ|²)`, half exact nonlinear flow.
#[derive(Clone, Debug)]
pub struct SpectralStepper {
    params: NonlinearityParams,
    domain: Domain,
    plan: FourierPlan,
    multiplier: Vec<Complex64>,
    dt: f64,
}

impl SpectralStepper {
    pub fn new(params: NonlinearityParams, domain: Domain, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
        }
        let rot = Complex64::from_polar(1.0, params.theta());
        let yw = domain.y_axis().fft_wavenumbers();
        let xw = domain.x_axis().map_or_else(|| vec![0.0], |g| g.fft_wavenumbers());
        let multiplier = xw
            .iter()
            .flat_map(|kx| yw.iter().map(move |ky| kx * kx + ky * ky))
            .map(|k2| (-rot * (dt * k2)).exp())
            .collect();
        Ok(Self {
            params,
            domain,
            plan: FourierPlan::new(domain),
            multiplier,
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    fn nonlinear_half(&self, buf: &mut [Complex64], t: f64) -> Result<()> {
        if self.params.is_linear() {
            return Ok(());
        }
        let half = 0.5 * self.dt;
        for (idx, z) in buf.iter_mut().enumerate() {
            *z = exact_solution(&self.params, *z, half).map_err(|e| match e {
                Error::BlowUp { .. } => Error::BlowUp {
                    time: t + self.dt,
                    location: Some(self.domain.point(idx).1),
                },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Advances `buf` from time `t` to `t + dt` in place.
    pub fn advance(&self, buf: &mut [Complex64], t: f64) -> Result<()> {
        if buf.len() != self.domain.len() {
            return Err(Error::SizeMismatch {
                expected: self.domain.len(),
                found: buf.len(),
            });
        }
        self.nonlinear_half(buf, t)?;
        self.plan.forward_in_place(buf);
        for (c, m) in buf.iter_mut().zip(&self.multiplier) {
            *c *= m;
        }
        self.plan.inverse_in_place(buf);
        self.nonlinear_half(buf, t)
    }
}

/// A single Strang step of size `dt`.
pub fn step(params: &NonlinearityParams, u: &GridFunction, dt: f64) -> Result<GridFunction> {
    let stepper = SpectralStepper::new(*params, *u.domain(), dt)?;
    let mut buf = u.values().to_vec();
    stepper.advance(&mut buf, 0.0)?;
    GridFunction::new(*u.domain(), buf)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Record every this many steps (the final step is always recorded).
    pub snapshot_every: usize,
    /// Replace `u(x', y)` by `(u(x', y) − u(x', −y))/2` after every step.
    pub project_odd: bool,
    /// Blow-up is declared once `max|u|` exceeds this multiple of `max|φ|`.
    pub blowup_factor: f64,
    /// Return the trajectory up to blow-up instead of an error.
    pub allow_blowup: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            snapshot_every: 1,
            project_odd: true,
            blowup_factor: 1e6,
            allow_blowup: false,
        }
    }
}

pub fn solve(
    params: &NonlinearityParams,
    phi: &InitialData,
    domain: &Domain,
    t_final: f64,
    dt: f64,
    snapshot_every: usize,
) -> Result<Trajectory> {
    let opts = SolverOptions {
        snapshot_every,
        ..SolverOptions::default()
    };
    solve_with(params, phi, domain, t_final, dt, &opts)
}

pub fn solve_with(
    params: &NonlinearityParams,
    phi: &InitialData,
    domain: &Domain,
    t_final: f64,
    dt: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    for g in domain.axes() {
        let per_radius = phi.support_radius() / g.spacing();
        if per_radius < MIN_POINTS_PER_RADIUS {
            return Err(Error::Resolution(format!(
                "{per_radius:.1} points across the support radius; need {MIN_POINTS_PER_RADIUS}"
            )));
        }
    }
    let u0 = phi.sample(domain)?;
    solve_from(params, u0, t_final, dt, opts)
}

/// Integrates from sampled data `u0` to `t_final` in steps of `dt`.
pub fn solve_from(
    params: &NonlinearityParams,
    u0: GridFunction,
    t_final: f64,
    dt: f64,
    opts: &SolverOptions,
) -> Result<Trajectory> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::StepSize(format!("final time must be positive, got {t_final}")));
    }
    let stepper = SpectralStepper::new(*params, *u0.domain(), dt)?;
    let steps = (t_final / dt).round();
    if steps < 1.0 || (steps * dt - t_final).abs() > 1e-9 * t_final {
        return Err(Error::StepSize(format!("T = {t_final} is not a multiple of dt = {dt}")));
    }
    if opts.snapshot_every == 0 {
        return Err(Error::domain("snapshot_every must be at least 1"));
    }
    let steps = steps as usize;
    let domain = *u0.domain();
    let bound = opts.blowup_factor * u0.sup_norm();
    let mut times = vec![0.0];
    let mut snapshots = vec![u0.clone()];
    let mut buf = u0.into_values();
    let mut blowup = None;
    for k in 0..steps {
        let t = k as f64 * dt;
        let t_next = (k + 1) as f64 * dt;
        let outcome = stepper.advance(&mut buf, t).and_then(|()| {
            let (mut worst, mut at) = (0.0f64, 0usize);
            for (i, z) in buf.iter().enumerate() {
                let r = z.norm();
                if !r.is_finite() || r > worst {
                    worst = r;
                    at = i;
                }
                if !r.is_finite() {
                    break;
                }
            }
            if !worst.is_finite() || worst > bound {
                Err(Error::BlowUp {
                    time: t_next,
                    location: Some(domain.point(at).1),
                })
            } else {
                Ok(())
            }
        });
        match outcome {
            Ok(()) => {}
            Err(Error::BlowUp { time, location }) => {
                if opts.allow_blowup {
                    blowup = Some(time);
                    break;
                }
                return Err(Error::BlowUp { time, location });
            }
            Err(e) => return Err(e),
        }
        if opts.project_odd {
            let mut u = GridFunction::from_raw(domain, std::mem::take(&mut buf));
            u.project_odd();
            buf = u.into_values();
        }
        if (k + 1) % opts.snapshot_every == 0 || k + 1 == steps {
            times.push(t_next);
            snapshots.push(GridFunction::new(domain, buf.clone())?);
        }
    }
    Trajectory::new(*params, domain, times, snapshots, dt, Scheme::StrangExactNl, blowup)
}
