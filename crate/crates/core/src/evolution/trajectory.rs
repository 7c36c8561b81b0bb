use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Domain, GridFunction};
use crate::ode::{NonlinearityParams, OdeRun};

/// Time integrator that produced a [`Trajectory`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Strang splitting with the exact nonlinear ODE flow.
    StrangExactNl,
    /// Pointwise RK4 of the ODE family (no spatial coupling).
    PointwiseRk4,
}

impl Scheme {
    pub fn code(self) -> u32 {
        match self {
            Scheme::StrangExactNl => 1,
            Scheme::PointwiseRk4 => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Scheme::StrangExactNl),
            2 => Some(Scheme::PointwiseRk4),
            _ => None,
        }
    }
}

/// Time-stamped snapshots of a field with solver metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    params: NonlinearityParams,
    domain: Domain,
    times: Vec<f64>,
    snapshots: Vec<GridFunction>,
    dt: f64,
    scheme: Scheme,
    blowup: Option<f64>,
}

impl Trajectory {
    pub fn new(
        params: NonlinearityParams,
        domain: Domain,
        times: Vec<f64>,
        snapshots: Vec<GridFunction>,
        dt: f64,
        scheme: Scheme,
        blowup: Option<f64>,
    ) -> Result<Self> {
        if times.len() != snapshots.len() {
            return Err(Error::SizeMismatch {
                expected: times.len(),
                found: snapshots.len(),
            });
        }
        if times.is_empty() {
            return Err(Error::degenerate("trajectory has no snapshots"));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("trajectory times must be finite and strictly increasing"));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::domain(format!("dt must be positive, got {dt}")));
        }
        if let Some(s) = snapshots.iter().find(|s| *s.domain() != domain) {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                found: s.domain().len(),
            });
        }
        if blowup.is_none() && snapshots.iter().any(GridFunction::is_blown_up) {
            return Err(Error::domain("blown-up snapshot in a trajectory without a blow-up time"));
        }
        Ok(Self {
            params,
            domain,
            times,
            snapshots,
            dt,
            scheme,
            blowup,
        })
    }

    pub fn params(&self) -> &NonlinearityParams {
        &self.params
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[GridFunction] {
        &self.snapshots
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn blowup_time(&self) -> Option<f64> {
        self.blowup
    }

    pub fn final_snapshot(&self) -> &GridFunction {
        self.snapshots.last().expect("trajectory is never empty")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory is never empty")
    }

    /// Index of the stored time within `1e-9·dt` of `t`.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * self.dt;
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or_else(|| Error::domain(format!("t = {t} is not a snapshot time")))
    }

    pub fn snapshot_at(&self, t: f64) -> Result<&GridFunction> {
        Ok(&self.snapshots[self.time_index(t)?])
    }

    /// Keeps snapshots with `t ≤ t_end`.
    pub fn truncated(&self, t_end: f64) -> Result<Self> {
        let keep = self.times.iter().take_while(|&&s| s <= t_end + 1e-9 * self.dt).count();
        Self::new(
            self.params,
            self.domain,
            self.times[..keep].to_vec(),
            self.snapshots[..keep].to_vec(),
            self.dt,
            self.scheme,
            self.blowup.filter(|&b| b <= t_end),
        )
    }
}

impl OdeRun {
    fn as_trajectory(&self, pick: impl Fn(usize) -> Vec<num_complex::Complex64>) -> Result<Trajectory> {
        let domain = Domain::Line(self.grid());
        let snaps = (0..self.times().len())
            .map(|i| GridFunction::new(domain, pick(i)))
            .collect::<Result<Vec<_>>>()?;
        Trajectory::new(
            *self.params(),
            domain,
            self.times().to_vec(),
            snaps,
            self.dt(),
            Scheme::PointwiseRk4,
            None,
        )
    }

    /// `w(t, y)` as a trajectory for persistence.
    pub fn w_trajectory(&self) -> Result<Trajectory> {
        self.as_trajectory(|i| self.w_at(i).to_vec())
    }

    /// `v(t, y) = ∂_y w(t, y)` as a trajectory for persistence.
    pub fn v_trajectory(&self) -> Result<Trajectory> {
        self.as_trajectory(|i| self.v_at(i).to_vec())
    }
}
