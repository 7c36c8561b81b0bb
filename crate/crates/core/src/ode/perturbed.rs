use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::params::NonlinearityParams;
use crate::error::{Error, Result};
use crate::numerics::Grid1D;

type ProfileFn = dyn Fn(f64) -> Complex64 + Send + Sync;
type ForcingFn = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

/// Step for centred differences when no analytic derivative is supplied.
const FD_STEP: f64 = 1e-5;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Initial data `φ(y)` with an optional analytic derivative.
#[derive(Clone)]
pub struct InitialProfile {
    label: String,
    value: Arc<ProfileFn>,
    derivative: Option<Arc<ProfileFn>>,
}

impl std::fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InitialProfile").field("label", &self.label).finish()
    }
}

impl InitialProfile {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(f),
            derivative: None,
        }
    }

    pub fn with_derivative(mut self, df: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }

    /// `φ(y) = y`.
    pub fn identity() -> Self {
        Self::new("y", |y| Complex64::new(y, 0.0)).with_derivative(|_| Complex64::new(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Self::new("0", |_| ZERO).with_derivative(|_| ZERO)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, y: f64) -> Complex64 {
        (self.value)(y)
    }

    pub fn derivative(&self, y: f64) -> Complex64 {
        match &self.derivative {
            Some(d) => d(y),
            None => (self.value(y + FD_STEP) - self.value(y - FD_STEP)) / (2.0 * FD_STEP),
        }
    }
}

/// Forcing `h(t, y)` with an optional analytic `∂_y h`.
#[derive(Clone)]
pub struct Forcing {
    label: String,
    value: Arc<ForcingFn>,
    y_derivative: Option<Arc<ForcingFn>>,
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Forcing").field("label", &self.label).finish()
    }
}

impl Forcing {
    pub fn new(label: impl Into<String>, h: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            value: Arc::new(h),
            y_derivative: None,
        }
    }

    pub fn with_y_derivative(mut self, dh: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.y_derivative = Some(Arc::new(dh));
        self
    }

    pub fn zero() -> Self {
        Self::new("0", |_, _| ZERO).with_y_derivative(|_, _| ZERO)
    }

    /// `h(t, y) = t·y³`.
    pub fn cubic() -> Self {
        Self::new("t*y^3", |t, y| Complex64::new(t * y * y * y, 0.0))
            .with_y_derivative(|t, y| Complex64::new(3.0 * t * y * y, 0.0))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, t: f64, y: f64) -> Complex64 {
        (self.value)(t, y)
    }

    pub fn y_derivative(&self, t: f64, y: f64) -> Complex64 {
        match &self.y_derivative {
            Some(d) => d(t, y),
            None => (self.value(t, y + FD_STEP) - self.value(t, y - FD_STEP)) / (2.0 * FD_STEP),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdeOptions {
    /// `|w|` above this counts as blow-up.
    pub blowup_bound: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { blowup_bound: 1e6 }
    }
}

/// Solutions `w(t, y)` and `v(t, y) = ∂_y w(t, y)` on a grid of `y`, stored
/// time-major at every step.
#[derive(Clone, Debug)]
pub struct OdeRun {
    params: NonlinearityParams,
    grid: Grid1D,
    times: Vec<f64>,
    dt: f64,
    w: Vec<Complex64>,
    v: Vec<Complex64>,
    phi0: InitialProfile,
    h_forcing: Forcing,
    z0: Complex64,
    step_error: f64,
}

impl OdeRun {
    pub fn params(&self) -> &NonlinearityParams {
        &self.params
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn w_at(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n_points();
        &self.w[i * n..(i + 1) * n]
    }

    pub fn v_at(&self, i: usize) -> &[Complex64] {
        let n = self.grid.n_points();
        &self.v[i * n..(i + 1) * n]
    }

    pub fn phi0(&self) -> &InitialProfile {
        &self.phi0
    }

    pub fn forcing(&self) -> &Forcing {
        &self.h_forcing
    }

    /// `z = φ'(0)`.
    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    /// Largest step-doubling estimate `|w_{2dt} − w_{dt,dt}|/15` (also over `v`).
    pub fn step_doubling_error(&self) -> f64 {
        self.step_error
    }

    /// Index of the stored time equal to `t`.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * self.dt.max(f64::MIN_POSITIVE);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or_else(|| Error::domain(format!("t = {t} is not a stored time")))
    }
}

#[derive(Clone, Copy)]
struct State {
    w: Complex64,
    v: Complex64,
}

struct PointSystem<'a> {
    params: &'a NonlinearityParams,
    forcing: &'a Forcing,
    y: f64,
    pinned: bool,
}

impl PointSystem<'_> {
    fn rhs(&self, t: f64, s: State) -> State {
        let alpha = self.params.alpha();
        let lambda = self.params.lambda();
        let r = s.w.norm();
        let a = r.powf(alpha);
        // |w|^{α−2} w² has modulus |w|^α and is set to 0 at w = 0.
        let rot = if r > 0.0 { a * (s.w / r) * (s.w / r) } else { ZERO };
        let dv = lambda * ((alpha + 2.0) / 2.0) * a * s.v
            + lambda * (alpha / 2.0) * rot * s.v.conj()
            + self.forcing.y_derivative(t, self.y);
        let dw = if self.pinned {
            ZERO
        } else {
            lambda * a * s.w + self.forcing.value(t, self.y)
        };
        State { w: dw, v: dv }
    }

    fn rk4(&self, t: f64, s: State, dt: f64) -> State {
        let add = |s: State, k: State, c: f64| State {
            w: s.w + k.w * c,
            v: s.v + k.v * c,
        };
        let k1 = self.rhs(t, s);
        let k2 = self.rhs(t + dt / 2.0, add(s, k1, dt / 2.0));
        let k3 = self.rhs(t + dt / 2.0, add(s, k2, dt / 2.0));
        let k4 = self.rhs(t + dt, add(s, k3, dt));
        State {
            w: s.w + (k1.w + k2.w * 2.0 + k3.w * 2.0 + k4.w) * (dt / 6.0),
            v: s.v + (k1.v + k2.v * 2.0 + k3.v * 2.0 + k4.v) * (dt / 6.0),
        }
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn validate_steps(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::StepSize(format!("final time must be positive, got {t_final}")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::StepSize(format!("dt must be positive, got {dt}")));
    }
    if dt > 1e-3 * t_final * (1.0 + 1e-9) {
        return Err(Error::StepSize(format!("dt = {dt} exceeds 1e-3·T = {}", 1e-3 * t_final)));
    }
    let steps = (t_final / dt).round();
    if (steps * dt - t_final).abs() > 1e-9 * t_final {
        return Err(Error::StepSize(format!("T = {t_final} is not a multiple of dt = {dt}")));
    }
    Ok(steps as usize)
}

pub fn integrate_perturbed(
    params: &NonlinearityParams,
    phi0: &InitialProfile,
    h_forcing: &Forcing,
    t_final: f64,
    grid: Grid1D,
    dt: f64,
) -> Result<OdeRun> {
    integrate_perturbed_with(params, phi0, h_forcing, t_final, grid, dt, &OdeOptions::default())
}

/// Classical RK4 for `(w, v)` at every grid point, in parallel across points.
/// The `y = 0` column keeps `w = 0` exactly.
pub fn integrate_perturbed_with(
    params: &NonlinearityParams,
    phi0: &InitialProfile,
    h_forcing: &Forcing,
    t_final: f64,
    grid: Grid1D,
    dt: f64,
    options: &OdeOptions,
) -> Result<OdeRun> {
    let steps = validate_steps(t_final, dt)?;
    if phi0.value(0.0).norm() > 1e-14 {
        return Err(Error::domain("initial profile must vanish at y = 0"));
    }
    for t in [0.0, 0.5 * t_final, t_final] {
        if h_forcing.value(t, 0.0).norm() > 1e-14 {
            return Err(Error::domain(format!("forcing must vanish at y = 0 (fails at t = {t})")));
        }
    }
    let j0 = grid.origin_index();
    let columns: Vec<Result<(Vec<State>, f64)>> = (0..grid.n_points())
        .into_par_iter()
        .map(|j| {
            let y = grid.coord(j);
            let sys = PointSystem {
                params,
                forcing: h_forcing,
                y,
                pinned: j == j0,
            };
            let w0 = if j == j0 { ZERO } else { phi0.value(y) };
            let mut col = Vec::with_capacity(steps + 1);
            col.push(State {
                w: w0,
                v: phi0.derivative(y),
            });
            let mut err: f64 = 0.0;
            for k in 0..steps {
                let t = k as f64 * dt;
                let next = sys.rk4(t, col[k], dt);
                if !(finite(next.w) && finite(next.v)) || next.w.norm() > options.blowup_bound {
                    return Err(Error::BlowUp {
                        time: t + dt,
                        location: Some(y),
                    });
                }
                col.push(next);
                if k % 2 == 1 {
                    let big = sys.rk4(t - dt, col[k - 1], 2.0 * dt);
                    let e = (big.w - next.w).norm().max((big.v - next.v).norm()) / 15.0;
                    err = err.max(e);
                }
            }
            Ok((col, err))
        })
        .collect();

    let mut first_blowup: Option<Error> = None;
    let mut cols = Vec::with_capacity(columns.len());
    let mut step_error: f64 = 0.0;
    for c in columns {
        match c {
            Ok((col, e)) => {
                step_error = step_error.max(e);
                cols.push(col);
            }
            Err(e @ Error::BlowUp { .. }) => {
                let earlier = match (&first_blowup, &e) {
                    (None, _) => true,
                    (Some(Error::BlowUp { time: a, .. }), Error::BlowUp { time: b, .. }) => b < a,
                    _ => false,
                };
                if earlier {
                    first_blowup = Some(e);
                }
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(e) = first_blowup {
        return Err(e);
    }

    let n = grid.n_points();
    let mut w = vec![ZERO; (steps + 1) * n];
    let mut v = vec![ZERO; (steps + 1) * n];
    for (j, col) in cols.iter().enumerate() {
        for (i, s) in col.iter().enumerate() {
            w[i * n + j] = s.w;
            v[i * n + j] = s.v;
        }
    }
    Ok(OdeRun {
        params: *params,
        grid,
        times: (0..=steps).map(|k| k as f64 * dt).collect(),
        dt,
        w,
        v,
        phi0: phi0.clone(),
        h_forcing: h_forcing.clone(),
        z0: phi0.derivative(0.0),
        step_error,
    })
}

/// Time at which the unforced RK4 integration from `φ` first exceeds
/// `bound_factor·|φ|`, searching up to `t_max`.
pub fn scalar_blowup_time(
    params: &NonlinearityParams,
    phi_value: Complex64,
    dt: f64,
    t_max: f64,
    bound_factor: f64,
) -> Option<f64> {
    let forcing = Forcing::zero();
    let sys = PointSystem {
        params,
        forcing: &forcing,
        y: 0.0,
        pinned: false,
    };
    let bound = bound_factor * phi_value.norm();
    let mut s = State {
        w: phi_value,
        v: ZERO,
    };
    let mut t = 0.0;
    while t < t_max {
        s = sys.rk4(t, s, dt);
        t += dt;
        if !finite(s.w) || s.w.norm() > bound {
            return Some(t);
        }
    }
    None
}

/// `A(t, y) = λ(α+2)/2 ∫_0^t |w(σ, y)|^α dσ`, time-major like [`OdeRun`].
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratingFactor {
    n_space: usize,
    a: Vec<Complex64>,
}

impl IntegratingFactor {
    pub fn n_times(&self) -> usize {
        self.a.len() / self.n_space
    }

    pub fn at(&self, i: usize) -> &[Complex64] {
        &self.a[i * self.n_space..(i + 1) * self.n_space]
    }
}

/// Trapezoidal rule over the stored times.
pub fn integrating_factor(run: &OdeRun) -> IntegratingFactor {
    let n = run.grid.n_points();
    let nt = run.times.len();
    let alpha = run.params.alpha();
    let coef = run.params.lambda() * ((alpha + 2.0) / 2.0);
    let mut a = vec![ZERO; nt * n];
    for j in 0..n {
        let mut acc = 0.0;
        let mut prev = run.w[j].norm().powf(alpha);
        for i in 1..nt {
            let cur = run.w[i * n + j].norm().powf(alpha);
            acc += 0.5 * (run.times[i] - run.times[i - 1]) * (prev + cur);
            a[i * n + j] = coef * acc;
            prev = cur;
        }
    }
    IntegratingFactor { n_space: n, a }
}

/// Largest `|v − [e^{A}φ' + ∫_0^t e^{A(t)−A(s)} g(s) ds]|` over all stored
/// times and grid points, with `g = λα/2 |w|^{α−2} w² v̄ + ∂_y h` and the time
/// integral by the trapezoidal rule.
pub fn representation_check(run: &OdeRun, factor: &IntegratingFactor) -> Result<f64> {
    let n = run.grid.n_points();
    let nt = run.times.len();
    if factor.n_space != n || factor.n_times() != nt {
        return Err(Error::SizeMismatch {
            expected: n * nt,
            found: factor.a.len(),
        });
    }
    let alpha = run.params.alpha();
    let lambda = run.params.lambda();
    let g = |i: usize, j: usize| {
        let w = run.w[i * n + j];
        let r = w.norm();
        let rot = if r > 0.0 {
            r.powf(alpha) * (w / r) * (w / r)
        } else {
            ZERO
        };
        lambda * (alpha / 2.0) * rot * run.v[i * n + j].conj()
            + run.h_forcing.y_derivative(run.times[i], run.grid.coord(j))
    };
    let worst = (0..n)
        .into_par_iter()
        .map(|j| {
            let y = run.grid.coord(j);
            let dphi = run.phi0.derivative(y);
            let mut cum = ZERO;
            let mut prev = (-factor.a[j]).exp() * g(0, j);
            let mut worst: f64 = (run.v[j] - dphi).norm();
            for i in 1..nt {
                let a_i = factor.a[i * n + j];
                let cur = (-a_i).exp() * g(i, j);
                cum += (prev + cur) * (0.5 * (run.times[i] - run.times[i - 1]));
                prev = cur;
                let rep = a_i.exp() * (dphi + cum);
                worst = worst.max((run.v[i * n + j] - rep).norm());
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}
