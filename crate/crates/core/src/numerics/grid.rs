use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-L, L)` with `n` points, `n` a power of two.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    n_points: usize,
    half_length: f64,
}

impl Grid1D {
    pub const MIN_POINTS: usize = 8;

    pub fn new(n_points: usize, half_length: f64) -> Result<Self> {
        if n_points < Self::MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::domain(format!(
                "grid size must be a power of two >= {}, got {n_points}",
                Self::MIN_POINTS
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::domain(format!(
                "grid half-length must be positive and finite, got {half_length}"
            )));
        }
        Ok(Self {
            n_points,
            half_length,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    /// `2L / n`; exact in binary floating point because `n` is a power of two.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.coord(j)).collect()
    }

    /// Index of the grid point `x = 0`.
    pub fn origin_index(&self) -> usize {
        self.n_points / 2
    }

    /// Index of the point `-x_j`. Index 0 (`x = -L ≡ L`) is its own mirror.
    pub fn mirror_index(&self, j: usize) -> usize {
        (self.n_points - j) % self.n_points
    }

    /// Index of `x` if it is a grid point (to within `1e-9` spacings).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let pos = (x + self.half_length) / self.spacing();
        let j = pos.round();
        if (pos - j).abs() > 1e-9 || j < 0.0 || j >= self.n_points as f64 {
            return None;
        }
        Some(j as usize)
    }

    /// Indices of the dyadic ladder `y_k = y_max·2^{-k}`, `k = 0, 1, ...`,
    /// stopping before `y_k < min_multiple·spacing`.
    pub fn dyadic_ladder(&self, y_max: f64, min_multiple: f64) -> Result<Vec<usize>> {
        if !(y_max > 0.0 && y_max < self.half_length) {
            return Err(Error::domain(format!(
                "ladder top {y_max} must lie in (0, {})",
                self.half_length
            )));
        }
        let floor = min_multiple * self.spacing();
        let mut out = Vec::new();
        let mut y = y_max;
        while y >= floor * (1.0 - 1e-12) {
            let j = self.index_of(y).ok_or_else(|| {
                Error::domain(format!("ladder point {y} is not a grid point"))
            })?;
            out.push(j);
            y *= 0.5;
        }
        Ok(out)
    }

    /// Signed integer frequency of FFT slot `m`, in `[-n/2, n/2)`.
    pub fn signed_frequency(&self, m: usize) -> isize {
        let n = self.n_points as isize;
        let m = m as isize;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// FFT slot holding signed frequency `k`.
    pub fn slot_of(&self, k: isize) -> Option<usize> {
        let n = self.n_points as isize;
        if k < -n / 2 || k >= n / 2 {
            return None;
        }
        Some(k.rem_euclid(n) as usize)
    }

    /// Physical wavenumber `ξ_k = π k / L`.
    pub fn wavenumber(&self, k: isize) -> f64 {
        std::f64::consts::PI * k as f64 / self.half_length
    }

    /// Wavenumbers in FFT slot order.
    pub fn fft_wavenumbers(&self) -> Vec<f64> {
        (0..self.n_points)
            .map(|m| self.wavenumber(self.signed_frequency(m)))
            .collect()
    }
}

/// Spatial layout of a field. In the plane the last axis is `y`, the variable
/// in which data are odd; the first is the transverse variable `x'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Line(Grid1D),
    Plane { x: Grid1D, y: Grid1D },
}

impl Domain {
    pub fn dimension(&self) -> usize {
        match self {
            Domain::Line(_) => 1,
            Domain::Plane { .. } => 2,
        }
    }

    pub fn len(&self) -> usize {
        self.rows() * self.y_axis().n_points()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn y_axis(&self) -> Grid1D {
        match *self {
            Domain::Line(g) => g,
            Domain::Plane { y, .. } => y,
        }
    }

    pub fn x_axis(&self) -> Option<Grid1D> {
        match *self {
            Domain::Line(_) => None,
            Domain::Plane { x, .. } => Some(x),
        }
    }

    /// Number of `y`-profiles (1 on the line).
    pub fn rows(&self) -> usize {
        self.x_axis().map_or(1, |g| g.n_points())
    }

    /// Row holding `x' = 0` (0 on the line).
    pub fn origin_row(&self) -> usize {
        self.x_axis().map_or(0, |g| g.origin_index())
    }

    pub fn axes(&self) -> Vec<Grid1D> {
        match *self {
            Domain::Line(g) => vec![g],
            Domain::Plane { x, y } => vec![x, y],
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes().iter().map(Grid1D::spacing).product()
    }

    /// Smallest half-length across axes.
    pub fn min_half_length(&self) -> f64 {
        self.axes()
            .iter()
            .map(Grid1D::half_length)
            .fold(f64::INFINITY, f64::min)
    }

    /// `(x', y)` coordinates of flat index `idx`.
    pub fn point(&self, idx: usize) -> (f64, f64) {
        let y = self.y_axis();
        let (row, col) = (idx / y.n_points(), idx % y.n_points());
        let xp = self.x_axis().map_or(0.0, |g| g.coord(row));
        (xp, y.coord(col))
    }
}

/// Complex samples of a field on a [`Domain`], row-major with `y` fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<Complex64>,
    blown_up: bool,
}

impl GridFunction {
    pub fn new(domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                found: values.len(),
            });
        }
        if let Some(j) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::domain(format!("non-finite sample at index {j}")));
        }
        Ok(Self {
            domain,
            values,
            blown_up: false,
        })
    }

    /// Accepts non-finite samples; the result is flagged as blown up.
    pub fn new_blown_up(domain: Domain, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                found: values.len(),
            });
        }
        Ok(Self {
            domain,
            values,
            blown_up: true,
        })
    }

    pub(crate) fn from_raw(domain: Domain, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        Self {
            domain,
            values,
            blown_up: false,
        }
    }

    pub fn zeros(domain: Domain) -> Self {
        Self::from_raw(domain, vec![Complex64::new(0.0, 0.0); domain.len()])
    }

    /// Samples `f(x', y)`; on the line `x' = 0`.
    pub fn from_fn(domain: Domain, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let values = (0..domain.len())
            .map(|idx| {
                let (xp, y) = domain.point(idx);
                f(xp, y)
            })
            .collect();
        Self::new(domain, values)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_blown_up(&self) -> bool {
        self.blown_up
    }

    /// The `y`-profile at transverse index `row`.
    pub fn row(&self, row: usize) -> &[Complex64] {
        let n = self.domain.y_axis().n_points();
        &self.values[row * n..(row + 1) * n]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Discrete `L²` norm `(Σ |u_j|² ΔV)^{1/2}`.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.domain.cell_volume()).sqrt()
    }

    /// `max |u(x', y) + u(x', -y)|` over the grid.
    pub fn odd_asymmetry(&self) -> f64 {
        let y = self.domain.y_axis();
        let n = y.n_points();
        (0..self.domain.rows())
            .flat_map(|r| (0..n).map(move |j| (r, j)))
            .map(|(r, j)| (self.values[r * n + j] + self.values[r * n + y.mirror_index(j)]).norm())
            .fold(0.0, f64::max)
    }

    /// Replaces `u(x', y)` by `(u(x', y) - u(x', -y)) / 2`.
    pub fn project_odd(&mut self) {
        let y = self.domain.y_axis();
        let n = y.n_points();
        for r in 0..self.domain.rows() {
            let row = &mut self.values[r * n..(r + 1) * n];
            let orig = row.to_vec();
            for (j, v) in row.iter_mut().enumerate() {
                *v = (orig[j] - orig[y.mirror_index(j)]) * 0.5;
            }
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().map(|&z| f(z)).collect(),
            blown_up: self.blown_up,
        }
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        if self.domain != other.domain {
            return Err(Error::SizeMismatch {
                expected: self.domain.len(),
                found: other.domain.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}
