use num_complex::Complex64;

use super::grid::Grid1D;

/// Local Lagrange interpolation of periodic samples on a [`Grid1D`].
#[derive(Clone, Copy, Debug)]
pub struct PeriodicInterpolator<'a> {
    grid: Grid1D,
    values: &'a [Complex64],
    order: usize,
}

impl<'a> PeriodicInterpolator<'a> {
    /// `order` is the number of stencil points and must be even.
    pub fn new(grid: Grid1D, values: &'a [Complex64], order: usize) -> Self {
        assert_eq!(values.len(), grid.n_points());
        assert!(order >= 2 && order % 2 == 0 && order <= grid.n_points());
        Self {
            grid,
            values,
            order,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let h = self.grid.spacing();
        let n = self.grid.n_points() as isize;
        let pos = (x + self.grid.half_length()) / h;
        let base = pos.floor();
        let frac = pos - base;
        if frac == 0.0 {
            return self.values[(base as isize).rem_euclid(n) as usize];
        }
        let half = (self.order / 2) as isize;
        let offsets: Vec<isize> = (1 - half..=half).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for &i in &offsets {
            let mut w = 1.0;
            for &m in &offsets {
                if m != i {
                    w *= (frac - m as f64) / (i - m) as f64;
                }
            }
            let idx = (base as isize + i).rem_euclid(n) as usize;
            acc += self.values[idx] * w;
        }
        acc
    }
}
