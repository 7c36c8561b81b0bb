use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

// Kronrod 15-point nodes (non-negative half) and weights; every odd-indexed
// node is also a Gauss 7-point node.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Settings for global adaptive Gauss–Kronrod (7/15) integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub max_depth: u32,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_depth: 40,
            max_intervals: 20_000,
        }
    }
}

struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs_sum = fc.norm() * WGK[7];
    for i in 0..7 {
        let dx = h * XGK[i];
        let (f1, f2) = (f(c - dx), f(c + dx));
        k += (f1 + f2) * WGK[i];
        abs_sum += (f1.norm() + f2.norm()) * WGK[i];
        if i % 2 == 1 {
            g += (f1 + f2) * WG[i / 2];
        }
    }
    let value = k * h;
    let err = ((k - g) * h).norm();
    (value, err, abs_sum * h.abs())
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    /// `∫_a^b f`, stopping once the summed error estimate is at most
    /// `rel_tol·(1 + |I|)`.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F, a: f64, b: f64) -> Result<Complex64> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::domain(format!("quadrature needs finite a < b, got [{a}, {b}]")));
        }
        if !(self.rel_tol > 1e-14 && self.rel_tol < 1e-2) {
            return Err(Error::domain(format!(
                "quadrature tolerance must lie in (1e-14, 1e-2), got {}",
                self.rel_tol
            )));
        }
        let mut heap = BinaryHeap::new();
        // Panels whose error is at the round-off floor are retired here.
        let mut settled = Complex64::new(0.0, 0.0);
        let (value, error, resabs) = gauss_kronrod(&f, a, b);
        let check = |v: Complex64, e: f64| {
            if !(v.re.is_finite() && v.im.is_finite() && e.is_finite()) {
                Err(Error::domain("integrand produced a non-finite value"))
            } else {
                Ok(())
            }
        };
        check(value, error)?;
        let floor = |resabs: f64| 50.0 * f64::EPSILON * resabs;
        if error <= floor(resabs) {
            return Ok(value);
        }
        heap.push(Panel {
            a,
            b,
            depth: 0,
            value,
            error,
        });
        let mut total = value;
        let mut total_err = error;
        let mut panels = 1usize;
        loop {
            if total_err <= self.rel_tol * (1.0 + total.norm()) {
                break;
            }
            let Some(worst) = heap.pop() else { break };
            if worst.depth >= self.max_depth || panels >= self.max_intervals {
                return Err(Error::NonConvergence {
                    max_depth: self.max_depth,
                });
            }
            let mid = 0.5 * (worst.a + worst.b);
            total -= worst.value;
            total_err -= worst.error;
            for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
                let (v, e, r) = gauss_kronrod(&f, lo, hi);
                check(v, e)?;
                total += v;
                if e <= floor(r) {
                    settled += v;
                } else {
                    total_err += e;
                    heap.push(Panel {
                        a: lo,
                        b: hi,
                        depth: worst.depth + 1,
                        value: v,
                        error: e,
                    });
                }
            }
            panels += 1;
            total_err = total_err.max(0.0);
        }
        let sum = heap.iter().fold(settled, |acc, p| acc + p.value);
        Ok(sum)
    }

    pub fn integrate_real<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        self.integrate(|x| Complex64::new(f(x), 0.0), a, b).map(|z| z.re)
    }
}

/// Adaptive integration of a complex integrand over `[a, b]`.
pub fn adaptive_quadrature<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<Complex64> {
    Quadrature::with_rel_tol(rel_tol).integrate(f, a, b)
}

pub fn adaptive_quadrature_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    Quadrature::with_rel_tol(rel_tol).integrate_real(f, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_exact() {
        // K15 integrates degree 22 exactly.
        let v = adaptive_quadrature_real(|x| x.powi(10) - 3.0 * x.powi(3), -1.0, 2.0, 1e-12).unwrap();
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 3.0 * (16.0 - 1.0) / 4.0;
        assert!((v - exact).abs() < 1e-12 * exact.abs());
    }

    #[test]
    fn gaussian_integral() {
        let v = adaptive_quadrature_real(|x| (-x * x).exp(), -12.0, 12.0, 1e-12).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn weak_singularity() {
        // ∫_0^1 x^{-1/4} = 4/3
        let v = adaptive_quadrature_real(|x| if x > 0.0 { x.powf(-0.25) } else { 0.0 }, 0.0, 1.0, 1e-8).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn complex_integrand() {
        let v = adaptive_quadrature(|x| Complex64::new(0.0, x).exp(), 0.0, PI, 1e-12).unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(adaptive_quadrature_real(|x| x, 1.0, 0.0, 1e-8), Err(Error::Domain(_))));
        assert!(matches!(adaptive_quadrature_real(|x| x, 0.0, 1.0, 1e-16), Err(Error::Domain(_))));
        assert!(matches!(adaptive_quadrature_real(|x| x, 0.0, 1.0, 0.1), Err(Error::Domain(_))));
        assert!(adaptive_quadrature_real(|_| f64::NAN, 0.0, 1.0, 1e-8).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        let q = Quadrature {
            rel_tol: 1e-12,
            max_depth: 3,
            max_intervals: 10_000,
        };
        let r = q.integrate_real(|x| (1.0 / x).sin(), 1e-6, 1.0);
        assert!(matches!(r, Err(Error::NonConvergence { max_depth: 3 })));
    }

    #[test]
    fn deterministic() {
        let f = |x: f64| (x * 7.0).sin() / (1.0 + x * x);
        let a = adaptive_quadrature_real(f, -5.0, 9.0, 1e-11).unwrap();
        let b = adaptive_quadrature_real(f, -5.0, 9.0, 1e-11).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    proptest! {
        #[test]
        fn additive_over_subintervals(c in -2.0f64..2.0, w in 0.5f64..5.0) {
            let f = |x: f64| (x * w).cos() * (-x * x / 4.0).exp();
            let whole = adaptive_quadrature_real(f, -3.0, 3.0, 1e-12).unwrap();
            let split = adaptive_quadrature_real(f, -3.0, c, 1e-12).unwrap()
                + adaptive_quadrature_real(f, c, 3.0, 1e-12).unwrap();
            prop_assert!((whole - split).abs() < 1e-10);
        }
    }
}
