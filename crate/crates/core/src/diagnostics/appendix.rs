use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Candidate constant for the modulus part of the Hölder bound on `|z|^α`.
pub const MODULUS_CONSTANT: f64 = 1.0;
/// Candidate constant for the full bound, modulus plus rotated term.
pub const FULL_CONSTANT: f64 = 3.0;
/// Bound on `‖u'‖_∞ / (‖u''‖_∞ ‖u‖_∞)^{1/2}`; the sharp value on the line is √2.
pub const INTERPOLATION_BOUND: f64 = 2.0;
/// Relative tolerance of the gradient formula against central differences.
pub const GRADIENT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct InequalityRow {
    pub name: String,
    pub samples: usize,
    pub max_observed: f64,
    pub bound: f64,
    pub pass: bool,
}

impl InequalityRow {
    fn new(name: &str, samples: usize, max_observed: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            samples,
            max_observed,
            bound,
            pass: max_observed <= bound,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub seed: u64,
    pub seed_count: usize,
    pub rows: Vec<InequalityRow>,
}

impl AppendixReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn modulus_pow(z: Complex64, alpha: f64) -> f64 {
    z.norm().powf(alpha)
}

/// `|z|^{α−2} z²`, continuous at 0 for α > 0.
fn rotated(z: Complex64, alpha: f64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z * z * r.powf(alpha - 2.0)
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    // Log-uniform modulus over six decades, uniform phase.
    let r = 10f64.powf(rng.gen_range(-3.0..3.0));
    Complex64::from_polar(r, rng.gen_range(0.0..2.0 * PI))
}

/// A second point near, far from or at the origin relative to `z1`.
fn partner(rng: &mut ChaCha8Rng, z1: Complex64) -> Complex64 {
    match rng.gen_range(0..4) {
        0 => Complex64::new(0.0, 0.0),
        1 => random_complex(rng),
        _ => {
            let scale = z1.norm() * 10f64.powf(rng.gen_range(-6.0..0.5));
            z1 + Complex64::from_polar(scale, rng.gen_range(0.0..2.0 * PI))
        }
    }
}

/// Ratio of `||z1|^α − |z2|^α|` to `|z1 − z2|^α`, for α ∈ (0, 1].
pub fn modulus_ratio(z1: Complex64, z2: Complex64, alpha: f64) -> f64 {
    let d = (z1 - z2).norm();
    if d == 0.0 {
        return 0.0;
    }
    (modulus_pow(z1, alpha) - modulus_pow(z2, alpha)).abs() / d.powf(alpha)
}

/// Ratio of `||z1|^α − |z2|^α| + ||z1|^{α−2}z1² − |z2|^{α−2}z2²|` to
/// `|z1 − z2|^α` (α ≤ 1) or `(|z1|^{α−1} + |z2|^{α−1})|z1 − z2|` (α ≥ 1).
pub fn full_ratio(z1: Complex64, z2: Complex64, alpha: f64) -> f64 {
    let d = (z1 - z2).norm();
    if d == 0.0 {
        return 0.0;
    }
    let lhs = (modulus_pow(z1, alpha) - modulus_pow(z2, alpha)).abs() + (rotated(z1, alpha) - rotated(z2, alpha)).norm();
    let rhs = if alpha <= 1.0 {
        d.powf(alpha)
    } else {
        (z1.norm().powf(alpha - 1.0) + z2.norm().powf(alpha - 1.0)) * d
    };
    lhs / rhs
}

/// Trigonometric polynomial `Σ c_k e^{ikx}` with its exact derivatives.
struct TrigField {
    modes: Vec<(f64, Complex64)>,
}

impl TrigField {
    fn random(rng: &mut ChaCha8Rng, max_mode: i32, real: bool) -> Self {
        let mut modes = Vec::new();
        for k in 1..=rng.gen_range(1..=max_mode) {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            if real {
                modes.push((k as f64, c));
                modes.push((-(k as f64), c.conj()));
            } else {
                modes.push((k as f64, c));
                modes.push((-(k as f64), Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            }
        }
        Self { modes }
    }

    fn derivative(&self, x: f64, order: i32) -> Complex64 {
        self.modes
            .iter()
            .map(|&(k, c)| c * Complex64::new(0.0, k).powi(order) * Complex64::from_polar(1.0, k * x))
            .sum()
    }
}

/// `∂_x(λ|u|^α u)` from the chain-rule formula.
pub fn gradient_formula(lambda: Complex64, alpha: f64, u: Complex64, du: Complex64) -> Complex64 {
    let r = u.norm();
    if r == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    lambda * (alpha + 2.0) / 2.0 * r.powf(alpha) * du + lambda * alpha / 2.0 * rotated(u, alpha) * du.conj()
}

fn nonlinearity(lambda: Complex64, alpha: f64, u: Complex64) -> Complex64 {
    lambda * u * u.norm().powf(alpha)
}

fn gradient_error(rng: &mut ChaCha8Rng) -> f64 {
    let field = TrigField::random(rng, 4, false);
    let alpha = rng.gen_range(0.1..3.0);
    let lambda = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let xs: Vec<f64> = (0..64).map(|j| 2.0 * PI * j as f64 / 64.0).collect();
    let peak = xs.iter().map(|&x| field.derivative(x, 0).norm()).fold(0.0, f64::max);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..16 {
        let x = rng.gen_range(0.0..2.0 * PI);
        let u = field.derivative(x, 0);
        if u.norm() < 0.1 * peak {
            continue;
        }
        let fd = (nonlinearity(lambda, alpha, field.derivative(x + h, 0))
            - nonlinearity(lambda, alpha, field.derivative(x - h, 0)))
            / (2.0 * h);
        let exact = gradient_formula(lambda, alpha, u, field.derivative(x, 1));
        let scale = (lambda.norm() * (alpha + 1.0) * u.norm().powf(alpha) * field.derivative(x, 1).norm()).max(1e-300);
        worst = worst.max((fd - exact).norm() / scale);
    }
    worst
}

fn sup(field: &TrigField, order: i32, samples: usize) -> f64 {
    (0..samples)
        .map(|j| field.derivative(2.0 * PI * j as f64 / samples as f64, order).re.abs())
        .fold(0.0, f64::max)
}

/// `‖u'‖_∞ / (‖u''‖_∞ ‖u‖_∞)^{1/2}` on an oversampled periodic grid.
fn interpolation_ratio(field: &TrigField) -> f64 {
    let samples = 4096;
    sup(field, 1, samples) / (sup(field, 2, samples) * sup(field, 0, samples)).sqrt()
}

/// Randomized checks of the pointwise and interpolation inequalities used in
/// the local theory. Each of `seed_count` draws feeds every row.
pub fn appendix_inequality_checks(seed_count: usize, seed: u64) -> Result<AppendixReport> {
    if seed_count < 100 {
        return Err(Error::domain(format!("need at least 100 draws, got {seed_count}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut modulus, mut sub, mut sup_, mut grad, mut interp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..seed_count {
        let z1 = random_complex(&mut rng);
        let z2 = partner(&mut rng, z1);
        let a_sub = rng.gen_range(0.05..=1.0);
        let a_sup = rng.gen_range(1.0..2.0);
        modulus = modulus.max(modulus_ratio(z1, z2, a_sub));
        sub = sub.max(full_ratio(z1, z2, a_sub));
        sup_ = sup_.max(full_ratio(z1, z2, a_sup));
        grad = grad.max(gradient_error(&mut rng));
        interp = interp.max(interpolation_ratio(&TrigField::random(&mut rng, 8, true)));
    }
    let rows = vec![
        InequalityRow::new("modulus-holder", seed_count, modulus, MODULUS_CONSTANT * (1.0 + 1e-12)),
        InequalityRow::new("full-holder-sublinear", seed_count, sub, FULL_CONSTANT),
        InequalityRow::new("full-lipschitz-superlinear", seed_count, sup_, FULL_CONSTANT),
        InequalityRow::new("gradient-formula", seed_count, grad, GRADIENT_TOL),
        InequalityRow::new("derivative-interpolation", seed_count, interp, INTERPOLATION_BOUND),
    ];
    Ok(AppendixReport { seed, seed_count, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn suite_passes() {
        let r = appendix_inequality_checks(500, 7).unwrap();
        assert!(r.all_pass(), "{:?}", r.rows);
        assert_eq!(r.rows.len(), 5);
    }

    #[test]
    fn suite_is_reproducible() {
        let a = appendix_inequality_checks(100, 3).unwrap();
        let b = appendix_inequality_checks(100, 3).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.max_observed, y.max_observed);
        }
    }

    #[test]
    fn too_few_draws_rejected() {
        assert!(appendix_inequality_checks(99, 0).is_err());
    }

    #[test]
    fn modulus_ratio_with_origin_is_one() {
        for alpha in [0.1, 0.5, 1.0] {
            assert!((modulus_ratio(c(0.3, -1.7), c(0.0, 0.0), alpha) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_formula_real_positive_reduces() {
        let (alpha, lambda) = (0.7, c(1.3, -0.4));
        for (u, du) in [(0.5, 2.0), (3.0, -1.0)] {
            let g = gradient_formula(lambda, alpha, c(u, 0.0), c(du, 0.0));
            let reduced = lambda * (alpha + 1.0) * u.powf(alpha) * du;
            assert!((g - reduced).norm() < 1e-14);
        }
    }

    #[test]
    fn interpolation_ratio_of_sine_is_one() {
        for k in [1.0, 3.0, 7.0] {
            let f = TrigField {
                modes: vec![(k, c(0.0, -0.5)), (-k, c(0.0, 0.5))],
            };
            assert!((interpolation_ratio(&f) - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn modulus_bound_holds(r1 in 1e-3f64..1e3, p1 in 0.0f64..6.3, r2 in 1e-3f64..1e3, p2 in 0.0f64..6.3, alpha in 0.01f64..=1.0) {
            let z1 = Complex64::from_polar(r1, p1);
            let z2 = Complex64::from_polar(r2, p2);
            prop_assert!(modulus_ratio(z1, z2, alpha) <= 1.0 + 1e-12);
        }

        #[test]
        fn full_bound_holds(r1 in 1e-3f64..1e3, p1 in 0.0f64..6.3, r2 in 1e-3f64..1e3, p2 in 0.0f64..6.3, alpha in 0.01f64..2.0) {
            let z1 = Complex64::from_polar(r1, p1);
            let z2 = Complex64::from_polar(r2, p2);
            prop_assert!(full_ratio(z1, z2, alpha) <= FULL_CONSTANT);
        }
    }
}
