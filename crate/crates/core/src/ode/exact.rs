use num_complex::Complex64;

use super::params::NonlinearityParams;
use crate::error::{Error, Result};

/// `λ|w|^α w`.
pub fn nonlinearity(params: &NonlinearityParams, w: Complex64) -> Complex64 {
    params.lambda() * w * w.norm().powf(params.alpha())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(())
}

/// `ln B` for `B = 1 − α t |φ|^α Re λ`, or `BlowUp` when `B ≤ 0`.
fn log_base(params: &NonlinearityParams, phi_abs: f64, t: f64, location: Option<f64>) -> Result<f64> {
    let rate = params.alpha() * phi_abs.powf(params.alpha()) * params.lambda().re;
    let b = -rate * t;
    if b <= -1.0 {
        return Err(Error::BlowUp {
            time: 1.0 / rate,
            location,
        });
    }
    Ok(b.ln_1p())
}

/// Value at time `t` of the solution of `w_t = λ|w|^α w`, `w(0) = φ`.
///
/// For `Re λ ≠ 0` this is `φ·B^{−λ/(α Re λ)}` with the real base
/// `B = 1 − α t |φ|^α Re λ`; the exponent is complex, and the power uses the
/// real logarithm of `B`. For `Re λ = 0` the modulus is conserved and the
/// flow is the rotation `e^{i t |φ|^α Im λ}`.
pub fn exact_solution(params: &NonlinearityParams, phi_value: Complex64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    let r = phi_value.norm();
    if r == 0.0 || params.is_linear() || t == 0.0 {
        return Ok(phi_value);
    }
    let (alpha, lambda) = (params.alpha(), params.lambda());
    if lambda.re == 0.0 {
        let phase = t * r.powf(alpha) * lambda.im;
        return Ok(phi_value * Complex64::from_polar(1.0, phase));
    }
    let ln_b = log_base(params, r, t, None)?;
    let exponent = -lambda / (alpha * lambda.re);
    Ok(phi_value * (exponent * ln_b).exp())
}

/// `B^{−λ/(α Re λ) − k}` for the explicit solution with `φ(x) = x`; for
/// `Re λ = 0` the limit `e^{i t |x|^α Im λ}`.
fn power_term(params: &NonlinearityParams, x: f64, t: f64, k: f64) -> Result<Complex64> {
    let (alpha, lambda) = (params.alpha(), params.lambda());
    let s = x.abs().powf(alpha);
    if lambda.re == 0.0 {
        return Ok(Complex64::from_polar(1.0, t * s * lambda.im));
    }
    let ln_b = log_base(params, x.abs(), t, Some(x))?;
    let exponent = -lambda / (alpha * lambda.re) - k;
    Ok((exponent * ln_b).exp())
}

/// `∂_x w(t, x)` for initial data `φ(x) = x`:
/// `B^{−λ/(α Re λ) − 1}(1 + iα t |x|^α Im λ)`.
pub fn exact_first_derivative(params: &NonlinearityParams, x: f64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    if params.is_linear() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (alpha, lambda) = (params.alpha(), params.lambda());
    let s = x.abs().powf(alpha);
    let bracket = Complex64::new(1.0, alpha * t * s * lambda.im);
    Ok(power_term(params, x, t, 1.0)? * bracket)
}

/// `∂²_x w(t, x)` for initial data `φ(x) = x`:
/// `α t (|x|^α/x) B^{−λ/(α Re λ) − 2} λ (1 + α + iα t |x|^α Im λ)`.
///
/// Behaves like `|x|^{α−1}` as `x → 0`, so `x = 0` is rejected.
pub fn exact_second_derivative(params: &NonlinearityParams, x: f64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    if x == 0.0 || !x.is_finite() {
        return Err(Error::domain("second derivative is undefined at x = 0"));
    }
    if params.is_linear() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (alpha, lambda) = (params.alpha(), params.lambda());
    let s = x.abs().powf(alpha);
    let bracket = Complex64::new(1.0 + alpha, alpha * t * s * lambda.im);
    Ok(power_term(params, x, t, 2.0)? * lambda * bracket * (alpha * t * s / x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Independent oracle: step-doubling RK4 on the scalar ODE.
    fn rk4_oracle(p: &NonlinearityParams, phi: Complex64, t: f64) -> Complex64 {
        let f = |w: Complex64| nonlinearity(p, w);
        let run = |n: usize| {
            let dt = t / n as f64;
            let mut w = phi;
            for _ in 0..n {
                let k1 = f(w);
                let k2 = f(w + k1 * (dt / 2.0));
                let k3 = f(w + k2 * (dt / 2.0));
                let k4 = f(w + k3 * dt);
                w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
            }
            w
        };
        let mut n = 64;
        let mut prev = run(n);
        loop {
            n *= 2;
            let next = run(n);
            if (next - prev).norm() < 1e-12 * next.norm() {
                return next;
            }
            prev = next;
        }
    }

    #[test]
    fn closed_form_value() {
        let p = NonlinearityParams::heat(1.0, 1.0).unwrap();
        let w = exact_solution(&p, c(1.0, 0.0), 0.5).unwrap();
        assert!((w - c(2.0, 0.0)).norm() < 1e-14);
        assert!((rk4_oracle(&p, c(1.0, 0.0), 0.5) - c(2.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn matches_rk4_for_complex_coupling() {
        for (alpha, lam, phi) in [
            (0.5, c(1.0, 2.0), c(0.3, -0.7)),
            (1.5, c(-2.0, 1.0), c(1.1, 0.4)),
            (0.25, c(0.0, -3.0), c(-0.5, 0.5)),
        ] {
            let p = NonlinearityParams::new(alpha, lam, 0.0).unwrap();
            let w = exact_solution(&p, phi, 0.4).unwrap();
            let o = rk4_oracle(&p, phi, 0.4);
            assert!((w - o).norm() < 1e-10 * o.norm(), "{alpha} {lam}");
        }
    }

    #[test]
    fn blow_up_is_reported_with_critical_time() {
        let p = NonlinearityParams::heat(0.5, 1.0).unwrap();
        match exact_solution(&p, c(4.0, 0.0), 1.0) {
            Err(Error::BlowUp { time, .. }) => assert!((time - 1.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(exact_solution(&p, c(4.0, 0.0), 0.999).is_ok());
        assert!(exact_solution(&p, c(4.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn derivatives_at_time_zero() {
        let p = NonlinearityParams::new(0.5, c(1.0, 1.0), 0.0).unwrap();
        assert_eq!(exact_first_derivative(&p, 0.3, 0.0).unwrap(), c(1.0, 0.0));
        assert_eq!(exact_second_derivative(&p, 0.3, 0.0).unwrap().norm(), 0.0);
        assert!(exact_second_derivative(&p, 0.0, 0.1).is_err());
    }

    fn fd_first(p: &NonlinearityParams, x: f64, t: f64, h: f64) -> Complex64 {
        let w = |x: f64| exact_solution(p, c(x, 0.0), t).unwrap();
        (w(x - 2.0 * h) - w(x - h) * 8.0 + w(x + h) * 8.0 - w(x + 2.0 * h)) / (12.0 * h)
    }

    fn fd_second(p: &NonlinearityParams, x: f64, t: f64, h: f64) -> Complex64 {
        let w = |x: f64| exact_solution(p, c(x, 0.0), t).unwrap();
        (-w(x - 2.0 * h) + w(x - h) * 16.0 - w(x) * 30.0 + w(x + h) * 16.0 - w(x + 2.0 * h)) / (12.0 * h * h)
    }

    #[test]
    fn schrodinger_second_derivative_against_finite_differences() {
        let p = NonlinearityParams::new(0.5, c(0.0, 1.0), 0.0).unwrap();
        let (x, t) = (0.1, 1.0);
        let d2 = exact_second_derivative(&p, x, t).unwrap();
        let expected_mod = 0.5 * t * x.powf(-0.5) * c(1.5, 0.5 * t * x.sqrt()).norm();
        assert!((d2.norm() - expected_mod).abs() < 1e-12 * expected_mod);
        let fd = fd_second(&p, x, t, 1e-3);
        assert!((d2 - fd).norm() < 1e-6 * d2.norm());
    }

    #[test]
    fn derivatives_against_finite_differences() {
        for (alpha, lam) in [(0.5, c(1.0, 0.0)), (0.75, c(1.0, -2.0)), (1.5, c(-1.0, 0.5))] {
            let p = NonlinearityParams::new(alpha, lam, 0.0).unwrap();
            for x in [0.2, -0.35, 0.6] {
                let t = 0.3;
                let d1 = exact_first_derivative(&p, x, t).unwrap();
                assert!((d1 - fd_first(&p, x, t, 1e-3)).norm() < 1e-8 * d1.norm(), "{alpha} {x}");
                let d2 = exact_second_derivative(&p, x, t).unwrap();
                assert!((d2 - fd_second(&p, x, t, 1e-3)).norm() < 1e-5 * d2.norm(), "{alpha} {x}");
            }
        }
    }

    #[test]
    fn second_derivative_diverges_like_power() {
        let p = NonlinearityParams::heat(0.5, 1.0).unwrap();
        let xs: Vec<f64> = (8..20).map(|k| 2f64.powi(-k)).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| exact_second_derivative(&p, x, 0.1).unwrap().norm()).collect();
        let fit = crate::numerics::loglog_fit(&xs, &ys).unwrap();
        assert!((fit.slope - (0.5 - 1.0)).abs() < 0.01);
        // x·w_xx/|x|^α stays bounded.
        for (&x, &y) in xs.iter().zip(&ys) {
            assert!(y * x / x.powf(0.5) < 1.0);
        }
    }

    proptest! {
        #[test]
        fn pure_imaginary_coupling_preserves_modulus(
            alpha in 0.05f64..1.95, im in -5.0f64..5.0, re in -3.0f64..3.0, pim in -3.0f64..3.0, t in 0.0f64..10.0
        ) {
            prop_assume!(im != 0.0);
            let p = NonlinearityParams::new(alpha, c(0.0, im), 0.0).unwrap();
            let phi = c(re, pim);
            let w = exact_solution(&p, phi, t).unwrap();
            prop_assert!((w.norm() - phi.norm()).abs() <= 1e-15 * phi.norm().max(f64::MIN_POSITIVE) * 4.0);
        }

        #[test]
        fn flow_composes(alpha in 0.1f64..1.9, lr in -2.0f64..2.0, li in -2.0f64..2.0, s in 0.0f64..0.2, t in 0.0f64..0.2) {
            prop_assume!(lr != 0.0 || li != 0.0);
            let p = NonlinearityParams::new(alpha, c(lr, li), 0.0).unwrap();
            let phi = c(0.6, -0.3);
            let two = exact_solution(&p, exact_solution(&p, phi, s).unwrap(), t).unwrap();
            let one = exact_solution(&p, phi, s + t).unwrap();
            prop_assert!((two - one).norm() < 1e-12 * one.norm());
        }
    }
}
