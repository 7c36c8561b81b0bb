use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use reglab::evolution::{make_odd_bump, solve};
use reglab::numerics::{loglog_fit, Domain, Grid1D};
use reglab::ode::NonlinearityParams;
use reglab::Complex64;

/// Sup-norm error against a run at `dt_min/16`, fitted over `T/{8,16,32,64}`.
fn order_fit(params: &NonlinearityParams) -> f64 {
    let phi = make_odd_bump(1, 1.0, 1.0).unwrap();
    let d = Domain::Line(Grid1D::new(512, 4.0).unwrap());
    let t = 0.05;
    let run = |dt: f64| solve(params, &phi, &d, t, dt, usize::MAX).unwrap().final_snapshot().clone();
    let dts: Vec<f64> = [8.0, 16.0, 32.0, 64.0].iter().map(|k| t / k).collect();
    let reference = run(dts[3] / 16.0);
    let errs: Vec<f64> = dts.iter().map(|&dt| run(dt).max_abs_diff(&reference).unwrap()).collect();
    loglog_fit(&dts, &errs).unwrap().slope
}

#[test]
fn second_order_for_each_rotation() {
    for theta in [0.0, FRAC_PI_4, FRAC_PI_2] {
        let lambda = if theta == FRAC_PI_2 { Complex64::new(0.0, -1.0) } else { Complex64::new(1.0, 0.0) };
        let p = NonlinearityParams::new(1.0, lambda, theta).unwrap();
        let slope = order_fit(&p);
        println!("theta {theta}: order {slope}");
        assert!((slope - 2.0).abs() <= 0.2, "theta {theta}: order {slope}");
    }
}
