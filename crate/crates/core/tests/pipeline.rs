use reglab::diagnostics::{duhamel_fifth_derivative_rate, third_derivative_holder_scan, DuhamelProbe};
use reglab::evolution::{eta_track, make_odd_bump, remainder_decomposition, solve};
use reglab::io::{load_trajectory, persist_trajectory, sidecar_path};
use reglab::numerics::{Domain, Grid1D};
use reglab::ode::NonlinearityParams;

#[test]
fn persisted_run_gives_identical_diagnostics() {
    let p = NonlinearityParams::heat(0.5, 1.0).unwrap();
    let phi = make_odd_bump(1, 1000.0, 1.0).unwrap();
    let d = Domain::Line(Grid1D::new(1024, 4.0).unwrap());
    let traj = solve(&p, &phi, &d, 0.01, 1e-5, 1).unwrap();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.rglb");
    persist_trajectory(&traj, &path).unwrap();
    assert!(sidecar_path(&path).exists());
    let back = load_trajectory(&path).unwrap();
    assert_eq!(back, traj);

    let t = traj.final_time();
    let a = third_derivative_holder_scan(&traj, t, &[0.5]).unwrap();
    let b = third_derivative_holder_scan(&back, t, &[0.5]).unwrap();
    assert_eq!(a.fit.slope.to_bits(), b.fit.slope.to_bits());
    assert!((a.fit.slope - 0.5).abs() < 0.15, "exponent {}", a.fit.slope);

    let eta = eta_track(&back).unwrap();
    assert!((eta.eta0 - phi.dy_at_origin()).norm() < 1e-6 * phi.dy_at_origin().norm());
    let rem = remainder_decomposition(&back, t).unwrap();
    assert!(rem.quadratic_bound_holds());

    let ladder = DuhamelProbe::geometric_ladder(t, 1e-4, 3e-3, 5);
    let rate = duhamel_fifth_derivative_rate(&DuhamelProbe::new(&back, t, ladder, 0.0).unwrap()).unwrap();
    assert!(rate.slope_error() < 0.1, "slope {}", rate.fit.slope);
}
