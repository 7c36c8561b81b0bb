use num_complex::Complex64;

use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::numerics::{loglog_fit, spectral_y_derivative, GridFunction, RegressionFit};

/// Relative oddness defect tolerated by the `y = 0` diagnostics.
const ODD_TOLERANCE: f64 = 1e-10;

fn check_odd(u: &GridFunction) -> Result<()> {
    let a = u.odd_asymmetry();
    if a > ODD_TOLERANCE * u.sup_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Invariant(format!("snapshot is not odd in y (defect {a:e})")));
    }
    Ok(())
}

/// `η(t, x') = ∂_y u(t, x', 0)` for every snapshot.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaTrack {
    pub times: Vec<f64>,
    /// `eta[i][r]` at time `times[i]` and transverse row `r`.
    pub eta: Vec<Vec<Complex64>>,
    /// `∂_yφ(0, 0)`.
    pub eta0: Complex64,
}

fn eta_of(u: &GridFunction) -> Vec<Complex64> {
    let d = spectral_y_derivative(u, 1);
    let j0 = u.domain().y_axis().origin_index();
    (0..u.domain().rows()).map(|r| d.row(r)[j0]).collect()
}

pub fn eta_track(traj: &Trajectory) -> Result<EtaTrack> {
    let mut eta = Vec::with_capacity(traj.times().len());
    for s in traj.snapshots() {
        check_odd(s)?;
        eta.push(eta_of(s));
    }
    let eta0 = eta[0][traj.domain().origin_row()];
    Ok(EtaTrack {
        times: traj.times().to_vec(),
        eta,
        eta0,
    })
}

/// Split `|u|^α u = |ηy|^α ηy + w̃` at one time.
#[derive(Clone, Debug)]
pub struct Remainder {
    pub t: f64,
    pub eta: Vec<Complex64>,
    pub w_tilde: GridFunction,
    /// `C = ½ sup|∂²_y u|` over the grid.
    pub quadratic_constant: f64,
    /// `max |u − ηy| / (C y²)` over `y ≠ 0`; at most 1 when the bound holds.
    pub quadratic_ratio: f64,
}

impl Remainder {
    pub fn quadratic_bound_holds(&self) -> bool {
        self.quadratic_ratio <= 1.0 + 1e-6
    }

    /// Fit of `log max_{x'}|w̃(x', y)|` against `log y` on the dyadic ladder
    /// from `y_max` down to four grid spacings.
    pub fn decay_fit(&self, y_max: f64) -> Result<RegressionFit> {
        let d = *self.w_tilde.domain();
        let g = d.y_axis();
        let ladder = g.dyadic_ladder(y_max, 4.0)?;
        if ladder.len() < 3 {
            return Err(Error::Resolution("remainder ladder has fewer than 3 points".into()));
        }
        let ys: Vec<f64> = ladder.iter().map(|&j| g.coord(j)).collect();
        let mags: Vec<f64> = ladder
            .iter()
            .map(|&j| (0..d.rows()).map(|r| self.w_tilde.row(r)[j].norm()).fold(0.0, f64::max))
            .collect();
        loglog_fit(&ys, &mags)
    }
}

pub fn remainder_decomposition(traj: &Trajectory, t: f64) -> Result<Remainder> {
    let u = traj.snapshot_at(t)?;
    check_odd(u)?;
    let d = *u.domain();
    let g = d.y_axis();
    let alpha = traj.params().alpha();
    let eta = eta_of(u);
    let quadratic_constant = 0.5 * spectral_y_derivative(u, 2).sup_norm();
    let pow = |z: Complex64| {
        let r = z.norm();
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            z * r.powf(alpha)
        }
    };
    let mut w = Vec::with_capacity(d.len());
    let mut ratio: f64 = 0.0;
    for r in 0..d.rows() {
        for (j, &uv) in u.row(r).iter().enumerate() {
            let y = g.coord(j);
            let lead = eta[r] * y;
            w.push(if y == 0.0 { Complex64::new(0.0, 0.0) } else { pow(uv) - pow(lead) });
            if y != 0.0 && quadratic_constant > 0.0 {
                ratio = ratio.max((uv - lead).norm() / (quadratic_constant * y * y));
            }
        }
    }
    Ok(Remainder {
        t,
        eta,
        w_tilde: GridFunction::new(d, w)?,
        quadratic_constant,
        quadratic_ratio: ratio,
    })
}
