use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use reglab::io::ConfigDocument;
use reglab::ode::NonlinearityParams;
use reglab::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    VerifyKernel,
    OdeDefect,
    Simulate,
    ThirdDerivativeScan,
    DuhamelRate,
    ScalingReport,
    InequalitySuite,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::VerifyKernel,
        Experiment::OdeDefect,
        Experiment::Simulate,
        Experiment::ThirdDerivativeScan,
        Experiment::DuhamelRate,
        Experiment::ScalingReport,
        Experiment::InequalitySuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::VerifyKernel => "verify-kernel",
            Experiment::OdeDefect => "ode-defect",
            Experiment::Simulate => "simulate",
            Experiment::ThirdDerivativeScan => "third-derivative-scan",
            Experiment::DuhamelRate => "duhamel-rate",
            Experiment::ScalingReport => "scaling-report",
            Experiment::InequalitySuite => "inequality-suite",
        }
    }

    /// Grid points, half-length, horizon, step and bump amplitude used when
    /// neither the file nor a flag sets them.
    fn defaults(self) -> (usize, f64, f64, f64, f64) {
        match self {
            // Pointwise ODE on [-1, 1).
            Experiment::OdeDefect => (256, 1.0, 0.05, 5e-5, 1.0),
            Experiment::Simulate => (1024, 4.0, 0.05, 1e-4, 1.0),
            // A large bump makes the nonlinear defect visible by t = 0.02;
            // the amplitude is capped further by `scan_amplitude`.
            Experiment::ThirdDerivativeScan => (1024, 4.0, 0.02, 5e-6, MAX_SCAN_AMPLITUDE),
            Experiment::DuhamelRate => (1024, 4.0, 0.02, 5e-6, MAX_SCAN_AMPLITUDE),
            Experiment::ScalingReport => (1024, 8.0, 0.0, 0.0, 1.0),
            Experiment::VerifyKernel | Experiment::InequalitySuite => (0, 0.0, 0.0, 0.0, 1.0),
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

const MAX_SCAN_AMPLITUDE: f64 = 1000.0;

/// Required ratio of the pointwise blow-up time to the horizon.
const BLOWUP_MARGIN: f64 = 8.0;

/// `max_y y·exp(-1/(1 - y²))`, attained at `y = (√6 - √2)/2`.
fn bump_peak_factor() -> f64 {
    let y = (6f64.sqrt() - 2f64.sqrt()) / 2.0;
    y * (-1.0 / (1.0 - y * y)).exp()
}

/// Largest amplitude up to 1000 for which the ODE started from the bump's
/// peak value survives `BLOWUP_MARGIN` horizons.
pub fn scan_amplitude(params: &NonlinearityParams, t_final: f64, support_radius: f64) -> f64 {
    let unit_peak = bump_peak_factor() * support_radius;
    let a = params.alpha();
    let growth = params.lambda().re;
    if !(growth > 0.0 && t_final > 0.0 && unit_peak > 0.0) {
        return MAX_SCAN_AMPLITUDE;
    }
    let peak = (1.0 / (BLOWUP_MARGIN * t_final * a * growth)).powf(1.0 / a);
    (peak / unit_peak).min(MAX_SCAN_AMPLITUDE)
}

/// Values given on the command line; each one replaces the file's value.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub experiment: Option<String>,
    pub alpha: Option<f64>,
    pub lambda_re: Option<f64>,
    pub lambda_im: Option<f64>,
    pub theta: Option<f64>,
    pub grid_n: Option<usize>,
    pub domain_l: Option<f64>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub n: usize,
    pub half_length: f64,
    pub dimension: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeSpec {
    pub t_final: f64,
    pub dt: f64,
    pub snapshot_every: usize,
}

/// Initial bump `A y e^{−1/(1−r²)}` on `r < R`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataSpec {
    pub amplitude: f64,
    pub support_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DuhamelSpec {
    pub delta_min: f64,
    pub delta_max: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingSpec {
    pub dimension: u32,
    pub s: f64,
    pub mus: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Allowed deviation of fitted PDE exponents.
    pub slope: f64,
    /// Allowed deviation of the pointwise ODE defect exponent.
    pub defect: f64,
    /// Relative tolerance of closed-form comparisons.
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub params: NonlinearityParams,
    pub grid: GridSpec,
    pub time: TimeSpec,
    pub data: DataSpec,
    pub duhamel: DuhamelSpec,
    pub scaling: ScalingSpec,
    pub seed: u64,
    pub seed_count: usize,
    pub tolerances: Tolerances,
    /// Excluded from the report so identical runs in different directories
    /// produce identical reports.
    #[serde(skip)]
    pub out_dir: PathBuf,
}

fn pick<T: FromStr>(doc: &ConfigDocument, section: &str, key: &str, flag: Option<T>, default: T) -> Result<T> {
    match flag {
        Some(v) => Ok(v),
        None => Ok(doc.parse_value(section, key)?.unwrap_or(default)),
    }
}

fn list(doc: &ConfigDocument, section: &str, key: &str, default: &[f64]) -> Result<Vec<f64>> {
    match doc.get(section, key) {
        None => Ok(default.to_vec()),
        Some(s) => s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("[{section}] {key}: cannot parse {x:?}")))
            })
            .collect(),
    }
}

/// Every section and key the loader reads.
const KNOWN_KEYS: &[(&str, &[&str])] = &[
    ("experiment", &["name", "seed", "out-dir"]),
    ("params", &["alpha", "lambda-re", "lambda-im", "theta"]),
    ("grid", &["n", "l", "dimension"]),
    ("time", &["t-final", "dt", "snapshot-every"]),
    ("data", &["amplitude", "support-radius"]),
    ("duhamel", &["delta-min", "delta-max", "count"]),
    ("scaling", &["dimension", "s", "mu"]),
    ("inequality", &["seed-count"]),
    ("tolerance", &["slope", "defect", "relative"]),
];

fn reject_unknown(doc: &ConfigDocument) -> Result<()> {
    for (section, entries) in doc.sections() {
        let Some((_, keys)) = KNOWN_KEYS.iter().find(|(s, _)| *s == section) else {
            return Err(Error::Config(if section.is_empty() {
                "keys must appear inside a section".into()
            } else {
                format!("unknown section [{section}]")
            }));
        };
        if let Some(k) = entries.keys().find(|k| !keys.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key {k:?} in [{section}]")));
        }
    }
    Ok(())
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl ExperimentConfig {
    pub fn load(path: Option<&Path>, flags: &Overrides) -> Result<Self> {
        let doc = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                ConfigDocument::parse(&text)?
            }
            None => ConfigDocument::default(),
        };
        Self::from_document(&doc, flags)
    }

    /// Builds and validates a configuration; flags win over the document.
    pub fn from_document(doc: &ConfigDocument, flags: &Overrides) -> Result<Self> {
        reject_unknown(doc)?;
        let name = match &flags.experiment {
            Some(e) => e.clone(),
            None => doc
                .get("experiment", "name")
                .ok_or_else(|| Error::Config("no experiment given".into()))?
                .to_string(),
        };
        let experiment: Experiment = name.parse()?;
        let (n0, l0, t0, dt0, a0) = experiment.defaults();

        let alpha = pick(doc, "params", "alpha", flags.alpha, 0.5)?;
        let lre = pick(doc, "params", "lambda-re", flags.lambda_re, 1.0)?;
        let lim = pick(doc, "params", "lambda-im", flags.lambda_im, 0.0)?;
        let theta = pick(doc, "params", "theta", flags.theta, 0.0)?;
        let params = NonlinearityParams::from_parts(alpha, Complex64::new(lre, lim), theta).map_err(config_err)?;

        let grid = GridSpec {
            n: pick(doc, "grid", "n", flags.grid_n, n0)?,
            half_length: pick(doc, "grid", "l", flags.domain_l, l0)?,
            dimension: pick(doc, "grid", "dimension", None, 1)?,
        };
        let time = TimeSpec {
            t_final: pick(doc, "time", "t-final", flags.t_final, t0)?,
            dt: pick(doc, "time", "dt", flags.dt, dt0)?,
            snapshot_every: pick(doc, "time", "snapshot-every", None, 1)?,
        };
        let support_radius = pick(doc, "data", "support-radius", None, 1.0)?;
        let a0 = match experiment {
            Experiment::ThirdDerivativeScan | Experiment::DuhamelRate => {
                scan_amplitude(&params, time.t_final, support_radius)
            }
            _ => a0,
        };
        let data = DataSpec {
            amplitude: pick(doc, "data", "amplitude", None, a0)?,
            support_radius,
        };
        let duhamel = DuhamelSpec {
            delta_min: pick(doc, "duhamel", "delta-min", None, 1e-4)?,
            delta_max: pick(doc, "duhamel", "delta-max", None, 3e-3)?,
            count: pick(doc, "duhamel", "count", None, 8)?,
        };
        let scaling = ScalingSpec {
            dimension: pick(doc, "scaling", "dimension", None, 16)?,
            s: pick(doc, "scaling", "s", None, 5.5)?,
            mus: list(doc, "scaling", "mu", &[1.0, 2.0, 4.0, 8.0])?,
        };
        let cfg = Self {
            experiment,
            params,
            grid,
            time,
            data,
            duhamel,
            scaling,
            seed: pick(doc, "experiment", "seed", flags.seed, 0)?,
            seed_count: pick(doc, "inequality", "seed-count", None, 1000)?,
            tolerances: Tolerances {
                slope: pick(doc, "tolerance", "slope", None, 0.1)?,
                defect: pick(doc, "tolerance", "defect", None, 0.05)?,
                relative: pick(doc, "tolerance", "relative", None, 1e-8)?,
            },
            out_dir: match &flags.out_dir {
                Some(p) => p.clone(),
                None => PathBuf::from(doc.get("experiment", "out-dir").unwrap_or("reglab-out")),
            },
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let uses_grid = !matches!(self.experiment, Experiment::VerifyKernel | Experiment::InequalitySuite);
        let uses_time = uses_grid && self.experiment != Experiment::ScalingReport;
        if uses_grid {
            let g = &self.grid;
            if !(g.n >= 8 && g.n.is_power_of_two() && g.n <= 1 << 16) {
                return bad(format!("grid n must be a power of two in [8, 65536], got {}", g.n));
            }
            if !(g.half_length > 0.0 && g.half_length.is_finite()) {
                return bad(format!("domain half-length must be positive, got {}", g.half_length));
            }
            if !(1..=2).contains(&g.dimension) {
                return bad(format!("dimension must be 1 or 2, got {}", g.dimension));
            }
        }
        if uses_time {
            let t = &self.time;
            if !(t.t_final > 0.0 && t.t_final.is_finite() && t.dt > 0.0 && t.dt.is_finite()) {
                return bad(format!("need t-final > 0 and dt > 0, got {} and {}", t.t_final, t.dt));
            }
            if self.experiment == Experiment::OdeDefect && t.dt > 1e-3 * t.t_final * (1.0 + 1e-12) {
                return bad(format!("dt = {} exceeds 1e-3 · t-final", t.dt));
            }
            if t.snapshot_every == 0 {
                return bad("snapshot-every must be at least 1".into());
            }
            let d = &self.data;
            if !(d.amplitude.is_finite() && d.support_radius > 0.0 && 4.0 * d.support_radius <= self.grid.half_length * (1.0 + 1e-12))
                && self.experiment != Experiment::OdeDefect
            {
                return bad(format!(
                    "bump needs finite amplitude and 4·radius <= L, got A = {}, R = {}",
                    d.amplitude, d.support_radius
                ));
            }
        }
        if self.experiment == Experiment::DuhamelRate {
            let h = &self.duhamel;
            if !(h.delta_min > 0.0 && h.delta_max > h.delta_min && h.count >= 3) {
                return bad("duhamel ladder needs 0 < delta-min < delta-max and count >= 3".into());
            }
            if self.grid.dimension != 1 {
                return bad("duhamel-rate runs on the line".into());
            }
        }
        if self.experiment == Experiment::ThirdDerivativeScan && self.grid.dimension != 1 {
            return bad("third-derivative-scan runs on the line".into());
        }
        if self.experiment == Experiment::ScalingReport {
            if self.scaling.mus.is_empty() || self.scaling.mus.iter().any(|m| !(*m >= 1.0 && m.is_finite())) {
                return bad("every dilation factor must be >= 1".into());
            }
            if self.scaling.dimension == 0 || !self.scaling.s.is_finite() {
                return bad("scaling needs dimension >= 1 and finite s".into());
            }
        }
        if self.experiment == Experiment::InequalitySuite && self.seed_count < 100 {
            return bad(format!("seed-count must be at least 100, got {}", self.seed_count));
        }
        let tol = &self.tolerances;
        if ![tol.slope, tol.defect, tol.relative].iter().all(|t| *t > 0.0 && t.is_finite()) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(s: &str) -> ConfigDocument {
        ConfigDocument::parse(s).unwrap()
    }

    #[test]
    fn unknown_sections_and_keys_are_rejected() {
        for text in [
            "[experiment]\nname = simulate\n[params]\naplha = 1\n",
            "[experiment]\nname = simulate\n[plot]\nwidth = 3\n",
            "name = simulate\n",
        ] {
            let err = ExperimentConfig::from_document(&doc(text), &Overrides::default()).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text:?}");
        }
    }

    #[test]
    fn scan_amplitude_keeps_blowup_margin() {
        let peak = |x: f64| {
            let r2 = x * x;
            x * (-1.0 / (1.0 - r2)).exp()
        };
        let brute = (1..100_000).map(|i| peak(i as f64 / 100_000.0)).fold(0.0, f64::max);
        assert!((bump_peak_factor() - brute).abs() < 1e-9);
        let cases = [(0.5, 1000.0), (1.0, 47.327), (1.5, 19.608)];
        for (alpha, expect) in cases {
            let d = doc(&format!("[experiment]\nname = duhamel-rate\n[params]\nalpha = {alpha}\n"));
            let cfg = ExperimentConfig::from_document(&d, &Overrides::default()).unwrap();
            assert!((cfg.data.amplitude - expect).abs() < 1e-3, "{alpha}: {}", cfg.data.amplitude);
            let tb = cfg.params.blowup_time(cfg.data.amplitude * bump_peak_factor()).unwrap();
            assert!(tb >= BLOWUP_MARGIN * cfg.time.t_final * (1.0 - 1e-12));
        }
        let d = doc("[experiment]\nname = duhamel-rate\n[params]\nalpha = 1.5\n[data]\namplitude = 3\n");
        assert_eq!(ExperimentConfig::from_document(&d, &Overrides::default()).unwrap().data.amplitude, 3.0);
    }

    #[test]
    fn file_values_and_flag_precedence() {
        let d = doc("[experiment]\nname = simulate\nseed = 4\n[params]\nalpha = 0.75\ntheta = 0.5\n[grid]\nn = 256\n");
        let cfg = ExperimentConfig::from_document(&d, &Overrides::default()).unwrap();
        assert_eq!(cfg.experiment, Experiment::Simulate);
        assert_eq!(cfg.params.alpha(), 0.75);
        assert_eq!(cfg.grid.n, 256);
        assert_eq!(cfg.seed, 4);
        let flags = Overrides {
            alpha: Some(1.25),
            grid_n: Some(512),
            experiment: Some("ode-defect".into()),
            ..Overrides::default()
        };
        let cfg = ExperimentConfig::from_document(&d, &flags).unwrap();
        assert_eq!(cfg.experiment, Experiment::OdeDefect);
        assert_eq!(cfg.params.alpha(), 1.25);
        assert_eq!(cfg.params.theta(), 0.5);
        assert_eq!(cfg.grid.n, 512);
    }

    #[test]
    fn invalid_fields_are_config_errors() {
        let cases = [
            "[experiment]\nname = nope",
            "[experiment]\nname = simulate\n[params]\nalpha = -1",
            "[experiment]\nname = simulate\n[params]\nalpha = x",
            "[experiment]\nname = simulate\n[grid]\nn = 1000",
            "[experiment]\nname = ode-defect\n[time]\ndt = 0.01",
            "[experiment]\nname = simulate\n[time]\ndt = -1",
            "[experiment]\nname = simulate\n[data]\nsupport-radius = 2",
            "[experiment]\nname = duhamel-rate\n[duhamel]\ncount = 2",
            "[experiment]\nname = inequality-suite\n[inequality]\nseed-count = 5",
            "[experiment]\nname = scaling-report\n[scaling]\nmu = 1, 0.5",
            "[params]\nalpha = 0.5",
        ];
        for c in cases {
            assert!(
                matches!(ExperimentConfig::from_document(&doc(c), &Overrides::default()), Err(Error::Config(_))),
                "{c:?}"
            );
        }
    }

    #[test]
    fn every_experiment_name_parses() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
        }
    }

    #[test]
    fn zero_coupling_gives_linear_control() {
        let flags = Overrides {
            experiment: Some("simulate".into()),
            lambda_re: Some(0.0),
            ..Overrides::default()
        };
        let cfg = ExperimentConfig::from_document(&ConfigDocument::default(), &flags).unwrap();
        assert!(cfg.params.is_linear());
    }
}
