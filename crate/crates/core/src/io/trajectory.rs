use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use super::atomic::write_atomic;
use crate::error::{Error, Result};
use crate::evolution::{Scheme, Trajectory};
use crate::numerics::{Domain, Grid1D, GridFunction};
use crate::ode::NonlinearityParams;

pub const MAGIC: &[u8; 4] = b"RGLB";
pub const FORMAT_VERSION: u32 = 1;

/// Largest accepted points per axis; keeps header-driven allocation bounded.
const MAX_AXIS_POINTS: u64 = 1 << 24;

// Layout, all little-endian:
//   magic[4] version:u32
//   grid:      ndim:u32, per axis (x' first) n:u64 L:f64
//   params:    alpha lambda_re lambda_im theta dt : f64
//   scheme:    u32
//   blowup:    flag:u8 time:f64
//   times:     count:u64, count × f64
//   flags:     count × u8 (1 = snapshot blown up)
//   snapshots: count × len × (re:f64, im:f64)

/// Human-readable copy of the header, written next to the binary file.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryMetadata {
    pub format_version: u32,
    pub dimension: usize,
    pub points: Vec<usize>,
    pub half_lengths: Vec<f64>,
    pub params: NonlinearityParams,
    pub dt: f64,
    pub scheme: Scheme,
    pub blowup_time: Option<f64>,
    pub snapshots: usize,
    pub first_time: f64,
    pub final_time: f64,
}

impl TrajectoryMetadata {
    pub fn of(traj: &Trajectory) -> Self {
        let axes = traj.domain().axes();
        Self {
            format_version: FORMAT_VERSION,
            dimension: axes.len(),
            points: axes.iter().map(Grid1D::n_points).collect(),
            half_lengths: axes.iter().map(Grid1D::half_length).collect(),
            params: *traj.params(),
            dt: traj.dt(),
            scheme: traj.scheme(),
            blowup_time: traj.blowup_time(),
            snapshots: traj.times().len(),
            first_time: traj.times()[0],
            final_time: traj.final_time(),
        }
    }
}

pub fn encode_trajectory(traj: &Trajectory) -> Vec<u8> {
    let d = traj.domain();
    let count = traj.times().len();
    let mut out = Vec::with_capacity(128 + count * (9 + 16 * d.len()));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let axes = d.axes();
    out.extend_from_slice(&(axes.len() as u32).to_le_bytes());
    for g in &axes {
        out.extend_from_slice(&(g.n_points() as u64).to_le_bytes());
        out.extend_from_slice(&g.half_length().to_le_bytes());
    }
    let p = traj.params();
    for v in [p.alpha(), p.lambda().re, p.lambda().im, p.theta(), traj.dt()] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&traj.scheme().code().to_le_bytes());
    out.push(u8::from(traj.blowup_time().is_some()));
    out.extend_from_slice(&traj.blowup_time().unwrap_or(0.0).to_le_bytes());
    out.extend_from_slice(&(count as u64).to_le_bytes());
    for t in traj.times() {
        out.extend_from_slice(&t.to_le_bytes());
    }
    out.extend(traj.snapshots().iter().map(|s| u8::from(s.is_blown_up())));
    for s in traj.snapshots() {
        for z in s.values() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail(&self, section: &'static str, reason: impl Into<String>) -> Error {
        Error::Format {
            section,
            offset: self.pos,
            reason: reason.into(),
        }
    }

    fn take(&mut self, n: usize, section: &'static str) -> Result<&'a [u8]> {
        let left = self.bytes.len() - self.pos;
        if n > left {
            return Err(self.fail(section, format!("truncated: need {n} bytes, {left} left")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self, section: &'static str) -> Result<u8> {
        Ok(self.take(1, section)?[0])
    }

    fn u32(&mut self, section: &'static str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, section)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, section: &'static str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, section)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self, section: &'static str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, section)?.try_into().expect("8 bytes")))
    }

    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

/// Inverse of [`encode_trajectory`]. Nothing is returned unless the whole
/// buffer is consumed and every section validates.
pub fn decode_trajectory(bytes: &[u8]) -> Result<Trajectory> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != MAGIC {
        r.pos = 0;
        return Err(r.fail("magic", "not a trajectory file"));
    }
    let version = r.u32("version")?;
    if version != FORMAT_VERSION {
        return Err(Error::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }

    let ndim = r.u32("grid")?;
    if !(1..=2).contains(&ndim) {
        return Err(r.fail("grid", format!("dimension {ndim} not in {{1, 2}}")));
    }
    let mut axes = Vec::with_capacity(2);
    for _ in 0..ndim {
        let n = r.u64("grid")?;
        let l = r.f64("grid")?;
        if n > MAX_AXIS_POINTS {
            return Err(r.fail("grid", format!("{n} points exceeds the limit")));
        }
        axes.push(Grid1D::new(n as usize, l).map_err(|e| r.fail("grid", e.to_string()))?);
    }
    let domain = match axes[..] {
        [y] => Domain::Line(y),
        [x, y] => Domain::Plane { x, y },
        _ => unreachable!("ndim checked"),
    };

    let mut pv = [0.0; 5];
    for v in &mut pv {
        *v = r.f64("params")?;
    }
    let [alpha, lre, lim, theta, dt] = pv;
    let params =
        NonlinearityParams::from_parts(alpha, Complex64::new(lre, lim), theta).map_err(|e| r.fail("params", e.to_string()))?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(r.fail("params", format!("dt must be positive, got {dt}")));
    }
    let code = r.u32("scheme")?;
    let scheme = Scheme::from_code(code).ok_or_else(|| r.fail("scheme", format!("unknown scheme {code}")))?;
    let flag = r.u8("blowup")?;
    let bt = r.f64("blowup")?;
    let blowup = match flag {
        0 => None,
        1 if bt.is_finite() => Some(bt),
        _ => return Err(r.fail("blowup", "bad blow-up record")),
    };

    let count = r.u64("times")?;
    let per_snapshot = 8 + 1 + 16 * domain.len() as u64;
    if count == 0 || count.checked_mul(per_snapshot).map_or(true, |need| need > r.remaining() as u64) {
        return Err(r.fail("times", format!("{count} snapshots do not fit in {} bytes", r.remaining())));
    }
    let count = count as usize;
    let mut times = Vec::with_capacity(count);
    for _ in 0..count {
        times.push(r.f64("times")?);
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(r.fail("times", "times must be finite and strictly increasing"));
    }
    let flags = r.take(count, "flags")?.to_vec();
    if flags.iter().any(|&f| f > 1) {
        return Err(r.fail("flags", "flag bytes must be 0 or 1"));
    }

    let mut snapshots = Vec::with_capacity(count);
    for &blown in &flags {
        let start = r.pos;
        let raw = r.take(16 * domain.len(), "snapshots")?;
        let values: Vec<Complex64> = raw
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        let snap = if blown == 1 {
            GridFunction::new_blown_up(domain, values)
        } else {
            GridFunction::new(domain, values)
        };
        snapshots.push(snap.map_err(|e| Error::Format {
            section: "snapshots",
            offset: start,
            reason: e.to_string(),
        })?);
    }
    if r.remaining() != 0 {
        return Err(r.fail("trailer", format!("{} unexpected trailing bytes", r.remaining())));
    }
    Trajectory::new(params, domain, times, snapshots, dt, scheme, blowup).map_err(|e| r.fail("trailer", e.to_string()))
}

/// `<path>.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes the binary file and its JSON sidecar, each atomically.
pub fn persist_trajectory(traj: &Trajectory, path: &Path) -> Result<()> {
    write_atomic(path, &encode_trajectory(traj))?;
    let meta = serde_json::to_vec_pretty(&TrajectoryMetadata::of(traj)).expect("metadata serializes");
    write_atomic(&sidecar_path(path), &meta)
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    decode_trajectory(&std::fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{make_odd_bump, solve};
    use proptest::prelude::*;

    fn small_run() -> Trajectory {
        let p = NonlinearityParams::new(0.5, Complex64::new(1.0, 0.3), 0.2).unwrap();
        let d = Domain::Line(Grid1D::new(256, 4.0).unwrap());
        let phi = make_odd_bump(1, 1.0, 1.0).unwrap();
        solve(&p, &phi, &d, 0.01, 1e-4, 10).unwrap()
    }

    fn synthetic(domain: Domain, count: usize, seed: f64) -> Trajectory {
        let snaps: Vec<GridFunction> = (0..count)
            .map(|k| {
                GridFunction::from_fn(domain, |x, y| Complex64::new((seed * y + x + k as f64).sin(), (seed * x * y).cos()))
                    .unwrap()
            })
            .collect();
        Trajectory::new(
            NonlinearityParams::linear_control(1.0, 0.0).unwrap(),
            domain,
            (0..count).map(|k| k as f64 * 0.5).collect(),
            snaps,
            0.5,
            Scheme::PointwiseRk4,
            None,
        )
        .unwrap()
    }

    fn assert_bit_equal(a: &Trajectory, b: &Trajectory) {
        assert_eq!(a.domain(), b.domain());
        assert_eq!(a.params(), b.params());
        assert_eq!(a.dt().to_bits(), b.dt().to_bits());
        assert_eq!(a.scheme(), b.scheme());
        assert_eq!(a.blowup_time(), b.blowup_time());
        for (s, t) in a.times().iter().zip(b.times()) {
            assert_eq!(s.to_bits(), t.to_bits());
        }
        for (s, t) in a.snapshots().iter().zip(b.snapshots()) {
            assert_eq!(s.is_blown_up(), t.is_blown_up());
            for (u, v) in s.values().iter().zip(t.values()) {
                assert_eq!((u.re.to_bits(), u.im.to_bits()), (v.re.to_bits(), v.im.to_bits()));
            }
        }
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let traj = small_run();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.rglb");
        persist_trajectory(&traj, &path).unwrap();
        let back = load_trajectory(&path).unwrap();
        assert_bit_equal(&traj, &back);
        let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(sidecar_path(&path)).unwrap()).unwrap();
        assert_eq!(meta["snapshots"], traj.times().len());
        assert_eq!(meta["points"][0], 256);
    }

    #[test]
    fn plane_round_trip() {
        let g = Grid1D::new(8, 2.0).unwrap();
        let traj = synthetic(Domain::Plane { x: Grid1D::new(16, 1.0).unwrap(), y: g }, 3, 1.7);
        assert_bit_equal(&traj, &decode_trajectory(&encode_trajectory(&traj)).unwrap());
    }

    #[test]
    fn blown_up_snapshot_survives() {
        let d = Domain::Line(Grid1D::new(8, 1.0).unwrap());
        let ok = GridFunction::zeros(d);
        let mut vals = vec![Complex64::new(1.0, 0.0); 8];
        vals[3] = Complex64::new(f64::INFINITY, f64::NAN);
        let bad = GridFunction::new_blown_up(d, vals).unwrap();
        let traj = Trajectory::new(
            NonlinearityParams::heat(1.0, 1.0).unwrap(),
            d,
            vec![0.0, 0.1],
            vec![ok, bad],
            0.1,
            Scheme::StrangExactNl,
            Some(0.1),
        )
        .unwrap();
        assert_bit_equal(&traj, &decode_trajectory(&encode_trajectory(&traj)).unwrap());
    }

    fn section_of(bytes: &[u8]) -> &'static str {
        match decode_trajectory(bytes) {
            Err(Error::Format { section, .. }) => section,
            other => panic!("expected a format error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_names_missing_section() {
        let traj = synthetic(Domain::Line(Grid1D::new(8, 1.0).unwrap()), 2, 0.3);
        let bytes = encode_trajectory(&traj);
        assert_eq!(section_of(&bytes[..2]), "magic");
        assert_eq!(section_of(&bytes[..10]), "grid");
        assert_eq!(section_of(&bytes[..30]), "params");
        assert_eq!(section_of(&bytes[..bytes.len() - 1]), "times");
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(section_of(&extra), "trailer");
    }

    #[test]
    fn version_mismatch_rejected() {
        let traj = synthetic(Domain::Line(Grid1D::new(8, 1.0).unwrap()), 2, 0.3);
        let mut bytes = encode_trajectory(&traj);
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            decode_trajectory(&bytes),
            Err(Error::Version { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn bad_magic_and_fields_rejected() {
        let traj = synthetic(Domain::Line(Grid1D::new(8, 1.0).unwrap()), 2, 0.3);
        let bytes = encode_trajectory(&traj);
        let mut b = bytes.clone();
        b[0] = b'X';
        assert_eq!(section_of(&b), "magic");
        let mut b = bytes.clone();
        b[12..20].copy_from_slice(&7u64.to_le_bytes());
        assert_eq!(section_of(&b), "grid");
        let mut b = bytes.clone();
        b[28..36].copy_from_slice(&5.0f64.to_le_bytes());
        assert_eq!(section_of(&b), "params");
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_trajectory(&dir.path().join("none")), Err(Error::Io(_))));
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(count in 1usize..5, seed in -3.0f64..3.0, n in prop::sample::select(vec![8usize, 16, 32])) {
            let traj = synthetic(Domain::Line(Grid1D::new(n, 2.0).unwrap()), count, seed);
            let back = decode_trajectory(&encode_trajectory(&traj)).unwrap();
            prop_assert_eq!(encode_trajectory(&back), encode_trajectory(&traj));
        }

        #[test]
        fn corrupt_bytes_never_panic(pos in 0usize..400, byte in any::<u8>(), cut in 0usize..400) {
            let traj = synthetic(Domain::Line(Grid1D::new(8, 1.0).unwrap()), 2, 0.3);
            let mut bytes = encode_trajectory(&traj);
            let p = pos % bytes.len();
            bytes[p] = byte;
            bytes.truncate(cut.max(1).min(bytes.len()));
            let _ = decode_trajectory(&bytes);
        }
    }
}
