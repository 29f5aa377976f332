//! File formats: CSV tables, trajectory files with a JSON bigbang manifest, and the
//! little-endian binary wavefunction dump.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classical::CrossSectionResult;
use crate::geometry::{DecadeRow, IntervalBox, NBigBang, SampledTrajectory, SpaceTimePoint, Vec3};
use crate::measures::{BoxMeasure, DiscreteMeasure, NcdicReport};
use crate::probability::LlnEstimate;
use crate::quantum::{GridSpec, GridState, QuantumMeasureRun};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed data: {0}")]
    Format(String),
}

fn format_err(e: impl std::fmt::Display) -> IoError {
    IoError::Format(e.to_string())
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn row(values: impl IntoIterator<Item = f64>) -> Vec<String> {
    values.into_iter().map(|v| v.to_string()).collect()
}

fn axis_headers(prefix: &str, dim: usize) -> Vec<String> {
    if dim == 1 {
        vec![prefix.to_string()]
    } else {
        (0..dim).map(|k| format!("{prefix}_{k}")).collect()
    }
}

fn parse_record(rec: &csv::StringRecord, line: usize) -> Result<Vec<f64>, IoError> {
    rec.iter()
        .map(|s| s.trim().parse::<f64>().map_err(|e| IoError::Format(format!("line {line}: {s:?}: {e}"))))
        .collect()
}

fn expect_header(found: &csv::StringRecord, expected: &[String]) -> Result<(), IoError> {
    let found: Vec<&str> = found.iter().map(str::trim).collect();
    if found != expected.iter().map(String::as_str).collect::<Vec<_>>() {
        return Err(IoError::Format(format!("header {found:?}, expected {expected:?}")));
    }
    Ok(())
}

/// Writes `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let file = |source| IoError::File { path: path.to_path_buf(), source };
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or_default()
    ));
    fs::write(&tmp, bytes).map_err(file)?;
    fs::rename(&tmp, path).map_err(file)
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, IoError> {
    fs::read(path).map_err(|source| IoError::File { path: path.to_path_buf(), source })
}

// Trajectories

pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "x", "y", "z"];

pub fn write_trajectory<W: Write>(w: W, traj: &SampledTrajectory<f64>) -> Result<(), IoError> {
    let mut out = writer(w);
    out.write_record(TRAJECTORY_HEADER)?;
    for &(t, x) in traj.samples() {
        out.write_record(row([t, x.x, x.y, x.z]))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(r: R) -> Result<SampledTrajectory<f64>, IoError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    expect_header(rd.headers()?, &TRAJECTORY_HEADER.map(String::from))?;
    let mut samples = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let v = parse_record(&rec?, i + 2)?;
        samples.push((v[0], Vec3::new(v[1], v[2], v[3])));
    }
    SampledTrajectory::new(samples).map_err(format_err)
}

/// JSON manifest listing one trajectory CSV per particle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BigBangManifest {
    pub origin: [f64; 4],
    /// Paths relative to the manifest's directory.
    pub files: Vec<String>,
}

/// Writes `{stem}_{i}.csv` per trajectory and `{stem}.json`; returns every path written.
pub fn write_bigbang(dir: &Path, stem: &str, bb: &NBigBang<f64>) -> Result<Vec<PathBuf>, IoError> {
    let mut written = Vec::new();
    let mut files = Vec::new();
    for (i, tr) in bb.trajectories().iter().enumerate() {
        let name = format!("{stem}_{i}.csv");
        let mut buf = Vec::new();
        write_trajectory(&mut buf, tr)?;
        let path = dir.join(&name);
        write_atomic(&path, &buf)?;
        written.push(path);
        files.push(name);
    }
    let o = bb.origin();
    let manifest = BigBangManifest { origin: [o.t, o.x.x, o.x.y, o.x.z], files };
    let path = dir.join(format!("{stem}.json"));
    write_atomic(&path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    written.push(path);
    Ok(written)
}

pub fn read_bigbang(manifest: &Path) -> Result<NBigBang<f64>, IoError> {
    let m: BigBangManifest = serde_json::from_slice(&read_file(manifest)?)?;
    let dir = manifest.parent().unwrap_or(Path::new("."));
    let trajs = m
        .files
        .iter()
        .map(|f| read_trajectory(read_file(&dir.join(f))?.as_slice()))
        .collect::<Result<Vec<_>, _>>()?;
    let bb = NBigBang::new(trajs).map_err(format_err)?;
    let o = bb.origin();
    let listed = SpaceTimePoint::new(m.origin[0], Vec3::new(m.origin[1], m.origin[2], m.origin[3])).map_err(format_err)?;
    if o != listed {
        return Err(IoError::Format(format!("manifest origin {:?} differs from the trajectories' {o:?}", m.origin)));
    }
    Ok(bb)
}

// Measures

fn box_header(prefix_lo: &str, prefix_hi: &str, dim: usize) -> Vec<String> {
    let mut h = axis_headers(prefix_lo, dim);
    h.extend(axis_headers(prefix_hi, dim));
    h
}

/// `lo...,hi...,mass`, one row per support box.
pub fn write_measure<W: Write>(w: W, mu: &DiscreteMeasure) -> Result<(), IoError> {
    write_box_masses(w, mu.dim(), mu.support().iter().map(|(b, m)| (b, *m)))
}

/// The measure format for boxes that need not be disjoint, such as per-box limits.
pub fn write_box_masses<'a, W: Write>(
    w: W,
    dim: usize,
    rows: impl IntoIterator<Item = (&'a IntervalBox<f64>, f64)>,
) -> Result<(), IoError> {
    let mut out = writer(w);
    let mut header = box_header("lo", "hi", dim);
    header.push("mass".into());
    out.write_record(&header)?;
    for (b, m) in rows {
        if b.dim() != dim {
            return Err(IoError::Format(format!("{}-dimensional box in a {dim}-dimensional table", b.dim())));
        }
        out.write_record(row(b.lo().iter().chain(b.hi()).copied().chain([m])))?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_measure<R: Read>(r: R) -> Result<DiscreteMeasure, IoError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    let cols = rd.headers()?.len();
    if cols < 3 || cols % 2 == 0 {
        return Err(IoError::Format(format!("{cols} columns cannot hold lo...,hi...,mass")));
    }
    let dim = (cols - 1) / 2;
    let mut header = box_header("lo", "hi", dim);
    header.push("mass".into());
    expect_header(rd.headers()?, &header)?;
    let mut support = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let v = parse_record(&rec?, i + 2)?;
        let b = IntervalBox::new(v[..dim].to_vec(), v[dim..2 * dim].to_vec()).map_err(format_err)?;
        support.push((b, v[2 * dim]));
    }
    DiscreteMeasure::with_dim(dim, support).map_err(format_err)
}

/// `box_lo...,box_hi...,t,mass`, one row per (time, box).
pub fn write_quantum_run<W: Write>(w: W, run: &QuantumMeasureRun) -> Result<(), IoError> {
    let mut out = writer(w);
    let dim = run.per_t.first().and_then(|g| g.boxes.first()).map_or(1, |b| b.dim());
    let mut header = box_header("box_lo", "box_hi", dim);
    header.extend(["t".into(), "mass".into()]);
    out.write_record(&header)?;
    for g in &run.per_t {
        for (b, m) in g.boxes.iter().zip(&g.mass) {
            out.write_record(row(b.lo().iter().chain(b.hi()).copied().chain([g.t_used, *m])))?;
        }
    }
    out.flush()?;
    Ok(())
}

pub const NCDIC_HEADER: [&str; 7] = ["lo", "hi", "pi_C", "pi_Q", "mu_C", "mu_Q", "gap"];

pub fn write_ncdic<W: Write>(w: W, rep: &NcdicReport) -> Result<(), IoError> {
    let mut out = writer(w);
    out.write_record(NCDIC_HEADER)?;
    for r in &rep.rows {
        out.write_record(row([r.lo, r.hi, r.pi_c, r.pi_q, r.mu_c, r.mu_q, r.gap]))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_cross_section<W: Write>(w: W, res: &CrossSectionResult) -> Result<(), IoError> {
    let mut out = writer(w);
    out.write_record(["theta", "sigma"])?;
    for (th, s) in res.theta_grid.iter().zip(&res.sigma) {
        out.write_record(row([*th, *s]))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_lln<W: Write>(w: W, rows: &[LlnEstimate]) -> Result<(), IoError> {
    let mut out = writer(w);
    out.write_record(["n", "epsilon", "measure", "chebyshev_bound"])?;
    for e in rows {
        out.write_record([e.n.to_string(), e.epsilon.to_string(), e.measure.to_string(), e.chebyshev_bound.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_decades<W: Write>(w: W, rows: &[DecadeRow<f64>]) -> Result<(), IoError> {
    let mut out = writer(w);
    out.write_record(["T", "estimate_x", "estimate_y", "estimate_z", "residual"])?;
    for r in rows {
        out.write_record(row([r.t_end, r.value.x, r.value.y, r.value.z, r.residual]))?;
    }
    out.flush()?;
    Ok(())
}

// Binary wavefunctions

const STATE_HEADER_BYTES: usize = 40;

/// Header `dim, n` (u64) and `L, m, t` (f64), then `re, im` per grid point, all little-endian.
/// The format has no field for the window centre, so only origin-centred grids are written.
pub fn write_state<W: Write>(mut w: W, state: &GridState<f64>) -> Result<(), IoError> {
    let spec = state.spec();
    if spec.center.iter().any(|&c| c != 0.0) {
        return Err(IoError::Format(format!("grid centred at {:?}; the state format stores origin-centred grids only", spec.center)));
    }
    let mut buf = Vec::with_capacity(STATE_HEADER_BYTES + 16 * state.psi().len());
    buf.extend((spec.dim as u64).to_le_bytes());
    buf.extend((spec.n as u64).to_le_bytes());
    for v in [spec.extent, spec.mass, state.t()] {
        buf.extend(v.to_le_bytes());
    }
    for z in state.psi() {
        buf.extend(z.re.to_le_bytes());
        buf.extend(z.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_state<R: Read>(mut r: R) -> Result<GridState<f64>, IoError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < STATE_HEADER_BYTES {
        return Err(IoError::Format(format!("state file has {} bytes, shorter than its header", bytes.len())));
    }
    let word = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().unwrap() };
    let (dim, n) = (u64::from_le_bytes(word(0)), u64::from_le_bytes(word(1)));
    let (extent, mass, t) = (f64::from_le_bytes(word(2)), f64::from_le_bytes(word(3)), f64::from_le_bytes(word(4)));
    if !(1..=2).contains(&dim) || n > 1 << 24 {
        return Err(IoError::Format(format!("implausible header dim = {dim}, n = {n}")));
    }
    let points = (n as usize).pow(dim as u32);
    let expected = STATE_HEADER_BYTES + 16 * points;
    if bytes.len() != expected {
        return Err(IoError::Format(format!("state file has {} bytes, header implies {expected}", bytes.len())));
    }
    let psi: Vec<Complex<f64>> = bytes[STATE_HEADER_BYTES..]
        .chunks_exact(16)
        .map(|c| Complex::new(f64::from_le_bytes(c[..8].try_into().unwrap()), f64::from_le_bytes(c[8..].try_into().unwrap())))
        .collect();
    if psi.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) || !t.is_finite() {
        return Err(IoError::Format("non-finite values in state file".into()));
    }
    GridState::from_parts(GridSpec::new(dim as usize, n as usize, extent, mass), t, psi).map_err(format_err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::PointSourceSpec;

    #[test]
    fn trajectory_round_trip() {
        let tr = SampledTrajectory::geometric(1.0, 100.0, |t: f64| Vec3::new(t, -0.5 * t, 1.0 / 3.0)).unwrap();
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &tr).unwrap();
        assert!(buf.starts_with(b"t,x,y,z\n"));
        assert_eq!(read_trajectory(buf.as_slice()).unwrap(), tr);
    }

    #[test]
    fn measure_round_trip_in_two_dimensions() {
        let mu = DiscreteMeasure::uniform(&IntervalBox::new(vec![0.0, -1.0], vec![1.0, 1.0]).unwrap(), 3, 0.7).unwrap();
        let mut buf = Vec::new();
        write_measure(&mut buf, &mu).unwrap();
        assert!(buf.starts_with(b"lo_0,lo_1,hi_0,hi_1,mass\n"));
        assert_eq!(read_measure(buf.as_slice()).unwrap(), mu);
    }

    #[test]
    fn state_round_trip_and_corruption() {
        let spec = GridSpec::new(1, 64, 16.0, 2.0);
        let st = PointSourceSpec::at_origin(1, 2.5).state::<f64>(&spec).unwrap();
        let mut buf = Vec::new();
        write_state(&mut buf, &st).unwrap();
        assert_eq!(buf.len(), 40 + 16 * 64);
        let back = read_state(buf.as_slice()).unwrap();
        assert_eq!(back.psi(), st.psi());
        assert_eq!((back.t(), back.mass(), back.extent()), (st.t(), 2.0, 16.0));
        assert!(matches!(read_state(&buf[..buf.len() - 3]), Err(IoError::Format(_))));
        assert!(matches!(read_state(&buf[..10]), Err(IoError::Format(_))));
    }
}
