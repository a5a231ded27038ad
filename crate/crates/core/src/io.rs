//! File formats: profiles, curvature reports, curves, families, traces and
//! matrices in CSV, summaries and manifests in JSON.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bend::{GlBend, PlaneCurve};
use crate::cutoff::PsiCurve;
use crate::deform::{CollarConstants, TraceRow};
use crate::error::{GlError, Result};
use crate::smooth::SmoothFn;
use crate::warped::{make_torpedo, CurvatureReport, TorpedoSpec, WarpingProfile};

/// Closed-form or sampled profile description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileDescriptor {
    Torpedo { eps: f64, dim: usize },
    /// Euclidean disc `f(t) = t` of radius `radius`.
    Flat { radius: f64, dim: usize },
    /// Unit-speed disc `f(t) = Σ c_i t^i` on `[0, outer]`.
    CustomPoly { coeffs: Vec<f64>, outer: f64, dim: usize },
    Samples { t: Vec<f64>, g: Vec<f64>, f: Vec<f64>, dim: usize },
}

impl ProfileDescriptor {
    pub fn build(&self) -> Result<WarpingProfile> {
        match self {
            ProfileDescriptor::Torpedo { eps, dim } => make_torpedo(&TorpedoSpec::with_eps(*eps), *dim),
            ProfileDescriptor::Flat { radius, dim } => {
                if !(*radius > 0.0) {
                    return Err(GlError::InvalidParameter(format!("radius must be positive, got {radius}")));
                }
                WarpingProfile::unit_disc(SmoothFn::polynomial(0.0, *radius, vec![0.0, 1.0]), *dim)
            }
            ProfileDescriptor::CustomPoly { coeffs, outer, dim } => {
                if !(*outer > 0.0) {
                    return Err(GlError::InvalidParameter(format!("outer radius must be positive, got {outer}")));
                }
                WarpingProfile::unit_disc(SmoothFn::polynomial(0.0, *outer, coeffs.clone()), *dim)
            }
            ProfileDescriptor::Samples { t, g, f, dim } => profile_from_samples(t, g, f, *dim),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRow {
    t: f64,
    g: f64,
    f: f64,
}

/// Splined profile; a disc when the samples start at `t = 0` with `f = 0`,
/// unit speed when every `g` is 1.
pub fn profile_from_samples(t: &[f64], g: &[f64], f: &[f64], dim: usize) -> Result<WarpingProfile> {
    if t.len() != g.len() || t.len() != f.len() {
        return Err(GlError::Format("t, g and f must have equal length".into()));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(GlError::Format("t must be strictly increasing".into()));
    }
    let fs = SmoothFn::sampled(t, f)?;
    let unit = g.iter().all(|&x| x == 1.0);
    let gs = if unit { SmoothFn::constant(t[0], t[t.len() - 1], 1.0) } else { SmoothFn::sampled(t, g)? };
    let disc = t[0] == 0.0 && f[0] == 0.0;
    let mut h = if disc { WarpingProfile::disc(gs, fs, dim)? } else { WarpingProfile::annulus(gs, fs, dim)? };
    h.unit_speed = unit;
    Ok(h)
}

pub fn read_profile_csv(r: impl Read, dim: usize) -> Result<WarpingProfile> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "g", "f"] {
        return Err(GlError::Format(format!("expected header t,g,f, got {}", headers.iter().collect::<Vec<_>>().join(","))));
    }
    let (mut t, mut g, mut f) = (Vec::new(), Vec::new(), Vec::new());
    for row in rd.deserialize() {
        let row: ProfileRow = row?;
        t.push(row.t);
        g.push(row.g);
        f.push(row.f);
    }
    profile_from_samples(&t, &g, &f, dim)
}

/// A profile from a `.csv` sample file or a `.json` descriptor; `dim`
/// overrides the descriptor's dimension when given.
pub fn load_profile(path: &Path, dim: Option<usize>) -> Result<WarpingProfile> {
    let file = File::open(path).map_err(|e| GlError::Io(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        let mut d: ProfileDescriptor = serde_json::from_reader(file)?;
        if let Some(n) = dim {
            match &mut d {
                ProfileDescriptor::Torpedo { dim, .. }
                | ProfileDescriptor::Flat { dim, .. }
                | ProfileDescriptor::CustomPoly { dim, .. }
                | ProfileDescriptor::Samples { dim, .. } => *dim = n,
            }
        }
        d.build()
    } else {
        read_profile_csv(file, dim.unwrap_or(3))
    }
}

/// Uniform samples `t,g,f`.
pub fn write_profile_csv(w: impl Write, h: &WarpingProfile, samples: usize) -> Result<()> {
    let (a, b) = h.domain();
    let mut wr = csv::Writer::from_writer(w);
    let n = samples.max(2) - 1;
    for i in 0..=n {
        let t = if i == n { b } else { a + (b - a) * i as f64 / n as f64 };
        wr.serialize(ProfileRow { t, g: h.g.eval(t, 0), f: h.f.eval(t, 0) })?;
    }
    wr.flush()?;
    Ok(())
}

/// JSON summary of a [`CurvatureReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub min_kappa: f64,
    pub argmin: f64,
    pub floor: f64,
    pub pass: bool,
}

impl From<&CurvatureReport> for ReportSummary {
    fn from(r: &CurvatureReport) -> Self {
        ReportSummary { min_kappa: r.min_kappa, argmin: r.argmin, floor: r.floor, pass: r.pass }
    }
}

pub fn write_report_csv(w: impl Write, r: &CurvatureReport) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["t", "kappa"])?;
    for (t, k) in r.grid.iter().zip(&r.kappa) {
        wr.serialize((t, k))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_curve_csv(w: impl Write, c: &PlaneCurve) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["s", "t", "r", "phi", "k"])?;
    for i in 0..c.s.len() {
        wr.serialize((c.s[i], c.t[i], c.r[i], c.phi[i], c.k[i]))?;
    }
    wr.flush()?;
    Ok(())
}

/// Bend points `(t_i, r_i)`, the curve length and the final radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BendPoints {
    pub t: [f64; 6],
    pub r: [f64; 6],
    #[serde(rename = "L")]
    pub len: f64,
    pub r4: f64,
}

impl From<&GlBend> for BendPoints {
    fn from(b: &GlBend) -> Self {
        BendPoints { t: b.points.map(|p| p.0), r: b.points.map(|p| p.1), len: b.curve.len(), r4: b.r4 }
    }
}

/// `lambda,t,psi,psi1,psi2` on `samples` points of each member.
pub fn write_family_csv(w: impl Write, members: &[PsiCurve], samples: usize) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["lambda", "t", "psi", "psi1", "psi2"])?;
    let n = samples.max(2) - 1;
    for m in members {
        for i in 0..=n {
            let t = m.t_end * i as f64 / n as f64;
            let j = m.psi.jet(t);
            wr.serialize((m.lambda, t, j.v(), j.d(1), j.d(2)))?;
        }
    }
    wr.flush()?;
    Ok(())
}

/// Constants of the two ψ families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterEcho {
    #[serde(rename = "C1")]
    pub c1: f64,
    pub t_star: f64,
    pub alpha: f64,
    pub t0: f64,
    pub alpha1: f64,
    pub t1: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "T_lambda")]
    pub t_lambda: Vec<f64>,
}

pub fn write_trace_csv(w: impl Write, rows: &[TraceRow]) -> Result<()> {
    write_rows(w, rows)
}

/// One CSV row per record, header from the field names.
pub fn write_rows<T: Serialize>(w: impl Write, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageResult {
    pub name: String,
    pub pass: bool,
    pub min_kappa: f64,
}

/// Stages run by a pipeline, the collar constants used and the verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub command: String,
    pub stages: Vec<StageResult>,
    pub constants: Option<CollarConstants>,
    pub pass: bool,
}

/// Rows of numbers, no header.
pub fn read_matrix_csv(r: impl Read) -> Result<DMatrix<f64>> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let row = rec.iter().map(|x| x.parse::<f64>().map_err(|e| GlError::Format(format!("{x:?}: {e}")))).collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n == 0 || rows.iter().any(|r| r.len() != m) {
        return Err(GlError::Format("matrix rows must be nonempty and of equal length".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn write_matrix_csv(w: impl Write, m: &DMatrix<f64>) -> Result<()> {
    let mut wr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.nrows() {
        wr.serialize(m.row(i).iter().collect::<Vec<_>>())?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_json<T: Serialize>(w: impl Write, value: &T) -> Result<()> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Buffered file, with the path in the error message.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| GlError::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| GlError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warped::{min_scalar_curvature, profile_distance};

    #[test]
    fn profile_round_trip() {
        let h = make_torpedo(&TorpedoSpec::with_eps(0.5), 4).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &h, 2001).unwrap();
        assert!(buf.starts_with(b"t,g,f\n"));
        let back = read_profile_csv(&buf[..], 4).unwrap();
        assert!(back.is_disc() && back.unit_speed);
        assert!((back.f.eval(1.0, 0) - h.f.eval(1.0, 0)).abs() < 1e-10);
        assert!(profile_distance(&h, &back, 200) < 1e-3);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(read_profile_csv(&b"x,g,f\n0,1,0\n"[..], 3).is_err());
        let rows = "t,g,f\n0,1,0\n0.2,1,0.2\n0.1,1,0.1\n0.3,1,0.3\n0.4,1,0.4\n0.5,1,0.5\n";
        assert!(read_profile_csv(rows.as_bytes(), 3).is_err());
    }

    #[test]
    fn descriptors() {
        let d: ProfileDescriptor = serde_json::from_str(r#"{"kind":"torpedo","eps":1.0,"dim":3}"#).unwrap();
        let r = min_scalar_curvature(&d.build().unwrap(), 512, 0.0).unwrap();
        assert!((r.min_kappa - 2.0).abs() < 1e-9);
        let d: ProfileDescriptor = serde_json::from_str(r#"{"kind":"custom-poly","coeffs":[0,1,0,-0.1],"outer":1,"dim":3}"#).unwrap();
        assert!((d.build().unwrap().f.eval(1.0, 0) - 0.9).abs() < 1e-15);
        let d = ProfileDescriptor::Flat { radius: 2.0, dim: 5 };
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"kind":"flat","radius":2.0,"dim":5}"#);
    }

    #[test]
    fn matrix_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -2.5, 3.0, 0.1, 1e-300, 7.0]);
        let mut buf = Vec::new();
        write_matrix_csv(&mut buf, &m).unwrap();
        assert_eq!(read_matrix_csv(&buf[..]).unwrap(), m);
        assert!(read_matrix_csv(&b"1,2\n3\n"[..]).is_err());
    }

    #[test]
    fn trace_header() {
        let rows = [TraceRow { lambda: 0.0, min_kappa: 2.0, argmin_t: 0.5, c_value: 1.0 }];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "lambda,min_kappa,argmin_t,c_value\n0.0,2.0,0.5,1.0\n");
    }
}
