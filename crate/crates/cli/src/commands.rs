use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use gldef::bend::{check_admissible, curvature_estimate, gl_bend_construct, neck_report, Alpha1, EstimateReport, NeckModel};
use gldef::deform::{bumped_annulus, AnnulusDeform, CollarDeform, Locdef};
use gldef::io::{self, BendPoints, PipelineManifest, ReportSummary, StageResult};
use gldef::isometry::{gajer_stretch, radius_path, spd_sqrt, stretch_profile, InnerProduct, StretchSpec};
use gldef::par;
use gldef::warped::{make_torpedo, min_scalar_curvature_with, CurvatureReport, TorpedoSpec};
use gldef::{GlError, Result, WarpingProfile};

use crate::config::{Command, PipelineConfig};

/// Whether every floor held.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Violation,
}

impl Outcome {
    fn of(pass: bool) -> Outcome {
        if pass {
            Outcome::Pass
        } else {
            Outcome::Violation
        }
    }
}

pub fn run(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| GlError::Io(format!("{}: {e}", cfg.out.display())))?;
    io::write_json(io::create(&cfg.out_path("config.json"))?, cfg)?;
    match cfg.command {
        Command::Torpedo => torpedo(cfg, log),
        Command::Bend => bend(cfg, log),
        Command::Collar => collar(cfg, log),
        Command::Retract => retract(cfg, log),
        Command::Annulus => annulus(cfg, log),
        Command::Verify => verify(cfg, log),
        Command::Sqrt => sqrt(cfg, log),
        Command::Stretch => stretch(cfg, log),
    }
}

fn say(log: &mut dyn Write, line: String) -> Result<()> {
    writeln!(log, "{line}")?;
    Ok(())
}

/// A JSON descriptor keeps its own dimension unless `--dim` is given.
fn load_input(cfg: &PipelineConfig, path: &Path) -> Result<WarpingProfile> {
    let json = path.extension().is_some_and(|e| e == "json");
    io::load_profile(path, (cfg.dim_set || !json).then_some(cfg.dim))
}

/// The input profile in unit speed, or the torpedo of radius `eps`.
fn input_disc(cfg: &PipelineConfig) -> Result<WarpingProfile> {
    let h = match &cfg.input {
        Some(p) => load_input(cfg, p)?,
        None => make_torpedo(&TorpedoSpec::with_eps(cfg.eps), cfg.dim)?,
    };
    if !h.is_disc() {
        return Err(GlError::InvalidParameter("this pipeline needs a disc profile".into()));
    }
    h.to_unit_speed(4 * cfg.grid)
}

fn write_report(cfg: &PipelineConfig, rep: &CurvatureReport) -> Result<()> {
    io::write_report_csv(io::create(&cfg.out_path("report.csv"))?, rep)?;
    io::write_json(io::create(&cfg.out_path("report.json"))?, &ReportSummary::from(rep))
}

fn stage(name: &str, rep: &CurvatureReport) -> StageResult {
    StageResult { name: name.into(), pass: rep.pass, min_kappa: rep.min_kappa }
}

fn torpedo(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    let h = make_torpedo(&TorpedoSpec::with_eps(cfg.eps), cfg.dim)?;
    let rep = min_scalar_curvature_with(&h, cfg.floor, cfg.policy())?;
    io::write_profile_csv(io::create(&cfg.out_path("profile.csv"))?, &h, cfg.grid + 1)?;
    write_report(cfg, &rep)?;
    say(log, format!("torpedo eps={} n={}: min_kappa={} at t={} floor={} pass={}", cfg.eps, cfg.dim, rep.min_kappa, rep.argmin, cfg.floor, rep.pass))?;
    Ok(Outcome::of(rep.pass))
}

fn verify(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    let h = match &cfg.input {
        Some(p) => load_input(cfg, p)?,
        None => make_torpedo(&TorpedoSpec::with_eps(cfg.eps), cfg.dim)?,
    };
    let rep = min_scalar_curvature_with(&h, cfg.floor, cfg.policy())?;
    write_report(cfg, &rep)?;
    say(log, format!("verify n={}: min_kappa={} at t={} floor={} pass={}", h.dim, rep.min_kappa, rep.argmin, cfg.floor, rep.pass))?;
    Ok(Outcome::of(rep.pass))
}

#[derive(Serialize)]
struct NeckRow {
    lambda: f64,
    min_kappa: f64,
    argmin_s: f64,
    admissible: bool,
    pass: bool,
}

#[derive(Serialize)]
struct BendSummary {
    estimate: Option<EstimateReport>,
    delta: Option<f64>,
    first_violation: Option<String>,
    pass: bool,
}

fn bend(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    // Built without a floor so that violations are reported per λ below.
    let bare = NeckModel::new(cfg.codim, cfg.kappa_n)?;
    let m = bare.with_floor(cfg.floor);
    let fail = |log: &mut dyn Write, why: String| -> Result<Outcome> {
        say(log, format!("bend k={} kappa_N={}: first violation: {why}", cfg.codim, cfg.kappa_n))?;
        let s = BendSummary { estimate: None, delta: None, first_violation: Some(why), pass: false };
        io::write_json(io::create(&cfg.out_path("bend_summary.json"))?, &s)?;
        Ok(Outcome::Violation)
    };
    let b = match gl_bend_construct(&bare, cfg.r0, cfg.r4) {
        Ok(b) => b,
        Err(e) => return fail(log, format!("construction infeasible: {e}")),
    };
    io::write_curve_csv(io::create(&cfg.out_path("curve.csv"))?, &b.curve)?;
    io::write_json(io::create(&cfg.out_path("bend.json"))?, &BendPoints::from(&b))?;
    let (s3, s4) = b.second_bend();
    let est = curvature_estimate(&b.curve, s3, s4);
    let family = match Alpha1::new(&b) {
        Ok(a) => a,
        Err(e) => return fail(log, format!("no cutoff width: {e}")),
    };
    let lambdas = cfg.lambdas();
    let rows: Vec<Result<NeckRow>> = par::map(cfg.policy().exec, &lambdas, |&lambda| {
        let c = family.curve(lambda)?;
        let rep = neck_report(&c, &m, cfg.policy().exec)?;
        let admissible = check_admissible(&c, f64::INFINITY).admissible;
        Ok(NeckRow { lambda, min_kappa: rep.min_kappa, argmin_s: rep.argmin, admissible, pass: rep.pass && admissible })
    });
    let rows: Vec<NeckRow> = rows.into_iter().collect::<Result<_>>()?;
    io::write_rows(io::create(&cfg.out_path("neck_trace.csv"))?, &rows)?;
    let first = rows.iter().find(|r| !r.pass).map(|r| {
        format!("lambda={} min_kappa={} at s={} floor={} admissible={}", r.lambda, r.min_kappa, r.argmin_s, cfg.floor, r.admissible)
    });
    let first = first.or_else(|| (!est.holds).then(|| format!("curvature estimate exceeded by {} at s={}", est.worst, est.at)));
    let pass = first.is_none();
    let s = BendSummary { estimate: Some(est), delta: Some(family.delta), first_violation: first.clone(), pass };
    io::write_json(io::create(&cfg.out_path("bend_summary.json"))?, &s)?;
    let worst = rows.iter().map(|r| r.min_kappa).fold(f64::INFINITY, f64::min);
    say(log, format!("bend k={} kappa_N={}: r4={} lambdas={} min neck kappa={} estimate holds={}", cfg.codim, cfg.kappa_n, b.r4, rows.len(), worst, est.holds))?;
    if let Some(f) = first {
        say(log, format!("first violation: {f}"))?;
    }
    Ok(Outcome::of(pass))
}

#[derive(Serialize)]
struct FamilyRow {
    lambda: f64,
    min_kappa: f64,
    argmin_t: f64,
}

fn family_trace(cfg: &PipelineConfig, name: &str, verify: &(dyn Fn(f64) -> Result<CurvatureReport> + Sync)) -> Result<Vec<FamilyRow>> {
    let lambdas = cfg.lambdas();
    let rows: Vec<Result<FamilyRow>> = par::map(cfg.policy().exec, &lambdas, |&lambda| {
        let rep = verify(lambda)?;
        Ok(FamilyRow { lambda, min_kappa: rep.min_kappa, argmin_t: rep.argmin })
    });
    let rows: Vec<FamilyRow> = rows.into_iter().collect::<Result<_>>()?;
    io::write_rows(io::create(&cfg.out_path(name))?, &rows)?;
    Ok(rows)
}

fn trace_stage(name: &str, rows: &[FamilyRow], floor: f64) -> StageResult {
    let min = rows.iter().map(|r| r.min_kappa).fold(f64::INFINITY, f64::min);
    StageResult { name: name.into(), pass: min > floor, min_kappa: min }
}

fn collar(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    let h = input_disc(cfg)?;
    let d = CollarDeform::new(&h, cfg.floor)?;
    io::write_json(io::create(&cfg.out_path("constants.json"))?, &d.constants)?;
    let policy = cfg.policy();
    let rows = family_trace(cfg, "collar_trace.csv", &|l| d.verify(l, policy))?;
    let st = trace_stage("collar", &rows, cfg.floor);
    let flat = d.flatness()?;
    let pass = st.pass;
    say(log, format!("collar n={} B={}: alpha={:e} sigma={:e} flatness={:e} min_kappa={} pass={pass}", h.dim, cfg.floor, d.constants.alpha, d.sigma(), flat, st.min_kappa))?;
    let manifest = PipelineManifest { command: "collar".into(), stages: vec![st], constants: Some(d.constants.clone()), pass };
    io::write_json(io::create(&cfg.out_path("manifest.json"))?, &manifest)?;
    Ok(Outcome::of(pass))
}

fn retract(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    let h = input_disc(cfg)?;
    let d = Locdef::new(&h, cfg.floor)?;
    let policy = cfg.policy();
    let trace = d.trace(cfg.lambdas().len(), policy)?;
    io::write_trace_csv(io::create(&cfg.out_path("trace.csv"))?, &trace)?;
    let min = trace.iter().map(|r| r.min_kappa).fold(f64::INFINITY, f64::min);
    let psi = StageResult { name: "psi".into(), pass: min > cfg.floor, min_kappa: min };
    let last = d.profile(1.0)?;
    io::write_profile_csv(io::create(&cfg.out_path("final.csv"))?, &last, cfg.grid + 1)?;
    let r = d.retraction()?;
    io::write_profile_csv(io::create(&cfg.out_path("retraction.csv"))?, &r, cfg.grid + 1)?;
    let rrep = min_scalar_curvature_with(&r, cfg.floor, policy)?;
    let c = d.locally_torpedo(cfg.tol)?;
    let pass = psi.pass && rrep.pass && c.is_some();
    let manifest = PipelineManifest {
        command: "retract".into(),
        stages: vec![psi, stage("retraction", &rrep), StageResult { name: "locally-torpedo".into(), pass: c.is_some(), min_kappa: f64::NAN }],
        constants: Some(d.collar.constants.clone()),
        pass,
    };
    io::write_json(io::create(&cfg.out_path("manifest.json"))?, &manifest)?;
    let c_text = c.map_or("none".to_string(), |c| c.to_string());
    say(log, format!("retract n={} B={}: T0={} c={c_text} T0/2={} min_kappa={min} pass={pass}", h.dim, cfg.floor, d.t0(), 0.5 * d.t0()))?;
    Ok(Outcome::of(pass))
}

fn annulus(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    let h = match &cfg.input {
        Some(p) => load_input(cfg, p)?.to_unit_speed(4 * cfg.grid)?,
        None => bumped_annulus(cfg.amp, cfg.dim),
    };
    if h.is_disc() {
        return Err(GlError::InvalidParameter("annulus needs an annulus profile".into()));
    }
    let d = AnnulusDeform::new(&h, cfg.floor)?;
    let policy = cfg.policy();
    let rows = family_trace(cfg, "annulus_trace.csv", &|l| d.verify(l, policy))?;
    let st = trace_stage("annulus", &rows, cfg.floor);
    io::write_profile_csv(io::create(&cfg.out_path("final.csv"))?, &d.profile(1.0)?, cfg.grid + 1)?;
    let pass = st.pass;
    say(log, format!("annulus n={} B={}: r0={} collar={} nu={} min_kappa={} pass={pass}", h.dim, cfg.floor, d.r0, d.eps, d.nu, st.min_kappa))?;
    let manifest = PipelineManifest { command: "annulus".into(), stages: vec![st], constants: None, pass };
    io::write_json(io::create(&cfg.out_path("manifest.json"))?, &manifest)?;
    Ok(Outcome::of(pass))
}

fn read_form(path: &std::path::Path) -> Result<InnerProduct> {
    let file = std::fs::File::open(path).map_err(|e| GlError::Io(format!("{}: {e}", path.display())))?;
    InnerProduct::new(io::read_matrix_csv(file)?)
}

/// `max |g₂(Bu, Bv) - g₁(u, v)|` over the basis pairs.
fn residual(g1: &InnerProduct, g2: &InnerProduct, b: &DMatrix<f64>) -> f64 {
    (b.transpose() * g2.matrix() * b - g1.matrix()).amax()
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> InnerProduct {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    InnerProduct::new(&a * a.transpose() + DMatrix::identity(n, n) * 0.1).expect("A Aᵀ + 0.1 I is positive definite")
}

#[derive(Serialize)]
struct SqrtSuite {
    seed: u64,
    pairs: usize,
    max_residual: f64,
    max_inverse_error: f64,
    tol: f64,
    pass: bool,
}

fn sqrt(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    if let Some(p) = &cfg.input {
        let g1 = read_form(p)?;
        let g2 = match &cfg.g2 {
            Some(q) => read_form(q)?,
            None => InnerProduct::identity(g1.dim()),
        };
        let b = spd_sqrt(&g1, &g2)?;
        io::write_matrix_csv(io::create(&cfg.out_path("sqrt.csv"))?, &b)?;
        let res = residual(&g1, &g2, &b);
        let pass = res < cfg.tol;
        say(log, format!("sqrt dim={}: residual={res:e} tol={} pass={pass}", g1.dim(), cfg.tol))?;
        return Ok(Outcome::of(pass));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut worst, mut inv) = (0.0f64, 0.0f64);
    let pairs = 50;
    for i in 0..pairs {
        let n = 2 + i % 5;
        let (g1, g2) = (random_spd(&mut rng, n), random_spd(&mut rng, n));
        let b = spd_sqrt(&g1, &g2)?;
        worst = worst.max(residual(&g1, &g2, &b));
        let back = spd_sqrt(&g2, &g1)?;
        inv = inv.max((&b * back - DMatrix::identity(n, n)).amax());
    }
    let pass = worst < cfg.tol && inv < cfg.tol;
    let s = SqrtSuite { seed: cfg.seed, pairs, max_residual: worst, max_inverse_error: inv, tol: cfg.tol, pass };
    io::write_json(io::create(&cfg.out_path("sqrt_suite.json"))?, &s)?;
    say(log, format!("sqrt suite seed={}: {pairs} pairs, max residual={worst:e}, max inverse error={inv:e}, pass={pass}", cfg.seed))?;
    Ok(Outcome::of(pass))
}

#[derive(Serialize)]
struct StretchReport {
    tau: f64,
    min_kappa: f64,
    min_kappa_at_2tau: f64,
}

fn stretch(cfg: &PipelineConfig, log: &mut dyn Write) -> Result<Outcome> {
    let path = radius_path(cfg.eps, cfg.eps0);
    let spec = StretchSpec::standard(0.1, 1.0)?;
    let g = match gajer_stretch(&path, &spec, cfg.codim, cfg.tau_max, cfg.policy()) {
        Ok(g) => g,
        Err(GlError::NoSolution(why)) => {
            say(log, format!("stretch: {why}"))?;
            return Ok(Outcome::Violation);
        }
        Err(e) => return Err(e),
    };
    let p = stretch_profile(&path, &spec.with_tau(g.tau), cfg.codim);
    io::write_profile_csv(io::create(&cfg.out_path("stretch.csv"))?, &p, cfg.grid + 1)?;
    let twice = min_scalar_curvature_with(&stretch_profile(&path, &spec.with_tau(2.0 * g.tau), cfg.codim), 0.0, cfg.policy())?;
    let rep = StretchReport { tau: g.tau, min_kappa: g.min_kappa, min_kappa_at_2tau: twice.min_kappa };
    io::write_json(io::create(&cfg.out_path("stretch.json"))?, &rep)?;
    say(log, format!("stretch {}->{} k={}: tau={} min_kappa={} at 2tau {}", cfg.eps, cfg.eps0, cfg.codim, g.tau, g.min_kappa, twice.min_kappa))?;
    Ok(Outcome::of(twice.pass))
}
