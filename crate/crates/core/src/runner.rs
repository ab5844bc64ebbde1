//! Reproducible runs: a [`RunConfig`] fully determines a [`Report`].
//!
//! Reports embed their config, the library version and the seed; running
//! the embedded config again reproduces every numeric field.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::certificates::{dk_bound, dvr_bound, dw_bound, enclosing_ellipsoid, inscribed_ellipsoid, ovr_bound, DistanceBound, DistanceKind};
use crate::constants::{asymptotic_ratio, bp_constant, c_nk, omega};
use crate::density::{Density, DensitySpec};
use crate::error::{Error, Result};
use crate::geometry::{Body, BodySpec};
use crate::lab::{self, AuditMode, Status, Theorem, Verdict, VerifyConfig};
use crate::rng::{default_seed, RngStream};
use crate::sphere::{m_functional, mean_width, radial_moment};
use crate::stats::SampleEstimate;
use crate::volumetrics::{grinberg_functional, mixed_volume_v1, pfiefer_functional, sylvester_moment, volume};

pub const REPORT_SCHEMA: &str = "vdlab.report/1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Sweep families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Implied constant of the logarithmic section bound for cubes with
    /// their inscribed balls, `k = n/2`.
    Corollary,
    /// Upper bound `√n/c_{n,1}` for the projection constant against `√(en)`,
    /// with the ratio observed on ball pairs.
    Beta,
    /// `w(B₂ⁿ)/w(B₁ⁿ)` against `√(n/(2 log n))`.
    Dw,
}

impl SweepKind {
    pub fn default_dims(self) -> Vec<usize> {
        match self {
            SweepKind::Corollary => vec![4, 6, 8],
            SweepKind::Beta => (2..=8).collect(),
            SweepKind::Dw => vec![4, 8, 16, 32, 64, 100],
        }
    }
}

impl std::str::FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corollary" => Ok(SweepKind::Corollary),
            "beta" => Ok(SweepKind::Beta),
            "dw" => Ok(SweepKind::Dw),
            _ => Err(Error::InvalidParameter(format!("unknown sweep '{s}' (corollary|beta|dw)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    Volume,
    MeanWidth,
    M,
    RadialMoment,
    Grinberg,
    MixedV1,
    Sylvester,
    Pfiefer,
}

impl std::str::FromStr for FunctionalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "volume" => FunctionalKind::Volume,
            "mean_width" | "w" => FunctionalKind::MeanWidth,
            "m" => FunctionalKind::M,
            "radial_moment" => FunctionalKind::RadialMoment,
            "grinberg" => FunctionalKind::Grinberg,
            "mixed_v1" => FunctionalKind::MixedV1,
            "sylvester" => FunctionalKind::Sylvester,
            "pfiefer" => FunctionalKind::Pfiefer,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown functional '{s}' (volume|mean-width|m|radial-moment|grinberg|mixed-v1|sylvester|pfiefer)"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    Verify {
        theorem: Theorem,
        #[serde(rename = "K")]
        k_body: String,
        #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
        l_body: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density: Option<String>,
        /// Ellipsoid certificate (body spec of a ball or ellipsoid).
        #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
        certificate: Option<String>,
        k: usize,
    },
    Audit {
        mode: AuditMode,
        #[serde(rename = "K")]
        k_body: String,
        #[serde(rename = "L")]
        l_body: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c_ref: Option<f64>,
    },
    Constants {
        n_min: usize,
        n_max: usize,
    },
    Distance {
        kind: DistanceKind,
        body: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
    Sweep {
        kind: SweepKind,
        dims: Vec<usize>,
    },
    Functional {
        name: FunctionalKind,
        body: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        other: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        q: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub seed: u64,
    pub stream_id: u64,
    pub frames: usize,
    pub max_frames: usize,
    pub samples: usize,
    pub screen_samples: usize,
    pub hypothesis_directions: usize,
    pub format: Format,
    /// Report path; `None` or `-` writes to standard output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl RunConfig {
    /// A config with the default budget and the environment seed.
    pub fn new(command: Command) -> Self {
        let d = VerifyConfig::default();
        Self {
            command,
            seed: default_seed(),
            stream_id: 0,
            frames: d.frames,
            max_frames: d.max_frames,
            samples: d.samples,
            screen_samples: d.screen_samples,
            hypothesis_directions: d.hypothesis_directions,
            format: Format::Json,
            output: None,
        }
    }

    pub fn stream(&self) -> RngStream {
        RngStream::new(self.seed, self.stream_id)
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            frames: self.frames,
            max_frames: self.max_frames,
            samples: self.samples,
            screen_samples: self.screen_samples,
            hypothesis_directions: self.hypothesis_directions,
            stream: self.stream(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub n: usize,
    pub k: usize,
    pub omega_n: f64,
    pub c_nk: f64,
    pub bp_constant: f64,
    pub asymptotic_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub k: usize,
    pub value: f64,
    pub value_se: f64,
    /// Comparison quantity (envelope or growth rate).
    pub reference: f64,
    pub ratio: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalResult {
    pub name: FunctionalKind,
    pub n: usize,
    pub value: SampleEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Verdict(Verdict),
    Constants(Vec<ConstantsRow>),
    Distance(DistanceBound),
    Sweep { kind: SweepKind, rows: Vec<SweepRow> },
    Functional(FunctionalResult),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub exit_code: i32,
    pub result: Outcome,
    /// Seconds since the Unix epoch; the only field that differs between reruns.
    pub generated_at: u64,
}

fn body(spec: &str) -> Result<Body> {
    BodySpec::parse(spec)?.build()
}

fn density(spec: Option<&str>) -> Result<Density> {
    match spec {
        Some(s) => DensitySpec::parse(s)?.build(),
        None => Ok(Density::uniform()),
    }
}

fn certificate(spec: Option<&str>) -> Result<Option<nalgebra::DMatrix<f64>>> {
    spec.map(|s| {
        let b = body(s)?;
        b.ellipsoid_matrix()
            .ok_or_else(|| Error::InvalidParameter(format!("certificate '{s}' is not a ball or an ellipsoid")))
    })
    .transpose()
}

fn require<'a>(v: &'a Option<String>, what: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| Error::InvalidParameter(format!("{what} is required")))
}

fn verify(cfg: &RunConfig) -> Result<Verdict> {
    let Command::Verify { theorem, k_body, l_body, density: dens, certificate: cert, k } = &cfg.command else {
        unreachable!()
    };
    let vc = cfg.verify_config();
    let kb = body(k_body)?;
    let mu = density(dens.as_deref())?;
    if *theorem == Theorem::BpIdentity {
        return lab::check_blaschke_petkantschin(&kb, &mu, *k, &vc);
    }
    let lb = body(require(l_body, "L")?)?;
    let d = certificate(cert.as_deref())?;
    let d = d.as_ref();
    match theorem {
        Theorem::SectionUpper => lab::verify_section_upper(&kb, &lb, *k, d, &vc),
        Theorem::MeasureUpper => lab::verify_measure_upper(&kb, &lb, &mu, *k, d, &vc),
        Theorem::PowerUpper => lab::verify_power_upper(&kb, &lb, &mu, *k, &vc),
        Theorem::SectionLower => lab::verify_section_lower(&kb, &lb, *k, d, &vc),
        Theorem::Low => lab::verify_low(&kb, &lb, *k, &vc),
        Theorem::LowMeasure => lab::verify_low_measure(&kb, &lb, &mu, *k, &vc),
        Theorem::ProjLower => lab::verify_projection_lower(&kb, &lb, d, &vc),
        Theorem::ProjUpper => lab::verify_projection_upper(&kb, &lb, d, &vc),
        Theorem::AuditSectionMax => lab::audit_reverse_pair(&kb, &lb, AuditMode::SectionMax, None, &vc),
        Theorem::AuditProjMax => lab::audit_reverse_pair(&kb, &lb, AuditMode::ProjMax, None, &vc),
        Theorem::AuditProjMin => lab::audit_reverse_pair(&kb, &lb, AuditMode::ProjMin, None, &vc),
        Theorem::BpIdentity => unreachable!(),
    }
}

/// Table of constants for `n_min <= n <= n_max`, `1 <= k < n`.
pub fn constants_table(n_min: usize, n_max: usize) -> Result<Vec<ConstantsRow>> {
    if n_min < 2 || n_max < n_min {
        return Err(Error::InvalidParameter(format!("need 2 <= n_min <= n_max, got {n_min}..{n_max}")));
    }
    let mut rows = Vec::new();
    for n in n_min..=n_max {
        for k in 1..n {
            rows.push(ConstantsRow {
                n,
                k,
                omega_n: omega(n),
                c_nk: c_nk(n, k)?,
                bp_constant: bp_constant(n, n - k, 1)?,
                asymptotic_ratio: asymptotic_ratio(n, k)?,
            });
        }
    }
    Ok(rows)
}

fn distance(cfg: &RunConfig) -> Result<DistanceBound> {
    let Command::Distance { kind, body: spec, k } = &cfg.command else { unreachable!() };
    let b = body(spec)?;
    let s = cfg.stream();
    let dirs = cfg.hypothesis_directions;
    let need_k = || k.ok_or_else(|| Error::InvalidParameter("--k is required for this distance".into()));
    match kind {
        DistanceKind::Ovr => ovr_bound(&b, need_k()?, &enclosing_ellipsoid(&b, dirs, s.child(1))?, cfg.samples, s.child(2)),
        DistanceKind::Dk => dk_bound(&b, need_k()?, &inscribed_ellipsoid(&b, dirs, s.child(1))?, cfg.samples, s.child(2)),
        DistanceKind::Vr => dvr_bound(&b, &inscribed_ellipsoid(&b, dirs, s.child(1))?, cfg.samples, s.child(2)),
        DistanceKind::W => dw_bound(&b, &enclosing_ellipsoid(&b, dirs, s.child(1))?, cfg.samples, s.child(2)),
    }
}

fn skipped(n: usize, k: usize, why: String) -> SweepRow {
    SweepRow {
        n,
        k,
        value: f64::NAN,
        value_se: f64::NAN,
        reference: f64::NAN,
        ratio: f64::NAN,
        lower: f64::NAN,
        upper: f64::NAN,
        within: false,
        observed: None,
        skipped: Some(why),
    }
}

fn sweep_row(cfg: &RunConfig, kind: SweepKind, n: usize) -> Result<SweepRow> {
    let nf = n as f64;
    let mut vc = cfg.verify_config();
    vc.stream = cfg.stream().child(n as u64);
    match kind {
        SweepKind::Corollary => {
            let k = n / 2;
            let v = lab::verify_section_upper(&Body::cube(n)?, &Body::ball(n, 1.0)?, k, None, &vc)?;
            let h = v.headline.as_ref().expect("section verdicts carry a headline");
            let max = v.extremal.as_ref().expect("extremal frame").value.clone();
            let kf = k as f64;
            let envelope = (nf / kf).sqrt() * (std::f64::consts::E * nf / kf).ln().powf(1.5);
            let c = (h.lhs / max.value).powf(1.0 / kf) / envelope;
            let c_se = c / kf * max.std_error / max.value.abs();
            Ok(SweepRow {
                n,
                k,
                value: c,
                value_se: c_se,
                reference: envelope,
                ratio: c,
                lower: 0.0,
                upper: 10.0,
                within: c <= 10.0 && v.status == Status::Verified,
                observed: None,
                skipped: None,
            })
        }
        SweepKind::Beta => {
            let v = lab::verify_projection_lower(&Body::ball(n, 0.5)?, &Body::ball(n, 1.0)?, None, &vc)?;
            let observed = v.extremal.as_ref().expect("extremal").value.value / v.lhs.as_ref().expect("lhs").value;
            let bound = nf.sqrt() / c_nk(n, 1)?;
            let reference = (std::f64::consts::E * nf).sqrt();
            Ok(SweepRow {
                n,
                k: 1,
                value: bound,
                value_se: 0.0,
                reference,
                ratio: bound / reference,
                lower: 0.0,
                upper: 1.0,
                within: bound < reference && observed <= bound,
                observed: Some(observed),
                skipped: None,
            })
        }
        SweepKind::Dw => {
            let cross = Body::cross_polytope(n)?;
            let cert = enclosing_ellipsoid(&cross, cfg.hypothesis_directions, vc.stream.child(1))?;
            let d = dw_bound(&cross, &cert, cfg.samples, vc.stream.child(2))?;
            let reference = (nf / (2.0 * nf.ln())).sqrt();
            let ratio = d.value.value / reference;
            Ok(SweepRow {
                n,
                k: 1,
                value: d.value.value,
                value_se: d.value.std_error,
                reference,
                ratio,
                lower: 0.3,
                upper: 3.0,
                within: (0.3..=3.0).contains(&ratio),
                observed: None,
                skipped: None,
            })
        }
    }
}

fn sweep(cfg: &RunConfig) -> Result<(SweepKind, Vec<SweepRow>)> {
    let Command::Sweep { kind, dims } = &cfg.command else { unreachable!() };
    let rows = dims
        .iter()
        .map(|&n| match sweep_row(cfg, *kind, n) {
            Ok(r) => Ok(r),
            Err(e @ (Error::NotComputable(_) | Error::InvalidParameter(_) | Error::NoCertificate(_))) => {
                Ok(skipped(n, if *kind == SweepKind::Corollary { n / 2 } else { 1 }, e.to_string()))
            }
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((*kind, rows))
}

fn functional(cfg: &RunConfig) -> Result<FunctionalResult> {
    let Command::Functional { name, body: spec, other, density: dens, k, p, q } = &cfg.command else {
        unreachable!()
    };
    let b = body(spec)?;
    let (s, samples) = (cfg.stream(), cfg.samples);
    let need = |v: Option<usize>, what: &str| v.ok_or_else(|| Error::InvalidParameter(format!("--{what} is required")));
    let value = match name {
        FunctionalKind::Volume => volume(&b, samples, s)?,
        FunctionalKind::MeanWidth => mean_width(&b, samples, s)?,
        FunctionalKind::M => m_functional(&b, samples, s)?,
        FunctionalKind::RadialMoment => radial_moment(&b, need(*k, "k")?, samples, s)?,
        FunctionalKind::Grinberg => grinberg_functional(&b, need(*k, "k")?, cfg.frames, samples, s)?,
        FunctionalKind::MixedV1 => mixed_volume_v1(&b, &body(require(other, "--other body")?)?, samples, s)?,
        FunctionalKind::Sylvester => {
            sylvester_moment(&density(dens.as_deref())?, &b, p.unwrap_or(1.0), need(*q, "q")?, samples, s)?
        }
        FunctionalKind::Pfiefer => pfiefer_functional(&b, p.unwrap_or(1.0), samples, s)?,
    };
    Ok(FunctionalResult { name: *name, n: b.dim(), value })
}

fn execute(cfg: &RunConfig) -> Result<(Outcome, i32)> {
    Ok(match &cfg.command {
        Command::Verify { .. } => {
            let v = verify(cfg)?;
            let code = v.exit_code();
            (Outcome::Verdict(v), code)
        }
        Command::Audit { mode, k_body, l_body, c_ref } => {
            let v = lab::audit_reverse_pair(&body(k_body)?, &body(l_body)?, *mode, *c_ref, &cfg.verify_config())?;
            let code = v.exit_code();
            (Outcome::Verdict(v), code)
        }
        Command::Constants { n_min, n_max } => (Outcome::Constants(constants_table(*n_min, *n_max)?), 0),
        Command::Distance { .. } => (Outcome::Distance(distance(cfg)?), 0),
        Command::Sweep { .. } => {
            let (kind, rows) = sweep(cfg)?;
            let code = if rows.iter().all(|r| r.within) { 0 } else { Status::Inconclusive.exit_code() };
            (Outcome::Sweep { kind, rows }, code)
        }
        Command::Functional { .. } => (Outcome::Functional(functional(cfg)?), 0),
    })
}

/// Runs `config` on a pool of `workers` threads (all cores when `None`).
/// The report does not depend on the pool size.
pub fn run(config: &RunConfig, workers: Option<usize>) -> Result<Report> {
    let (result, exit_code) = with_workers(workers, || execute(config))?;
    Ok(Report {
        schema: REPORT_SCHEMA.into(),
        version: VERSION.into(),
        seed: config.seed,
        config: config.clone(),
        exit_code,
        result,
        generated_at: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    })
}

#[cfg(feature = "parallel")]
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(_workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    f()
}

#[derive(Serialize)]
struct VerdictCsv<'a> {
    theorem: &'a str,
    n: usize,
    k: usize,
    lhs: Option<f64>,
    lhs_se: Option<f64>,
    rhs: Option<f64>,
    rhs_se: Option<f64>,
    slack: Option<f64>,
    status: Status,
    frames: usize,
    samples: usize,
    seed: u64,
}

#[derive(Serialize)]
struct DistanceCsv {
    kind: DistanceKind,
    n: usize,
    k: Option<usize>,
    value: f64,
    value_se: f64,
    margin: f64,
}

#[derive(Serialize)]
struct FunctionalCsv {
    functional: FunctionalKind,
    n: usize,
    value: f64,
    value_se: f64,
    samples: u64,
    seed: u64,
}

const CONFIG_PREFIX: &str = "# config: ";

fn csv_err(e: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("csv output failed: {e}"))
}

/// CSV rendering; the first lines are `#` comments carrying the version
/// and the JSON config.
pub fn to_csv(report: &Report) -> Result<String> {
    let mut out = format!(
        "# vdlab {} {}\n{CONFIG_PREFIX}{}\n",
        report.version,
        report.schema,
        serde_json::to_string(&report.config).map_err(csv_err)?
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    match &report.result {
        Outcome::Verdict(v) => {
            let get = |e: &Option<SampleEstimate>| e.as_ref().map(|e| e.value);
            let se = |e: &Option<SampleEstimate>| e.as_ref().map(|e| e.std_error);
            w.serialize(VerdictCsv {
                theorem: v.theorem.as_str(),
                n: v.meta.n,
                k: v.meta.k,
                lhs: get(&v.lhs),
                lhs_se: se(&v.lhs),
                rhs: get(&v.rhs),
                rhs_se: se(&v.rhs),
                slack: get(&v.slack),
                status: v.status,
                frames: v.meta.frames,
                samples: v.meta.samples,
                seed: v.meta.seed,
            })
            .map_err(csv_err)?;
        }
        Outcome::Constants(rows) => {
            for r in rows {
                w.serialize(r).map_err(csv_err)?;
            }
        }
        Outcome::Distance(d) => w
            .serialize(DistanceCsv {
                kind: d.kind,
                n: d.certificate.n,
                k: d.k,
                value: d.value.value,
                value_se: d.value.std_error,
                margin: d.certificate.margin,
            })
            .map_err(csv_err)?,
        Outcome::Sweep { rows, .. } => {
            for r in rows {
                w.serialize(r).map_err(csv_err)?;
            }
        }
        Outcome::Functional(f) => w
            .serialize(FunctionalCsv {
                functional: f.name,
                n: f.n,
                value: f.value.value,
                value_se: f.value.std_error,
                samples: f.value.samples,
                seed: f.value.seed,
            })
            .map_err(csv_err)?,
    }
    out.push_str(&String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)?);
    Ok(out)
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => serde_json::to_string_pretty(report)
            .map(|s| s + "\n")
            .map_err(|e| Error::InvalidParameter(format!("json output failed: {e}"))),
        Format::Csv => to_csv(report),
    }
}

/// Writes the report to `config.output` (standard output for `None` or `-`).
pub fn write_report(report: &Report) -> Result<()> {
    let text = render(report, report.config.format)?;
    let io = |e: std::io::Error| Error::InvalidParameter(format!("cannot write report: {e}"));
    match report.config.output.as_deref() {
        None | Some("-") => std::io::stdout().write_all(text.as_bytes()).map_err(io),
        Some(path) => std::fs::write(path, text).map_err(io),
    }
}

/// Recovers the embedded config from a JSON or CSV report.
pub fn config_from_report(text: &str) -> Result<RunConfig> {
    let bad = |e: serde_json::Error| Error::InvalidParameter(format!("not a vdlab report: {e}"));
    if text.trim_start().starts_with('{') {
        let report: Report = serde_json::from_str(text).map_err(bad)?;
        return Ok(report.config);
    }
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix(CONFIG_PREFIX))
        .ok_or_else(|| Error::InvalidParameter("no embedded config line in report".into()))?;
    serde_json::from_str(line).map_err(bad)
}
