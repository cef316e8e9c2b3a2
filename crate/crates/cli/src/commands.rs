//! Subcommand implementations. Each returns a report, or a failure that maps
//! to an exit code.

use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use twistor_core::catalog::{self, ambient::great_circle_start, CatalogEntry, NamedForm, Property};
use twistor_core::cone::{cone_lift, cone_parallel_residual, ConeManifold};
use twistor_core::error::Error;
use twistor_core::forms::FormField;
use twistor_core::geometry::{geodesic_integrate, ChartManifold, CurveStatus};
use twistor_core::killingconn::{
    dimension_count, killing_connection_residual, sphere_candidates, transport_e, Curve, ESection,
    Route, TransportStatus, Verdict as RankVerdict, RANK_TOLERANCE,
};
use twistor_core::multiindex::binomial;
use twistor_core::spin::{
    appendix_identities, euclidean, spinor_form, CliffordAlgebra, TwistorSpinorField,
};
use twistor_core::twistor::identities::{
    curvature_condition, integrability_residual, killing_tensor, laplace_eigenvalue,
    weitzenbock_residuals,
};
use twistor_core::twistor::{
    ckf_residual, evaluate, fit_special_constant, killing_residual, parallel_residual,
    special_killing_residual, star_killing_residual, ResidualReport, Sample, SpecialVariant,
    DEFAULT_TOLERANCE, RESIDUAL_FLOOR,
};

use crate::report::{CheckRecord, Format, Report, Verdict};

/// Why a command did not produce a report.
#[derive(Debug)]
pub enum Failure {
    /// Bad ids or arguments; exit code 2.
    Usage(String),
    /// A numerical routine failed; exit code 1.
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::UnknownId(_)
            | Error::Invalid(_)
            | Error::Degree(_)
            | Error::DegenerateDegree { .. }
            | Error::RankUnstable(_)
            | Error::EmptySample => Failure::Usage(e.to_string()),
            other => Failure::Numerical(other.to_string()),
        }
    }
}

type CmdResult = Result<Report, Failure>;

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// Options shared by every numerical subcommand.
#[derive(Args, Clone, Debug, Serialize)]
pub struct Common {
    /// Number of sample points.
    #[arg(long, default_value_t = 100, value_parser = positive_usize)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Pass threshold on the normalized residual.
    #[arg(long, default_value_t = DEFAULT_TOLERANCE, value_parser = positive_f64)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn entry(id: &str) -> Result<CatalogEntry, Failure> {
    catalog::lookup(id).map_err(|_| {
        Failure::Usage(format!(
            "unknown manifold `{id}`; known ids: {}",
            catalog::CATALOG_IDS.join(", ")
        ))
    })
}

fn named(e: &CatalogEntry, id: &str) -> Result<NamedForm, Failure> {
    e.form(id).map_err(|err| match err {
        Error::UnknownId(_) => Failure::Usage(format!(
            "unknown form `{id}` on `{}`; declared: {}",
            e.id,
            e.declared.join(", ")
        )),
        other => other.into(),
    })
}

// ---------------------------------------------------------------- catalog

#[derive(Args, Clone, Debug, Serialize)]
pub struct CatalogArgs {
    /// Show a single entry.
    #[arg(long)]
    pub manifold: Option<String>,
}

#[derive(Serialize)]
struct FormInfo {
    id: String,
    degree: usize,
    props: Vec<Property>,
    eigenvalue: Option<f64>,
}

#[derive(Serialize)]
struct EntryInfo {
    id: String,
    dim: usize,
    scalar_curvature: f64,
    note: String,
    forms: Vec<FormInfo>,
}

pub fn catalog_listing(args: &CatalogArgs) -> Result<String, Failure> {
    let ids: Vec<String> = match &args.manifold {
        Some(id) => vec![id.clone()],
        None => catalog::CATALOG_IDS.iter().map(|s| s.to_string()).collect(),
    };
    let mut out = Vec::new();
    for id in ids {
        let e = entry(&id)?;
        let forms = e
            .forms()?
            .into_iter()
            .map(|f| FormInfo {
                degree: f.field.p,
                id: f.id,
                props: f.props,
                eigenvalue: f.eigenvalue,
            })
            .collect();
        out.push(EntryInfo {
            dim: e.dim(),
            scalar_curvature: e.scalar_curvature,
            note: e.note.clone(),
            id: e.id,
            forms,
        });
    }
    Ok(serde_json::to_string_pretty(&out).expect("catalog serializes") + "\n")
}

// ---------------------------------------------------------------- verify

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CheckKind {
    Ckf,
    Killing,
    StarKilling,
    Parallel,
    Special,
    Eigen,
    Integrability,
    Weitzenbock,
    KillingConnection,
    Curvature,
}

impl CheckKind {
    fn id(self) -> &'static str {
        match self {
            CheckKind::Ckf => "ckf",
            CheckKind::Killing => "killing",
            CheckKind::StarKilling => "star_killing",
            CheckKind::Parallel => "parallel",
            CheckKind::Special => "special",
            CheckKind::Eigen => "eigen",
            CheckKind::Integrability => "integrability",
            CheckKind::Weitzenbock => "weitzenbock",
            CheckKind::KillingConnection => "killing_connection",
            CheckKind::Curvature => "curvature",
        }
    }

    fn description(self) -> &'static str {
        match self {
            CheckKind::Ckf => "conformal Killing: Tψ = 0",
            CheckKind::Killing => "Killing: Tψ = 0 and dψ* = 0",
            CheckKind::StarKilling => "*-Killing: Tψ = 0 and dψ = 0",
            CheckKind::Parallel => "parallel: ∇ψ = 0",
            CheckKind::Special => "special Killing: ∇_X dψ = c X*∧ψ",
            CheckKind::Eigen => "Hodge eigenform: Δψ = λψ",
            CheckKind::Integrability => "q(R)ψ = p/(p+1) d*dψ + (n−p)/(n−p+1) dd*ψ",
            CheckKind::Weitzenbock => "both Weitzenböck formulas and Δ = ∇*∇ + q(R)",
            CheckKind::KillingConnection => "A(X)(ψ, dψ, d*ψ, dd*ψ) = ∇_X(ψ, dψ, d*ψ, dd*ψ)",
            CheckKind::Curvature => "curvature condition on R(X,Y)ψ",
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub manifold: String,
    #[arg(long)]
    pub form: String,
    /// Comma-separated checks to run.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ckf")]
    pub checks: Vec<CheckKind>,
    #[command(flatten)]
    pub common: Common,
}

/// A direction at `x` chosen from the point coordinates, so reports stay deterministic.
fn direction_at(x: &[f64]) -> Vec<f64> {
    let s: f64 = x.iter().sum();
    (0..x.len())
        .map(|i| (1.3 * i as f64 + s).cos() + 0.25)
        .collect()
}

fn run_check(
    kind: CheckKind,
    m: &ChartManifold,
    form: &NamedForm,
    sample: &Sample,
    tol: f64,
) -> Result<CheckRecord, Failure> {
    let psi = &form.field;
    let label = format!("{}:{}", kind.id(), form.id);
    let rec = |r: ResidualReport| CheckRecord::from_residual(kind.id(), kind.description(), &r);
    let out = match kind {
        CheckKind::Ckf => rec(ckf_residual(m, psi, sample, tol)?),
        CheckKind::Killing => rec(killing_residual(m, psi, sample, tol)?),
        CheckKind::StarKilling => rec(star_killing_residual(m, psi, sample, tol)?),
        CheckKind::Parallel => rec(parallel_residual(m, psi, sample, tol)?),
        CheckKind::Special => {
            let fit = fit_special_constant(m, psi, sample)?;
            let declared = form.props.iter().find_map(|p| match p {
                Property::Special(c) => Some(*c),
                _ => None,
            });
            let c = declared.unwrap_or(fit.constant);
            let r = special_killing_residual(m, psi, c, sample, SpecialVariant::FirstOrder, tol)?;
            rec(r).with_details(json!({
                "constant": c,
                "declared_constant": declared,
                "fitted_constant": fit.constant,
                "fit_residual": fit.fit_residual,
            }))
        }
        CheckKind::Eigen => {
            let lambda = match form.eigenvalue {
                Some(l) => l,
                None => laplace_eigenvalue(m, psi, &sample.points[0])?.0,
            };
            let sc = lambda.abs().max(1.0);
            let r = evaluate(label, tol, sample, |x| {
                let (l, res) = laplace_eigenvalue(m, psi, x)?;
                Ok((res / sc).max((l - lambda).abs() / sc))
            })?;
            rec(r).with_details(json!({ "eigenvalue": lambda }))
        }
        CheckKind::Integrability => rec(evaluate(label, tol, sample, |x| {
            integrability_residual(m, psi, x)
        })?),
        CheckKind::Weitzenbock => rec(evaluate(label, tol, sample, |x| {
            let w = weitzenbock_residuals(m, psi, x)?;
            Ok(w.eq_rough.max(w.eq_curvature).max(w.classical))
        })?),
        CheckKind::KillingConnection => {
            let route = Route::for_degree(m.dim, psi.p)?;
            let r = evaluate(label, tol, sample, |x| {
                killing_connection_residual(m, psi, x, &direction_at(x), route)
            })?;
            rec(r).with_details(json!({ "route": route }))
        }
        CheckKind::Curvature => rec(evaluate(label, tol, sample, |x| {
            curvature_condition(m, psi, x)
        })?),
    };
    Ok(out)
}

pub fn verify(args: &VerifyArgs) -> CmdResult {
    let e = entry(&args.manifold)?;
    let form = named(&e, &args.form)?;
    let sample = Sample::random(&e.manifold, args.common.points, args.common.seed);
    let mut report = Report::new("verify", args, args.common.seed);
    for &kind in &args.checks {
        report.checks.push(run_check(
            kind,
            &e.manifold,
            &form,
            &sample,
            args.common.tol,
        )?);
    }
    Ok(report)
}

// ---------------------------------------------------------------- cone

#[derive(Args, Clone, Debug, Serialize)]
pub struct ConeArgs {
    #[arg(long)]
    pub manifold: String,
    #[arg(long)]
    pub form: String,
    #[command(flatten)]
    pub common: Common,
}

pub fn cone(args: &ConeArgs) -> CmdResult {
    let e = entry(&args.manifold)?;
    let form = named(&e, &args.form)?;
    let cone = ConeManifold::new(&e.manifold);
    let lift = cone_lift(&cone, &form.field)?;
    let sample = cone.sample(args.common.points, args.common.seed);
    let r = cone_parallel_residual(&cone, &lift, &sample, args.common.tol)?;
    let mut report = Report::new("cone", args, args.common.seed);
    report.checks.push(
        CheckRecord::from_residual(
            "cone_parallel",
            "lift r^{p+1}(dr/r∧ψ + dψ/(p+1)) is parallel",
            &r,
        )
        .with_details(json!({ "degree": form.field.p + 1, "cone_dim": cone.dim() })),
    );
    Ok(report)
}

// ---------------------------------------------------------------- transport

#[derive(Args, Clone, Debug, Serialize)]
pub struct TransportArgs {
    #[arg(long)]
    pub manifold: String,
    #[arg(long)]
    pub form: String,
    /// Number of segments between sampled points.
    #[arg(long, default_value_t = 4, value_parser = positive_usize)]
    pub paths: usize,
    /// RK4 steps per segment.
    #[arg(long, default_value_t = 300, value_parser = positive_usize)]
    pub steps: usize,
    #[command(flatten)]
    pub common: Common,
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let d: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let s: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    d / s.max(RESIDUAL_FLOOR)
}

pub fn transport(args: &TransportArgs) -> CmdResult {
    let e = entry(&args.manifold)?;
    let form = named(&e, &args.form)?;
    let m = &e.manifold;
    let sample = Sample::random(m, 2 * args.paths, args.common.seed);
    let results: Vec<Result<(f64, Vec<f64>), Failure>> = (0..args.paths)
        .into_par_iter()
        .map(|i| {
            let (a, b) = (&sample.points[2 * i], &sample.points[2 * i + 1]);
            let e0 = ESection::from_field(m, &form.field, a)?;
            let e1 = ESection::from_field(m, &form.field, b)?;
            let res = transport_e(m, &e0, &Curve::segment(a, b), args.steps)?;
            if let TransportStatus::ChartExit { t, .. } = res.status {
                return Err(Failure::Numerical(format!(
                    "segment {i} leaves the chart at t = {t}"
                )));
            }
            Ok((rel_diff(&res.section.to_vec(), &e1.to_vec()), b.clone()))
        })
        .collect();
    let mut worst = (f64::NEG_INFINITY, Vec::new());
    let mut sum = 0.0;
    for r in results {
        let (d, b) = r?;
        sum += d;
        if d > worst.0 {
            worst = (d, b);
        }
    }
    let mut report = Report::new("transport", args, args.common.seed);
    report.checks.push(CheckRecord {
        id: "transport".into(),
        description: "Killing-connection transport of (ψ, dψ, d*ψ, dd*ψ) reproduces the field"
            .into(),
        points: args.paths,
        max_residual: worst.0,
        mean_residual: sum / args.paths as f64,
        tol: args.common.tol,
        verdict: if worst.0 <= args.common.tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        worst_point: worst.1,
        details: json!({ "steps": args.steps, "rank": twistor_core::killingconn::e_rank(m.dim, form.field.p) }),
    });
    Ok(report)
}

// ---------------------------------------------------------------- geodesic

#[derive(Args, Clone, Debug, Serialize)]
pub struct GeodesicArgs {
    #[arg(long)]
    pub manifold: String,
    #[arg(long)]
    pub form: String,
    /// Final parameter.
    #[arg(long, default_value_t = 10.0, value_parser = positive_f64)]
    pub t: f64,
    /// RK4 step.
    #[arg(long, default_value_t = 1e-3, value_parser = positive_f64)]
    pub step: f64,
    /// Number of random geodesics.
    #[arg(long, default_value_t = 1, value_parser = positive_usize)]
    pub geodesics: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE, value_parser = positive_f64)]
    pub tol: f64,
    /// Write the per-step CSV trace here.
    #[arg(long)]
    #[serde(skip)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    /// `csv` replaces the report by the per-step trace.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// One row of the per-step trace.
#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub geodesic: usize,
    pub t: f64,
    pub killing_tensor: f64,
    pub contraction_norm: f64,
    pub killing_tensor_drift: f64,
    pub contraction_drift: f64,
}

fn geodesic_start(e: &CatalogEntry, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    if let Some(n) = e.sphere_dim() {
        return Ok(great_circle_start(n, 0.6, rng));
    }
    let m = &e.manifold;
    let x = m.sample_point(rng);
    let (g, _) = m.metric_at(&x)?;
    let n = m.dim;
    let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut len = 0.0;
    for i in 0..n {
        for j in 0..n {
            len += g[i * n + j] * v[i] * v[j];
        }
    }
    let len = len.sqrt();
    Ok((x, v.iter().map(|c| c / len).collect()))
}

fn trace_geodesic(
    m: &ChartManifold,
    psi: &FormField,
    index: usize,
    x0: &[f64],
    v0: &[f64],
    args: &GeodesicArgs,
) -> Result<Vec<TraceRow>, Failure> {
    let traj = geodesic_integrate(m, x0, v0, args.t, args.step)?;
    if let CurveStatus::ChartExit { t } = traj.status {
        return Err(Failure::Numerical(format!(
            "geodesic {index} left the chart at t = {t}"
        )));
    }
    let k: Vec<f64> = traj
        .states
        .par_iter()
        .map(|s| killing_tensor(m, psi, &s.v, &s.v, &s.x))
        .collect::<Result<_, _>>()?;
    let k0 = k[0];
    let c0 = k0.max(0.0).sqrt();
    Ok(traj
        .states
        .iter()
        .zip(&k)
        .map(|(s, &kv)| {
            let c = kv.max(0.0).sqrt();
            TraceRow {
                geodesic: index,
                t: s.t,
                killing_tensor: kv,
                contraction_norm: c,
                killing_tensor_drift: (kv - k0).abs() / k0.abs().max(RESIDUAL_FLOOR),
                contraction_drift: (c - c0).abs() / c0.max(RESIDUAL_FLOOR),
            }
        })
        .collect())
}

pub fn trace_csv(rows: &[TraceRow]) -> std::io::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

pub fn geodesic(args: &GeodesicArgs) -> Result<(Report, Vec<TraceRow>), Failure> {
    let e = entry(&args.manifold)?;
    let form = named(&e, &args.form)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut rows = Vec::new();
    let drift = |pick: fn(&TraceRow) -> f64, rows: &[TraceRow], g: usize| {
        rows.iter()
            .filter(|r| r.geodesic == g)
            .map(pick)
            .fold(0.0, f64::max)
    };
    let mut per = Vec::new();
    for g in 0..args.geodesics {
        let (x0, v0) = geodesic_start(&e, &mut rng)?;
        let trace = trace_geodesic(&e.manifold, &form.field, g, &x0, &v0, args)?;
        let dk = drift(|r| r.killing_tensor_drift, &trace, g);
        let dc = drift(|r| r.contraction_drift, &trace, g);
        per.push((dk, dc, x0));
        rows.extend(trace);
    }
    let mut report = Report::new("geodesic", args, args.seed);
    let columns: [(&str, &str, fn(&(f64, f64, Vec<f64>)) -> f64); 2] = [
        (
            "killing_tensor_drift",
            "K_ψ(γ', γ') is constant along geodesics",
            |p| p.0,
        ),
        (
            "contraction_drift",
            "|γ'⌟ψ| is constant along geodesics",
            |p| p.1,
        ),
    ];
    for (id, description, pick) in columns {
        let vals: Vec<f64> = per.iter().map(pick).collect();
        let (wi, wmax) =
            vals.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |a, (i, &v)| if v > a.1 { (i, v) } else { a },
            );
        report.checks.push(CheckRecord {
            id: id.into(),
            description: description.into(),
            points: rows.len(),
            max_residual: wmax,
            mean_residual: vals.iter().sum::<f64>() / vals.len() as f64,
            tol: args.tol,
            verdict: if wmax <= args.tol {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
            worst_point: per[wi].2.clone(),
            details: json!({ "t": args.t, "step": args.step }),
        });
    }
    Ok((report, rows))
}

// ---------------------------------------------------------------- dimension

#[derive(Args, Clone, Debug, Serialize)]
pub struct DimensionArgs {
    #[arg(long)]
    pub manifold: String,
    #[arg(long)]
    pub degree: usize,
    #[arg(long, default_value_t = 20, value_parser = positive_usize)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Candidates: the explicit sphere basis, all parallel forms on tori, and the
/// declared forms of that degree elsewhere.
fn dimension_candidates(
    e: &CatalogEntry,
    p: usize,
) -> Result<(Vec<FormField>, Option<usize>), Failure> {
    let n = e.dim();
    if let Some(sn) = e.sphere_dim() {
        if e.id == format!("s{sn}") {
            let (k, s) = sphere_candidates(sn, p)?;
            let split = k.len();
            return Ok(([k, s].concat(), Some(split)));
        }
    }
    if e.is_torus() {
        let fields = twistor_core::multiindex::combos(n, p)
            .iter()
            .map(|idx| catalog::parallel_form(n, idx))
            .collect::<Result<_, _>>()?;
        return Ok((fields, None));
    }
    let fields = e
        .forms()?
        .into_iter()
        .map(|f| f.field)
        .filter(|f| f.p == p)
        .collect();
    Ok((fields, None))
}

pub fn dimension(args: &DimensionArgs) -> CmdResult {
    let e = entry(&args.manifold)?;
    let n = e.dim();
    if args.degree == 0 || args.degree >= n {
        return Err(Failure::Usage(format!(
            "degree must lie in 1..{} on `{}`",
            n - 1,
            e.id
        )));
    }
    let (cands, split) = dimension_candidates(&e, args.degree)?;
    if cands.is_empty() {
        return Err(Failure::Usage(format!(
            "no candidate forms of degree {} on `{}`",
            args.degree, e.id
        )));
    }
    let sample = Sample::random(&e.manifold, args.points, args.seed);
    let rep = dimension_count(&e.manifold, args.degree, &cands, &sample)?;
    let split_ranks = match split {
        Some(k) => {
            let a = dimension_count(&e.manifold, args.degree, &cands[..k], &sample)?.rank;
            let b = dimension_count(&e.manifold, args.degree, &cands[k..], &sample)?.rank;
            Some((a, b))
        }
        None => None,
    };
    let smax = rep.singular_values.first().copied().unwrap_or(0.0);
    let gap = rep
        .singular_values
        .get(rep.rank)
        .map(|s| s / smax.max(f64::MIN_POSITIVE))
        .unwrap_or(0.0);
    let pass = match split {
        Some(_) => rep.verdict == RankVerdict::Equal,
        None => rep.verdict != RankVerdict::Exceeds,
    };
    let mut report = Report::new("dimension", args, args.seed);
    let p = args.degree;
    report.checks.push(CheckRecord {
        id: "dimension".into(),
        description: "rank of conformal Killing forms against C(n+2, p+1)".into(),
        points: sample.len(),
        max_residual: gap,
        mean_residual: gap,
        tol: RANK_TOLERANCE,
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        worst_point: Vec::new(),
        details: json!({
            "rank": rep.rank,
            "bound": rep.bound,
            "candidates": rep.candidates,
            "verdict": rep.verdict,
            "killing_rank": split_ranks.map(|s| s.0),
            "star_killing_rank": split_ranks.map(|s| s.1),
            "killing_bound": binomial(n + 1, p + 1),
            "star_killing_bound": binomial(n + 1, p),
        }),
    });
    Ok(report)
}

// ---------------------------------------------------------------- spin

#[derive(Args, Clone, Debug, Serialize)]
pub struct SpinArgs {
    /// Dimension of the flat space.
    #[arg(long, default_value_t = 4)]
    pub dim: usize,
    /// Form degree; every degree 1..dim−1 when omitted.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of random twistor-spinor pairs.
    #[arg(long, default_value_t = 5, value_parser = positive_usize)]
    pub pairs: usize,
    #[command(flatten)]
    pub common: Common,
}

/// Merge reports of the same check over several fields (max of maxima, mean of means).
fn merge(reports: &[ResidualReport]) -> ResidualReport {
    let mut out = reports[0].clone();
    for r in &reports[1..] {
        if r.max_residual > out.max_residual {
            out.max_residual = r.max_residual;
            out.worst_point = r.worst_point.clone();
        }
    }
    out.mean_residual = reports.iter().map(|r| r.mean_residual).sum::<f64>() / reports.len() as f64;
    out.points = reports.iter().map(|r| r.points).sum();
    out.pass = reports.iter().all(|r| r.pass);
    out
}

pub fn spin(args: &SpinArgs) -> CmdResult {
    let n = args.dim;
    if n < 2 {
        return Err(Failure::Usage("spin needs --dim ≥ 2".into()));
    }
    let alg = CliffordAlgebra::new(n)?;
    let degrees: Vec<usize> = match args.k {
        Some(k) if k == 0 || k >= n => {
            return Err(Failure::Usage(format!("--k must lie in 1..{}", n - 1)))
        }
        Some(k) => vec![k],
        None => (1..n).collect(),
    };
    let m = euclidean(n);
    let sample = Sample::random(&m, args.common.points, args.common.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed);
    let pairs: Vec<(TwistorSpinorField, TwistorSpinorField)> = (0..args.pairs)
        .map(|_| {
            (
                TwistorSpinorField::random(&alg, &mut rng),
                TwistorSpinorField::random(&alg, &mut rng),
            )
        })
        .collect();
    let tol = args.common.tol;
    let mut report = Report::new("spin", args, args.common.seed);
    for k in degrees {
        let mut ckf = Vec::new();
        let mut app = Vec::new();
        for (p1, p2) in &pairs {
            let w = spinor_form(&alg, p1, p2, k)?;
            ckf.push(ckf_residual(&m, &w, &sample, tol)?);
            app.push(evaluate(format!("appendix:{k}"), tol, &sample, |x| {
                let r = appendix_identities(&alg, p1, p2, k, x)?;
                Ok(r.d.max(r.dstar))
            })?);
        }
        report.checks.push(
            CheckRecord::from_residual(
                &format!("spinor_ckf:{k}"),
                "ω_k of two twistor spinors is conformal Killing",
                &merge(&ckf),
            )
            .with_details(json!({ "k": k, "pairs": args.pairs })),
        );
        report.checks.push(
            CheckRecord::from_residual(
                &format!("spinor_derivatives:{k}"),
                "dω_k and d*ω_k match the spinor formulas",
                &merge(&app),
            )
            .with_details(json!({ "k": k, "pairs": args.pairs })),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::UnknownId("x".into())).exit_code(), 2);
        assert_eq!(
            Failure::from(Error::DegenerateDegree {
                p: 0,
                n: 3,
                what: ""
            })
            .exit_code(),
            2
        );
        assert_eq!(Failure::from(Error::Singular { value: 0.0 }).exit_code(), 1);
    }

    #[test]
    fn merge_takes_the_worst() {
        let r = |m: f64, pass| ResidualReport {
            check: "c".into(),
            points: 2,
            max_residual: m,
            mean_residual: m / 2.0,
            tolerance: 1.0,
            pass,
            worst_point: vec![m],
        };
        let out = merge(&[r(0.5, true), r(2.0, false), r(1.0, true)]);
        assert_eq!((out.max_residual, out.points, out.pass), (2.0, 6, false));
        assert_eq!(out.worst_point, vec![2.0]);
    }

    #[test]
    fn directions_are_nonzero() {
        let d = direction_at(&[0.1, 0.2, 0.3]);
        assert!(d.iter().map(|v| v * v).sum::<f64>() > 0.1);
    }
}
