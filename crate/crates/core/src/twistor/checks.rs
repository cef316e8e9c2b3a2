//! Residual reports over sampled points.
//!
//! Every pointwise residual is the metric norm of a defect divided by
//! `max(|ψ|_g, RESIDUAL_FLOOR)`, so tolerances are relative to the size of the form
//! and fall back to absolute ones where the form is tiny.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_degree, twistor_from_nabla};
use crate::error::{Error, Result};
use crate::forms::{
    codiff_from_nabla, cov_deriv, d_from_nabla, ext_d, interior_coord, norm, raise, valued_norm,
    wedge_coord, Form, FormField, FormValued,
};
use crate::geometry::{ChartManifold, LocalGeom};
use crate::jets::Jet;

/// Lower clamp on the normalizing `|ψ|`; equals absolute 1e-10 over relative 1e-7.
pub const RESIDUAL_FLOOR: f64 = 1e-3;

/// Default relative tolerance for residual checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;

/// Aggregated residual of one check over a point sample.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub check: String,
    pub points: usize,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub worst_point: Vec<f64>,
}

/// Sample points in the first chart of a manifold.
#[derive(Debug, Clone)]
pub struct Sample {
    pub points: Vec<Vec<f64>>,
}

impl Sample {
    /// `count` points drawn from the chart's sampling region with a seeded ChaCha stream.
    pub fn random(m: &ChartManifold, count: usize, seed: u64) -> Sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Sample {
            points: (0..count).map(|_| m.sample_point(&mut rng)).collect(),
        }
    }

    pub fn from_points(points: Vec<Vec<f64>>) -> Sample {
        Sample { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Evaluate a pointwise residual in parallel and aggregate it.
pub fn evaluate<F>(
    check: impl Into<String>,
    tolerance: f64,
    sample: &Sample,
    f: F,
) -> Result<ResidualReport>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let vals: Vec<f64> = sample
        .points
        .par_iter()
        .map(|x| f(x))
        .collect::<Result<_>>()?;
    let (mut worst, mut max) = (0, f64::NEG_INFINITY);
    for (i, &v) in vals.iter().enumerate() {
        // NaN counts as the worst possible residual
        if v.is_nan() || v > max {
            worst = i;
            max = if v.is_nan() { f64::INFINITY } else { v };
        }
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    Ok(ResidualReport {
        check: check.into(),
        points: vals.len(),
        max_residual: max,
        mean_residual: mean,
        tolerance,
        pass: max <= tolerance,
        worst_point: sample.points[worst].clone(),
    })
}

pub(crate) fn scale(ginv: &[f64], psi: &Form<f64>) -> f64 {
    norm(ginv, psi).max(RESIDUAL_FLOOR)
}

fn form_norm(ginv: &[f64], a: &Form<Jet>) -> f64 {
    if a.c.is_empty() {
        0.0
    } else {
        norm(ginv, &a.values())
    }
}

/// `(Σ g^{aa'} g^{ii'} ⟨D_{ai}, D_{a'i'}⟩)^{1/2}` for a doubly indexed defect.
pub fn double_valued_norm(ginv: &[f64], d: &[FormValued<f64>]) -> f64 {
    let n = d.len();
    let raised: Vec<Vec<Form<f64>>> = d
        .iter()
        .map(|row| row.iter().map(|f| raise(ginv, f)).collect())
        .collect();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            let gab = ginv[a * n + b];
            if gab == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    let gij = ginv[i * n + j];
                    if gij == 0.0 {
                        continue;
                    }
                    let ip: f64 = d[a][i]
                        .c
                        .iter()
                        .zip(&raised[b][j].c)
                        .map(|(x, y)| x * y)
                        .sum();
                    acc += gab * gij * ip;
                }
            }
        }
    }
    acc.max(0.0).sqrt()
}

/// Pointwise pieces of the first-order checks.
pub struct FirstOrder {
    pub psi_norm: f64,
    pub twistor: f64,
    pub d: f64,
    pub dstar: f64,
}

pub fn first_order_at(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<FirstOrder> {
    check_degree(m.dim, psi.p)?;
    let lg = LocalGeom::new(m, x, 1)?;
    let f = psi.at(x, 1)?;
    let nabla = cov_deriv(&lg, &f)?;
    let t = twistor_from_nabla(&lg, &nabla)?;
    let ginv = lg.ginv_values();
    let tv: FormValued<f64> = t.iter().map(Form::values).collect();
    Ok(FirstOrder {
        psi_norm: scale(&ginv, &f.values()),
        twistor: valued_norm(&ginv, &tv),
        d: form_norm(&ginv, &d_from_nabla(&nabla)?),
        dstar: form_norm(&ginv, &codiff_from_nabla(&lg, &nabla)?),
    })
}

pub fn ckf_residual(
    m: &ChartManifold,
    psi: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<ResidualReport> {
    evaluate(format!("ckf:{}", psi.label), tol, sample, |x| {
        let r = first_order_at(m, psi, x)?;
        Ok(r.twistor / r.psi_norm)
    })
}

/// Conformal Killing and coclosed.
pub fn killing_residual(
    m: &ChartManifold,
    psi: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<ResidualReport> {
    evaluate(format!("killing:{}", psi.label), tol, sample, |x| {
        let r = first_order_at(m, psi, x)?;
        Ok(r.twistor.max(r.dstar) / r.psi_norm)
    })
}

/// Conformal Killing and closed.
pub fn star_killing_residual(
    m: &ChartManifold,
    psi: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<ResidualReport> {
    evaluate(format!("star_killing:{}", psi.label), tol, sample, |x| {
        let r = first_order_at(m, psi, x)?;
        Ok(r.twistor.max(r.d) / r.psi_norm)
    })
}

/// Parallel: `|∇ψ|`.
pub fn parallel_residual(
    m: &ChartManifold,
    psi: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<ResidualReport> {
    evaluate(format!("parallel:{}", psi.label), tol, sample, |x| {
        let lg = LocalGeom::new(m, x, 1)?;
        let f = psi.at(x, 1)?;
        let nabla: FormValued<f64> = cov_deriv(&lg, &f)?.iter().map(Form::values).collect();
        let ginv = lg.ginv_values();
        Ok(valued_norm(&ginv, &nabla) / scale(&ginv, &f.values()))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpecialVariant {
    /// `∇_X dψ = c X*∧ψ`
    FirstOrder,
    /// `∇²_{X,Y}ψ = c/(p+1) (g(X,Y)ψ − X*∧(Y⌟ψ))`
    SecondOrder,
}

/// `∂_i^♭ ∧ α`.
fn lower_wedge(lg: &LocalGeom, i: usize, a: &Form<Jet>) -> Result<Form<Jet>> {
    let n = lg.n;
    let mut out: Option<Form<Jet>> = None;
    for j in 0..n {
        let t = wedge_coord(j, a)?.mul_scalar(&lg.g[i * n + j]);
        match out.as_mut() {
            None => out = Some(t),
            Some(o) => o.axpy(1.0, &t),
        }
    }
    out.ok_or(Error::EmptySample)
}

/// Defect of the special Killing equation at a point (normalized).
pub fn special_defect(
    m: &ChartManifold,
    psi: &FormField,
    c: f64,
    x: &[f64],
    variant: SpecialVariant,
) -> Result<f64> {
    let n = m.dim;
    let lg = LocalGeom::new(m, x, 2)?;
    let f = psi.at(x, 2)?;
    let lg0 = lg.truncate(0);
    let ginv = lg0.ginv_values();
    let f0 = f.truncate(0);
    let sc = scale(&ginv, &f0.values());
    match variant {
        SpecialVariant::FirstOrder => {
            let dpsi = ext_d(&f)?;
            if dpsi.c.is_empty() {
                // top-degree forms: both sides vanish
                return Ok(0.0);
            }
            let nd = cov_deriv(&lg, &dpsi)?;
            let defect: FormValued<f64> = (0..n)
                .map(|i| Ok(nd[i].sub(&lower_wedge(&lg0, i, &f0)?.scale(c)).values()))
                .collect::<Result<_>>()?;
            Ok(valued_norm(&ginv, &defect) / sc)
        }
        SpecialVariant::SecondOrder => {
            let h = crate::forms::second_cov(&lg, &f)?;
            let cc = c / (f.p + 1) as f64;
            let mut d = Vec::with_capacity(n);
            for a in 0..n {
                let mut row = Vec::with_capacity(n);
                for i in 0..n {
                    let mut rhs = f0.mul_scalar(&lg0.g[a * n + i]);
                    if f.p > 0 {
                        rhs.axpy(-1.0, &lower_wedge(&lg0, a, &interior_coord(i, &f0)?)?);
                    }
                    row.push(h[a][i].sub(&rhs.scale(cc)).values());
                }
                d.push(row);
            }
            Ok(double_valued_norm(&ginv, &d) / sc)
        }
    }
}

pub fn special_killing_residual(
    m: &ChartManifold,
    psi: &FormField,
    c: f64,
    sample: &Sample,
    variant: SpecialVariant,
    tol: f64,
) -> Result<ResidualReport> {
    let tag = match variant {
        SpecialVariant::FirstOrder => "special1",
        SpecialVariant::SecondOrder => "special2",
    };
    evaluate(format!("{tag}:{}:c={c}", psi.label), tol, sample, |x| {
        special_defect(m, psi, c, x, variant)
    })
}

/// Least-squares constant `c` in `∇_X dψ = c X*∧ψ` over a sample.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialFit {
    pub constant: f64,
    /// max over points of `|∇dψ − c X*∧ψ| / |ψ|` at the fitted `c`
    pub fit_residual: f64,
    pub points: usize,
}

pub fn fit_special_constant(
    m: &ChartManifold,
    psi: &FormField,
    sample: &Sample,
) -> Result<SpecialFit> {
    check_degree(m.dim, psi.p)?;
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = m.dim;
    // per point: (∇dψ, X*∧ψ, g⁻¹, scale)
    let parts: Vec<(FormValued<f64>, FormValued<f64>, Vec<f64>, f64)> = sample
        .points
        .par_iter()
        .map(|x| {
            let lg = LocalGeom::new(m, x, 2)?;
            let f = psi.at(x, 2)?;
            let lg0 = lg.truncate(0);
            let f0 = f.truncate(0);
            let nd = cov_deriv(&lg, &ext_d(&f)?)?;
            let a: FormValued<f64> = nd.iter().map(Form::values).collect();
            let b: FormValued<f64> = (0..n)
                .map(|i| Ok(lower_wedge(&lg0, i, &f0)?.values()))
                .collect::<Result<_>>()?;
            let ginv = lg0.ginv_values();
            let sc = scale(&ginv, &f0.values());
            Ok((a, b, ginv, sc))
        })
        .collect::<Result<_>>()?;
    let combo = |a: &FormValued<f64>, b: &FormValued<f64>, s: f64| -> FormValued<f64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let mut t = x.clone();
                t.axpy(s, y);
                t
            })
            .collect()
    };
    let (mut ab, mut bb) = (0.0, 0.0);
    for (a, b, ginv, sc) in &parts {
        let w = 1.0 / (sc * sc);
        let plus = crate::forms::valued_norm_sq(ginv, &combo(a, b, 1.0));
        let minus = crate::forms::valued_norm_sq(ginv, &combo(a, b, -1.0));
        ab += w * (plus - minus) / 4.0;
        bb += w * crate::forms::valued_norm_sq(ginv, b);
    }
    let c = if bb > 0.0 { ab / bb } else { 0.0 };
    let fit_residual = parts
        .iter()
        .map(|(a, b, ginv, sc)| valued_norm(ginv, &combo(a, b, -c)) / sc)
        .fold(0.0, f64::max);
    Ok(SpecialFit {
        constant: c,
        fit_residual,
        points: parts.len(),
    })
}
