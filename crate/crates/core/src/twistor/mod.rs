//! The twistor operator, its projection, and the residual checks built on it.
//!
//! A 1-form-valued `p`-form `S` is stored as `S[i] = S(∂_i)`. The projection onto
//! `Λ^{p,1}` is
//! `pr(S)(∂_v) = S_v − (p+1)⁻¹ ∂_v⌟(Σ_c dx^c∧S_c) − (n−p+1)⁻¹ ∂_v^♭∧(Σ g^{ab} ∂_a⌟S_b)`,
//! which on `S = α⊗ψ` is the familiar `α(v)ψ − v⌟(α∧ψ)/(p+1) − v*∧(α^♯⌟ψ)/(n−p+1)`.

pub mod checks;
pub mod conformal;
pub mod decompose;
pub mod identities;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{
    codiff_from_nabla, cov_deriv, d_from_nabla, flat, interior_coord, valued_norm, wedge,
    wedge_coord, Form, FormField, FormValued,
};
use crate::geometry::{ChartManifold, LocalGeom};
use crate::jets::Jet;

pub use checks::{
    ckf_residual, evaluate, fit_special_constant, killing_residual, parallel_residual,
    special_killing_residual, star_killing_residual, ResidualReport, Sample, SpecialFit,
    SpecialVariant, DEFAULT_TOLERANCE, RESIDUAL_FLOOR,
};

pub(crate) fn check_degree(n: usize, p: usize) -> Result<()> {
    if p == 0 || p >= n {
        return Err(Error::DegenerateDegree {
            p,
            n,
            what: "twistor operator needs 1 ≤ p ≤ n−1",
        });
    }
    Ok(())
}

/// `Σ_c dx^c ∧ S_c`.
pub fn wedge_trace(s: &[Form<Jet>]) -> Result<Form<Jet>> {
    d_from_nabla(s)
}

/// `Σ g^{ab} ∂_a ⌟ S_b`.
pub fn contraction_trace(ginv: &[Jet], s: &[Form<Jet>]) -> Result<Form<Jet>> {
    let n = s.len();
    let p = s[0].p;
    if p == 0 {
        return Err(Error::Degree(
            "contraction trace of a scalar-valued 1-form".into(),
        ));
    }
    let mut out = Form::zero(n, p - 1, &ginv[0]);
    for a in 0..n {
        for b in 0..n {
            let gab = &ginv[a * n + b];
            if gab.coeffs().iter().all(|&v| v == 0.0) {
                continue;
            }
            let t = interior_coord(a, &s[b])?;
            for (o, v) in out.c.iter_mut().zip(&t.c) {
                o.fma(1.0, gab, v);
            }
        }
    }
    Ok(out)
}

/// Orthogonal projection of `T*⊗Λ^p` onto `Λ^{p,1}`.
pub fn project_p1(g: &[Jet], ginv: &[Jet], s: &[Form<Jet>]) -> Result<FormValued<Jet>> {
    let n = s.len();
    let p = s[0].p;
    check_degree(n, p)?;
    let w = wedge_trace(s)?;
    let c = contraction_trace(ginv, s)?;
    let (a, b) = (1.0 / (p + 1) as f64, 1.0 / (n - p + 1) as f64);
    let mut out = Vec::with_capacity(n);
    for v in 0..n {
        let mut t = s[v].clone();
        t.axpy(-a, &interior_coord(v, &w)?);
        let ev: Vec<Jet> = (0..n)
            .map(|k| ginv[0].constant_like(if k == v { 1.0 } else { 0.0 }))
            .collect();
        t.axpy(-b, &wedge(&flat(g, &ev), &c)?);
        out.push(t);
    }
    Ok(out)
}

/// The decomposable element `α ⊗ ψ`, i.e. `S(∂_v) = α_v ψ`.
pub fn tensor_alpha_psi(alpha: &Form<Jet>, psi: &Form<Jet>) -> FormValued<Jet> {
    alpha.c.iter().map(|a| psi.mul_scalar(a)).collect()
}

/// `[Tψ](∂_i) = ∇_iψ − (p+1)⁻¹ ∂_i⌟dψ + (n−p+1)⁻¹ ∂_i^♭∧d*ψ` from precomputed `∇ψ`.
pub fn twistor_from_nabla(lg: &LocalGeom, nabla: &[Form<Jet>]) -> Result<FormValued<Jet>> {
    let n = lg.n;
    let p = nabla[0].p;
    check_degree(n, p)?;
    let d = d_from_nabla(nabla)?;
    let ds = codiff_from_nabla(lg, nabla)?;
    let (a, b) = (1.0 / (p + 1) as f64, 1.0 / (n - p + 1) as f64);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = nabla[i].clone();
        t.axpy(-a, &interior_coord(i, &d)?);
        let mut lowered = Form::zero(n, p, &ds.c[0]);
        for j in 0..n {
            lowered.axpy(1.0, &wedge_coord(j, &ds)?.mul_scalar(&lg.g[i * n + j]));
        }
        t.axpy(b, &lowered);
        out.push(t);
    }
    Ok(out)
}

pub fn twistor_jets(lg: &LocalGeom, psi: &Form<Jet>) -> Result<FormValued<Jet>> {
    twistor_from_nabla(lg, &cov_deriv(lg, psi)?)
}

/// `[Tψ](∂_i)` at a point, with the trace defects of `Λ^{p,1}` membership.
#[derive(Debug, Clone, Serialize)]
pub struct TwistorValue {
    pub n: usize,
    pub p: usize,
    /// `t[i][J] = [Tψ](∂_i)_J`
    pub t: Vec<Vec<f64>>,
    pub norm: f64,
    pub wedge_trace: f64,
    pub contraction_trace: f64,
}

fn values(s: &[Form<Jet>]) -> FormValued<f64> {
    s.iter().map(Form::values).collect()
}

pub fn twistor_apply(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<TwistorValue> {
    let lg = LocalGeom::new(m, x, 1)?;
    let f = psi.at(x, 1)?;
    let t = twistor_jets(&lg, &f)?;
    let lg0 = lg.truncate(0);
    let ginv = lg0.ginv_values();
    let w = wedge_trace(&t)?.values();
    let c = contraction_trace(&lg0.ginv, &t)?.values();
    let wn = crate::forms::norm(&ginv, &w);
    let cn = if c.c.is_empty() {
        0.0
    } else {
        crate::forms::norm(&ginv, &c)
    };
    let tv = values(&t);
    Ok(TwistorValue {
        n: lg.n,
        p: f.p,
        norm: valued_norm(&ginv, &tv),
        t: tv.into_iter().map(|f| f.c).collect(),
        wedge_trace: wn,
        contraction_trace: cn,
    })
}
