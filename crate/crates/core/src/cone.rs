//! The metric cone `M̂ = M × (r_min, r_max)` with `ĝ = r²g + dr²`.
//!
//! Cone coordinates are `(x¹, …, xⁿ, r)` and the cone is an ordinary
//! [`ChartManifold`], so its connection and curvature come from the generic
//! geometry code. A `(p+1)`-form on the cone is split as
//! `ω̂ = r^p dr∧ω₁ + r^{p+1} ω₀` with `ω₁`, `ω₀` forms on `M`; the lift of a
//! `p`-form is `ψ̂ = r^p dr∧ψ + r^{p+1}/(p+1) dψ`.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{
    codiff, cov_deriv, ext_d, flat, hodge_laplacian, hodge_star, interior_coord, norm, wedge,
    wedge_power, Form, FormField,
};
use crate::geometry::{Chart, ChartManifold, LocalGeom, MetricFn, Region};
use crate::jets::Jet;
use crate::twistor::checks::scale;
use crate::twistor::{
    evaluate, fit_special_constant, special_killing_residual, ResidualReport, Sample, SpecialFit,
    SpecialVariant,
};

/// Radii at which cone samples are taken.
pub const SAMPLE_RADII: [f64; 3] = [0.6, 1.0, 1.7];

#[derive(Clone, Debug)]
pub struct ConeManifold {
    pub base: ChartManifold,
    /// The cone chart over the first chart of `base`.
    pub manifold: ChartManifold,
    pub r_min: f64,
    pub r_max: f64,
}

impl ConeManifold {
    pub fn new(base: &ChartManifold) -> ConeManifold {
        ConeManifold::with_bounds(base, 0.5, 2.0).expect("default bounds are valid")
    }

    pub fn with_bounds(base: &ChartManifold, r_min: f64, r_max: f64) -> Result<ConeManifold> {
        if !(r_min > 0.0 && r_min < r_max) {
            return Err(Error::Invalid(format!(
                "cone radii ({r_min}, {r_max}) must satisfy 0 < r_min < r_max"
            )));
        }
        let n = base.dim;
        let bm = base.metric_fn().clone();
        let metric: MetricFn = Arc::new(move |u: &[Jet]| {
            let g = bm(&u[..n])?;
            let r2 = &u[n] * &u[n];
            let mut out = vec![u[0].zero_like(); (n + 1) * (n + 1)];
            for i in 0..n {
                for j in 0..n {
                    out[i * (n + 1) + j] = &g[i * n + j] * &r2;
                }
            }
            out[(n + 1) * (n + 1) - 1] = u[0].constant_like(1.0);
            Ok(out)
        });
        let chart = base.chart();
        let id = format!("cone({})", base.id);
        let manifold = ChartManifold {
            id: id.clone(),
            dim: n + 1,
            charts: vec![Chart {
                id: format!("{id}:0"),
                metric,
                domain: Region::Cylinder(Box::new(chart.domain.clone()), r_min, r_max),
                sample: Region::Cylinder(Box::new(chart.sample.clone()), r_min, r_max),
            }],
            orientation: base.orientation,
            transition: None,
        };
        Ok(ConeManifold {
            base: base.clone(),
            manifold,
            r_min,
            r_max,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.dim + 1
    }

    /// `count` base points, each taken at every radius of [`SAMPLE_RADII`].
    pub fn sample(&self, count: usize, seed: u64) -> Sample {
        let base = Sample::random(&self.base, count, seed);
        let mut points = Vec::with_capacity(count * SAMPLE_RADII.len());
        for x in &base.points {
            for &r in &SAMPLE_RADII {
                let mut y = x.clone();
                y.push(r);
                points.push(y);
            }
        }
        Sample::from_points(points)
    }
}

/// `dr ∧ α` for a form `α` on the base, as a form on the cone.
fn dr_wedge(a: &Form<Jet>, proto: &Jet) -> Form<Jet> {
    let n = a.n;
    let mut out = Form::zero(n + 1, a.p + 1, proto);
    let sign = if a.p.is_multiple_of(2) { 1.0 } else { -1.0 };
    for (k, idx) in a.indices().iter().enumerate() {
        let mut j = idx.clone();
        j.push(n);
        out.add_at(&j, &a.c[k].scale(sign));
    }
    out
}

/// A base form viewed on the cone with the same components.
fn horizontal(a: &Form<Jet>, proto: &Jet) -> Form<Jet> {
    let mut out = Form::zero(a.n + 1, a.p, proto);
    for (k, idx) in a.indices().iter().enumerate() {
        out.add_at(idx, &a.c[k]);
    }
    out
}

/// The lift `ψ̂ = r^p dr∧ψ + r^{p+1}/(p+1) dψ` of a `p`-form on the base.
pub fn cone_lift(cone: &ConeManifold, psi: &FormField) -> Result<FormField> {
    let n = cone.base.dim;
    if psi.n != n {
        return Err(Error::Degree(format!(
            "lift of a form on {} coordinates to a cone over {n}",
            psi.n
        )));
    }
    let p = psi.p;
    let (f, df) = (psi.clone(), psi.exterior_d());
    Ok(FormField::new(
        n + 1,
        p + 1,
        format!("lift({})", psi.label),
        Arc::new(move |u: &[Jet]| {
            let (x, r) = (&u[..n], &u[n]);
            let mut out = dr_wedge(&f.eval(x)?, &u[0]).mul_scalar(&r.powi(p as u32));
            if p < n {
                let h = horizontal(&df.eval(x)?, &u[0]);
                out.axpy(
                    1.0,
                    &h.mul_scalar(&r.powi(p as u32 + 1).scale(1.0 / (p + 1) as f64)),
                );
            }
            Ok(out)
        }),
    ))
}

/// A base form viewed as an `r`-independent horizontal form on the cone.
pub fn horizontal_field(cone: &ConeManifold, alpha: &FormField) -> Result<FormField> {
    let n = cone.base.dim;
    if alpha.n != n {
        return Err(Error::Degree("base form of the wrong dimension".into()));
    }
    let a = alpha.clone();
    Ok(FormField::new(
        n + 1,
        alpha.p,
        format!("horizontal({})", alpha.label),
        Arc::new(move |u: &[Jet]| Ok(horizontal(&a.eval(&u[..n])?, &u[0]))),
    ))
}

/// `Φ*Ω` for a constant form `Ω` on `ℝ^{n+1}` and the polar map
/// `Φ(x, r) = r F(x)` of the cone over the north stereographic chart of `Sⁿ`.
pub fn polar_pullback(n: usize, omega: &Form<f64>, label: &str) -> Result<FormField> {
    if omega.n != n + 1 {
        return Err(Error::Degree(format!(
            "constant form on ℝ^{} for the cone over S^{n}",
            omega.n
        )));
    }
    let amb = FormField::constant(format!("{label}@R{}", n + 1), omega.clone());
    let phi: crate::forms::field::MapWithJacobian = Arc::new(move |u: &[Jet]| {
        let (y, dy) = crate::catalog::ambient::inverse_stereographic(&u[..n], false)?;
        let r = &u[n];
        let m = n + 1;
        let mut jac = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..n {
                jac.push(&dy[a * n + b] * r);
            }
            jac.push(y[a].clone());
        }
        Ok((y.iter().map(|v| v * r).collect(), jac))
    });
    Ok(amb.pullback(n + 1, label, phi))
}

/// `ω₁` and `ω₀` of a cone form read off at a fixed radius.
#[derive(Clone, Debug)]
pub struct ConeSplit {
    /// Degree of `ω₁`; the cone form has degree `p + 1`.
    pub p: usize,
    pub r: f64,
    pub omega1: FormField,
    pub omega0: FormField,
}

pub fn split_at_radius(cone: &ConeManifold, omega: &FormField, r: f64) -> Result<ConeSplit> {
    let n = cone.base.dim;
    if omega.n != n + 1 {
        return Err(Error::Degree("form does not live on this cone".into()));
    }
    if omega.p == 0 || omega.p > n {
        return Err(Error::Degree(format!(
            "cone split needs degree 1..={n}, got {}",
            omega.p
        )));
    }
    let p = omega.p - 1;
    let on_cone = move |w: &FormField, u: &[Jet]| {
        let mut cu = u.to_vec();
        cu.push(u[0].constant_like(r));
        w.eval(&cu)
    };
    let (w1, w0) = (omega.clone(), omega.clone());
    let sign = if p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let omega1 = FormField::new(
        n,
        p,
        format!("{}:omega1", omega.label),
        Arc::new(move |u: &[Jet]| {
            let w = on_cone(&w1, u)?;
            let mut out = Form::zero(n, p, &u[0]);
            let s = sign / r.powi(p as i32);
            for (k, idx) in out.indices().iter().enumerate() {
                let mut j = idx.clone();
                j.push(n);
                out.c[k] = w.get(&j).scale(s);
            }
            Ok(out)
        }),
    );
    let omega0 = FormField::new(
        n,
        p + 1,
        format!("{}:omega0", omega.label),
        Arc::new(move |u: &[Jet]| {
            let w = on_cone(&w0, u)?;
            let mut out = Form::zero(n, p + 1, &u[0]);
            let s = 1.0 / r.powi(p as i32 + 1);
            for (k, idx) in out.indices().iter().enumerate() {
                out.c[k] = w.get(idx).scale(s);
            }
            Ok(out)
        }),
    );
    Ok(ConeSplit {
        p,
        r,
        omega1,
        omega0,
    })
}

fn sup_diff(a: &Form<f64>, b: &Form<f64>) -> f64 {
    a.c.iter()
        .zip(&b.c)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

/// Extraction result: the split at `r = 1` and the residuals of the relations
/// `∇_Xω₁ = X⌟ω₀`, `∇_Xω₀ = −X*∧ω₁` and their consequences.
#[derive(Clone, Debug)]
pub struct ConeExtraction {
    pub split: ConeSplit,
    /// Largest relative change of `ω₁`, `ω₀` across [`SAMPLE_RADII`].
    pub homogeneity_defect: f64,
    pub checks: Vec<ResidualReport>,
}

impl ConeExtraction {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&ResidualReport> {
        self.checks.iter().find(|c| c.check == name)
    }
}

pub fn cone_extract(
    cone: &ConeManifold,
    omega: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<ConeExtraction> {
    let split = split_at_radius(cone, omega, 1.0)?;
    let others: Vec<ConeSplit> = [SAMPLE_RADII[0], SAMPLE_RADII[2]]
        .iter()
        .map(|&r| split_at_radius(cone, omega, r))
        .collect::<Result<_>>()?;
    let mut dev: f64 = 0.0;
    for x in &sample.points {
        let (a1, a0) = (split.omega1.values(x)?, split.omega0.values(x)?);
        let sc = a1.max_abs().max(a0.max_abs()).max(1e-3);
        for o in &others {
            dev = dev.max(sup_diff(&a1, &o.omega1.values(x)?) / sc);
            dev = dev.max(sup_diff(&a0, &o.omega0.values(x)?) / sc);
        }
    }
    if dev > tol {
        return Err(Error::NotHomogeneous { deviation: dev });
    }
    let m = &cone.base;
    let n = m.dim;
    let p = split.p;
    let (w1, w0) = (&split.omega1, &split.omega0);
    let ev = |x: &[f64]| -> Result<_> {
        let lg = LocalGeom::new(m, x, 2)?;
        let (f1, f0) = (w1.at(x, 2)?, w0.at(x, 2)?);
        let lg0 = lg.truncate(0);
        let ginv = lg0.ginv_values();
        let sc = scale(&ginv, &f1.values());
        Ok((lg, lg0, ginv, f1, f0, sc))
    };
    let mut checks = Vec::new();
    checks.push(evaluate("nabla_omega1", tol, sample, |x| {
        let (lg, _, ginv, f1, f0, sc) = ev(x)?;
        let nab = cov_deriv(&lg, &f1)?;
        let mut worst: f64 = 0.0;
        for (i, ni) in nab.iter().enumerate() {
            let d = ni.values().sub(&interior_coord(i, &f0.values())?);
            worst = worst.max(norm(&ginv, &d));
        }
        Ok(worst / sc)
    })?);
    checks.push(evaluate("nabla_omega0", tol, sample, |x| {
        let (lg, lg0, ginv, f1, f0, sc) = ev(x)?;
        let nab = cov_deriv(&lg, &f0)?;
        let g = lg0.g_values();
        let mut worst: f64 = 0.0;
        for (i, ni) in nab.iter().enumerate() {
            let ei: Vec<f64> = (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect();
            let d = ni.values().add(&wedge(&flat(&g, &ei), &f1.values())?);
            worst = worst.max(norm(&ginv, &d));
        }
        Ok(worst / sc)
    })?);
    checks.push(evaluate("d_omega0", tol, sample, |x| {
        let (_, _, ginv, _, f0, sc) = ev(x)?;
        let d = ext_d(&f0)?;
        Ok(if d.c.is_empty() {
            0.0
        } else {
            norm(&ginv, &d.values()) / sc
        })
    })?);
    checks.push(evaluate("dstar_omega1", tol, sample, |x| {
        let (lg, _, ginv, f1, _, sc) = ev(x)?;
        if p == 0 {
            return Ok(0.0);
        }
        Ok(norm(&ginv, &codiff(&lg, &f1)?.values()) / sc)
    })?);
    checks.push(evaluate("d_omega1", tol, sample, |x| {
        let (_, _, ginv, f1, f0, sc) = ev(x)?;
        let d = ext_d(&f1)?.values().sub(&f0.values().scale((p + 1) as f64));
        Ok(norm(&ginv, &d) / sc)
    })?);
    checks.push(evaluate("dstar_omega0", tol, sample, |x| {
        let (lg, _, ginv, f1, f0, sc) = ev(x)?;
        let d = codiff(&lg, &f0)?
            .values()
            .sub(&f1.values().scale((n - p) as f64));
        Ok(norm(&ginv, &d) / sc)
    })?);
    checks.push(evaluate("laplace_omega1", tol, sample, |x| {
        let (lg, _, ginv, f1, _, sc) = ev(x)?;
        let lam = ((p + 1) * (n - p)) as f64;
        let d = hodge_laplacian(&lg, &f1)?
            .values()
            .sub(&f1.values().scale(lam));
        Ok(norm(&ginv, &d) / sc)
    })?);
    Ok(ConeExtraction {
        split,
        homogeneity_defect: dev,
        checks,
    })
}

/// `|∇̂ω̂|`; for a lift this vanishes iff the base form is special Killing with
/// constant `−(p+1)`.
pub fn cone_parallel_residual(
    cone: &ConeManifold,
    omega: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<ResidualReport> {
    crate::twistor::parallel_residual(&cone.manifold, omega, sample, tol)
}

/// `|∇̂_{∂_r} ω̂| / |ω̂|`.
pub fn radial_parallel_residual(
    cone: &ConeManifold,
    omega: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<ResidualReport> {
    let n = cone.base.dim;
    evaluate(
        format!("radial_parallel:{}", omega.label),
        tol,
        sample,
        |x| {
            let lg = LocalGeom::new(&cone.manifold, x, 1)?;
            let f = omega.at(x, 1)?;
            let nab = cov_deriv(&lg, &f)?;
            let ginv = lg.ginv_values();
            Ok(norm(&ginv, &nab[n].values()) / scale(&ginv, &f.values()))
        },
    )
}

/// `ψ ∧ (dψ)^k`.
pub fn power_construction(m: &ChartManifold, psi: &FormField, k: usize) -> Result<FormField> {
    let p = psi.p;
    if p.is_multiple_of(2) {
        return Err(Error::Degree(format!(
            "power construction needs odd degree, got {p}"
        )));
    }
    let pk = p + k * (p + 1);
    if pk > m.dim {
        return Err(Error::Degree(format!(
            "ψ∧(dψ)^{k} has degree {pk} > {}",
            m.dim
        )));
    }
    if k == 0 {
        return Ok(psi.clone());
    }
    let (f, df) = (psi.clone(), psi.exterior_d());
    Ok(FormField::new(
        m.dim,
        pk,
        format!("{}^(d{})^{k}", psi.label, psi.label),
        Arc::new(move |u: &[Jet]| wedge(&f.eval(u)?, &wedge_power(&df.eval(u)?, k)?)),
    ))
}

/// Degree and expected special Killing constant `−(p_k + 1)` of `ψ∧(dψ)^k`.
pub fn power_degree(p: usize, k: usize) -> (usize, f64) {
    let pk = p + k * (p + 1);
    (pk, -((pk + 1) as f64))
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerReport {
    pub degree: usize,
    pub constant: f64,
    pub special: ResidualReport,
    /// `lift(ψ_k) = (p+1)^k/(k+1) · lift(ψ)^{k+1}` on the cone
    pub lift_identity: ResidualReport,
}

pub fn power_check(
    cone: &ConeManifold,
    psi: &FormField,
    k: usize,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<PowerReport> {
    let m = &cone.base;
    let psi_k = power_construction(m, psi, k)?;
    let (degree, constant) = power_degree(psi.p, k);
    let special = special_killing_residual(
        m,
        &psi_k,
        constant,
        &Sample::random(m, count, seed),
        SpecialVariant::FirstOrder,
        tol,
    )?;
    let lhs = cone_lift(cone, &psi_k)?;
    let base = cone_lift(cone, psi)?;
    let factor = ((psi.p + 1) as f64).powi(k as i32) / (k + 1) as f64;
    let lift_identity = evaluate(
        format!("power_lift:{}:{k}", psi.label),
        tol,
        &cone.sample(count, seed),
        |x| {
            let a = lhs.values(x)?;
            let b = wedge_power(&base.values(x)?, k + 1)?.scale(factor);
            let (_, ginv) = cone.manifold.metric_at(x)?;
            Ok(norm(&ginv, &a.sub(&b)) / scale(&ginv, &a))
        },
    )?;
    Ok(PowerReport {
        degree,
        constant,
        special,
        lift_identity,
    })
}

/// Residual of `★_{M̂}ω = r^{n−2p} (★_M ω) ∧ dr` for a horizontal cone form at `x`.
pub fn cone_hodge_relation(cone: &ConeManifold, omega: &FormField, x: &[f64]) -> Result<f64> {
    let n = cone.base.dim;
    let w = omega.values(x)?;
    let p = w.p;
    let big = w.max_abs();
    let mut base_form = Form::zero(n, p, &0.0);
    for (k, idx) in w.indices().iter().enumerate() {
        if idx.contains(&n) {
            if w.c[k].abs() > 1e-14 * big.max(1.0) {
                return Err(Error::Invalid(format!(
                    "form `{}` has a dr component",
                    omega.label
                )));
            }
        } else {
            base_form.add_at(idx, &w.c[k]);
        }
    }
    let star = |m: &ChartManifold, y: &[f64], a: &Form<f64>| -> Result<Form<f64>> {
        let lg = LocalGeom::new(m, y, 0)?;
        let (g, ginv) = (lg.g_values(), lg.ginv_values());
        Ok(hodge_star(
            &g,
            &ginv,
            &lg.sqrt_det.value(),
            lg.orientation,
            a,
        ))
    };
    let lhs = star(&cone.manifold, x, &w)?;
    let sb = star(&cone.base, &x[..n], &base_form)?.to_jets(1, 0);
    let r = x[n];
    let sign = if (n - p).is_multiple_of(2) { 1.0 } else { -1.0 };
    // (★_M ω) ∧ dr = (−1)^{n−p} dr ∧ ★_M ω
    let rhs = dr_wedge(&sb, &Jet::constant(1, 0, 0.0))
        .values()
        .scale(sign * r.powi(n as i32 - 2 * p as i32));
    Ok(sup_diff(&lhs, &rhs) / lhs.max_abs().max(1e-300))
}

/// Checks on the nearly Kähler 2-form `ω` of a 6-manifold with scalar curvature `s`:
/// `Δω = (2s/5)ω`, `d★dω = −(2s/5)★ω`, and `★dω` special Killing with `c = −2s/15`.
#[derive(Clone, Debug, Serialize)]
pub struct NkStarReport {
    pub scalar_curvature: f64,
    pub laplace_eigenvalue: f64,
    pub laplace_residual: f64,
    pub d_star_residual: f64,
    pub expected_constant: f64,
    pub fit: SpecialFit,
    pub special: ResidualReport,
}

pub fn nk_star_domega_check(
    m: &ChartManifold,
    omega: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<NkStarReport> {
    if m.dim != 6 || omega.p != 2 {
        return Err(Error::Degree(
            "nearly Kähler check needs a 2-form in dimension 6".into(),
        ));
    }
    let x0 = sample.points.first().ok_or(Error::EmptySample)?;
    let s = crate::geometry::metric_frame(m, x0, 2)?.scalar;
    let lam_expected = 2.0 * s / 5.0;
    let mut lam_worst = lam_expected;
    let mut lam_res: f64 = 0.0;
    for x in &sample.points {
        let (lam, res) = crate::twistor::identities::laplace_eigenvalue(m, omega, x)?;
        if (lam - lam_expected).abs() >= (lam_worst - lam_expected).abs() {
            lam_worst = lam;
        }
        lam_res = lam_res.max(res);
    }
    let star = |f: &FormField| crate::catalog::star_field(m.metric_fn(), m.orientation, f);
    let sdw = star(&omega.exterior_d());
    let lhs = sdw.exterior_d();
    let star_w = star(omega);
    let mut d_star: f64 = 0.0;
    for x in &sample.points {
        let (a, b) = (lhs.values(x)?, star_w.values(x)?);
        let (_, ginv) = m.metric_at(x)?;
        d_star = d_star.max(norm(&ginv, &a.add(&b.scale(lam_expected))) / scale(&ginv, &b));
    }
    let expected_constant = -2.0 * s / 15.0;
    Ok(NkStarReport {
        scalar_curvature: s,
        laplace_eigenvalue: lam_worst,
        laplace_residual: lam_res,
        d_star_residual: d_star,
        expected_constant,
        fit: fit_special_constant(m, &sdw, sample)?,
        special: special_killing_residual(
            m,
            &sdw,
            expected_constant,
            sample,
            SpecialVariant::FirstOrder,
            tol,
        )?,
    })
}
