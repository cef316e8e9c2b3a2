//! Pointwise identities around the twistor operator: the norm estimate, both
//! Weitzenböck formulas, the integrability condition, the symmetrized
//! characterization, Killing tensors and the curvature condition.

use serde::Serialize;

use super::checks::{double_valued_norm, scale};
use super::{check_degree, project_p1, twistor_from_nabla};
use crate::error::{Error, Result};
use crate::forms::{
    codiff, cov_deriv, cov_deriv_valued, curv_action, curvature_operator, ext_d, flat,
    hodge_laplacian, inner, interior_coord, laplacian_parts, norm, q_r, r_minus, r_plus,
    ricci_derivation, rough_laplacian, valued_norm, valued_norm_sq, wedge, Form, FormField,
    FormValued,
};
use crate::geometry::{geodesic_integrate, ChartManifold, CurveStatus, LocalGeom};
use crate::jets::Jet;

fn vals(s: &[Form<Jet>]) -> FormValued<f64> {
    s.iter().map(Form::values).collect()
}

fn fnorm(ginv: &[f64], a: &Form<Jet>) -> f64 {
    if a.c.is_empty() {
        0.0
    } else {
        norm(ginv, &a.values())
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

fn jets_of(proto: &Jet, v: &[f64]) -> Vec<Jet> {
    v.iter().map(|&x| proto.constant_like(x)).collect()
}

/// `|∇ψ|²`, the bound `|dψ|²/(p+1) + |d*ψ|²/(n−p+1)`, their gap and `|Tψ|²`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormGap {
    pub nabla_sq: f64,
    pub bound: f64,
    pub gap: f64,
    pub twistor_sq: f64,
}

pub fn norm_estimate_gap(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<NormGap> {
    let n = m.dim;
    check_degree(n, psi.p)?;
    let p = psi.p;
    let lg = LocalGeom::new(m, x, 1)?;
    let f = psi.at(x, 1)?;
    let nabla = cov_deriv(&lg, &f)?;
    let ginv = lg.ginv_values();
    let d = ext_d(&f)?;
    let ds = codiff(&lg, &f)?;
    let t = twistor_from_nabla(&lg, &nabla)?;
    let nabla_sq = valued_norm_sq(&ginv, &vals(&nabla));
    let bound =
        fnorm(&ginv, &d).powi(2) / (p + 1) as f64 + fnorm(&ginv, &ds).powi(2) / (n - p + 1) as f64;
    Ok(NormGap {
        nabla_sq,
        bound,
        gap: nabla_sq - bound,
        twistor_sq: valued_norm_sq(&ginv, &vals(&t)),
    })
}

/// Residual of `∇_Xψ = X⌟dψ/(p+1) − X*∧d*ψ/(n−p+1) + pr_{Λ^{p,1}}(∇ψ)(X)` with `dψ`
/// taken from partial derivatives and the last term from the explicit projection.
pub fn reconstruction_residual(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<f64> {
    let n = m.dim;
    check_degree(n, psi.p)?;
    let p = psi.p;
    let lg = LocalGeom::new(m, x, 1)?;
    let f = psi.at(x, 1)?;
    let nabla = cov_deriv(&lg, &f)?;
    let lg0 = lg.truncate(0);
    let pr = project_p1(&lg0.g, &lg0.ginv, &nabla)?;
    let d = ext_d(&f)?;
    let ds = codiff(&lg, &f)?;
    let proto = &lg0.g[0];
    let mut defect = Vec::with_capacity(n);
    for i in 0..n {
        let mut r = nabla[i].clone();
        r.axpy(-1.0 / (p + 1) as f64, &interior_coord(i, &d)?);
        let xi = flat(&lg0.g, &jets_of(proto, &unit(n, i)));
        r.axpy(1.0 / (n - p + 1) as f64, &wedge(&xi, &ds)?);
        r.axpy(-1.0, &pr[i]);
        defect.push(r.values());
    }
    let ginv = lg0.ginv_values();
    Ok(valued_norm(&ginv, &defect) / scale(&ginv, &f.values()))
}

/// `T*Tψ = −Σ g^{ac} (∇_c Tψ)(∂_a)` together with the pieces shared by the Weitzenböck checks.
struct SecondOrderPieces {
    ginv: Vec<f64>,
    psi: Form<f64>,
    rough: Form<f64>,
    qr: Form<f64>,
    dstar_d: Form<f64>,
    d_dstar: Form<f64>,
    tstar_t: Form<f64>,
}

fn second_order_pieces(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<SecondOrderPieces> {
    let n = m.dim;
    check_degree(n, psi.p)?;
    let lg = LocalGeom::new(m, x, 2)?;
    let f = psi.at(x, 2)?;
    let nabla = cov_deriv(&lg, &f)?;
    let t = twistor_from_nabla(&lg, &nabla)?;
    let dt = cov_deriv_valued(&lg, &t)?;
    let lg0 = lg.truncate(0);
    let mut tt = dt[0][0].zero_like();
    for c in 0..n {
        for a in 0..n {
            let w = &lg0.ginv[a * n + c];
            for (o, v) in tt.c.iter_mut().zip(&dt[c][a].c) {
                o.fma(-1.0, w, v);
            }
        }
    }
    let (dd, ddst) = laplacian_parts(&lg, &f)?;
    Ok(SecondOrderPieces {
        ginv: lg0.ginv_values(),
        psi: f.values(),
        rough: rough_laplacian(&lg, &f)?.values(),
        qr: q_r(&lg0, &f.truncate(0))?.values(),
        dstar_d: dd.values(),
        d_dstar: ddst.values(),
        tstar_t: tt.values(),
    })
}

/// Residuals of both Weitzenböck formulas and of their sum `Δ = ∇*∇ + q(R)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeitzenbockResiduals {
    pub eq_rough: f64,
    pub eq_curvature: f64,
    pub classical: f64,
    pub tstar_t_norm: f64,
}

pub fn weitzenbock_residuals(
    m: &ChartManifold,
    psi: &FormField,
    x: &[f64],
) -> Result<WeitzenbockResiduals> {
    let s = second_order_pieces(m, psi, x)?;
    let (n, p) = (m.dim, psi.p);
    let (a, b) = (1.0 / (p + 1) as f64, 1.0 / (n - p + 1) as f64);
    let sc = scale(&s.ginv, &s.psi)
        .max(norm(&s.ginv, &s.rough))
        .max(norm(&s.ginv, &s.qr));
    let mut e1 = s.rough.clone();
    e1.axpy(-a, &s.dstar_d);
    e1.axpy(-b, &s.d_dstar);
    e1.axpy(-1.0, &s.tstar_t);
    let mut e2 = s.qr.clone();
    e2.axpy(-(p as f64) * a, &s.dstar_d);
    e2.axpy(-((n - p) as f64) * b, &s.d_dstar);
    e2.axpy(1.0, &s.tstar_t);
    let mut cl = s.dstar_d.add(&s.d_dstar);
    cl.axpy(-1.0, &s.rough);
    cl.axpy(-1.0, &s.qr);
    Ok(WeitzenbockResiduals {
        eq_rough: norm(&s.ginv, &e1) / sc,
        eq_curvature: norm(&s.ginv, &e2) / sc,
        classical: norm(&s.ginv, &cl) / sc,
        tstar_t_norm: norm(&s.ginv, &s.tstar_t) / sc,
    })
}

/// Residual of `q(R)ψ = p/(p+1) d*dψ + (n−p)/(n−p+1) dd*ψ`.
pub fn integrability_residual(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<f64> {
    let s = second_order_pieces(m, psi, x)?;
    let (n, p) = (m.dim, psi.p);
    let mut e = s.qr.clone();
    e.axpy(-(p as f64) / (p + 1) as f64, &s.dstar_d);
    e.axpy(-((n - p) as f64) / (n - p + 1) as f64, &s.d_dstar);
    let sc = scale(&s.ginv, &s.psi).max(norm(&s.ginv, &s.qr));
    Ok(norm(&s.ginv, &e) / sc)
}

/// Residual of `Δψ = (p+1)/p q(R)ψ` for coclosed Killing forms.
pub fn killing_eigen_residual(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<f64> {
    let lg = LocalGeom::new(m, x, 2)?;
    let f = psi.at(x, 2)?;
    let p = psi.p;
    if p == 0 {
        return Err(Error::DegenerateDegree {
            p,
            n: m.dim,
            what: "(p+1)/p is singular",
        });
    }
    let lap = hodge_laplacian(&lg, &f)?.values();
    let lg0 = lg.truncate(0);
    let q = q_r(&lg0, &f.truncate(0))?.values();
    let ginv = lg0.ginv_values();
    let mut e = lap.clone();
    e.axpy(-((p + 1) as f64) / p as f64, &q);
    Ok(norm(&ginv, &e) / scale(&ginv, &f.values()).max(norm(&ginv, &lap)))
}

/// `Δψ / ψ` by least squares, with the residual of `Δψ − λψ`.
pub fn laplace_eigenvalue(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<(f64, f64)> {
    let lg = LocalGeom::new(m, x, 2)?;
    let f = psi.at(x, 2)?;
    let lap = hodge_laplacian(&lg, &f)?.values();
    let ginv = lg.truncate(0).ginv_values();
    let f0 = f.values();
    let nn = inner(&ginv, &f0, &f0);
    if nn < 1e-20 {
        return Err(Error::Singular { value: nn });
    }
    let lambda = inner(&ginv, &lap, &f0) / nn;
    let mut e = lap;
    e.axpy(-lambda, &f0);
    Ok((lambda, norm(&ginv, &e) / nn.sqrt()))
}

/// Residual of the symmetrized characterization with `θ = −d*ψ/(n−p+1)`:
/// `∂_a⌟∇_bψ + ∂_b⌟∇_aψ = ∂_a⌟(∂_b^♭∧θ) + ∂_b⌟(∂_a^♭∧θ)`.
pub fn symmetrized_characterization(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<f64> {
    let n = m.dim;
    check_degree(n, psi.p)?;
    let lg = LocalGeom::new(m, x, 1)?;
    let f = psi.at(x, 1)?;
    let nabla = cov_deriv(&lg, &f)?;
    let lg0 = lg.truncate(0);
    let theta = codiff(&lg, &f)?.scale(-1.0 / (n - psi.p + 1) as f64);
    let proto = &lg0.g[0];
    let lowered: Vec<Form<Jet>> = (0..n)
        .map(|i| flat(&lg0.g, &jets_of(proto, &unit(n, i))))
        .collect();
    let mut d = Vec::with_capacity(n);
    for a in 0..n {
        let mut row = Vec::with_capacity(n);
        for b in 0..n {
            let mut lhs = interior_coord(a, &nabla[b])?.add(&interior_coord(b, &nabla[a])?);
            lhs.axpy(-1.0, &interior_coord(a, &wedge(&lowered[b], &theta)?)?);
            lhs.axpy(-1.0, &interior_coord(b, &wedge(&lowered[a], &theta)?)?);
            row.push(lhs.values());
        }
        d.push(row);
    }
    let ginv = lg0.ginv_values();
    Ok(double_valued_norm(&ginv, &d) / scale(&ginv, &f.values()))
}

/// `K_ψ(∂_a, ∂_b) = ⟨∂_a⌟ψ, ∂_b⌟ψ⟩` as jets.
fn killing_tensor_jets(lg: &LocalGeom, f: &Form<Jet>) -> Result<Vec<Jet>> {
    let n = lg.n;
    let ints: Vec<Form<Jet>> = (0..n)
        .map(|a| interior_coord(a, f))
        .collect::<Result<_>>()?;
    let mut k = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            k.push(inner(&lg.ginv, &ints[a], &ints[b]));
        }
    }
    Ok(k)
}

pub fn killing_tensor(
    m: &ChartManifold,
    psi: &FormField,
    xv: &[f64],
    yv: &[f64],
    x: &[f64],
) -> Result<f64> {
    let lg = LocalGeom::new(m, x, 0)?;
    let f = psi.at(x, 0)?;
    let k = killing_tensor_jets(&lg, &f)?;
    let n = m.dim;
    let mut s = 0.0;
    for a in 0..n {
        for b in 0..n {
            s += xv[a] * yv[b] * k[a * n + b].value();
        }
    }
    Ok(s)
}

/// `|tr K_ψ − p|ψ|²| / |ψ|²`.
pub fn killing_trace_residual(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<f64> {
    let lg = LocalGeom::new(m, x, 0)?;
    let f = psi.at(x, 0)?;
    let k = killing_tensor_jets(&lg, &f)?;
    let n = m.dim;
    let tr: f64 = (0..n * n).map(|i| lg.ginv[i].value() * k[i].value()).sum();
    let ginv = lg.ginv_values();
    let nsq = inner(&ginv, &f.values(), &f.values());
    Ok((tr - psi.p as f64 * nsq).abs() / nsq.max(super::checks::RESIDUAL_FLOOR.powi(2)))
}

/// Norm of the cyclic sum `(∇_X K)(Y,Z) + (∇_Y K)(Z,X) + (∇_Z K)(X,Y)` over all
/// coordinate triples, relative to `|ψ|²`.
pub fn cyclic_residual(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<f64> {
    let n = m.dim;
    let lg = LocalGeom::new(m, x, 1)?;
    let f = psi.at(x, 1)?;
    let k = killing_tensor_jets(&lg, &f)?;
    let mut nk = vec![0.0; n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                let mut v = k[a * n + b].partial(c)?.value();
                for mm in 0..n {
                    v -= lg.gamma(mm, c, a).value() * k[mm * n + b].value();
                    v -= lg.gamma(mm, c, b).value() * k[a * n + mm].value();
                }
                nk[(c * n + a) * n + b] = v;
            }
        }
    }
    let mut cyc = vec![0.0; n * n * n];
    for c in 0..n {
        for a in 0..n {
            for b in 0..n {
                cyc[(c * n + a) * n + b] =
                    nk[(c * n + a) * n + b] + nk[(a * n + b) * n + c] + nk[(b * n + c) * n + a];
            }
        }
    }
    let ginv = lg.ginv_values();
    let mut acc = 0.0;
    for i in 0..n * n * n {
        let (c, a, b) = (i / (n * n), (i / n) % n, i % n);
        for j in 0..n * n * n {
            let (c2, a2, b2) = (j / (n * n), (j / n) % n, j % n);
            acc += ginv[c * n + c2] * ginv[a * n + a2] * ginv[b * n + b2] * cyc[i] * cyc[j];
        }
    }
    let nsq = inner(&ginv, &f.values(), &f.values());
    Ok(acc.max(0.0).sqrt() / nsq.max(super::checks::RESIDUAL_FLOOR.powi(2)))
}

/// Relative drifts of the first integrals `K_ψ(γ̇, γ̇)` and `|γ̇⌟ψ|` along an RK4 geodesic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeodesicDrift {
    pub killing_tensor: f64,
    pub contraction_norm: f64,
    pub steps: usize,
}

pub fn killing_tensor_drift(
    m: &ChartManifold,
    psi: &FormField,
    x0: &[f64],
    v0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<GeodesicDrift> {
    let traj = geodesic_integrate(m, x0, v0, t_end, step)?;
    if let CurveStatus::ChartExit { t } = traj.status {
        return Err(Error::Invalid(format!(
            "geodesic left the chart at t = {t}"
        )));
    }
    let k0 = killing_tensor(m, psi, v0, v0, x0)?;
    let (mut dk, mut dc): (f64, f64) = (0.0, 0.0);
    for s in &traj.states {
        let k = killing_tensor(m, psi, &s.v, &s.v, &s.x)?;
        dk = dk.max((k - k0).abs());
        dc = dc.max((k.max(0.0).sqrt() - k0.max(0.0).sqrt()).abs());
    }
    Ok(GeodesicDrift {
        killing_tensor: dk / k0.abs().max(super::checks::RESIDUAL_FLOOR),
        contraction_norm: dc / k0.max(0.0).sqrt().max(super::checks::RESIDUAL_FLOOR),
        steps: traj.states.len(),
    })
}

/// Residual of the curvature condition satisfied by conformal Killing forms:
/// `R(X,Y)ψ = (Y∧X⌟ − X∧Y⌟) q(R)ψ / (p(n−p)) − (X⌟R⁺(Y) − Y⌟R⁺(X))ψ / p
///           − (X∧R⁻(Y) − Y∧R⁻(X))ψ / (n−p)`, maximized over coordinate pairs.
pub fn curvature_condition(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<f64> {
    let n = m.dim;
    let p = psi.p;
    if p == 0 || p >= n {
        return Err(Error::DegenerateDegree {
            p,
            n,
            what: "coefficients 1/p(n−p) are singular",
        });
    }
    let lg = LocalGeom::new(m, x, 2)?.truncate(2);
    let lg0 = lg.truncate(0);
    let f = psi.at(x, 0)?;
    let ginv = lg0.ginv_values();
    let q = q_r(&lg0, &f)?;
    let proto = &lg0.g[0];
    let rp: Vec<Form<Jet>> = (0..n)
        .map(|i| r_plus(&lg0, &unit(n, i), &f))
        .collect::<Result<_>>()?;
    let rm: Vec<Form<Jet>> = (0..n)
        .map(|i| r_minus(&lg0, &unit(n, i), &f))
        .collect::<Result<_>>()?;
    let low: Vec<Form<Jet>> = (0..n)
        .map(|i| flat(&lg0.g, &jets_of(proto, &unit(n, i))))
        .collect();
    let c0 = 1.0 / (p * (n - p)) as f64;
    let (c1, c2) = (1.0 / p as f64, 1.0 / (n - p) as f64);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let mut e = curv_action(&lg0, i, j, &f);
            // (Y∧X⌟ − X∧Y⌟) q with X = ∂_i, Y = ∂_j
            e.axpy(-c0, &wedge(&low[j], &interior_coord(i, &q)?)?);
            e.axpy(c0, &wedge(&low[i], &interior_coord(j, &q)?)?);
            e.axpy(c1, &interior_coord(i, &rp[j])?);
            e.axpy(-c1, &interior_coord(j, &rp[i])?);
            e.axpy(c2, &wedge(&low[i], &rm[j])?);
            e.axpy(-c2, &wedge(&low[j], &rm[i])?);
            // normalize by |∂_i∧∂_j|
            let gi = lg0.g[i * n + i].value();
            let gj = lg0.g[j * n + j].value();
            let gij = lg0.g[i * n + j].value();
            let area = (gi * gj - gij * gij).max(1e-300).sqrt();
            worst = worst.max(norm(&ginv, &e.values()) / area);
        }
    }
    Ok(worst / scale(&ginv, &f.values()))
}

/// Residual of `q(R)ω = Ric(ω) − 2𝓡(ω)` on a 2-form, and of `q(R)ξ = Ric(ξ)` on a 1-form.
pub fn low_degree_q_residual(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<f64> {
    let lg = LocalGeom::new(m, x, 2)?.truncate(0);
    let f = psi.at(x, 0)?;
    let q = q_r(&lg, &f)?;
    let mut rhs = ricci_derivation(&lg, &f);
    match f.p {
        1 => {}
        2 => rhs.axpy(-2.0, &curvature_operator(&lg, &f)?),
        p => {
            return Err(Error::Degree(format!(
                "explicit q(R) formula needs degree 1 or 2, got {p}"
            )))
        }
    }
    let ginv = lg.ginv_values();
    Ok(norm(&ginv, &q.sub(&rhs).values()) / scale(&ginv, &f.values()))
}
