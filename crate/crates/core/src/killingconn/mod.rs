//! The bundle `E^p = Λ^p ⊕ Λ^{p+1} ⊕ Λ^{p−1} ⊕ Λ^p` and the Killing connection
//! `∇̃_X = ∇_X − A(X)`, whose parallel sections are `(ψ, dψ, d*ψ, dd*ψ)` for the
//! conformal Killing forms `ψ`.
//!
//! Rows of `A(X)`:
//! * `ψ`: `∇_Xψ = (p+1)⁻¹ X⌟dψ − (n−p+1)⁻¹ X*∧d*ψ`;
//! * `dψ`: `∇_X dψ = (p+1)/p R⁺(X)ψ + (p+1)/(p(n−p+1)) X*∧dd*ψ`;
//! * `d*ψ`: `∇_X d*ψ = −(n−p+1)/(n−p) R⁻(X)ψ + p⁻¹ X⌟dd*ψ − (n−p+1)/(p(n−p)) X⌟q(R)ψ`;
//! * `φ = dd*ψ`: `∇_Xφ = −(n−p+1)⁻¹ X*∧d*φ + (Tφ)(X)` with
//!   `d*φ = (n−p+1)/(n−p) d*(q(R)ψ)`, and `Tφ` from one of two routes
//!   ([`Route`]). Both need derivatives of curvature terms in `ψ`, which only
//!   involve `ψ` and `∇ψ` at the point; they are evaluated on a first-order jet
//!   `Ψ` with value `ψ` and `∇Ψ` given by the `ψ`-row.

pub mod dimension;
pub mod transport;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{
    codiff, contract_valued, cov_deriv, cov_deriv_valued, derivation, ext_d, flat, interior,
    interior_coord, q_r, q_template, r_minus, r_minus_template, r_plus, valued_norm, wedge,
    wedge_coord, Form, FormField, FormValued, NablaRiemX,
};
use crate::geometry::{ChartManifold, LocalGeom};
use crate::jets::Jet;
use crate::multiindex::binomial;
use crate::twistor::checks::scale;
use crate::twistor::{project_p1, twistor_jets};

pub use dimension::{
    dimension_count, periodic_germ_rank, sphere_candidates, DimensionReport, GermReport, Verdict,
    GERM_TOLERANCE, RANK_TOLERANCE,
};
pub use transport::{transport_e, transport_matrix, Curve, TransportResult, TransportStatus};

/// A point of the fiber of `E^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct ESection {
    pub psi: Form<f64>,
    pub dpsi: Form<f64>,
    pub dstar_psi: Form<f64>,
    pub ddstar_psi: Form<f64>,
}

/// Rank of `E^p`, which equals `C(n+2, p+1)`.
pub fn e_rank(n: usize, p: usize) -> usize {
    2 * binomial(n, p) + binomial(n, p + 1) + binomial(n, p - 1)
}

fn slot_dims(n: usize, p: usize) -> [usize; 4] {
    [
        binomial(n, p),
        binomial(n, p + 1),
        binomial(n, p - 1),
        binomial(n, p),
    ]
}

impl ESection {
    pub fn zero(n: usize, p: usize) -> ESection {
        let z = |q| Form::zero(n, q, &0.0);
        ESection {
            psi: z(p),
            dpsi: z(p + 1),
            dstar_psi: z(p - 1),
            ddstar_psi: z(p),
        }
    }

    pub fn n(&self) -> usize {
        self.psi.n
    }

    pub fn p(&self) -> usize {
        self.psi.p
    }

    /// `(ψ, dψ, d*ψ, dd*ψ)` of a field at `x`.
    pub fn from_field(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<ESection> {
        check_degree(m.dim, psi.p)?;
        let lg = LocalGeom::new(m, x, 2)?;
        let f = psi.at(x, 2)?;
        let ds = codiff(&lg, &f)?;
        Ok(ESection {
            psi: f.values(),
            dpsi: ext_d(&f)?.values(),
            dstar_psi: ds.values(),
            ddstar_psi: ext_d(&ds)?.values(),
        })
    }

    pub fn to_vec(&self) -> Vec<f64> {
        [&self.psi, &self.dpsi, &self.dstar_psi, &self.ddstar_psi]
            .iter()
            .flat_map(|f| f.c.iter().copied())
            .collect()
    }

    pub fn from_vec(n: usize, p: usize, v: &[f64]) -> Result<ESection> {
        let d = slot_dims(n, p);
        if v.len() != d.iter().sum::<usize>() {
            return Err(Error::Invalid(format!(
                "E-section of rank {} from {} values",
                e_rank(n, p),
                v.len()
            )));
        }
        let mut at = 0;
        let mut take = |q: usize, len: usize| {
            let f = Form::from_coeffs(n, q, v[at..at + len].to_vec());
            at += len;
            f
        };
        Ok(ESection {
            psi: take(p, d[0])?,
            dpsi: take(p + 1, d[1])?,
            dstar_psi: take(p - 1, d[2])?,
            ddstar_psi: take(p, d[3])?,
        })
    }

    /// Unit vector number `k` of the concatenated coordinates.
    pub fn basis(n: usize, p: usize, k: usize) -> Result<ESection> {
        let mut v = vec![0.0; e_rank(n, p)];
        *v.get_mut(k)
            .ok_or_else(|| Error::Invalid(format!("basis index {k} out of range")))? = 1.0;
        ESection::from_vec(n, p, &v)
    }

    /// `(Σ |slot|²_g)^{1/2}` in the metric `ginv`.
    pub fn norm(&self, ginv: &[f64]) -> f64 {
        let sq = |f: &Form<f64>| {
            let v = crate::forms::norm(ginv, f);
            v * v
        };
        (sq(&self.psi) + sq(&self.dpsi) + sq(&self.dstar_psi) + sq(&self.ddstar_psi)).sqrt()
    }

    fn sub(&self, o: &ESection) -> ESection {
        ESection {
            psi: self.psi.sub(&o.psi),
            dpsi: self.dpsi.sub(&o.dpsi),
            dstar_psi: self.dstar_psi.sub(&o.dstar_psi),
            ddstar_psi: self.ddstar_psi.sub(&o.ddstar_psi),
        }
    }
}

pub(crate) fn check_degree(n: usize, p: usize) -> Result<()> {
    if p == 0 || p >= n {
        return Err(Error::DegenerateDegree {
            p,
            n,
            what: "Killing connection needs 1 ≤ p ≤ n−1",
        });
    }
    Ok(())
}

/// How `T(dd*ψ)` is obtained in the last row of `A(X)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// The `T(d·)` identity applied to `d*ψ`, with `T(d*ψ)` from the `T(d*·)`
    /// identity; needs `p ≥ 2`.
    WedgeOfCodifferential,
    /// The `T(d*·)` identity applied to `dψ`, with `T(dψ)` from the `T(d·)` identity and
    /// `d*dψ = (p+1)/p q(R)ψ − (p+1)(n−p)/(p(n−p+1)) dd*ψ`; needs `p ≤ n−2`.
    CodifferentialOfWedge,
}

impl Route {
    pub fn supported(self, n: usize, p: usize) -> bool {
        match self {
            Route::WedgeOfCodifferential => p >= 2 && p < n,
            Route::CodifferentialOfWedge => p >= 1 && p + 2 <= n,
        }
    }

    /// The default route for `(n, p)`.
    pub fn for_degree(n: usize, p: usize) -> Result<Route> {
        check_degree(n, p)?;
        [Route::WedgeOfCodifferential, Route::CodifferentialOfWedge]
            .into_iter()
            .find(|r| r.supported(n, p))
            .ok_or(Error::DegenerateDegree {
                p,
                n,
                what: "no route for the dd*ψ row (n = 2, p = 1)",
            })
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect()
}

fn unit_jets(proto: &Jet, n: usize, i: usize) -> Vec<Jet> {
    (0..n)
        .map(|k| proto.constant_like(if k == i { 1.0 } else { 0.0 }))
        .collect()
}

/// `∂_a^♭ ∧ α`.
fn lower_wedge(g: &[Jet], a: usize, f: &Form<Jet>) -> Result<Form<Jet>> {
    let n = f.n;
    wedge(&flat(g, &unit_jets(&f.c[0], n, a)), f)
}

/// `pr_{Λ^{q,1}}` with the zero bundle at `q ∈ {0, n}`.
fn project_any(lg: &LocalGeom, s: &[Form<Jet>]) -> Result<FormValued<Jet>> {
    let (n, q) = (lg.n, s[0].p);
    if q == 0 || q >= n {
        return Ok(s.iter().map(Form::zero_like).collect());
    }
    project_p1(&lg.g, &lg.ginv, s)
}

/// Sign of the `θ` operator: `+` pairs by wedge, `−` by contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theta {
    Plus,
    Minus,
}

/// `θ⁺S = pr_{Λ^{q+1,1}}(Σ_j dx^j ∧ ∇_j S)` and `θ⁻S = −pr_{Λ^{q−1,1}}(Σ g^{jk} ∂_j ⌟ ∇_k S)`.
///
/// The sign of `θ⁻` follows `d* = −Σ e_i ⌟ ∇_{e_i}`, so that `θ^±` restricted to
/// `T(ψ)` are the twistor parts of `d` and `d*`.
pub fn theta(lg: &LocalGeom, s: &[Form<Jet>], sign: Theta) -> Result<FormValued<Jet>> {
    let n = lg.n;
    let nab = cov_deriv_valued(lg, s)?;
    let mut w = Vec::with_capacity(n);
    for a in 0..n {
        let mut acc: Option<Form<Jet>> = None;
        let mut add = |t: Form<Jet>| match acc.as_mut() {
            None => acc = Some(t),
            Some(o) => o.axpy(1.0, &t),
        };
        match sign {
            Theta::Plus => {
                for (j, row) in nab.iter().enumerate() {
                    add(wedge_coord(j, &row[a])?);
                }
            }
            Theta::Minus => {
                if s[0].p == 0 {
                    return Err(Error::Degree("θ⁻ of a function-valued field".into()));
                }
                for (k, row) in nab.iter().enumerate() {
                    for j in 0..n {
                        let gjk = &lg.ginv[j * n + k];
                        add(interior_coord(j, &row[a])?.mul_scalar(&-gjk));
                    }
                }
            }
        }
        w.push(acc.ok_or(Error::EmptySample)?);
    }
    project_any(lg, &w)
}

/// `θ^±(Tψ)` at `x` as plain values.
pub fn theta_of_twistor(
    m: &ChartManifold,
    psi: &FormField,
    x: &[f64],
    sign: Theta,
) -> Result<FormValued<f64>> {
    let lg = LocalGeom::new(m, x, 2)?;
    let t = twistor_jets(&lg, &psi.at(x, 2)?)?;
    Ok(theta(&lg, &t, sign)?.iter().map(Form::values).collect())
}

/// `X ↦ R⁺(X)ψ` as a 1-form-valued form.
fn r_plus_valued(lg: &LocalGeom, psi: &Form<Jet>) -> Result<FormValued<Jet>> {
    (0..lg.n).map(|a| r_plus(lg, &unit(lg.n, a), psi)).collect()
}

fn r_minus_valued(lg: &LocalGeom, psi: &Form<Jet>) -> Result<FormValued<Jet>> {
    (0..lg.n)
        .map(|a| r_minus(lg, &unit(lg.n, a), psi))
        .collect()
}

/// `X ↦ X^♭ ∧ α`.
fn wedge_valued(lg: &LocalGeom, f: &Form<Jet>) -> Result<FormValued<Jet>> {
    (0..lg.n).map(|a| lower_wedge(&lg.g, a, f)).collect()
}

/// `X ↦ X ⌟ α`.
fn interior_valued(n: usize, f: &Form<Jet>) -> Result<FormValued<Jet>> {
    (0..n).map(|a| interior_coord(a, f)).collect()
}

fn axpy_valued(out: &mut [Form<Jet>], s: f64, t: &[Form<Jet>]) {
    for (o, v) in out.iter_mut().zip(t) {
        o.axpy(s, v);
    }
}

fn val(s: &[Form<Jet>]) -> FormValued<f64> {
    s.iter().map(Form::values).collect()
}

fn sum_norm(ginv: &[f64], parts: &[&FormValued<f64>]) -> f64 {
    parts
        .iter()
        .map(|p| valued_norm(ginv, p))
        .fold(RESIDUAL_SCALE_FLOOR, f64::max)
}

const RESIDUAL_SCALE_FLOOR: f64 = crate::twistor::RESIDUAL_FLOOR;

/// Residuals of the identities expressing `T(dψ)` and `T(d*ψ)` through `Tψ`,
/// valid for arbitrary forms.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TwistorLemmaResiduals {
    /// `T(dψ) − (p+1)/p θ⁺(Tψ) − (p+1)/p R⁺(·)ψ − (p+1)/(p(n−p)) ·∧q(R)ψ`
    pub twistor1: f64,
    /// `T(d*ψ) − (n−p+1)/(n−p) θ⁻(Tψ) + (n−p+1)/(n−p) R⁻(·)ψ + (n−p+1)/(p(n−p)) ·⌟q(R)ψ`
    pub twistor2: f64,
}

pub fn twistor_weitzenbock_residuals(
    m: &ChartManifold,
    psi: &FormField,
    x: &[f64],
) -> Result<TwistorLemmaResiduals> {
    let n = m.dim;
    let p = psi.p;
    check_degree(n, p)?;
    let lg = LocalGeom::new(m, x, 3)?;
    let f = psi.at(x, 3)?;
    let lg0 = lg.truncate(0);
    let ginv = lg0.ginv_values();
    let (pf, nf) = (p as f64, n as f64);
    let t = twistor_jets(&lg, &f)?;
    let qpsi = q_r(&lg0, &f)?;
    let tdpsi = {
        let d = ext_d(&f)?;
        if p + 1 >= n {
            d.truncate(0).zero_like_valued(n)
        } else {
            twistor_jets(&lg, &d)?
        }
    };
    let th = val(&theta(&lg, &t, Theta::Plus)?);
    let rp = val(&r_plus_valued(&lg0, &f)?);
    let wq = val(&wedge_valued(&lg0, &qpsi)?);
    let lhs = val(&tdpsi);
    let c = (pf + 1.0) / pf;
    let mut d1 = lhs.clone();
    for a in 0..n {
        d1[a].axpy(-c, &th[a]);
        d1[a].axpy(-c, &rp[a]);
        d1[a].axpy(-(pf + 1.0) / (pf * (nf - pf)), &wq[a]);
    }
    let twistor1 = valued_norm(&ginv, &d1) / sum_norm(&ginv, &[&lhs, &th, &rp, &wq]);

    let ds = codiff(&lg, &f)?;
    let lhs = if p == 1 {
        ds.truncate(0)
            .zero_like_valued(n)
            .iter()
            .map(Form::values)
            .collect()
    } else {
        val(&twistor_jets(&lg, &ds)?)
    };
    let th = if p == 1 {
        lhs.clone()
    } else {
        val(&theta(&lg, &t, Theta::Minus)?)
    };
    let rm = val(&r_minus_valued(&lg0, &f)?);
    let iq = val(&interior_valued(n, &qpsi)?);
    let c = (nf - pf + 1.0) / (nf - pf);
    let mut d2 = lhs.clone();
    for a in 0..n {
        d2[a].axpy(-c, &th[a]);
        d2[a].axpy(c, &rm[a]);
        d2[a].axpy((nf - pf + 1.0) / (pf * (nf - pf)), &iq[a]);
    }
    let twistor2 = valued_norm(&ginv, &d2) / sum_norm(&ginv, &[&lhs, &th, &rm, &iq]);
    Ok(TwistorLemmaResiduals { twistor1, twistor2 })
}

trait ZeroValued {
    fn zero_like_valued(&self, n: usize) -> FormValued<Jet>;
}

impl ZeroValued for Form<Jet> {
    /// `n` copies of a zero form on the projected target (`Λ^{q,1} = 0`).
    fn zero_like_valued(&self, n: usize) -> FormValued<Jet> {
        vec![self.zero_like(); n]
    }
}

/// Residuals of both formulas for `∇dψ` and `∇d*ψ` of a conformal Killing form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct NablaDResidual {
    pub d: f64,
    pub dstar: f64,
}

pub fn nabla_d_residual(m: &ChartManifold, psi: &FormField, x: &[f64]) -> Result<NablaDResidual> {
    let n = m.dim;
    let p = psi.p;
    check_degree(n, p)?;
    let lg = LocalGeom::new(m, x, 3)?;
    let f = psi.at(x, 3)?;
    let lg0 = lg.truncate(0);
    let ginv = lg0.ginv_values();
    let (pf, nf) = (p as f64, n as f64);
    let d = ext_d(&f)?;
    let ds = codiff(&lg, &f)?;
    let dds = ext_d(&ds)?.truncate(0);
    let f0 = f.truncate(0);
    let q = q_r(&lg0, &f0)?;
    let nd = val(&cov_deriv(&lg, &d)?);
    let nds = val(&cov_deriv(&lg, &ds)?);
    let mut e1 = Vec::with_capacity(n);
    let mut e2 = Vec::with_capacity(n);
    for a in 0..n {
        let ea = unit(n, a);
        let mut r1 = r_plus(&lg0, &ea, &f0)?.scale((pf + 1.0) / pf);
        r1.axpy(
            (pf + 1.0) / (pf * (nf - pf + 1.0)),
            &lower_wedge(&lg0.g, a, &dds)?,
        );
        e1.push(nd[a].sub(&r1.values()));
        let mut r2 = r_minus(&lg0, &ea, &f0)?.scale(-(nf - pf + 1.0) / (nf - pf));
        r2.axpy(1.0 / pf, &interior_coord(a, &dds)?);
        r2.axpy(-(nf - pf + 1.0) / (pf * (nf - pf)), &interior_coord(a, &q)?);
        e2.push(nds[a].sub(&r2.values()));
    }
    let sc = scale(&ginv, &f0.values());
    Ok(NablaDResidual {
        d: valued_norm(&ginv, &e1) / sc,
        dstar: valued_norm(&ginv, &e2) / sc,
    })
}

/// Residuals of `∇_X(R⁻(Y)ψ) = R⁻(∇_XY)ψ + R⁻(Y)∇_Xψ + (∇_XR)⁻(Y)ψ` and
/// `∇_X(q(R)ψ) = q(∇_XR)ψ + q(R)∇_Xψ`, with `Y` extended by constant chart components.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct CurvatureDerivativeResiduals {
    pub r_minus: f64,
    pub q: f64,
}

pub fn nabla_curvature_terms(
    m: &ChartManifold,
    psi: &FormField,
    xv: &[f64],
    yv: &[f64],
    x: &[f64],
) -> Result<CurvatureDerivativeResiduals> {
    let n = m.dim;
    if xv.len() != n || yv.len() != n {
        return Err(Error::Invalid("direction of the wrong dimension".into()));
    }
    let lg = LocalGeom::new(m, x, 3)?;
    let f = psi.at(x, 3)?;
    let lg0 = lg.truncate(0);
    let ginv = lg0.ginv_values();
    let f0 = f.truncate(0);
    let nr = lg.nabla_riem()?;
    let src = NablaRiemX {
        n,
        x: xv.to_vec(),
        data: &nr,
    };
    let nabla_x = |g: &Form<Jet>| -> Result<Form<f64>> {
        let xj: Vec<Jet> = xv.iter().map(|&v| g.c[0].constant_like(v)).collect();
        Ok(contract_valued(&xj, &cov_deriv(&lg, g)?).values())
    };
    let nxpsi = {
        let xj: Vec<Jet> = xv.iter().map(|&v| f.c[0].constant_like(v)).collect();
        contract_valued(&xj, &cov_deriv(&lg, &f)?).truncate(0)
    };
    let sc = scale(&ginv, &f0.values());
    let r_minus_res = if psi.p == 0 {
        0.0
    } else {
        let lhs = nabla_x(&r_minus(&lg, yv, &f)?)?;
        let mut nxy = vec![0.0; n];
        for (k, o) in nxy.iter_mut().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    *o += xv[i] * yv[j] * lg0.gamma(k, i, j).value();
                }
            }
        }
        let mut rhs = r_minus(&lg0, &nxy, &f0)?;
        rhs.axpy(1.0, &r_minus(&lg0, yv, &nxpsi)?);
        rhs.axpy(1.0, &r_minus_template(&lg0.ginv, &src, yv, &f0)?);
        crate::forms::norm(&ginv, &lhs.sub(&rhs.values())) / sc
    };
    let lhs = nabla_x(&q_r(&lg, &f)?)?;
    let mut rhs = q_template(&lg0.ginv, &src, &f0)?;
    rhs.axpy(1.0, &q_r(&lg0, &nxpsi)?);
    let q_res = crate::forms::norm(&ginv, &lhs.sub(&rhs.values())) / sc;
    Ok(CurvatureDerivativeResiduals {
        r_minus: r_minus_res,
        q: q_res,
    })
}

/// A first-order jet `Ψ` at the base point of `lg` with value `psi` and `∇_jΨ = b[j]`.
fn synthetic_jet(lg: &LocalGeom, psi: &Form<f64>, b: &[Form<f64>]) -> Form<Jet> {
    let n = lg.n;
    let x0 = &lg.x;
    let vars: Vec<Jet> = (0..n)
        .map(|i| &Jet::variable(n, 1, i, x0[i]) + -x0[i])
        .collect();
    let psi0 = psi.to_jets(n, 1);
    let mut out = psi0.clone();
    for (j, v) in vars.iter().enumerate() {
        // ∂_jΨ = ∇_jΨ − Γ_j·ψ
        let gam: Vec<Jet> = lg.gamma_endo(j).iter().map(|g| g.truncate(0)).collect();
        let mut dj = b[j].to_jets(n, 0);
        if psi.p > 0 {
            dj.axpy(-1.0, &derivation(&gam, &psi.to_jets(n, 0)));
        }
        for (o, c) in out.c.iter_mut().zip(&dj.c) {
            o.axpy(c.value(), v);
        }
    }
    out
}

/// `A(X)ê`: the covariant derivative of a parallel section predicted from `ê`.
/// `lg` must carry order ≥ 3.
pub fn killing_derivative(
    lg: &LocalGeom,
    e: &ESection,
    xdir: &[f64],
    route: Route,
) -> Result<ESection> {
    let n = lg.n;
    let p = e.p();
    check_degree(n, p)?;
    if !route.supported(n, p) {
        return Err(Error::DegenerateDegree {
            p,
            n,
            what: "route not available in this degree",
        });
    }
    if lg.order < 3 {
        return Err(Error::OrderTooHigh {
            requested: 3,
            max: lg.order,
        });
    }
    let (pf, nf) = (p as f64, n as f64);
    let lg0 = lg.truncate(0);
    let lg1 = lg.truncate(1);
    let j0 = |f: &Form<f64>| f.to_jets(n, 0);
    let (psi, dpsi, ds, phi) = (j0(&e.psi), j0(&e.dpsi), j0(&e.dstar_psi), j0(&e.ddstar_psi));
    let xj: Vec<Jet> = xdir.iter().map(|&v| Jet::constant(n, 0, v)).collect();
    let xflat = flat(&lg0.g, &xj);
    let q0 = q_r(&lg0, &psi)?;

    // ψ row, for every coordinate direction (it also fixes ∇Ψ)
    let psi_row = |a: &[Jet]| -> Result<Form<Jet>> {
        let mut r = interior(a, &dpsi)?.scale(1.0 / (pf + 1.0));
        r.axpy(-1.0 / (nf - pf + 1.0), &wedge(&flat(&lg0.g, a), &ds)?);
        Ok(r)
    };
    let b: Vec<Form<f64>> = (0..n)
        .map(|j| Ok(psi_row(&unit_jets(&xj[0], n, j))?.values()))
        .collect::<Result<_>>()?;
    let big = synthetic_jet(lg, &e.psi, &b);

    let row0 = psi_row(&xj)?;
    let mut row1 = r_plus(&lg0, xdir, &psi)?.scale((pf + 1.0) / pf);
    row1.axpy((pf + 1.0) / (pf * (nf - pf + 1.0)), &wedge(&xflat, &phi)?);
    let mut row2 = r_minus(&lg0, xdir, &psi)?.scale(-(nf - pf + 1.0) / (nf - pf));
    row2.axpy(1.0 / pf, &interior(&xj, &phi)?);
    row2.axpy(-(nf - pf + 1.0) / (pf * (nf - pf)), &interior(&xj, &q0)?);

    // last row
    let qbig = q_r(&lg1, &big)?;
    let dstar_phi = codiff(&lg1, &qbig)?
        .truncate(0)
        .scale((nf - pf + 1.0) / (nf - pf));
    let t_phi: FormValued<Jet> = match route {
        Route::WedgeOfCodifferential => {
            // S = T(d*ψ) = c₁ R⁻(·)Ψ + c₂ ·⌟q(R)Ψ
            let mut s = r_minus_valued(&lg1, &big)?;
            for f in s.iter_mut() {
                *f = f.scale(-(nf - pf + 1.0) / (nf - pf));
            }
            axpy_valued(
                &mut s,
                -(nf - pf + 1.0) / (pf * (nf - pf)),
                &interior_valued(n, &qbig)?,
            );
            let c = pf / (pf - 1.0);
            let mut t = theta(&lg1, &s, Theta::Plus)?;
            for f in t.iter_mut() {
                *f = f.truncate(0).scale(c);
            }
            axpy_valued(&mut t, c, &r_plus_valued(&lg0, &ds)?);
            let qds = q_r(&lg0, &ds)?;
            axpy_valued(
                &mut t,
                pf / ((pf - 1.0) * (nf - pf + 1.0)),
                &wedge_valued(&lg0, &qds)?,
            );
            t
        }
        Route::CodifferentialOfWedge => {
            // U = T(dψ) = (p+1)/p R⁺(·)Ψ + (p+1)/(p(n−p)) ·∧q(R)Ψ
            let mut u = r_plus_valued(&lg1, &big)?;
            for f in u.iter_mut() {
                *f = f.scale((pf + 1.0) / pf);
            }
            axpy_valued(
                &mut u,
                (pf + 1.0) / (pf * (nf - pf)),
                &wedge_valued(&lg1, &qbig)?,
            );
            let c = (nf - pf) / (nf - pf - 1.0);
            let mut tds: FormValued<Jet> = theta(&lg1, &u, Theta::Minus)?
                .iter()
                .map(|f| f.truncate(0).scale(c))
                .collect();
            axpy_valued(&mut tds, -c, &r_minus_valued(&lg0, &dpsi)?);
            let qd = q_r(&lg0, &dpsi)?;
            axpy_valued(
                &mut tds,
                -(nf - pf) / ((pf + 1.0) * (nf - pf - 1.0)),
                &interior_valued(n, &qd)?,
            );
            let nq: FormValued<Jet> = cov_deriv(&lg1, &qbig)?
                .iter()
                .map(|f| f.truncate(0))
                .collect();
            let tq = project_any(&lg0, &nq)?;
            let k = (pf + 1.0) * (nf - pf) / (pf * (nf - pf + 1.0));
            axpy_valued(&mut tds, -(pf + 1.0) / pf, &tq);
            tds.iter().map(|f| f.scale(-1.0 / k)).collect()
        }
    };
    let mut row3 = contract_valued(&xj, &t_phi);
    row3.axpy(-1.0 / (nf - pf + 1.0), &wedge(&xflat, &dstar_phi)?);
    Ok(ESection {
        psi: row0.values(),
        dpsi: row1.values(),
        dstar_psi: row2.values(),
        ddstar_psi: row3.values(),
    })
}

/// `A(X)` as a matrix on the concatenated coordinates of [`ESection::to_vec`].
#[derive(Clone, Debug)]
pub struct ConnectionMatrix {
    pub n: usize,
    pub p: usize,
    pub route: Route,
    pub matrix: DMatrix<f64>,
}

impl ConnectionMatrix {
    pub fn slot_dims(&self) -> [usize; 4] {
        slot_dims(self.n, self.p)
    }

    /// Block mapping slot `col` into slot `row`.
    pub fn block(&self, row: usize, col: usize) -> DMatrix<f64> {
        let d = self.slot_dims();
        let off = |k: usize| d[..k].iter().sum::<usize>();
        self.matrix
            .view((off(row), off(col)), (d[row], d[col]))
            .into_owned()
    }

    pub fn apply(&self, e: &ESection) -> Result<ESection> {
        let v = &self.matrix * nalgebra::DVector::from_vec(e.to_vec());
        ESection::from_vec(self.n, self.p, v.as_slice())
    }
}

pub fn assemble_a(
    lg: &LocalGeom,
    p: usize,
    xdir: &[f64],
    route: Route,
) -> Result<ConnectionMatrix> {
    let n = lg.n;
    check_degree(n, p)?;
    let r = e_rank(n, p);
    let mut matrix = DMatrix::zeros(r, r);
    for k in 0..r {
        let col = killing_derivative(lg, &ESection::basis(n, p, k)?, xdir, route)?.to_vec();
        for (i, v) in col.iter().enumerate() {
            matrix[(i, k)] = *v;
        }
    }
    Ok(ConnectionMatrix {
        n,
        p,
        route,
        matrix,
    })
}

/// `|A(X)ê − ∇_Xê| / |ê|` for `ê = (ψ, dψ, d*ψ, dd*ψ)` of a field, with `∇_Xê`
/// from direct jet derivatives.
pub fn killing_connection_residual(
    m: &ChartManifold,
    psi: &FormField,
    x: &[f64],
    xdir: &[f64],
    route: Route,
) -> Result<f64> {
    let n = m.dim;
    let lg = LocalGeom::new(m, x, 3)?;
    let f = psi.at(x, 3)?;
    let ds = codiff(&lg, &f)?;
    let slots = [f.clone(), ext_d(&f)?, ds.clone(), ext_d(&ds)?];
    let xj: Vec<Jet> = xdir.iter().map(|&v| Jet::constant(n, 0, v)).collect();
    let direct: Vec<Form<f64>> = slots
        .iter()
        .map(|s| Ok(contract_valued(&xj, &cov_deriv(&lg, s)?).values()))
        .collect::<Result<_>>()?;
    let e = ESection {
        psi: slots[0].values(),
        dpsi: slots[1].values(),
        dstar_psi: slots[2].values(),
        ddstar_psi: slots[3].values(),
    };
    let pred = killing_derivative(&lg, &e, xdir, route)?;
    let direct = ESection {
        psi: direct[0].clone(),
        dpsi: direct[1].clone(),
        dstar_psi: direct[2].clone(),
        ddstar_psi: direct[3].clone(),
    };
    let ginv = lg.ginv_values();
    Ok(pred.sub(&direct).norm(&ginv) / e.norm(&ginv).max(RESIDUAL_SCALE_FLOOR))
}

/// The three projections `[pr₁⁺, pr₂⁺, π⁺]` of `T*⊗T*⊗Λ^p` onto `Λ^{p+1,1}` at a
/// point, applied to `D[a][b]` (the component along `dx^a ⊗ dx^b`). They satisfy
/// `(p+1)π⁺ + pr₁⁺ = (p+1)/p pr₂⁺` identically; `π⁺` carries a factor `1/p`
/// for this to hold in every degree.
pub fn projections_plus(lg: &LocalGeom, d: &[FormValued<Jet>]) -> Result<[FormValued<Jet>; 3]> {
    let n = lg.n;
    // pr₁⁺: e₁⊗(e₂∧ψ)
    let w1: FormValued<Jet> = (0..n)
        .map(|a| {
            let mut acc = wedge_coord(0, &d[a][0])?;
            for b in 1..n {
                acc.axpy(1.0, &wedge_coord(b, &d[a][b])?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    // pr₂⁺: e₁ ∧ pr(e₂⊗ψ)
    let inner: Vec<FormValued<Jet>> = d
        .iter()
        .map(|row| project_any(lg, row))
        .collect::<Result<_>>()?;
    let w2: FormValued<Jet> = (0..n)
        .map(|b| {
            let mut acc = wedge_coord(0, &inner[0][b])?;
            for (a, s) in inner.iter().enumerate().skip(1) {
                acc.axpy(1.0, &wedge_coord(a, &s[b])?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    // π⁺: p⁻¹ Σ e_i⌟(e₁∧e₂) ⊗ (e_i∧ψ) = p⁻¹ (e₂⊗(e₁∧ψ) − e₁⊗(e₂∧ψ))
    let inv_p = 1.0 / d[0][0].p as f64;
    let w3: FormValued<Jet> = (0..n)
        .map(|c| {
            let mut acc = w1[c].zero_like();
            for a in 0..n {
                acc.axpy(inv_p, &wedge_coord(a, &d[a][c])?);
                acc.axpy(-inv_p, &wedge_coord(a, &d[c][a])?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok([
        project_any(lg, &w1)?,
        project_any(lg, &w2)?,
        project_any(lg, &w3)?,
    ])
}
