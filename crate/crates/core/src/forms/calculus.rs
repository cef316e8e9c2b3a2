//! Differential operators on jet-valued forms at a point.
//!
//! Every operator consumes jets of order `k` and returns jets of order `k−1`
//! per derivative taken, so composite operators are exact at the base point as
//! long as enough orders are supplied.

use super::{derivation, interior_coord, minors, tables, wedge_coord, Form, FormValued};
use crate::error::{Error, Result};
use crate::geometry::LocalGeom;
use crate::jets::Jet;
use crate::multiindex::combos;

/// `∂_i ψ` componentwise.
pub fn partial_form(psi: &Form<Jet>, i: usize) -> Result<Form<Jet>> {
    Ok(Form {
        n: psi.n,
        p: psi.p,
        c: psi.c.iter().map(|j| j.partial(i)).collect::<Result<_>>()?,
    })
}

/// `(dψ)_K = Σ_a (−1)^a ∂_{k_a} ψ_{K∖k_a}`.
pub fn ext_d(psi: &Form<Jet>) -> Result<Form<Jet>> {
    let n = psi.n;
    if psi.p >= n {
        return Ok(Form {
            n,
            p: psi.p + 1,
            c: Vec::new(),
        });
    }
    let parts: Vec<Form<Jet>> = (0..n)
        .map(|i| partial_form(psi, i))
        .collect::<Result<_>>()?;
    let mut out = Form::zero(n, psi.p + 1, &parts[0].c[0]);
    for &(j, src, dst, s) in tables::interior(n, psi.p + 1) {
        out.c[src as usize].axpy(s, &parts[j as usize].c[dst as usize]);
    }
    Ok(out)
}

/// Pullback of a form on `ℝ^N` by a map with Jacobian `jac[A * m + a]`.
pub fn pullback_algebraic(form: &Form<Jet>, jac: &[Jet], m: usize) -> Result<Form<Jet>> {
    let big = form.n;
    let p = form.p;
    if jac.len() != big * m {
        return Err(Error::Invalid("Jacobian shape mismatch".into()));
    }
    let proto = form.c[0].zero_like();
    if p == 0 {
        return Ok(Form {
            n: m,
            p: 0,
            c: form.c.clone(),
        });
    }
    let mins = minors(jac, big, m, p);
    let cols = combos(m, p).len();
    let mut out = Form::zero(m, p, &proto);
    for (a, wa) in form.c.iter().enumerate() {
        if wa.coeffs().iter().all(|&v| v == 0.0) {
            continue;
        }
        for i in 0..cols {
            out.c[i].fma(1.0, wa, &mins[a * cols + i]);
        }
    }
    Ok(out)
}

/// `∇_i ψ` for every coordinate direction.
pub fn cov_deriv(lg: &LocalGeom, psi: &Form<Jet>) -> Result<FormValued<Jet>> {
    let n = psi.n;
    (0..n)
        .map(|i| {
            let mut d = partial_form(psi, i)?;
            if psi.p > 0 {
                d.axpy(1.0, &derivation(&lg.gamma_endo(i), psi));
            }
            Ok(d)
        })
        .collect()
}

/// `(∇_a S)(∂_i)` for a 1-form-valued form `S`, indexed `[a][i]`.
pub fn cov_deriv_valued(lg: &LocalGeom, s: &[Form<Jet>]) -> Result<Vec<FormValued<Jet>>> {
    let n = lg.n;
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let endo = lg.gamma_endo(a);
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            let mut d = partial_form(&s[i], a)?;
            if s[i].p > 0 {
                d.axpy(1.0, &derivation(&endo, &s[i]));
            }
            for m in 0..n {
                let gm = lg.gamma(m, a, i);
                for (o, v) in d.c.iter_mut().zip(&s[m].c) {
                    o.fma(-1.0, gm, v);
                }
            }
            row.push(d);
        }
        out.push(row);
    }
    Ok(out)
}

/// `Σ_i dx^i ∧ ∇_i ψ`, which equals `dψ`.
pub fn d_from_nabla(nabla: &[Form<Jet>]) -> Result<Form<Jet>> {
    let mut out: Option<Form<Jet>> = None;
    for (i, f) in nabla.iter().enumerate() {
        let w = wedge_coord(i, f)?;
        match out.as_mut() {
            None => out = Some(w),
            Some(o) => o.axpy(1.0, &w),
        }
    }
    out.ok_or(Error::EmptySample)
}

/// `−Σ g^{ab} ∂_a ⌟ ∇_b ψ`.
pub fn codiff_from_nabla(lg: &LocalGeom, nabla: &[Form<Jet>]) -> Result<Form<Jet>> {
    let n = lg.n;
    let p = nabla[0].p;
    if p == 0 {
        return Err(Error::Degree("codifferential of a 0-form".into()));
    }
    let mut out = Form::zero(n, p - 1, &nabla[0].c[0]);
    for a in 0..n {
        for b in 0..n {
            let gab = &lg.ginv[a * n + b];
            let ib = interior_coord(a, &nabla[b])?;
            for (o, v) in out.c.iter_mut().zip(&ib.c) {
                o.fma(-1.0, gab, v);
            }
        }
    }
    Ok(out)
}

pub fn codiff(lg: &LocalGeom, psi: &Form<Jet>) -> Result<Form<Jet>> {
    if psi.p == 0 {
        return Err(Error::Degree("codifferential of a 0-form".into()));
    }
    codiff_from_nabla(lg, &cov_deriv(lg, psi)?)
}

/// `∇²_{a,i} ψ = (∇_a ∇ψ)(∂_i)`, indexed `[a][i]`.
pub fn second_cov(lg: &LocalGeom, psi: &Form<Jet>) -> Result<Vec<FormValued<Jet>>> {
    let nabla = cov_deriv(lg, psi)?;
    cov_deriv_valued(lg, &nabla)
}

/// `∇*∇ψ = −g^{ai} ∇²_{a,i} ψ`.
pub fn rough_laplacian(lg: &LocalGeom, psi: &Form<Jet>) -> Result<Form<Jet>> {
    let n = lg.n;
    let h = second_cov(lg, psi)?;
    let mut out = h[0][0].zero_like();
    for a in 0..n {
        for i in 0..n {
            for (o, v) in out.c.iter_mut().zip(&h[a][i].c) {
                o.fma(-1.0, &lg.ginv[a * n + i], v);
            }
        }
    }
    Ok(out)
}

/// `d*dψ` and `dd*ψ`; the second is zero for functions.
pub fn laplacian_parts(lg: &LocalGeom, psi: &Form<Jet>) -> Result<(Form<Jet>, Form<Jet>)> {
    let n = lg.n;
    let dstar_d = if psi.p < n {
        codiff(lg, &ext_d(psi)?)?
    } else {
        psi.truncate(psi.order().saturating_sub(2)).zero_like()
    };
    let d_dstar = if psi.p > 0 {
        ext_d(&codiff(lg, psi)?)?
    } else {
        dstar_d.zero_like()
    };
    Ok((dstar_d, d_dstar))
}

/// `Δψ = d*dψ + dd*ψ`.
pub fn hodge_laplacian(lg: &LocalGeom, psi: &Form<Jet>) -> Result<Form<Jet>> {
    let (a, b) = laplacian_parts(lg, psi)?;
    Ok(a.add(&b))
}

/// Endomorphism `R(X, Y)` on vectors, `E^m_k = X^i Y^j R^m_{kij}`.
pub fn curv_endo_xy(lg: &LocalGeom, x: &[f64], y: &[f64]) -> Vec<Jet> {
    let n = lg.n;
    let proto = lg.riem[0].zero_like();
    let mut e = vec![proto; n * n];
    for i in 0..n {
        for j in 0..n {
            let w = x[i] * y[j];
            if w == 0.0 {
                continue;
            }
            for m in 0..n {
                for k in 0..n {
                    e[m * n + k].axpy(w, lg.riem(m, k, i, j));
                }
            }
        }
    }
    e
}

/// `R_{∂_i, ∂_j} ψ` acting as a derivation.
pub fn curv_action(lg: &LocalGeom, i: usize, j: usize, psi: &Form<Jet>) -> Form<Jet> {
    derivation(&lg.curv_endo(i, j), psi)
}

/// `R_{X, Y} ψ`.
pub fn curv_action_xy(lg: &LocalGeom, x: &[f64], y: &[f64], psi: &Form<Jet>) -> Form<Jet> {
    derivation(&curv_endo_xy(lg, x, y), psi)
}

/// Curvature-like 4-tensor source for the frame-sum templates: `endo(i, j)` is
/// the vector endomorphism attached to the pair `(∂_i, ∂_j)`.
pub trait CurvSource {
    fn endo(&self, i: usize, j: usize) -> Vec<Jet>;
}

/// The Riemann tensor itself.
pub struct Riem<'a>(pub &'a LocalGeom);

impl CurvSource for Riem<'_> {
    fn endo(&self, i: usize, j: usize) -> Vec<Jet> {
        self.0.curv_endo(i, j)
    }
}

/// `∇_a R` from precomputed `∇R` components (`nabla_riem` layout).
pub struct NablaRiem<'a> {
    pub n: usize,
    pub a: usize,
    pub data: &'a [Jet],
}

impl CurvSource for NablaRiem<'_> {
    fn endo(&self, i: usize, j: usize) -> Vec<Jet> {
        let n = self.n;
        let n4 = n * n * n * n;
        let base = &self.data[self.a * n4..(self.a + 1) * n4];
        let mut e = Vec::with_capacity(n * n);
        for m in 0..n {
            for k in 0..n {
                e.push(base[((m * n + k) * n + i) * n + j].clone());
            }
        }
        e
    }
}

/// `Σ_a X^a ∇_a R` as a curvature source.
pub struct NablaRiemX<'a> {
    pub n: usize,
    pub x: Vec<f64>,
    pub data: &'a [Jet],
}

impl CurvSource for NablaRiemX<'_> {
    fn endo(&self, i: usize, j: usize) -> Vec<Jet> {
        let n = self.n;
        let mut acc: Option<Vec<Jet>> = None;
        for a in 0..n {
            if self.x[a] == 0.0 {
                continue;
            }
            let e = NablaRiem {
                n,
                a,
                data: self.data,
            }
            .endo(i, j);
            match acc.as_mut() {
                None => acc = Some(e.iter().map(|v| v.scale(self.x[a])).collect()),
                Some(s) => {
                    for (o, v) in s.iter_mut().zip(&e) {
                        o.axpy(self.x[a], v);
                    }
                }
            }
        }
        acc.unwrap_or_else(|| {
            let z = self.data[0].zero_like();
            vec![z; n * n]
        })
    }
}

/// `q(R)ψ = Σ g^{ab} dx^c ∧ ∂_a ⌟ R_{∂_b, ∂_c} ψ` for any curvature source.
pub fn q_template(ginv: &[Jet], src: &dyn CurvSource, psi: &Form<Jet>) -> Result<Form<Jet>> {
    let n = psi.n;
    let mut out: Option<Form<Jet>> = None;
    if psi.p == 0 {
        return Ok(psi.zero_like());
    }
    for b in 0..n {
        for c in 0..n {
            let rpsi = derivation(&src.endo(b, c), psi);
            for a in 0..n {
                let gab = &ginv[a * n + b];
                if gab.coeffs().iter().all(|&v| v == 0.0) {
                    continue;
                }
                let term = wedge_coord(c, &interior_coord(a, &rpsi)?)?.mul_scalar(gab);
                match out.as_mut() {
                    None => out = Some(term),
                    Some(o) => o.axpy(1.0, &term),
                }
            }
        }
    }
    Ok(out.unwrap_or_else(|| psi.zero_like()))
}

pub fn q_r(lg: &LocalGeom, psi: &Form<Jet>) -> Result<Form<Jet>> {
    q_template(&lg.ginv, &Riem(lg), psi)
}

/// `R⁺(X)ψ = Σ_c dx^c ∧ R_{X, ∂_c} ψ`.
pub fn r_plus_template(src: &dyn CurvSource, x: &[f64], psi: &Form<Jet>) -> Result<Form<Jet>> {
    let n = psi.n;
    let mut out: Option<Form<Jet>> = None;
    for c in 0..n {
        let mut rp: Option<Form<Jet>> = None;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let t = derivation(&src.endo(i, c), psi).scale(xi);
            match rp.as_mut() {
                None => rp = Some(t),
                Some(r) => r.axpy(1.0, &t),
            }
        }
        if let Some(r) = rp {
            let w = wedge_coord(c, &r)?;
            match out.as_mut() {
                None => out = Some(w),
                Some(o) => o.axpy(1.0, &w),
            }
        }
    }
    match out {
        Some(o) => Ok(o),
        None => {
            let proto = src.endo(0, 0)[0].zero_like();
            Ok(Form::zero(n, psi.p + 1, &proto))
        }
    }
}

/// `R⁻(X)ψ = Σ g^{ac} ∂_a ⌟ R_{X, ∂_c} ψ`.
pub fn r_minus_template(
    ginv: &[Jet],
    src: &dyn CurvSource,
    x: &[f64],
    psi: &Form<Jet>,
) -> Result<Form<Jet>> {
    let n = psi.n;
    if psi.p == 0 {
        return Err(Error::Degree("R⁻ of a function".into()));
    }
    let proto = src.endo(0, 0)[0].zero_like();
    let mut out = Form::zero(n, psi.p - 1, &proto);
    for c in 0..n {
        let mut rp: Option<Form<Jet>> = None;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let t = derivation(&src.endo(i, c), psi).scale(xi);
            match rp.as_mut() {
                None => rp = Some(t),
                Some(r) => r.axpy(1.0, &t),
            }
        }
        if let Some(r) = rp {
            for a in 0..n {
                let ia = interior_coord(a, &r)?;
                for (o, v) in out.c.iter_mut().zip(&ia.c) {
                    o.fma(1.0, &ginv[a * n + c], v);
                }
            }
        }
    }
    Ok(out)
}

pub fn r_plus(lg: &LocalGeom, x: &[f64], psi: &Form<Jet>) -> Result<Form<Jet>> {
    r_plus_template(&Riem(lg), x, psi)
}

pub fn r_minus(lg: &LocalGeom, x: &[f64], psi: &Form<Jet>) -> Result<Form<Jet>> {
    r_minus_template(&lg.ginv, &Riem(lg), x, psi)
}

/// Ricci tensor `Ric_{jl} = R^m_{lmj}` as jets.
pub fn ricci_jets(lg: &LocalGeom) -> Vec<Jet> {
    let n = lg.n;
    let mut ric = vec![lg.riem[0].zero_like(); n * n];
    for j in 0..n {
        for l in 0..n {
            for m in 0..n {
                ric[j * n + l].axpy(1.0, lg.riem(m, l, m, j));
            }
        }
    }
    ric
}

/// `Ric` extended to forms as a derivation (`Ric(α) = α ∘ Ric` on 1-forms).
pub fn ricci_derivation(lg: &LocalGeom, psi: &Form<Jet>) -> Form<Jet> {
    let n = lg.n;
    let ric = ricci_jets(lg);
    // E^m_k = −g^{ma} Ric_{ak}
    let mut e = vec![ric[0].zero_like(); n * n];
    for m in 0..n {
        for k in 0..n {
            for a in 0..n {
                e[m * n + k].fma(-1.0, &lg.ginv[m * n + a], &ric[a * n + k]);
            }
        }
    }
    derivation(&e, psi)
}

/// Curvature operator on 2-forms, `g(𝓡(X∧Y), Z∧U) = −g(R(X,Y)Z, U)`:
/// `𝓡(ω)_{kl} = Σ_{i<j} ω^{ij} R_{klij}`.
pub fn curvature_operator(lg: &LocalGeom, omega: &Form<Jet>) -> Result<Form<Jet>> {
    let n = lg.n;
    if omega.p != 2 {
        return Err(Error::Degree("curvature operator acts on 2-forms".into()));
    }
    let up = super::raise(&lg.ginv, omega);
    let pairs = combos(n, 2);
    let mut out = Form::zero(n, 2, &lg.riem[0]);
    for (kl, kk) in pairs.iter().enumerate() {
        let (k, l) = (kk[0], kk[1]);
        for (ij, ii) in pairs.iter().enumerate() {
            let (i, j) = (ii[0], ii[1]);
            // R_{klij} = g_{km} R^m_{lij}
            let mut r = lg.riem[0].zero_like();
            for m in 0..n {
                r.fma(1.0, &lg.g[k * n + m], lg.riem(m, l, i, j));
            }
            out.c[kl].fma(1.0, &up.c[ij], &r);
        }
    }
    Ok(out)
}

/// Orthonormal frame from Gram–Schmidt on the coordinate frame (vectors `e_a`).
pub fn orthonormal_frame(g: &[f64], n: usize) -> Vec<Vec<f64>> {
    let ip = |u: &[f64], v: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += g[i * n + j] * u[i] * v[j];
            }
        }
        s
    };
    let mut frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        for e in &frame {
            let c = ip(&v, e);
            for i in 0..n {
                v[i] -= c * e[i];
            }
        }
        let nv = ip(&v, &v).sqrt();
        frame.push(v.iter().map(|x| x / nv).collect());
    }
    frame
}

/// Frame-sum form of `q(R)`: `Σ_{i,j} e^j ∧ e_i ⌟ R_{e_i, e_j} ψ`.
pub fn q_r_frame(lg: &LocalGeom, frame: &[Vec<f64>], psi: &Form<Jet>) -> Result<Form<Jet>> {
    let g = lg.g_values();
    let proto = lg.riem[0].zero_like();
    let mut out = psi.truncate(proto.order()).zero_like();
    for ei in frame {
        for ej in frame {
            let r = curv_action_xy(lg, ei, ej, psi);
            let vi: Vec<Jet> = ei.iter().map(|&v| proto.constant_like(v)).collect();
            let inner = super::interior(&vi, &r)?;
            let gj: Vec<Jet> = g.iter().map(|&v| proto.constant_like(v)).collect();
            let ej_jets: Vec<Jet> = ej.iter().map(|&v| proto.constant_like(v)).collect();
            let cof = super::flat(&gj, &ej_jets);
            out.axpy(1.0, &super::wedge(&cof, &inner)?);
        }
    }
    Ok(out)
}

/// Frame-sum forms of `R^±(X)`.
pub fn r_pm_frame(
    lg: &LocalGeom,
    frame: &[Vec<f64>],
    x: &[f64],
    psi: &Form<Jet>,
    plus: bool,
) -> Result<Form<Jet>> {
    let g = lg.g_values();
    let proto = lg.riem[0].zero_like();
    let gj: Vec<Jet> = g.iter().map(|&v| proto.constant_like(v)).collect();
    let mut out: Option<Form<Jet>> = None;
    for ej in frame {
        let r = curv_action_xy(lg, x, ej, psi);
        let ej_jets: Vec<Jet> = ej.iter().map(|&v| proto.constant_like(v)).collect();
        let t = if plus {
            super::wedge(&super::flat(&gj, &ej_jets), &r)?
        } else {
            super::interior(&ej_jets, &r)?
        };
        match out.as_mut() {
            None => out = Some(t),
            Some(o) => o.axpy(1.0, &t),
        }
    }
    out.ok_or(Error::EmptySample)
}
