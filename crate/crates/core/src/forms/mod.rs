//! Differential forms stored on strictly increasing multi-indices.
//!
//! Conventions: `(dx¹∧dx²)(∂₁, ∂₂) = 1`, `(v⌟α)_J = v^j α_{jJ}`, and the
//! pointwise inner product is `⟨α, β⟩ = Σ_{I increasing} α_I β^I`, so coordinate
//! monomials `dx^I` of an orthonormal coframe are orthonormal.

pub mod calculus;
pub mod field;
pub(crate) mod tables;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::multiindex::{binomial, combos, signed_rank};

pub use calculus::*;
pub use field::FormField;

/// A `p`-form on `ℝⁿ` (or on a tangent space) with coefficients in `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<C> {
    pub n: usize,
    pub p: usize,
    pub c: Vec<C>,
}

/// A 1-form-valued `p`-form `S(∂_i) = S[i]` (a section of `T*⊗Λ^p`).
pub type FormValued<C> = Vec<Form<C>>;

impl<C: Coeff> Form<C> {
    pub fn zero(n: usize, p: usize, proto: &C) -> Form<C> {
        Form {
            n,
            p,
            c: vec![proto.zero_like(); binomial(n, p)],
        }
    }

    pub fn from_coeffs(n: usize, p: usize, c: Vec<C>) -> Result<Form<C>> {
        if p > n || c.len() != binomial(n, p) {
            return Err(Error::Degree(format!(
                "{} coefficients do not describe a {p}-form in dimension {n}",
                c.len()
            )));
        }
        Ok(Form { n, p, c })
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub fn indices(&self) -> &'static [Vec<usize>] {
        combos(self.n, self.p)
    }

    /// Component for an arbitrary index list, with antisymmetry applied.
    pub fn get(&self, idx: &[usize]) -> C {
        match signed_rank(self.n, idx) {
            Some((r, s)) => self.c[r].scale(s),
            None => self.c[0].zero_like(),
        }
    }

    /// Adds `v` to the component for an arbitrary index list.
    pub fn add_at(&mut self, idx: &[usize], v: &C) {
        if let Some((r, s)) = signed_rank(self.n, idx) {
            self.c[r].axpy(s, v);
        }
    }

    pub fn zero_like(&self) -> Form<C> {
        Form {
            n: self.n,
            p: self.p,
            c: self.c.iter().map(|v| v.zero_like()).collect(),
        }
    }

    fn check_same(&self, o: &Form<C>) {
        assert!(self.n == o.n && self.p == o.p, "form degree mismatch");
    }

    pub fn add(&self, o: &Form<C>) -> Form<C> {
        self.check_same(o);
        Form {
            n: self.n,
            p: self.p,
            c: self.c.iter().zip(&o.c).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Form<C>) -> Form<C> {
        self.check_same(o);
        Form {
            n: self.n,
            p: self.p,
            c: self.c.iter().zip(&o.c).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Form<C> {
        Form {
            n: self.n,
            p: self.p,
            c: self.c.iter().map(|a| a.scale(s)).collect(),
        }
    }

    pub fn mul_scalar(&self, f: &C) -> Form<C> {
        Form {
            n: self.n,
            p: self.p,
            c: self.c.iter().map(|a| a.mul(f)).collect(),
        }
    }

    /// `self += s * o`
    pub fn axpy(&mut self, s: f64, o: &Form<C>) {
        self.check_same(o);
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            a.axpy(s, b);
        }
    }

    /// Coefficient values (order-zero part for jets).
    pub fn values(&self) -> Form<f64> {
        Form {
            n: self.n,
            p: self.p,
            c: self.c.iter().map(|v| v.value()).collect(),
        }
    }

    /// Euclidean sum of squares of the stored values.
    pub fn coeff_norm_sq(&self) -> f64 {
        self.c.iter().map(|v| v.value() * v.value()).sum()
    }
}

impl Form<f64> {
    pub fn basis(n: usize, idx: &[usize]) -> Form<f64> {
        let mut f = Form::zero(n, idx.len(), &0.0);
        f.add_at(idx, &1.0);
        f
    }

    /// Constant jets with the same values.
    pub fn to_jets(&self, nvars: usize, order: usize) -> Form<Jet> {
        Form {
            n: self.n,
            p: self.p,
            c: self
                .c
                .iter()
                .map(|&v| Jet::constant(nvars, order, v))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Form<Jet> {
    pub fn truncate(&self, order: usize) -> Form<Jet> {
        Form {
            n: self.n,
            p: self.p,
            c: self.c.iter().map(|v| v.truncate(order)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.c.iter().map(|j| j.order()).min().unwrap_or(0)
    }
}

/// `α ∧ β`.
pub fn wedge<C: Coeff>(a: &Form<C>, b: &Form<C>) -> Result<Form<C>> {
    if a.n != b.n {
        return Err(Error::Degree(
            "wedge of forms in different dimensions".into(),
        ));
    }
    if a.p + b.p > a.n {
        return Err(Error::Degree(format!(
            "wedge degree {} + {} exceeds {}",
            a.p, b.p, a.n
        )));
    }
    let proto =
        a.c.first()
            .or(b.c.first())
            .expect("forms have at least one component");
    let mut out = Form::zero(a.n, a.p + b.p, proto);
    for &(i, j, k, s) in tables::wedge(a.n, a.p, b.p) {
        out.c[k as usize].fma(s, &a.c[i as usize], &b.c[j as usize]);
    }
    Ok(out)
}

/// `v ⌟ α` for a vector with components `v^j`.
pub fn interior<C: Coeff>(v: &[C], a: &Form<C>) -> Result<Form<C>> {
    if a.p == 0 {
        return Err(Error::Degree("interior product of a 0-form".into()));
    }
    let mut out = Form::zero(a.n, a.p - 1, &a.c[0]);
    for &(j, src, dst, s) in tables::interior(a.n, a.p) {
        out.c[dst as usize].fma(s, &v[j as usize], &a.c[src as usize]);
    }
    Ok(out)
}

/// `∂_j ⌟ α`.
pub fn interior_coord<C: Coeff>(j: usize, a: &Form<C>) -> Result<Form<C>> {
    if a.p == 0 {
        return Err(Error::Degree("interior product of a 0-form".into()));
    }
    let mut out = Form::zero(a.n, a.p - 1, &a.c[0]);
    for &(jj, src, dst, s) in tables::interior(a.n, a.p) {
        if jj as usize == j {
            out.c[dst as usize].axpy(s, &a.c[src as usize]);
        }
    }
    Ok(out)
}

/// `dx^j ∧ α`.
pub fn wedge_coord<C: Coeff>(j: usize, a: &Form<C>) -> Result<Form<C>> {
    if a.p + 1 > a.n {
        return Err(Error::Degree("wedge degree exceeds dimension".into()));
    }
    let mut out = Form::zero(a.n, a.p + 1, &a.c[0]);
    for &(i, src, dst, s) in tables::wedge(a.n, 1, a.p) {
        if i as usize == j {
            out.c[dst as usize].axpy(s, &a.c[src as usize]);
        }
    }
    Ok(out)
}

/// `α ∧ α ∧ … ` (`k` factors; `k = 0` gives the constant 1).
pub fn wedge_power<C: Coeff>(a: &Form<C>, k: usize) -> Result<Form<C>> {
    let mut acc = Form {
        n: a.n,
        p: 0,
        c: vec![a.c[0].constant_like(1.0)],
    };
    for _ in 0..k {
        acc = wedge(&acc, a)?;
    }
    Ok(acc)
}

/// 1-form `v^♭` from a vector.
pub fn flat<C: Coeff>(g: &[C], v: &[C]) -> Form<C> {
    let n = v.len();
    let mut c = vec![v[0].zero_like(); n];
    for i in 0..n {
        for j in 0..n {
            c[i].fma(1.0, &g[i * n + j], &v[j]);
        }
    }
    Form { n, p: 1, c }
}

/// Vector `α^♯` from a 1-form.
pub fn sharp<C: Coeff>(ginv: &[C], a: &Form<C>) -> Vec<C> {
    let n = a.n;
    let mut v = vec![a.c[0].zero_like(); n];
    for i in 0..n {
        for j in 0..n {
            v[i].fma(1.0, &ginv[i * n + j], &a.c[j]);
        }
    }
    v
}

/// All `q × q` minors of an `n × n` row-major matrix, indexed `[rank(I) * C(n,q) + rank(J)]`.
pub fn compound<C: Coeff>(m: &[C], n: usize, q: usize) -> Vec<C> {
    minors(m, n, n, q)
}

/// All `q × q` minors of an `nr × nc` row-major matrix.
pub fn minors<C: Coeff>(m: &[C], nr: usize, nc: usize, q: usize) -> Vec<C> {
    let mut level = vec![m[0].constant_like(1.0)];
    for s in 1..=q {
        let plan = tables::minor_plan(nr, nc, s);
        let mut next = Vec::with_capacity(plan.len());
        for terms in plan {
            let mut acc = m[0].zero_like();
            for &(i0, jb, sub, sign) in terms {
                acc.fma(
                    sign,
                    &m[i0 as usize * nc + jb as usize],
                    &level[sub as usize],
                );
            }
            next.push(acc);
        }
        level = next;
    }
    level
}

/// Components with all indices raised by `ginv`.
pub fn raise<C: Coeff>(ginv: &[C], a: &Form<C>) -> Form<C> {
    if a.p == 0 {
        return a.clone();
    }
    let m = compound(ginv, a.n, a.p);
    let len = a.c.len();
    let mut out = a.zero_like();
    for i in 0..len {
        for j in 0..len {
            out.c[i].fma(1.0, &m[i * len + j], &a.c[j]);
        }
    }
    out
}

/// `⟨α, β⟩` in the metric with inverse `ginv`.
pub fn inner<C: Coeff>(ginv: &[C], a: &Form<C>, b: &Form<C>) -> C {
    let rb = raise(ginv, b);
    let mut acc = ginv[0].zero_like();
    for (x, y) in a.c.iter().zip(&rb.c) {
        acc.fma(1.0, x, y);
    }
    acc
}

/// Pointwise norm of a real form.
pub fn norm(ginv: &[f64], a: &Form<f64>) -> f64 {
    inner(ginv, a, a).max(0.0).sqrt()
}

/// `|S|² = Σ g^{ij} ⟨S_i, S_j⟩` for a 1-form-valued form.
pub fn valued_norm_sq(ginv: &[f64], s: &[Form<f64>]) -> f64 {
    let n = s.len();
    let raised: Vec<Form<f64>> = s.iter().map(|f| raise(ginv, f)).collect();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let gij = ginv[i * n + j];
            if gij == 0.0 {
                continue;
            }
            acc += gij
                * s[i]
                    .c
                    .iter()
                    .zip(&raised[j].c)
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
        }
    }
    acc
}

pub fn valued_norm(ginv: &[f64], s: &[Form<f64>]) -> f64 {
    valued_norm_sq(ginv, s).max(0.0).sqrt()
}

/// Hodge star `★α` with `⟨α, β⟩ vol = α ∧ ★β` and `vol = orient·√det g dx¹∧…∧dxⁿ`.
pub fn hodge_star<C: Coeff>(
    g: &[C],
    ginv: &[C],
    sqrt_det: &C,
    orient: f64,
    a: &Form<C>,
) -> Form<C> {
    let n = a.n;
    let p = a.p;
    let q = n - p;
    let comp = tables::complement(n, p);
    let mut out = Form::zero(n, q, &a.c[0]);
    if p <= q {
        // (★α)_K = orient √g Σ_I α^I ε(I, K)
        let up = raise(ginv, a);
        for (i, &(k, s)) in comp.iter().enumerate() {
            out.c[k as usize].fma(orient * s, sqrt_det, &up.c[i]);
        }
    } else {
        // (★α)^K = orient ε(I, K) α_I / √g, then lower K
        let inv = match sqrt_det.value() {
            v if v > 0.0 => {
                let r = sqrt_det.constant_like(1.0);
                divide(&r, sqrt_det)
            }
            _ => sqrt_det.zero_like(),
        };
        let mut upper = Form::zero(n, q, &a.c[0]);
        for (i, &(k, s)) in comp.iter().enumerate() {
            upper.c[k as usize].fma(orient * s, &inv, &a.c[i]);
        }
        out = raise(g, &upper);
    }
    out
}

fn divide<C: Coeff>(num: &C, den: &C) -> C {
    // Newton iteration for 1/den on jets: exact after `order + 1` steps.
    let d0 = den.value();
    let mut x = den.constant_like(1.0 / d0);
    for _ in 0..4 {
        let e = den.mul(&x);
        let two_minus = e.scale(-1.0).add(&den.constant_like(2.0));
        x = x.mul(&two_minus);
    }
    num.mul(&x)
}

/// Derivation extension of an endomorphism `E^m_k` of 1-forms (`e[m * n + k]`).
pub fn derivation<C: Coeff>(e: &[C], a: &Form<C>) -> Form<C> {
    let n = a.n;
    let mut out = a.zero_like();
    for &(dst, k, m, src, s) in tables::derivation(n, a.p) {
        out.c[dst as usize].fma(-s, &e[m as usize * n + k as usize], &a.c[src as usize]);
    }
    out
}

/// `Σ_i X^i S_i` for a 1-form-valued form `S`.
pub fn contract_valued<C: Coeff>(x: &[C], s: &[Form<C>]) -> Form<C> {
    let mut out = s[0].zero_like();
    for (xi, si) in x.iter().zip(s) {
        for (o, v) in out.c.iter_mut().zip(&si.c) {
            o.fma(1.0, xi, v);
        }
    }
    out
}
