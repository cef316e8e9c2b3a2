//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] of order `k` in `n` variables stores the Taylor coefficients
//! `c_α = ∂^α f(x₀) / α!` for every multi-index `α` with `|α| ≤ k`. Monomials are
//! enumerated degree by degree, so the coefficients of an order-`k` jet are a
//! prefix of those of the order-`k+1` jet of the same function. Truncation is
//! therefore a slice, and mixing orders in arithmetic truncates to the lower one.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};

/// Highest supported jet order.
pub const MAX_ORDER: usize = 3;

/// Values below this magnitude are treated as zero divisors.
pub const DIV_FLOOR: f64 = 1e-300;

/// Monomial bookkeeping shared by all jets with the same `(nvars, order)`.
pub struct Layout {
    pub nvars: usize,
    pub order: usize,
    exps: Vec<Vec<u8>>,
    degree: Vec<u8>,
    index: HashMap<Vec<u8>, usize>,
    /// `(i, j, k)`: `out[k] += a[i] * b[j]`.
    mul: Vec<(u32, u32, u32)>,
    /// Per variable: `(src, dst, factor)` for the partial derivative.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    factorial: Vec<f64>,
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Layout(n={}, k={}, len={})",
            self.nvars,
            self.order,
            self.exps.len()
        )
    }
}

fn monomials_of_degree(nvars: usize, d: usize) -> Vec<Vec<u8>> {
    // Lexicographically decreasing in the first variable, fixed for every order.
    fn rec(nvars: usize, d: usize, pos: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if pos + 1 == nvars {
            cur[pos] = d as u8;
            out.push(cur.clone());
            cur[pos] = 0;
            return;
        }
        for e in (0..=d).rev() {
            cur[pos] = e as u8;
            rec(nvars, d - e, pos + 1, cur, out);
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u8; nvars];
    rec(nvars, d, 0, &mut cur, &mut out);
    out
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        let mut exps = Vec::new();
        for d in 0..=order {
            exps.extend(monomials_of_degree(nvars, d));
        }
        let degree: Vec<u8> = exps.iter().map(|e| e.iter().sum()).collect();
        let index: HashMap<Vec<u8>, usize> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let mut mul = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            for (j, ej) in exps.iter().enumerate() {
                if (degree[i] + degree[j]) as usize > order {
                    continue;
                }
                let s: Vec<u8> = ei.iter().zip(ej).map(|(a, b)| a + b).collect();
                mul.push((i as u32, j as u32, index[&s] as u32));
            }
        }
        let mut deriv = vec![Vec::new(); nvars];
        if order > 0 {
            for (v, table) in deriv.iter_mut().enumerate() {
                for (dst, e) in exps.iter().enumerate() {
                    if degree[dst] as usize >= order {
                        break;
                    }
                    let mut up = e.clone();
                    up[v] += 1;
                    table.push((index[&up] as u32, dst as u32, up[v] as f64));
                }
            }
        }
        let factorial = exps
            .iter()
            .map(|e| {
                e.iter()
                    .map(|&k| (1..=k as u32).product::<u32>() as f64)
                    .product()
            })
            .collect();
        Layout {
            nvars,
            order,
            exps,
            degree,
            index,
            mul,
            deriv,
            factorial,
        }
    }

    /// Shared layout for `(nvars, order)`; layouts are built once and live forever.
    pub fn get(nvars: usize, order: usize) -> &'static Layout {
        static REG: OnceLock<Mutex<HashMap<(usize, usize), &'static Layout>>> = OnceLock::new();
        let reg = REG.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = reg.lock().expect("layout registry poisoned");
        map.entry((nvars, order))
            .or_insert_with(|| Box::leak(Box::new(Layout::build(nvars, order))))
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    /// Number of coefficients of total degree `≤ order`.
    pub fn len_upto(&self, order: usize) -> usize {
        self.degree
            .iter()
            .take_while(|&&d| (d as usize) <= order)
            .count()
    }

    pub fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i]
    }

    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        self.index.get(alpha).copied()
    }
}

/// Truncated Taylor expansion of a smooth function around a base point.
#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Jet(n={}, k={}, {:?})",
            self.layout.nvars, self.layout.order, self.c
        )
    }
}

impl Jet {
    pub fn constant(nvars: usize, order: usize, value: f64) -> Jet {
        let layout = Layout::get(nvars, order);
        let mut c = vec![0.0; layout.len()];
        c[0] = value;
        Jet { layout, c }
    }

    pub fn zero(nvars: usize, order: usize) -> Jet {
        Jet::constant(nvars, order, 0.0)
    }

    /// The coordinate function `x_var` expanded around `base`.
    pub fn variable(nvars: usize, order: usize, var: usize, base: f64) -> Jet {
        let mut j = Jet::constant(nvars, order, base);
        if order > 0 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    /// Coordinate jets `x_i` around `x`.
    pub fn coordinates(x: &[f64], order: usize) -> Vec<Jet> {
        let n = x.len();
        (0..n).map(|i| Jet::variable(n, order, i, x[i])).collect()
    }

    pub fn from_coeffs(nvars: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet> {
        let layout = Layout::get(nvars, order);
        if coeffs.len() != layout.len() {
            return Err(Error::Invalid(format!(
                "expected {} coefficients, got {}",
                layout.len(),
                coeffs.len()
            )));
        }
        Ok(Jet { layout, c: coeffs })
    }

    pub fn layout(&self) -> &'static Layout {
        self.layout
    }

    pub fn nvars(&self) -> usize {
        self.layout.nvars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Taylor coefficient for multi-index `alpha` (zero if beyond the order).
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.layout.index_of(alpha).map_or(0.0, |i| self.c[i])
    }

    /// Raw partial derivative `∂^α f(x₀) = α! c_α`.
    pub fn derivative(&self, alpha: &[u8]) -> f64 {
        self.layout
            .index_of(alpha)
            .map_or(0.0, |i| self.c[i] * self.layout.factorial[i])
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let layout = Layout::get(self.nvars(), order);
        Jet {
            layout,
            c: self.c[..layout.len()].to_vec(),
        }
    }

    fn common(a: &Jet, b: &Jet) -> &'static Layout {
        assert_eq!(a.nvars(), b.nvars(), "jets over different variable counts");
        if a.order() <= b.order() {
            a.layout
        } else {
            b.layout
        }
    }

    pub fn zero_like(&self) -> Jet {
        Jet {
            layout: self.layout,
            c: vec![0.0; self.c.len()],
        }
    }

    pub fn constant_like(&self, v: f64) -> Jet {
        let mut z = self.zero_like();
        z.c[0] = v;
        z
    }

    pub fn add_jet(&self, o: &Jet) -> Jet {
        let l = Jet::common(self, o);
        let c = (0..l.len()).map(|i| self.c[i] + o.c[i]).collect();
        Jet { layout: l, c }
    }

    pub fn sub_jet(&self, o: &Jet) -> Jet {
        let l = Jet::common(self, o);
        let c = (0..l.len()).map(|i| self.c[i] - o.c[i]).collect();
        Jet { layout: l, c }
    }

    pub fn mul_jet(&self, o: &Jet) -> Jet {
        let l = Jet::common(self, o);
        let mut c = vec![0.0; l.len()];
        if l.order == 0 {
            c[0] = self.c[0] * o.c[0];
        } else {
            for &(i, j, k) in &l.mul {
                c[k as usize] += self.c[i as usize] * o.c[j as usize];
            }
        }
        Jet { layout: l, c }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            layout: self.layout,
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    /// `self += s * o`, truncating `self` to the common order.
    pub fn axpy(&mut self, s: f64, o: &Jet) {
        if o.order() < self.order() {
            *self = self.truncate(o.order());
        }
        for i in 0..self.c.len() {
            self.c[i] += s * o.c[i];
        }
    }

    /// `self += s * a * b`.
    pub fn fma(&mut self, s: f64, a: &Jet, b: &Jet) {
        let l = Jet::common(a, b);
        if l.order < self.order() {
            *self = self.truncate(l.order);
        }
        let l = self.layout;
        if l.order == 0 {
            self.c[0] += s * a.c[0] * b.c[0];
            return;
        }
        for &(i, j, k) in &l.mul {
            self.c[k as usize] += s * a.c[i as usize] * b.c[j as usize];
        }
    }

    /// `∂f/∂x_var` as a jet of one order lower.
    pub fn partial(&self, var: usize) -> Result<Jet> {
        if self.order() == 0 {
            return Err(Error::OrderTooHigh {
                requested: 1,
                max: 0,
            });
        }
        let lower = Layout::get(self.nvars(), self.order() - 1);
        let mut c = vec![0.0; lower.len()];
        for &(src, dst, f) in &self.layout.deriv[var] {
            c[dst as usize] = f * self.c[src as usize];
        }
        Ok(Jet { layout: lower, c })
    }

    /// `f(self)` for a univariate `f` given by `derivs[k] = f^{(k)}(self.value())`.
    pub fn compose_univariate(&self, derivs: &[f64]) -> Jet {
        let k = self.order().min(derivs.len() - 1);
        let mut h = self.truncate(k);
        h.c[0] = 0.0;
        // Horner in the nilpotent part.
        let mut fact = 1.0;
        let coeff: Vec<f64> = (0..=k)
            .map(|i| {
                if i > 0 {
                    fact *= i as f64;
                }
                derivs[i] / fact
            })
            .collect();
        let mut acc = h.constant_like(coeff[k]);
        for i in (0..k).rev() {
            acc = acc.mul_jet(&h);
            acc.c[0] += coeff[i];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet> {
        let a = self.value();
        if a.abs() <= DIV_FLOOR || !a.is_finite() {
            return Err(Error::Singular { value: a });
        }
        let r = 1.0 / a;
        Ok(self.compose_univariate(&[r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r]))
    }

    pub fn div_jet(&self, o: &Jet) -> Result<Jet> {
        Ok(self.mul_jet(&o.recip()?))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose_univariate(&[s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose_univariate(&[c, -s, -c, s])
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose_univariate(&[e, e, e, e])
    }

    pub fn ln(&self) -> Result<Jet> {
        let a = self.value();
        if a <= 0.0 {
            return Err(Error::FunctionDomain {
                func: "ln",
                value: a,
            });
        }
        let r = 1.0 / a;
        Ok(self.compose_univariate(&[a.ln(), r, -r * r, 2.0 * r * r * r]))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        self.powf(0.5)
    }

    /// `self^e` for real `e`; requires a positive value unless `e` is a small integer.
    pub fn powf(&self, e: f64) -> Result<Jet> {
        let a = self.value();
        if e.fract() == 0.0 && (0.0..=3.0).contains(&e) {
            return Ok(self.powi(e as u32));
        }
        if a <= 0.0 {
            return Err(Error::FunctionDomain {
                func: "pow",
                value: a,
            });
        }
        let d = [
            a.powf(e),
            e * a.powf(e - 1.0),
            e * (e - 1.0) * a.powf(e - 2.0),
            e * (e - 1.0) * (e - 2.0) * a.powf(e - 3.0),
        ];
        Ok(self.compose_univariate(&d))
    }

    pub fn powi(&self, e: u32) -> Jet {
        let mut acc = self.constant_like(1.0);
        for _ in 0..e {
            acc = acc.mul_jet(self);
        }
        acc
    }

    /// True when this jet is the coordinate function `x_var` (any base value).
    pub fn is_coordinate(&self, var: usize) -> bool {
        let n = self.nvars();
        if var >= n {
            return false;
        }
        if self.order() == 0 {
            return true;
        }
        self.c[1..]
            .iter()
            .enumerate()
            .all(|(i, &v)| v == if i == var { 1.0 } else { 0.0 })
    }

    /// Substitute `u_i - u_i(x₀)` for the displacement variables of `self`
    /// (a jet in `u.len()` variables centered at the values of `u`).
    pub fn compose(&self, u: &[Jet]) -> Jet {
        assert_eq!(u.len(), self.nvars(), "composition arity mismatch");
        let order = u
            .iter()
            .map(|v| v.order())
            .min()
            .unwrap_or(0)
            .min(self.order());
        let proto = u[0].truncate(order);
        let h: Vec<Jet> = u
            .iter()
            .map(|v| {
                let mut d = v.truncate(order);
                d.c[0] = 0.0;
                d
            })
            .collect();
        let l = self.layout;
        let len = l.len_upto(order);
        let mut mono: Vec<Jet> = Vec::with_capacity(len);
        let mut out = proto.zero_like();
        for i in 0..len {
            let e = &l.exps[i];
            let m = match e.iter().position(|&k| k > 0) {
                None => proto.constant_like(1.0),
                Some(v) => {
                    let mut lower = e.clone();
                    lower[v] -= 1;
                    mono[l.index[&lower]].mul_jet(&h[v])
                }
            };
            out.axpy(self.c[i], &m);
            mono.push(m);
        }
        out
    }

    /// Re-express over a new variable set: source variable `i` becomes target
    /// variable `map[i]`; monomials in variables mapped to `None` are dropped
    /// (evaluation at zero displacement in those directions).
    pub fn remap(&self, target_nvars: usize, map: &[Option<usize>]) -> Jet {
        let layout = Layout::get(target_nvars, self.order());
        let mut c = vec![0.0; layout.len()];
        'mono: for (i, e) in self.layout.exps.iter().enumerate() {
            let mut t = vec![0u8; target_nvars];
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match map[v] {
                    Some(tv) => t[tv] += k,
                    None => continue 'mono,
                }
            }
            c[layout.index[&t]] += self.c[i];
        }
        Jet { layout, c }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        self.add_jet(o)
    }
}
impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        self.add_jet(&o)
    }
}
impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        self.sub_jet(o)
    }
}
impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        self.sub_jet(&o)
    }
}
impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        self.mul_jet(o)
    }
}
impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        self.mul_jet(&o)
    }
}
impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}
impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.scale(s)
    }
}
impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        let mut r = self.clone();
        r.c[0] += s;
        r
    }
}
impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, s: f64) -> Jet {
        self.c[0] += s;
        self
    }
}
impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Elementary univariate functions usable in [`JetOp::Compose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Sqrt,
    Ln,
    Recip,
}

impl Elementary {
    pub fn apply(self, a: &Jet) -> Result<Jet> {
        match self {
            Elementary::Sin => Ok(a.sin()),
            Elementary::Cos => Ok(a.cos()),
            Elementary::Exp => Ok(a.exp()),
            Elementary::Sqrt => a.sqrt(),
            Elementary::Ln => a.ln(),
            Elementary::Recip => a.recip(),
        }
    }
}

/// Operations accepted by [`jet_arith`]. Unary variants act on the first
/// operand; `Compose(f)` returns `f ∘ b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JetOp {
    Add,
    Mul,
    Div,
    Compose(Elementary),
    Sin,
    Cos,
    Exp,
    Pow(f64),
    Sqrt,
}

pub fn jet_arith(a: &Jet, b: &Jet, op: JetOp) -> Result<Jet> {
    match op {
        JetOp::Add => Ok(a + b),
        JetOp::Mul => Ok(a * b),
        JetOp::Div => a.div_jet(b),
        JetOp::Compose(f) => f.apply(b),
        JetOp::Sin => Ok(a.sin()),
        JetOp::Cos => Ok(a.cos()),
        JetOp::Exp => Ok(a.exp()),
        JetOp::Pow(e) => a.powf(e),
        JetOp::Sqrt => a.sqrt(),
    }
}

/// Jet of `f` at `x`, where `f` is written against coordinate jets.
pub fn jet_eval<F>(f: F, x: &[f64], order: usize) -> Result<Jet>
where
    F: Fn(&[Jet]) -> Result<Jet>,
{
    if order > MAX_ORDER {
        return Err(Error::OrderTooHigh {
            requested: order,
            max: MAX_ORDER,
        });
    }
    let vars = Jet::coordinates(x, order);
    let out = f(&vars)?;
    if !out.is_finite() {
        return Err(Error::Invalid("non-finite jet coefficient".into()));
    }
    Ok(out)
}

/// Central-difference accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FdScheme {
    Second,
    Fourth,
}

/// Finite-difference estimate of a raw partial derivative. Test-side only.
#[derive(Debug, Clone, PartialEq)]
pub struct FdEstimate {
    pub derivative: Vec<u8>,
    pub value: f64,
    pub step: f64,
    pub scheme: FdScheme,
}

fn stencil(k: u8, scheme: FdScheme) -> Vec<(i32, f64)> {
    match (k, scheme) {
        (0, _) => vec![(0, 1.0)],
        (1, FdScheme::Second) => vec![(-1, -0.5), (1, 0.5)],
        (2, FdScheme::Second) => vec![(-1, 1.0), (0, -2.0), (1, 1.0)],
        (3, FdScheme::Second) => vec![(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        (1, FdScheme::Fourth) => {
            vec![
                (-2, 1.0 / 12.0),
                (-1, -2.0 / 3.0),
                (1, 2.0 / 3.0),
                (2, -1.0 / 12.0),
            ]
        }
        (2, FdScheme::Fourth) => vec![
            (-2, -1.0 / 12.0),
            (-1, 4.0 / 3.0),
            (0, -2.5),
            (1, 4.0 / 3.0),
            (2, -1.0 / 12.0),
        ],
        (3, FdScheme::Fourth) => vec![
            (-3, 0.125),
            (-2, -1.0),
            (-1, 1.625),
            (1, -1.625),
            (2, 1.0),
            (3, -0.125),
        ],
        _ => unreachable!("derivative order checked by caller"),
    }
}

pub fn fd_oracle<F>(f: F, x: &[f64], alpha: &[u8], h: f64, scheme: FdScheme) -> Result<FdEstimate>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let total: u8 = alpha.iter().sum();
    if total as usize > MAX_ORDER {
        return Err(Error::OrderTooHigh {
            requested: total as usize,
            max: MAX_ORDER,
        });
    }
    if h <= 0.0 || alpha.len() != x.len() {
        return Err(Error::Invalid(
            "fd_oracle needs h > 0 and a matching multi-index".into(),
        ));
    }
    // Tensor product of one-dimensional stencils.
    let mut terms: Vec<(Vec<f64>, f64)> = vec![(x.to_vec(), 1.0)];
    for (v, &k) in alpha.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let st = stencil(k, scheme);
        let scale = h.powi(k as i32);
        let mut next = Vec::with_capacity(terms.len() * st.len());
        for (pt, w) in &terms {
            for &(off, sw) in &st {
                let mut p = pt.clone();
                p[v] += off as f64 * h;
                next.push((p, w * sw / scale));
            }
        }
        terms = next;
    }
    let mut value = 0.0;
    for (p, w) in terms {
        value += w * f(&p)?;
    }
    Ok(FdEstimate {
        derivative: alpha.to_vec(),
        value,
        step: h,
        scheme,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_jet_is_exact() {
        // f = x² y at (1, 2)
        let j = jet_eval(|v| Ok(&(&v[0] * &v[0]) * &v[1]), &[1.0, 2.0], 2).unwrap();
        assert_eq!(j.value(), 2.0);
        assert_eq!(j.coeff(&[1, 0]), 4.0);
        assert_eq!(j.coeff(&[0, 1]), 1.0);
        assert_eq!(j.coeff(&[2, 0]), 2.0);
        assert_eq!(j.derivative(&[2, 0]), 4.0);
    }

    #[test]
    fn constant_has_no_slopes() {
        let j = jet_eval(|v| Ok(v[0].constant_like(7.0)), &[0.3, -1.0, 2.0], 3).unwrap();
        assert_eq!(j.value(), 7.0);
        assert!(j.coeffs()[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn sin_jet_matches_fourth_order_differences() {
        let j = jet_eval(|v| Ok(v[0].sin()), &[0.3], 3).unwrap();
        for k in 1..=3u8 {
            // rounding grows like eps / h^k, so the third derivative uses a wider step
            let h = if k == 3 { 1e-2 } else { 1e-3 };
            let fd = fd_oracle(|p| Ok(p[0].sin()), &[0.3], &[k], h, FdScheme::Fourth).unwrap();
            assert!((fd.value - j.derivative(&[k])).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn ring_laws() {
        let x = Jet::variable(1, 3, 0, 0.5);
        let xx = &x * &x;
        let sq = jet_eval(|v| Ok(v[0].powi(2)), &[0.5], 3).unwrap();
        assert_eq!(xx.coeffs(), sq.coeffs());
        let z = &x + &(-&x);
        assert!(z.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn compose_sin_of_square() {
        let x = Jet::variable(1, 3, 0, 0.5);
        let a = jet_arith(&x, &(&x * &x), JetOp::Compose(Elementary::Sin)).unwrap();
        let direct = jet_eval(|v| Ok((&v[0] * &v[0]).sin()), &[0.5], 3).unwrap();
        let (t, s2, c2) = (0.5f64, 0.25f64.sin(), 0.25f64.cos());
        let exact = [
            s2,
            2.0 * t * c2,
            2.0 * c2 - 4.0 * t * t * s2,
            -12.0 * t * s2 - 8.0 * t.powi(3) * c2,
        ];
        for k in 0..=3u8 {
            assert!((a.derivative(&[k]) - direct.derivative(&[k])).abs() < 1e-15);
            assert!((a.derivative(&[k]) - exact[k as usize]).abs() < 1e-14);
        }
    }

    #[test]
    fn division_by_zero_is_reported() {
        let x = Jet::variable(1, 2, 0, 0.0);
        let err = jet_arith(&x.constant_like(1.0), &x, JetOp::Div).unwrap_err();
        assert_eq!(err, Error::Singular { value: 0.0 });
    }

    #[test]
    fn fd_simple_cases() {
        let e = fd_oracle(|p| Ok(p[0] * p[0]), &[3.0], &[1], 1e-4, FdScheme::Second).unwrap();
        assert!((e.value - 6.0).abs() < 1e-7);
        let e = fd_oracle(|p| Ok(p[0].exp()), &[0.0], &[2], 1e-3, FdScheme::Fourth).unwrap();
        assert!((e.value - 1.0).abs() < 1e-5);
    }

    #[test]
    fn partial_and_remap() {
        let j = jet_eval(|v| Ok(&(&v[0] * &v[1]) * &v[1]), &[1.0, 2.0], 3).unwrap();
        let dy = j.partial(1).unwrap();
        assert_eq!(dy.order(), 2);
        assert_eq!(dy.value(), 4.0);
        assert_eq!(dy.coeff(&[1, 1]), 2.0);
        // swap variables into three slots
        let r = j.remap(3, &[Some(2), Some(0)]);
        assert_eq!(r.coeff(&[2, 0, 1]), j.coeff(&[1, 2]));
        let dropped = j.remap(1, &[Some(0), None]);
        assert_eq!(dropped.value(), 4.0);
        assert_eq!(dropped.coeff(&[1]), 4.0);
    }

    #[test]
    fn truncation_prefix_property() {
        let l3 = Layout::get(4, 3);
        let l2 = Layout::get(4, 2);
        for i in 0..l2.len() {
            assert_eq!(l2.exponents(i), l3.exponents(i));
        }
        assert_eq!(Layout::get(8, 3).len(), 165);
    }
}
