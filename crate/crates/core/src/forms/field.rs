//! Form fields over a chart, evaluated on coordinate jets.

use std::sync::Arc;

use super::{wedge, Form};
use crate::error::{Error, Result};
use crate::jets::{Jet, MAX_ORDER};

/// Evaluation of a field on coordinate jets (one jet per chart coordinate).
pub type FormEval = Arc<dyn Fn(&[Jet]) -> Result<Form<Jet>> + Send + Sync>;

/// A coordinate map returning image jets and Jacobian jets.
pub type MapWithJacobian = Arc<dyn Fn(&[Jet]) -> Result<(Vec<Jet>, Vec<Jet>)> + Send + Sync>;

/// A degree-`p` form field on an `n`-dimensional chart.
#[derive(Clone)]
pub struct FormField {
    pub n: usize,
    pub p: usize,
    pub label: String,
    eval: FormEval,
}

impl std::fmt::Debug for FormField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "FormField({}, n={}, p={})", self.label, self.n, self.p)
    }
}

fn is_plain_coordinates(u: &[Jet]) -> bool {
    u.iter()
        .enumerate()
        .all(|(i, v)| v.nvars() == u.len() && v.is_coordinate(i))
}

impl FormField {
    pub fn new(n: usize, p: usize, label: impl Into<String>, eval: FormEval) -> FormField {
        FormField {
            n,
            p,
            label: label.into(),
            eval,
        }
    }

    /// Field with constant coefficients.
    pub fn constant(label: impl Into<String>, value: Form<f64>) -> FormField {
        let (n, p) = (value.n, value.p);
        FormField::new(
            n,
            p,
            label,
            Arc::new(move |x: &[Jet]| {
                Ok(Form {
                    n,
                    p,
                    c: value.c.iter().map(|&v| x[0].constant_like(v)).collect(),
                })
            }),
        )
    }

    pub fn eval(&self, u: &[Jet]) -> Result<Form<Jet>> {
        if u.len() != self.n {
            return Err(Error::Invalid(format!(
                "field `{}` expects {} coordinates, got {}",
                self.label,
                self.n,
                u.len()
            )));
        }
        let f = (self.eval)(u)?;
        if f.p != self.p || f.n != self.n {
            return Err(Error::Degree(format!(
                "field `{}` returned a wrong degree",
                self.label
            )));
        }
        if f.c.iter().any(|j| !j.is_finite()) {
            return Err(Error::Invalid(format!(
                "field `{}` is not finite here",
                self.label
            )));
        }
        Ok(f)
    }

    /// Jets of the coefficients at `x` to the given order.
    pub fn at(&self, x: &[f64], order: usize) -> Result<Form<Jet>> {
        if order > MAX_ORDER {
            return Err(Error::OrderTooHigh {
                requested: order,
                max: MAX_ORDER,
            });
        }
        self.eval(&Jet::coordinates(x, order))
    }

    pub fn values(&self, x: &[f64]) -> Result<Form<f64>> {
        Ok(self.at(x, 0)?.values())
    }

    pub fn relabel(mut self, label: impl Into<String>) -> FormField {
        self.label = label.into();
        self
    }

    /// Field built from an operator that consumes `extra` orders of its input:
    /// `op(y, ψ(y))` is evaluated on fresh coordinates `y` of order `k + extra`
    /// and composed back onto the caller's jets.
    pub fn derived<F>(
        parent: &FormField,
        p: usize,
        label: impl Into<String>,
        extra: usize,
        op: F,
    ) -> FormField
    where
        F: Fn(&[Jet], &Form<Jet>) -> Result<Form<Jet>> + Send + Sync + 'static,
    {
        let parent = parent.clone();
        let n = parent.n;
        FormField::new(
            n,
            p,
            label,
            Arc::new(move |u: &[Jet]| {
                let k = u.first().map_or(0, |v| v.order());
                if k + extra > MAX_ORDER {
                    return Err(Error::OrderTooHigh {
                        requested: k + extra,
                        max: MAX_ORDER,
                    });
                }
                let x0: Vec<f64> = u.iter().map(|v| v.value()).collect();
                let y = Jet::coordinates(&x0, k + extra);
                let inner = parent.eval(&y)?;
                let out = op(&y, &inner)?;
                if is_plain_coordinates(u) {
                    return Ok(out.truncate(k));
                }
                Ok(Form {
                    n: out.n,
                    p: out.p,
                    c: out.c.iter().map(|j| j.compose(u)).collect(),
                })
            }),
        )
    }

    /// `dψ` as a field.
    pub fn exterior_d(&self) -> FormField {
        FormField::derived(self, self.p + 1, format!("d({})", self.label), 1, |_, f| {
            super::calculus::ext_d(f)
        })
    }

    pub fn scale(&self, s: f64) -> FormField {
        let me = self.clone();
        FormField::new(
            self.n,
            self.p,
            format!("{s}*{}", self.label),
            Arc::new(move |u| Ok(me.eval(u)?.scale(s))),
        )
    }

    pub fn add(&self, o: &FormField) -> Result<FormField> {
        if self.n != o.n || self.p != o.p {
            return Err(Error::Degree("sum of fields of different degree".into()));
        }
        let (a, b) = (self.clone(), o.clone());
        Ok(FormField::new(
            self.n,
            self.p,
            format!("{}+{}", self.label, o.label),
            Arc::new(move |u| Ok(a.eval(u)?.add(&b.eval(u)?))),
        ))
    }

    /// `Σ c_i ψ_i` over fields of equal degree.
    pub fn combination(label: impl Into<String>, terms: &[(f64, FormField)]) -> Result<FormField> {
        let first = terms.first().ok_or(Error::EmptySample)?;
        let (n, p) = (first.1.n, first.1.p);
        if terms.iter().any(|(_, f)| f.n != n || f.p != p) {
            return Err(Error::Degree(
                "combination of fields of different degree".into(),
            ));
        }
        let terms = terms.to_vec();
        Ok(FormField::new(
            n,
            p,
            label,
            Arc::new(move |u| {
                let mut acc = terms[0].1.eval(u)?.scale(terms[0].0);
                for (c, f) in &terms[1..] {
                    acc.axpy(*c, &f.eval(u)?);
                }
                Ok(acc)
            }),
        ))
    }

    pub fn wedge(&self, o: &FormField) -> Result<FormField> {
        if self.n != o.n || self.p + o.p > self.n {
            return Err(Error::Degree(format!(
                "wedge degree {} + {} exceeds {}",
                self.p, o.p, self.n
            )));
        }
        let (a, b) = (self.clone(), o.clone());
        Ok(FormField::new(
            self.n,
            self.p + o.p,
            format!("{}^{}", self.label, o.label),
            Arc::new(move |u| wedge(&a.eval(u)?, &b.eval(u)?)),
        ))
    }

    /// Multiply by a scalar function of the coordinates.
    pub fn mul_function(
        &self,
        label: impl Into<String>,
        f: Arc<dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync>,
    ) -> FormField {
        let me = self.clone();
        FormField::new(
            self.n,
            self.p,
            label,
            Arc::new(move |u| Ok(me.eval(u)?.mul_scalar(&f(u)?))),
        )
    }

    /// Pull back through a map `φ: ℝ^m → ℝ^n`; `phi` returns the image jets and
    /// the Jacobian jets `∂φ^A/∂x^a` at `[A * m + a]`, both at the input order.
    pub fn pullback(&self, m: usize, label: impl Into<String>, phi: MapWithJacobian) -> FormField {
        let me = self.clone();
        let p = self.p;
        FormField::derived_map(m, p, label, move |u: &[Jet]| {
            let (img, jac) = phi(u)?;
            let form = me.eval(&img)?;
            super::calculus::pullback_algebraic(&form, &jac, m)
        })
    }

    fn derived_map<F>(n: usize, p: usize, label: impl Into<String>, f: F) -> FormField
    where
        F: Fn(&[Jet]) -> Result<Form<Jet>> + Send + Sync + 'static,
    {
        FormField::new(n, p, label, Arc::new(f))
    }
}
