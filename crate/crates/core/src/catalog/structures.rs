//! Constant forms on flat space: Kähler, hyperkähler, associative and Cayley forms,
//! and the vector cross products they induce on round spheres.
//!
//! Orientation conventions: indices are 0-based. The associative form on `ℝ⁷` is
//! `e012 + e034 + e056 + e135 − e146 − e236 − e245` (the usual `e123 + e145 + …`
//! shifted down by one), and the Cayley form on `ℝ⁸ = ℝ ⊕ ℝ⁷` is
//! `e0∧φ + ★₇φ` with the sign of the second term fixed so that it is self-dual.

use crate::error::{Error, Result};
use crate::forms::{hodge_star, interior, wedge, Form};
use crate::jets::Jet;

use super::ambient::inverse_stereographic;

const ASSOCIATIVE: [([usize; 3], f64); 7] = [
    ([0, 1, 2], 1.0),
    ([0, 3, 4], 1.0),
    ([0, 5, 6], 1.0),
    ([1, 3, 5], 1.0),
    ([1, 4, 6], -1.0),
    ([2, 3, 6], -1.0),
    ([2, 4, 5], -1.0),
];

/// Left multiplication by `i`, `j`, `k` on `ℍ = span(1, i, j, k)`, as images of basis vectors.
const QUATERNION_LEFT: [[(usize, f64); 4]; 3] = [
    [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)],
    [(2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0)],
    [(3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0)],
];

fn identity(n: usize) -> Vec<f64> {
    (0..n * n)
        .map(|k| if k / n == k % n { 1.0 } else { 0.0 })
        .collect()
}

/// `ω(X, Y) = ⟨JX, Y⟩` for an orthogonal complex structure `J` (row-major, `J[b][a] = (J e_a)_b`).
pub fn kahler_form_of(j: &[f64], n: usize) -> Form<f64> {
    let mut c = Form::zero(n, 2, &0.0);
    for a in 0..n {
        for b in a + 1..n {
            c.add_at(&[a, b], &j[b * n + a]);
        }
    }
    c
}

/// Standard complex structure on `ℂ^m = ℝ^{2m}`: `J e_{2a} = e_{2a+1}`.
pub fn standard_complex_structure(m: usize) -> Vec<f64> {
    let n = 2 * m;
    let mut j = vec![0.0; n * n];
    for a in 0..m {
        j[(2 * a + 1) * n + 2 * a] = 1.0;
        j[(2 * a) * n + 2 * a + 1] = -1.0;
    }
    j
}

/// `Σ e_{2a} ∧ e_{2a+1}` on `ℝ^{2m}`.
pub fn kahler_form(m: usize) -> Form<f64> {
    kahler_form_of(&standard_complex_structure(m), 2 * m)
}

/// Complex structures of left quaternionic multiplication by `i`, `j`, `k` on `ℍ^m`.
pub fn quaternionic_structures(m: usize) -> [Vec<f64>; 3] {
    let n = 4 * m;
    let mk = |q: usize| {
        let mut j = vec![0.0; n * n];
        for blk in 0..m {
            for (a, &(b, s)) in QUATERNION_LEFT[q].iter().enumerate() {
                j[(4 * blk + b) * n + 4 * blk + a] = s;
            }
        }
        j
    };
    [mk(0), mk(1), mk(2)]
}

/// The three Kähler forms of the flat hyperkähler `ℍ^m`.
pub fn hyperkahler_triple(m: usize) -> [Form<f64>; 3] {
    let js = quaternionic_structures(m);
    [
        kahler_form_of(&js[0], 4 * m),
        kahler_form_of(&js[1], 4 * m),
        kahler_form_of(&js[2], 4 * m),
    ]
}

/// Associative 3-form on `ℝ⁷`.
pub fn associative_form() -> Form<f64> {
    let mut f = Form::zero(7, 3, &0.0);
    for (idx, s) in ASSOCIATIVE {
        f.add_at(&idx, &s);
    }
    f
}

fn embed_shift(a: &Form<f64>) -> Form<f64> {
    let mut out = Form::zero(a.n + 1, a.p, &0.0);
    for (idx, v) in a.indices().iter().zip(&a.c) {
        let shifted: Vec<usize> = idx.iter().map(|i| i + 1).collect();
        out.add_at(&shifted, v);
    }
    out
}

/// Flat hodge star with the standard orientation.
pub fn flat_star(a: &Form<f64>) -> Form<f64> {
    let id = identity(a.n);
    hodge_star(&id, &id, &1.0, 1.0, a)
}

/// Self-dual Cayley 4-form on `ℝ⁸`.
pub fn cayley_form() -> Form<f64> {
    let phi = associative_form();
    let e0 = Form::basis(8, &[0]);
    let head = wedge(&e0, &embed_shift(&phi)).expect("degrees fit");
    let tail = embed_shift(&flat_star(&phi));
    for s in [1.0, -1.0] {
        let mut cand = head.clone();
        cand.axpy(s, &tail);
        if flat_star(&cand).sub(&cand).max_abs() < 1e-12 {
            return cand;
        }
    }
    unreachable!("one sign choice is self-dual")
}

/// Wedge product of powers of several constant forms.
pub fn wedge_powers(factors: &[(&Form<f64>, usize)], n: usize) -> Result<Form<f64>> {
    let mut acc = Form::from_coeffs(n, 0, vec![1.0])?;
    for (f, k) in factors {
        for _ in 0..*k {
            acc = wedge(&acc, f)?;
        }
    }
    Ok(acc)
}

/// An `r`-fold vector cross product on the round sphere `S^{N−1}` induced by a constant
/// `(r+2)`-form `Ω` on `ℝ^N`: `P(X₁, …, X_r) = Ω(y, X₁, …, X_r, ·)^♯`.
#[derive(Debug, Clone)]
pub struct CrossProduct {
    pub arity: usize,
    /// Dimension of the sphere.
    pub n: usize,
    pub ambient: Form<f64>,
}

impl CrossProduct {
    pub fn new(ambient: Form<f64>) -> Result<CrossProduct> {
        if ambient.p < 2 {
            return Err(Error::Degree(
                "cross products need an ambient form of degree ≥ 2".into(),
            ));
        }
        Ok(CrossProduct {
            arity: ambient.p - 2,
            n: ambient.n - 1,
            ambient,
        })
    }

    /// `P(v₁, …, v_r)` at the north-chart point `x`, as chart components.
    pub fn apply(&self, x: &[f64], vs: &[Vec<f64>]) -> Result<Vec<f64>> {
        if vs.len() != self.arity || x.len() != self.n {
            return Err(Error::Invalid(format!(
                "cross product of arity {} on S^{}",
                self.arity, self.n
            )));
        }
        let n = self.n;
        let xj: Vec<Jet> = x.iter().map(|&v| Jet::constant(n, 0, v)).collect();
        let (y, jac) = inverse_stereographic(&xj, false)?;
        let y: Vec<f64> = y.iter().map(Jet::value).collect();
        let jac: Vec<f64> = jac.iter().map(Jet::value).collect();
        let push = |v: &[f64]| -> Vec<f64> {
            (0..=n)
                .map(|b| (0..n).map(|a| jac[b * n + a] * v[a]).sum())
                .collect()
        };
        let mut form = interior(&y, &self.ambient)?;
        for v in vs {
            form = interior(&push(v), &form)?;
        }
        // form is an ambient 1-form w; solve dF P = w^♯ by P = g⁻¹ dFᵀ w.
        let w = &form.c;
        let conf = 2.0 / (1.0 + x.iter().map(|v| v * v).sum::<f64>());
        Ok((0..n)
            .map(|a| (0..=n).map(|b| jac[b * n + a] * w[b]).sum::<f64>() / (conf * conf))
            .collect())
    }
}
