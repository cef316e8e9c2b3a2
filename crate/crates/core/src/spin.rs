//! Clifford algebra, flat twistor spinors and the forms
//! `ω_k(X₁, …, X_k) = ⟨(X₁∧…∧X_k)·ψ₁, ψ₂⟩` built from pairs of them.
//!
//! Conventions: `γ_iγ_j + γ_jγ_i = −2δ_ij`, the generators are anti-Hermitian,
//! and `⟨φ, χ⟩ = Re(χ^H φ)`. Clifford multiplication is then skew-adjoint, and
//! `⟨ω·φ, χ⟩ = ε⟨φ, ω·χ⟩` for a `k`-form `ω` with `ε = (−1)^{k(k+1)/2}`.
//! The Hermitian product `χ^H φ` gives complex `ω_k`; its real and imaginary
//! parts are both real forms, and [`spinor_form`] returns the real part.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{codiff, cov_deriv, ext_d, interior, wedge, Form, FormField};
use crate::geometry::{ChartManifold, LocalGeom, MetricFn, Region};
use crate::jets::Jet;
use crate::multiindex::combos;

pub type C64 = Complex<f64>;
pub type Spinor = DVector<C64>;

const I: C64 = C64::new(0.0, 1.0);

/// Complex spinor module of `Cl(ℝⁿ)` of dimension `2^⌊n/2⌋`.
#[derive(Clone, Debug)]
pub struct CliffordAlgebra {
    pub n: usize,
    pub dim: usize,
    pub gamma: Vec<DMatrix<C64>>,
}

fn pauli() -> [DMatrix<C64>; 4] {
    let m = |v: [C64; 4]| DMatrix::from_row_slice(2, 2, &v);
    let (o, l) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    [
        m([l, o, o, l]),
        m([o, l, l, o]),
        m([o, -I, I, o]),
        m([l, o, o, -l]),
    ]
}

fn kron_all(factors: &[&DMatrix<C64>]) -> DMatrix<C64> {
    factors
        .iter()
        .fold(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)), |acc, f| {
            acc.kronecker(*f)
        })
}

impl CliffordAlgebra {
    /// Tensor-product construction: `γ_{2j} = i σ_z^{⊗j}⊗σ_x⊗1`, `γ_{2j+1} = i σ_z^{⊗j}⊗σ_y⊗1`,
    /// and for odd `n` the last generator `i σ_z^{⊗m}`.
    pub fn new(n: usize) -> Result<CliffordAlgebra> {
        if n == 0 || n > 12 {
            return Err(Error::Invalid(format!(
                "Clifford algebra of ℝ^{n} not supported"
            )));
        }
        let m = n / 2;
        let [id, sx, sy, sz] = pauli();
        let mut gamma = Vec::with_capacity(n);
        for j in 0..m {
            for s in [&sx, &sy] {
                let mut f: Vec<&DMatrix<C64>> = vec![&sz; j];
                f.push(s);
                f.extend(std::iter::repeat_n(&id, m - j - 1));
                gamma.push(kron_all(&f) * I);
            }
        }
        if n % 2 == 1 {
            gamma.push(kron_all(&vec![&sz; m]) * I);
        }
        Ok(CliffordAlgebra {
            n,
            dim: 1 << m,
            gamma,
        })
    }

    /// Largest entry of `γ_iγ_j + γ_jγ_i + 2δ_ij`.
    pub fn relation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                let mut a = &self.gamma[i] * &self.gamma[j] + &self.gamma[j] * &self.gamma[i];
                if i == j {
                    a += DMatrix::identity(self.dim, self.dim) * C64::new(2.0, 0.0);
                }
                worst = worst.max(a.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        worst
    }

    /// `⟨φ, χ⟩ = Re(χ^H φ)`.
    pub fn inner(&self, phi: &Spinor, chi: &Spinor) -> f64 {
        self.hermitian(phi, chi).re
    }

    pub fn hermitian(&self, phi: &Spinor, chi: &Spinor) -> C64 {
        chi.dotc(phi)
    }

    /// `X·` for `X = Σ x_i e_i`.
    pub fn vector_matrix(&self, x: &[f64]) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (g, &v) in self.gamma.iter().zip(x) {
            out += g * C64::new(v, 0.0);
        }
        out
    }

    /// `γ_{i₁}⋯γ_{i_k}`, the action of `e_{i₁}∧…∧e_{i_k}` for distinct indices.
    pub fn product(&self, idx: &[usize]) -> DMatrix<C64> {
        idx.iter()
            .fold(DMatrix::identity(self.dim, self.dim), |acc, &i| {
                acc * &self.gamma[i]
            })
    }

    /// `ω·` for a form with orthonormal-frame components.
    pub fn form_matrix(&self, omega: &Form<f64>) -> Result<DMatrix<C64>> {
        if omega.n != self.n {
            return Err(Error::Degree(format!(
                "{}-form components in a Clifford algebra of ℝ^{}",
                omega.n, self.n
            )));
        }
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for (idx, &v) in combos(self.n, omega.p).iter().zip(&omega.c) {
            if v != 0.0 {
                out += self.product(idx) * C64::new(v, 0.0);
            }
        }
        Ok(out)
    }

    pub fn random_spinor<R: Rng>(&self, rng: &mut R) -> Spinor {
        Spinor::from_fn(self.dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }
}

/// Clifford multiplication of a form on a spinor.
pub fn clifford_form_action(
    alg: &CliffordAlgebra,
    omega: &Form<f64>,
    phi: &Spinor,
) -> Result<Spinor> {
    Ok(alg.form_matrix(omega)? * phi)
}

/// Largest entry of `ω·X − (−1)^k (X∧ω + X⌟ω)` as operators.
pub fn form_vector_identity_defect(
    alg: &CliffordAlgebra,
    omega: &Form<f64>,
    x: &[f64],
) -> Result<f64> {
    let n = alg.n;
    let lhs = alg.form_matrix(omega)? * alg.vector_matrix(x);
    let xf = Form::from_coeffs(n, 1, x.to_vec())?;
    let mut rhs = DMatrix::zeros(alg.dim, alg.dim);
    if omega.p < n {
        rhs += alg.form_matrix(&wedge(&xf, omega)?)?;
    }
    if omega.p > 0 {
        rhs += alg.form_matrix(&interior(x, omega)?)?;
    }
    let sign = if omega.p.is_multiple_of(2) { 1.0 } else { -1.0 };
    let d = lhs - rhs * C64::new(sign, 0.0);
    Ok(d.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// `ψ(x) = a + x·b` on flat `ℝⁿ`, with `Dψ = −n b` and `∇_Xψ = X·b = −(1/n) X·Dψ`.
#[derive(Clone, Debug)]
pub struct TwistorSpinorField {
    pub a: Spinor,
    pub b: Spinor,
}

impl TwistorSpinorField {
    pub fn random<R: Rng>(alg: &CliffordAlgebra, rng: &mut R) -> TwistorSpinorField {
        TwistorSpinorField {
            a: alg.random_spinor(rng),
            b: alg.random_spinor(rng),
        }
    }

    pub fn value(&self, alg: &CliffordAlgebra, x: &[f64]) -> Spinor {
        &self.a + alg.vector_matrix(x) * &self.b
    }

    pub fn dirac(&self, alg: &CliffordAlgebra) -> Spinor {
        &self.b * C64::new(-(alg.n as f64), 0.0)
    }

    /// `|∇_Xψ + (1/n) X·Dψ|`, with `∇_Xψ = Σ X^i γ_i b` from the definition.
    pub fn twistor_defect(&self, alg: &CliffordAlgebra, xdir: &[f64]) -> f64 {
        let xm = alg.vector_matrix(xdir);
        let nabla = &xm * &self.b;
        let rhs = xm * self.dirac(alg) * C64::new(-1.0 / alg.n as f64, 0.0);
        (nabla - rhs).norm()
    }
}

/// Flat `ℝⁿ` in Cartesian coordinates.
pub fn euclidean(n: usize) -> ChartManifold {
    let metric: MetricFn = Arc::new(move |x: &[Jet]| {
        Ok((0..n * n)
            .map(|k| x[0].constant_like(if k / n == k % n { 1.0 } else { 0.0 }))
            .collect())
    });
    ChartManifold::single(
        &format!("r{n}"),
        n,
        metric,
        Region::All,
        Region::Ball { radius: 1.5 },
    )
}

/// Which real part of the Hermitian pairing to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Real,
    Imaginary,
}

fn part(z: C64, which: Part) -> f64 {
    match which {
        Part::Real => z.re,
        Part::Imaginary => z.im,
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::DegenerateDegree {
            p: k,
            n,
            what: "the spinor forms are built for 1 ≤ k ≤ n−1",
        });
    }
    Ok(())
}

/// `ω_k` of a spinor pair: one part of `(ψ₂(x))^H γ_I ψ₁(x)` on each index `I`.
/// The coefficients are quadratic polynomials in `x`.
pub fn spinor_form_part(
    alg: &CliffordAlgebra,
    psi1: &TwistorSpinorField,
    psi2: &TwistorSpinorField,
    k: usize,
    which: Part,
) -> Result<FormField> {
    let n = alg.n;
    check_k(n, k)?;
    let gb1: Vec<Spinor> = alg.gamma.iter().map(|g| g * &psi1.b).collect();
    let gb2: Vec<Spinor> = alg.gamma.iter().map(|g| g * &psi2.b).collect();
    // ω_I = c₀ + Σ c_i x_i + Σ c_il x_i x_l
    let mut quad = Vec::new();
    for idx in combos(n, k) {
        let g = alg.product(idx);
        let ga1 = &g * &psi1.a;
        let c0 = part(psi2.a.dotc(&ga1), which);
        let mut c1 = vec![0.0; n];
        let mut c2 = vec![0.0; n * n];
        for i in 0..n {
            c1[i] = part(psi2.a.dotc(&(&g * &gb1[i])), which) + part(gb2[i].dotc(&ga1), which);
            for l in 0..n {
                c2[i * n + l] = part(gb2[i].dotc(&(&g * &gb1[l])), which);
            }
        }
        quad.push((c0, c1, c2));
    }
    let label = format!(
        "omega_{k}:{}",
        if which == Part::Real { "re" } else { "im" }
    );
    Ok(FormField::new(
        n,
        k,
        label,
        Arc::new(move |x: &[Jet]| {
            let c = quad
                .iter()
                .map(|(c0, c1, c2)| {
                    let mut v = x[0].constant_like(*c0);
                    for i in 0..n {
                        v.axpy(c1[i], &x[i]);
                        for l in 0..n {
                            v.fma(c2[i * n + l], &x[i], &x[l]);
                        }
                    }
                    v
                })
                .collect();
            Ok(Form { n, p: k, c })
        }),
    ))
}

/// The real part of `ω_k`.
pub fn spinor_form(
    alg: &CliffordAlgebra,
    psi1: &TwistorSpinorField,
    psi2: &TwistorSpinorField,
    k: usize,
) -> Result<FormField> {
    spinor_form_part(alg, psi1, psi2, k, Part::Real)
}

/// Comparison of `dω_k` and `d*ω_k` from the form calculus with the spinorial
/// expressions
/// `dω_k = (k+1)/n (−1)^{k+1} (⟨[·]·Dψ₁, ψ₂⟩ + ε⟨ψ₁, [·]·Dψ₂⟩)` and
/// `d*ω_k = (n−k+1)/n (−1)^k (⟨[·]·Dψ₁, ψ₂⟩ + ε⟨ψ₁, [·]·Dψ₂⟩)`, `ε = (−1)^{k(k+1)/2}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AppendixResiduals {
    pub d: f64,
    pub dstar: f64,
}

fn spinorial_rhs(
    alg: &CliffordAlgebra,
    psi1: &TwistorSpinorField,
    psi2: &TwistorSpinorField,
    k: usize,
    degree: usize,
    coeff: f64,
    x: &[f64],
) -> Form<f64> {
    let n = alg.n;
    let eps = if (k * (k + 1) / 2).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    let (v1, v2) = (psi1.value(alg, x), psi2.value(alg, x));
    let (d1, d2) = (psi1.dirac(alg), psi2.dirac(alg));
    let c = combos(n, degree)
        .iter()
        .map(|idx| {
            let g = alg.product(idx);
            coeff * (alg.inner(&(&g * &d1), &v2) + eps * alg.inner(&v1, &(&g * &d2)))
        })
        .collect();
    Form { n, p: degree, c }
}

pub fn appendix_identities(
    alg: &CliffordAlgebra,
    psi1: &TwistorSpinorField,
    psi2: &TwistorSpinorField,
    k: usize,
    x: &[f64],
) -> Result<AppendixResiduals> {
    let n = alg.n;
    let omega = spinor_form(alg, psi1, psi2, k)?;
    let m = euclidean(n);
    let lg = LocalGeom::new(&m, x, 1)?;
    let f = omega.at(x, 1)?;
    let (nf, kf) = (n as f64, k as f64);
    let sgn = |e: usize| if e.is_multiple_of(2) { 1.0 } else { -1.0 };
    let d_rhs = spinorial_rhs(alg, psi1, psi2, k, k + 1, (kf + 1.0) / nf * sgn(k + 1), x);
    let ds_rhs = spinorial_rhs(alg, psi1, psi2, k, k - 1, (nf - kf + 1.0) / nf * sgn(k), x);
    let rel = |a: &Form<f64>, b: &Form<f64>| {
        let sup = |f: &Form<f64>| f.c.iter().map(|v| v.abs()).fold(0.0, f64::max);
        sup(&a.sub(b)) / sup(a).max(sup(b)).max(1e-3)
    };
    Ok(AppendixResiduals {
        d: rel(&ext_d(&f)?.values(), &d_rhs),
        dstar: rel(&codiff(&lg, &f)?.values(), &ds_rhs),
    })
}

/// `Σ_i (−1)^i X_i ⌟ (X₀∧…∧X̂_i∧…∧X_k)` for vectors in Euclidean `ℝⁿ`.
pub fn alternating_contraction_sum(vectors: &[Vec<f64>]) -> Result<Form<f64>> {
    let n = vectors.first().map(Vec::len).ok_or(Error::EmptySample)?;
    if vectors.len() < 2 {
        return Err(Error::Invalid("need at least two vectors".into()));
    }
    let one = |v: &Vec<f64>| Form::from_coeffs(n, 1, v.clone());
    let mut out = Form::zero(n, vectors.len() - 2, &0.0);
    for (i, xi) in vectors.iter().enumerate() {
        let mut w: Option<Form<f64>> = None;
        for (j, xj) in vectors.iter().enumerate() {
            if j != i {
                let f = one(xj)?;
                w = Some(match w {
                    None => f,
                    Some(acc) => wedge(&acc, &f)?,
                });
            }
        }
        let c = interior(xi, &w.ok_or(Error::EmptySample)?)?;
        out.axpy(if i % 2 == 0 { 1.0 } else { -1.0 }, &c);
    }
    Ok(out)
}

/// Trace-free part of `£_V g = ∇_iV_j + ∇_jV_i` for the vector field dual to a
/// 1-form, relative to `|∇V|`. Zero for conformal vector fields.
pub fn conformal_vector_residual(m: &ChartManifold, omega: &FormField, x: &[f64]) -> Result<f64> {
    if omega.p != 1 {
        return Err(Error::Degree(
            "conformal vector fields are dual to 1-forms".into(),
        ));
    }
    let n = m.dim;
    let lg = LocalGeom::new(m, x, 1)?;
    let nab: Vec<Form<f64>> = cov_deriv(&lg, &omega.at(x, 1)?)?
        .iter()
        .map(Form::values)
        .collect();
    let (g, ginv) = (lg.g_values(), lg.ginv_values());
    let s = |i: usize, j: usize| nab[i].c[j] + nab[j].c[i];
    let tr: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| ginv[i * n + j] * s(i, j))
        .sum();
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            num = num.max((s(i, j) - tr / n as f64 * g[i * n + j]).abs());
            den = den.max(nab[i].c[j].abs());
        }
    }
    Ok(num / den.max(1e-3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_satisfy_the_clifford_relation_exactly() {
        for n in 1..=8 {
            let alg = CliffordAlgebra::new(n).unwrap();
            assert_eq!(alg.dim, 1 << (n / 2));
            assert_eq!(alg.relation_defect(), 0.0, "n={n}");
            for g in &alg.gamma {
                assert_eq!(g.adjoint(), -g, "anti-Hermitian");
            }
        }
        assert!(CliffordAlgebra::new(0).is_err());
    }

    #[test]
    fn vector_forms_act_by_generators() {
        let alg = CliffordAlgebra::new(4).unwrap();
        assert_eq!(
            alg.form_matrix(&Form::basis(4, &[0])).unwrap(),
            alg.gamma[0]
        );
        assert_eq!(
            alg.form_matrix(&Form::basis(4, &[0, 1])).unwrap(),
            &alg.gamma[0] * &alg.gamma[1]
        );
    }
}
