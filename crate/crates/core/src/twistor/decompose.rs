//! Splitting `R(·,·)ψ ∈ Λ^p ⊗ Λ²` into its six `O(n)`-components at a point.
//!
//! Everything is expressed in an orthonormal frame. The images of the equivariant maps
//! - `β ↦ X∧(Y⌟β) − Y∧(X⌟β)` from `Λ^p`,
//! - `γ ↦ Y⌟X⌟γ` from `Λ^{p+2}`, `δ ↦ X∧Y∧δ` from `Λ^{p−2}`,
//! - `σ ↦ X⌟σ(Y) − Y⌟σ(X)` from `V*⊗Λ^{p+1}`, `τ ↦ X∧τ(Y) − Y∧τ(X)` from `V*⊗Λ^{p−1}`
//!
//! are orthogonalized numerically. The last two images contain the `Λ^p` and `Λ^{p±2}`
//! pieces, so `Λ^{p±1,1}` is what remains of them, and `Λ^{p,2}` is the orthogonal
//! complement of everything.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::FormField;
use crate::forms::{
    curv_action_xy, interior_coord, orthonormal_frame, pullback_algebraic, q_r, wedge_coord, Form,
};
use crate::geometry::{ChartManifold, LocalGeom};
use crate::jets::Jet;
use crate::multiindex::{binomial, combos};

const RANK_TOL: f64 = 1e-9;

/// Norms of the six components, `None` where a summand is absent in this `(n, p)`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureComponents {
    pub total: f64,
    pub lambda_p: f64,
    pub lambda_p_plus_1_1: Option<f64>,
    pub lambda_p_minus_1_1: Option<f64>,
    pub lambda_p_plus_2: Option<f64>,
    pub lambda_p_minus_2: Option<f64>,
    pub lambda_p_2: f64,
    /// `κ` with `Λ^p`-component `= ι₀(κ q(R)ψ)` in the least-squares sense.
    pub q_ratio: f64,
    /// `|β − κ q(R)ψ| / |β|` for the `Λ^p` preimage `β`.
    pub q_defect: f64,
}

/// Orthonormal basis of the column span, from the eigenvectors of the smaller Gram matrix.
fn span(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let wide = m.ncols() >= m.nrows();
    let gram = if wide {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let eig = gram.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > RANK_TOL * lmax.max(1e-300))
        .collect();
    if wide {
        return DMatrix::from_fn(m.nrows(), keep.len(), |r, c| eig.eigenvectors[(r, keep[c])]);
    }
    // u = M v / σ
    let mut u = DMatrix::zeros(m.nrows(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let col = m * eig.eigenvectors.column(i) / eig.eigenvalues[i].sqrt();
        u.set_column(c, &col);
    }
    u
}

fn proj_sq(basis: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    if basis.ncols() == 0 {
        return 0.0;
    }
    (basis.transpose() * v).norm_squared()
}

/// Columns of `m` with their components along the orthonormal `q` removed.
fn complement(q: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    if q.ncols() == 0 {
        return m.clone();
    }
    m - q * (q.transpose() * m)
}

struct Layout {
    n: usize,
    p: usize,
    pairs: Vec<(usize, usize)>,
    dimp: usize,
}

impl Layout {
    fn new(n: usize, p: usize) -> Layout {
        let pairs = combos(n, 2).iter().map(|v| (v[0], v[1])).collect();
        Layout {
            n,
            p,
            pairs,
            dimp: binomial(n, p),
        }
    }

    fn len(&self) -> usize {
        self.pairs.len() * self.dimp
    }

    /// Column from a map `(a, b) ↦ p-form`.
    fn column<F: Fn(usize, usize) -> Result<Form<f64>>>(&self, f: F) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        for (k, &(a, b)) in self.pairs.iter().enumerate() {
            let t = f(a, b)?;
            out[k * self.dimp..(k + 1) * self.dimp].copy_from_slice(&t.c);
        }
        Ok(out)
    }

    fn matrix(&self, cols: Vec<Vec<f64>>) -> DMatrix<f64> {
        let nr = self.len();
        DMatrix::from_fn(nr, cols.len(), |r, c| cols[c][r])
    }

    fn iota0(&self, beta: &Form<f64>) -> Result<Vec<f64>> {
        self.column(|a, b| {
            let mut t = wedge_coord(a, &interior_coord(b, beta)?)?;
            t.axpy(-1.0, &wedge_coord(b, &interior_coord(a, beta)?)?);
            Ok(t)
        })
    }

    fn basis_forms(&self, q: usize) -> Vec<Form<f64>> {
        combos(self.n, q)
            .iter()
            .map(|i| Form::basis(self.n, i))
            .collect()
    }

    fn a0(&self) -> Result<DMatrix<f64>> {
        let cols = self
            .basis_forms(self.p)
            .iter()
            .map(|b| self.iota0(b))
            .collect::<Result<_>>()?;
        Ok(self.matrix(cols))
    }

    fn a_plus2(&self) -> Result<Option<DMatrix<f64>>> {
        if self.p + 2 > self.n {
            return Ok(None);
        }
        let cols = self
            .basis_forms(self.p + 2)
            .iter()
            .map(|g| self.column(|a, b| interior_coord(b, &interior_coord(a, g)?)))
            .collect::<Result<_>>()?;
        Ok(Some(self.matrix(cols)))
    }

    fn a_minus2(&self) -> Result<Option<DMatrix<f64>>> {
        if self.p < 2 {
            return Ok(None);
        }
        let cols = self
            .basis_forms(self.p - 2)
            .iter()
            .map(|d| self.column(|a, b| wedge_coord(a, &wedge_coord(b, d)?)))
            .collect::<Result<_>>()?;
        Ok(Some(self.matrix(cols)))
    }

    fn b_plus(&self) -> Result<Option<DMatrix<f64>>> {
        if self.p + 1 > self.n {
            return Ok(None);
        }
        let mut cols = Vec::new();
        for c in 0..self.n {
            for s in self.basis_forms(self.p + 1) {
                // σ(∂_c) = s, zero elsewhere
                cols.push(self.column(|a, b| {
                    let mut t = Form::zero(self.n, self.p, &0.0);
                    if b == c {
                        t.axpy(1.0, &interior_coord(a, &s)?);
                    }
                    if a == c {
                        t.axpy(-1.0, &interior_coord(b, &s)?);
                    }
                    Ok(t)
                })?);
            }
        }
        Ok(Some(self.matrix(cols)))
    }

    fn b_minus(&self) -> Result<Option<DMatrix<f64>>> {
        if self.p == 0 {
            return Ok(None);
        }
        let mut cols = Vec::new();
        for c in 0..self.n {
            for s in self.basis_forms(self.p - 1) {
                cols.push(self.column(|a, b| {
                    let mut t = Form::zero(self.n, self.p, &0.0);
                    if b == c {
                        t.axpy(1.0, &wedge_coord(a, &s)?);
                    }
                    if a == c {
                        t.axpy(-1.0, &wedge_coord(b, &s)?);
                    }
                    Ok(t)
                })?);
            }
        }
        Ok(Some(self.matrix(cols)))
    }
}

/// Frame components `α(e_{i₁}, …, e_{i_p})` of a coordinate form.
fn to_frame(alpha: &Form<Jet>, frame: &[Vec<f64>]) -> Result<Form<f64>> {
    let n = alpha.n;
    let proto = Jet::constant(n, 0, 0.0);
    let mut jac = Vec::with_capacity(n * n);
    for k in 0..n {
        for e in frame {
            jac.push(proto.constant_like(e[k]));
        }
    }
    Ok(pullback_algebraic(&alpha.truncate(0), &jac, n)?.values())
}

/// The six component norms of `R(·,·)ψ` at `x`.
pub fn decompose_curvature_action(
    m: &ChartManifold,
    psi: &FormField,
    x: &[f64],
) -> Result<CurvatureComponents> {
    let (n, p) = (m.dim, psi.p);
    if p == 0 || p >= n {
        return Err(Error::DegenerateDegree {
            p,
            n,
            what: "decomposition needs 1 ≤ p ≤ n−1",
        });
    }
    let lg = LocalGeom::new(m, x, 2)?.truncate(0);
    let f = psi.at(x, 0)?;
    let frame = orthonormal_frame(&lg.g_values(), n);
    let lay = Layout::new(n, p);
    let v = DVector::from_vec(
        lay.column(|a, b| to_frame(&curv_action_xy(&lg, &frame[a], &frame[b], &f), &frame))?,
    );
    let total_sq = v.norm_squared();

    let a0 = lay.a0()?;
    let q0 = span(&a0);
    let qp2 = lay.a_plus2()?.map(|m| span(&m));
    let qm2 = lay.a_minus2()?.map(|m| span(&m));
    let bp = lay.b_plus()?;
    let bm = lay.b_minus()?;
    let sq0 = proj_sq(&q0, &v);
    let sqp2 = qp2.as_ref().map_or(0.0, |q| proj_sq(q, &v));
    let sqm2 = qm2.as_ref().map_or(0.0, |q| proj_sq(q, &v));
    // Λ^{p±1,1}: the part of span(B±) orthogonal to Λ^p and Λ^{p±2}
    let remaining = |b: &Option<DMatrix<f64>>, q2: &Option<DMatrix<f64>>| -> Option<f64> {
        let qb = span(b.as_ref()?);
        let mut w = complement(&q0, &qb);
        if let Some(q2) = q2 {
            w = complement(q2, &w);
        }
        let qw = span(&w);
        (qw.ncols() > 0).then(|| proj_sq(&qw, &v).sqrt())
    };
    let lp11 = remaining(&bp, &qp2);
    let lm11 = remaining(&bm, &qm2);
    let joint = {
        let mut cols: Vec<DMatrix<f64>> = vec![a0.clone()];
        cols.extend(bp.iter().cloned());
        cols.extend(bm.iter().cloned());
        let total: usize = cols.iter().map(|c| c.ncols()).sum();
        let mut j = DMatrix::zeros(lay.len(), total);
        let mut off = 0;
        for c in cols {
            j.view_mut((0, off), (c.nrows(), c.ncols())).copy_from(&c);
            off += c.ncols();
        }
        span(&j)
    };
    let lp2 = (&v - &joint * (joint.transpose() * &v)).norm();

    // Λ^p preimage β with ι₀(β) = pr_{Λ^p} v, compared with q(R)ψ in the frame
    let svd = a0.clone().svd(true, true);
    let beta = svd
        .solve(&v, RANK_TOL)
        .map_err(|e| Error::Invalid(e.to_string()))?;
    let q = DVector::from_vec(to_frame(&q_r(&lg, &f)?, &frame)?.c);
    let qq = q.norm_squared();
    let (ratio, defect) = if qq > 1e-24 {
        let k = beta.dot(&q) / qq;
        (k, (&beta - &q * k).norm() / beta.norm().max(1e-300))
    } else {
        (0.0, beta.norm())
    };
    Ok(CurvatureComponents {
        total: total_sq.sqrt(),
        lambda_p: sq0.sqrt(),
        lambda_p_plus_1_1: lp11,
        lambda_p_minus_1_1: lm11,
        lambda_p_plus_2: qp2.map(|_| sqp2.sqrt()),
        lambda_p_minus_2: qm2.map(|_| sqm2.sqrt()),
        lambda_p_2: lp2,
        q_ratio: ratio,
        q_defect: defect,
    })
}
