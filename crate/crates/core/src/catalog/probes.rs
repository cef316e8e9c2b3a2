//! Pointwise probes of the structures behind the catalog: Sasakian and 3-Sasakian
//! relations, nearly Kähler and almost Hermitian identities, cross-product axioms.
//!
//! Endomorphisms are stored as `e[j * n + i] = E^j_i`, so `E(∂_i) = E^j_i ∂_j`.

use std::sync::Arc;

use serde::Serialize;

use super::CatalogEntry;
use crate::error::{Error, Result};
use crate::forms::{
    codiff, cov_deriv, ext_d, ricci_jets, second_cov, wedge, wedge_power, Form, FormField,
};
use crate::geometry::{values, ChartManifold, LocalGeom, MetricFn, Region};
use crate::jets::Jet;
use crate::twistor::checks::{scale, special_defect};
use crate::twistor::{
    evaluate, killing_residual, star_killing_residual, ResidualReport, Sample, SpecialVariant,
};

fn mat_norm(g: &[f64], ginv: &[f64], e: &[f64], n: usize) -> f64 {
    // |E|² = g_{jk} g^{il} E^j_i E^k_l
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            for i in 0..n {
                for l in 0..n {
                    acc += g[j * n + k] * ginv[i * n + l] * e[j * n + i] * e[k * n + l];
                }
            }
        }
    }
    acc.max(0.0).sqrt()
}

fn raise_vec(ginv: &[f64], a: &[f64]) -> Vec<f64> {
    let n = a.len();
    (0..n)
        .map(|j| (0..n).map(|k| ginv[j * n + k] * a[k]).sum())
        .collect()
}

fn metric_sq(g: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| (0..n).map(|j| g[i * n + j] * v[i] * v[j]).sum::<f64>())
        .sum()
}

/// `| |ξ|² − 1 |`.
pub fn unit_length_residual(m: &ChartManifold, xi: &FormField, x: &[f64]) -> Result<f64> {
    let lg = LocalGeom::new(m, x, 0)?;
    let v = xi.values(x)?;
    Ok((crate::forms::inner(&lg.ginv_values(), &v, &v) - 1.0).abs())
}

/// `∇_X(dξ*) = −2 X*∧ξ*`, relative to `|ξ|`.
pub fn sasaki_eq10_residual(m: &ChartManifold, xi: &FormField, x: &[f64]) -> Result<f64> {
    special_defect(m, xi, -2.0, x, SpecialVariant::FirstOrder)
}

/// `φ^j_i = −(∇_i ξ)^j` at a point.
pub fn sasaki_phi(m: &ChartManifold, xi: &FormField, x: &[f64]) -> Result<Vec<f64>> {
    let lg = LocalGeom::new(m, x, 1)?;
    let f = xi.at(x, 1)?;
    one_form_check(&f)?;
    let nabla = cov_deriv(&lg, &f)?;
    let ginv = lg.truncate(0).ginv_values();
    let n = m.dim;
    let mut phi = vec![0.0; n * n];
    for i in 0..n {
        let up = raise_vec(&ginv, &nabla[i].values().c);
        for j in 0..n {
            phi[j * n + i] = -up[j];
        }
    }
    Ok(phi)
}

fn one_form_check(f: &Form<Jet>) -> Result<()> {
    if f.p != 1 {
        return Err(Error::Degree(format!(
            "expected a 1-form, got degree {}",
            f.p
        )));
    }
    Ok(())
}

/// `(∇_Xφ)(Y) = g(X,Y)ξ − η(Y)X` with `φ = −∇ξ`, as the norm of the defect tensor.
pub fn sasaki_eq11_residual(m: &ChartManifold, xi: &FormField, x: &[f64]) -> Result<f64> {
    let n = m.dim;
    let lg = LocalGeom::new(m, x, 2)?;
    let f = xi.at(x, 2)?;
    one_form_check(&f)?;
    let h = second_cov(&lg, &f)?;
    let lg0 = lg.truncate(0);
    let (g, ginv) = (lg0.g_values(), lg0.ginv_values());
    let eta = f.values().c;
    let xi_up = raise_vec(&ginv, &eta);
    // D^j_{ai} = −(∇²_{a,i} ξ)^j − g_{ai} ξ^j + η_i δ^j_a
    let mut acc = 0.0;
    let mut d = vec![vec![0.0; n * n]; n];
    for a in 0..n {
        for i in 0..n {
            let up = raise_vec(&ginv, &h[a][i].values().c);
            for j in 0..n {
                let delta = if j == a { 1.0 } else { 0.0 };
                d[a][j * n + i] = -up[j] - g[a * n + i] * xi_up[j] + eta[i] * delta;
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            let ab = ginv[a * n + b];
            if ab == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        for l in 0..n {
                            acc += ab
                                * g[j * n + k]
                                * ginv[i * n + l]
                                * d[a][j * n + i]
                                * d[b][k * n + l];
                        }
                    }
                }
            }
        }
    }
    Ok(acc.max(0.0).sqrt())
}

/// `φ² = −id + η⊗ξ`.
pub fn phi_squared_residual(m: &ChartManifold, xi: &FormField, x: &[f64]) -> Result<f64> {
    let n = m.dim;
    let phi = sasaki_phi(m, xi, x)?;
    let (g, ginv) = m.metric_at(x)?;
    let eta = xi.values(x)?.c;
    let xi_up = raise_vec(&ginv, &eta);
    let mut e = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let sq: f64 = (0..n).map(|k| phi[j * n + k] * phi[k * n + i]).sum();
            let delta = if i == j { 1.0 } else { 0.0 };
            e[j * n + i] = sq + delta - eta[i] * xi_up[j];
        }
    }
    Ok(mat_norm(&g, &ginv, &e, n))
}

/// `ξ*∧(dξ*)^k / vol_g` at `x`, for a `(2k+1)`-manifold.
pub fn contact_volume_ratio(m: &ChartManifold, xi: &FormField, x: &[f64]) -> Result<f64> {
    let n = m.dim;
    if n.is_multiple_of(2) || xi.p != 1 {
        return Err(Error::Degree(
            "contact volume needs a 1-form on an odd-dimensional manifold".into(),
        ));
    }
    let f = xi.at(x, 1)?;
    let top = wedge(
        &f.truncate(0),
        &wedge_power(&ext_d(&f)?.truncate(0), (n - 1) / 2)?,
    )?;
    let lg = LocalGeom::new(m, x, 0)?;
    Ok(top.c[0].value() / (m.orientation * lg.sqrt_det.value()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeStatus {
    Holds,
    Fails,
    Inconclusive,
}

/// Instance check of the converse Sasakian criterion on one entry.
#[derive(Debug, Clone, Serialize)]
pub struct ConverseProbe {
    pub status: ProbeStatus,
    pub scalar_curvature: f64,
    pub einstein_residual: f64,
    pub unit_residual: f64,
    pub killing: ResidualReport,
    pub dxi_star_killing: ResidualReport,
    pub eq10: Option<ResidualReport>,
    pub reason: String,
}

/// Scalar curvature and `|Ric − (s/n) g|` at `x`.
pub fn einstein_defect(m: &ChartManifold, x: &[f64]) -> Result<(f64, f64)> {
    let n = m.dim;
    let lg = LocalGeom::new(m, x, 2)?.truncate(0);
    let ric = values(&ricci_jets(&lg));
    let (g, ginv) = (lg.g_values(), lg.ginv_values());
    let s: f64 = (0..n * n).map(|k| ginv[k] * ric[k]).sum();
    let traceless: Vec<f64> = (0..n * n).map(|k| ric[k] - s / n as f64 * g[k]).collect();
    // |T|² = g^{ik} g^{jl} T_ij T_kl
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    acc += ginv[i * n + k]
                        * ginv[j * n + l]
                        * traceless[i * n + j]
                        * traceless[k * n + l];
                }
            }
        }
    }
    Ok((s, acc.max(0.0).sqrt()))
}

/// Einstein with `s = n(n−1)`, `ξ` unit Killing and `dξ*` conformal Killing imply
/// `∇_X dξ* = −2X*∧ξ*`. The hypotheses are checked first; if one fails the verdict is
/// inconclusive.
pub fn sasaki_converse_probe(
    entry: &CatalogEntry,
    xi: &FormField,
    sample: &Sample,
    tol: f64,
) -> Result<ConverseProbe> {
    let m = &entry.manifold;
    let n = m.dim as f64;
    let mut s_max: f64 = 0.0;
    let mut s_mean = 0.0;
    let mut unit: f64 = 0.0;
    for x in &sample.points {
        let (s, e) = einstein_defect(m, x)?;
        s_max = s_max.max(e).max((s - n * (n - 1.0)).abs());
        s_mean += s / sample.len() as f64;
        unit = unit.max(unit_length_residual(m, xi, x)?);
    }
    let killing = killing_residual(m, xi, sample, tol)?;
    let dxi = xi.exterior_d();
    let dxi_star_killing = star_killing_residual(m, &dxi, sample, tol)?;
    let mut failed = Vec::new();
    if s_max > tol {
        failed.push(format!("not Einstein with s = n(n−1) (defect {s_max:.2e})"));
    }
    if unit > tol {
        failed.push(format!("ξ is not unit ({unit:.2e})"));
    }
    if !killing.pass {
        failed.push("ξ* is not Killing".into());
    }
    if !dxi_star_killing.pass {
        failed.push("dξ* is not conformal Killing".into());
    }
    if !failed.is_empty() {
        return Ok(ConverseProbe {
            status: ProbeStatus::Inconclusive,
            scalar_curvature: s_mean,
            einstein_residual: s_max,
            unit_residual: unit,
            killing,
            dxi_star_killing,
            eq10: None,
            reason: failed.join("; "),
        });
    }
    let eq10 = evaluate(format!("eq10:{}", xi.label), tol, sample, |x| {
        sasaki_eq10_residual(m, xi, x)
    })?;
    Ok(ConverseProbe {
        status: if eq10.pass {
            ProbeStatus::Holds
        } else {
            ProbeStatus::Fails
        },
        scalar_curvature: s_mean,
        einstein_residual: s_max,
        unit_residual: unit,
        killing,
        dxi_star_killing,
        reason: String::new(),
        eq10: Some(eq10),
    })
}

/// Metric duals `ξ_i = η_i^♯` at `x`.
fn vector_fields(m: &ChartManifold, etas: &[FormField], x: &[f64]) -> Result<Vec<Vec<f64>>> {
    let (_, ginv) = m.metric_at(x)?;
    etas.iter()
        .map(|e| Ok(raise_vec(&ginv, &e.values(x)?.c)))
        .collect()
}

/// SO(3) relations of a 3-Sasakian triple at a point.
#[derive(Debug, Clone, Serialize)]
pub struct So3Report {
    /// `max |η_i(ξ_j) − δ_ij|`
    pub orthonormality: f64,
    /// `λ` in `[ξ_1, ξ_2] = λ ξ_3`
    pub structure_constant: f64,
    /// `max |[ξ_i, ξ_j] − λ ξ_k|` over cyclic `(i, j, k)`
    pub bracket_residual: f64,
}

pub fn so3_relations(m: &ChartManifold, etas: &[FormField; 3], x: &[f64]) -> Result<So3Report> {
    let n = m.dim;
    let v = vector_fields(m, etas, x)?;
    let mut orth: f64 = 0.0;
    for (i, e) in etas.iter().enumerate() {
        let ev = e.values(x)?.c;
        for (j, vj) in v.iter().enumerate() {
            let pair: f64 = ev.iter().zip(vj).map(|(a, b)| a * b).sum();
            orth = orth.max((pair - if i == j { 1.0 } else { 0.0 }).abs());
        }
    }
    // [ξ_i, ξ_j] = ∇_{ξ_i}ξ_j − ∇_{ξ_j}ξ_i
    let lg = LocalGeom::new(m, x, 1)?;
    let ginv = lg.truncate(0).ginv_values();
    let nab: Vec<Vec<Vec<f64>>> = etas
        .iter()
        .map(|e| {
            let f = e.at(x, 1)?;
            Ok(cov_deriv(&lg, &f)?
                .iter()
                .map(|d| raise_vec(&ginv, &d.values().c))
                .collect())
        })
        .collect::<Result<_>>()?;
    let along = |i: usize, j: usize| -> Vec<f64> {
        (0..n)
            .map(|c| (0..n).map(|a| v[i][a] * nab[j][a][c]).sum())
            .collect()
    };
    let bracket = |i: usize, j: usize| -> Vec<f64> {
        along(i, j)
            .iter()
            .zip(along(j, i))
            .map(|(a, b)| a - b)
            .collect()
    };
    let (g, _) = m.metric_at(x)?;
    let b12 = bracket(0, 1);
    let lambda = {
        let num: f64 = (0..n)
            .map(|a| (0..n).map(|b| g[a * n + b] * b12[a] * v[2][b]).sum::<f64>())
            .sum();
        num / metric_sq(&g, &v[2])
    };
    let mut res: f64 = 0.0;
    for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let b = bracket(i, j);
        let d: Vec<f64> = b.iter().zip(&v[k]).map(|(a, c)| a - lambda * c).collect();
        res = res.max(metric_sq(&g, &d).sqrt());
    }
    Ok(So3Report {
        orthonormality: orth,
        structure_constant: lambda,
        bracket_residual: res,
    })
}

/// `J^k_i = ω_{ij} g^{jk}` from `ω(X, Y) = g(JX, Y)`.
pub fn almost_complex_from_form(g_inv: &[f64], omega: &Form<f64>) -> Result<Vec<f64>> {
    if omega.p != 2 {
        return Err(Error::Degree(
            "almost complex structure needs a 2-form".into(),
        ));
    }
    let n = omega.n;
    let mut j = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            j[k * n + i] = (0..n).map(|b| omega.get(&[i, b]) * g_inv[b * n + k]).sum();
        }
    }
    Ok(j)
}

/// `|J² + id|` for the structure defined by a 2-form and the metric.
pub fn j_squared_residual(m: &ChartManifold, omega: &FormField, x: &[f64]) -> Result<f64> {
    let n = m.dim;
    let (g, ginv) = m.metric_at(x)?;
    let j = almost_complex_from_form(&ginv, &omega.values(x)?)?;
    let e: Vec<f64> = (0..n * n)
        .map(|k| {
            let (r, c) = (k / n, k % n);
            (0..n).map(|l| j[r * n + l] * j[l * n + c]).sum::<f64>()
                + if r == c { 1.0 } else { 0.0 }
        })
        .collect();
    Ok(mat_norm(&g, &ginv, &e, n))
}

/// `sup_X |X⌟∇_Xω| / |X|²` over the given directions, relative to `|ω|`.
pub fn nearly_parallel_residual(
    m: &ChartManifold,
    omega: &FormField,
    x: &[f64],
    dirs: &[Vec<f64>],
) -> Result<f64> {
    let lg = LocalGeom::new(m, x, 1)?;
    let f = omega.at(x, 1)?;
    let nabla: Vec<Form<f64>> = cov_deriv(&lg, &f)?.iter().map(Form::values).collect();
    let (g, ginv) = (lg.truncate(0).g_values(), lg.truncate(0).ginv_values());
    let sc = scale(&ginv, &f.values());
    let mut worst: f64 = 0.0;
    for v in dirs {
        let mut nx = Form::zero(m.dim, f.p, &0.0);
        for (a, va) in v.iter().enumerate() {
            nx.axpy(*va, &nabla[a]);
        }
        let c = crate::forms::interior(v, &nx)?;
        worst = worst.max(crate::forms::norm(&ginv, &c) / metric_sq(&g, v).max(1e-300));
    }
    Ok(worst / sc)
}

/// Both sides of `Λ(dω) = J(d*ω)` on an almost Hermitian manifold, with
/// `Λ = ½ Σ Je_i⌟e_i⌟` and `(Jα)(X) = −α(JX)` on 1-forms.
#[derive(Debug, Clone, Serialize)]
pub struct AlmostHermitianIdentity {
    pub lambda_d_omega: Vec<f64>,
    pub j_dstar_omega: Vec<f64>,
    /// `|Λ(dω) − J(d*ω)|`
    pub residual: f64,
    /// `max(|Λ(dω)|, |J(d*ω)|)`
    pub size: f64,
}

pub fn almost_hermitian_identity(
    m: &ChartManifold,
    omega: &FormField,
    x: &[f64],
) -> Result<AlmostHermitianIdentity> {
    let n = m.dim;
    let lg = LocalGeom::new(m, x, 1)?;
    let f = omega.at(x, 1)?;
    let ginv = lg.truncate(0).ginv_values();
    let j = almost_complex_from_form(&ginv, &f.values())?;
    let dw = ext_d(&f)?.values();
    let ds = codiff(&lg, &f)?.values();
    // Λ(α)_c = ½ Σ_i α(e_i, Je_i, ∂_c) = ½ g^{ab} J^k_b α_{a k c}
    let lam: Vec<f64> = (0..n)
        .map(|c| {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let gab = ginv[a * n + b];
                    if gab == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        acc += 0.5 * gab * j[k * n + b] * dw.get(&[a, k, c]);
                    }
                }
            }
            acc
        })
        .collect();
    // (Jα)_c = −α(J∂_c) = −J^k_c α_k
    let jd: Vec<f64> = (0..n)
        .map(|c| -(0..n).map(|k| j[k * n + c] * ds.c[k]).sum::<f64>())
        .collect();
    let diff: Vec<f64> = lam.iter().zip(&jd).map(|(a, b)| a - b).collect();
    let nrm = |v: &[f64]| {
        crate::forms::norm(
            &ginv,
            &Form {
                n,
                p: 1,
                c: v.to_vec(),
            },
        )
    };
    Ok(AlmostHermitianIdentity {
        residual: nrm(&diff),
        size: nrm(&lam).max(nrm(&jd)),
        lambda_d_omega: lam,
        j_dstar_omega: jd,
    })
}

/// Flat `ℝ⁴` with a point-dependent orthogonal almost complex structure
/// `J = U J₀ Uᵀ`, `U` a product of rotations in the `(0,2)` and `(1,3)` planes by angles
/// `a·x₀ + a·sin x₁` and `a·x₂x₃`. Returns the manifold and the Kähler form.
pub fn perturbed_hermitian_r4(a: f64) -> (ChartManifold, FormField) {
    let n = 4;
    let metric: MetricFn = Arc::new(move |x: &[Jet]| {
        Ok((0..n * n)
            .map(|k| x[0].constant_like(if k / n == k % n { 1.0 } else { 0.0 }))
            .collect())
    });
    let m = ChartManifold::single(
        "r4_hermitian",
        n,
        metric,
        Region::All,
        Region::Ball { radius: 1.0 },
    );
    let omega = FormField::new(
        n,
        2,
        format!("perturbed_kahler:{a}"),
        Arc::new(move |u: &[Jet]| {
            let mut t1 = u[1].sin().scale(a);
            t1.axpy(a, &u[0]);
            let t2 = u[2].mul_jet(&u[3]).scale(a);
            let zero = u[0].zero_like();
            // U as a dense jet matrix, rows r, columns c
            let mut um = vec![zero.clone(); n * n];
            let (c1, s1, c2, s2) = (t1.cos(), t1.sin(), t2.cos(), t2.sin());
            um[0] = c1.clone();
            um[2] = s1.scale(-1.0);
            um[2 * n] = s1;
            um[2 * n + 2] = c1;
            um[n + 1] = c2.clone();
            um[n + 3] = s2.scale(-1.0);
            um[3 * n + 1] = s2;
            um[3 * n + 3] = c2;
            // J₀ e₀ = e₁, J₀ e₂ = e₃: J₀[r][c] with J₀(e_c) = Σ_r J₀[r][c] e_r
            let mut j0 = vec![0.0; n * n];
            j0[n] = 1.0;
            j0[1] = -1.0;
            j0[3 * n + 2] = 1.0;
            j0[2 * n + 3] = -1.0;
            // J = U J₀ Uᵀ; ω_{ij} = g(Je_i, e_j) = J[j][i]
            let mut uj = vec![zero.clone(); n * n];
            for r in 0..n {
                for c in 0..n {
                    for k in 0..n {
                        if j0[k * n + c] != 0.0 {
                            uj[r * n + c].axpy(j0[k * n + c], &um[r * n + k]);
                        }
                    }
                }
            }
            let mut jm = vec![zero.clone(); n * n];
            for r in 0..n {
                for c in 0..n {
                    for k in 0..n {
                        jm[r * n + c].fma(1.0, &uj[r * n + k], &um[c * n + k]);
                    }
                }
            }
            let mut form = Form::zero(n, 2, &zero);
            for i in 0..n {
                for j in i + 1..n {
                    form.add_at(&[i, j], &jm[j * n + i]);
                }
            }
            Ok(form)
        }),
    );
    (m, omega)
}

/// Cross-product axioms at a point: `max_i |⟨P, v_i⟩|` and `| |P|² − det⟨v_i, v_j⟩ |`.
pub fn cross_product_axioms(
    cp: &super::CrossProduct,
    m: &ChartManifold,
    x: &[f64],
    vs: &[Vec<f64>],
) -> Result<(f64, f64)> {
    let p = cp.apply(x, vs)?;
    let (g, _) = m.metric_at(x)?;
    let n = m.dim;
    let ip = |a: &[f64], b: &[f64]| -> f64 {
        (0..n)
            .map(|i| (0..n).map(|j| g[i * n + j] * a[i] * b[j]).sum::<f64>())
            .sum()
    };
    let orth = vs.iter().map(|v| ip(&p, v).abs()).fold(0.0, f64::max);
    let r = vs.len();
    let gram = nalgebra::DMatrix::from_fn(r, r, |i, j| ip(&vs[i], &vs[j]));
    let det = if r == 0 { 1.0 } else { gram.determinant() };
    Ok((orth, (ip(&p, &p) - det).abs()))
}
