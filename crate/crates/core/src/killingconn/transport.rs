//! Transport of `E^p`-sections along chart curves by the Killing connection.
//!
//! In coordinates a section `ê` is `∇̃`-parallel along `γ` when
//! `dê/dt = A(γ')ê − Γ(γ')·ê`, the last term being the Christoffel
//! derivation on each slot. The ODE is integrated by classical RK4, piece by
//! piece so that corners of a chained curve fall on step boundaries.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::Serialize;

use super::{check_degree, e_rank, killing_derivative, ESection, Route};
use crate::error::{Error, Result};
use crate::forms::{derivation, Form};
use crate::geometry::{rk4_step, ChartManifold, LocalGeom};
use crate::jets::Jet;

/// Position and velocity of a chart curve at parameter `t`.
pub type CurveFn = Arc<dyn Fn(f64) -> (Vec<f64>, Vec<f64>) + Send + Sync>;

/// A chart curve made of smooth pieces, each on its own parameter interval.
#[derive(Clone)]
pub struct Curve {
    pieces: Vec<(CurveFn, f64, f64)>,
}

impl std::fmt::Debug for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let spans: Vec<_> = self.pieces.iter().map(|(_, a, b)| (*a, *b)).collect();
        write!(f, "Curve({spans:?})")
    }
}

impl Curve {
    pub fn new(f: CurveFn, t0: f64, t1: f64) -> Curve {
        Curve {
            pieces: vec![(f, t0, t1)],
        }
    }

    /// Straight chart segment from `a` to `b` over `t ∈ [0, 1]`.
    pub fn segment(a: &[f64], b: &[f64]) -> Curve {
        let (a, b) = (a.to_vec(), b.to_vec());
        let v: Vec<f64> = a.iter().zip(&b).map(|(x, y)| y - x).collect();
        Curve::new(
            Arc::new(move |t| {
                let x = a.iter().zip(&v).map(|(x, d)| x + t * d).collect();
                (x, v.clone())
            }),
            0.0,
            1.0,
        )
    }

    /// The curves traversed one after the other.
    pub fn chain(curves: Vec<Curve>) -> Curve {
        Curve {
            pieces: curves.into_iter().flat_map(|c| c.pieces).collect(),
        }
    }

    /// Great circle `cos t·y₀ + sin t·v₀` on the unit sphere in the north
    /// stereographic chart, with `y₀`, `v₀` orthonormal in `ℝ^{n+1}`.
    pub fn great_circle(y0: &[f64], v0: &[f64], t1: f64) -> Curve {
        use crate::catalog::ambient::{stereographic, stereographic_velocity};
        let (y0, v0) = (y0.to_vec(), v0.to_vec());
        Curve::new(
            Arc::new(move |t| {
                let (c, s) = (t.cos(), t.sin());
                let y: Vec<f64> = y0.iter().zip(&v0).map(|(a, b)| c * a + s * b).collect();
                let dy: Vec<f64> = y0.iter().zip(&v0).map(|(a, b)| -s * a + c * b).collect();
                (stereographic(&y), stereographic_velocity(&y, &dy))
            }),
            0.0,
            t1,
        )
    }

    pub fn pieces(&self) -> usize {
        self.pieces.len()
    }

    /// Position and velocity on piece `i` at its own parameter `t`.
    pub fn at_piece(&self, i: usize, t: f64) -> (Vec<f64>, Vec<f64>) {
        (self.pieces[i].0)(t)
    }

    /// Start point of the first piece.
    pub fn start(&self) -> Vec<f64> {
        let (f, t0, _) = &self.pieces[0];
        f(*t0).0
    }

    /// End point of the last piece.
    pub fn end(&self) -> Vec<f64> {
        let (f, _, t1) = &self.pieces[self.pieces.len() - 1];
        f(*t1).0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TransportStatus {
    Complete,
    ChartExit { piece: usize, t: f64 },
}

#[derive(Clone, Debug)]
pub struct TransportResult {
    pub section: ESection,
    pub status: TransportStatus,
    /// RK4 steps completed.
    pub steps: usize,
}

fn slot_forms(n: usize, p: usize, y: &[f64]) -> Result<ESection> {
    ESection::from_vec(n, p, y)
}

/// `dê/dt` at the curve parameter `t` for the coordinates `y`.
fn rate(
    m: &ChartManifold,
    curve: &Curve,
    piece: usize,
    p: usize,
    route: Route,
    t: f64,
    y: &[f64],
) -> Result<Vec<f64>> {
    let n = m.dim;
    let (x, v) = curve.at_piece(piece, t);
    let lg = LocalGeom::new(m, &x, 3)?;
    let e = slot_forms(n, p, y)?;
    let a = killing_derivative(&lg, &e, &v, route)?;
    // Γ(v) on every slot
    let mut endo = vec![0.0; n * n];
    for (i, vi) in v.iter().enumerate() {
        for (o, g) in endo.iter_mut().zip(lg.gamma_endo(i)) {
            *o += vi * g.value();
        }
    }
    let ej: Vec<Jet> = endo.iter().map(|&w| Jet::constant(n, 0, w)).collect();
    let corr = |f: &Form<f64>| -> Form<f64> {
        if f.p == 0 {
            return f.zero_like();
        }
        derivation(&ej, &f.to_jets(n, 0)).values()
    };
    let out = ESection {
        psi: a.psi.sub(&corr(&e.psi)),
        dpsi: a.dpsi.sub(&corr(&e.dpsi)),
        dstar_psi: a.dstar_psi.sub(&corr(&e.dstar_psi)),
        ddstar_psi: a.ddstar_psi.sub(&corr(&e.ddstar_psi)),
    };
    Ok(out.to_vec())
}

/// Transport `section0` along `curve` with `steps` RK4 steps on every piece.
pub fn transport_e(
    m: &ChartManifold,
    section0: &ESection,
    curve: &Curve,
    steps: usize,
) -> Result<TransportResult> {
    let (n, p) = (m.dim, section0.p());
    check_degree(n, p)?;
    if section0.n() != n {
        return Err(Error::Invalid("section of the wrong dimension".into()));
    }
    if steps == 0 {
        return Err(Error::Invalid("transport needs at least one step".into()));
    }
    let route = Route::for_degree(n, p)?;
    let mut y = section0.to_vec();
    let mut done = 0;
    for (i, (_, t0, t1)) in curve.pieces.iter().enumerate() {
        let h = (t1 - t0) / steps as f64;
        let f = |t: f64, y: &[f64]| rate(m, curve, i, p, route, t, y);
        for k in 0..steps {
            let t = t0 + k as f64 * h;
            match rk4_step(&f, t, &y, h) {
                Ok(next) => y = next,
                Err(Error::Domain { .. }) => {
                    return Ok(TransportResult {
                        section: slot_forms(n, p, &y)?,
                        status: TransportStatus::ChartExit { piece: i, t },
                        steps: done,
                    })
                }
                Err(e) => return Err(e),
            }
            done += 1;
        }
    }
    Ok(TransportResult {
        section: slot_forms(n, p, &y)?,
        status: TransportStatus::Complete,
        steps: done,
    })
}

/// The transport map along `curve` as a matrix on `E^p` coordinates.
pub fn transport_matrix(
    m: &ChartManifold,
    p: usize,
    curve: &Curve,
    steps: usize,
) -> Result<DMatrix<f64>> {
    let n = m.dim;
    let r = e_rank(n, p);
    let mut out = DMatrix::zeros(r, r);
    for k in 0..r {
        let res = transport_e(m, &ESection::basis(n, p, k)?, curve, steps)?;
        if let TransportStatus::ChartExit { piece, t } = res.status {
            return Err(Error::Invalid(format!(
                "curve leaves the chart on piece {piece} at t = {t}"
            )));
        }
        for (i, v) in res.section.to_vec().iter().enumerate() {
            out[(i, k)] = *v;
        }
    }
    Ok(out)
}
