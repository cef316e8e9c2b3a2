//! Numerical dimension of a span of conformal Killing forms against `C(n+2, p+1)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::{e_rank, transport_matrix, Curve};
use crate::catalog::sphere_ckf_basis;
use crate::error::{Error, Result};
use crate::forms::FormField;
use crate::geometry::ChartManifold;
use crate::multiindex::binomial;
use crate::twistor::Sample;

/// Relative singular-value threshold for the numerical rank.
pub const RANK_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The bound is attained.
    Equal,
    Below,
    /// More independent candidates than the bound allows.
    Exceeds,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionReport {
    pub n: usize,
    pub p: usize,
    pub candidates: usize,
    pub rank: usize,
    pub bound: usize,
    pub verdict: Verdict,
    /// Singular values of the evaluation matrix, descending.
    pub singular_values: Vec<f64>,
}

/// Rank of the candidates' values over the sample: singular values above
/// `RANK_TOLERANCE · σ_max`, from the eigenvalues of the candidate Gram matrix.
pub fn dimension_count(
    m: &ChartManifold,
    p: usize,
    candidates: &[FormField],
    sample: &Sample,
) -> Result<DimensionReport> {
    let n = m.dim;
    if candidates.iter().any(|c| c.n != n || c.p != p) {
        return Err(Error::Degree("candidate of the wrong degree".into()));
    }
    let width = binomial(n, p) * sample.len();
    if width < candidates.len() {
        return Err(Error::RankUnstable(format!(
            "{} values for {} candidates",
            width,
            candidates.len()
        )));
    }
    let k = candidates.len();
    let mut rows = DMatrix::zeros(k, width);
    for (i, c) in candidates.iter().enumerate() {
        let mut col = 0;
        for x in &sample.points {
            for v in c.values(x)?.c {
                rows[(i, col)] = v;
                col += 1;
            }
        }
    }
    let gram = &rows * rows.transpose();
    let eig = SymmetricEigen::new(gram);
    let mut sv: Vec<f64> = eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANK_TOLERANCE * smax).count();
    let bound = binomial(n + 2, p + 1);
    let verdict = match rank.cmp(&bound) {
        std::cmp::Ordering::Equal => Verdict::Equal,
        std::cmp::Ordering::Less => Verdict::Below,
        std::cmp::Ordering::Greater => Verdict::Exceeds,
    };
    Ok(DimensionReport {
        n,
        p,
        candidates: k,
        rank,
        bound,
        verdict,
        singular_values: sv,
    })
}

/// The sphere basis split into coclosed (Killing) and closed (∗-Killing) parts.
pub fn sphere_candidates(n: usize, p: usize) -> Result<(Vec<FormField>, Vec<FormField>)> {
    let basis = sphere_ckf_basis(n, p)?;
    let k = binomial(n + 1, p + 1);
    let fields: Vec<FormField> = basis.into_iter().map(|f| f.field).collect();
    let (a, b) = fields.split_at(k);
    Ok((a.to_vec(), b.to_vec()))
}

/// Germs of conformal Killing forms at a point that close up along every
/// period of a chart with periodic identification.
#[derive(Clone, Debug, Serialize)]
pub struct GermReport {
    pub n: usize,
    pub p: usize,
    /// Dimension of the common fixed space of the period transports.
    pub rank: usize,
    pub bound: usize,
    pub verdict: Verdict,
    /// Singular values of the stacked `H_i − 1`, descending.
    pub singular_values: Vec<f64>,
}

/// Threshold on singular values of `H_i − 1`, relative to the largest.
pub const GERM_TOLERANCE: f64 = 1e-6;

/// Transport every germ at `x0` along the segments `x0 → x0 + L_i` and count
/// those returning to themselves. On a torus chart with identity transitions
/// these are the germs that descend to global forms.
pub fn periodic_germ_rank(
    m: &ChartManifold,
    p: usize,
    x0: &[f64],
    periods: &[Vec<f64>],
    steps: usize,
) -> Result<GermReport> {
    let n = m.dim;
    if periods.is_empty() || periods.iter().any(|l| l.len() != n) {
        return Err(Error::Invalid(
            "periods must be nonempty vectors of the chart dimension".into(),
        ));
    }
    let r = e_rank(n, p);
    let mut stacked = DMatrix::zeros(r * periods.len(), r);
    for (k, l) in periods.iter().enumerate() {
        let x1: Vec<f64> = x0.iter().zip(l).map(|(a, b)| a + b).collect();
        let h = transport_matrix(m, p, &Curve::segment(x0, &x1), steps)?;
        let d = h - DMatrix::<f64>::identity(r, r);
        stacked.view_mut((k * r, 0), (r, r)).copy_from(&d);
    }
    let mut sv: Vec<f64> = stacked.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let smax = sv.first().copied().unwrap_or(0.0);
    let moved = sv
        .iter()
        .filter(|&&s| s > GERM_TOLERANCE * smax.max(1.0))
        .count();
    let rank = r - moved;
    let bound = binomial(n + 2, p + 1);
    let verdict = match rank.cmp(&bound) {
        std::cmp::Ordering::Equal => Verdict::Equal,
        std::cmp::Ordering::Less => Verdict::Below,
        std::cmp::Ordering::Greater => Verdict::Exceeds,
    };
    Ok(GermReport {
        n,
        p,
        rank,
        bound,
        verdict,
        singular_values: sv,
    })
}
