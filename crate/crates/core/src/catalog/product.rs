//! Flat tori, Riemannian products, Hodge duals and volume forms of catalog fields.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::forms::{hodge_star, Form, FormField};
use crate::geometry::{invert_spd, ChartManifold, MetricFn, Region};
use crate::jets::Jet;

/// `★ψ` computed from the metric jets at each evaluation.
pub fn star_field(metric: &MetricFn, orientation: f64, field: &FormField) -> FormField {
    let (metric, f) = (metric.clone(), field.clone());
    let n = field.n;
    FormField::new(
        n,
        n - field.p,
        format!("*{}", field.label),
        Arc::new(move |u: &[Jet]| {
            let g = metric(u)?;
            let (ginv, det) = invert_spd(&g, n)?;
            let sd = det.sqrt()?;
            Ok(hodge_star(&g, &ginv, &sd, orientation, &f.eval(u)?))
        }),
    )
}

/// Riemannian volume form `★1`.
pub fn volume_field(m: &ChartManifold) -> FormField {
    let one = FormField::constant("1", Form::from_coeffs(m.dim, 0, vec![1.0]).expect("scalar"));
    star_field(m.metric_fn(), m.orientation, &one).relabel(format!("vol({})", m.id))
}

/// Flat torus `ℝⁿ / 2πℤⁿ` in the fundamental-domain chart.
pub fn flat_torus(n: usize) -> ChartManifold {
    let metric: MetricFn = Arc::new(move |x: &[Jet]| {
        Ok((0..n * n)
            .map(|k| x[0].constant_like(if k / n == k % n { 1.0 } else { 0.0 }))
            .collect())
    });
    ChartManifold::single(
        &format!("t{n}"),
        n,
        metric,
        Region::All,
        Region::Cube {
            lo: vec![0.0; n],
            hi: vec![2.0 * PI; n],
        },
    )
}

/// Riemannian product with the block metric on concatenated coordinates.
pub fn product_manifold(m1: &ChartManifold, m2: &ChartManifold) -> ChartManifold {
    let (n1, n2) = (m1.dim, m2.dim);
    let n = n1 + n2;
    let (g1, g2) = (m1.metric_fn().clone(), m2.metric_fn().clone());
    let metric: MetricFn = Arc::new(move |x: &[Jet]| {
        let a = g1(&x[..n1])?;
        let b = g2(&x[n1..])?;
        let mut g: Vec<Jet> = (0..n * n).map(|_| x[0].zero_like()).collect();
        for i in 0..n1 {
            for j in 0..n1 {
                g[i * n + j] = a[i * n1 + j].clone();
            }
        }
        for i in 0..n2 {
            for j in 0..n2 {
                g[(n1 + i) * n + n1 + j] = b[i * n2 + j].clone();
            }
        }
        Ok(g)
    });
    let id = format!("{}x{}", m1.id, m2.id);
    let c1 = m1.chart();
    let c2 = m2.chart();
    let domain = Region::Product(Box::new(c1.domain.clone()), Box::new(c2.domain.clone()), n1);
    let sample = Region::Product(Box::new(c1.sample.clone()), Box::new(c2.sample.clone()), n1);
    let mut m = ChartManifold::single(&id, n, metric, domain, sample);
    m.orientation = m1.orientation * m2.orientation;
    m
}

fn embed_form(f: &Form<Jet>, n: usize, offset: usize, proto: &Jet) -> Form<Jet> {
    let mut out = Form::zero(n, f.p, &proto.zero_like());
    for (idx, v) in f.indices().iter().zip(&f.c) {
        let shifted: Vec<usize> = idx.iter().map(|i| i + offset).collect();
        out.add_at(&shifted, v);
    }
    out
}

/// Pullback of a field on factor `which` (1 or 2) of `M₁ × M₂`.
pub fn pullback_factor(field: &FormField, n1: usize, n2: usize, which: usize) -> Result<FormField> {
    let (lo, hi) = match which {
        1 => (0, n1),
        2 => (n1, n1 + n2),
        _ => return Err(Error::Invalid(format!("factor index {which}"))),
    };
    if field.n != hi - lo {
        return Err(Error::Invalid(format!(
            "field `{}` does not live on factor {which}",
            field.label
        )));
    }
    let f = field.clone();
    let n = n1 + n2;
    Ok(FormField::new(
        n,
        field.p,
        format!("pr{which}*{}", field.label),
        Arc::new(move |u: &[Jet]| {
            let inner = f.eval(&u[lo..hi])?;
            Ok(embed_form(&inner, n, lo, &u[0]))
        }),
    ))
}

/// Constant parallel form `dx^I` on a flat torus.
pub fn parallel_form(n: usize, idx: &[usize]) -> Result<FormField> {
    if idx.windows(2).any(|w| w[0] >= w[1]) || idx.iter().any(|&i| i >= n) {
        return Err(Error::Invalid(format!(
            "multi-index {idx:?} for dimension {n}"
        )));
    }
    let label = format!(
        "dx{}",
        idx.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join("")
    );
    Ok(FormField::constant(label, Form::basis(n, idx)))
}
