//! Round spheres in stereographic charts and forms induced from the flat cone `ℝ^{n+1}`.
//!
//! The inverse stereographic map from the north pole is
//! `F(x) = (2x, |x|² − 1) / (1 + |x|²)`, the south chart flips the last
//! coordinate, and the charts are related by `x ↦ x / |x|²`. The cone over the
//! unit sphere is `ℝ^{n+1}∖{0}` through `Φ(x, r) = r F(x)`, so a constant
//! `(p+1)`-form `Ω` pulls back to `r^p dr ∧ F*(y⌟Ω) + r^{p+1} F*Ω`.

use std::sync::Arc;

use crate::error::Result;
use crate::forms::field::MapWithJacobian;
use crate::forms::{interior, Form, FormField};
use crate::geometry::{Chart, ChartManifold, MetricFn, Region, TransitionFnDebug};
use crate::jets::Jet;

/// Radius of the coordinate ball used for sampling stereographic charts.
pub const STEREO_SAMPLE_RADIUS: f64 = 2.0;

/// A form field on flat `ℝ^N`, written against ambient coordinate jets.
pub type AmbientField = Arc<dyn Fn(&[Jet]) -> Result<Form<Jet>> + Send + Sync>;

fn norm_sq(x: &[Jet]) -> Jet {
    let mut s = x[0].zero_like();
    for v in x {
        s.fma(1.0, v, v);
    }
    s
}

/// `(F(x), dF(x))` for the north (`south = false`) or south chart.
pub fn inverse_stereographic(x: &[Jet], south: bool) -> Result<(Vec<Jet>, Vec<Jet>)> {
    let n = x.len();
    let s = norm_sq(x);
    let inv = (&s + 1.0).recip()?;
    let inv2 = &inv * &inv;
    let sign = if south { -1.0 } else { 1.0 };
    let mut y: Vec<Jet> = x.iter().map(|xi| (xi * &inv).scale(2.0)).collect();
    y.push((&(&s + -1.0) * &inv).scale(sign));
    let mut jac = Vec::with_capacity((n + 1) * n);
    for i in 0..n {
        for a in 0..n {
            let mut v = (&x[i] * &x[a]).mul_jet(&inv2).scale(-4.0);
            if i == a {
                v.axpy(2.0, &inv);
            }
            jac.push(v);
        }
    }
    for a in 0..n {
        jac.push((&x[a] * &inv2).scale(4.0 * sign));
    }
    Ok((y, jac))
}

/// Stereographic projection of a unit vector (north chart).
pub fn stereographic(y: &[f64]) -> Vec<f64> {
    let n = y.len() - 1;
    let d = 1.0 - y[n];
    y[..n].iter().map(|v| v / d).collect()
}

/// Chart velocity of a tangent vector `v` at the unit vector `y` (north chart).
pub fn stereographic_velocity(y: &[f64], v: &[f64]) -> Vec<f64> {
    let n = y.len() - 1;
    let d = 1.0 - y[n];
    (0..n).map(|i| v[i] / d + y[i] * v[n] / (d * d)).collect()
}

/// Round metric `4 δ / (1 + |x|²)²` with sectional curvature 1.
pub fn sphere_metric(n: usize) -> MetricFn {
    Arc::new(move |x: &[Jet]| {
        let s = norm_sq(x);
        let f = (&s + 1.0).recip()?;
        let conf = (&f * &f).scale(4.0);
        Ok((0..n * n)
            .map(|k| {
                if k / n == k % n {
                    conf.clone()
                } else {
                    x[0].zero_like()
                }
            })
            .collect())
    })
}

/// Unit sphere `Sⁿ` with north and south stereographic charts.
pub fn sphere(n: usize) -> ChartManifold {
    let metric = sphere_metric(n);
    let chart = |id: &str| Chart {
        id: id.to_string(),
        metric: metric.clone(),
        domain: Region::All,
        sample: Region::Ball {
            radius: STEREO_SAMPLE_RADIUS,
        },
    };
    let transition = Arc::new(|x: &[Jet]| -> Result<Vec<Jet>> {
        let s = norm_sq(x).recip()?;
        Ok(x.iter().map(|v| v * &s).collect())
    });
    ChartManifold {
        id: format!("s{n}"),
        dim: n,
        charts: vec![chart(&format!("s{n}:north")), chart(&format!("s{n}:south"))],
        orientation: 1.0,
        transition: Some(TransitionFnDebug(transition)),
    }
}

pub fn stereo_map(south: bool) -> MapWithJacobian {
    Arc::new(move |x: &[Jet]| inverse_stereographic(x, south))
}

/// `F*α` on `Sⁿ` for an ambient field `α` on `ℝ^{n+1}`.
pub fn sphere_pullback(
    n: usize,
    p: usize,
    label: &str,
    ambient: AmbientField,
    south: bool,
) -> FormField {
    let amb = FormField::new(n + 1, p, format!("{label}@R{}", n + 1), ambient);
    amb.pullback(n, label, stereo_map(south))
}

/// The ambient field `y ⌟ Ω` for a constant form `Ω`.
pub fn radial_interior(omega: Form<f64>) -> AmbientField {
    Arc::new(move |y: &[Jet]| {
        let om = Form {
            n: omega.n,
            p: omega.p,
            c: omega.c.iter().map(|&v| y[0].constant_like(v)).collect(),
        };
        interior(y, &om)
    })
}

/// The constant ambient field `Ω`.
pub fn constant_ambient(omega: Form<f64>) -> AmbientField {
    Arc::new(move |y: &[Jet]| {
        Ok(Form {
            n: omega.n,
            p: omega.p,
            c: omega.c.iter().map(|&v| y[0].constant_like(v)).collect(),
        })
    })
}

/// Special Killing `p`-form `F*(y⌟Ω)` on `Sⁿ` from a constant `(p+1)`-form on `ℝ^{n+1}`
/// (the `dr` part of the cone decomposition).
pub fn from_flat_parallel_form(n: usize, omega: &Form<f64>, label: &str) -> FormField {
    sphere_pullback(n, omega.p - 1, label, radial_interior(omega.clone()), false)
}

/// `F*Ω`, the horizontal part of the cone decomposition; equals `d(F*(y⌟Ω)) / (p+1)`.
pub fn horizontal_part(n: usize, omega: &Form<f64>, label: &str) -> FormField {
    sphere_pullback(n, omega.p, label, constant_ambient(omega.clone()), false)
}

/// Same as [`from_flat_parallel_form`] in the south chart.
pub fn from_flat_parallel_form_south(n: usize, omega: &Form<f64>, label: &str) -> FormField {
    sphere_pullback(n, omega.p - 1, label, radial_interior(omega.clone()), true)
}

/// Chart data `(x₀, v₀)` of a unit-speed great circle on `S^n` whose height `y_n`
/// stays below `max_height < 1`, so the whole circle lies in the north chart.
pub fn great_circle_start<R: rand::Rng>(
    n: usize,
    max_height: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    loop {
        let mut a: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
        a.iter_mut().for_each(|v| *v /= na);
        let ab: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        b.iter_mut().zip(&a).for_each(|(v, w)| *v -= ab * w);
        let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        if nb < 1e-3 {
            continue;
        }
        b.iter_mut().for_each(|v| *v /= nb);
        // the circle cos t·a + sin t·b reaches height |(a_n, b_n)|
        if (a[n] * a[n] + b[n] * b[n]).sqrt() <= max_height {
            return (stereographic(&a), stereographic_velocity(&a, &b));
        }
    }
}
