//! Named forms on round spheres, all extracted from constant forms on the flat cone.

use crate::error::{Error, Result};
use crate::forms::{Form, FormField};
use crate::multiindex::{binomial, combos};

use super::ambient::{
    constant_ambient, from_flat_parallel_form, from_flat_parallel_form_south, horizontal_part,
    sphere, sphere_pullback,
};
use super::product::star_field;
use super::structures::{
    associative_form, cayley_form, hyperkahler_triple, kahler_form, wedge_powers,
};
use super::{NamedForm, Property};

/// Special Killing form `F*(y⌟Ω)` with its south-chart twin.
pub fn extracted(n: usize, omega: &Form<f64>, id: &str) -> NamedForm {
    let p = omega.p - 1;
    NamedForm {
        id: id.to_string(),
        field: from_flat_parallel_form(n, omega, id),
        south: Some(from_flat_parallel_form_south(n, omega, id)),
        props: vec![Property::Killing, Property::Special(-((p + 1) as f64))],
        eigenvalue: Some(((p + 1) * (n - p)) as f64),
    }
}

fn star_of(
    n: usize,
    nf: &NamedForm,
    id: &str,
    props: Vec<Property>,
    eigenvalue: Option<f64>,
) -> NamedForm {
    let m = sphere(n);
    let metric = m.metric_fn().clone();
    NamedForm {
        id: id.to_string(),
        field: star_field(&metric, m.orientation, &nf.field).relabel(id),
        // the inversion between charts reverses orientation
        south: nf
            .south
            .as_ref()
            .map(|s| star_field(&metric, -m.orientation, s).relabel(id)),
        props,
        eigenvalue,
    }
}

/// The `C(n+2, p+1)` conformal Killing `p`-forms spanning the space on `Sⁿ`:
/// first `F*(y⌟e^A)` for `|A| = p+1`, then `★F*(y⌟e^B)` for `|B| = n−p+1`.
pub fn sphere_ckf_basis(n: usize, p: usize) -> Result<Vec<NamedForm>> {
    if p == 0 || p >= n {
        return Err(Error::DegenerateDegree {
            p,
            n,
            what: "sphere basis needs 1 ≤ p ≤ n−1",
        });
    }
    let mut out = Vec::with_capacity(binomial(n + 2, p + 1));
    for (i, a) in combos(n + 1, p + 1).iter().enumerate() {
        out.push(extracted(
            n,
            &Form::basis(n + 1, a),
            &format!("basis:{p}:{i}"),
        ));
    }
    let k = binomial(n + 1, p + 1);
    for (i, b) in combos(n + 1, n - p + 1).iter().enumerate() {
        let inner = extracted(n, &Form::basis(n + 1, b), "killing");
        let id = format!("basis:{p}:{}", k + i);
        let ev = (p * (n - p + 1)) as f64;
        out.push(star_of(
            n,
            &inner,
            &id,
            vec![Property::StarKilling],
            Some(ev),
        ));
    }
    Ok(out)
}

pub fn basis_form(n: usize, p: usize, idx: usize) -> Result<NamedForm> {
    let all = sphere_ckf_basis(n, p)?;
    let len = all.len();
    all.into_iter()
        .nth(idx)
        .ok_or_else(|| Error::UnknownId(format!("basis:{p}:{idx} (only {len} forms)")))
}

fn hopf_half_dim(n: usize) -> Result<usize> {
    if n.is_multiple_of(2) || n < 3 {
        return Err(Error::Invalid(format!("S^{n} carries no Hopf structure")));
    }
    Ok((n - 1) / 2)
}

/// Hopf contact form `ξ* = F*(y⌟Ω)` with `Ω` the Kähler form of `ℂ^{n'+1}`.
pub fn xi_star(n: usize) -> Result<NamedForm> {
    let h = hopf_half_dim(n)?;
    let mut f = extracted(n, &kahler_form(h + 1), "xi_star");
    f.eigenvalue = Some((4 * h) as f64);
    Ok(f)
}

/// `dξ* = 2F*Ω`, written algebraically.
pub fn dxi_star(n: usize) -> Result<NamedForm> {
    let h = hopf_half_dim(n)?;
    let om = kahler_form(h + 1);
    let id = "dxi_star";
    Ok(NamedForm {
        id: id.into(),
        field: horizontal_part(n, &om.scale(2.0), id),
        south: Some(sphere_pullback(
            n,
            2,
            id,
            constant_ambient(om.scale(2.0)),
            true,
        )),
        props: vec![Property::StarKilling],
        eigenvalue: None,
    })
}

/// `ω_k = ξ*∧(dξ*)^k`; it equals `2^k/(k+1) F*(y⌟Ω^{k+1})`.
pub fn omega_k(n: usize, k: usize) -> Result<NamedForm> {
    let h = hopf_half_dim(n)?;
    if k > h {
        return Err(Error::Degree(format!(
            "omega_k:{k} exceeds degree on S^{n}"
        )));
    }
    let om = kahler_form(h + 1);
    let pow = wedge_powers(&[(&om, k + 1)], 2 * h + 2)?;
    let scale = 2f64.powi(k as i32) / (k + 1) as f64;
    let id = format!("omega_k:{k}");
    let mut f = extracted(n, &pow.scale(scale), &id);
    f.eigenvalue = Some((4 * (k + 1) * (h - k)) as f64);
    if k == h {
        // top degree: ω_{n'} is a multiple of the volume form, hence parallel
        f.props = vec![Property::Killing, Property::Parallel];
        f.eigenvalue = Some(0.0);
    }
    Ok(f)
}

/// Kähler form `ω(X, Y) = ⟨p × X, Y⟩` of the nearly Kähler `S⁶`.
pub fn nk_omega() -> NamedForm {
    extracted(6, &associative_form(), "nk_omega")
}

/// `★dω` on `S⁶` with `dω = 3F*φ`.
pub fn nk_star_domega() -> NamedForm {
    let id = "nk_star_domega";
    let phi3 = associative_form().scale(3.0);
    let d = NamedForm {
        id: "nk_domega".into(),
        field: horizontal_part(6, &phi3, "nk_domega"),
        south: Some(sphere_pullback(
            6,
            3,
            "nk_domega",
            constant_ambient(phi3.clone()),
            true,
        )),
        props: vec![],
        eigenvalue: None,
    };
    star_of(
        6,
        &d,
        id,
        vec![Property::Killing, Property::Special(-4.0)],
        Some(12.0),
    )
}

/// The weak `G₂` 3-form on `S⁷`, extracted from the Cayley form.
pub fn g2_phi() -> NamedForm {
    extracted(7, &cayley_form(), "g2_phi")
}

fn quaternionic_dim(n: usize) -> Result<usize> {
    if !(n + 1).is_multiple_of(4) {
        return Err(Error::Invalid(format!(
            "S^{n} carries no 3-Sasakian structure"
        )));
    }
    Ok((n + 1) / 4)
}

/// The Sasakian 1-forms `η_i = F*(y⌟ω_i)` of the hyperkähler triple, `i ∈ {1, 2, 3}`.
pub fn eta(n: usize, i: usize) -> Result<NamedForm> {
    let m = quaternionic_dim(n)?;
    if !(1..=3).contains(&i) {
        return Err(Error::UnknownId(format!("eta:{i}")));
    }
    let tri = hyperkahler_triple(m);
    Ok(extracted(n, &tri[i - 1], &format!("eta:{i}")))
}

/// Constant form `ω₁^a ∧ ω₂^b ∧ ω₃^c` on `ℍ^m`.
pub fn hyperkahler_power(m: usize, a: usize, b: usize, c: usize) -> Result<Form<f64>> {
    let tri = hyperkahler_triple(m);
    wedge_powers(&[(&tri[0], a), (&tri[1], b), (&tri[2], c)], 4 * m)
}

/// `ψ_{a,b,c}` assembled from `η_i` and `dη_i = 2F*ω_i`.
pub fn psi_abc(n: usize, a: usize, b: usize, c: usize) -> Result<NamedForm> {
    let m = quaternionic_dim(n)?;
    let s = a + b + c;
    if s == 0 || 2 * s - 1 > n {
        return Err(Error::Degree(format!(
            "psi_abc:{a}:{b}:{c} has no valid degree on S^{n}"
        )));
    }
    let tri = hyperkahler_triple(m);
    let exps = [a, b, c];
    let id = format!("psi_abc:{a}:{b}:{c}");
    let mut north: Vec<(f64, FormField)> = Vec::new();
    let mut south: Vec<(f64, FormField)> = Vec::new();
    for i in 0..3 {
        if exps[i] == 0 {
            continue;
        }
        let mut e = exps;
        e[i] -= 1;
        let dpow = wedge_powers(&[(&tri[0], e[0]), (&tri[1], e[1]), (&tri[2], e[2])], 4 * m)?;
        let dpow = dpow.scale(2f64.powi((s - 1) as i32));
        let coef = exps[i] as f64 / s as f64;
        for (south_chart, acc) in [(false, &mut north), (true, &mut south)] {
            let eta = if south_chart {
                from_flat_parallel_form_south(n, &tri[i], "eta")
            } else {
                from_flat_parallel_form(n, &tri[i], "eta")
            };
            let rest = sphere_pullback(
                n,
                dpow.p,
                "deta",
                constant_ambient(dpow.clone()),
                south_chart,
            );
            // η_i ∧ (dη)^… ; the even factors commute, so the order of wedging is immaterial
            acc.push((coef, eta.wedge(&rest)?));
        }
    }
    let p = 2 * s - 1;
    Ok(NamedForm {
        id: id.clone(),
        field: FormField::combination(id.clone(), &north)?,
        south: Some(FormField::combination(id, &south)?),
        props: vec![Property::Killing, Property::Special(-((p + 1) as f64))],
        eigenvalue: Some(((p + 1) * (n - p)) as f64),
    })
}
