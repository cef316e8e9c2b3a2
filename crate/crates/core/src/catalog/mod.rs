//! Concrete manifolds and named forms.
//!
//! Catalog ids: `s2`…`s7` (round spheres), `s6_nk`, `s7_g2`, `s7_3sas`,
//! `t2`, `t3`, `s2xs3`, `t2xs2`. Form ids on spheres: `basis:P:IDX`, `xi_star`,
//! `dxi_star`, `omega_k:K`, `nk_omega`, `nk_star_domega`, `g2_phi`, `eta:I`,
//! `psi_abc:A:B:C`; on tori `parallel:I,J,…` (or `dx1,dx2,…`); on products `m1:ID`, `m2:ID`,
//! `vol1^m2:ID`, `vol2^m1:ID`.

pub mod ambient;
pub mod probes;
pub mod product;
pub mod sphere;
pub mod structures;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::FormField;
use crate::geometry::ChartManifold;

pub use ambient::{
    from_flat_parallel_form, horizontal_part, inverse_stereographic, sphere as round_sphere,
};
pub use product::{
    flat_torus, parallel_form, product_manifold, pullback_factor, star_field, volume_field,
};
pub use sphere::sphere_ckf_basis;
pub use structures::CrossProduct;

/// Expected property of a named form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "constant", rename_all = "snake_case")]
pub enum Property {
    Killing,
    StarKilling,
    Ckf,
    /// Special Killing with `∇_X dψ = c X*∧ψ`.
    Special(f64),
    Parallel,
}

/// A form field with the properties it is expected to satisfy.
#[derive(Debug, Clone)]
pub struct NamedForm {
    pub id: String,
    pub field: FormField,
    /// Same form in the second chart, when the manifold has one.
    pub south: Option<FormField>,
    pub props: Vec<Property>,
    /// Expected eigenvalue of the Hodge Laplacian.
    pub eigenvalue: Option<f64>,
}

#[derive(Debug, Clone)]
enum Kind {
    Sphere { n: usize },
    Torus { n: usize },
    Product(Box<CatalogEntry>, Box<CatalogEntry>),
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub manifold: ChartManifold,
    /// Ids of the forms declared for this entry.
    pub declared: Vec<String>,
    pub scalar_curvature: f64,
    pub note: String,
    kind: Kind,
}

impl CatalogEntry {
    pub fn dim(&self) -> usize {
        self.manifold.dim
    }

    /// `n` when the entry is a round `S^n` in the stereographic chart.
    pub fn sphere_dim(&self) -> Option<usize> {
        match self.kind {
            Kind::Sphere { n } => Some(n),
            _ => None,
        }
    }

    /// True for the flat tori `t2`, `t3`.
    pub fn is_torus(&self) -> bool {
        matches!(self.kind, Kind::Torus { .. })
    }

    /// Resolve a form id against this entry.
    pub fn form(&self, id: &str) -> Result<NamedForm> {
        let unknown = || Error::UnknownId(format!("{id} on {}", self.id));
        match &self.kind {
            Kind::Sphere { n } => sphere_form(*n, id).map_err(|e| match e {
                Error::UnknownId(_) => unknown(),
                other => other,
            }),
            Kind::Torus { n } => {
                let rest = id.strip_prefix("parallel:").ok_or_else(unknown)?;
                let idx = parse_list(rest).ok_or_else(unknown)?;
                Ok(NamedForm {
                    id: id.to_string(),
                    field: parallel_form(*n, &idx)?.relabel(id),
                    south: None,
                    props: vec![Property::Killing, Property::StarKilling, Property::Parallel],
                    eigenvalue: Some(0.0),
                })
            }
            Kind::Product(a, b) => product_form(a, b, id).ok_or_else(unknown)?,
        }
    }

    /// All declared forms, resolved.
    pub fn forms(&self) -> Result<Vec<NamedForm>> {
        self.declared.iter().map(|id| self.form(id)).collect()
    }
}

/// Comma-separated indices; `dxK` stands for the 0-based index `K − 1`.
fn parse_list(s: &str) -> Option<Vec<usize>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.strip_prefix("dx") {
                Some(k) => k.parse::<usize>().ok()?.checked_sub(1),
                None => t.parse().ok(),
            }
        })
        .collect()
}

fn parse_usize(s: Option<&str>) -> Result<usize> {
    s.and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::UnknownId(String::new()))
}

fn sphere_form(n: usize, id: &str) -> Result<NamedForm> {
    let mut parts = id.split(':');
    let head = parts.next().unwrap_or_default();
    let form = match head {
        "basis" => {
            let p = parse_usize(parts.next())?;
            let i = parse_usize(parts.next())?;
            sphere::basis_form(n, p, i)?
        }
        "xi_star" => sphere::xi_star(n)?,
        "dxi_star" => sphere::dxi_star(n)?,
        "omega_k" => sphere::omega_k(n, parse_usize(parts.next())?)?,
        "nk_omega" if n == 6 => sphere::nk_omega(),
        "nk_star_domega" if n == 6 => sphere::nk_star_domega(),
        "g2_phi" if n == 7 => sphere::g2_phi(),
        "eta" => sphere::eta(n, parse_usize(parts.next())?)?,
        "psi_abc" => {
            let a = parse_usize(parts.next())?;
            let b = parse_usize(parts.next())?;
            let c = parse_usize(parts.next())?;
            sphere::psi_abc(n, a, b, c)?
        }
        _ => return Err(Error::UnknownId(id.to_string())),
    };
    if parts.next().is_some() {
        return Err(Error::UnknownId(id.to_string()));
    }
    Ok(form)
}

fn product_form(a: &CatalogEntry, b: &CatalogEntry, id: &str) -> Option<Result<NamedForm>> {
    let (n1, n2) = (a.dim(), b.dim());
    let inherit = |props: &[Property]| -> Vec<Property> {
        props
            .iter()
            .copied()
            .filter(|p| matches!(p, Property::Killing | Property::Parallel))
            .collect()
    };
    let wrap = |field: Result<FormField>, props: Vec<Property>| -> Result<NamedForm> {
        Ok(NamedForm {
            id: id.to_string(),
            field: field?.relabel(id),
            south: None,
            props,
            eigenvalue: None,
        })
    };
    if let Some(rest) = id.strip_prefix("m1:") {
        return Some(
            a.form(rest)
                .and_then(|f| wrap(pullback_factor(&f.field, n1, n2, 1), inherit(&f.props))),
        );
    }
    if let Some(rest) = id.strip_prefix("m2:") {
        return Some(
            b.form(rest)
                .and_then(|f| wrap(pullback_factor(&f.field, n1, n2, 2), inherit(&f.props))),
        );
    }
    let vol_wedge = |vol_on: &CatalogEntry, vol_idx: usize, other: &CatalogEntry, rest: &str| {
        let f = other.form(rest)?;
        let vol = pullback_factor(&volume_field(&vol_on.manifold), n1, n2, vol_idx)?;
        let pulled = pullback_factor(&f.field, n1, n2, 3 - vol_idx)?;
        let props = if f.props.contains(&Property::Parallel) {
            vec![Property::Parallel, Property::Ckf]
        } else if f.props.contains(&Property::StarKilling) || f.props.contains(&Property::Killing) {
            vec![Property::Ckf]
        } else {
            vec![]
        };
        let field = if vol_idx == 1 {
            vol.wedge(&pulled)
        } else {
            pulled.wedge(&vol)
        };
        wrap(field, props)
    };
    if let Some(rest) = id.strip_prefix("vol1^m2:") {
        return Some(vol_wedge(a, 1, b, rest));
    }
    if let Some(rest) = id.strip_prefix("vol2^m1:") {
        return Some(vol_wedge(b, 2, a, rest));
    }
    None
}

fn sphere_entry(id: &str, n: usize, declared: &[&str], note: &str) -> CatalogEntry {
    let mut manifold = round_sphere(n);
    manifold.id = id.to_string();
    CatalogEntry {
        id: id.to_string(),
        manifold,
        declared: declared.iter().map(|s| s.to_string()).collect(),
        scalar_curvature: (n * (n - 1)) as f64,
        note: note.to_string(),
        kind: Kind::Sphere { n },
    }
}

fn torus_entry(n: usize) -> CatalogEntry {
    let declared = (0..n).map(|i| format!("parallel:{i}")).collect();
    CatalogEntry {
        id: format!("t{n}"),
        manifold: flat_torus(n),
        declared,
        scalar_curvature: 0.0,
        note: "flat torus; all constant forms are parallel".into(),
        kind: Kind::Torus { n },
    }
}

fn product_entry(a: CatalogEntry, b: CatalogEntry, declared: &[&str]) -> CatalogEntry {
    let manifold = product_manifold(&a.manifold, &b.manifold);
    CatalogEntry {
        id: manifold.id.clone(),
        scalar_curvature: a.scalar_curvature + b.scalar_curvature,
        note: format!("Riemannian product {} x {}", a.id, b.id),
        declared: declared.iter().map(|s| s.to_string()).collect(),
        manifold,
        kind: Kind::Product(Box::new(a), Box::new(b)),
    }
}

/// Every catalog id understood by [`lookup`].
pub const CATALOG_IDS: &[&str] = &[
    "s2", "s3", "s4", "s5", "s6", "s7", "s6_nk", "s7_g2", "s7_3sas", "t2", "t3", "s2xs3", "t2xs2",
];

pub fn lookup(id: &str) -> Result<CatalogEntry> {
    Ok(match id {
        "s2" => sphere_entry(id, 2, &["basis:1:0", "basis:1:3"], "round sphere"),
        "s3" => sphere_entry(
            id,
            3,
            &["xi_star", "dxi_star", "basis:1:0", "basis:1:6", "basis:2:0"],
            "round sphere with Hopf Sasakian structure",
        ),
        "s4" => sphere_entry(
            id,
            4,
            &["basis:1:0", "basis:2:0", "basis:2:10"],
            "round sphere",
        ),
        "s5" => sphere_entry(
            id,
            5,
            &["xi_star", "dxi_star", "omega_k:0", "omega_k:1", "omega_k:2"],
            "round sphere with Hopf Sasakian structure",
        ),
        "s6" => sphere_entry(id, 6, &["basis:1:0", "basis:3:0"], "round sphere"),
        "s7" => sphere_entry(
            id,
            7,
            &["xi_star", "omega_k:1", "omega_k:2"],
            "round sphere with Hopf Sasakian structure",
        ),
        "s6_nk" => sphere_entry(
            id,
            6,
            &["nk_omega", "nk_star_domega"],
            "nearly Kähler S6 from the octonionic cross product",
        ),
        "s7_g2" => sphere_entry(id, 7, &["g2_phi"], "weak G2 structure from the Cayley form"),
        "s7_3sas" => sphere_entry(
            id,
            7,
            &[
                "eta:1",
                "eta:2",
                "eta:3",
                "psi_abc:1:1:0",
                "psi_abc:0:0:2",
                "psi_abc:2:1:0",
            ],
            "3-Sasakian structure from the flat hyperkähler H2",
        ),
        "t2" => torus_entry(2),
        "t3" => torus_entry(3),
        "s2xs3" => product_entry(
            lookup("s2")?,
            lookup("s3")?,
            &["m2:xi_star", "m1:basis:1:0", "vol1^m2:basis:1:6"],
        ),
        "t2xs2" => product_entry(
            lookup("t2")?,
            lookup("s2")?,
            &["m1:parallel:0", "vol2^m1:parallel:0"],
        ),
        _ => return Err(Error::UnknownId(id.to_string())),
    })
}

/// A non-special smooth `p`-form with random polynomial-times-exponential coefficients.
pub fn random_form(n: usize, p: usize, seed: u64) -> FormField {
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let len = crate::multiindex::binomial(n, p);
    // per coefficient: constant, linear, one quadratic term and an exponential factor
    let params: Vec<(f64, Vec<f64>, (usize, usize, f64), Vec<f64>)> = (0..len)
        .map(|_| {
            let c0 = rng.gen_range(-1.0..1.0);
            let lin = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let quad = (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(-0.5..0.5),
            );
            let ex = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
            (c0, lin, quad, ex)
        })
        .collect();
    FormField::new(
        n,
        p,
        format!("random{n}:{p}:{seed}"),
        Arc::new(move |u: &[crate::jets::Jet]| {
            let c = params
                .iter()
                .map(|(c0, lin, (i, j, q), ex)| {
                    let mut v = u[0].constant_like(*c0);
                    let mut e = u[0].zero_like();
                    for k in 0..n {
                        v.axpy(lin[k], &u[k]);
                        e.axpy(ex[k], &u[k]);
                    }
                    v.fma(*q, &u[*i], &u[*j]);
                    v.mul_jet(&e.exp())
                })
                .collect();
            Ok(crate::forms::Form { n, p, c })
        }),
    )
}

/// Largest coefficient difference between the south-chart field at `xs` and the
/// north-chart field pulled back through the chart transition, relative to `max(1, |ψ|_∞)`.
pub fn chart_mismatch(
    m: &ChartManifold,
    north: &FormField,
    south: &FormField,
    xs: &[f64],
) -> Result<f64> {
    use crate::jets::Jet;
    let tr = m
        .transition
        .as_ref()
        .ok_or_else(|| Error::Invalid(format!("{} has a single chart", m.id)))?;
    let n = m.dim;
    let img = (tr.0)(&Jet::coordinates(xs, 1))?;
    let xn: Vec<f64> = img.iter().map(Jet::value).collect();
    let proto = Jet::constant(n, 0, 0.0);
    let mut jac = Vec::with_capacity(n * n);
    for y in &img {
        for a in 0..n {
            jac.push(proto.constant_like(y.partial(a)?.value()));
        }
    }
    let pulled = crate::forms::pullback_algebraic(&north.at(&xn, 0)?, &jac, n)?.values();
    let local = south.values(xs)?;
    let size = local.c.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    Ok(pulled
        .c
        .iter()
        .zip(&local.c)
        .fold(0.0f64, |a, (p, q)| a.max((p - q).abs()))
        / size)
}
