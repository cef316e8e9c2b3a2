use std::sync::Arc;

use twistor_core::catalog::structures::{associative_form, cayley_form, kahler_form};
use twistor_core::catalog::{lookup, random_form, star_field, Property};
use twistor_core::cone::*;
use twistor_core::error::Error;
use twistor_core::forms::{cov_deriv, Form, FormField};
use twistor_core::geometry::{christoffel_at, riemann_norm, LocalGeom};
use twistor_core::jets::Jet;
use twistor_core::twistor::{killing_residual, Sample};

fn cone(id: &str) -> ConeManifold {
    ConeManifold::new(&lookup(id).unwrap().manifold)
}

fn max_diff(a: &Form<f64>, b: &Form<f64>) -> f64 {
    a.c.iter()
        .zip(&b.c)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

#[test]
fn cone_connection_formulas() {
    for id in ["s3", "s2xs3", "t3"] {
        let c = cone(id);
        let n = c.base.dim;
        let m = n + 1;
        for x in &c.sample(3, 1).points {
            let gam = christoffel_at(&c.manifold, x).unwrap();
            let base = christoffel_at(&c.base, &x[..n]).unwrap();
            let (g, _) = c.base.metric_at(&x[..n]).unwrap();
            let r = x[n];
            let at = |k: usize, i: usize, j: usize| gam[(k * m + i) * m + j];
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let want = match (k == n, i == n, j == n) {
                            // ∇̂_X Y = ∇_X Y − r g(X, Y) ∂_r
                            (false, false, false) => base[(k * n + i) * n + j],
                            (true, false, false) => -r * g[i * n + j],
                            // ∇̂_X ∂_r = ∇̂_{∂_r} X = X / r
                            (false, true, false) => f64::from(k == j) / r,
                            (false, false, true) => f64::from(k == i) / r,
                            // ∇̂_{∂_r} ∂_r = 0
                            _ => 0.0,
                        };
                        assert!((at(k, i, j) - want).abs() < 1e-9, "{id} Γ^{k}_{i}{j}");
                    }
                }
            }
        }
    }
}

#[test]
fn dual_connection_formulas() {
    let c = cone("s3");
    let n = 3;
    let dr = FormField::constant("dr", Form::basis(4, &[3]));
    let alpha = horizontal_field(&c, &random_form(3, 1, 4)).unwrap();
    for x in &c.sample(3, 2).points {
        let lg = LocalGeom::new(&c.manifold, x, 1).unwrap();
        let r = x[n];
        let (gb, _) = c.base.metric_at(&x[..n]).unwrap();
        // ∇̂_X dr = r X*
        let nd = cov_deriv(&lg, &dr.at(x, 1).unwrap()).unwrap();
        for i in 0..n {
            let v = nd[i].values();
            for j in 0..n {
                assert!((v.c[j] - r * gb[i * n + j]).abs() < 1e-9);
            }
            assert!(v.c[n].abs() < 1e-12);
        }
        assert!(nd[n].values().max_abs() < 1e-12);
        // ∇̂_{∂_r} X* = −X*/r for r-independent horizontal 1-forms
        let a = alpha.at(x, 1).unwrap();
        let na = cov_deriv(&lg, &a).unwrap();
        let want = a.values().scale(-1.0 / r);
        assert!(max_diff(&na[n].values(), &want) < 1e-9);
    }
}

#[test]
fn cones_over_round_spheres_are_flat() {
    for id in ["s2", "s3", "s5", "s6"] {
        let c = cone(id);
        for x in &c.sample(3, 4).points {
            assert!(riemann_norm(&c.manifold, x).unwrap() < 1e-8, "{id}");
        }
    }
    let c = cone("s2xs3");
    let x = c.sample(1, 1).points[0].clone();
    assert!(riemann_norm(&c.manifold, &x).unwrap() > 1e-2);
    // the round sphere itself is not flat: |R|² = 2n(n−1)
    let s3 = lookup("s3").unwrap().manifold;
    assert!((riemann_norm(&s3, &[0.1, 0.2, 0.3]).unwrap() - 12f64.sqrt()).abs() < 1e-10);
}

#[test]
fn lifts_are_radially_parallel() {
    for (id, p) in [("s3", 1), ("s3", 2), ("s2xs3", 2), ("t3", 1)] {
        let c = cone(id);
        let lift = cone_lift(&c, &random_form(c.base.dim, p, 11)).unwrap();
        let r = radial_parallel_residual(&c, &lift, &c.sample(4, 3), 1e-9).unwrap();
        assert!(r.pass, "{id} p={p}: {r:?}");
    }
}

#[test]
fn lifts_of_special_killing_forms_are_parallel() {
    let cases = [
        ("s3", "xi_star"),
        ("s3", "basis:1:2"),
        ("s3", "basis:2:1"),
        ("s5", "omega_k:1"),
        ("s5", "omega_k:0"),
        ("s6_nk", "nk_omega"),
        ("s7_g2", "g2_phi"),
    ];
    for (id, f) in cases {
        let e = lookup(id).unwrap();
        let nf = e.form(f).unwrap();
        assert!(nf.props.iter().any(|p| matches!(p, Property::Special(_))));
        let c = ConeManifold::new(&e.manifold);
        let lift = cone_lift(&c, &nf.field).unwrap();
        let r = cone_parallel_residual(&c, &lift, &c.sample(5, 6), 1e-8).unwrap();
        assert!(r.pass, "{id} {f}: {r:?}");
    }
}

#[test]
fn lifts_that_are_not_parallel() {
    // Killing but not special on a product
    let c = cone("s2xs3");
    let k = lookup("s2xs3").unwrap().form("m2:xi_star").unwrap().field;
    let r = cone_parallel_residual(&c, &cone_lift(&c, &k).unwrap(), &c.sample(3, 1), 1e-8);
    assert!(r.unwrap().max_residual > 1e-2);
    // parallel on the torus: the cone over a flat torus is not flat
    let c = cone("t3");
    let t = lookup("t3").unwrap().form("parallel:0").unwrap().field;
    let lift = cone_lift(&c, &t).unwrap();
    assert!(
        cone_parallel_residual(&c, &lift, &c.sample(3, 1), 1e-8)
            .unwrap()
            .max_residual
            > 1e-2
    );
    // p = 0: the lift of 1 is dr, and ∇̂dr = r g ≠ 0
    let c = cone("s3");
    let one = FormField::constant("1", Form::from_coeffs(3, 0, vec![1.0]).unwrap());
    let lift = cone_lift(&c, &one).unwrap();
    let x = [0.2, 0.1, -0.3, 1.0];
    assert_eq!(lift.values(&x).unwrap().c, vec![0.0, 0.0, 0.0, 1.0]);
    assert!(
        cone_parallel_residual(&c, &lift, &c.sample(2, 1), 1e-8)
            .unwrap()
            .max_residual
            > 0.5
    );
}

#[test]
fn hopf_lift_is_the_flat_kahler_form() {
    let c = cone("s3");
    let xi = lookup("s3").unwrap().form("xi_star").unwrap().field;
    let lift = cone_lift(&c, &xi).unwrap();
    let flat = polar_pullback(3, &kahler_form(2), "kahler").unwrap();
    for x in &c.sample(4, 2).points {
        let (a, b) = (lift.values(x).unwrap(), flat.values(x).unwrap());
        assert!(max_diff(&a, &b) < 1e-12 * b.max_abs().max(1.0));
    }
}

#[test]
fn extraction_from_constant_forms() {
    let c = cone("s3");
    let base_sample = Sample::random(&c.base, 8, 3);
    let mut omega = Form::zero(4, 2, &0.0);
    omega.add_at(&[0, 1], &1.0);
    omega.add_at(&[1, 3], &-0.7);
    omega.add_at(&[0, 2], &0.4);
    let field = polar_pullback(3, &omega, "Omega").unwrap();
    let ex = cone_extract(&c, &field, &base_sample, 1e-8).unwrap();
    assert!(ex.pass(), "{:?}", ex.checks);
    assert!(ex.homogeneity_defect < 1e-12);
    assert_eq!(ex.split.p, 1);
    assert!(ex.check("laplace_omega1").unwrap().pass);
    let w1 = &ex.split.omega1;
    assert!(
        killing_residual(&c.base, w1, &base_sample, 1e-8)
            .unwrap()
            .pass
    );
    let (lam, res) =
        twistor_core::twistor::identities::laplace_eigenvalue(&c.base, w1, &base_sample.points[0])
            .unwrap();
    assert!((lam - 4.0).abs() < 1e-8 && res < 1e-8);
    // the Kähler form gives back the Hopf contact form
    let k = polar_pullback(3, &kahler_form(2), "kahler").unwrap();
    let ex = cone_extract(&c, &k, &base_sample, 1e-8).unwrap();
    let xi = lookup("s3").unwrap().form("xi_star").unwrap().field;
    for x in &base_sample.points {
        let (a, b) = (ex.split.omega1.values(x).unwrap(), xi.values(x).unwrap());
        assert!(max_diff(&a, &b) < 1e-12);
    }
}

#[test]
fn extraction_in_higher_degree_spheres() {
    for (n, omega) in [(6, associative_form()), (7, cayley_form())] {
        let c = cone(&format!("s{n}"));
        let s = Sample::random(&c.base, 3, 5);
        let field = polar_pullback(n, &omega, "Omega").unwrap();
        let ex = cone_extract(&c, &field, &s, 1e-8).unwrap();
        assert!(ex.pass(), "n={n}: {:?}", ex.checks);
    }
}

#[test]
fn extract_after_lift_round_trips() {
    for (id, f) in [
        ("s3", "xi_star"),
        ("s5", "omega_k:1"),
        ("s6_nk", "nk_omega"),
    ] {
        let e = lookup(id).unwrap();
        let psi = e.form(f).unwrap().field;
        let c = ConeManifold::new(&e.manifold);
        let s = Sample::random(&e.manifold, 4, 9);
        let ex = cone_extract(&c, &cone_lift(&c, &psi).unwrap(), &s, 1e-8).unwrap();
        assert!(ex.pass(), "{id} {f}: {:?}", ex.checks);
        let dpsi = psi.exterior_d();
        let p1 = (psi.p + 1) as f64;
        for x in &s.points {
            let a = ex.split.omega1.values(x).unwrap();
            let b = psi.values(x).unwrap();
            assert!(max_diff(&a, &b) < 1e-10 * b.max_abs().max(1.0));
            let a0 = ex.split.omega0.values(x).unwrap();
            let b0 = dpsi.values(x).unwrap().scale(1.0 / p1);
            assert!(max_diff(&a0, &b0) < 1e-10 * b0.max_abs().max(1.0));
        }
    }
}

#[test]
fn extraction_rejects_non_homogeneous_forms() {
    let c = cone("s3");
    let xi = lookup("s3").unwrap().form("xi_star").unwrap().field;
    let lift = cone_lift(&c, &xi).unwrap();
    let tilted = lift.mul_function("r*lift", Arc::new(|u: &[Jet]| Ok(u[3].clone())));
    let s = Sample::random(&c.base, 3, 1);
    assert!(matches!(
        cone_extract(&c, &tilted, &s, 1e-8),
        Err(Error::NotHomogeneous { .. })
    ));
    let zero = FormField::constant("1", Form::from_coeffs(4, 0, vec![1.0]).unwrap());
    assert!(matches!(
        split_at_radius(&c, &zero, 1.0),
        Err(Error::Degree(_))
    ));
}

#[test]
fn power_construction_on_s5() {
    let e = lookup("s5").unwrap();
    let c = ConeManifold::new(&e.manifold);
    let xi = e.form("xi_star").unwrap().field;
    let w1 = power_construction(&e.manifold, &xi, 1).unwrap();
    let expected = e.form("omega_k:1").unwrap().field;
    for x in &Sample::random(&e.manifold, 5, 2).points {
        let (a, b) = (w1.values(x).unwrap(), expected.values(x).unwrap());
        assert!(max_diff(&a, &b) < 1e-12 * b.max_abs().max(1.0));
    }
    let rep = power_check(&c, &xi, 1, 5, 3, 1e-8).unwrap();
    assert_eq!((rep.degree, rep.constant), (3, -4.0));
    assert!(rep.special.pass && rep.lift_identity.pass, "{rep:?}");
    // k = 0 is the identity
    let id = power_construction(&e.manifold, &xi, 0).unwrap();
    let x = [0.1, 0.2, 0.3, -0.1, 0.4];
    assert_eq!(id.values(&x).unwrap().c, xi.values(&x).unwrap().c);
    assert!(power_check(&c, &xi, 2, 3, 1, 1e-8).unwrap().special.pass);
    // even degree and overflow are errors
    let even = e.form("basis:2:0").unwrap().field;
    assert!(matches!(
        power_construction(&e.manifold, &even, 1),
        Err(Error::Degree(_))
    ));
    assert!(power_construction(&e.manifold, &xi, 3).is_err());
}

#[test]
fn power_construction_on_s7() {
    let e = lookup("s7").unwrap();
    let c = ConeManifold::new(&e.manifold);
    let w1 = e.form("omega_k:1").unwrap().field;
    // ω₁ ∧ (dω₁) has degree 3 + 4 = 7
    let rep = power_check(&c, &w1, 1, 3, 2, 1e-8).unwrap();
    assert_eq!(rep.degree, 7);
    assert!(rep.lift_identity.pass, "{rep:?}");
}

#[test]
fn cone_hodge_star() {
    // volume form of S²
    let c = cone("s2");
    let m = &c.base;
    let one = FormField::constant("1", Form::from_coeffs(2, 0, vec![1.0]).unwrap());
    let vol = star_field(m.metric_fn(), m.orientation, &one);
    let hv = horizontal_field(&c, &vol).unwrap();
    let h1 = horizontal_field(&c, &one).unwrap();
    for x in &c.sample(3, 1).points {
        assert!(cone_hodge_relation(&c, &hv, x).unwrap() < 1e-9);
        assert!(cone_hodge_relation(&c, &h1, x).unwrap() < 1e-9);
    }
    // random horizontal 1-forms on the cone over S³ and over a product
    for id in ["s3", "s2xs3"] {
        let c = cone(id);
        let n = c.base.dim;
        for p in 1..n {
            let h = horizontal_field(&c, &random_form(n, p, 7)).unwrap();
            for x in &c.sample(3, 2).points {
                assert!(cone_hodge_relation(&c, &h, x).unwrap() < 1e-9, "{id} p={p}");
            }
        }
    }
    // a dr component is rejected
    let c = cone("s3");
    let lift = cone_lift(&c, &random_form(3, 1, 1)).unwrap();
    assert!(matches!(
        cone_hodge_relation(&c, &lift, &[0.1, 0.2, 0.3, 1.0]),
        Err(Error::Invalid(_))
    ));
}

#[test]
fn nearly_kahler_star_d_omega() {
    let e = lookup("s6_nk").unwrap();
    let w = e.form("nk_omega").unwrap().field;
    let s = Sample::random(&e.manifold, 6, 4);
    let rep = nk_star_domega_check(&e.manifold, &w, &s, 1e-7).unwrap();
    assert!((rep.scalar_curvature - 30.0).abs() < 1e-9);
    assert!((rep.laplace_eigenvalue - 12.0).abs() < 12e-6 && rep.laplace_residual < 1e-7);
    assert!(rep.d_star_residual < 1e-7, "{rep:?}");
    assert!((rep.expected_constant + 4.0).abs() < 1e-9);
    assert!((rep.fit.constant + 4.0).abs() < 1e-7);
    assert!(rep.special.pass);
    assert!(nk_star_domega_check(&lookup("s5").unwrap().manifold, &w, &s, 1e-7).is_err());
}
