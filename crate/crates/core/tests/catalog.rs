use twistor_core::catalog::probes::*;
use twistor_core::catalog::{
    chart_mismatch, lookup, sphere_ckf_basis, structures, CatalogEntry, CrossProduct, Property,
    CATALOG_IDS,
};
use twistor_core::error::Error;
use twistor_core::twistor::identities::laplace_eigenvalue;
use twistor_core::twistor::*;

const TOL: f64 = 1e-8;

fn check_props(entry: &CatalogEntry, sample: &Sample) {
    let m = &entry.manifold;
    for f in entry.forms().unwrap() {
        let top = f.field.p == 0 || f.field.p >= m.dim;
        for prop in &f.props {
            let rep = match prop {
                Property::Parallel => parallel_residual(m, &f.field, sample, TOL),
                _ if top => continue,
                Property::Killing => killing_residual(m, &f.field, sample, TOL),
                Property::StarKilling => star_killing_residual(m, &f.field, sample, TOL),
                Property::Ckf => ckf_residual(m, &f.field, sample, TOL),
                Property::Special(c) => {
                    for v in [SpecialVariant::FirstOrder, SpecialVariant::SecondOrder] {
                        let r = special_killing_residual(m, &f.field, *c, sample, v, TOL).unwrap();
                        assert!(r.pass, "{} {}: {:?}", entry.id, f.id, r);
                    }
                    continue;
                }
            }
            .unwrap();
            assert!(rep.pass, "{} {} {:?}: {:?}", entry.id, f.id, prop, rep);
        }
    }
}

#[test]
fn declared_properties_hold_on_every_entry() {
    for id in CATALOG_IDS {
        let e = lookup(id).unwrap();
        check_props(&e, &Sample::random(&e.manifold, 100, 2024));
    }
}

#[test]
fn declared_eigenvalues_hold() {
    for id in CATALOG_IDS {
        let e = lookup(id).unwrap();
        let s = Sample::random(&e.manifold, 5, 17);
        for f in e.forms().unwrap() {
            let Some(ev) = f.eigenvalue else { continue };
            for x in &s.points {
                let (lam, res) = laplace_eigenvalue(&e.manifold, &f.field, x).unwrap();
                assert!(
                    (lam - ev).abs() <= 1e-6 * ev.abs().max(1.0),
                    "{id} {}: {lam} vs {ev}",
                    f.id
                );
                assert!(res < 1e-7, "{id} {}: eigenform residual {res}", f.id);
            }
        }
    }
}

#[test]
fn unknown_ids_are_rejected() {
    assert!(matches!(lookup("s9_weird"), Err(Error::UnknownId(_))));
    let s3 = lookup("s3").unwrap();
    for bad in [
        "nk_omega",
        "basis:1",
        "basis:1:99",
        "omega_k",
        "xi_star:3",
        "psi_abc:1:1",
    ] {
        assert!(s3.form(bad).is_err(), "{bad}");
    }
    assert!(lookup("t2").unwrap().form("parallel:5").is_err());
}

#[test]
fn sphere_basis_counts_and_eigenvalues() {
    // S³, p = 1: 6 Killing with eigenvalue 4 and 4 ∗-Killing with eigenvalue 3
    let b = sphere_ckf_basis(3, 1).unwrap();
    let killing: Vec<_> = b
        .iter()
        .filter(|f| f.props.contains(&Property::Killing))
        .collect();
    let star: Vec<_> = b
        .iter()
        .filter(|f| f.props.contains(&Property::StarKilling))
        .collect();
    assert_eq!((killing.len(), star.len()), (6, 4));
    assert!(killing.iter().all(|f| f.eigenvalue == Some(4.0)));
    assert!(star.iter().all(|f| f.eigenvalue == Some(3.0)));
    assert_eq!(sphere_ckf_basis(2, 1).unwrap().len(), 6);
    for (n, p) in [(2, 1), (3, 1), (3, 2), (4, 2), (5, 3)] {
        let m = lookup(&format!("s{n}")).unwrap().manifold;
        let s = Sample::random(&m, 8, 3);
        let basis = sphere_ckf_basis(n, p).unwrap();
        let c = |a: usize, k: usize| twistor_core::multiindex::binomial(a, k);
        assert_eq!(basis.len(), c(n + 2, p + 1));
        for f in &basis {
            assert!(
                ckf_residual(&m, &f.field, &s, TOL).unwrap().pass,
                "s{n} {}",
                f.id
            );
            let (lam, _) = laplace_eigenvalue(&m, &f.field, &s.points[0]).unwrap();
            assert!((lam - f.eigenvalue.unwrap()).abs() < 1e-8, "s{n} {}", f.id);
        }
    }
    assert!(matches!(
        sphere_ckf_basis(3, 0),
        Err(Error::DegenerateDegree { .. })
    ));
    assert!(matches!(
        sphere_ckf_basis(3, 3),
        Err(Error::DegenerateDegree { .. })
    ));
}

#[test]
fn embedding_induced_forms_are_chart_consistent() {
    for id in ["s2", "s3", "s5", "s6_nk", "s7_g2", "s7_3sas"] {
        let e = lookup(id).unwrap();
        let s = Sample::random(&e.manifold, 10, 8);
        for f in e.forms().unwrap() {
            let south = f.south.as_ref().expect("sphere forms carry a south twin");
            for x in &s.points {
                // stay away from the chart poles
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if !(0.05..20.0).contains(&r2) {
                    continue;
                }
                let d = chart_mismatch(&e.manifold, &f.field, south, x).unwrap();
                assert!(d < 1e-9, "{id} {} at {x:?}: {d}", f.id);
            }
        }
    }
    let t2 = lookup("t2").unwrap();
    let f = t2.form("parallel:0").unwrap().field;
    assert!(chart_mismatch(&t2.manifold, &f, &f, &[0.1, 0.2]).is_err());
}

#[test]
fn hopf_sasakian_relations() {
    for (id, nprime) in [("s3", 1u32), ("s5", 2), ("s7", 3)] {
        let e = lookup(id).unwrap();
        let m = &e.manifold;
        let xi = e.form("xi_star").unwrap().field;
        let factorial: u32 = (1..=nprime).product();
        let expected = 2f64.powi(nprime as i32) * factorial as f64;
        for x in &Sample::random(m, 20, 5).points {
            assert!(unit_length_residual(m, &xi, x).unwrap() < 1e-12);
            assert!(sasaki_eq10_residual(m, &xi, x).unwrap() < TOL);
            assert!(sasaki_eq11_residual(m, &xi, x).unwrap() < TOL);
            assert!(phi_squared_residual(m, &xi, x).unwrap() < TOL);
            let ratio = contact_volume_ratio(m, &xi, x).unwrap();
            assert!(
                (ratio.abs() - expected).abs() < 1e-9 * expected,
                "{id}: {ratio}"
            );
        }
    }
}

#[test]
fn omega_k_special_constants() {
    let e = lookup("s5").unwrap();
    let s = Sample::random(&e.manifold, 10, 6);
    for k in 0..2usize {
        let f = e.form(&format!("omega_k:{k}")).unwrap().field;
        let c = -2.0 * (k + 1) as f64;
        let r = special_killing_residual(&e.manifold, &f, c, &s, SpecialVariant::FirstOrder, TOL)
            .unwrap();
        assert!(r.pass, "{r:?}");
    }
    // top degree k = n' is parallel
    let top = e.form("omega_k:2").unwrap().field;
    assert!(parallel_residual(&e.manifold, &top, &s, TOL).unwrap().pass);
    assert!(e.form("omega_k:3").is_err());
}

#[test]
fn converse_sasakian_probe() {
    for id in ["s3", "s5"] {
        let e = lookup(id).unwrap();
        let xi = e.form("xi_star").unwrap().field;
        let r = sasaki_converse_probe(&e, &xi, &Sample::random(&e.manifold, 10, 9), 1e-7).unwrap();
        assert_eq!(r.status, ProbeStatus::Holds, "{id}: {}", r.reason);
        assert!((r.scalar_curvature - e.scalar_curvature).abs() < 1e-8);
    }
    let t = lookup("t3").unwrap();
    let xi = t.form("parallel:0").unwrap().field;
    let r = sasaki_converse_probe(&t, &xi, &Sample::random(&t.manifold, 5, 9), 1e-7).unwrap();
    assert_eq!(r.status, ProbeStatus::Inconclusive);
    assert!(r.eq10.is_none());
}

#[test]
fn three_sasakian_relations() {
    let e = lookup("s7_3sas").unwrap();
    let m = &e.manifold;
    let etas = [1, 2, 3].map(|i| e.form(&format!("eta:{i}")).unwrap().field);
    for x in &Sample::random(m, 10, 12).points {
        let r = so3_relations(m, &etas, x).unwrap();
        assert!(r.orthonormality < 1e-12, "{r:?}");
        assert!((r.structure_constant.abs() - 2.0).abs() < 1e-10, "{r:?}");
        assert!(r.bracket_residual < 1e-10, "{r:?}");
    }
    // ψ_{1,0,0} is η₁
    let psi = e.form("psi_abc:1:0:0").unwrap().field;
    for x in &Sample::random(m, 5, 1).points {
        let (a, b) = (psi.values(x).unwrap(), etas[0].values(x).unwrap());
        let d =
            a.c.iter()
                .zip(&b.c)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
        assert!(d < 1e-13);
    }
    // degree overflow and the empty index are errors
    assert!(e.form("psi_abc:3:2:0").is_err());
    assert!(e.form("psi_abc:0:0:0").is_err());
}

#[test]
fn nearly_kahler_s6() {
    let e = lookup("s6_nk").unwrap();
    let m = &e.manifold;
    assert_eq!(e.scalar_curvature, 30.0);
    let w = e.form("nk_omega").unwrap().field;
    let cp = CrossProduct::new(structures::associative_form()).unwrap();
    assert_eq!(cp.arity, 1);
    let s = Sample::random(m, 50, 30);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
    for x in &s.points {
        let dirs: Vec<Vec<f64>> = (0..4)
            .map(|_| {
                (0..6)
                    .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
                    .collect()
            })
            .collect();
        assert!(j_squared_residual(m, &w, x).unwrap() < 1e-10);
        assert!(nearly_parallel_residual(m, &w, x, &dirs).unwrap() < TOL);
        let ah = almost_hermitian_identity(m, &w, x).unwrap();
        assert!(ah.size < TOL && ah.residual < TOL, "{ah:?}");
        // J agrees with the cross product with the base point
        let (_, ginv) = m.metric_at(x).unwrap();
        let j = almost_complex_from_form(&ginv, &w.values(x).unwrap()).unwrap();
        for v in &dirs {
            let p = cp.apply(x, std::slice::from_ref(v)).unwrap();
            let jv: Vec<f64> = (0..6)
                .map(|k| (0..6).map(|i| j[k * 6 + i] * v[i]).sum())
                .collect();
            let d = p
                .iter()
                .zip(&jv)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(d < 1e-10, "{d}");
            let (orth, nrm) = cross_product_axioms(&cp, m, x, std::slice::from_ref(v)).unwrap();
            assert!(orth < 1e-9 && nrm < 1e-9);
        }
        let (s_val, einstein) = einstein_defect(m, x).unwrap();
        assert!((s_val - 30.0).abs() < 1e-8 && einstein < 1e-8);
    }
    let fit = fit_special_constant(m, &w, &Sample::random(m, 10, 1)).unwrap();
    assert!(
        (fit.constant + 3.0).abs() < 1e-7 && fit.fit_residual < 1e-7,
        "{fit:?}"
    );
}

#[test]
fn nk_star_domega() {
    let e = lookup("s6_nk").unwrap();
    let m = &e.manifold;
    let w = e.form("nk_omega").unwrap().field;
    let sdw = e.form("nk_star_domega").unwrap().field;
    let s = Sample::random(m, 10, 31);
    for x in &s.points {
        let (lam, res) = laplace_eigenvalue(m, &w, x).unwrap();
        assert!((lam - 12.0).abs() < 12e-6 && res < 1e-7);
    }
    // d(★dω) = −12 ★ω
    let star_w = twistor_core::catalog::star_field(m.metric_fn(), m.orientation, &w);
    let lhs = sdw.exterior_d();
    for x in &s.points {
        let (a, b) = (lhs.values(x).unwrap(), star_w.values(x).unwrap());
        let d =
            a.c.iter()
                .zip(&b.c)
                .map(|(u, v)| (u + 12.0 * v).abs())
                .fold(0.0, f64::max);
        assert!(d < 1e-7 * b.max_abs().max(1.0), "{d}");
    }
    let fit = fit_special_constant(m, &sdw, &s).unwrap();
    assert!(
        (fit.constant + 4.0).abs() < 1e-7 && fit.fit_residual < 1e-7,
        "{fit:?}"
    );
}

#[test]
fn weak_g2_s7() {
    let e = lookup("s7_g2").unwrap();
    let m = &e.manifold;
    assert_eq!(e.scalar_curvature, 42.0);
    let phi = e.form("g2_phi").unwrap().field;
    let cayley = structures::cayley_form();
    // self-dual on ℝ⁸
    let star = structures::flat_star(&cayley);
    assert!(cayley
        .c
        .iter()
        .zip(&star.c)
        .all(|(a, b)| (a - b).abs() < 1e-14));
    let cp = CrossProduct::new(cayley).unwrap();
    assert_eq!(cp.arity, 2);
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(5);
    for x in &Sample::random(m, 30, 77).points {
        let vs: Vec<Vec<f64>> = (0..2)
            .map(|_| {
                (0..7)
                    .map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0))
                    .collect()
            })
            .collect();
        let (orth, nrm) = cross_product_axioms(&cp, m, x, &vs).unwrap();
        assert!(orth < 1e-9 && nrm < 1e-9, "{orth} {nrm}");
        assert!(nearly_parallel_residual(m, &phi, x, &vs).unwrap() < TOL);
    }
    let fit = fit_special_constant(m, &phi, &Sample::random(m, 10, 2)).unwrap();
    assert!(
        (fit.constant + 4.0).abs() < 1e-7 && fit.fit_residual < 1e-7,
        "{fit:?}"
    );
}

#[test]
fn almost_hermitian_identity_on_perturbed_structure() {
    for a in [0.2, 0.7] {
        let (m, w) = perturbed_hermitian_r4(a);
        for x in &Sample::random(&m, 10, 3).points {
            assert!(j_squared_residual(&m, &w, x).unwrap() < 1e-12);
            let r = almost_hermitian_identity(&m, &w, x).unwrap();
            // both sides are nonzero and agree
            assert!(r.size > 1e-3, "{r:?}");
            assert!(r.residual < 1e-10 * r.size, "{r:?}");
        }
        // not nearly Kähler: the Kähler form is not conformal Killing
        assert!(
            !ckf_residual(&m, &w, &Sample::random(&m, 5, 1), TOL)
                .unwrap()
                .pass
        );
    }
}

#[test]
fn product_forms() {
    let e = lookup("s2xs3").unwrap();
    let s = Sample::random(&e.manifold, 30, 8);
    let xi = e.form("m2:xi_star").unwrap().field;
    assert!(killing_residual(&e.manifold, &xi, &s, TOL).unwrap().pass);
    let w = e.form("vol1^m2:basis:1:6").unwrap().field;
    assert!(ckf_residual(&e.manifold, &w, &s, TOL).unwrap().pass);
    // a wedge with the volume form is CKF but neither Killing nor ∗-Killing
    assert!(!killing_residual(&e.manifold, &w, &s, TOL).unwrap().pass);
    let t = lookup("t2xs2").unwrap();
    let par = t.form("vol2^m1:parallel:0").unwrap().field;
    assert!(
        parallel_residual(&t.manifold, &par, &Sample::random(&t.manifold, 10, 1), TOL)
            .unwrap()
            .pass
    );
    assert!(e.form("m3:xi_star").is_err());
}
