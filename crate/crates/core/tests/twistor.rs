use proptest::prelude::*;
use twistor_core::catalog::ambient::great_circle_start;
use twistor_core::catalog::{lookup, random_form};
use twistor_core::error::Error;
use twistor_core::forms::{Form, FormField};
use twistor_core::geometry::LocalGeom;
use twistor_core::jets::Jet;
use twistor_core::twistor::conformal::{conformal_rescale, linear, sine_bump};
use twistor_core::twistor::decompose::decompose_curvature_action;
use twistor_core::twistor::identities::*;
use twistor_core::twistor::*;

#[test]
fn constant_forms_on_flat_torus_are_parallel_and_twistor_free() {
    let t = lookup("t3").unwrap();
    let s = Sample::random(&t.manifold, 10, 1);
    let f = t.form("parallel:0").unwrap().field;
    assert_eq!(
        ckf_residual(&t.manifold, &f, &s, 1e-12)
            .unwrap()
            .max_residual,
        0.0
    );
    let tv = twistor_apply(&t.manifold, &f, &s.points[0]).unwrap();
    assert_eq!(tv.norm, 0.0);
}

#[test]
fn twistor_value_lies_in_the_kernel_of_both_traces() {
    let e = lookup("s2xs3").unwrap();
    for p in 1..5 {
        let psi = random_form(5, p, 40 + p as u64);
        for x in &Sample::random(&e.manifold, 5, 2).points {
            let tv = twistor_apply(&e.manifold, &psi, x).unwrap();
            assert!(tv.norm > 1e-3);
            assert!(tv.wedge_trace < 1e-12 * tv.norm.max(1.0), "{tv:?}");
            assert!(tv.contraction_trace < 1e-12 * tv.norm.max(1.0), "{tv:?}");
        }
    }
}

#[test]
fn degenerate_degrees_are_errors() {
    let e = lookup("s3").unwrap();
    let s = Sample::random(&e.manifold, 2, 1);
    for p in [0, 3] {
        let f = random_form(3, p, 1);
        assert!(matches!(
            ckf_residual(&e.manifold, &f, &s, 1e-8),
            Err(Error::DegenerateDegree { .. })
        ));
    }
    let f = random_form(3, 1, 1);
    assert!(matches!(
        ckf_residual(&e.manifold, &f, &Sample::from_points(vec![]), 1e-8),
        Err(Error::EmptySample)
    ));
}

#[test]
fn random_forms_are_not_conformal_killing() {
    for (id, p) in [("s3", 1), ("s3", 2), ("s2xs3", 2)] {
        let e = lookup(id).unwrap();
        let f = random_form(e.dim(), p, 3);
        let r = ckf_residual(&e.manifold, &f, &Sample::random(&e.manifold, 10, 1), 1e-7).unwrap();
        assert!(r.max_residual > 1e-2, "{r:?}");
    }
}

#[test]
fn nan_residuals_fail() {
    let e = lookup("s3").unwrap();
    let s = Sample::random(&e.manifold, 4, 1);
    let r = evaluate("nan", 1.0, &s, |x| {
        Ok(if x[0] > -10.0 { f64::NAN } else { 0.0 })
    })
    .unwrap();
    assert!(!r.pass);
}

#[test]
fn weitzenbock_formulas_on_random_forms() {
    for (id, p) in [
        ("s3", 1),
        ("s3", 2),
        ("s2xs3", 1),
        ("s2xs3", 2),
        ("s2xs3", 3),
    ] {
        let e = lookup(id).unwrap();
        for seed in 0..6u64 {
            let psi = random_form(e.dim(), p, 100 + seed);
            for x in &Sample::random(&e.manifold, 1, seed).points {
                let w = weitzenbock_residuals(&e.manifold, &psi, x).unwrap();
                assert!(
                    w.eq_rough < 1e-6 && w.eq_curvature < 1e-6,
                    "{id} p={p}: {w:?}"
                );
                assert!(w.classical < 1e-7, "{id} p={p}: {w:?}");
                assert!(w.tstar_t_norm > 1e-3);
            }
        }
    }
}

#[test]
fn norm_estimate_gap_equals_twistor_norm() {
    let e = lookup("s2xs3").unwrap();
    for p in 1..5 {
        for seed in 0..3u64 {
            let psi = random_form(5, p, seed);
            for x in &Sample::random(&e.manifold, 2, seed).points {
                let g = norm_estimate_gap(&e.manifold, &psi, x).unwrap();
                assert!(g.gap >= -1e-10);
                assert!(
                    (g.gap - g.twistor_sq).abs() < 1e-9 * g.nabla_sq.max(1.0),
                    "{g:?}"
                );
            }
        }
    }
    for (id, f) in [
        ("s3", "xi_star"),
        ("s5", "omega_k:1"),
        ("s2xs3", "vol1^m2:basis:1:6"),
    ] {
        let e = lookup(id).unwrap();
        let psi = e.form(f).unwrap().field;
        for x in &Sample::random(&e.manifold, 5, 2).points {
            let g = norm_estimate_gap(&e.manifold, &psi, x).unwrap();
            assert!(g.gap.abs() < 1e-9 * g.nabla_sq.max(1.0), "{id} {f}: {g:?}");
        }
    }
}

#[test]
fn projection_reconstructs_the_covariant_derivative() {
    let e = lookup("s5").unwrap();
    for p in 1..5 {
        let psi = random_form(5, p, 9);
        for x in &Sample::random(&e.manifold, 3, 4).points {
            assert!(reconstruction_residual(&e.manifold, &psi, x).unwrap() < 1e-12);
        }
    }
}

#[test]
fn conformal_invariance_of_conformal_killing_forms() {
    let cases = [
        ("s3", "xi_star"),
        ("s5", "omega_k:1"),
        ("s2xs3", "vol1^m2:basis:1:6"),
    ];
    for (id, f) in cases {
        let e = lookup(id).unwrap();
        let psi = e.form(f).unwrap().field;
        for lam in [sine_bump(0.4, 0), linear(-0.3, 1)] {
            let (m2, psi2) = conformal_rescale(&e.manifold, &psi, lam);
            let s = Sample::random(&e.manifold, 20, 5);
            let r = ckf_residual(&m2, &psi2, &s, 1e-8).unwrap();
            assert!(r.pass, "{id} {f}: {r:?}");
            // Killing is not conformally invariant
            if f == "xi_star" {
                assert!(!killing_residual(&m2, &psi2, &s, 1e-8).unwrap().pass);
            }
        }
    }
}

#[test]
fn killing_identities() {
    for (id, f) in [
        ("s3", "xi_star"),
        ("s5", "omega_k:1"),
        ("s6_nk", "nk_omega"),
        ("s7_g2", "g2_phi"),
    ] {
        let e = lookup(id).unwrap();
        let m = &e.manifold;
        let psi = e.form(f).unwrap().field;
        for x in &Sample::random(m, 5, 21).points {
            assert!(
                integrability_residual(m, &psi, x).unwrap() < 1e-8,
                "{id} {f}"
            );
            assert!(
                killing_eigen_residual(m, &psi, x).unwrap() < 1e-8,
                "{id} {f}"
            );
            assert!(
                symmetrized_characterization(m, &psi, x).unwrap() < 1e-8,
                "{id} {f}"
            );
            assert!(
                killing_trace_residual(m, &psi, x).unwrap() < 1e-12,
                "{id} {f}"
            );
            assert!(cyclic_residual(m, &psi, x).unwrap() < 1e-8, "{id} {f}");
        }
    }
    // a random form fails the symmetrized characterization
    let e = lookup("s3").unwrap();
    let x = Sample::random(&e.manifold, 1, 2).points[0].clone();
    let psi = random_form(3, 1, 5);
    assert!(symmetrized_characterization(&e.manifold, &psi, &x).unwrap() > 1e-3);
    assert!(cyclic_residual(&e.manifold, &psi, &x).unwrap() > 1e-3);
    // the trace identity holds for every form
    assert!(killing_trace_residual(&e.manifold, &psi, &x).unwrap() < 1e-12);
}

#[test]
fn killing_tensor_first_integrals() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for (id, f) in [("s3", "xi_star"), ("s5", "omega_k:1")] {
        let e = lookup(id).unwrap();
        let psi = e.form(f).unwrap().field;
        for _ in 0..2 {
            let (x0, v0) = great_circle_start(e.dim(), 0.6, &mut rng);
            let d = killing_tensor_drift(&e.manifold, &psi, &x0, &v0, 2.0, 1e-2).unwrap();
            assert!(
                d.killing_tensor < 1e-7 && d.contraction_norm < 1e-7,
                "{id}: {d:?}"
            );
        }
    }
}

#[test]
fn low_degree_curvature_endomorphism() {
    for (id, p) in [("s3", 1), ("s2xs3", 1), ("s2xs3", 2), ("s5", 2)] {
        let e = lookup(id).unwrap();
        let psi = random_form(e.dim(), p, 2);
        for x in &Sample::random(&e.manifold, 3, 1).points {
            assert!(
                low_degree_q_residual(&e.manifold, &psi, x).unwrap() < 1e-10,
                "{id} p={p}"
            );
        }
    }
}

#[test]
fn q_r_is_p_n_minus_p_on_spheres() {
    for (n, p) in [(3, 1), (4, 2), (5, 2), (6, 2)] {
        let e = lookup(&format!("s{n}")).unwrap();
        let psi = random_form(n, p, 8);
        for x in &Sample::random(&e.manifold, 5, 3).points {
            let lg = LocalGeom::new(&e.manifold, x, 2).unwrap().truncate(0);
            let f = psi.at(x, 0).unwrap();
            let q = twistor_core::forms::q_r(&lg, &f).unwrap().values();
            let k = (p * (n - p)) as f64;
            let v = f.values();
            let d =
                q.c.iter()
                    .zip(&v.c)
                    .map(|(a, b)| (a - k * b).abs())
                    .fold(0.0, f64::max);
            assert!(d < 1e-8 * v.max_abs().max(1.0), "n={n} p={p}: {d}");
        }
    }
}

#[test]
fn curvature_condition_on_catalog_ckfs() {
    let cases = [
        ("s3", "xi_star"),
        ("s3", "dxi_star"),
        ("s5", "omega_k:1"),
        ("s6_nk", "nk_omega"),
        ("s2xs3", "m2:xi_star"),
        ("s2xs3", "vol1^m2:basis:1:6"),
    ];
    for (id, f) in cases {
        let e = lookup(id).unwrap();
        let psi = e.form(f).unwrap().field;
        for x in &Sample::random(&e.manifold, 5, 3).points {
            assert!(
                curvature_condition(&e.manifold, &psi, x).unwrap() < 1e-7,
                "{id} {f}"
            );
        }
    }
    // a random form on a non-conformally-flat manifold violates it
    let e = lookup("s2xs3").unwrap();
    let psi = random_form(5, 2, 1);
    let x = Sample::random(&e.manifold, 1, 3).points[0].clone();
    assert!(curvature_condition(&e.manifold, &psi, &x).unwrap() > 1e-3);
}

#[test]
fn curvature_decomposition() {
    let e = lookup("s2xs3").unwrap();
    let m = &e.manifold;
    // arbitrary forms: Bianchi kills Λ^{p±2}, and the Λ^p part is q(R)ψ / (p(n−p))
    for p in 1..5 {
        let psi = random_form(5, p, 60 + p as u64);
        for x in &Sample::random(m, 3, 6).points {
            let c = decompose_curvature_action(m, &psi, x).unwrap();
            let tol = 1e-10 * c.total.max(1.0);
            assert!(
                c.lambda_p_plus_2.unwrap_or(0.0) < tol && c.lambda_p_minus_2.unwrap_or(0.0) < tol
            );
            assert!(
                (c.q_ratio - 1.0 / (p * (5 - p)) as f64).abs() < 1e-10,
                "{c:?}"
            );
            assert!(c.q_defect < 1e-10);
            let parts = [
                c.lambda_p,
                c.lambda_p_plus_1_1.unwrap_or(0.0),
                c.lambda_p_minus_1_1.unwrap_or(0.0),
                c.lambda_p_2,
            ];
            let sq: f64 = parts.iter().map(|v| v * v).sum();
            assert!(
                (sq.sqrt() - c.total).abs() < 1e-9 * c.total.max(1.0),
                "{c:?}"
            );
        }
    }
    // conformal Killing forms: Λ^{p,2} vanishes; closed ⇒ Λ^{p+1,1}, coclosed ⇒ Λ^{p−1,1}
    let killing = e.form("m2:xi_star").unwrap().field;
    let closed = e.form("vol1^m2:basis:1:6").unwrap().field;
    for x in &Sample::random(m, 5, 7).points {
        let a = decompose_curvature_action(m, &killing, x).unwrap();
        assert!(a.lambda_p_2 < 1e-10);
        assert!(a.lambda_p_minus_1_1.is_none());
        assert!(a.lambda_p_plus_1_1.unwrap() > 1e-3);
        let b = decompose_curvature_action(m, &closed, x).unwrap();
        assert!(
            b.lambda_p_2 < 1e-10 && b.lambda_p_plus_1_1.unwrap() < 1e-10,
            "{b:?}"
        );
        assert!(b.lambda_p_minus_1_1.unwrap() > 1e-3);
    }
    let k2 = e.form("m1:basis:1:0").unwrap().field;
    let x = Sample::random(m, 1, 2).points[0].clone();
    let c = decompose_curvature_action(m, &k2, &x).unwrap();
    assert!(c.lambda_p_2 < 1e-10);
}

fn jets_form(n: usize, p: usize, vals: &[f64]) -> Form<Jet> {
    let f = Form::from_coeffs(n, p, vals.to_vec()).unwrap();
    f.to_jets(n, 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projection_is_idempotent_and_trace_free(
        n in 3usize..6,
        pick in 0usize..4,
        seed in any::<u64>(),
    ) {
        use rand::{Rng, SeedableRng};
        let p = 1 + pick % (n - 1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let len = twistor_core::multiindex::binomial(n, p);
        // random SPD metric
        let a: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-0.4..0.4)).collect();
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = (0..n).map(|k| a[i * n + k] * a[j * n + k]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
            }
        }
        let gl = nalgebra::DMatrix::from_row_slice(n, n, &g).try_inverse().unwrap();
        let gj: Vec<Jet> = g.iter().map(|&v| Jet::constant(n, 0, v)).collect();
        let gij: Vec<Jet> = (0..n * n).map(|k| Jet::constant(n, 0, gl[(k / n, k % n)])).collect();
        let s: Vec<Form<Jet>> = (0..n)
            .map(|_| jets_form(n, p, &(0..len).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()))
            .collect();
        let pr = project_p1(&gj, &gij, &s).unwrap();
        let pr2 = project_p1(&gj, &gij, &pr).unwrap();
        for (u, v) in pr.iter().zip(&pr2) {
            for (a, b) in u.c.iter().zip(&v.c) {
                prop_assert!((a.value() - b.value()).abs() < 1e-11);
            }
        }
        prop_assert!(wedge_trace(&pr).unwrap().values().max_abs() < 1e-11);
        prop_assert!(contraction_trace(&gij, &pr).unwrap().values().max_abs() < 1e-11);
    }

    #[test]
    fn twistor_operator_is_linear(seed in 0u64..1000, a in -2.0f64..2.0) {
        let e = lookup("s3").unwrap();
        let f1 = random_form(3, 1, seed);
        let f2 = random_form(3, 1, seed + 1);
        let comb = FormField::combination("c", &[(a, f1.clone()), (1.0, f2.clone())]).unwrap();
        let x = Sample::random(&e.manifold, 1, seed).points[0].clone();
        let (t1, t2, tc) = (
            twistor_apply(&e.manifold, &f1, &x).unwrap(),
            twistor_apply(&e.manifold, &f2, &x).unwrap(),
            twistor_apply(&e.manifold, &comb, &x).unwrap(),
        );
        for i in 0..3 {
            for j in 0..t1.t[i].len() {
                let want = a * t1.t[i][j] + t2.t[i][j];
                prop_assert!((tc.t[i][j] - want).abs() < 1e-10 * (1.0 + want.abs()));
            }
        }
    }
}
