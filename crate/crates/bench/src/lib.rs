//! Benchmark fixtures for the operator stack.

use twistor_core::catalog::{lookup, NamedForm};
use twistor_core::geometry::ChartManifold;
use twistor_core::twistor::Sample;

/// A catalog manifold, one of its forms and a fixed sample.
pub struct Fixture {
    pub manifold: ChartManifold,
    pub form: NamedForm,
    pub sample: Sample,
}

pub fn fixture(manifold: &str, form: &str, points: usize) -> Fixture {
    let e = lookup(manifold).expect("catalog id");
    let form = e.form(form).expect("form id");
    let sample = Sample::random(&e.manifold, points, 1);
    Fixture {
        manifold: e.manifold,
        form,
        sample,
    }
}

/// First sample point.
pub fn point(f: &Fixture) -> &[f64] {
    &f.sample.points[0]
}
