//! Conformal rescaling of conformal Killing forms.

use std::sync::Arc;

use crate::error::Result;
use crate::forms::FormField;
use crate::geometry::ChartManifold;
use crate::jets::Jet;

/// Scalar function of chart coordinates.
pub type ScalarFn = Arc<dyn Fn(&[Jet]) -> Result<Jet> + Send + Sync>;

/// `(ĝ, ψ̂) = (e^{2λ} g, e^{(p+1)λ} ψ)`.
pub fn conformal_rescale(
    m: &ChartManifold,
    psi: &FormField,
    lambda: ScalarFn,
) -> (ChartManifold, FormField) {
    let p = psi.p as f64;
    let lam = lambda.clone();
    let factor: ScalarFn = Arc::new(move |u: &[Jet]| Ok(lam(u)?.scale(p + 1.0).exp()));
    let rescaled = psi.mul_function(format!("e^((p+1)λ){}", psi.label), factor);
    (m.conformal(lambda), rescaled)
}

/// `λ(x) = a · sin(x_i)`.
pub fn sine_bump(a: f64, i: usize) -> ScalarFn {
    Arc::new(move |u: &[Jet]| Ok(u[i].sin().scale(a)))
}

/// `λ(x) = a · x_i`.
pub fn linear(a: f64, i: usize) -> ScalarFn {
    Arc::new(move |u: &[Jet]| Ok(u[i].scale(a)))
}
