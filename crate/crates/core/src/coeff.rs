//! Scalar coefficient types shared by the exterior algebra: plain reals and jets.

use crate::jets::Jet;

pub trait Coeff: Clone + Send + Sync + std::fmt::Debug {
    fn zero_like(&self) -> Self;
    fn constant_like(&self, v: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    /// `self += s * o`
    fn axpy(&mut self, s: f64, o: &Self);
    /// `self += s * a * b`
    fn fma(&mut self, s: f64, a: &Self, b: &Self);
    fn value(&self) -> f64;
}

impl Coeff for f64 {
    fn zero_like(&self) -> f64 {
        0.0
    }
    fn constant_like(&self, v: f64) -> f64 {
        v
    }
    fn add(&self, o: &f64) -> f64 {
        self + o
    }
    fn sub(&self, o: &f64) -> f64 {
        self - o
    }
    fn mul(&self, o: &f64) -> f64 {
        self * o
    }
    fn scale(&self, s: f64) -> f64 {
        self * s
    }
    fn axpy(&mut self, s: f64, o: &f64) {
        *self += s * o;
    }
    fn fma(&mut self, s: f64, a: &f64, b: &f64) {
        *self += s * a * b;
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Coeff for Jet {
    fn zero_like(&self) -> Jet {
        Jet::zero_like(self)
    }
    fn constant_like(&self, v: f64) -> Jet {
        Jet::constant_like(self, v)
    }
    fn add(&self, o: &Jet) -> Jet {
        self.add_jet(o)
    }
    fn sub(&self, o: &Jet) -> Jet {
        self.sub_jet(o)
    }
    fn mul(&self, o: &Jet) -> Jet {
        self.mul_jet(o)
    }
    fn scale(&self, s: f64) -> Jet {
        Jet::scale(self, s)
    }
    fn axpy(&mut self, s: f64, o: &Jet) {
        Jet::axpy(self, s, o)
    }
    fn fma(&mut self, s: f64, a: &Jet, b: &Jet) {
        Jet::fma(self, s, a, b)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
}
