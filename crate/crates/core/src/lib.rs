//! Conformal Killing forms on chart-described Riemannian manifolds.
//!
//! The crate evaluates every differential expression at a point through
//! truncated Taylor jets ([`jets`]), so covariant derivatives, curvature and
//! their combinations are exact up to floating-point round-off.

pub mod catalog;
pub mod coeff;
pub mod cone;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod jets;
pub mod killingconn;
pub mod multiindex;
pub mod spin;
pub mod twistor;

pub use coeff::Coeff;
pub use error::{Error, Result};
pub use forms::{Form, FormField, FormValued};
pub use geometry::{ChartManifold, GeometryFrame, LocalGeom};
pub use jets::Jet;
