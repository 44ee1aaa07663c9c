//! Exact symbolic construction and verification of conformally invariant
//! differential operators on differential forms over Einstein manifolds.

pub mod coeff;
pub mod error;
pub mod factory;
pub mod form;
pub mod spectral;
pub mod torus;
pub mod tractor;
pub mod verify;

pub use coeff::{Half, PolyJ, RatJ, Rational};
pub use error::{Error, Result};
pub use form::{FormContext, FormExpr, FormWord, Letter, Monomial, OpContext, OperatorPoly, Proportionality};
pub use spectral::{PointKind, SpectralModel, SpectralPoint};
pub use tractor::{Slot, TractorForm};
