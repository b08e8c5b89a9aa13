//! Strongly regular valuation priors, sample-based revenue curves, budgeted
//! allocation LPs and the auction mechanisms built on them.

pub mod dist;
pub mod empirical;
pub mod error;
pub mod lp;
pub mod mech;
pub mod numeric;
pub mod scalar;

pub use dist::{DiscreteDist, DistKind, DistSpec, RevenueCurvePoint, ValuationDistribution};
pub use empirical::{EmpiricalModel, GuaranteeSlacks, SampleParams};
pub use error::{Error, Result};
pub use scalar::{Real, Scalar};

/// Exact rational scalar for identity checks.
pub type Rational = num_rational::Ratio<i128>;
pub type Dist64 = ValuationDistribution<f64>;
pub type Discrete64 = DiscreteDist<f64>;
