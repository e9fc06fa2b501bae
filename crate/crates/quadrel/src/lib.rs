//! Self-validating adaptive quadrature built on the Gauss-Kronrod 10-21 rule.
//!
//! A local rule application yields the couple {q2n, e2n}; the profile of the
//! integrand at the quadrature knots is then screened by six consistency
//! criteria that either validate the error estimate, point to an isolated
//! difficult point, or reject the subrange as unresolved. The adaptive driver
//! tracks diagnosis stability across subdivisions, and the bench module
//! reproduces the accuracy-basin and spurious-diagnostic experiments for the
//! power, arctangent and oscillatory integral families.

pub mod adaptive;
pub mod bench;
pub mod criteria;
pub mod error;
pub mod expr;
pub mod profile;
pub mod rule;
pub mod verdict;

pub use adaptive::{integrate, AdaptiveResult, Status, SubrangeRecord};
pub use criteria::{analyze, CriterionId, CriterionReport, Locus, ReliabilityDiagnosis};
pub use error::{Error, Result};
pub use profile::{IntegrandProfile, KnotClass};
pub use rule::{local_estimate, map_knots, quad_sums, Interval, LocalEstimate, QuadRule};
pub use verdict::{decide, Verdict, VerdictKind};
