//! Energy statistics under the angular (great-circle) metric on spheres.
//!
//! The crate covers:
//!
//! * [`sphere`]: points of S^n, the angular metric d^r, hemispheres and the
//!   gnomonic projection;
//! * [`measure`]: finitely supported signed measures, reflection,
//!   antisymmetrization, invariant parts and hemisphere masses;
//! * [`negtype`]: the sum-zero quadratic form of the metric and a spectral
//!   certificate for strict negative type;
//! * [`transform`]: Monte Carlo checks of the hemisphere integral identities
//!   and fingerprint comparisons;
//! * [`stats`] and [`cluster`]: distance covariance, energy distance,
//!   permutation tests and energy-linkage clustering;
//! * [`verify`]: seeded randomized runs of all of the above.
//!
//! Antipodally symmetric mass is invisible to hemisphere masses and, at r = 1,
//! to the energy distance. Sets with at most one antipodal pair are free of
//! that blind spot, as is the whole sphere under d^r with r < 1.

pub mod cluster;
pub mod error;
pub mod measure;
pub mod negtype;
pub mod sampling;
pub mod sphere;
pub mod stats;
pub mod transform;
pub mod verify;

pub use error::{Error, Result};
pub use measure::{DiscreteMeasure, HemisphereFingerprint};
pub use negtype::{DistanceMatrix, Strictness, StrictnessCertificate};
pub use sphere::{Hemisphere, MetricPower, UnitVector};
pub use stats::{PairedSample, TestReport};
pub use transform::MonteCarloEstimate;
