//! Numerical L2 geometry of holomorphic-map and abelian vortex moduli spaces
//! on the round sphere.
//!
//! The crate is organised around one pipeline: discretise the unit-area
//! source sphere spectrally ([`sphere`]), represent degree-r holomorphic maps
//! to CP^k as polynomial tuples ([`poly`]), assemble the limiting L2 metric on
//! moduli in affine chart coordinates ([`metric`]), solve the gauge equation
//! that produces the finite-coupling vortex metric ([`vortex`]), and integrate
//! volume densities by importance-sampled Monte Carlo ([`volume`]).  The
//! closed volume formulas for all genera are evaluated exactly in [`formula`].

pub mod error;
pub mod formula;
pub mod linalg;
pub mod metric;
pub mod poly;
pub mod roots;
pub mod sphere;
pub mod volume;
pub mod vortex;

pub use error::{Error, Result};
pub use metric::{MetricDiagnostics, MetricMatrix};
pub use poly::{Chart, Divisor, PolyTuple, SpherePoint};
pub use sphere::{ScalarField, SphereGrid};
pub use volume::VolumeEstimate;
pub use vortex::{KWSolution, VortexConfig, VortexMetricReport};
