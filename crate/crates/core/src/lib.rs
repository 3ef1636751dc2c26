//! Reduction of mechanical systems with symmetry in gauge (dependent)
//! coordinates: the gauge slice, the mechanical connection, the local
//! Lagrange–Poincaré equations and their relative equilibria, together with
//! a full-space oracle to check the reduction against.
//!
//! Numerical kernels are generic over [`Scalar`], so every derivative can be
//! taken with forward-mode [`Dual`] numbers. The aliases below fix the
//! common instantiations.

// Tensor contractions read best with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod connection;
pub mod dual;
pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod fd;
pub mod gauge;
pub mod lie_group;
pub mod linalg;
pub mod oracle;
pub mod sampling;
pub mod scalar;
pub mod system;

pub use connection::GeometryCache;
pub use dual::Dual;
pub use dynamics::{integrate, IntegrateOptions, ReducedState, Trajectory};
pub use equilibria::{solve_equilibrium, RelativeEquilibrium};
pub use error::{Error, Result};
pub use gauge::{decompose, AdaptedPoint, GaugeOptions, ProjectorSet};
pub use lie_group::LieGroup;
pub use linalg::Mat;
pub use oracle::{compare, FullState};
pub use scalar::Scalar;
pub use system::{AnySystem, MechanicalSystem, So3Warped, SystemSpec};

pub type Dual64 = Dual<f64>;
pub type HyperDual64 = Dual<Dual<f64>>;
pub type Mat64 = Mat<f64>;
pub type ProjectorSet64 = ProjectorSet<f64>;
pub type GeometryCache64 = GeometryCache<f64>;
