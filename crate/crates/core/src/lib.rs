//! Simulation and verification of Hamiltonian dynamics on Bertrand spaces.

// `!(x > 0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod orbits;
pub mod quadrature;
pub mod runge_lenz;
pub mod scalar;
pub mod spaces;
pub mod vec3;

pub use dynamics::{IntegrationSettings, PhaseState, Trajectory};
pub use error::{Error, Result};
pub use scalar::Real;
pub use spaces::{BertrandParams, BertrandSpace, Branch, Family, RadialDomain};
pub use vec3::{Mat3, Vec3};

pub type ParamsF64 = BertrandParams<f64>;
pub type SpaceF64 = BertrandSpace<f64>;
pub type StateF64 = PhaseState<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
