//! Equivariant superconducting interfaces: transverse profiles, the linearized
//! operator about them, effective interface dynamics, Minkowski normal
//! coordinates, a direct radial wave solver and the modulated-ansatz error study.

pub mod ansatz;
pub mod coords;
pub mod effective;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod linop;
pub mod potential;
pub mod profiles;
pub mod spline;
pub mod validation;
pub mod wavesim;

pub use error::{Error, Result};
pub use potential::{FieldPoint, Potential, PotentialSpec};
