//! Vacuum kinetic energy of a massless scalar field in 1+1 dimensions
//! coupled to a delta-function potential `2λ(t)δ(x)` whose strength is
//! switched off over a finite time.
//!
//! The crate evaluates mode amplitudes (closed form and ODE), regularized
//! static and radiated energy densities, and the energy carried away by
//! the pulse emitted during the switch-off.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod mode;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
pub use mode::{BoxMode, BoxSpectrum};
pub use potential::{PotentialProfile, ProfileKind, ProfileSpec};
pub use quadrature::QuadratureSpec;
pub use spectral::{DensitySample, EnergyReport};
