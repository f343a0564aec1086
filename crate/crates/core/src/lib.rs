//! Fourth-order Rabi-frequency expansion of Rydberg excitation in frozen
//! gases, with an exact 2^N-state propagator to check it against.
//!
//! Time is measured in units of the pulse duration `T` throughout, so the
//! laser envelope `f(τ)`, its running integral `F(τ)` and the pair
//! couplings `k_ij = 2π C T / R^s` are all dimensionless.

pub mod correlation;
pub mod error;
pub mod expansion;
pub mod interactions;
pub mod oracle;
pub mod pulse;
pub mod quadrature;
pub mod saturation;
pub mod summation;
pub mod units;

pub use error::{Error, Result};
pub use interactions::{Angular, AtomEnsemble, Geometry, InteractionKernel};
pub use pulse::{PulseSpec, Shape};
