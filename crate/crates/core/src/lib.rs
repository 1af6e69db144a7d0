//! Interference alignment for finite-state compound MIMO broadcast channels.
//!
//! The crate builds the number-theoretic alignment schemes for a base
//! station with `M` antennas serving `K` single-antenna receivers whose
//! channels each take one of finitely many states, checks their alignment
//! properties with exact monomial algebra, and simulates them over AWGN.
//!
//! Module map:
//! - [`channel`]: channel instances, sampling, genericity diagnostics.
//! - [`monomial`]: exact pseudo-vector algebra and closed-form counts.
//! - [`codec`]: the X-channel alignment scheme (parameters, encoding,
//!   received constellations).
//! - [`constellation`]: enumeration, minimum distance and hard detection.
//! - [`hybrid`]: zero-forcing plus alignment for the partially known case.
//! - [`dof`] and [`bounds`]: exact DoF values and outer-bound checks.
//! - [`sim`]: Monte Carlo trials, sweeps and DoF slope estimation.

pub mod bounds;
pub mod channel;
pub mod codec;
pub mod constellation;
pub mod dof;
pub mod error;
pub mod field;
pub mod hybrid;
pub mod monomial;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use field::{Scalar, ScalarField};
