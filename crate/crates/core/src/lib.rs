//! Detection for large/massive MIMO uplink.
//!
//! The library covers the full desk-scale simulation chain: square QAM
//! alphabets with Gray labels, an i.i.d. complex Gaussian uplink channel,
//! linear ZF/MMSE detection backed by either an exact Cholesky inverse or an
//! iterative approximate inverse (orders 2, 3 and 7), a hybrid sphere
//! decoder seeded with the approximate-inverse Babai radius, numerical
//! checks for the radius-gap identities, and a Monte Carlo harness with CSV
//! output behind the `mimo-sim` CLI.

pub mod analysis;
pub mod channel;
pub mod constellation;
pub mod detect;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod sphere;

pub use error::{Error, Result};
