//! Robust joint time allocation and power control for multi-antenna
//! wireless-powered networks with a saturating energy harvester.
//!
//! A power station beams energy to `K` users during `tau0`; each user then
//! spends what it harvested on an uplink transmission of length `tau_k`.
//! Channel estimates carry bounded errors and every decision is made for the
//! worst channel in the error set.

pub mod allocator;
pub mod channel;
pub mod eh_model;
pub mod error;
pub mod linalg;
pub mod simulator;
pub mod verify;

pub use error::{Result, WpcnError};
