//! Link-level simulation and union-bound analysis of RIS-assisted received
//! adaptive spatial modulation.
//!
//! The transmitter picks an antenna combination (AC) from a seeded table and
//! a constellation point; the RIS aligns disjoint element groups onto the
//! antennas of that AC, and the receiver jointly detects both indices.

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod baselines;
pub mod channel;
pub mod cli;
pub mod error;
pub mod mapping;
pub mod modem;
pub mod montecarlo;
pub mod ris;

pub use error::{Error, Result};
