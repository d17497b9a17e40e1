//! Linear control toolkit for a steam-turbine driven DC generator.
//!
//! The crate covers the whole chain from physical parameters to closed-loop
//! traces: [`plant`] builds the turbine and generator transfer functions,
//! [`riccati`] synthesizes LQR gains, [`observer`] assembles observer-based
//! compensators, and [`sim`] integrates the resulting state-space models and
//! extracts step-response metrics. [`cli`] wires it all to the `regforge`
//! binary.

// `!(x > 0.0)` style checks are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod lti;
pub mod numfmt;
pub mod observer;
pub mod plant;
pub mod riccati;
pub mod sim;

pub use error::{Error, Result};
