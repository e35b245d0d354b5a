//! Correlated-catalytic state conversion for single-shot quantum thermodynamics.
//!
//! The crate is organised bottom-up: [`qops`] holds dense operator algebra,
//! [`divergences`] the entropic quantities, [`channel`] the Gibbs-preserving
//! measure-and-prepare constructions, [`catalyst`] the catalyst and the
//! conversion pipeline, and [`experiments`] the reproducible worked examples.
//! [`cli`] exposes everything through the `catalyq` binary.

// Guards are written `!(x >= 0.0)` on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalyst;
pub mod channel;
pub mod cli;
pub mod config;
pub mod divergences;
pub mod error;
pub mod experiments;
pub mod qops;
pub mod symmetric;

pub use config::Tolerances;
pub use error::{Error, Result};
