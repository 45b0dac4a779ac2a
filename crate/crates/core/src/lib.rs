//! Simulation, analysis and fitting of cavity-filtered biphoton frequency combs.
//!
//! Frequencies are angular (rad/s), delays are seconds, wavelengths are metres.
//! States are sampled in the sum/difference coordinates ω± = ω_s ± ω_i.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biphoton;
pub mod cavity;
pub mod commands;
pub mod config;
pub mod error;
pub mod estimation;
pub mod export;
pub mod hom;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
