//! Simulation library for visible-light links whose transmitters carry
//! chiral gold-nanoparticle (GNP) plates between linear polarizers.
//!
//! The crate covers polarization algebra, plate responses, a single-bounce
//! indoor channel, MRT/artificial-noise precoding, polarizer-angle
//! optimization, secrecy metrics and seeded experiment runners.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angles;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod gnp;
pub mod metrics;
pub mod polarization;
pub mod precoding;
pub mod rng;

pub use error::{Error, Result};
