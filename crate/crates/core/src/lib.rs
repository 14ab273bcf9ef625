//! Hierarchical trajectory-tracking control with dynamic control allocation
//! for a star-shaped dual-tilt hexarotor.
//!
//! A high-level wrench controller ([`controller`]) drives the platform
//! ([`dynamics`]); the commanded wrench is realized by an 18-state actuator
//! system ([`actuation`]) steered by a gradient-flow allocator
//! ([`allocator`]) that also descends a secondary objective ([`objective`])
//! in the output null space. [`sim`] integrates the coupled loop and
//! [`analysis`] extracts steady-state amplitudes and offsets from the
//! recorded runs.

// `!(x > 0.0)` is used on purpose so NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod actuation;
pub mod allocator;
pub mod analysis;
pub mod config;
pub mod controller;
pub mod dynamics;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod objective;
pub mod record;
pub mod runner;
pub mod sim;
pub mod trajectory;

pub use error::{Error, Result};
