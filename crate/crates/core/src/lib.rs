//! Desk-scale laboratory for a multidimensional contracting-Lorenz (Rovella-type)
//! attractor built over a non-uniformly expanding torusphere map.
//!
//! The crate is organised bottom-up:
//!
//! - [`interval_maps`]: the unimodal quotient maps, fixed points, itineraries and
//!   the tent-map conjugacy.
//! - [`torusphere`]: the skew map on the torusphere, its derivative cocycle and
//!   the domination ratio.
//! - [`pliss`]: Pliss times, hyperbolic times and the two-stage constant pipeline.
//! - [`solenoid`]: the solid-torus skew product feeding the fiber of the return map.
//! - [`flow_model`]: cross-section projections, near-saddle passages, re-injection
//!   and the return map with its return times.
//! - [`measures`]: Birkhoff statistics, recurrence, basin and condition probes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod flow_model;
pub mod interval_maps;
pub mod measures;
pub mod pliss;
pub mod rng;
pub mod solenoid;
pub mod torusphere;

pub use error::{Error, Result};
