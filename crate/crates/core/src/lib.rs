#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Simulation and appraisal core for on-demand public transit (ODT).
//!
//! The crate is split the way an ODT study is run:
//!
//! - [`network`]: road graph, distance-based shortest paths, zones.
//! - [`demand`]: ride requests, demand-level scaling and supply scaling.
//! - [`dispatch`]: Greedy, Shared Greedy, DARP insertion, fixed-route boarding
//!   and hybrid request routing.
//! - [`engine`]: the event-driven 24 h simulator producing trip and fleet logs.
//! - [`costing`], [`emissions`], [`efficiency`], [`equity`]: the appraisal layer
//!   (net annual cost, GHG, generalized cost curves, Lorenz/Gini).
//!
//! Everything here is pure computation over in-memory data. File formats, the
//! scenario config and the command line live in the `odt-lab` crate.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod costing;
pub mod demand;
pub mod dispatch;
pub mod efficiency;
pub mod emissions;
pub mod engine;
pub mod equity;
mod error;
mod ids;
pub mod math;
pub mod network;

pub use error::{Error, Result};
pub use ids::{EdgeId, NodeId, RequestId, VehicleId, ZoneId};

/// Length of the simulated service day, in seconds.
pub const HORIZON_S: f64 = 86_400.0;
