//! Link-level uplink simulation for planar antenna arrays whose elements do
//! not radiate identically.
//!
//! Real array elements see different embedded gains depending on direction
//! (mutual coupling, edge effects), and that asymmetry shows up directly in
//! per-user detection performance. This crate models the chain end to end:
//! array geometry and steering ([`geometry`]), per-element gain patterns
//! ([`gain`]), uplink channel synthesis ([`channel`]), linear detectors and
//! achievable rates ([`detectors`]), received-power budgets ([`budget`]),
//! and a reproducible Monte Carlo experiment harness ([`scenario`]).
//!
//! Angles are radians everywhere inside the library; degrees appear only at
//! file and CLI boundaries. Decibel quantities are explicit in names
//! (`_db`, `_dbm`, `_dbi`); everything else is linear. Noise power is fixed
//! at one, so transmit powers are per-user SNRs.

pub mod budget;
pub mod channel;
pub mod detectors;
pub mod error;
pub mod gain;
pub mod geometry;
pub mod report;
pub mod scenario;
mod stats;
pub mod substream;

pub use channel::{ChannelMatrix, ClusterSpec, UserSpec};
pub use error::{Error, Result};
pub use gain::GainPattern;
pub use geometry::{ArrayGeometry, Direction};
pub use report::{emit_results, gain_stats_report};
pub use scenario::{RateCurves, RateRecord, ScenarioConfig};
pub use substream::Substreams;

/// Propagation speed used to convert carrier frequency to wavelength (m/s).
pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
