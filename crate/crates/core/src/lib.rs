//! Lifetime-aware dimensioning of elastic-link manipulators.
//!
//! The crate simulates a three-joint articulated arm with two elastic links
//! and elastic gearboxes following a pick-and-place trajectory, turns the
//! curvature at the clamped link roots into stress histories, estimates the
//! fatigue lifetime with rainflow counting and the critical cutting plane
//! method, and sweeps link wall thicknesses to build a mass/vibration Pareto
//! front.

pub mod beam;
pub mod config;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod fatigue;
pub mod par;
pub mod quadrature;
pub mod rainflow;
pub mod stress;
pub mod trajectory;

pub use error::{Error, Result};
