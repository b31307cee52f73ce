//! Cooperative localization for fleets of connected vehicles.
//!
//! Vehicles share noisy GPS fixes plus inter-vehicle range and azimuth
//! measurements. Two centralized estimators recover positions from them:
//!
//! - [`grcl`]: per-tick least-squares solve of the graph Laplacian stacked
//!   over anchor rows (graph regularization).
//! - [`glrr`]: a sliding window over the GR-CL inputs whose solution is
//!   constrained to low rank via hard singular-value truncation.
//!
//! [`kinematics`] simulates ground truth with the CTRV model, [`graph`]
//! builds the vehicular network, [`sensing`] produces measurements and
//! differential coordinates, and [`harness`] runs Monte-Carlo experiments.

pub mod error;
pub mod glrr;
pub mod graph;
pub mod grcl;
pub mod harness;
pub mod kinematics;
pub mod numerics;
pub mod sensing;

pub use error::{Error, Result};

/// A point in the planar Cartesian frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}
