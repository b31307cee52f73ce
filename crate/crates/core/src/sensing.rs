//! Measurement models (GPS fix, inter-vehicle range and azimuth) and the
//! differential coordinates derived from them.
//!
//! Azimuth is the bearing from observer to target measured clockwise from
//! +y, so that `Δx = d·sin(az)` and `Δy = d·cos(az)`. With that convention
//! `−d·sin(az)` summed over the neighbours of `i` and divided by the degree
//! is exactly `x_i − mean(x_j)`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::graph::GraphSnapshot;
use crate::kinematics::normalize_angle;
use crate::{Error, Point, Result};

/// Standard deviations of the three measurement models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Range noise, meters.
    pub sigma_d: f64,
    /// Azimuth noise, radians.
    pub sigma_az: f64,
    /// GPS noise along x, meters.
    pub sigma_x: f64,
    /// GPS noise along y, meters.
    pub sigma_y: f64,
}

impl NoiseParams {
    /// σ_x = 3 m, σ_y = 2.5 m, σ_d = 1 m, σ_az = 4°.
    pub fn reference() -> Self {
        Self {
            sigma_d: 1.0,
            sigma_az: 4f64.to_radians(),
            sigma_x: 3.0,
            sigma_y: 2.5,
        }
    }

    pub fn noiseless() -> Self {
        Self {
            sigma_d: 0.0,
            sigma_az: 0.0,
            sigma_x: 0.0,
            sigma_y: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.sigma_d, self.sigma_az, self.sigma_x, self.sigma_y];
        if all.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Config(format!("noise deviations must be finite and >= 0: {self:?}")));
        }
        Ok(())
    }

    /// Expected GPS squared error `σ_x² + σ_y²`.
    pub fn gps_mean_square_error(&self) -> f64 {
        self.sigma_x * self.sigma_x + self.sigma_y * self.sigma_y
    }
}

/// Range and azimuth as seen by one observer looking at one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeBearing {
    pub range: f64,
    pub azimuth: f64,
}

/// Noisy observations for one tick. Each graph edge is measured twice,
/// independently, once from each end; keys are `(observer, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub gps: Vec<Point>,
    pub relative: BTreeMap<(usize, usize), RangeBearing>,
}

impl MeasurementSet {
    pub fn get(&self, observer: usize, target: usize) -> Option<&RangeBearing> {
        self.relative.get(&(observer, target))
    }
}

/// Bearing from `observer` to `target`, clockwise from +y, in `[0, 2π)`.
pub fn true_azimuth(observer: Point, target: Point) -> Result<f64> {
    let dx = target.x - observer.x;
    let dy = target.y - observer.y;
    if !(dx.is_finite() && dy.is_finite()) {
        return Err(Error::invalid("non-finite azimuth endpoints"));
    }
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::invalid("azimuth undefined for coincident points"));
    }
    Ok(normalize_angle(dx.atan2(dy)))
}

/// Samples GPS fixes for every vehicle and range/azimuth for both
/// directions of every edge.
///
/// Draw order is fixed: GPS x then y per vehicle, then for each edge in
/// `graph.edges()` order the `(i, j)` range and azimuth followed by the
/// `(j, i)` range and azimuth. A standard normal is drawn for every sample
/// even when its deviation is zero, so changing one σ never shifts the
/// stream for the others.
pub fn measure_all<R: Rng + ?Sized>(
    truth: &[Point],
    graph: &GraphSnapshot,
    noise: &NoiseParams,
    rng: &mut R,
) -> Result<MeasurementSet> {
    if truth.len() != graph.vertex_count() {
        return Err(Error::invalid(format!(
            "{} positions for a graph of {} vehicles",
            truth.len(),
            graph.vertex_count()
        )));
    }
    let mut gaussian = || -> f64 { rng.sample(StandardNormal) };

    let gps = truth
        .iter()
        .map(|p| {
            let ex = gaussian();
            let ey = gaussian();
            Point::new(p.x + noise.sigma_x * ex, p.y + noise.sigma_y * ey)
        })
        .collect();

    let mut relative = BTreeMap::new();
    for &(i, j) in graph.edges() {
        for (obs, tgt) in [(i, j), (j, i)] {
            let range = truth[obs].distance(&truth[tgt]);
            // coincident vehicles have no defined bearing; any angle works
            // since the range is zero
            let azimuth = true_azimuth(truth[obs], truth[tgt]).unwrap_or(0.0);
            let noisy_range = (range + noise.sigma_d * gaussian()).max(0.0);
            let noisy_azimuth = normalize_angle(azimuth + noise.sigma_az * gaussian());
            relative.insert(
                (obs, tgt),
                RangeBearing {
                    range: noisy_range,
                    azimuth: noisy_azimuth,
                },
            );
        }
    }
    Ok(MeasurementSet { gps, relative })
}

/// Per-vehicle differential coordinates `δ_i = v_i − mean(v_j)` estimated
/// from range and azimuth.
#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialCoords {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
}

impl DifferentialCoords {
    pub fn len(&self) -> usize {
        self.dx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dx.is_empty()
    }
}

pub fn differential_coords(meas: &MeasurementSet, graph: &GraphSnapshot) -> Result<DifferentialCoords> {
    let n = graph.vertex_count();
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    for i in 0..n {
        let neighbours = graph.neighbours(i);
        if neighbours.is_empty() {
            continue;
        }
        let (mut sx, mut sy) = (0.0, 0.0);
        for &j in neighbours {
            let obs = meas
                .get(i, j)
                .ok_or_else(|| Error::invalid(format!("missing measurement for edge ({i}, {j})")))?;
            let (sin, cos) = obs.azimuth.sin_cos();
            sx -= obs.range * sin;
            sy -= obs.range * cos;
        }
        let d = neighbours.len() as f64;
        dx[i] = sx / d;
        dy[i] = sy / d;
    }
    Ok(DifferentialCoords { dx, dy })
}

/// Differential coordinates computed straight from true positions.
pub fn exact_differential_coords(truth: &[Point], graph: &GraphSnapshot) -> DifferentialCoords {
    let n = graph.vertex_count();
    let mut dx = vec![0.0; n];
    let mut dy = vec![0.0; n];
    for i in 0..n {
        let nb = graph.neighbours(i);
        if nb.is_empty() {
            continue;
        }
        let d = nb.len() as f64;
        dx[i] = truth[i].x - nb.iter().map(|&j| truth[j].x).sum::<f64>() / d;
        dy[i] = truth[i].y - nb.iter().map(|&j| truth[j].y).sum::<f64>() / d;
    }
    DifferentialCoords { dx, dy }
}

/// Angle difference folded into `(−π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}
