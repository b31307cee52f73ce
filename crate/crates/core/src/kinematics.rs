//! Ground-truth fleet trajectories under the constant-turn-rate-and-velocity
//! (CTRV) model.

use std::f64::consts::TAU;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Point, Result};

/// Below this yaw rate (rad/s) the straight-line limit of CTRV is used.
/// The turning branch deviates from a straight line by `s·ω·dt²/2`, so the
/// threshold must stay well below `2e-6 / (s·dt²)` to keep the two branches
/// within a micrometer of each other at highway speeds.
pub const YAW_RATE_EPS: f64 = 1e-9;

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// One vehicle at one tick. Heading is measured counter-clockwise from +x.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehiclePose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    pub yaw_rate: f64,
}

impl VehiclePose {
    pub fn new(x: f64, y: f64, heading: f64, speed: f64, yaw_rate: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
            speed,
            yaw_rate,
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    fn validate(&self) -> Result<()> {
        let fields = [self.x, self.y, self.heading, self.speed, self.yaw_rate];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite pose {self:?}")));
        }
        if self.speed < 0.0 {
            return Err(Error::invalid(format!("negative speed {}", self.speed)));
        }
        Ok(())
    }
}

/// Advances a pose by `dt` seconds with the closed-form CTRV update.
pub fn step_ctrv(pose: &VehiclePose, dt: f64) -> Result<VehiclePose> {
    pose.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("time step must be positive, got {dt}")));
    }
    let VehiclePose {
        x,
        y,
        heading,
        speed,
        yaw_rate,
    } = *pose;

    let (nx, ny, nheading) = if yaw_rate.abs() < YAW_RATE_EPS {
        (
            x + speed * dt * heading.cos(),
            y + speed * dt * heading.sin(),
            heading,
        )
    } else {
        // (s/ω)(sin(θ+ωΔT) − sin θ) rewritten with the half-angle identity
        // as s·ΔT·sinc(ωΔT/2)·cos(θ + ωΔT/2); same value, no cancellation
        // for small ω
        let half = 0.5 * yaw_rate * dt;
        let chord = speed * dt * half.sin() / half;
        let mid = heading + half;
        (
            x + chord * mid.cos(),
            y + chord * mid.sin(),
            heading + yaw_rate * dt,
        )
    };
    Ok(VehiclePose::new(nx, ny, nheading, speed, yaw_rate))
}

/// How the per-vehicle motion parameters are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MotionMode {
    /// One heading, speed and yaw rate shared by the whole fleet: the
    /// formation translates rigidly and the graph never changes.
    #[default]
    Parallel,
    /// Every vehicle draws its own heading, speed and yaw rate.
    Independent,
}

/// Fleet generation parameters. Vehicles start in a convoy grid of
/// `lanes` columns whose row and lane gaps are drawn from
/// `[spacing_min, spacing_max]`, oriented along the initial heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetConfig {
    pub vehicles: usize,
    pub ticks: usize,
    pub dt: f64,
    pub lanes: usize,
    pub spacing_min: f64,
    pub spacing_max: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub yaw_rate_min: f64,
    pub yaw_rate_max: f64,
    pub heading_min: f64,
    pub heading_max: f64,
    pub motion: MotionMode,
}

impl Default for FleetConfig {
    fn default() -> Self {
        Self {
            vehicles: 20,
            ticks: 500,
            dt: 1.0,
            lanes: 3,
            spacing_min: 10.0,
            spacing_max: 15.0,
            speed_min: 8.0,
            speed_max: 14.0,
            yaw_rate_min: -0.05,
            yaw_rate_max: 0.05,
            heading_min: 0.0,
            heading_max: TAU,
            motion: MotionMode::Parallel,
        }
    }
}

fn check_range(name: &str, lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::Config(format!("{name} range [{lo}, {hi}] is invalid")));
    }
    Ok(())
}

fn draw(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

impl FleetConfig {
    pub fn validate(&self) -> Result<()> {
        if self.vehicles == 0 {
            return Err(Error::Config("fleet needs at least one vehicle".into()));
        }
        if self.ticks == 0 {
            return Err(Error::Config("fleet needs at least one tick".into()));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if self.lanes == 0 {
            return Err(Error::Config("lanes must be at least 1".into()));
        }
        check_range("spacing", self.spacing_min, self.spacing_max)?;
        check_range("speed", self.speed_min, self.speed_max)?;
        check_range("yaw_rate", self.yaw_rate_min, self.yaw_rate_max)?;
        check_range("heading", self.heading_min, self.heading_max)?;
        if self.spacing_min < 0.0 || self.speed_min < 0.0 {
            return Err(Error::Config("spacing and speed must be non-negative".into()));
        }
        Ok(())
    }
}

/// Ground truth for `vehicles` vehicles over `ticks` ticks.
#[derive(Debug, Clone, PartialEq)]
pub struct FleetTrajectory {
    vehicles: usize,
    ticks: usize,
    dt: f64,
    poses: Vec<VehiclePose>,
}

impl FleetTrajectory {
    /// `poses` is tick-major: all vehicles of tick 0, then tick 1, ...
    pub fn new(vehicles: usize, ticks: usize, dt: f64, poses: Vec<VehiclePose>) -> Result<Self> {
        if vehicles == 0 || ticks == 0 {
            return Err(Error::invalid("trajectory needs N >= 1 and T >= 1"));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if poses.len() != vehicles * ticks {
            return Err(Error::invalid(format!(
                "expected {} poses for N={vehicles}, T={ticks}, got {}",
                vehicles * ticks,
                poses.len()
            )));
        }
        Ok(Self {
            vehicles,
            ticks,
            dt,
            poses,
        })
    }

    pub fn vehicles(&self) -> usize {
        self.vehicles
    }

    pub fn ticks(&self) -> usize {
        self.ticks
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn poses(&self) -> &[VehiclePose] {
        &self.poses
    }

    pub fn tick(&self, k: usize) -> &[VehiclePose] {
        &self.poses[k * self.vehicles..(k + 1) * self.vehicles]
    }

    pub fn pose(&self, k: usize, vehicle: usize) -> &VehiclePose {
        &self.tick(k)[vehicle]
    }

    pub fn positions(&self, k: usize) -> Vec<Point> {
        self.tick(k).iter().map(VehiclePose::position).collect()
    }
}

/// Initial convoy grid in the fleet frame: rows trail backwards along the
/// heading, lanes stack to the left.
fn convoy_offsets(config: &FleetConfig, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let rows = config.vehicles.div_ceil(config.lanes);
    let mut row_offset = vec![0.0; rows];
    for r in 1..rows {
        row_offset[r] = row_offset[r - 1] + draw(rng, config.spacing_min, config.spacing_max);
    }
    let mut lane_offset = vec![0.0; config.lanes];
    for l in 1..config.lanes {
        lane_offset[l] = lane_offset[l - 1] + draw(rng, config.spacing_min, config.spacing_max);
    }
    (0..config.vehicles)
        .map(|v| (-row_offset[v / config.lanes], lane_offset[v % config.lanes]))
        .collect()
}

/// Draws initial states from `config` and integrates them with
/// [`step_ctrv`]. Identical `(config, seed)` pairs give identical output.
pub fn generate_fleet(config: &FleetConfig, seed: u64) -> Result<FleetTrajectory> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let fleet_heading = draw(&mut rng, config.heading_min, config.heading_max);
    let fleet_speed = draw(&mut rng, config.speed_min, config.speed_max);
    let fleet_yaw = draw(&mut rng, config.yaw_rate_min, config.yaw_rate_max);
    let offsets = convoy_offsets(config, &mut rng);
    let (sin_h, cos_h) = fleet_heading.sin_cos();

    let mut current: Vec<VehiclePose> = offsets
        .iter()
        .map(|&(along, lateral)| {
            let x = along * cos_h - lateral * sin_h;
            let y = along * sin_h + lateral * cos_h;
            match config.motion {
                MotionMode::Parallel => {
                    VehiclePose::new(x, y, fleet_heading, fleet_speed, fleet_yaw)
                }
                MotionMode::Independent => VehiclePose::new(
                    x,
                    y,
                    draw(&mut rng, config.heading_min, config.heading_max),
                    draw(&mut rng, config.speed_min, config.speed_max),
                    draw(&mut rng, config.yaw_rate_min, config.yaw_rate_max),
                ),
            }
        })
        .collect();

    let mut poses = Vec::with_capacity(config.vehicles * config.ticks);
    poses.extend_from_slice(&current);
    for _ in 1..config.ticks {
        current = current
            .iter()
            .map(|p| step_ctrv(p, config.dt))
            .collect::<Result<_>>()?;
        poses.extend_from_slice(&current);
    }
    FleetTrajectory::new(config.vehicles, config.ticks, config.dt, poses)
}
