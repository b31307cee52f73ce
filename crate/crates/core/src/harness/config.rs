//! Experiment configuration, read from a flat TOML key/value file.
//!
//! ```toml
//! vehicles = 20          # fleet keys; omit them all when using trajectory_file
//! ticks = 500
//! sigma_az_deg = 4.0
//! method = "all"         # gps | gr-cl | glrr-cl | all
//! tau = 10
//! s = 3
//! trials = 50
//! seed = 7
//! ```
//!
//! Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::glrr::{GlrrConfig, WindowAnchors};
use crate::grcl::AnchorSelection;
use crate::kinematics::{FleetConfig, MotionMode};
use crate::sensing::NoiseParams;
use crate::{Error, Result};

/// The three estimators compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Gps,
    GrCl,
    GlrrCl,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Gps, Method::GrCl, Method::GlrrCl];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Gps => "gps",
            Method::GrCl => "gr-cl",
            Method::GlrrCl => "glrr-cl",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

/// `gps`, `gr-cl`, `glrr-cl` or `all`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSelection {
    Gps,
    GrCl,
    GlrrCl,
    #[default]
    All,
}

impl MethodSelection {
    /// Methods to report. GPS is always included as the baseline.
    pub fn methods(&self) -> Vec<Method> {
        match self {
            MethodSelection::Gps => vec![Method::Gps],
            MethodSelection::GrCl => vec![Method::Gps, Method::GrCl],
            MethodSelection::GlrrCl => vec![Method::Gps, Method::GlrrCl],
            MethodSelection::All => Method::ALL.to_vec(),
        }
    }
}

impl FromStr for MethodSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gps" => Ok(Self::Gps),
            "gr-cl" => Ok(Self::GrCl),
            "glrr-cl" => Ok(Self::GlrrCl),
            "all" => Ok(Self::All),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (expected gps, gr-cl, glrr-cl or all)"
            ))),
        }
    }
}

/// Whether the graph follows the vehicles or stays as built at tick 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    /// Rebuilt every tick; GLRR-CL refactors and restarts its window when
    /// the edge set changes.
    #[default]
    Dynamic,
    /// Built once from tick 0 and used for every tick.
    Frozen,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FleetSource {
    Generated(FleetConfig),
    TrajectoryFile(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Connectivity {
    pub radius: f64,
    pub max_degree: usize,
}

impl Default for Connectivity {
    fn default() -> Self {
        Self {
            radius: 20.0,
            max_degree: 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub fleet: FleetSource,
    /// Tick period used for file-based trajectories.
    pub dt: f64,
    pub noise: NoiseParams,
    pub connectivity: Connectivity,
    pub graph_mode: GraphMode,
    pub method: MethodSelection,
    pub tau: usize,
    pub s: usize,
    pub window_anchors: WindowAnchors,
    /// `None` anchors every vehicle on its GPS fix.
    pub anchor_ids: Option<Vec<usize>>,
    pub anchor_weight: f64,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            fleet: FleetSource::Generated(FleetConfig::default()),
            dt: 1.0,
            noise: NoiseParams::reference(),
            connectivity: Connectivity::default(),
            graph_mode: GraphMode::Dynamic,
            method: MethodSelection::All,
            tau: 10,
            s: 3,
            window_anchors: WindowAnchors::GrCl,
            anchor_ids: None,
            anchor_weight: 1.0,
            trials: 50,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn glrr(&self) -> GlrrConfig {
        GlrrConfig {
            tau: self.tau,
            rank_bound: self.s,
            anchors: self.window_anchors,
        }
    }

    pub fn anchors(&self) -> AnchorSelection {
        match &self.anchor_ids {
            None => AnchorSelection::All,
            Some(ids) => AnchorSelection::Subset(ids.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let FleetSource::Generated(f) = &self.fleet {
            f.validate()?;
            if f.ticks < self.tau {
                return Err(Error::Config(format!(
                    "ticks = {} leaves nothing after the {}-tick window warmup",
                    f.ticks, self.tau
                )));
            }
            if self.s > f.vehicles {
                return Err(Error::Config(format!("s = {} exceeds vehicles = {}", self.s, f.vehicles)));
            }
        }
        self.noise.validate()?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.connectivity.radius.is_finite() && self.connectivity.radius > 0.0) {
            return Err(Error::Config("radius must be positive".into()));
        }
        if self.connectivity.max_degree == 0 {
            return Err(Error::Config("max_degree must be at least 1".into()));
        }
        if self.tau == 0 || self.s == 0 || self.s > self.tau {
            return Err(Error::Config(format!(
                "need 1 <= s <= tau, got s = {}, tau = {}",
                self.s, self.tau
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(self.anchor_weight.is_finite() && self.anchor_weight > 0.0) {
            return Err(Error::Config("anchor_weight must be positive".into()));
        }
        if matches!(&self.anchor_ids, Some(ids) if ids.is_empty()) {
            return Err(Error::Config("anchor_ids must not be empty".into()));
        }
        Ok(())
    }

    /// Parses config text. Relative `trajectory_file` paths resolve against
    /// `base_dir`.
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        raw.resolve(base_dir)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, path.parent())
    }
}

/// On-disk key set.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    trajectory_file: Option<PathBuf>,
    vehicles: Option<usize>,
    ticks: Option<usize>,
    lanes: Option<usize>,
    spacing_min: Option<f64>,
    spacing_max: Option<f64>,
    speed_min: Option<f64>,
    speed_max: Option<f64>,
    yaw_rate_min: Option<f64>,
    yaw_rate_max: Option<f64>,
    heading_min: Option<f64>,
    heading_max: Option<f64>,
    motion: Option<MotionMode>,
    dt: Option<f64>,
    sigma_x: Option<f64>,
    sigma_y: Option<f64>,
    sigma_d: Option<f64>,
    sigma_az_deg: Option<f64>,
    radius: Option<f64>,
    max_degree: Option<usize>,
    graph_mode: Option<GraphMode>,
    method: Option<String>,
    tau: Option<usize>,
    s: Option<usize>,
    window_anchors: Option<WindowAnchors>,
    anchor_ids: Option<Vec<usize>>,
    anchor_weight: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
}

impl RawConfig {
    fn has_fleet_keys(&self) -> bool {
        self.vehicles.is_some()
            || self.ticks.is_some()
            || self.lanes.is_some()
            || self.spacing_min.is_some()
            || self.spacing_max.is_some()
            || self.speed_min.is_some()
            || self.speed_max.is_some()
            || self.yaw_rate_min.is_some()
            || self.yaw_rate_max.is_some()
            || self.heading_min.is_some()
            || self.heading_max.is_some()
            || self.motion.is_some()
    }

    fn resolve(self, base_dir: Option<&Path>) -> Result<ExperimentConfig> {
        let d = ExperimentConfig::default();
        let dt = self.dt.unwrap_or(d.dt);

        let fleet = match &self.trajectory_file {
            Some(path) => {
                if self.has_fleet_keys() {
                    return Err(Error::Config(
                        "trajectory_file cannot be combined with fleet generation keys".into(),
                    ));
                }
                let path = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                FleetSource::TrajectoryFile(path)
            }
            None => {
                let f = FleetConfig::default();
                FleetSource::Generated(FleetConfig {
                    vehicles: self.vehicles.unwrap_or(f.vehicles),
                    ticks: self.ticks.unwrap_or(f.ticks),
                    dt,
                    lanes: self.lanes.unwrap_or(f.lanes),
                    spacing_min: self.spacing_min.unwrap_or(f.spacing_min),
                    spacing_max: self.spacing_max.unwrap_or(f.spacing_max),
                    speed_min: self.speed_min.unwrap_or(f.speed_min),
                    speed_max: self.speed_max.unwrap_or(f.speed_max),
                    yaw_rate_min: self.yaw_rate_min.unwrap_or(f.yaw_rate_min),
                    yaw_rate_max: self.yaw_rate_max.unwrap_or(f.yaw_rate_max),
                    heading_min: self.heading_min.unwrap_or(f.heading_min),
                    heading_max: self.heading_max.unwrap_or(f.heading_max),
                    motion: self.motion.unwrap_or(f.motion),
                })
            }
        };

        let n = d.noise;
        let config = ExperimentConfig {
            fleet,
            dt,
            noise: NoiseParams {
                sigma_d: self.sigma_d.unwrap_or(n.sigma_d),
                sigma_az: self.sigma_az_deg.map(f64::to_radians).unwrap_or(n.sigma_az),
                sigma_x: self.sigma_x.unwrap_or(n.sigma_x),
                sigma_y: self.sigma_y.unwrap_or(n.sigma_y),
            },
            connectivity: Connectivity {
                radius: self.radius.unwrap_or(d.connectivity.radius),
                max_degree: self.max_degree.unwrap_or(d.connectivity.max_degree),
            },
            graph_mode: self.graph_mode.unwrap_or(d.graph_mode),
            method: match self.method {
                Some(m) => m.parse()?,
                None => d.method,
            },
            tau: self.tau.unwrap_or(d.tau),
            s: self.s.unwrap_or(d.s),
            window_anchors: self.window_anchors.unwrap_or(d.window_anchors),
            anchor_ids: self.anchor_ids,
            anchor_weight: self.anchor_weight.unwrap_or(d.anchor_weight),
            trials: self.trials.unwrap_or(d.trials),
            seed: self.seed.unwrap_or(d.seed),
        };
        config.validate()?;
        Ok(config)
    }
}
