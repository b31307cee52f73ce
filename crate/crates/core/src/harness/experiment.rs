use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, FleetSource, GraphMode, Method};
use super::report::{emit_report, reduction_percent, write_summary, ErrorReport};
use super::trajectory::load_trajectories;
use crate::glrr::{GlrrOutput, GlrrTracker, TickInput};
use crate::graph::{build_connectivity, GraphSnapshot};
use crate::grcl::{GrClSolver, PositionEstimate};
use crate::kinematics::{generate_fleet, FleetTrajectory};
use crate::sensing::{differential_coords, measure_all};
use crate::{Point, Result};

/// Everything the estimators produced at one tick.
#[derive(Debug, Clone)]
pub struct TickOutcome {
    pub truth: Vec<Point>,
    pub gps: Vec<Point>,
    pub edges: usize,
    pub grcl: Option<PositionEstimate>,
    pub glrr: Option<GlrrOutput>,
}

impl TickOutcome {
    pub fn estimate(&self, method: Method) -> Option<Vec<Point>> {
        match method {
            Method::Gps => Some(self.gps.clone()),
            Method::GrCl => self.grcl.as_ref().map(to_points),
            Method::GlrrCl => self.glrr.as_ref().map(|g| to_points(&g.estimate)),
        }
    }

    pub fn squared_errors(&self, method: Method) -> Option<Vec<f64>> {
        self.estimate(method).map(|est| {
            est.iter()
                .zip(&self.truth)
                .map(|(e, t)| (e.x - t.x).powi(2) + (e.y - t.y).powi(2))
                .collect()
        })
    }
}

fn to_points(e: &PositionEstimate) -> Vec<Point> {
    (0..e.len()).map(|i| e.position(i)).collect()
}

/// Seed of trial `t`.
pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed ^ trial as u64
}

/// Measurement noise draws come from stream 1 of the trial seed; fleet
/// generation uses stream 0.
pub fn measurement_rng(trial_seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
    rng.set_stream(1);
    rng
}

/// Runs sensing and the requested estimators over one trajectory.
pub fn run_pipeline(
    truth: &FleetTrajectory,
    config: &ExperimentConfig,
    trial_seed: u64,
    methods: &[Method],
) -> Result<Vec<TickOutcome>> {
    let want_glrr = methods.contains(&Method::GlrrCl);
    let want_grcl = want_glrr || methods.contains(&Method::GrCl);
    let anchors = config.anchors();
    let mut rng = measurement_rng(trial_seed);
    let mut tracker = if want_glrr {
        Some(GlrrTracker::new(config.glrr())?)
    } else {
        None
    };
    let frozen = match config.graph_mode {
        GraphMode::Frozen => Some(build_connectivity(
            &truth.positions(0),
            config.connectivity.radius,
            config.connectivity.max_degree,
        )?),
        GraphMode::Dynamic => None,
    };
    let mut cached: Option<(GraphSnapshot, GrClSolver)> = None;

    let mut out = Vec::with_capacity(truth.ticks());
    for k in 0..truth.ticks() {
        let positions = truth.positions(k);
        let graph = match &frozen {
            Some(g) => g.clone(),
            None => build_connectivity(
                &positions,
                config.connectivity.radius,
                config.connectivity.max_degree,
            )?,
        };
        let meas = measure_all(&positions, &graph, &config.noise, &mut rng)?;

        let (grcl, glrr) = if want_grcl {
            let delta = differential_coords(&meas, &graph)?;
            if cached.as_ref().is_none_or(|(g, _)| *g != graph) {
                let solver = GrClSolver::new(&graph, &anchors, config.anchor_weight)?;
                cached = Some((graph.clone(), solver));
            }
            let (_, solver) = cached.as_ref().expect("filled above");
            let grcl = solver.solve(&delta, &meas.gps)?;
            let glrr = match tracker.as_mut() {
                Some(t) => Some(t.push(TickInput {
                    graph: &graph,
                    delta: &delta,
                    gps: &meas.gps,
                    grcl: &grcl,
                })?),
                None => None,
            };
            (Some(grcl), glrr)
        } else {
            (None, None)
        };
        out.push(TickOutcome {
            truth: positions,
            gps: meas.gps,
            edges: graph.edges().len(),
            grcl,
            glrr,
        });
    }
    Ok(out)
}

/// Pooled reports plus per-trial reduction percentages.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub reports: Vec<ErrorReport>,
    pub trial_reductions: BTreeMap<Method, Vec<f64>>,
}

impl ExperimentOutcome {
    pub fn report(&self, method: Method) -> Option<&ErrorReport> {
        self.reports.iter().find(|r| r.method == method)
    }

    /// Mean of the per-trial reductions versus GPS, in percent.
    pub fn mean_reduction(&self, method: Method) -> Option<f64> {
        let v = self.trial_reductions.get(&method)?;
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Squared errors of one trial, warmup ticks (`k < τ − 1`) excluded for
/// every method so that all methods are scored on the same samples.
fn trial_errors(
    ticks: &[TickOutcome],
    tau: usize,
    methods: &[Method],
) -> BTreeMap<Method, Vec<f64>> {
    let skip = tau.saturating_sub(1);
    methods
        .iter()
        .map(|&m| {
            let errs = ticks
                .iter()
                .skip(skip)
                .flat_map(|t| t.squared_errors(m).unwrap_or_default())
                .collect();
            (m, errs)
        })
        .collect()
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let methods = config.method.methods();
    let shared = match &config.fleet {
        FleetSource::TrajectoryFile(path) => {
            let t = load_trajectories(path, config.dt)?;
            if t.ticks() < config.tau {
                return Err(crate::Error::Config(format!(
                    "trajectory has {} ticks, fewer than tau = {}",
                    t.ticks(),
                    config.tau
                )));
            }
            Some(t)
        }
        FleetSource::Generated(_) => None,
    };

    let per_trial: Vec<BTreeMap<Method, Vec<f64>>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(config.seed, trial);
            let generated;
            let truth = match (&shared, &config.fleet) {
                (Some(t), _) => t,
                (None, FleetSource::Generated(f)) => {
                    generated = generate_fleet(f, seed)?;
                    &generated
                }
                (None, FleetSource::TrajectoryFile(_)) => unreachable!("loaded above"),
            };
            let ticks = run_pipeline(truth, config, seed, &methods)?;
            Ok(trial_errors(&ticks, config.tau, &methods))
        })
        .collect::<Result<_>>()?;

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mut trial_reductions: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
    for trial in &per_trial {
        let gps = mean(&trial[&Method::Gps]);
        for &m in &methods {
            if let Some(r) = reduction_percent(mean(&trial[&m]), gps) {
                trial_reductions.entry(m).or_default().push(r);
            }
        }
    }

    let pooled = |m: Method| -> Vec<f64> {
        per_trial.iter().flat_map(|t| t[&m].iter().copied()).collect()
    };
    let gps_report = ErrorReport::new(Method::Gps, pooled(Method::Gps), None)?;
    let msle_gps = gps_report.msle;
    let mut reports = vec![gps_report];
    for &m in methods.iter().filter(|&&m| m != Method::Gps) {
        reports.push(ErrorReport::new(m, pooled(m), Some(msle_gps))?);
    }
    Ok(ExperimentOutcome {
        reports,
        trial_reductions,
    })
}

/// Writes every CDF plus `summary.json` into `dir`.
pub fn emit_outcome(outcome: &ExperimentOutcome, config: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = outcome
        .reports
        .iter()
        .map(|r| emit_report(r, dir))
        .collect::<Result<Vec<_>>>()?;
    paths.push(write_summary(&outcome.reports, &outcome.trial_reductions, config, dir)?);
    Ok(paths)
}
