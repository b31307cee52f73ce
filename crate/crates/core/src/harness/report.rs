//! Error metrics and their on-disk form (`cdf_<method>.csv`,
//! `summary.json`).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{ExperimentConfig, Method};
use crate::{Error, Result};

/// `100 · (1 − method / gps)`, undefined when the GPS error is zero.
pub fn reduction_percent(msle_method: f64, msle_gps: f64) -> Option<f64> {
    (msle_gps > 0.0).then(|| 100.0 * (1.0 - msle_method / msle_gps))
}

/// Squared position errors of one method, pooled over vehicles, ticks and
/// trials.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub method: Method,
    pub squared_errors: Vec<f64>,
    pub msle: f64,
    pub reduction_vs_gps: Option<f64>,
}

impl ErrorReport {
    pub fn new(method: Method, squared_errors: Vec<f64>, msle_gps: Option<f64>) -> Result<Self> {
        if squared_errors.is_empty() {
            return Err(Error::invalid(format!("{method}: no error samples")));
        }
        let msle = squared_errors.iter().sum::<f64>() / squared_errors.len() as f64;
        let gps = if method == Method::Gps { Some(msle) } else { msle_gps };
        Ok(Self {
            method,
            reduction_vs_gps: gps.and_then(|g| reduction_percent(msle, g)),
            squared_errors,
            msle,
        })
    }

    pub fn sample_count(&self) -> usize {
        self.squared_errors.len()
    }

    /// Empirical CDF: one `(error², fraction ≤)` point per sample.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        let mut sorted = self.squared_errors.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        sorted
            .into_iter()
            .enumerate()
            .map(|(k, e)| (e, (k + 1) as f64 / n))
            .collect()
    }
}

/// Writes `cdf_<method>.csv` into `dir` and returns its path.
pub fn emit_report(report: &ErrorReport, dir: &Path) -> Result<PathBuf> {
    if report.squared_errors.is_empty() {
        return Err(Error::invalid("refusing to write an empty report"));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(format!("cdf_{}.csv", report.method));
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut out = std::io::BufWriter::new(file);
    let io = |e| Error::io(&path, e);
    writeln!(out, "squared_error_m2,cumulative_fraction").map_err(io)?;
    for (e, f) in report.cdf() {
        writeln!(out, "{e},{f}").map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(path)
}

/// Spread of per-trial reduction percentages.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialStats {
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
}

impl TrialStats {
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std,
            trials: values.len(),
        })
    }
}

#[derive(Debug, Serialize)]
struct MethodSummary {
    msle_m2: f64,
    samples: usize,
    /// Pooled over all samples; `null` when undefined.
    reduction_vs_gps_pct: Option<f64>,
    reduction_trials: Option<TrialStats>,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    version: &'static str,
    seed: u64,
    trials: usize,
    methods: BTreeMap<&'static str, MethodSummary>,
    config: &'a ExperimentConfig,
    created_unix_s: u64,
}

/// Key of the only field allowed to differ between identical runs.
pub const TIMESTAMP_KEY: &str = "created_unix_s";

pub fn write_summary(
    reports: &[ErrorReport],
    trial_reductions: &BTreeMap<Method, Vec<f64>>,
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let methods = reports
        .iter()
        .map(|r| {
            let stats = trial_reductions
                .get(&r.method)
                .and_then(|v| TrialStats::from_values(v));
            (
                r.method.as_str(),
                MethodSummary {
                    msle_m2: r.msle,
                    samples: r.sample_count(),
                    reduction_vs_gps_pct: r.reduction_vs_gps,
                    reduction_trials: stats,
                },
            )
        })
        .collect();
    let summary = Summary {
        version: env!("CARGO_PKG_VERSION"),
        seed: config.seed,
        trials: config.trials,
        methods,
        config,
        created_unix_s: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let path = dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).expect("summary is serializable");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_rejected() {
        assert!(ErrorReport::new(Method::Gps, vec![], None).is_err());
    }

    #[test]
    fn two_sample_cdf() {
        let r = ErrorReport::new(Method::Gps, vec![4.0, 1.0], None).unwrap();
        assert_eq!(r.cdf(), vec![(1.0, 0.5), (4.0, 1.0)]);
        assert_eq!(r.msle, 2.5);
        assert_eq!(r.reduction_vs_gps, Some(0.0));
    }

    #[test]
    fn reduction_arithmetic() {
        let r = reduction_percent(1.0, 15.25).unwrap();
        assert!((r - 93.442_622_950_819_67).abs() < 1e-9);
        assert_eq!(format!("{r:.1}"), "93.4");
        assert_eq!(reduction_percent(0.0, 0.0), None);
    }

    #[test]
    fn csv_rows() {
        let dir = tempfile::tempdir().unwrap();
        let r = ErrorReport::new(Method::GrCl, vec![4.0, 1.0], Some(5.0)).unwrap();
        let path = emit_report(&r, dir.path()).unwrap();
        assert!(path.ends_with("cdf_gr-cl.csv"));
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text, "squared_error_m2,cumulative_fraction\n1,0.5\n4,1\n");
        assert_eq!(r.reduction_vs_gps, Some(50.0));
    }

    #[test]
    fn trial_stats() {
        let s = TrialStats::from_values(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
        assert!(TrialStats::from_values(&[]).is_none());
    }
}
