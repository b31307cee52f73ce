//! C ABI over `cooploc`.
//!
//! Handles are opaque heap objects handed out through `out` pointers and
//! released with the matching `*_free`. Every fallible call
//! returns a [`CooplocStatus`]; on failure a message is kept per thread and
//! can be read with [`cooploc_last_error`].

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use cooploc::graph::{build_connectivity, GraphSnapshot};
use cooploc::grcl::{localize_tick, AnchorSelection};
use cooploc::harness::{emit_outcome, run_experiment, ExperimentConfig, ExperimentOutcome, Method};
use cooploc::sensing::{MeasurementSet, RangeBearing};
use cooploc::{Error, Point};

/// Status codes. 1–3 match the exit codes of the `cooploc` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CooplocStatus {
    Ok = 0,
    /// Bad input, config or trajectory file.
    Invalid = 1,
    /// A least-squares system lost full column rank.
    RankDeficient = 2,
    Io = 3,
    NullPointer = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CooplocMethod {
    Gps = 0,
    GrCl = 1,
    GlrrCl = 2,
}

impl From<CooplocMethod> for Method {
    fn from(m: CooplocMethod) -> Self {
        match m {
            CooplocMethod::Gps => Method::Gps,
            CooplocMethod::GrCl => Method::GrCl,
            CooplocMethod::GlrrCl => Method::GlrrCl,
        }
    }
}

/// Parsed experiment configuration.
pub struct CooplocConfig(ExperimentConfig);

/// Result of a Monte-Carlo experiment.
pub struct CooplocOutcome(ExperimentOutcome);

/// Connectivity graph of one tick.
pub struct CooplocGraph(GraphSnapshot);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(err: Error) -> CooplocStatus {
    let status = match err.exit_code() {
        2 => CooplocStatus::RankDeficient,
        3 => CooplocStatus::Io,
        _ => CooplocStatus::Invalid,
    };
    set_error(err.to_string());
    status
}

fn null(what: &str) -> CooplocStatus {
    set_error(format!("{what} is null"));
    CooplocStatus::NullPointer
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), CooplocStatus>) -> CooplocStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CooplocStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic".into());
            CooplocStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, CooplocStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(Error::InvalidInput(format!("{what} is not valid UTF-8"))))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], CooplocStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, CooplocStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cooploc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn cooploc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses TOML config text. `base_dir` may be NULL; otherwise relative
/// `trajectory_file` paths resolve against it.
///
/// # Safety
/// `text` and non-null `base_dir` must be NUL-terminated strings; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn cooploc_config_from_toml(
    text: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut CooplocConfig,
) -> CooplocStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(text, "text")?;
        let base = if base_dir.is_null() {
            None
        } else {
            Some(Path::new(str_arg(base_dir, "base_dir")?))
        };
        let cfg = ExperimentConfig::from_toml_str(text, base).map_err(fail)?;
        cfg.validate().map_err(fail)?;
        *out = Box::into_raw(Box::new(CooplocConfig(cfg)));
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cooploc_config_set_seed(config: *mut CooplocConfig, seed: u64) -> CooplocStatus {
    guard(|| {
        config.as_mut().ok_or_else(|| null("config"))?.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cooploc_config_set_trials(config: *mut CooplocConfig, trials: usize) -> CooplocStatus {
    guard(|| {
        if trials == 0 {
            return Err(fail(Error::Config("trials must be at least 1".into())));
        }
        config.as_mut().ok_or_else(|| null("config"))?.0.trials = trials;
        Ok(())
    })
}

/// # Safety
/// `config` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cooploc_config_free(config: *mut CooplocConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs every trial of the experiment.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cooploc_experiment_run(
    config: *const CooplocConfig,
    out: *mut *mut CooplocOutcome,
) -> CooplocStatus {
    guard(|| {
        let cfg = ref_arg(config, "config")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let outcome = run_experiment(&cfg.0).map_err(fail)?;
        *out = Box::into_raw(Box::new(CooplocOutcome(outcome)));
        Ok(())
    })
}

unsafe fn report_field(
    outcome: *const CooplocOutcome,
    method: CooplocMethod,
    out: *mut f64,
    f: impl FnOnce(&ExperimentOutcome, Method) -> Option<f64>,
) -> CooplocStatus {
    guard(|| {
        let o = ref_arg(outcome, "outcome")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = Method::from(method);
        let v = f(&o.0, m).ok_or_else(|| fail(Error::InvalidInput(format!("no result for {m}"))))?;
        *out = v;
        Ok(())
    })
}

/// Pooled mean squared localization error of `method`, in m².
///
/// # Safety
/// `outcome` must be a live handle, `method` one of the declared
/// constants and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cooploc_outcome_msle(
    outcome: *const CooplocOutcome,
    method: CooplocMethod,
    out: *mut f64,
) -> CooplocStatus {
    report_field(outcome, method, out, |o, m| o.report(m).map(|r| r.msle))
}

/// Mean per-trial error reduction of `method` versus GPS, in percent.
///
/// # Safety
/// `outcome` must be a live handle, `method` one of the declared
/// constants and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cooploc_outcome_reduction(
    outcome: *const CooplocOutcome,
    method: CooplocMethod,
    out: *mut f64,
) -> CooplocStatus {
    report_field(outcome, method, out, |o, m| o.mean_reduction(m))
}

/// Number of squared-error samples behind the `method` report, 0 if the
/// method was not run.
///
/// # Safety
/// `outcome` must be NULL or a live handle and `method` one of the
/// declared constants.
#[no_mangle]
pub unsafe extern "C" fn cooploc_outcome_sample_count(outcome: *const CooplocOutcome, method: CooplocMethod) -> usize {
    outcome
        .as_ref()
        .and_then(|o| o.0.report(method.into()))
        .map_or(0, |r| r.sample_count())
}

/// Writes the CDF files and `summary.json` into `dir`.
///
/// # Safety
/// Both handles must be live; `dir` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn cooploc_outcome_write(
    outcome: *const CooplocOutcome,
    config: *const CooplocConfig,
    dir: *const c_char,
) -> CooplocStatus {
    guard(|| {
        let o = ref_arg(outcome, "outcome")?;
        let c = ref_arg(config, "config")?;
        let dir = str_arg(dir, "dir")?;
        emit_outcome(&o.0, &c.0, Path::new(dir)).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `outcome` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cooploc_outcome_free(outcome: *mut CooplocOutcome) {
    if !outcome.is_null() {
        drop(Box::from_raw(outcome));
    }
}

unsafe fn points(xs: *const f64, ys: *const f64, n: usize) -> Result<Vec<Point>, CooplocStatus> {
    let xs = slice_arg(xs, n, "xs")?;
    let ys = slice_arg(ys, n, "ys")?;
    Ok(xs.iter().zip(ys).map(|(&x, &y)| Point::new(x, y)).collect())
}

/// Builds the range-limited, degree-capped connectivity graph of `n`
/// vehicles.
///
/// # Safety
/// `xs` and `ys` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cooploc_graph_build(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    radius: f64,
    max_degree: usize,
    out: *mut *mut CooplocGraph,
) -> CooplocStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = points(xs, ys, n)?;
        let g = build_connectivity(&p, radius, max_degree).map_err(fail)?;
        *out = Box::into_raw(Box::new(CooplocGraph(g)));
        Ok(())
    })
}

/// Graph from an explicit edge list of `edge_count` `(i, j)` pairs stored
/// flat in `pairs`.
///
/// # Safety
/// `pairs` must point to `2 * edge_count` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cooploc_graph_from_edges(
    n: usize,
    pairs: *const usize,
    edge_count: usize,
    out: *mut *mut CooplocGraph,
) -> CooplocStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let flat = slice_arg(pairs, 2 * edge_count, "pairs")?;
        let edges: Vec<(usize, usize)> = flat.chunks_exact(2).map(|c| (c[0], c[1])).collect();
        let g = GraphSnapshot::from_edges(n, &edges).map_err(fail)?;
        *out = Box::into_raw(Box::new(CooplocGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cooploc_graph_vertex_count(graph: *const CooplocGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.vertex_count())
}

/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cooploc_graph_edge_count(graph: *const CooplocGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edges().len())
}

/// Copies the sorted edge list as flat `(i, j)` pairs with `i < j`.
/// `capacity` counts pairs, so `pairs` must hold `2 * capacity` values.
///
/// # Safety
/// `graph` must be live; `pairs` must be writable for `2 * capacity` values.
#[no_mangle]
pub unsafe extern "C" fn cooploc_graph_edges(
    graph: *const CooplocGraph,
    pairs: *mut usize,
    capacity: usize,
) -> CooplocStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        let edges = g.0.edges();
        if capacity < edges.len() {
            return Err(fail(Error::InvalidInput(format!(
                "edge buffer holds {capacity} pairs, graph has {}",
                edges.len()
            ))));
        }
        if edges.is_empty() {
            return Ok(());
        }
        if pairs.is_null() {
            return Err(null("pairs"));
        }
        let out = std::slice::from_raw_parts_mut(pairs, 2 * edges.len());
        for (k, &(i, j)) in edges.iter().enumerate() {
            out[2 * k] = i;
            out[2 * k + 1] = j;
        }
        Ok(())
    })
}

/// # Safety
/// `graph` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cooploc_graph_free(graph: *mut CooplocGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// One GR-CL tick with every vehicle anchored on its GPS fix.
///
/// `ranges` and `azimuths` hold `2 * edge_count` entries: for edge `k` of
/// [`cooploc_graph_edges`] as `(i, j)`, entry `2k` is measured by `i` of `j`
/// and entry `2k + 1` by `j` of `i`. Azimuths are radians clockwise from +y.
/// Singleton vehicles keep their GPS fix.
///
/// # Safety
/// `gps_x`, `gps_y`, `out_x`, `out_y` must hold `vertex_count` doubles;
/// `ranges` and `azimuths` must hold `2 * edge_count` doubles.
#[no_mangle]
pub unsafe extern "C" fn cooploc_grcl_localize(
    graph: *const CooplocGraph,
    gps_x: *const f64,
    gps_y: *const f64,
    ranges: *const f64,
    azimuths: *const f64,
    out_x: *mut f64,
    out_y: *mut f64,
) -> CooplocStatus {
    guard(|| {
        let g = &ref_arg(graph, "graph")?.0;
        let n = g.vertex_count();
        let m = 2 * g.edges().len();
        let gps = points(gps_x, gps_y, n)?;
        let ranges = slice_arg(ranges, m, "ranges")?;
        let azimuths = slice_arg(azimuths, m, "azimuths")?;
        if n > 0 && (out_x.is_null() || out_y.is_null()) {
            return Err(null("output buffer"));
        }
        let mut relative = BTreeMap::new();
        for (k, &(i, j)) in g.edges().iter().enumerate() {
            relative.insert((i, j), RangeBearing { range: ranges[2 * k], azimuth: azimuths[2 * k] });
            relative.insert((j, i), RangeBearing { range: ranges[2 * k + 1], azimuth: azimuths[2 * k + 1] });
        }
        let meas = MeasurementSet { gps, relative };
        let est = localize_tick(g, &meas, &AnchorSelection::All, 1.0).map_err(fail)?;
        if n > 0 {
            std::slice::from_raw_parts_mut(out_x, n).copy_from_slice(&est.x);
            std::slice::from_raw_parts_mut(out_y, n).copy_from_slice(&est.y);
        }
        Ok(())
    })
}
