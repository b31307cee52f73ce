//! Graph and low-rank regularized cooperative localization (GLRR-CL).
//!
//! The last `τ` GR-CL inputs are stacked column-wise into
//! `B = [D·δ; anchors]` (`2N × τ`) and the rank-constrained problem
//!
//! ```text
//! min ‖L̃ X − B‖_F   subject to   rank(X) ≤ s
//! ```
//!
//! is solved in closed form from one SVD of `L̃ = U S Vᵀ`:
//! `X = V S⁻¹ trunc_s(U_Nᵀ B)`, where `U_N` holds the `N` left singular
//! vectors paired with non-zero singular values. Substituting `Z = S Vᵀ X`
//! turns the objective into `‖Z − U_Nᵀ B‖_F` plus a constant, which
//! Eckart–Young minimizes by hard truncation.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::graph::{extend_with_anchors, GraphSnapshot};
use crate::grcl::PositionEstimate;
use crate::numerics::{svd, svt_truncate, SvdFactors};
use crate::sensing::DifferentialCoords;
use crate::{Error, Point, Result};

/// One tick of window input.
#[derive(Debug, Clone)]
pub struct WindowTick {
    pub delta: DifferentialCoords,
    pub degrees: Vec<usize>,
    /// Bottom-block anchors, vehicle order `0..N`.
    pub anchors: Vec<Point>,
}

/// `B_x`, `B_y`, columns ordered oldest to newest.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchWindow {
    pub bx: DMatrix<f64>,
    pub by: DMatrix<f64>,
}

impl BatchWindow {
    pub fn tau(&self) -> usize {
        self.bx.ncols()
    }

    pub fn vehicles(&self) -> usize {
        self.bx.nrows() / 2
    }
}

/// Stacks the last `tau` entries of `history`. Returns `Ok(None)` while
/// fewer than `tau` ticks are available (warmup).
pub fn build_window(history: &[WindowTick], tau: usize) -> Result<Option<BatchWindow>> {
    if tau == 0 {
        return Err(Error::invalid("window length must be at least 1"));
    }
    if history.len() < tau {
        return Ok(None);
    }
    let ticks = &history[history.len() - tau..];
    let n = ticks[0].degrees.len();
    let mut bx = DMatrix::zeros(2 * n, tau);
    let mut by = DMatrix::zeros(2 * n, tau);
    for (t, tick) in ticks.iter().enumerate() {
        if tick.degrees.len() != n || tick.delta.len() != n || tick.anchors.len() != n {
            return Err(Error::invalid(format!(
                "window tick {t} has inconsistent vehicle count (expected {n})"
            )));
        }
        for i in 0..n {
            let d = tick.degrees[i] as f64;
            bx[(i, t)] = d * tick.delta.dx[i];
            by[(i, t)] = d * tick.delta.dy[i];
            bx[(n + i, t)] = tick.anchors[i].x;
            by[(n + i, t)] = tick.anchors[i].y;
        }
    }
    Ok(Some(BatchWindow { bx, by }))
}

/// Rank-bounded position matrices for one window.
#[derive(Debug, Clone)]
pub struct LowRankEstimate {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub rank_bound: usize,
}

impl LowRankEstimate {
    /// Positions at the newest tick of the window.
    pub fn latest(&self) -> Vec<Point> {
        let last = self.x.ncols() - 1;
        (0..self.x.nrows())
            .map(|i| Point::new(self.x[(i, last)], self.y[(i, last)]))
            .collect()
    }
}

/// `V S⁻¹ trunc_s(U_Nᵀ B)` for one coordinate.
fn recover_coordinate(b: &DMatrix<f64>, factors: &SvdFactors, s: usize) -> Result<DMatrix<f64>> {
    let n = factors.ncols();
    let w = factors.u.columns(0, n).tr_mul(b);
    let mut z = svt_truncate(&w, s)?;
    for (mut row, &sigma) in z.row_iter_mut().zip(factors.singular_values.iter()) {
        row /= sigma;
    }
    Ok(&factors.v * z)
}

/// Closed-form rank-`s` solution of `min ‖L̃ X − B‖_F` for both
/// coordinates. `factors` must be the SVD of the `2N × N` anchored
/// Laplacian matching the window.
pub fn recover(window: &BatchWindow, factors: &SvdFactors, s: usize) -> Result<LowRankEstimate> {
    let n = factors.ncols();
    if factors.nrows() != window.bx.nrows() {
        return Err(Error::invalid(format!(
            "window has {} rows but L̃ has {}",
            window.bx.nrows(),
            factors.nrows()
        )));
    }
    let limit = n.min(window.tau());
    if s < 1 || s > limit {
        return Err(Error::invalid(format!("rank bound {s} outside [1, {limit}]")));
    }
    factors.ensure_full_column_rank()?;
    Ok(LowRankEstimate {
        x: recover_coordinate(&window.bx, factors, s)?,
        y: recover_coordinate(&window.by, factors, s)?,
        rank_bound: s,
    })
}

/// What the bottom block of the window is filled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowAnchors {
    /// GR-CL estimates of the same tick.
    #[default]
    GrCl,
    /// Raw GPS fixes (ablation).
    Gps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GlrrConfig {
    pub tau: usize,
    pub rank_bound: usize,
    pub anchors: WindowAnchors,
}

impl Default for GlrrConfig {
    fn default() -> Self {
        Self {
            tau: 10,
            rank_bound: 3,
            anchors: WindowAnchors::GrCl,
        }
    }
}

/// Per-tick input of the streaming estimator.
#[derive(Debug, Clone)]
pub struct TickInput<'a> {
    pub graph: &'a GraphSnapshot,
    pub delta: &'a DifferentialCoords,
    pub gps: &'a [Point],
    pub grcl: &'a PositionEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlrrOutput {
    pub estimate: PositionEstimate,
    /// The window was not yet full; `estimate` is the GR-CL output.
    pub warmup: bool,
}

/// Streaming GLRR-CL. The SVD of `L̃` is computed once per graph epoch;
/// whenever the edge set changes the factors are rebuilt and the window
/// restarts its warmup.
#[derive(Debug)]
pub struct GlrrTracker {
    config: GlrrConfig,
    graph: Option<GraphSnapshot>,
    factors: Option<SvdFactors>,
    history: VecDeque<WindowTick>,
    rebuilds: usize,
}

impl GlrrTracker {
    pub fn new(config: GlrrConfig) -> Result<Self> {
        if config.tau == 0 || config.rank_bound == 0 {
            return Err(Error::Config("tau and s must be at least 1".into()));
        }
        if config.rank_bound > config.tau {
            return Err(Error::Config(format!(
                "s = {} exceeds tau = {}",
                config.rank_bound, config.tau
            )));
        }
        Ok(Self {
            config,
            graph: None,
            factors: None,
            history: VecDeque::with_capacity(config.tau),
            rebuilds: 0,
        })
    }

    /// Number of SVDs computed so far.
    pub fn epochs(&self) -> usize {
        self.rebuilds
    }

    fn ensure_epoch(&mut self, graph: &GraphSnapshot) -> Result<()> {
        if self.graph.as_ref() == Some(graph) {
            return Ok(());
        }
        let n = graph.vertex_count();
        if self.config.rank_bound > n {
            return Err(Error::Config(format!(
                "s = {} exceeds the vehicle count {n}",
                self.config.rank_bound
            )));
        }
        let ids: Vec<usize> = (0..n).collect();
        let lap = extend_with_anchors(graph, &ids)?;
        let factors = svd(lap.matrix())?;
        factors.ensure_full_column_rank()?;
        self.factors = Some(factors);
        self.graph = Some(graph.clone());
        self.history.clear();
        self.rebuilds += 1;
        Ok(())
    }

    pub fn push(&mut self, input: TickInput<'_>) -> Result<GlrrOutput> {
        self.ensure_epoch(input.graph)?;
        let anchors = match self.config.anchors {
            WindowAnchors::GrCl => (0..input.grcl.len()).map(|i| input.grcl.position(i)).collect(),
            WindowAnchors::Gps => input.gps.to_vec(),
        };
        if self.history.len() == self.config.tau {
            self.history.pop_front();
        }
        self.history.push_back(WindowTick {
            delta: input.delta.clone(),
            degrees: input.graph.degrees(),
            anchors,
        });

        let history = self.history.make_contiguous();
        let Some(window) = build_window(history, self.config.tau)? else {
            return Ok(GlrrOutput {
                estimate: input.grcl.clone(),
                warmup: true,
            });
        };
        let factors = self.factors.as_ref().expect("epoch initialized above");
        let latest = recover(&window, factors, self.config.rank_bound)?.latest();
        Ok(GlrrOutput {
            estimate: PositionEstimate {
                x: latest.iter().map(|p| p.x).collect(),
                y: latest.iter().map(|p| p.y).collect(),
                source: input.grcl.source.clone(),
            },
            warmup: false,
        })
    }
}

/// Runs the tracker over a whole stream of ticks.
pub fn run_glrr<'a>(
    ticks: impl IntoIterator<Item = TickInput<'a>>,
    config: GlrrConfig,
) -> Result<Vec<GlrrOutput>> {
    let mut tracker = GlrrTracker::new(config)?;
    ticks.into_iter().map(|t| tracker.push(t)).collect()
}
