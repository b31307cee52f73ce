//! Graph-regularized cooperative localization (GR-CL).
//!
//! Each tick the fusion center stacks the degree-scaled differential
//! coordinates over the anchor positions and solves the anchored Laplacian
//! system in the least-squares sense, independently for x and y.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::graph::{
    connected_components, extend_with_weighted_anchors, AnchoredLaplacian, GraphSnapshot,
};
use crate::numerics::LeastSquares;
use crate::sensing::{differential_coords, DifferentialCoords, MeasurementSet};
use crate::{Error, Point, Result};

/// `L̃ x = b_x`, `L̃ y = b_y`.
#[derive(Debug, Clone)]
pub struct AnchoredSystem {
    pub laplacian: AnchoredLaplacian,
    pub bx: DVector<f64>,
    pub by: DVector<f64>,
}

/// Where a vehicle's estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Solved,
    GpsFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PositionEstimate {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub source: Vec<Source>,
}

impl PositionEstimate {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn position(&self, i: usize) -> Point {
        Point::new(self.x[i], self.y[i])
    }

    /// Every vehicle taken straight from its GPS fix.
    pub fn from_gps(gps: &[Point]) -> Self {
        Self {
            x: gps.iter().map(|p| p.x).collect(),
            y: gps.iter().map(|p| p.y).collect(),
            source: vec![Source::GpsFallback; gps.len()],
        }
    }
}

pub fn assemble_system(
    delta: &DifferentialCoords,
    graph: &GraphSnapshot,
    anchors: &[(usize, Point)],
) -> Result<AnchoredSystem> {
    assemble_weighted_system(delta, graph, anchors, 1.0)
}

/// Builds `b = [d₁δ₁ … d_Nδ_N, w·c₁ … w·c_α]` against the matching `L̃`.
pub fn assemble_weighted_system(
    delta: &DifferentialCoords,
    graph: &GraphSnapshot,
    anchors: &[(usize, Point)],
    anchor_weight: f64,
) -> Result<AnchoredSystem> {
    let n = graph.vertex_count();
    if delta.len() != n {
        return Err(Error::invalid(format!(
            "{} differential coordinates for {n} vehicles",
            delta.len()
        )));
    }
    let ids: Vec<usize> = anchors.iter().map(|&(id, _)| id).collect();
    let laplacian = extend_with_weighted_anchors(graph, &ids, anchor_weight)?;
    let rows = n + anchors.len();
    let mut bx = DVector::zeros(rows);
    let mut by = DVector::zeros(rows);
    for i in 0..n {
        let d = graph.degree(i) as f64;
        bx[i] = d * delta.dx[i];
        by[i] = d * delta.dy[i];
    }
    for (m, &(_, c)) in anchors.iter().enumerate() {
        if !c.is_finite() {
            return Err(Error::invalid(format!("anchor {m} has non-finite position")));
        }
        bx[n + m] = anchor_weight * c.x;
        by[n + m] = anchor_weight * c.y;
    }
    Ok(AnchoredSystem { laplacian, bx, by })
}

/// Least-squares solution of both coordinate systems.
pub fn solve_gr_cl(system: &AnchoredSystem) -> Result<PositionEstimate> {
    let solver = LeastSquares::new(system.laplacian.matrix())?;
    let x = solver.solve(&system.bx)?;
    let y = solver.solve(&system.by)?;
    Ok(PositionEstimate {
        source: vec![Source::Solved; x.len()],
        x: x.iter().copied().collect(),
        y: y.iter().copied().collect(),
    })
}

/// Which vehicles contribute their GPS fix as an anchor.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum AnchorSelection {
    #[default]
    All,
    Subset(Vec<usize>),
}

impl AnchorSelection {
    fn mask(&self, n: usize) -> Result<Vec<bool>> {
        match self {
            AnchorSelection::All => Ok(vec![true; n]),
            AnchorSelection::Subset(ids) => {
                let mut mask = vec![false; n];
                for &id in ids {
                    if id >= n {
                        return Err(Error::invalid(format!("anchor id {id} out of range for {n} vehicles")));
                    }
                    mask[id] = true;
                }
                Ok(mask)
            }
        }
    }
}

#[derive(Debug, Clone)]
struct ComponentSolver {
    vertices: Vec<usize>,
    /// local index → global vehicle id, in `L̃` row order
    anchors: Vec<usize>,
    degrees: Vec<f64>,
    solver: LeastSquares,
}

/// GR-CL for one graph, factored once and reusable across ticks while the
/// graph stays the same. Multi-vehicle components holding at least one
/// anchor are solved on their own; singletons and unanchored components
/// fall back to GPS.
#[derive(Debug, Clone)]
pub struct GrClSolver {
    vertices: usize,
    anchor_weight: f64,
    components: Vec<ComponentSolver>,
}

impl GrClSolver {
    pub fn new(graph: &GraphSnapshot, anchors: &AnchorSelection, anchor_weight: f64) -> Result<Self> {
        let n = graph.vertex_count();
        let mask = anchors.mask(n)?;
        let mut components = Vec::new();
        for comp in connected_components(graph) {
            if comp.is_isolated() {
                continue;
            }
            let local_anchors: Vec<usize> = (0..comp.vertices.len())
                .filter(|&k| mask[comp.vertices[k]])
                .collect();
            if local_anchors.is_empty() {
                continue;
            }
            let sub = graph.subgraph(&comp.vertices)?;
            let lap = extend_with_weighted_anchors(&sub, &local_anchors, anchor_weight)?;
            components.push(ComponentSolver {
                degrees: sub.degrees().into_iter().map(|d| d as f64).collect(),
                anchors: local_anchors.iter().map(|&k| comp.vertices[k]).collect(),
                vertices: comp.vertices,
                solver: LeastSquares::new(lap.matrix())?,
            });
        }
        Ok(Self {
            vertices: n,
            anchor_weight,
            components,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    /// Solves one tick given its differential coordinates and GPS fixes.
    pub fn solve(&self, delta: &DifferentialCoords, gps: &[Point]) -> Result<PositionEstimate> {
        if delta.len() != self.vertices || gps.len() != self.vertices {
            return Err(Error::invalid(format!(
                "solver built for {} vehicles, got {} deltas and {} fixes",
                self.vertices,
                delta.len(),
                gps.len()
            )));
        }
        let mut est = PositionEstimate::from_gps(gps);
        for comp in &self.components {
            let n = comp.vertices.len();
            let rows = n + comp.anchors.len();
            let mut bx = DVector::zeros(rows);
            let mut by = DVector::zeros(rows);
            for (k, &v) in comp.vertices.iter().enumerate() {
                bx[k] = comp.degrees[k] * delta.dx[v];
                by[k] = comp.degrees[k] * delta.dy[v];
            }
            for (m, &a) in comp.anchors.iter().enumerate() {
                bx[n + m] = self.anchor_weight * gps[a].x;
                by[n + m] = self.anchor_weight * gps[a].y;
            }
            let x = comp.solver.solve(&bx)?;
            let y = comp.solver.solve(&by)?;
            for (k, &v) in comp.vertices.iter().enumerate() {
                est.x[v] = x[k];
                est.y[v] = y[k];
                est.source[v] = Source::Solved;
            }
        }
        Ok(est)
    }
}

/// One tick of GR-CL from raw measurements.
pub fn localize_tick(
    graph: &GraphSnapshot,
    meas: &MeasurementSet,
    anchors: &AnchorSelection,
    anchor_weight: f64,
) -> Result<PositionEstimate> {
    let delta = differential_coords(meas, graph)?;
    GrClSolver::new(graph, anchors, anchor_weight)?.solve(&delta, &meas.gps)
}
