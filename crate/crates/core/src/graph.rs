//! The vehicular network as an undirected graph, and the Laplacian
//! matrices built from it.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::{Error, Point, Result};

/// One snapshot of the network. Edges are stored as `(i, j)` with `i < j`,
/// sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSnapshot {
    vertices: usize,
    edges: Vec<(usize, usize)>,
    neighbours: Vec<Vec<usize>>,
}

impl GraphSnapshot {
    /// Builds a graph from an explicit edge list. Duplicate edges (in either
    /// orientation) are merged; self loops are rejected.
    pub fn from_edges(vertices: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= vertices || b >= vertices {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) out of range for {vertices} vertices"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self loop at vertex {a}")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();

        let mut neighbours = vec![Vec::new(); vertices];
        for &(i, j) in &normalized {
            neighbours[i].push(j);
            neighbours[j].push(i);
        }
        for list in &mut neighbours {
            list.sort_unstable();
        }
        Ok(Self {
            vertices,
            edges: normalized,
            neighbours,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.neighbours[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbours[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbours.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbours.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbours
            .get(i)
            .is_some_and(|n| n.binary_search(&j).is_ok())
    }

    pub fn degree_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.vertices, self.vertices, |i, j| {
            if i == j {
                self.degree(i) as f64
            } else {
                0.0
            }
        })
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.vertices, self.vertices);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// `L = D − A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let mut l = DMatrix::zeros(self.vertices, self.vertices);
        for &(i, j) in &self.edges {
            l[(i, j)] = -1.0;
            l[(j, i)] = -1.0;
            l[(i, i)] += 1.0;
            l[(j, j)] += 1.0;
        }
        l
    }

    /// Induced subgraph on `vertices`, relabelled `0..vertices.len()` in the
    /// given order.
    pub fn subgraph(&self, vertices: &[usize]) -> Result<GraphSnapshot> {
        let mut local = vec![usize::MAX; self.vertices];
        for (k, &v) in vertices.iter().enumerate() {
            if v >= self.vertices {
                return Err(Error::invalid(format!("vertex {v} out of range")));
            }
            local[v] = k;
        }
        let edges: Vec<_> = self
            .edges
            .iter()
            .filter(|&&(i, j)| local[i] != usize::MAX && local[j] != usize::MAX)
            .map(|&(i, j)| (local[i], local[j]))
            .collect();
        GraphSnapshot::from_edges(vertices.len(), &edges)
    }
}

/// Connects every pair closer than `radius` (strictly), admitting candidate
/// edges shortest-first and skipping any edge with a saturated endpoint so
/// that no vertex exceeds `max_degree`.
pub fn build_connectivity(
    positions: &[Point],
    radius: f64,
    max_degree: usize,
) -> Result<GraphSnapshot> {
    if positions.is_empty() {
        return Err(Error::invalid("no vehicles"));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {radius}")));
    }
    if max_degree == 0 {
        return Err(Error::invalid("max_degree must be at least 1"));
    }
    if let Some(i) = positions.iter().position(|p| !p.is_finite()) {
        return Err(Error::invalid(format!("vehicle {i} has non-finite position")));
    }

    let n = positions.len();
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let d = positions[i].distance(&positions[j]);
            if d < radius {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut degree = vec![0usize; n];
    let mut edges = Vec::new();
    for (_, i, j) in candidates {
        if degree[i] < max_degree && degree[j] < max_degree {
            degree[i] += 1;
            degree[j] += 1;
            edges.push((i, j));
        }
    }
    GraphSnapshot::from_edges(n, &edges)
}

/// A connected component, vertices in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub vertices: Vec<usize>,
}

impl Component {
    /// A vehicle with no neighbours; downstream it falls back to GPS.
    pub fn is_isolated(&self) -> bool {
        self.vertices.len() == 1
    }
}

/// Components ordered by their smallest vertex.
pub fn connected_components(graph: &GraphSnapshot) -> Vec<Component> {
    let n = graph.vertex_count();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut vertices = Vec::new();
        while let Some(v) = queue.pop_front() {
            vertices.push(v);
            for &w in graph.neighbours(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        vertices.sort_unstable();
        components.push(Component { vertices });
    }
    components
}

/// The Laplacian stacked over one indicator row per anchor:
/// `L̃ = [L; w·e_a₀; w·e_a₁; ...]`, shape `(N + α) × N`.
#[derive(Debug, Clone)]
pub struct AnchoredLaplacian {
    base: GraphSnapshot,
    anchor_ids: Vec<usize>,
    anchor_weight: f64,
    matrix: DMatrix<f64>,
}

impl AnchoredLaplacian {
    pub fn base(&self) -> &GraphSnapshot {
        &self.base
    }

    pub fn anchor_ids(&self) -> &[usize] {
        &self.anchor_ids
    }

    pub fn anchor_weight(&self) -> f64 {
        self.anchor_weight
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// True when every connected component holds at least one anchor, i.e.
    /// when `L̃` has full column rank.
    pub fn is_identifiable(&self) -> bool {
        let mut anchored = vec![false; self.base.vertex_count()];
        for &a in &self.anchor_ids {
            anchored[a] = true;
        }
        connected_components(&self.base)
            .iter()
            .all(|c| c.vertices.iter().any(|&v| anchored[v]))
    }
}

pub fn extend_with_anchors(graph: &GraphSnapshot, anchor_ids: &[usize]) -> Result<AnchoredLaplacian> {
    extend_with_weighted_anchors(graph, anchor_ids, 1.0)
}

/// Like [`extend_with_anchors`] but every anchor row is scaled by `weight`.
pub fn extend_with_weighted_anchors(
    graph: &GraphSnapshot,
    anchor_ids: &[usize],
    weight: f64,
) -> Result<AnchoredLaplacian> {
    if anchor_ids.is_empty() {
        return Err(Error::invalid(
            "at least one anchor is required: the Laplacian alone is singular",
        ));
    }
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::invalid(format!("anchor weight must be positive, got {weight}")));
    }
    let n = graph.vertex_count();
    if let Some(&bad) = anchor_ids.iter().find(|&&a| a >= n) {
        return Err(Error::invalid(format!("anchor id {bad} out of range for {n} vehicles")));
    }
    let alpha = anchor_ids.len();
    let mut matrix = DMatrix::zeros(n + alpha, n);
    matrix.rows_mut(0, n).copy_from(&graph.laplacian());
    for (m, &a) in anchor_ids.iter().enumerate() {
        matrix[(n + m, a)] = weight;
    }
    Ok(AnchoredLaplacian {
        base: graph.clone(),
        anchor_ids: anchor_ids.to_vec(),
        anchor_weight: weight,
        matrix,
    })
}
