//! Independent reference computations used by the integration and
//! acceptance tests. Nothing here calls into the crate's numerics.

#![allow(dead_code)]

use cooploc::Point;
use nalgebra::DMatrix;
use rand::Rng;

pub fn to_rows(a: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}

/// Solves a square system by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Vec<f64> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let pivot_row = m[col].clone();
        for row in col + 1..n {
            let f = m[row][col] / pivot_row[col];
            for (v, p) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *v -= f * p;
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    x
}

/// `(AᵀA)⁻¹ Aᵀ b` formed explicitly.
pub fn normal_equations(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let rows = to_rows(a);
    let (m, n) = (a.nrows(), a.ncols());
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            ata[i][j] = (0..m).map(|k| rows[k][i] * rows[k][j]).sum();
        }
        atb[i] = (0..m).map(|k| rows[k][i] * b[k]).sum();
    }
    gauss_solve(ata, atb)
}

/// Singular values by one-sided (Hestenes) Jacobi rotations, descending.
pub fn jacobi_singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    // work on the orientation with at least as many rows as columns
    let mut cols: Vec<Vec<f64>> = if a.nrows() >= a.ncols() {
        (0..a.ncols()).map(|j| (0..a.nrows()).map(|i| a[(i, j)]).collect()).collect()
    } else {
        (0..a.nrows()).map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect()).collect()
    };
    let n = cols.len();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|v| v * v).sum();
                let beta: f64 = cols[q].iter().map(|v| v * v).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt().max(f64::MIN_POSITIVE));
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..cols[p].len() {
                    let xp = cols[p][k];
                    let xq = cols[q][k];
                    cols[p][k] = c * xp - s * xq;
                    cols[q][k] = s * xp + c * xq;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Unicycle `ẋ = s cosθ, ẏ = s sinθ, θ̇ = ω` integrated with RK4.
pub fn integrate_unicycle(
    x: f64,
    y: f64,
    heading: f64,
    speed: f64,
    yaw_rate: f64,
    dt: f64,
    steps: usize,
) -> (f64, f64, f64) {
    let f = |th: f64| (speed * th.cos(), speed * th.sin());
    let h = dt / steps as f64;
    let (mut x, mut y, mut th) = (x, y, heading);
    for _ in 0..steps {
        let k1 = f(th);
        let k2 = f(th + 0.5 * h * yaw_rate);
        let k3 = k2;
        let k4 = f(th + h * yaw_rate);
        x += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        th += h * yaw_rate;
    }
    (x, y, th)
}

/// Connected components via union-find with path halving; each component
/// sorted, components ordered by smallest member.
pub fn union_find_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut v: usize) -> usize {
        while p[v] != v {
            p[v] = p[p[v]];
            v = p[v];
        }
        v
    }
    for &(a, b) in edges {
        let ra = find(&mut parent, a);
        let rb = find(&mut parent, b);
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for v in 0..n {
        let r = find(&mut parent, v);
        groups.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|c| c[0]);
    out
}

/// Greedy shortest-first admission by repeated full scans (no sorting).
pub fn admission_oracle(p: &[Point], radius: f64, cap: usize) -> Vec<(usize, usize)> {
    let n = p.len();
    let mut processed = vec![vec![false; n]; n];
    let mut deg = vec![0; n];
    let mut edges = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let d = ((p[i].x - p[j].x).powi(2) + (p[i].y - p[j].y).powi(2)).sqrt();
                if processed[i][j] || d >= radius {
                    continue;
                }
                if best.is_none_or(|(bd, _, _)| d < bd) {
                    best = Some((d, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        processed[i][j] = true;
        if deg[i] < cap && deg[j] < cap {
            deg[i] += 1;
            deg[j] += 1;
            edges.push((i, j));
        }
    }
    edges.sort_unstable();
    edges
}

pub fn random_matrix<R: Rng>(rng: &mut R, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}

/// Well-conditioned `m×n` matrix: identity block plus a small perturbation.
pub fn well_conditioned<R: Rng>(rng: &mut R, m: usize, n: usize) -> DMatrix<f64> {
    let mut a = random_matrix(rng, m, n) * 0.3;
    for i in 0..n {
        a[(i, i)] += 2.0;
    }
    a
}

pub fn random_points<R: Rng>(rng: &mut R, n: usize, extent: f64) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(rng.random_range(0.0..extent), rng.random_range(0.0..extent)))
        .collect()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    num / den
}
