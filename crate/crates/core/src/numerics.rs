//! Dense linear-algebra kernels: full SVD, least squares with an explicit
//! rank check, and hard rank truncation.
//!
//! Matrices are nalgebra types; the decompositions run on faer. What this
//! module adds is the
//! contract the solvers rely on: singular values sorted in descending order,
//! full (square) orthogonal factors, and a uniform numerical-rank tolerance.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Full singular value decomposition `A = U · diag(S) · Vᵀ`.
///
/// `u` is `m×m`, `v` is `n×n` and `singular_values` holds `min(m, n)`
/// non-negative values in descending order.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl SvdFactors {
    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    /// Numerical-rank tolerance `max(m, n) · ε · σ₁`.
    pub fn rank_tolerance(&self) -> f64 {
        rank_tolerance(self.nrows(), self.ncols(), self.largest())
    }

    pub fn largest(&self) -> f64 {
        self.singular_values.iter().copied().next().unwrap_or(0.0)
    }

    pub fn smallest(&self) -> f64 {
        self.singular_values.iter().copied().last().unwrap_or(0.0)
    }

    /// Number of singular values above [`Self::rank_tolerance`].
    pub fn rank(&self) -> usize {
        let tol = self.rank_tolerance();
        self.singular_values.iter().filter(|&&s| s > tol).count()
    }

    /// Errors unless the factored matrix has full column rank.
    pub fn ensure_full_column_rank(&self) -> Result<()> {
        let tolerance = self.rank_tolerance();
        let smallest = self.smallest();
        if self.nrows() < self.ncols() || smallest.is_nan() || smallest <= tolerance {
            return Err(Error::RankDeficient {
                smallest,
                tolerance,
            });
        }
        Ok(())
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let k = self.singular_values.len();
        let (m, n) = (self.nrows(), self.ncols());
        let mut sigma = DMatrix::zeros(m, n);
        for i in 0..k {
            sigma[(i, i)] = self.singular_values[i];
        }
        &self.u * sigma * self.v.transpose()
    }
}

pub fn rank_tolerance(m: usize, n: usize, largest_singular_value: f64) -> f64 {
    m.max(n) as f64 * f64::EPSILON * largest_singular_value
}

fn ensure_finite(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!("{what} contains non-finite entries")))
    }
}

fn to_faer(a: &DMatrix<f64>) -> faer::Mat<f64> {
    faer::Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

fn from_faer(a: faer::MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// SVD with singular triplets sorted by descending singular value. With
/// `full` the orthogonal factors are square, otherwise `U` is `m×k` and
/// `V` is `n×k` with `k = min(m, n)`.
fn svd_sorted(a: &DMatrix<f64>, full: bool) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    let (m, n) = a.shape();
    let k = m.min(n);
    if k == 0 {
        let (p, q) = if full { (m, n) } else { (0, 0) };
        return Ok((DMatrix::identity(m, p), DVector::zeros(0), DMatrix::identity(n, q)));
    }
    let mat = to_faer(a);
    let (u, s, v) = if full {
        let d = mat.svd().map_err(|e| Error::invalid(format!("SVD did not converge: {e:?}")))?;
        (from_faer(d.U()), d.S().column_vector().iter().copied().collect::<Vec<_>>(), from_faer(d.V()))
    } else {
        let d = mat.thin_svd().map_err(|e| Error::invalid(format!("SVD did not converge: {e:?}")))?;
        (from_faer(d.U()), d.S().column_vector().iter().copied().collect::<Vec<_>>(), from_faer(d.V()))
    };

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));
    let mut u_sorted = u.clone();
    let mut v_sorted = v.clone();
    let mut s_sorted = DVector::zeros(k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u.column(src));
        v_sorted.set_column(dst, &v.column(src));
        s_sorted[dst] = s[src].max(0.0);
    }
    Ok((u_sorted, s_sorted, v_sorted))
}

/// Full SVD with square orthogonal `U` and `V`.
pub fn svd(a: &DMatrix<f64>) -> Result<SvdFactors> {
    ensure_finite(a, "svd input")?;
    let (u, singular_values, v) = svd_sorted(a, true)?;
    Ok(SvdFactors { u, singular_values, v })
}

/// A factored full-column-rank matrix, reusable across right-hand sides.
///
/// Solves `argmin ‖A x − b‖₂` as `x = V S⁻¹ Uᵀ b` with the thin factors.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    u: DMatrix<f64>,
    inv_s: DVector<f64>,
    v: DMatrix<f64>,
}

impl LeastSquares {
    pub fn new(a: &DMatrix<f64>) -> Result<Self> {
        ensure_finite(a, "least-squares matrix")?;
        let (m, n) = a.shape();
        if n == 0 {
            return Err(Error::invalid("least-squares matrix has no columns"));
        }
        if m < n {
            return Err(Error::invalid(format!(
                "least squares needs m >= n, got {m}x{n}"
            )));
        }
        let (u, s, v) = svd_sorted(a, false)?;
        let tolerance = rank_tolerance(m, n, s[0]);
        let smallest = s[n - 1];
        if smallest.is_nan() || smallest <= tolerance {
            return Err(Error::RankDeficient {
                smallest,
                tolerance,
            });
        }
        Ok(Self {
            u,
            inv_s: s.map(|v| 1.0 / v),
            v,
        })
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        if b.len() != self.nrows() {
            return Err(Error::invalid(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.nrows()
            )));
        }
        let w = self.u.tr_mul(b).component_mul(&self.inv_s);
        Ok(&self.v * w)
    }

    /// Solves every column of `b` independently.
    pub fn solve_columns(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if b.nrows() != self.nrows() {
            return Err(Error::invalid(format!(
                "right-hand side has {} rows, expected {}",
                b.nrows(),
                self.nrows()
            )));
        }
        let mut w = self.u.tr_mul(b);
        for (mut row, &inv) in w.row_iter_mut().zip(self.inv_s.iter()) {
            row *= inv;
        }
        Ok(&self.v * w)
    }
}

/// `argmin ‖A x − b‖₂` for a full-column-rank `A` with `m ≥ n`.
pub fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("right-hand side contains non-finite entries"));
    }
    LeastSquares::new(a)?.solve(b)
}

/// Best rank-`s` Frobenius approximation of `w`: keeps the `s` largest
/// singular triplets and drops the rest (hard truncation).
pub fn svt_truncate(w: &DMatrix<f64>, s: usize) -> Result<DMatrix<f64>> {
    ensure_finite(w, "truncation input")?;
    let k = w.nrows().min(w.ncols());
    if s < 1 || s > k {
        return Err(Error::invalid(format!(
            "rank bound {s} outside [1, {k}] for a {}x{} matrix",
            w.nrows(),
            w.ncols()
        )));
    }
    let (u, sv, v) = svd_sorted(w, false)?;
    let us = u.columns(0, s) * DMatrix::from_diagonal(&sv.rows(0, s).into_owned());
    Ok(us * v.columns(0, s).transpose())
}

/// Count of singular values strictly above `rel_tol · σ₁`.
pub fn numerical_rank(a: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let Some(&largest) = s.iter().next() else {
        return Ok(0);
    };
    if largest == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rel_tol * largest).count())
}

/// Descending singular values only.
pub fn singular_values(a: &DMatrix<f64>) -> Result<DVector<f64>> {
    ensure_finite(a, "svd input")?;
    Ok(svd_sorted(a, false)?.1)
}
