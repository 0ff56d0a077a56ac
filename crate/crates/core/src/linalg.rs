//! Dense linear algebra: a small row-major matrix, least squares via
//! Householder QR with column pivoting (rank-revealing, so perfectly
//! collinear regressors are dropped rather than blowing up), and a cyclic
//! Jacobi eigensolver for symmetric matrices.
//!
//! Sizes here are modest (at most a few dozen columns); clarity and
//! determinism win over blocked performance tricks.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            m.data[i * c..(i + 1) * c].copy_from_slice(row);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// X v for a length-cols vector.
    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Xᵀ v for a length-rows vector.
    pub fn t_mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = self.row(r);
            let w = v[r];
            for (o, a) in out.iter_mut().zip(row) {
                *o += w * a;
            }
        }
        out
    }

    /// XᵀX, exploiting symmetry.
    pub fn gram(&self) -> Mat {
        let p = self.cols;
        let mut g = Mat::zeros(p, p);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..p {
                let xi = row[i];
                if xi == 0.0 {
                    continue;
                }
                for j in i..p {
                    *g.at_mut(i, j) += xi * row[j];
                }
            }
        }
        for i in 0..p {
            for j in 0..i {
                *g.at_mut(i, j) = g.at(j, i);
            }
        }
        g
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LinalgError {
    /// The design has no usable column (all norms are zero).
    RankZero,
    /// Dimensions do not line up.
    ShapeMismatch,
}

impl core::fmt::Display for LinalgError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LinalgError::RankZero => write!(f, "design matrix has rank zero"),
            LinalgError::ShapeMismatch => write!(f, "dimension mismatch"),
        }
    }
}

/// Least-squares fit of y on the columns of X.
///
/// Columns that are (numerically) linear combinations of columns already
/// selected are dropped; `coef` holds `None` at their original positions.
#[derive(Clone, Debug)]
pub struct LeastSquares {
    /// Coefficients by original column index; `None` marks a dropped column.
    pub coef: Vec<Option<f64>>,
    /// Original indices of retained columns, ascending.
    pub kept: Vec<usize>,
    /// Original indices of dropped columns, ascending.
    pub dropped: Vec<usize>,
    /// Upper-triangular R of the pivoted QR, rank x rank, row-major, in pivot
    /// order; `pivot[i]` is the original column at pivot position i.
    r: Vec<f64>,
    pivot: Vec<usize>,
    rank: usize,
}

/// Relative column-norm threshold below which a pivot is treated as zero.
pub const DEFAULT_DROP_TOL: f64 = 1e-10;

/// Householder QR with column pivoting; drops dependent columns.
pub fn lstsq(x: &Mat, y: &[f64], drop_tol: f64) -> Result<LeastSquares, LinalgError> {
    let n = x.rows();
    let p = x.cols();
    if y.len() != n {
        return Err(LinalgError::ShapeMismatch);
    }
    let mut a = x.clone();
    let mut qty: Vec<f64> = y.to_vec();
    let mut pivot: Vec<usize> = (0..p).collect();

    let col_norm_sq = |a: &Mat, c: usize, from: usize| -> f64 {
        (from..n).map(|r| a.at(r, c) * a.at(r, c)).sum()
    };
    let initial_max = (0..p)
        .map(|c| col_norm_sq(&a, c, 0))
        .fold(0.0f64, f64::max);
    if initial_max <= 0.0 {
        return Err(LinalgError::RankZero);
    }
    let floor = initial_max * drop_tol * drop_tol;

    let max_rank = core::cmp::min(n, p);
    let mut rank = 0;
    for k in 0..max_rank {
        let (best, best_norm) = (k..p)
            .map(|c| (c, col_norm_sq(&a, c, k)))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_norm <= floor {
            break;
        }
        if best != k {
            for r in 0..n {
                let t = a.at(r, k);
                *a.at_mut(r, k) = a.at(r, best);
                *a.at_mut(r, best) = t;
            }
            pivot.swap(k, best);
        }

        let normx = libm::sqrt(best_norm);
        let akk = a.at(k, k);
        let alpha = if akk >= 0.0 { -normx } else { normx };
        let mut v = vec![0.0; n - k];
        v[0] = akk - alpha;
        for r in k + 1..n {
            v[r - k] = a.at(r, k);
        }
        let vtv: f64 = v.iter().map(|t| t * t).sum();
        if vtv > 0.0 {
            for c in k..p {
                let dot: f64 = (k..n).map(|r| v[r - k] * a.at(r, c)).sum();
                let s = 2.0 * dot / vtv;
                for r in k..n {
                    *a.at_mut(r, c) -= s * v[r - k];
                }
            }
            let dot: f64 = (k..n).map(|r| v[r - k] * qty[r]).sum();
            let s = 2.0 * dot / vtv;
            for r in k..n {
                qty[r] -= s * v[r - k];
            }
        }
        *a.at_mut(k, k) = alpha;
        rank = k + 1;
    }
    if rank == 0 {
        return Err(LinalgError::RankZero);
    }

    // Back-substitution on the leading rank x rank block.
    let mut b_piv = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = qty[i];
        for j in i + 1..rank {
            s -= a.at(i, j) * b_piv[j];
        }
        b_piv[i] = s / a.at(i, i);
    }

    let mut coef: Vec<Option<f64>> = vec![None; p];
    for i in 0..rank {
        coef[pivot[i]] = Some(b_piv[i]);
    }
    let mut kept: Vec<usize> = pivot[..rank].to_vec();
    kept.sort_unstable();
    let mut dropped: Vec<usize> = pivot[rank..].to_vec();
    dropped.sort_unstable();

    let mut r_packed = vec![0.0; rank * rank];
    for i in 0..rank {
        for j in i..rank {
            r_packed[i * rank + j] = a.at(i, j);
        }
    }
    Ok(LeastSquares { coef, kept, dropped, r: r_packed, pivot: pivot[..rank].to_vec(), rank })
}

impl LeastSquares {
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Fitted values, treating dropped columns as zero-coefficient.
    pub fn fitted(&self, x: &Mat) -> Vec<f64> {
        let dense: Vec<f64> = self.coef.iter().map(|c| c.unwrap_or(0.0)).collect();
        x.mat_vec(&dense)
    }

    pub fn residuals(&self, x: &Mat, y: &[f64]) -> Vec<f64> {
        self.fitted(x).iter().zip(y).map(|(f, yi)| yi - f).collect()
    }

    /// (XᵀX)⁻¹ over the retained columns, indexed like `kept` (ascending
    /// original column order). Computed as R⁻¹R⁻ᵀ from the pivoted factor.
    pub fn xtx_inv(&self) -> Mat {
        let k = self.rank;
        // R⁻¹ by solving R Z = I column by column.
        let mut rinv = vec![0.0; k * k];
        for col in 0..k {
            for i in (0..=col).rev() {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for j in i + 1..=col {
                    s -= self.r[i * k + j] * rinv[j * k + col];
                }
                rinv[i * k + col] = s / self.r[i * k + i];
            }
        }
        // A⁻¹ (pivot order) = R⁻¹ R⁻ᵀ.
        let mut inv_piv = Mat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                let mut s = 0.0;
                for t in core::cmp::max(i, j)..k {
                    s += rinv[i * k + t] * rinv[j * k + t];
                }
                *inv_piv.at_mut(i, j) = s;
            }
        }
        // Re-order to ascending original columns.
        let mut pos_of_orig: Vec<usize> = vec![0; k];
        for (piv_pos, &orig) in self.pivot.iter().enumerate() {
            let sorted_pos = self.kept.binary_search(&orig).expect("pivot not in kept");
            pos_of_orig[sorted_pos] = piv_pos;
        }
        let mut out = Mat::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                *out.at_mut(i, j) = inv_piv.at(pos_of_orig[i], pos_of_orig[j]);
            }
        }
        out
    }
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues (descending) and the matching orthonormal
/// eigenvectors as columns, so that A = V diag(w) Vᵀ.
pub fn jacobi_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.rows();
    assert_eq!(n, a.cols(), "jacobi_eigen needs a square matrix");
    let mut m = a.clone();
    let mut v = Mat::zeros(n, n);
    for i in 0..n {
        *v.at_mut(i, i) = 1.0;
    }
    let scale: f64 = (0..n).map(|i| m.at(i, i).abs()).fold(1e-300, f64::max);
    let tol = 1e-15 * scale;

    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(m.at(p, q).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m.at(p, q);
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = m.at(p, p);
                let aqq = m.at(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(1.0 + theta * theta))
                } else {
                    -1.0 / (-theta + libm::sqrt(1.0 + theta * theta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for i in 0..n {
                    let mip = m.at(i, p);
                    let miq = m.at(i, q);
                    *m.at_mut(i, p) = c * mip - s * miq;
                    *m.at_mut(i, q) = s * mip + c * miq;
                }
                for j in 0..n {
                    let mpj = m.at(p, j);
                    let mqj = m.at(q, j);
                    *m.at_mut(p, j) = c * mpj - s * mqj;
                    *m.at_mut(q, j) = s * mpj + c * mqj;
                }
                for i in 0..n {
                    let vip = v.at(i, p);
                    let viq = v.at(i, q);
                    *v.at_mut(i, p) = c * vip - s * viq;
                    *v.at_mut(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m.at(j, j).partial_cmp(&m.at(i, i)).expect("NaN eigenvalue"));
    let vals: Vec<f64> = order.iter().map(|&i| m.at(i, i)).collect();
    let mut vecs = Mat::zeros(n, n);
    for (new_c, &old_c) in order.iter().enumerate() {
        for r in 0..n {
            *vecs.at_mut(r, new_c) = v.at(r, old_c);
        }
    }
    (vals, vecs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_design_exact() {
        // Orthogonal columns: coefficients are independent projections.
        let x = Mat::from_rows(&[
            vec![1.0, 1.0],
            vec![1.0, -1.0],
            vec![1.0, 1.0],
            vec![1.0, -1.0],
        ]);
        let y = [3.0, 1.0, 3.0, 1.0];
        let fit = lstsq(&x, &y, DEFAULT_DROP_TOL).unwrap();
        assert!((fit.coef[0].unwrap() - 2.0).abs() < 1e-12);
        assert!((fit.coef[1].unwrap() - 1.0).abs() < 1e-12);
        assert!(fit.dropped.is_empty());
    }

    #[test]
    fn recovers_generating_coefficients() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let a = libm::sin(i as f64);
            let b = libm::cos(3.0 * i as f64);
            rows.push(vec![1.0, a, b]);
            y.push(2.0 - 0.5 * a + 4.0 * b);
        }
        let x = Mat::from_rows(&rows);
        let fit = lstsq(&x, &y, DEFAULT_DROP_TOL).unwrap();
        let want = [2.0, -0.5, 4.0];
        for (c, w) in fit.coef.iter().zip(want) {
            assert!((c.unwrap() - w).abs() < 1e-10);
        }
    }

    #[test]
    fn collinear_column_dropped() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..30 {
            let a = libm::sin(1.7 * i as f64);
            let b = libm::cos(0.9 * i as f64);
            rows.push(vec![a, b, a + b]);
            y.push(1.0 * a - 2.0 * b);
        }
        let x = Mat::from_rows(&rows);
        let fit = lstsq(&x, &y, DEFAULT_DROP_TOL).unwrap();
        assert_eq!(fit.rank(), 2);
        assert_eq!(fit.dropped.len(), 1);
        // The fit is still exact on the column space.
        for r in fit.residuals(&x, &y) {
            assert!(r.abs() < 1e-10);
        }
    }

    #[test]
    fn residuals_orthogonal_to_kept_columns() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..25 {
            let t = i as f64;
            rows.push(vec![1.0, t, libm::sin(t)]);
            y.push(libm::cos(2.0 * t) + 0.1 * t);
        }
        let x = Mat::from_rows(&rows);
        let fit = lstsq(&x, &y, DEFAULT_DROP_TOL).unwrap();
        let e = fit.residuals(&x, &y);
        let xte = x.t_mat_vec(&e);
        for &k in &fit.kept {
            assert!(xte[k].abs() < 1e-9, "residual not orthogonal: {}", xte[k]);
        }
    }

    #[test]
    fn xtx_inv_matches_closed_form() {
        let x = Mat::from_rows(&[
            vec![1.0, 2.0],
            vec![1.0, 0.0],
            vec![1.0, -1.0],
            vec![1.0, 3.0],
        ]);
        let y = [0.0; 4];
        let fit = lstsq(&x, &y, DEFAULT_DROP_TOL).unwrap();
        let g = x.gram();
        let det = g.at(0, 0) * g.at(1, 1) - g.at(0, 1) * g.at(1, 0);
        let want = [
            [g.at(1, 1) / det, -g.at(0, 1) / det],
            [-g.at(1, 0) / det, g.at(0, 0) / det],
        ];
        let inv = fit.xtx_inv();
        for i in 0..2 {
            for j in 0..2 {
                assert!((inv.at(i, j) - want[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rank_zero_design() {
        let x = Mat::zeros(5, 2);
        assert!(matches!(lstsq(&x, &[0.0; 5], DEFAULT_DROP_TOL), Err(LinalgError::RankZero)));
    }

    #[test]
    fn jacobi_small_known() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (w, v) = jacobi_eigen(&a);
        assert!((w[0] - 3.0).abs() < 1e-12);
        assert!((w[1] - 1.0).abs() < 1e-12);
        // Reconstruct.
        for i in 0..2 {
            for j in 0..2 {
                let s: f64 = (0..2).map(|k| v.at(i, k) * w[k] * v.at(j, k)).sum();
                assert!((s - a.at(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_reconstructs_larger_matrix() {
        let n = 8;
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let v = libm::sin((1 + i * j) as f64) + if i == j { 3.0 } else { 0.0 };
                *a.at_mut(i, j) = v;
            }
        }
        // Symmetrize.
        let mut s = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                *s.at_mut(i, j) = 0.5 * (a.at(i, j) + a.at(j, i));
            }
        }
        let (w, v) = jacobi_eigen(&s);
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n).map(|k| v.at(i, k) * w[k] * v.at(j, k)).sum();
                assert!((r - s.at(i, j)).abs() < 1e-10);
            }
        }
        // Orthonormal columns.
        for c1 in 0..n {
            for c2 in 0..n {
                let dot: f64 = (0..n).map(|r| v.at(r, c1) * v.at(r, c2)).sum();
                let want = if c1 == c2 { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-10);
            }
        }
    }
}
