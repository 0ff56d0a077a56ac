//! Panel OLS with firm and year-quarter fixed effects, double-clustered
//! covariance, and Wald tests of coefficient equality.
//!
//! Fixed effects are absorbed by alternating within-group demeaning rather
//! than dummy columns; the result is checked against the explicit-dummy
//! regression in tests. The covariance is the three-term combination
//! V_firm + V_quarter − V_pair, each term a cluster sandwich scaled by
//! G/(G−1) for its own cluster count, with negative eigenvalues floored at
//! zero afterwards.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{jacobi_eigen, lstsq, LinalgError, Mat, DEFAULT_DROP_TOL};
use crate::stats::chi2_1_sf;

/// Alternating-projection stopping rule: largest group-mean adjustment in a
/// full sweep.
pub const DEMEAN_TOL: f64 = 1e-10;
const DEMEAN_MAX_SWEEPS: usize = 500;

#[derive(Clone, Debug, PartialEq)]
pub enum PanelError {
    Empty,
    /// Every regressor was absorbed or collinear after demeaning.
    Collinearity { columns: Vec<String> },
    TooFewClusters { dimension: &'static str, have: usize },
    ZeroVariance,
    DroppedCoefficient { column: String },
    UnknownColumn { column: String },
}

impl core::fmt::Display for PanelError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PanelError::Empty => write!(f, "empty panel"),
            PanelError::Collinearity { columns } => {
                write!(f, "no identifiable regressors (dropped: {columns:?})")
            }
            PanelError::TooFewClusters { dimension, have } => {
                write!(f, "{have} {dimension} cluster(s), need at least 2")
            }
            PanelError::ZeroVariance => write!(f, "zero variance for the coefficient contrast"),
            PanelError::DroppedCoefficient { column } => {
                write!(f, "coefficient for {column} was dropped")
            }
            PanelError::UnknownColumn { column } => write!(f, "no column named {column}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PanelRow {
    pub y: f64,
    pub x: Vec<f64>,
    pub firm: u32,
    pub quarter: u32,
}

#[derive(Clone, Debug, Default)]
pub struct PanelTable {
    pub col_names: Vec<String>,
    pub rows: Vec<PanelRow>,
}

impl PanelTable {
    pub fn new(col_names: Vec<String>) -> Self {
        PanelTable { col_names, rows: Vec::new() }
    }

    pub fn push(&mut self, y: f64, x: Vec<f64>, firm: u32, quarter: u32) {
        assert_eq!(x.len(), self.col_names.len(), "row width mismatch");
        self.rows.push(PanelRow { y, x, firm, quarter });
    }
}

#[derive(Clone, Debug)]
pub struct PanelFit {
    /// Coefficients by column; `None` marks a column absorbed by the FE or
    /// collinear after demeaning.
    pub coef: Vec<Option<f64>>,
    pub col_names: Vec<String>,
    pub dropped: Vec<String>,
    pub kept: Vec<usize>,
    pub residuals: Vec<f64>,
    /// y − residual, so the fixed-effect components are included.
    pub fitted: Vec<f64>,
    pub r2: f64,
    pub n: usize,
    pub n_firms: usize,
    pub n_quarters: usize,
    pub demeaning_sweeps: usize,
    pub firms: Vec<u32>,
    pub quarters: Vec<u32>,
    xtilde: Mat,
    xtx_inv_kept: Mat,
}

impl PanelFit {
    /// Regressors after the two-way within-transformation.
    pub fn demeaned_x(&self) -> &Mat {
        &self.xtilde
    }

    pub fn coef_by_name(&self, name: &str) -> Result<f64, PanelError> {
        let i = self.col_index(name)?;
        self.coef[i].ok_or(PanelError::DroppedCoefficient { column: name.into() })
    }

    pub fn col_index(&self, name: &str) -> Result<usize, PanelError> {
        self.col_names
            .iter()
            .position(|c| c == name)
            .ok_or(PanelError::UnknownColumn { column: name.into() })
    }
}

fn group_indices(ids: &[u64]) -> BTreeMap<u64, Vec<usize>> {
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, &id) in ids.iter().enumerate() {
        groups.entry(id).or_default().push(i);
    }
    groups
}

/// Subtract group means from every column; returns the largest adjustment.
fn demean_pass(cols: &mut [Vec<f64>], groups: &BTreeMap<u64, Vec<usize>>) -> f64 {
    let mut max_change = 0.0f64;
    for rows in groups.values() {
        let inv = 1.0 / rows.len() as f64;
        for col in cols.iter_mut() {
            let mean: f64 = rows.iter().map(|&r| col[r]).sum::<f64>() * inv;
            for &r in rows {
                col[r] -= mean;
            }
            max_change = max_change.max(mean.abs());
        }
    }
    max_change
}

/// Two-way fixed-effects OLS via alternating within-group demeaning.
pub fn fe_ols(table: &PanelTable) -> Result<PanelFit, PanelError> {
    let n = table.rows.len();
    if n == 0 {
        return Err(PanelError::Empty);
    }
    let p = table.col_names.len();
    let firms: Vec<u32> = table.rows.iter().map(|r| r.firm).collect();
    let quarters: Vec<u32> = table.rows.iter().map(|r| r.quarter).collect();
    let firm_groups = group_indices(&firms.iter().map(|&f| f as u64).collect::<Vec<_>>());
    let quarter_groups = group_indices(&quarters.iter().map(|&q| q as u64).collect::<Vec<_>>());

    // Columns 0..p are regressors, column p is y.
    let mut cols: Vec<Vec<f64>> = (0..=p)
        .map(|c| {
            table
                .rows
                .iter()
                .map(|r| if c < p { r.x[c] } else { r.y })
                .collect()
        })
        .collect();
    let mut sweeps = 0;
    for _ in 0..DEMEAN_MAX_SWEEPS {
        sweeps += 1;
        let c1 = demean_pass(&mut cols, &firm_groups);
        let c2 = demean_pass(&mut cols, &quarter_groups);
        if c1.max(c2) < DEMEAN_TOL {
            break;
        }
    }

    let ytilde = cols.pop().expect("y column");
    let mut xtilde = Mat::zeros(n, p);
    for (c, col) in cols.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            *xtilde.at_mut(r, c) = v;
        }
    }

    let ls = match lstsq(&xtilde, &ytilde, DEFAULT_DROP_TOL) {
        Ok(ls) => ls,
        Err(LinalgError::RankZero) => {
            return Err(PanelError::Collinearity { columns: table.col_names.clone() })
        }
        Err(LinalgError::ShapeMismatch) => unreachable!("shapes built together"),
    };
    let residuals = ls.residuals(&xtilde, &ytilde);
    let fitted: Vec<f64> = table
        .rows
        .iter()
        .zip(&residuals)
        .map(|(row, e)| row.y - e)
        .collect();

    let ybar: f64 = table.rows.iter().map(|r| r.y).sum::<f64>() / n as f64;
    let sst: f64 = table.rows.iter().map(|r| (r.y - ybar) * (r.y - ybar)).sum();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };

    let dropped = ls.dropped.iter().map(|&i| table.col_names[i].clone()).collect();
    let xtx_inv_kept = ls.xtx_inv();
    Ok(PanelFit {
        coef: ls.coef,
        col_names: table.col_names.clone(),
        dropped,
        kept: ls.kept,
        residuals,
        fitted,
        r2,
        n,
        n_firms: firm_groups.len(),
        n_quarters: quarter_groups.len(),
        demeaning_sweeps: sweeps,
        firms,
        quarters,
        xtilde,
        xtx_inv_kept,
    })
}

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    assert_eq!(a.cols(), b.rows());
    let mut out = Mat::zeros(a.rows(), b.cols());
    for i in 0..a.rows() {
        for t in 0..a.cols() {
            let av = a.at(i, t);
            if av == 0.0 {
                continue;
            }
            for j in 0..b.cols() {
                *out.at_mut(i, j) += av * b.at(t, j);
            }
        }
    }
    out
}

/// Cluster meat matrix over the kept columns: G/(G−1) · Σ_g s_g s_gᵀ with
/// s_g the within-cluster sum of x̃ᵢeᵢ.
fn cluster_meat(fit: &PanelFit, ids: &[u64]) -> Mat {
    let k = fit.kept.len();
    let mut sums: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for i in 0..fit.n {
        let s = sums.entry(ids[i]).or_insert_with(|| vec![0.0; k]);
        let e = fit.residuals[i];
        for (slot, &c) in s.iter_mut().zip(&fit.kept) {
            *slot += fit.xtilde.at(i, c) * e;
        }
    }
    let g = sums.len() as f64;
    let scale = g / (g - 1.0);
    let mut m = Mat::zeros(k, k);
    for s in sums.values() {
        for i in 0..k {
            if s[i] == 0.0 {
                continue;
            }
            for j in 0..k {
                *m.at_mut(i, j) += scale * s[i] * s[j];
            }
        }
    }
    m
}

/// One clustering's sandwich B·meat·B over the kept columns, including the
/// G/(G−1) scaling.
pub fn cluster_sandwich(fit: &PanelFit, ids: &[u64]) -> Mat {
    let bread = &fit.xtx_inv_kept;
    mat_mul(&mat_mul(bread, &cluster_meat(fit, ids)), bread)
}

/// Project a symmetric matrix onto the PSD cone by flooring its
/// eigenvalues at zero.
pub fn psd_floor(v: &Mat) -> Mat {
    let n = v.rows();
    let mut sym = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            *sym.at_mut(i, j) = 0.5 * (v.at(i, j) + v.at(j, i));
        }
    }
    let (w, q) = jacobi_eigen(&sym);
    let mut out = Mat::zeros(n, n);
    for k in 0..n {
        let wk = w[k].max(0.0);
        if wk == 0.0 {
            continue;
        }
        for i in 0..n {
            let qik = q.at(i, k) * wk;
            if qik == 0.0 {
                continue;
            }
            for j in 0..n {
                *out.at_mut(i, j) += qik * q.at(j, k);
            }
        }
    }
    out
}

/// Double-clustered covariance V_a + V_b − V_{a∩b}, expanded back to the
/// full column space with zero rows/columns at dropped positions.
pub fn dcluster_cov(
    fit: &PanelFit,
    firm_cluster: &[u32],
    quarter_cluster: &[u32],
) -> Result<Mat, PanelError> {
    assert_eq!(firm_cluster.len(), fit.n, "firm cluster length");
    assert_eq!(quarter_cluster.len(), fit.n, "quarter cluster length");
    let g_firm = firm_cluster.iter().collect::<BTreeSet<_>>().len();
    if g_firm < 2 {
        return Err(PanelError::TooFewClusters { dimension: "firm", have: g_firm });
    }
    let g_quarter = quarter_cluster.iter().collect::<BTreeSet<_>>().len();
    if g_quarter < 2 {
        return Err(PanelError::TooFewClusters { dimension: "quarter", have: g_quarter });
    }

    let firm_ids: Vec<u64> = firm_cluster.iter().map(|&f| f as u64).collect();
    let quarter_ids: Vec<u64> = quarter_cluster.iter().map(|&q| q as u64).collect();
    let pair_ids: Vec<u64> = firm_cluster
        .iter()
        .zip(quarter_cluster)
        .map(|(&f, &q)| ((f as u64) << 32) | q as u64)
        .collect();

    let k = fit.kept.len();
    let mut v = Mat::zeros(k, k);
    for (ids, sign) in [(&firm_ids, 1.0), (&quarter_ids, 1.0), (&pair_ids, -1.0)] {
        let term = cluster_sandwich(fit, ids);
        for i in 0..k {
            for j in 0..k {
                *v.at_mut(i, j) += sign * term.at(i, j);
            }
        }
    }
    let v = psd_floor(&v);

    let p = fit.col_names.len();
    let mut full = Mat::zeros(p, p);
    for (i, &ci) in fit.kept.iter().enumerate() {
        for (j, &cj) in fit.kept.iter().enumerate() {
            *full.at_mut(ci, cj) = v.at(i, j);
        }
    }
    Ok(full)
}

/// W = (b_a − b_b)² / (V_aa + V_bb − 2V_ab) and its χ²(1) p-value.
pub fn wald_from(
    b_a: f64,
    b_b: f64,
    v_aa: f64,
    v_bb: f64,
    v_ab: f64,
) -> Result<(f64, f64), PanelError> {
    let denom = v_aa + v_bb - 2.0 * v_ab;
    if denom <= 0.0 {
        return Err(PanelError::ZeroVariance);
    }
    let diff = b_a - b_b;
    let w = diff * diff / denom;
    Ok((w, chi2_1_sf(w)))
}

/// Wald test that two named coefficients are equal, using a covariance from
/// `dcluster_cov` (full column space).
pub fn wald_equal(
    fit: &PanelFit,
    cov: &Mat,
    name_a: &str,
    name_b: &str,
) -> Result<(f64, f64), PanelError> {
    let b_a = fit.coef_by_name(name_a)?;
    let b_b = fit.coef_by_name(name_b)?;
    let ia = fit.col_index(name_a)?;
    let ib = fit.col_index(name_b)?;
    wald_from(b_a, b_b, cov.at(ia, ia), cov.at(ib, ib), cov.at(ia, ib))
}

/// Significance stars at the 10%, 5%, and 1% levels.
pub fn stars(p_value: f64) -> &'static str {
    if p_value < 0.01 {
        "***"
    } else if p_value < 0.05 {
        "**"
    } else if p_value < 0.10 {
        "*"
    } else {
        ""
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    /// Explicit-dummy oracle: regressors plus one dummy per firm and one per
    /// quarter except the first, no intercept.
    fn dummy_ols(table: &PanelTable) -> (Vec<f64>, Vec<f64>) {
        let firms: BTreeSet<u32> = table.rows.iter().map(|r| r.firm).collect();
        let quarters: BTreeSet<u32> = table.rows.iter().map(|r| r.quarter).collect();
        let firms: Vec<u32> = firms.into_iter().collect();
        let quarters: Vec<u32> = quarters.into_iter().collect();
        let p = table.col_names.len();
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for r in &table.rows {
            let mut row = r.x.clone();
            for &f in &firms {
                row.push(if r.firm == f { 1.0 } else { 0.0 });
            }
            for &q in quarters.iter().skip(1) {
                row.push(if r.quarter == q { 1.0 } else { 0.0 });
            }
            rows.push(row);
            y.push(r.y);
        }
        let x = Mat::from_rows(&rows);
        let ls = lstsq(&x, &y, DEFAULT_DROP_TOL).unwrap();
        let coefs: Vec<f64> = (0..p).map(|i| ls.coef[i].unwrap_or(f64::NAN)).collect();
        (coefs, ls.residuals(&x, &y))
    }

    fn toy_panel(n: usize, n_firms: u32, n_quarters: u32) -> PanelTable {
        let mut t = PanelTable::new(names(&["a", "b"]));
        for i in 0..n {
            let firm = (i as u32 * 7 + 3) % n_firms;
            let quarter = (i as u32 * 5 + 1) % n_quarters;
            let a = libm::sin(1.3 * i as f64);
            let b = libm::cos(0.7 * i as f64 + 0.2);
            let y = 0.8 * a - 1.2 * b
                + 0.5 * firm as f64
                - 0.3 * quarter as f64
                + 0.3 * libm::sin(9.1 * i as f64);
            t.push(y, vec![a, b], firm, quarter);
        }
        t
    }

    #[test]
    fn one_firm_one_quarter_is_plain_ols() {
        let mut t = PanelTable::new(names(&["a", "b"]));
        for i in 0..20 {
            let a = libm::sin(i as f64);
            let b = libm::cos(2.0 * i as f64);
            t.push(1.5 + 2.0 * a - b + 0.1 * libm::sin(5.0 * i as f64), vec![a, b], 1, 1);
        }
        let fit = fe_ols(&t).unwrap();

        let rows: Vec<Vec<f64>> = t.rows.iter().map(|r| {
            let mut v = vec![1.0];
            v.extend_from_slice(&r.x);
            v
        }).collect();
        let y: Vec<f64> = t.rows.iter().map(|r| r.y).collect();
        let plain = lstsq(&Mat::from_rows(&rows), &y, DEFAULT_DROP_TOL).unwrap();
        for j in 0..2 {
            assert!((fit.coef[j].unwrap() - plain.coef[j + 1].unwrap()).abs() < 1e-9);
        }
        let plain_resid = plain.residuals(&Mat::from_rows(&rows), &y);
        for (e1, e2) in fit.residuals.iter().zip(&plain_resid) {
            assert!((e1 - e2).abs() < 1e-9);
        }
    }

    #[test]
    fn matches_dummy_variable_ols() {
        let t = toy_panel(200, 5, 8);
        let fit = fe_ols(&t).unwrap();
        assert_eq!(fit.n_firms, 5);
        assert_eq!(fit.n_quarters, 8);
        let (coefs, resid) = dummy_ols(&t);
        for j in 0..2 {
            assert!(
                (fit.coef[j].unwrap() - coefs[j]).abs() < 1e-8,
                "coef {j}: {} vs {}",
                fit.coef[j].unwrap(),
                coefs[j]
            );
        }
        for (e1, e2) in fit.residuals.iter().zip(&resid) {
            assert!((e1 - e2).abs() < 1e-8);
        }
        // Fitted values include the recovered fixed effects, so they match
        // the dummy regression's fitted values, not just the slopes' part.
        for ((f, e2), row) in fit.fitted.iter().zip(&resid).zip(&t.rows) {
            assert!((f - (row.y - e2)).abs() < 1e-8);
        }
        assert!(fit.r2 > 0.0 && fit.r2 < 1.0);
    }

    #[test]
    fn residuals_orthogonal_to_demeaned_regressors() {
        let t = toy_panel(200, 5, 8);
        let fit = fe_ols(&t).unwrap();
        let xte = fit.demeaned_x().t_mat_vec(&fit.residuals);
        for &k in &fit.kept {
            assert!(xte[k].abs() < 1e-8);
        }
    }

    #[test]
    fn absorbed_regressor_dropped_and_reported() {
        let mut t = PanelTable::new(names(&["real", "firm_level"]));
        for i in 0..120 {
            let firm = (i % 4) as u32;
            let quarter = (i % 6) as u32;
            let a = libm::sin(0.9 * i as f64);
            let firm_level = 2.0 + firm as f64;
            let y = 1.1 * a + 0.4 * firm_level - 0.2 * quarter as f64;
            t.push(y, vec![a, firm_level], firm, quarter);
        }
        let fit = fe_ols(&t).unwrap();
        assert_eq!(fit.dropped, vec!["firm_level".to_string()]);
        assert!(fit.coef[1].is_none());
        assert!((fit.coef[0].unwrap() - 1.1).abs() < 1e-8);
    }

    #[test]
    fn all_columns_absorbed_is_collinearity() {
        let mut t = PanelTable::new(names(&["firm_level"]));
        for i in 0..40 {
            let firm = (i % 4) as u32;
            t.push(firm as f64, vec![firm as f64 * 3.0], firm, (i % 5) as u32);
        }
        match fe_ols(&t) {
            Err(PanelError::Collinearity { columns }) => {
                assert_eq!(columns, vec!["firm_level".to_string()])
            }
            other => panic!("expected collinearity, got {other:?}"),
        }
    }

    #[test]
    fn singleton_clusters_reduce_to_hc() {
        let t = toy_panel(60, 4, 5);
        let fit = fe_ols(&t).unwrap();
        let ids: Vec<u32> = (0..60).collect();
        let cov = dcluster_cov(&fit, &ids, &ids).unwrap();

        // Heteroskedasticity-robust sandwich with the same n/(n−1) scaling.
        let k = fit.kept.len();
        let n = fit.n as f64;
        let mut meat = Mat::zeros(k, k);
        for i in 0..fit.n {
            let e = fit.residuals[i];
            for (ii, &ci) in fit.kept.iter().enumerate() {
                for (jj, &cj) in fit.kept.iter().enumerate() {
                    *meat.at_mut(ii, jj) +=
                        n / (n - 1.0) * fit.xtilde.at(i, ci) * e * fit.xtilde.at(i, cj) * e;
                }
            }
        }
        let hc = mat_mul(&mat_mul(&fit.xtx_inv_kept, &meat), &fit.xtx_inv_kept);
        for (i, &ci) in fit.kept.iter().enumerate() {
            for (j, &cj) in fit.kept.iter().enumerate() {
                assert!(
                    (cov.at(ci, cj) - hc.at(i, j)).abs() < 1e-12,
                    "{} vs {}",
                    cov.at(ci, cj),
                    hc.at(i, j)
                );
            }
        }
    }

    #[test]
    fn two_cluster_toy_matches_hand_sums() {
        let mut t = PanelTable::new(names(&["x"]));
        let data = [
            (0u32, 0u32, 0.4, 1.1),
            (0, 1, -0.2, -0.5),
            (0, 0, 0.9, 1.7),
            (1, 1, -0.6, -0.9),
            (1, 0, 0.3, 0.8),
            (1, 1, 0.1, 0.4),
            (0, 1, -0.8, -1.6),
            (1, 0, 0.6, 1.0),
        ];
        for &(f, q, x, y) in &data {
            t.push(y, vec![x], f, q);
        }
        let fit = fe_ols(&t).unwrap();
        let cov = dcluster_cov(&fit, &fit.firms, &fit.quarters).unwrap();

        let xt: Vec<f64> = (0..fit.n).map(|i| fit.demeaned_x().at(i, 0)).collect();
        let bread = 1.0 / xt.iter().map(|v| v * v).sum::<f64>();
        let sum_for = |sel: &dyn Fn(usize) -> u64| -> f64 {
            let mut groups: BTreeMap<u64, f64> = BTreeMap::new();
            for i in 0..fit.n {
                *groups.entry(sel(i)).or_default() += xt[i] * fit.residuals[i];
            }
            let g = groups.len() as f64;
            g / (g - 1.0) * groups.values().map(|s| s * s).sum::<f64>()
        };
        let m_firm = sum_for(&|i| data[i].0 as u64);
        let m_quarter = sum_for(&|i| data[i].1 as u64);
        let m_pair = sum_for(&|i| ((data[i].0 as u64) << 32) | data[i].1 as u64);
        let want = (bread * bread * (m_firm + m_quarter - m_pair)).max(0.0);
        assert!((cov.at(0, 0) - want).abs() < 1e-12, "{} vs {want}", cov.at(0, 0));
    }

    #[test]
    fn cluster_relabeling_invariance() {
        let t = toy_panel(150, 4, 6);
        let fit = fe_ols(&t).unwrap();
        let a = dcluster_cov(&fit, &fit.firms, &fit.quarters).unwrap();
        let firms2: Vec<u32> = fit.firms.iter().map(|&f| 1000 - f * 17).collect();
        let quarters2: Vec<u32> = fit.quarters.iter().map(|&q| q * 2 + 9).collect();
        let b = dcluster_cov(&fit, &firms2, &quarters2).unwrap();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                assert!((a.at(i, j) - b.at(i, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn too_few_clusters_rejected() {
        let t = toy_panel(60, 4, 5);
        let fit = fe_ols(&t).unwrap();
        let ones = vec![7u32; 60];
        assert_eq!(
            dcluster_cov(&fit, &fit.firms, &ones).unwrap_err(),
            PanelError::TooFewClusters { dimension: "quarter", have: 1 }
        );
        assert_eq!(
            dcluster_cov(&fit, &ones, &fit.quarters).unwrap_err(),
            PanelError::TooFewClusters { dimension: "firm", have: 1 }
        );
    }

    #[test]
    fn wald_formula_values() {
        let (w, p) = wald_from(1.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
        assert!((p - 0.47950012218695346).abs() < 1e-12);
        let (w0, p0) = wald_from(0.7, 0.7, 2.0, 1.0, 0.3).unwrap();
        assert_eq!(w0, 0.0);
        assert_eq!(p0, 1.0);
        assert_eq!(wald_from(1.0, 0.0, 1.0, 1.0, 1.0).unwrap_err(), PanelError::ZeroVariance);
    }

    #[test]
    fn wald_invariant_to_consistent_rescaling() {
        let (w1, _) = wald_from(1.0, 0.4, 0.5, 0.3, 0.1).unwrap();
        let c = 7.3;
        let (w2, _) = wald_from(c * 1.0, c * 0.4, c * c * 0.5, c * c * 0.3, c * c * 0.1).unwrap();
        assert!((w1 - w2).abs() < 1e-12);
    }

    #[test]
    fn wald_by_name_matches_kernel() {
        let t = toy_panel(200, 5, 8);
        let fit = fe_ols(&t).unwrap();
        let cov = dcluster_cov(&fit, &fit.firms, &fit.quarters).unwrap();
        let (w, p) = wald_equal(&fit, &cov, "a", "b").unwrap();
        let ia = 0;
        let ib = 1;
        let (w2, p2) = wald_from(
            fit.coef[ia].unwrap(),
            fit.coef[ib].unwrap(),
            cov.at(ia, ia),
            cov.at(ib, ib),
            cov.at(ia, ib),
        )
        .unwrap();
        assert_eq!(w, w2);
        assert_eq!(p, p2);
        assert!(matches!(
            wald_equal(&fit, &cov, "a", "zzz"),
            Err(PanelError::UnknownColumn { .. })
        ));
    }

    #[test]
    fn psd_floor_clips_negative_eigenvalue() {
        let v = Mat::from_rows(&[vec![0.75, 1.25], vec![1.25, 0.75]]);
        let fixed = psd_floor(&v);
        for i in 0..2 {
            for j in 0..2 {
                assert!((fixed.at(i, j) - 1.0).abs() < 1e-12);
            }
        }
        let (w, _) = jacobi_eigen(&fixed);
        assert!(w.iter().all(|&x| x >= -1e-12));
    }

    #[test]
    fn star_thresholds() {
        assert_eq!(stars(0.005), "***");
        assert_eq!(stars(0.02), "**");
        assert_eq!(stars(0.07), "*");
        assert_eq!(stars(0.2), "");
    }
}
