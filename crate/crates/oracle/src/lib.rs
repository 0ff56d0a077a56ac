//! Brute-force oracles for the test suites. Everything here trades speed
//! for obviousness and deliberately shares no code with the production
//! kernels: Jaccard works on string shingle sets, regressions go through
//! explicit dummy columns and Gauss-Jordan elimination, and cumulative
//! sums walk the window day by day.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleError {
    EmptyDoc,
    Singular,
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OracleError::EmptyDoc => write!(f, "document has no shingles"),
            OracleError::Singular => write!(f, "singular system"),
        }
    }
}

fn shingles(tokens: &[String], len: usize) -> BTreeSet<String> {
    if tokens.is_empty() {
        return BTreeSet::new();
    }
    if tokens.len() <= len {
        return [tokens.join(" ")].into_iter().collect();
    }
    tokens.windows(len).map(|w| w.join(" ")).collect()
}

/// Exact Jaccard similarity of the two documents' shingle sets.
pub fn jaccard(a: &[String], b: &[String], shingle_len: usize) -> Result<f64, OracleError> {
    let sa = shingles(a, shingle_len);
    let sb = shingles(b, shingle_len);
    if sa.is_empty() || sb.is_empty() {
        return Err(OracleError::EmptyDoc);
    }
    let inter = sa.intersection(&sb).count() as f64;
    let union = sa.union(&sb).count() as f64;
    Ok(inter / union)
}

/// Solve A b = c by Gauss-Jordan elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut c: Vec<f64>) -> Result<Vec<f64>, OracleError> {
    let n = c.len();
    assert_eq!(a.len(), n);
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    for col in 0..n {
        let (pivot, pmag) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .fold((col, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if pmag <= 1e-12 * scale {
            return Err(OracleError::Singular);
        }
        a.swap(col, pivot);
        c.swap(col, pivot);
        let d = a[col][col];
        for v in a[col].iter_mut() {
            *v /= d;
        }
        c[col] /= d;
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..n {
                a[r][j] -= f * a[col][j];
            }
            c[r] -= f * c[col];
        }
    }
    Ok(c)
}

/// Inverse by Gauss-Jordan; None when singular.
pub fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
        match solve(a.to_vec(), e) {
            Ok(col) => cols.push(col),
            Err(_) => return None,
        }
    }
    let mut out = vec![vec![0.0; n]; n];
    for (j, col) in cols.iter().enumerate() {
        for i in 0..n {
            out[i][j] = col[i];
        }
    }
    Some(out)
}

/// Explicit two-way dummy design: regressor columns, then one dummy per
/// firm, then one dummy per quarter except the smallest (no intercept).
pub fn dummy_design(x: &[Vec<f64>], firms: &[u32], quarters: &[u32]) -> Vec<Vec<f64>> {
    let firm_ids: BTreeSet<u32> = firms.iter().copied().collect();
    let quarter_ids: Vec<u32> = quarters.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let mut rows = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let mut row = x[i].clone();
        for &f in &firm_ids {
            row.push(if firms[i] == f { 1.0 } else { 0.0 });
        }
        for &q in quarter_ids.iter().skip(1) {
            row.push(if quarters[i] == q { 1.0 } else { 0.0 });
        }
        rows.push(row);
    }
    rows
}

#[derive(Clone, Debug)]
pub struct DummyOls {
    /// Coefficients on the original regressors only.
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    pub fitted: Vec<f64>,
    /// The full design actually solved, for sandwich construction.
    pub design: Vec<Vec<f64>>,
    /// Full coefficient vector including the dummies.
    pub full_coef: Vec<f64>,
}

/// Fixed-effects regression the slow way: build dummies, form the normal
/// equations, solve them directly.
pub fn ols_dummies(
    y: &[f64],
    x: &[Vec<f64>],
    firms: &[u32],
    quarters: &[u32],
) -> Result<DummyOls, OracleError> {
    let design = dummy_design(x, firms, quarters);
    let n = y.len();
    let p = design[0].len();
    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for i in 0..n {
        for a in 0..p {
            xty[a] += design[i][a] * y[i];
            for b in 0..p {
                xtx[a][b] += design[i][a] * design[i][b];
            }
        }
    }
    let full_coef = solve(xtx, xty)?;
    let fitted: Vec<f64> = (0..n)
        .map(|i| design[i].iter().zip(&full_coef).map(|(a, b)| a * b).sum())
        .collect();
    let residuals: Vec<f64> = (0..n).map(|i| y[i] - fitted[i]).collect();
    let k = x.first().map_or(0, Vec::len);
    Ok(DummyOls { coef: full_coef[..k].to_vec(), residuals, fitted, design, full_coef })
}

/// Direct meat matrix Σ_g (X_g'e_g)(X_g'e_g)', no scaling.
pub fn cluster_meat(x: &[Vec<f64>], residuals: &[f64], clusters: &[u64]) -> Vec<Vec<f64>> {
    let p = x.first().map_or(0, Vec::len);
    let mut per_group: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    for i in 0..x.len() {
        let s = per_group.entry(clusters[i]).or_insert_with(|| vec![0.0; p]);
        for (slot, v) in s.iter_mut().zip(&x[i]) {
            *slot += v * residuals[i];
        }
    }
    let mut m = vec![vec![0.0; p]; p];
    for s in per_group.values() {
        for a in 0..p {
            for b in 0..p {
                m[a][b] += s[a] * s[b];
            }
        }
    }
    m
}

/// Simple regression y = α + βx by the textbook closed form.
pub fn ols2_closed_form(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let xbar = x.iter().sum::<f64>() / n;
    let ybar = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xbar) * (v - xbar)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xbar) * (b - ybar)).sum();
    let beta = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (ybar - beta * xbar, beta)
}

/// Sum of the values present on days lo..=hi; None when none are present.
pub fn masked_sum(days: &BTreeMap<i32, f64>, lo: i32, hi: i32) -> Option<f64> {
    let mut sum = 0.0;
    let mut seen = false;
    for t in lo..=hi {
        if let Some(&v) = days.get(&t) {
            sum += v;
            seen = true;
        }
    }
    seen.then_some(sum)
}

pub fn masked_mean(days: &BTreeMap<i32, f64>, lo: i32, hi: i32) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for t in lo..=hi {
        if let Some(&v) = days.get(&t) {
            sum += v;
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Interpolated order-statistic quantile, spelled out step by step.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty() && (0.0..=1.0).contains(&p));
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in quantile"));
    let h = (v.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    if lo + 1 >= v.len() {
        return v[v.len() - 1];
    }
    v[lo] + (h - lo as f64) * (v[lo + 1] - v[lo])
}
