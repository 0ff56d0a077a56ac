//! Randomized equivalence suites checking every production numeric kernel
//! against the brute-force oracles.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use tonestudy_core::calibrate::{calibrate, CalibrateConfig};
use tonestudy_core::dedup::{estimate_jaccard, shingle_set, MinHashFamily};
use tonestudy_core::event::window_sum;
use tonestudy_core::linalg::Mat;
use tonestudy_core::panel::{cluster_sandwich, fe_ols, PanelFit, PanelTable};
use tonestudy_core::stats;
use tonestudy_oracle as oracle;

use crate::csvio;
use crate::{CliError, Result};

pub const SUITES: [&str; 7] =
    ["fe_ols", "dcluster", "minhash", "window", "quantile", "ols2", "calibrate"];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seeds: usize,
    pub instances: usize,
    pub max_abs_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn randn(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

struct RandomPanel {
    table: PanelTable,
    x: Vec<Vec<f64>>,
    y: Vec<f64>,
    firms: Vec<u32>,
    quarters: Vec<u32>,
}

/// A panel with firm and quarter error components; coefficients are planted
/// but irrelevant, only the algebra is compared.
fn random_panel(rng: &mut ChaCha8Rng, max_n: usize) -> RandomPanel {
    let n_firms = 3 + rng.gen_range(0..8usize);
    let n_quarters = 3 + rng.gen_range(0..6usize);
    let p = 1 + rng.gen_range(0..4usize);
    let n = (n_firms * n_quarters).min(max_n);
    let beta: Vec<f64> = (0..p).map(|_| randn(rng)).collect();
    let firm_eff: Vec<f64> = (0..n_firms).map(|_| randn(rng)).collect();
    let quarter_eff: Vec<f64> = (0..n_quarters).map(|_| randn(rng)).collect();

    let mut table = PanelTable::new((0..p).map(|j| format!("x{j}")).collect());
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut firms = Vec::new();
    let mut quarters = Vec::new();
    for i in 0..n {
        let f = (i % n_firms) as u32;
        let q = (i / n_firms) as u32;
        let row: Vec<f64> = (0..p).map(|_| randn(rng)).collect();
        let yi: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum::<f64>()
            + firm_eff[f as usize]
            + quarter_eff[q as usize]
            + 0.3 * randn(rng);
        table.push(yi, row.clone(), f, q);
        x.push(row);
        y.push(yi);
        firms.push(f);
        quarters.push(q);
    }
    RandomPanel { table, x, y, firms, quarters }
}

fn suite_fe_ols(seeds: usize) -> (usize, f64) {
    let mut dev = 0.0f64;
    let mut instances = 0;
    for seed in 0..seeds as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_panel(&mut rng, 500);
        let fit = fe_ols(&p.table).expect("random continuous panel");
        let oracle = oracle::ols_dummies(&p.y, &p.x, &p.firms, &p.quarters)
            .expect("full-rank dummy design");
        for (c, b) in fit.coef.iter().enumerate() {
            let b = b.expect("no dropped columns on continuous data");
            dev = dev.max((b - oracle.coef[c]).abs());
        }
        for (e_prod, e_orc) in fit.residuals.iter().zip(&oracle.residuals) {
            dev = dev.max((e_prod - e_orc).abs());
        }
        instances += 1;
    }
    (instances, dev)
}

/// Oracle reconstruction of one clustering's sandwich: dense bread from the
/// demeaned design, scaled brute-force meat, plain triple product.
fn oracle_sandwich(fit: &PanelFit, ids: &[u64]) -> Vec<Vec<f64>> {
    let k = fit.kept.len();
    let xt = fit.demeaned_x();
    let rows: Vec<Vec<f64>> = (0..fit.n)
        .map(|i| fit.kept.iter().map(|&c| xt.at(i, c)).collect())
        .collect();
    let mut xtx = vec![vec![0.0; k]; k];
    for r in &rows {
        for a in 0..k {
            for b in 0..k {
                xtx[a][b] += r[a] * r[b];
            }
        }
    }
    let bread = oracle::invert(&xtx).expect("full-rank kept design");
    let meat = oracle::cluster_meat(&rows, &fit.residuals, ids);
    let g = ids.iter().collect::<std::collections::BTreeSet<_>>().len() as f64;
    let scale = g / (g - 1.0);
    let mul = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; k]; k];
        for i in 0..k {
            for t in 0..k {
                for j in 0..k {
                    out[i][j] += a[i][t] * b[t][j];
                }
            }
        }
        out
    };
    let scaled: Vec<Vec<f64>> =
        meat.iter().map(|row| row.iter().map(|v| v * scale).collect()).collect();
    mul(&mul(&bread, &scaled), &bread)
}

fn suite_dcluster(seeds: usize) -> (usize, f64) {
    let mut dev = 0.0f64;
    let mut instances = 0;
    for seed in 0..seeds as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let p = random_panel(&mut rng, 500);
        let fit = fe_ols(&p.table).expect("random continuous panel");
        let firm_ids: Vec<u64> = p.firms.iter().map(|&f| f as u64).collect();
        let quarter_ids: Vec<u64> = p.quarters.iter().map(|&q| q as u64).collect();
        let pair_ids: Vec<u64> = p
            .firms
            .iter()
            .zip(&p.quarters)
            .map(|(&f, &q)| ((f as u64) << 32) | q as u64)
            .collect();
        for ids in [&firm_ids, &quarter_ids, &pair_ids] {
            let prod = cluster_sandwich(&fit, ids);
            let orc = oracle_sandwich(&fit, ids);
            let k = fit.kept.len();
            for i in 0..k {
                for j in 0..k {
                    dev = dev.max((prod.at(i, j) - orc[i][j]).abs());
                }
            }
        }
        instances += 1;
    }
    (instances, dev)
}

fn word(rng: &mut ChaCha8Rng) -> String {
    let len = 3 + rng.gen_range(0..5usize);
    (0..len).map(|_| (b'a' + rng.gen_range(0..26u8)) as char).collect()
}

fn suite_minhash(seeds: usize) -> (usize, f64) {
    let shingle = 3;
    let family = MinHashFamily::new(128, 7);
    let mut abs_err_sum = 0.0f64;
    let mut pairs = 0usize;
    for seed in 0..seeds as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let base: Vec<String> = (0..120).map(|_| word(&mut rng)).collect();
        // Overlap fraction sweeps 0..1 across seeds.
        let keep = (seed as usize * 13) % 121;
        let mut other: Vec<String> = base[..keep].to_vec();
        while other.len() < 120 {
            other.push(word(&mut rng));
        }
        let exact = oracle::jaccard(&base, &other, shingle).unwrap();
        let sig_a = family.signature(&shingle_set(&base, shingle));
        let sig_b = family.signature(&shingle_set(&other, shingle));
        abs_err_sum += (estimate_jaccard(&sig_a, &sig_b) - exact).abs();
        pairs += 1;
    }
    (pairs, abs_err_sum / pairs as f64)
}

fn suite_window(seeds: usize) -> (usize, f64) {
    let mut dev = 0.0f64;
    let mut instances = 0;
    for seed in 0..seeds as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let mut series: BTreeMap<i32, f64> = BTreeMap::new();
        for t in -40..=25 {
            if rng.gen::<f64>() < 0.7 {
                series.insert(t, randn(&mut rng));
            }
        }
        for _ in 0..10 {
            let a = rng.gen_range(-45..20);
            let b = a + rng.gen_range(0..12);
            let orc = oracle::masked_sum(&series, a, b);
            match (window_sum(&series, (a, b)), orc) {
                (Ok(v), Some(w)) => dev = dev.max((v - w).abs()),
                (Err(_), None) => {}
                (got, want) => panic!("window presence mismatch: {got:?} vs {want:?}"),
            }
        }
        instances += 1;
    }
    (instances, dev)
}

fn suite_quantile(seeds: usize) -> (usize, f64) {
    let mut dev = 0.0f64;
    let mut instances = 0;
    for seed in 0..seeds as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let n = 2 + rng.gen_range(0..200usize);
        let values: Vec<f64> = (0..n).map(|_| randn(&mut rng) * 10.0).collect();
        for p in [0.0, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0] {
            dev = dev.max((stats::quantile(&values, p) - oracle::quantile(&values, p)).abs());
        }
        let q: f64 = rng.gen();
        dev = dev.max((stats::quantile(&values, q) - oracle::quantile(&values, q)).abs());
        instances += 1;
    }
    (instances, dev)
}

fn suite_ols2(seeds: usize) -> (usize, f64) {
    let mut dev = 0.0f64;
    let mut instances = 0;
    for seed in 0..seeds as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let n = 5 + rng.gen_range(0..100usize);
        let xs: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.4 - 1.3 * x + 0.5 * randn(&mut rng)).collect();
        let fit = stats::ols2(&xs, &ys);
        let (a, b) = oracle::ols2_closed_form(&xs, &ys);
        dev = dev.max((fit.alpha - a).abs()).max((fit.beta - b).abs());
        instances += 1;
    }
    (instances, dev)
}

fn suite_calibrate(seeds: usize) -> (usize, f64) {
    let mut dev = 0.0f64;
    let mut instances = 0;
    for seed in 0..seeds as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(6000 + seed);
        let n = 60 + rng.gen_range(0..60usize);
        let j = 2 + rng.gen_range(0..5usize);
        let mut x = Mat::zeros(n, j);
        let mut rows = vec![vec![0.0; j]; n];
        for r in 0..n {
            for c in 0..j {
                let v = 0.02 + 0.01 * randn(&mut rng);
                *x.at_mut(r, c) = v;
                rows[r][c] = v;
            }
        }
        let y: Vec<f64> = (0..n).map(|_| randn(&mut rng)).collect();
        let fit = calibrate(&x, &y, &CalibrateConfig::default()).expect("well conditioned");
        if fit.lambda != 0.0 {
            continue;
        }

        // Centered normal equations solved by the dense oracle.
        let xbar: Vec<f64> = (0..j)
            .map(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n as f64)
            .collect();
        let ybar = y.iter().sum::<f64>() / n as f64;
        let mut xtx = vec![vec![0.0; j]; j];
        let mut xty = vec![0.0; j];
        for (r, yv) in rows.iter().zip(&y) {
            for a in 0..j {
                xty[a] += (r[a] - xbar[a]) * (yv - ybar);
                for b in 0..j {
                    xtx[a][b] += (r[a] - xbar[a]) * (r[b] - xbar[b]);
                }
            }
        }
        let slopes = oracle::solve(xtx, xty).expect("full rank");
        for (got, want) in fit.raw_slopes.iter().zip(&slopes) {
            dev = dev.max((got - want).abs());
        }
        instances += 1;
    }
    (instances, dev)
}

pub fn run_suite(name: &str, seeds: usize) -> Result<SuiteReport> {
    let (instances, max_abs_deviation, tolerance) = match name {
        "fe_ols" => {
            let (i, d) = suite_fe_ols(seeds);
            (i, d, 1e-8)
        }
        "dcluster" => {
            let (i, d) = suite_dcluster(seeds);
            (i, d, 1e-8)
        }
        "minhash" => {
            let (i, d) = suite_minhash(seeds);
            (i, d, 0.05)
        }
        "window" => {
            let (i, d) = suite_window(seeds);
            (i, d, 1e-12)
        }
        "quantile" => {
            let (i, d) = suite_quantile(seeds);
            (i, d, 1e-12)
        }
        "ols2" => {
            let (i, d) = suite_ols2(seeds);
            (i, d, 1e-10)
        }
        "calibrate" => {
            let (i, d) = suite_calibrate(seeds);
            (i, d, 1e-8)
        }
        other => return Err(CliError::validation(format!("unknown suite {other}"))),
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        seeds,
        instances,
        max_abs_deviation,
        tolerance,
        pass: max_abs_deviation < tolerance,
    })
}

pub fn run_verify(suite: &str, seeds: usize, report: Option<&Path>) -> Result<Vec<SuiteReport>> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        vec![suite]
    };
    let mut reports = Vec::new();
    for name in names {
        reports.push(run_suite(name, seeds)?);
    }
    if let Some(path) = report {
        csvio::write_csv(path, &reports)?;
    }
    if reports.iter().any(|r| !r.pass) {
        let failed: Vec<&str> =
            reports.iter().filter(|r| !r.pass).map(|r| r.suite.as_str()).collect();
        return Err(CliError::estimation(format!(
            "oracle suites failed: {}",
            failed.join(", ")
        )));
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_suite_passes_at_twenty_seeds() {
        for name in SUITES {
            let r = run_suite(name, 20).unwrap();
            assert!(
                r.pass,
                "{name}: max deviation {} over tolerance {}",
                r.max_abs_deviation, r.tolerance
            );
            assert!(r.instances > 0);
        }
    }

    #[test]
    fn report_file_lists_all_suites() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("oracle_report.csv");
        let reports = run_verify("all", 5, Some(&path)).unwrap();
        assert_eq!(reports.len(), SUITES.len());
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1 + SUITES.len());
        assert!(text.starts_with("suite,seeds,instances,max_abs_deviation,tolerance,pass"));
    }

    #[test]
    fn unknown_suite_rejected() {
        assert_eq!(run_suite("bogus", 5).unwrap_err().exit_code(), 2);
    }
}
