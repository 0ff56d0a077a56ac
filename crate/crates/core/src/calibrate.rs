//! Word-score calibration: regress same-day market-adjusted firm returns on
//! per-word average frequencies, then standardize the slopes into scores.
//!
//! The regression carries an intercept (handled by centering, so a ridge
//! penalty never shrinks it). A well-conditioned design is solved by plain
//! QR least squares; an ill-conditioned or rank-deficient one falls back to
//! ridge with the penalty chosen by generalized cross-validation on the
//! eigenvalue path of the centered Gram matrix.

use alloc::vec::Vec;

use crate::linalg::{self, Mat};
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RidgePolicy {
    /// Penalize only when the unpenalized design is ill-conditioned.
    Auto,
    /// Never penalize; rank problems become errors.
    Never,
}

#[derive(Clone, Debug)]
pub struct CalibrateConfig {
    pub ridge: RidgePolicy,
    /// Condition-number threshold (largest over smallest Gram eigenvalue)
    /// beyond which the design counts as ill-conditioned.
    pub cond_threshold: f64,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        CalibrateConfig { ridge: RidgePolicy::Auto, cond_threshold: 1e10 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CalibrateError {
    /// Too few firm-day observations for the vocabulary size.
    InsufficientData { have: usize, need: usize },
    /// The unpenalized solve is rank-deficient (or the design is all zero)
    /// and ridge is not available to regularize it.
    SingularDesign,
}

impl core::fmt::Display for CalibrateError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CalibrateError::InsufficientData { have, need } => {
                write!(f, "insufficient observations: have {have}, need {need}")
            }
            CalibrateError::SingularDesign => write!(f, "singular design matrix"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Calibration {
    /// Standardized slopes (mean 0, population std 1), by design column.
    pub scores: Vec<f64>,
    /// Unstandardized regression slopes.
    pub raw_slopes: Vec<f64>,
    pub intercept: f64,
    /// Ridge penalty actually used; 0 for the unpenalized path.
    pub lambda: f64,
}

/// Fits return = a + Σ_j b_j freq_j and returns standardized slopes.
///
/// `x` is the firm-day by word average-frequency design, `y` the same-day
/// market-adjusted returns.
pub fn calibrate(x: &Mat, y: &[f64], cfg: &CalibrateConfig) -> Result<Calibration, CalibrateError> {
    let n = x.rows();
    let j = x.cols();
    assert_eq!(y.len(), n, "returns must match design rows");
    assert!(j >= 1, "empty vocabulary");
    if n < 2 {
        return Err(CalibrateError::InsufficientData { have: n, need: 2 });
    }
    if cfg.ridge == RidgePolicy::Never && n < 2 * j {
        return Err(CalibrateError::InsufficientData { have: n, need: 2 * j });
    }

    // Center once; the intercept comes back at the end.
    let mut xbar = alloc::vec![0.0; j];
    for r in 0..n {
        for (c, m) in xbar.iter_mut().enumerate() {
            *m += x.at(r, c);
        }
    }
    for m in xbar.iter_mut() {
        *m /= n as f64;
    }
    let ybar = stats::mean(y);
    let mut xc = Mat::zeros(n, j);
    for r in 0..n {
        for c in 0..j {
            *xc.at_mut(r, c) = x.at(r, c) - xbar[c];
        }
    }
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();

    let gram = xc.gram();
    let (eig, vecs) = linalg::jacobi_eigen(&gram);
    let w_max = eig.first().copied().unwrap_or(0.0);
    if w_max <= 0.0 {
        return Err(CalibrateError::SingularDesign);
    }
    let w_min = eig.last().copied().unwrap_or(0.0);
    let ill = w_min <= 0.0 || w_max / w_min > cfg.cond_threshold;

    let (raw_slopes, lambda) = if ill {
        if cfg.ridge == RidgePolicy::Never {
            return Err(CalibrateError::SingularDesign);
        }
        ridge_gcv(&xc, &yc, &eig, &vecs)
    } else {
        match linalg::lstsq(&xc, &yc, linalg::DEFAULT_DROP_TOL) {
            Ok(fit) if fit.dropped.is_empty() => {
                (fit.coef.iter().map(|c| c.unwrap()).collect(), 0.0)
            }
            _ => {
                if cfg.ridge == RidgePolicy::Never {
                    return Err(CalibrateError::SingularDesign);
                }
                ridge_gcv(&xc, &yc, &eig, &vecs)
            }
        }
    };

    let intercept = ybar - raw_slopes.iter().zip(&xbar).map(|(b, m)| b * m).sum::<f64>();
    let mut scores = raw_slopes.clone();
    stats::standardize(&mut scores);
    Ok(Calibration { scores, raw_slopes, intercept, lambda })
}

/// Ridge solve with the penalty picked by generalized cross-validation
/// over a log grid scaled to the mean Gram eigenvalue.
fn ridge_gcv(xc: &Mat, yc: &[f64], eig: &[f64], vecs: &Mat) -> (Vec<f64>, f64) {
    let n = xc.rows();
    let j = xc.cols();
    let w: Vec<f64> = eig.iter().map(|&e| e.max(0.0)).collect();
    let xty = xc.t_mat_vec(yc);
    // u = Vᵀ Xᵀy in eigen coordinates.
    let mut u = alloc::vec![0.0; j];
    for (c, slot) in u.iter_mut().enumerate() {
        *slot = (0..j).map(|r| vecs.at(r, c) * xty[r]).sum();
    }
    let yty: f64 = yc.iter().map(|v| v * v).sum();
    let w_positive: Vec<f64> = w.iter().copied().filter(|&v| v > 0.0).collect();
    let lambda_ref = w_positive.iter().sum::<f64>() / w_positive.len() as f64;

    let mut best = (f64::INFINITY, lambda_ref);
    for step in 0..=40 {
        let exp = -8.0 + 0.25 * step as f64;
        let lambda = lambda_ref * libm::pow(10.0, exp);
        let mut rss = yty;
        let mut edf = 0.0;
        for (&wi, &ui) in w.iter().zip(&u) {
            let d = wi + lambda;
            rss -= ui * ui * (wi + 2.0 * lambda) / (d * d);
            edf += wi / d;
        }
        if n as f64 - edf < 1e-9 {
            continue;
        }
        let gcv = n as f64 * rss.max(0.0) / ((n as f64 - edf) * (n as f64 - edf));
        if gcv < best.0 {
            best = (gcv, lambda);
        }
    }
    let lambda = best.1;
    let mut b = alloc::vec![0.0; j];
    for r in 0..j {
        for c in 0..j {
            b[r] += vecs.at(r, c) * u[c] / (w[c] + lambda);
        }
    }
    (b, lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn trig_design(n: usize, j: usize) -> Mat {
        let mut x = Mat::zeros(n, j);
        for r in 0..n {
            for c in 0..j {
                *x.at_mut(r, c) = libm::sin((r * (c + 2)) as f64 * 0.7) * 0.01 + 0.02;
            }
        }
        x
    }

    #[test]
    fn recovers_planted_noiseless_model() {
        let n = 200;
        let beta = [3.0, -1.0, 0.5];
        let x = trig_design(n, 3);
        let y: Vec<f64> = (0..n)
            .map(|r| 1.0 + (0..3).map(|c| beta[c] * x.at(r, c)).sum::<f64>())
            .collect();
        let cal = calibrate(&x, &y, &CalibrateConfig::default()).unwrap();
        assert_eq!(cal.lambda, 0.0);
        for (b, want) in cal.raw_slopes.iter().zip(beta) {
            assert!((b - want).abs() < 1e-8, "slope {b} want {want}");
        }
        assert!((cal.intercept - 1.0).abs() < 1e-8);
        let mut std_beta = beta.to_vec();
        crate::stats::standardize(&mut std_beta);
        for (s, want) in cal.scores.iter().zip(std_beta) {
            assert!((s - want).abs() < 1e-6);
        }
    }

    #[test]
    fn scores_are_standardized() {
        let n = 150;
        let x = trig_design(n, 5);
        let y: Vec<f64> = (0..n).map(|r| libm::cos(r as f64)).collect();
        let cal = calibrate(&x, &y, &CalibrateConfig::default()).unwrap();
        assert!(crate::stats::mean(&cal.scores).abs() < 1e-10);
        assert!((crate::stats::std_pop(&cal.scores) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matches_hand_normal_equations() {
        // Two words, three observations; centered normal equations solved in
        // closed form with the 2x2 inverse.
        let x = Mat::from_rows(&[vec![0.4, 0.1], vec![0.2, 0.3], vec![0.0, 0.2]]);
        let y = [1.0, 0.4, -0.2];
        let xm = [0.2, 0.2];
        let ym = 0.4;
        let mut sxx = [[0.0; 2]; 2];
        let mut sxy = [0.0; 2];
        for r in 0..3 {
            let d = [x.at(r, 0) - xm[0], x.at(r, 1) - xm[1]];
            for i in 0..2 {
                sxy[i] += d[i] * (y[r] - ym);
                for k in 0..2 {
                    sxx[i][k] += d[i] * d[k];
                }
            }
        }
        let det = sxx[0][0] * sxx[1][1] - sxx[0][1] * sxx[1][0];
        let want = [
            (sxx[1][1] * sxy[0] - sxx[0][1] * sxy[1]) / det,
            (sxx[0][0] * sxy[1] - sxx[1][0] * sxy[0]) / det,
        ];
        let cal = calibrate(&x, &y, &CalibrateConfig::default()).unwrap();
        for (b, w) in cal.raw_slopes.iter().zip(want) {
            assert!((b - w).abs() < 1e-10);
        }
    }

    #[test]
    fn insufficient_data_without_ridge() {
        let x = Mat::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.1], vec![0.2, 0.2]]);
        let y = [0.0, 1.0, 0.5];
        let cfg = CalibrateConfig { ridge: RidgePolicy::Never, ..Default::default() };
        assert_eq!(
            calibrate(&x, &y, &cfg).unwrap_err(),
            CalibrateError::InsufficientData { have: 3, need: 4 }
        );
    }

    #[test]
    fn singular_design_without_ridge() {
        let n = 30;
        let mut x = Mat::zeros(n, 3);
        for r in 0..n {
            let a = libm::sin(r as f64);
            let b = libm::cos(r as f64);
            *x.at_mut(r, 0) = a;
            *x.at_mut(r, 1) = b;
            *x.at_mut(r, 2) = a + b;
        }
        let y: Vec<f64> = (0..n).map(|r| r as f64 * 0.01).collect();
        let cfg = CalibrateConfig { ridge: RidgePolicy::Never, ..Default::default() };
        assert_eq!(calibrate(&x, &y, &cfg).unwrap_err(), CalibrateError::SingularDesign);
    }

    #[test]
    fn all_zero_design_is_singular() {
        let x = Mat::zeros(10, 2);
        let y = [0.0; 10];
        assert_eq!(
            calibrate(&x, &y, &CalibrateConfig::default()).unwrap_err(),
            CalibrateError::SingularDesign
        );
    }

    #[test]
    fn ridge_handles_collinear_design() {
        let n = 60;
        let mut x = Mat::zeros(n, 3);
        for r in 0..n {
            let a = libm::sin(r as f64 * 1.3);
            let b = libm::cos(r as f64 * 0.4);
            *x.at_mut(r, 0) = a;
            *x.at_mut(r, 1) = b;
            *x.at_mut(r, 2) = a + b;
        }
        let y: Vec<f64> = (0..n).map(|r| libm::sin(r as f64 * 1.3) * 2.0 + 0.1).collect();
        let cal = calibrate(&x, &y, &CalibrateConfig::default()).unwrap();
        assert!(cal.lambda > 0.0);
        assert!(cal.scores.iter().all(|s| s.is_finite()));
        assert!(cal.raw_slopes.iter().all(|b| b.is_finite()));
    }
}
