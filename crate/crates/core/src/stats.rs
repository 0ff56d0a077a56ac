//! Small numeric helpers shared across modules: moments, the single quantile
//! definition used everywhere, and the tail probabilities behind test
//! statistics.

use alloc::vec::Vec;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divide by n).
pub fn variance_pop(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

pub fn std_pop(xs: &[f64]) -> f64 {
    libm::sqrt(variance_pop(xs))
}

/// Centers to mean zero and scales to unit population standard deviation.
/// Returns the (mean, std) that were removed; a zero-variance input is only
/// centered and reported with std 0.
pub fn standardize(xs: &mut [f64]) -> (f64, f64) {
    let m = mean(xs);
    let s = std_pop(xs);
    if s > 0.0 {
        for x in xs.iter_mut() {
            *x = (*x - m) / s;
        }
    } else {
        for x in xs.iter_mut() {
            *x -= m;
        }
    }
    (m, s)
}

/// Quantile by linear interpolation of order statistics: with n points and
/// h = (n-1)p, the result is x_(⌊h⌋) + (h-⌊h⌋)(x_(⌊h⌋+1) - x_(⌊h⌋)).
/// This is the one quantile definition the whole crate uses (winsorization,
/// bucket cutoffs, reporting).
///
/// `sorted` must be ascending and non-empty; `p` in [0, 1].
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&p), "quantile level out of range");
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Convenience for unsorted data; NaNs are rejected by debug assertion.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    debug_assert!(xs.iter().all(|x| !x.is_nan()));
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_unstable_by(|a, b| a.partial_cmp(b).expect("NaN in quantile input"));
    quantile_sorted(&v, p)
}

/// Simple regression of y on (1, x).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ols2 {
    pub alpha: f64,
    pub beta: f64,
    /// True when x shows no variation; the fit degrades to the constant
    /// model alpha = mean(y), beta = 0.
    pub degenerate: bool,
}

/// Two-variable OLS with intercept. `degenerate` is flagged when every x is
/// identical (zero regressor variance), not on floating-point near-ties.
pub fn ols2(xs: &[f64], ys: &[f64]) -> Ols2 {
    assert_eq!(xs.len(), ys.len());
    assert!(!xs.is_empty(), "ols2 needs at least one observation");
    let constant_x = xs.iter().all(|&x| x == xs[0]);
    if constant_x {
        return Ols2 { alpha: mean(ys), beta: 0.0, degenerate: true };
    }
    let xbar = mean(xs);
    let ybar = mean(ys);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - xbar) * (x - xbar);
        sxy += (x - xbar) * (y - ybar);
    }
    let beta = sxy / sxx;
    Ols2 { alpha: ybar - beta * xbar, beta, degenerate: false }
}

/// P(Z > z) for standard normal Z.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / core::f64::consts::SQRT_2)
}

/// Two-sided p-value for a z- or large-sample t-statistic.
pub fn two_sided_p(t: f64) -> f64 {
    libm::erfc(t.abs() / core::f64::consts::SQRT_2)
}

/// P(X > w) for X chi-squared with one degree of freedom.
pub fn chi2_1_sf(w: f64) -> f64 {
    if w <= 0.0 {
        return 1.0;
    }
    libm::erfc(libm::sqrt(w / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates_order_statistics() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert!((quantile_sorted(&v, 0.01) - 1.99).abs() < 1e-12);
        assert!((quantile_sorted(&v, 0.99) - 99.01).abs() < 1e-12);
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 100.0);
        assert_eq!(quantile_sorted(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile_sorted(&[7.0], 0.3), 7.0);
    }

    #[test]
    fn quantile_handles_unsorted() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5), 2.0);
    }

    #[test]
    fn standardize_zero_mean_unit_std() {
        let mut v = [1.0, 2.0, 3.0, 10.0];
        standardize(&mut v);
        assert!(mean(&v).abs() < 1e-12);
        assert!((std_pop(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standardize_constant_input() {
        let mut v = [4.0, 4.0, 4.0];
        let (m, s) = standardize(&mut v);
        assert_eq!(m, 4.0);
        assert_eq!(s, 0.0);
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn tail_probabilities() {
        assert!((normal_sf(1.959964) - 0.025).abs() < 1e-6);
        assert!((chi2_1_sf(3.841459) - 0.05).abs() < 1e-6);
        assert!((two_sided_p(1.644854) - 0.10).abs() < 1e-6);
        assert_eq!(chi2_1_sf(0.0), 1.0);
    }

    #[test]
    fn ols2_recovers_line() {
        let xs: Vec<f64> = (0..20).map(|i| libm::sin(i as f64)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.1 + 0.5 * x).collect();
        let fit = ols2(&xs, &ys);
        assert!(!fit.degenerate);
        assert!((fit.alpha - 0.1).abs() < 1e-12);
        assert!((fit.beta - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ols2_constant_regressor() {
        let xs = [0.1, 0.1, 0.1];
        let ys = [1.0, 2.0, 6.0];
        let fit = ols2(&xs, &ys);
        assert!(fit.degenerate);
        assert_eq!(fit.beta, 0.0);
        assert!((fit.alpha - 3.0).abs() < 1e-12);
    }

    #[test]
    fn ols2_constant_response() {
        let xs = [1.0, 2.0, 3.0];
        let ys = [4.0, 4.0, 4.0];
        let fit = ols2(&xs, &ys);
        assert!(!fit.degenerate);
        assert!((fit.alpha - 4.0).abs() < 1e-12);
        assert!(fit.beta.abs() < 1e-12);
    }

    #[test]
    fn moments() {
        assert!((mean(&[1.0, 2.0, 3.0]) - 2.0).abs() < 1e-15);
        assert!((variance_pop(&[1.0, 2.0, 3.0]) - 2.0 / 3.0).abs() < 1e-15);
        assert!(mean(&[]).is_nan());
    }
}
