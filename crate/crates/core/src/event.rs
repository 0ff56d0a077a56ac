//! Event-level tone algebra: the per-event normal-tone model, abnormal tone,
//! cumulative windows, the panel residual, and the per-article allocation.
//!
//! All series here are keyed by event time τ (trading-day offsets from the
//! announcement). A day without articles has no tone entry: it is missing,
//! never zero, and never enters any sum.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::stats;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EventError {
    InsufficientObservations { have: usize, need: usize },
    /// No tone day inside the requested window.
    EmptyWindow,
}

impl core::fmt::Display for EventError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EventError::InsufficientObservations { have, need } => {
                write!(f, "estimation window has {have} tone days, need {need}")
            }
            EventError::EmptyWindow => write!(f, "no tone day inside window"),
        }
    }
}

/// Per-event tone factor model fitted over the estimation window.
#[derive(Clone, Copy, Debug)]
pub struct NormalToneFit {
    pub alpha: f64,
    pub beta: f64,
    pub n_obs: usize,
    /// The factor showed no variation over the estimation days; the fit fell
    /// back to the constant model (beta 0).
    pub degenerate: bool,
    pub residual_variance: f64,
}

impl NormalToneFit {
    pub fn predict(&self, factor: f64) -> f64 {
        self.alpha + self.beta * factor
    }
}

/// Fits tone on (1, factor) by OLS over the days of [-L-K, -K-1] where both
/// tone and factor are present.
pub fn fit_normal_tone(
    tone: &BTreeMap<i32, f64>,
    factor: &BTreeMap<i32, f64>,
    l: i32,
    k: i32,
    min_obs: usize,
) -> Result<NormalToneFit, EventError> {
    assert!(l > 0 && k >= 0);
    let lo = -l - k;
    let hi = -k - 1;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&tau, &t) in tone.range(lo..=hi) {
        if let Some(&f) = factor.get(&tau) {
            xs.push(f);
            ys.push(t);
        }
    }
    let n = xs.len();
    if n < min_obs {
        return Err(EventError::InsufficientObservations { have: n, need: min_obs });
    }
    let fit = stats::ols2(&xs, &ys);
    let mut rss = 0.0;
    for (&x, &y) in xs.iter().zip(&ys) {
        let e = y - (fit.alpha + fit.beta * x);
        rss += e * e;
    }
    let dof = if fit.degenerate { n.saturating_sub(1) } else { n.saturating_sub(2) };
    let residual_variance = if dof > 0 { rss / dof as f64 } else { 0.0 };
    Ok(NormalToneFit {
        alpha: fit.alpha,
        beta: fit.beta,
        n_obs: n,
        degenerate: fit.degenerate,
        residual_variance,
    })
}

/// Abnormal tone for one day: tone minus the fitted normal tone.
pub fn atone(tone: f64, fit: &NormalToneFit, factor: f64) -> f64 {
    tone - fit.predict(factor)
}

/// Abnormal tone for every τ in [from, to] where both tone and factor exist.
pub fn atone_series(
    tone: &BTreeMap<i32, f64>,
    factor: &BTreeMap<i32, f64>,
    fit: &NormalToneFit,
    from: i32,
    to: i32,
) -> BTreeMap<i32, f64> {
    let mut out = BTreeMap::new();
    for (&tau, &t) in tone.range(from..=to) {
        if let Some(&f) = factor.get(&tau) {
            out.insert(tau, atone(t, fit, f));
        }
    }
    out
}

/// Sum of a τ-keyed series over a window, skipping missing days; an entirely
/// missing window is an error, not zero.
pub fn window_sum(series: &BTreeMap<i32, f64>, window: (i32, i32)) -> Result<f64, EventError> {
    assert!(window.0 <= window.1, "window bounds reversed");
    let mut any = false;
    let mut sum = 0.0;
    for (_, &v) in series.range(window.0..=window.1) {
        any = true;
        sum += v;
    }
    if any {
        Ok(sum)
    } else {
        Err(EventError::EmptyWindow)
    }
}

/// Panel residual: cumulative abnormal tone net of the fitted panel value
/// (controls plus fixed effects).
pub fn rcat(cat: f64, panel_fitted: f64) -> f64 {
    cat - panel_fitted
}

/// One scored article inside an event window.
#[derive(Clone, Debug)]
pub struct DocTone {
    pub tau: i32,
    pub tone: f64,
    pub newswire: bool,
}

/// Per-article residual abnormal tone over a window.
///
/// Article d on day τ gets ATONE_d / D_τ minus its share θ̂'x / ΣD of the
/// fitted panel value, where D_τ counts that day's articles and ΣD the
/// window's. Summing over all articles recovers `rcat` exactly, provided the
/// day-level tone underlying CAT is the mean of these same articles' tones.
pub fn ratc_allocations(
    docs: &[DocTone],
    fit: &NormalToneFit,
    factor: &BTreeMap<i32, f64>,
    panel_fitted: f64,
    window: (i32, i32),
) -> Vec<f64> {
    let mut day_counts: BTreeMap<i32, usize> = BTreeMap::new();
    for d in docs {
        assert!(
            d.tau >= window.0 && d.tau <= window.1,
            "article outside allocation window"
        );
        *day_counts.entry(d.tau).or_insert(0) += 1;
    }
    let total: usize = day_counts.values().sum();
    docs.iter()
        .map(|d| {
            let f = *factor
                .get(&d.tau)
                .expect("factor missing on an article day");
            let a = atone(d.tone, fit, f);
            a / day_counts[&d.tau] as f64 - panel_fitted / total as f64
        })
        .collect()
}

/// Sums article allocations by source group: (newswire, newspaper/web).
/// A group without articles is 0; the two sides always add up to the total.
pub fn split_ratc(docs: &[DocTone], ratc: &[f64]) -> (f64, f64) {
    assert_eq!(docs.len(), ratc.len());
    let mut nw = 0.0;
    let mut np = 0.0;
    for (d, &r) in docs.iter().zip(ratc) {
        if d.newswire {
            nw += r;
        } else {
            np += r;
        }
    }
    (nw, np)
}
