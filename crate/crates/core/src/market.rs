//! Per-event market measures: standardized unexpected earnings, event-date
//! realignment by trading volume, market-model abnormal returns, share
//! turnover and its mean-adjusted cumulative form, and winsorization.
//!
//! Daily series are keyed by event time τ (0 = event day) after calendar
//! alignment; missing days are simply absent keys and every cumulative sum
//! is masked over the days present.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::stats::{self, quantile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarketError {
    NonpositivePrice,
    /// Zero or negative volume (or share count); the observation is missing.
    NonpositiveVolume,
    MissingVolume,
    InsufficientObservations { have: usize, need: usize },
    EmptyWindow,
}

impl core::fmt::Display for MarketError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            MarketError::NonpositivePrice => write!(f, "price must be positive"),
            MarketError::NonpositiveVolume => write!(f, "volume and shares must be positive"),
            MarketError::MissingVolume => write!(f, "volume missing in realignment window"),
            MarketError::InsufficientObservations { have, need } => {
                write!(f, "{have} estimation-window observations, need {need}")
            }
            MarketError::EmptyWindow => write!(f, "no observations inside the window"),
        }
    }
}

/// (eps − mfor) / price.
pub fn sue(eps: f64, mfor: f64, price: f64) -> Result<f64, MarketError> {
    if price <= 0.0 {
        return Err(MarketError::NonpositivePrice);
    }
    Ok((eps - mfor) / price)
}

/// Move the event to the highest-volume day among the trading day before,
/// of, and after the announcement. `days[1]` is the announced day. Ties go
/// to the announced day when it participates, otherwise to the earliest.
pub fn realign_event_date(days: [i32; 3], volumes: [Option<f64>; 3]) -> Result<i32, MarketError> {
    let mut vols = [0.0; 3];
    for (slot, v) in vols.iter_mut().zip(volumes) {
        *slot = v.ok_or(MarketError::MissingVolume)?;
    }
    let max = vols.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if vols[1] == max {
        return Ok(days[1]);
    }
    for (d, v) in days.iter().zip(vols) {
        if v == max {
            return Ok(*d);
        }
    }
    unreachable!()
}

/// Market-model coefficients estimated over τ ∈ [−l−k, −k−1].
#[derive(Clone, Copy, Debug)]
pub struct MarketModelFit {
    pub alpha: f64,
    pub beta: f64,
    pub n_obs: usize,
    pub degenerate: bool,
}

pub fn fit_market_model(
    returns: &BTreeMap<i32, f64>,
    market: &BTreeMap<i32, f64>,
    l: i32,
    k: i32,
    min_obs: usize,
) -> Result<MarketModelFit, MarketError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for tau in -(l + k)..=-(k + 1) {
        if let (Some(&r), Some(&m)) = (returns.get(&tau), market.get(&tau)) {
            xs.push(m);
            ys.push(r);
        }
    }
    if xs.len() < min_obs {
        return Err(MarketError::InsufficientObservations {
            have: xs.len(),
            need: min_obs,
        });
    }
    let fit = stats::ols2(&xs, &ys);
    Ok(MarketModelFit {
        alpha: fit.alpha,
        beta: fit.beta,
        n_obs: xs.len(),
        degenerate: fit.degenerate,
    })
}

/// Masked sum of r − α̂ − β̂·r_m over the window, skipping days where either
/// series is absent.
pub fn car(
    returns: &BTreeMap<i32, f64>,
    market: &BTreeMap<i32, f64>,
    fit: &MarketModelFit,
    window: (i32, i32),
) -> Result<f64, MarketError> {
    let mut sum = 0.0;
    let mut seen = false;
    for tau in window.0..=window.1 {
        if let (Some(&r), Some(&m)) = (returns.get(&tau), market.get(&tau)) {
            sum += r - fit.alpha - fit.beta * m;
            seen = true;
        }
    }
    if seen {
        Ok(sum)
    } else {
        Err(MarketError::EmptyWindow)
    }
}

/// log(V/C). Zero-volume days are missing observations, not −∞.
pub fn share_turnover(volume: f64, shares: f64) -> Result<f64, MarketError> {
    if volume <= 0.0 || shares <= 0.0 {
        return Err(MarketError::NonpositiveVolume);
    }
    Ok(libm::log(volume / shares))
}

/// Mean turnover over τ ∈ [−l−k, −k−1], for the mean-adjusted model.
pub fn fit_mean_turnover(
    turnover: &BTreeMap<i32, f64>,
    l: i32,
    k: i32,
    min_obs: usize,
) -> Result<(f64, usize), MarketError> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for tau in -(l + k)..=-(k + 1) {
        if let Some(&st) = turnover.get(&tau) {
            sum += st;
            n += 1;
        }
    }
    if n < min_obs {
        return Err(MarketError::InsufficientObservations { have: n, need: min_obs });
    }
    Ok((sum / n as f64, n))
}

/// Masked sum of ST − mean(ST over the estimation window) over the window.
pub fn cast(
    turnover: &BTreeMap<i32, f64>,
    mean_turnover: f64,
    window: (i32, i32),
) -> Result<f64, MarketError> {
    let mut sum = 0.0;
    let mut seen = false;
    for tau in window.0..=window.1 {
        if let Some(&st) = turnover.get(&tau) {
            sum += st - mean_turnover;
            seen = true;
        }
    }
    if seen {
        Ok(sum)
    } else {
        Err(MarketError::EmptyWindow)
    }
}

/// Empirical [lo, hi] quantile cutoffs over the finite entries
/// (interpolated order statistics). None when fewer than two are finite.
pub fn winsor_bounds(values: &[f64], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 2 {
        return None;
    }
    Some((quantile(&finite, lo), quantile(&finite, hi)))
}

/// Clamp finite values into the cutoffs; non-finite entries pass through.
pub fn clip(values: &[f64], bounds: (f64, f64)) -> Vec<f64> {
    values
        .iter()
        .map(|&v| if v.is_finite() { v.clamp(bounds.0, bounds.1) } else { v })
        .collect()
}

/// One-shot winsorization: cutoffs from this sample, then clamp. Callers
/// that reuse one expanding sample's cutoffs across series should compute
/// `winsor_bounds` once and `clip` each series instead.
pub fn winsorize(values: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    match winsor_bounds(values, lo, hi) {
        Some(bounds) => clip(values, bounds),
        None => values.to_vec(),
    }
}
