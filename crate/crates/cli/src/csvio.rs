//! Typed CSV records for every file the pipeline reads or writes.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::validation(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize().enumerate() {
        let row: T =
            row.map_err(|e| CliError::validation(format!("{}:{}: {e}", path.display(), i + 2)))?;
        out.push(row);
    }
    Ok(out)
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| CliError::validation(format!("cannot create {}: {e}", path.display())))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Daily firm tone; `doc_count` is the number of scoreable articles behind it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TonesRow {
    pub firm_id: String,
    pub date: String,
    pub tone: f64,
    pub doc_count: usize,
}

/// Per-article tone, kept for source-group allocation downstream.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DocTonesRow {
    pub doc_id: String,
    pub firm_id: String,
    pub date: String,
    pub tone: f64,
    pub newswire: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorRow {
    pub date: String,
    pub factor: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PriceRow {
    pub firm: String,
    pub date: String,
    pub price: f64,
    #[serde(rename = "return")]
    pub ret: f64,
    pub volume: f64,
    pub shares: f64,
    pub market_return: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EarningsRow {
    pub firm: String,
    pub announce_date: String,
    pub eps: f64,
    pub median_forecast: f64,
    pub qend_price: f64,
    pub roa: f64,
    pub book: f64,
    pub mcap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapsRow {
    pub firm_id: String,
    pub date: String,
    pub cap: f64,
}

/// Seed lexicon entry; polarity is `positive` or `negative`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeedRow {
    pub word: String,
    pub polarity: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LexiconRow {
    pub word: String,
    pub score: f64,
}

/// Sidecar metadata stored next to each trained lexicon CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LexiconMeta {
    pub train_start: String,
    pub train_end: String,
    pub min_days: usize,
    pub lambda: f64,
    pub n_obs: usize,
    pub vocab_size: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EventsMarketRow {
    pub event_id: String,
    pub firm: String,
    pub announce_date: String,
    pub realigned_date: String,
    pub sue: f64,
    pub car_pre: f64,
    pub car_event: f64,
    pub car_short: f64,
    pub car_long: f64,
    pub cast_pre: Option<f64>,
    pub cast_event: Option<f64>,
    pub cast_short: Option<f64>,
    pub cast_long: Option<f64>,
}

/// Event-level controls assembled from market measures and the tone of the
/// firm's own disclosures.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControlsRow {
    pub event_id: String,
    pub firm_id: String,
    pub event_date: String,
    pub sue: f64,
    pub eprlm: Option<f64>,
    pub eprgwp: Option<f64>,
    pub eclm: Option<f64>,
    pub ecgwp: Option<f64>,
    pub car_pre: f64,
    pub car_event: f64,
    pub car_short: f64,
    pub car_long: f64,
    pub cast_pre: Option<f64>,
    pub cast_event: Option<f64>,
    pub roa: f64,
    pub log_bm: f64,
    pub log_m: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EventsToneRow {
    pub event_id: String,
    pub firm_id: String,
    pub event_date: String,
    pub quarter: String,
    pub n_est_obs: usize,
    pub cat_pre: f64,
    pub cat_event: f64,
    pub cat_short: f64,
    pub cat_long: f64,
    pub rcat: Option<f64>,
    pub nwrcat: Option<f64>,
    pub nprcat: Option<f64>,
    /// 1 when the same firm's previous event sits closer than the full
    /// window layout allows.
    pub truncated: u8,
}

/// Per-article share of the residual tone.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatcRow {
    pub event_id: String,
    pub doc_id: String,
    pub tau: i32,
    pub ratc: f64,
}
