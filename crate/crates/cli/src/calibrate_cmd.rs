//! Lexicon calibration: regress same-day market-adjusted returns on word
//! frequencies and keep the standardized slopes as word scores.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use tonestudy_core::calendar::TradingCalendar;
use tonestudy_core::calibrate::{calibrate, CalibrateConfig, CalibrateError};
use tonestudy_core::lexicon::{filter_vocab, StaticLexicon};
use tonestudy_core::linalg::Mat;
use tonestudy_core::porter;

use crate::csvio::{self, LexiconMeta, LexiconRow};
use crate::dates::{date_string, parse_date, parse_timestamp};
use crate::doc::CleanDoc;
use crate::{CliError, Result};

#[derive(Clone, Debug, Deserialize)]
pub struct ReturnsRow {
    pub firm_id: String,
    pub date: String,
    /// Market-adjusted return in percent.
    pub ret: f64,
}

/// Seed lexicon: the positive/negative word lists, stemmed. Words whose stems
/// collide across polarities are dropped from the static lexicon but stay
/// calibration candidates.
pub struct SeedLexicon {
    pub lm: StaticLexicon,
    pub candidates: BTreeSet<String>,
    pub conflicts: Vec<String>,
}

pub fn load_seed_lexicon(path: &Path) -> Result<SeedLexicon> {
    let rows: Vec<csvio::SeedRow> = csvio::read_csv(path)?;
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    for r in rows {
        let stem = porter::stem(&r.word.to_lowercase());
        match r.polarity.as_str() {
            "positive" => {
                pos.insert(stem);
            }
            "negative" => {
                neg.insert(stem);
            }
            other => {
                return Err(CliError::validation(format!(
                    "{}: unknown polarity {other:?} for {:?}",
                    path.display(),
                    r.word
                )))
            }
        }
    }
    let candidates: BTreeSet<String> = pos.union(&neg).cloned().collect();
    let (lm, conflicts) = StaticLexicon::new(pos, neg);
    Ok(SeedLexicon { lm, candidates, conflicts })
}

pub fn load_returns(path: &Path) -> Result<BTreeMap<(String, i32), f64>> {
    let rows: Vec<ReturnsRow> = csvio::read_csv(path)?;
    let mut out = BTreeMap::new();
    for r in rows {
        let day = parse_date(&r.date)?;
        out.insert((r.firm_id, day), r.ret);
    }
    Ok(out)
}

/// The trading day a document lands on: its calendar day rolled forward to
/// the next session when it falls on a non-trading day.
pub fn doc_day(doc: &CleanDoc, cal: Option<&TradingCalendar>) -> Result<Option<i32>> {
    let (day, _) = parse_timestamp(&doc.timestamp)?;
    match cal {
        None => Ok(Some(day)),
        Some(c) => Ok(c.roll_forward(day).and_then(|p| c.day_at(p))),
    }
}

pub struct TrainedLexicon {
    pub scores: Vec<(String, f64)>,
    pub meta: LexiconMeta,
}

/// Trains one lexicon from newswire articles dated on or before `train_end`.
pub fn train_lexicon(
    docs: &[CleanDoc],
    returns: &BTreeMap<(String, i32), f64>,
    seed: &SeedLexicon,
    train_end: i32,
    cal: Option<&TradingCalendar>,
    min_days: usize,
) -> Result<TrainedLexicon> {
    let mut train: Vec<(&CleanDoc, i32)> = Vec::new();
    for d in docs {
        if !d.is_newswire() {
            continue;
        }
        if let Some(day) = doc_day(d, cal)? {
            if day <= train_end {
                train.push((d, day));
            }
        }
    }
    if train.is_empty() {
        return Err(CliError::estimation("no newswire articles in the training range"));
    }

    let mut word_days: BTreeMap<String, BTreeSet<i32>> = BTreeMap::new();
    for (d, day) in &train {
        for t in &d.tokens {
            if seed.candidates.contains(t) {
                word_days.entry(t.clone()).or_default().insert(*day);
            }
        }
    }
    let day_counts: BTreeMap<String, usize> =
        word_days.into_iter().map(|(w, days)| (w, days.len())).collect();
    let vocab = filter_vocab(&day_counts, min_days);
    if vocab.is_empty() {
        return Err(CliError::estimation(format!(
            "no candidate word appears on {min_days} or more distinct days"
        )));
    }
    let index: BTreeMap<&str, usize> =
        vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();

    // Average per-document relative frequencies over each (firm, day) cell.
    let mut cells: BTreeMap<(String, i32), Vec<&CleanDoc>> = BTreeMap::new();
    for (d, day) in &train {
        cells.entry((d.firm_id.clone(), *day)).or_default().push(d);
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    for ((firm, day), cell_docs) in &cells {
        let Some(&ret) = returns.get(&(firm.clone(), *day)) else { continue };
        let mut freq = vec![0.0; vocab.len()];
        let d_count = cell_docs.len() as f64;
        for doc in cell_docs {
            let n = doc.tokens.len() as f64;
            for t in &doc.tokens {
                if let Some(&j) = index.get(t.as_str()) {
                    freq[j] += 1.0 / n / d_count;
                }
            }
        }
        rows.push(freq);
        y.push(ret);
    }
    if rows.is_empty() {
        return Err(CliError::estimation("no (firm, day) cell has both articles and a return"));
    }

    let x = Mat::from_rows(&rows);
    let fit = calibrate(&x, &y, &CalibrateConfig::default()).map_err(|e| match e {
        CalibrateError::InsufficientData { have, need } => CliError::estimation(format!(
            "calibration needs {need} firm-day observations, found {have}"
        )),
        CalibrateError::SingularDesign => {
            CliError::estimation("calibration design is singular".to_string())
        }
    })?;

    let train_start = train.iter().map(|(_, day)| *day).min().unwrap();
    let scores: Vec<(String, f64)> =
        vocab.into_iter().zip(fit.scores.iter().copied()).collect();
    let meta = LexiconMeta {
        train_start: date_string(train_start),
        train_end: date_string(train_end),
        min_days,
        lambda: fit.lambda,
        n_obs: y.len(),
        vocab_size: scores.len(),
    };
    Ok(TrainedLexicon { scores, meta })
}

pub fn write_lexicon(out: &Path, trained: &TrainedLexicon) -> Result<()> {
    let rows: Vec<LexiconRow> = trained
        .scores
        .iter()
        .map(|(w, s)| LexiconRow { word: w.clone(), score: *s })
        .collect();
    csvio::write_csv(out, &rows)?;
    let sidecar = out.with_extension("json");
    std::fs::write(&sidecar, serde_json::to_string_pretty(&trained.meta)?)?;
    Ok(())
}

pub fn run_calibrate(
    corpus: &Path,
    returns_path: &Path,
    seed_path: &Path,
    train_end: &str,
    out: &Path,
    cal: Option<&TradingCalendar>,
    min_days: usize,
) -> Result<LexiconMeta> {
    let docs = crate::doc::read_clean_jsonl(corpus)?;
    let returns = load_returns(returns_path)?;
    let seed = load_seed_lexicon(seed_path)?;
    let end_day = parse_date(train_end)?;
    let trained = train_lexicon(&docs, &returns, &seed, end_day, cal, min_days)?;
    write_lexicon(out, &trained)?;
    Ok(trained.meta)
}
