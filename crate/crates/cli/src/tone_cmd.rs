//! Daily firm tone and the market-wide tone factor.

use std::collections::BTreeMap;
use std::path::Path;

use tonestudy_core::calendar::TradingCalendar;
use tonestudy_core::lexicon::{daily_tone, doc_tone};
use tonestudy_core::tone::{compute_factor, FactorError, Weighting};

use crate::calibrate_cmd::doc_day;
use crate::csvio::{self, CapsRow, DocTonesRow, FactorRow, LexiconRow, TonesRow};
use crate::dates::{date_string, parse_date};
use crate::doc::CleanDoc;
use crate::{CliError, Result};

/// Yearly lexicons keyed by the last day of their training range. A document
/// is scored by the newest lexicon trained strictly before its own day.
pub struct LexiconSet {
    entries: Vec<(i32, BTreeMap<String, f64>)>,
}

impl LexiconSet {
    pub fn new(mut entries: Vec<(i32, BTreeMap<String, f64>)>) -> Self {
        entries.sort_by_key(|(end, _)| *end);
        LexiconSet { entries }
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", dir.display())))?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        paths.sort();
        for path in paths {
            let sidecar = path.with_extension("json");
            let meta: csvio::LexiconMeta =
                serde_json::from_str(&std::fs::read_to_string(&sidecar).map_err(|e| {
                    CliError::validation(format!("missing sidecar {}: {e}", sidecar.display()))
                })?)?;
            let rows: Vec<LexiconRow> = csvio::read_csv(&path)?;
            let scores: BTreeMap<String, f64> =
                rows.into_iter().map(|r| (r.word, r.score)).collect();
            entries.push((parse_date(&meta.train_end)?, scores));
        }
        if entries.is_empty() {
            return Err(CliError::validation(format!(
                "no lexicon files in {}",
                dir.display()
            )));
        }
        Ok(LexiconSet::new(entries))
    }

    /// Newest lexicon with train_end strictly before `day`; none for days
    /// inside or before the first training range.
    pub fn for_day(&self, day: i32) -> Option<&BTreeMap<String, f64>> {
        self.entries
            .iter()
            .rev()
            .find(|(end, _)| *end < day)
            .map(|(_, scores)| scores)
    }
}

#[derive(Clone, Debug)]
pub struct DocToneRec {
    pub doc_id: String,
    pub firm_id: String,
    /// Trading day after weekend roll-forward.
    pub day: i32,
    pub tone: f64,
    pub newswire: bool,
}

/// Per-(firm, day) tone with the scoreable articles behind it.
pub struct ToneTable {
    pub daily: BTreeMap<(String, i32), (f64, usize)>,
    pub docs: Vec<DocToneRec>,
}

/// Scores every document the lexicon set can reach and aggregates by firm
/// and trading day. Documents with no lexicon (too early), no roll-forward
/// target, or no scored word are silently tone-missing.
pub fn compute_tones(docs: &[CleanDoc], lex: &LexiconSet, cal: &TradingCalendar) -> Result<ToneTable> {
    let mut by_cell: BTreeMap<(String, i32), Vec<&CleanDoc>> = BTreeMap::new();
    let mut recs: Vec<DocToneRec> = Vec::new();
    for d in docs {
        let Some(day) = doc_day(d, Some(cal))? else { continue };
        let Some(scores) = lex.for_day(day) else { continue };
        let Ok(tone) = doc_tone(&d.tokens, scores) else { continue };
        recs.push(DocToneRec {
            doc_id: d.doc_id.clone(),
            firm_id: d.firm_id.clone(),
            day,
            tone,
            newswire: d.is_newswire(),
        });
        by_cell.entry((d.firm_id.clone(), day)).or_default().push(d);
    }

    let mut daily = BTreeMap::new();
    for ((firm, day), cell) in by_cell {
        let scores = lex.for_day(day).expect("cell exists only under a lexicon");
        let token_refs: Vec<&[String]> = cell.iter().map(|d| d.tokens.as_slice()).collect();
        let tone = daily_tone(&token_refs, scores)
            .map_err(|e| CliError::estimation(format!("daily tone for {firm}: {e}")))?;
        daily.insert((firm, day), (tone, cell.len()));
    }
    Ok(ToneTable { daily, docs: recs })
}

pub fn load_caps(path: &Path) -> Result<BTreeMap<(String, i32), f64>> {
    let rows: Vec<CapsRow> = csvio::read_csv(path)?;
    let mut out = BTreeMap::new();
    for r in rows {
        out.insert((r.firm_id, parse_date(&r.date)?), r.cap);
    }
    Ok(out)
}

/// Cap- or equal-weighted factor per day over the firms with tone that day.
pub fn compute_factor_series(
    table: &ToneTable,
    caps: &BTreeMap<(String, i32), f64>,
    equal_weight: bool,
) -> Result<BTreeMap<i32, f64>> {
    let mut by_day: BTreeMap<i32, BTreeMap<&str, f64>> = BTreeMap::new();
    for ((firm, day), (tone, _)) in &table.daily {
        by_day.entry(*day).or_default().insert(firm.as_str(), *tone);
    }
    let weighting = if equal_weight { Weighting::Equal } else { Weighting::MarketCap };
    let mut out = BTreeMap::new();
    for (day, tones) in by_day {
        let mut firm_ids: BTreeMap<u32, &str> = BTreeMap::new();
        let mut day_tones: BTreeMap<u32, f64> = BTreeMap::new();
        let mut day_caps: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, (firm, tone)) in tones.iter().enumerate() {
            let id = i as u32;
            firm_ids.insert(id, firm);
            day_tones.insert(id, *tone);
            if let Some(&cap) = caps.get(&(firm.to_string(), day)) {
                day_caps.insert(id, cap);
            }
        }
        let f = compute_factor(&day_tones, &day_caps, weighting).map_err(|e| match e {
            FactorError::NoFirms => CliError::estimation(format!("no firm tones on {}", date_string(day))),
            FactorError::BadWeight { firm } => CliError::validation(format!(
                "missing or nonpositive market cap for {} on {}",
                firm_ids.get(&firm).copied().unwrap_or("?"),
                date_string(day)
            )),
        })?;
        out.insert(day, f.value);
    }
    Ok(out)
}

pub fn write_tones(path: &Path, table: &ToneTable) -> Result<()> {
    let rows: Vec<TonesRow> = table
        .daily
        .iter()
        .map(|((firm, day), (tone, count))| TonesRow {
            firm_id: firm.clone(),
            date: date_string(*day),
            tone: *tone,
            doc_count: *count,
        })
        .collect();
    csvio::write_csv(path, &rows)
}

pub fn write_factor(path: &Path, series: &BTreeMap<i32, f64>) -> Result<()> {
    let rows: Vec<FactorRow> = series
        .iter()
        .map(|(day, f)| FactorRow { date: date_string(*day), factor: *f })
        .collect();
    csvio::write_csv(path, &rows)
}

pub fn write_doc_tones(path: &Path, docs: &[DocToneRec]) -> Result<()> {
    let rows: Vec<DocTonesRow> = docs
        .iter()
        .map(|d| DocTonesRow {
            doc_id: d.doc_id.clone(),
            firm_id: d.firm_id.clone(),
            date: date_string(d.day),
            tone: d.tone,
            newswire: d.newswire,
        })
        .collect();
    csvio::write_csv(path, &rows)
}

pub fn load_doc_tones(path: &Path) -> Result<Vec<DocToneRec>> {
    let rows: Vec<DocTonesRow> = csvio::read_csv(path)?;
    rows.into_iter()
        .map(|r| {
            Ok(DocToneRec {
                doc_id: r.doc_id,
                firm_id: r.firm_id,
                day: parse_date(&r.date)?,
                tone: r.tone,
                newswire: r.newswire,
            })
        })
        .collect()
}

pub fn load_tones(path: &Path) -> Result<BTreeMap<(String, i32), (f64, usize)>> {
    let rows: Vec<TonesRow> = csvio::read_csv(path)?;
    let mut out = BTreeMap::new();
    for r in rows {
        out.insert((r.firm_id, parse_date(&r.date)?), (r.tone, r.doc_count));
    }
    Ok(out)
}

pub fn load_factor(path: &Path) -> Result<BTreeMap<i32, f64>> {
    let rows: Vec<FactorRow> = csvio::read_csv(path)?;
    let mut out = BTreeMap::new();
    for r in rows {
        out.insert(parse_date(&r.date)?, r.factor);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn run_tone(
    corpus: &Path,
    lexicon_dir: &Path,
    caps_path: &Path,
    cal: &TradingCalendar,
    out: &Path,
    factor_out: &Path,
    doc_out: Option<&Path>,
    equal_weight: bool,
) -> Result<(usize, usize)> {
    let docs = crate::doc::read_clean_jsonl(corpus)?;
    let lex = LexiconSet::load_dir(lexicon_dir)?;
    let table = compute_tones(&docs, &lex, cal)?;
    if let Some(path) = doc_out {
        write_doc_tones(path, &table.docs)?;
    }
    let factor = if equal_weight {
        compute_factor_series(&table, &BTreeMap::new(), true)?
    } else {
        let caps = load_caps(caps_path)?;
        compute_factor_series(&table, &caps, false)?
    };
    write_tones(out, &table)?;
    write_factor(factor_out, &factor)?;
    Ok((table.daily.len(), factor.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clean(firm: &str, date: &str, tokens: &[&str], source: &str) -> CleanDoc {
        CleanDoc {
            doc_id: format!("{firm}:{date}:{}", tokens.len()),
            firm_id: firm.into(),
            timestamp: format!("{date}T10:00:00"),
            source_type: source.into(),
            relevance: 95.0,
            tags: vec![],
            major_firm_count: 1,
            raw_text: tokens.join(" "),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            class: "news".into(),
            rule_trace: vec![],
        }
    }

    fn lexicon(end: &str) -> (i32, BTreeMap<String, f64>) {
        let scores = BTreeMap::from([("gain".to_string(), 1.0), ("loss".to_string(), -1.0)]);
        (parse_date(end).unwrap(), scores)
    }

    fn weekday_calendar(from: &str, n: usize) -> TradingCalendar {
        let start = parse_date(from).unwrap();
        let mut days = Vec::new();
        let mut d = start;
        while days.len() < n {
            // 2006-01-02 is a Monday; skip Saturdays and Sundays.
            let weekday = (d - parse_date("2006-01-02").unwrap()).rem_euclid(7);
            if weekday < 5 {
                days.push(d);
            }
            d += 1;
        }
        TradingCalendar::new(days).unwrap()
    }

    #[test]
    fn lexicon_pick_is_strictly_backward() {
        let set = LexiconSet::new(vec![lexicon("2005-12-30"), lexicon("2006-12-29")]);
        let d_2006 = parse_date("2006-06-01").unwrap();
        assert!(set.for_day(d_2006).is_some());
        assert!(set.for_day(parse_date("2005-12-30").unwrap()).is_none());
        // The 2006 lexicon serves 2007 days; the 2005 one serves 2006 days.
        assert!(set.for_day(parse_date("2006-12-29").unwrap()).is_some());
    }

    #[test]
    fn daily_tone_is_mean_of_doc_tones() {
        let cal = weekday_calendar("2006-01-02", 30);
        let set = LexiconSet::new(vec![lexicon("2005-12-30")]);
        let docs = vec![
            clean("f1", "2006-01-03", &["gain", "gain"], "newswire"),
            clean("f1", "2006-01-03", &["loss", "firm"], "newspaper"),
        ];
        let table = compute_tones(&docs, &set, &cal).unwrap();
        let day = parse_date("2006-01-03").unwrap();
        let (tone, count) = table.daily[&("f1".to_string(), day)];
        // Doc tones: 2/2 = 1.0 and -1/2 = -0.5; day tone is their mean.
        assert!((tone - 0.25).abs() < 1e-12);
        assert_eq!(count, 2);
        assert_eq!(table.docs.len(), 2);
        assert!(table.docs[0].newswire);
        assert!(!table.docs[1].newswire);
    }

    #[test]
    fn weekend_docs_roll_forward() {
        let cal = weekday_calendar("2006-01-02", 30);
        let set = LexiconSet::new(vec![lexicon("2005-12-30")]);
        // 2006-01-07 is a Saturday; the article lands on Monday the 9th.
        let docs = vec![clean("f1", "2006-01-07", &["gain"], "newswire")];
        let table = compute_tones(&docs, &set, &cal).unwrap();
        let monday = parse_date("2006-01-09").unwrap();
        assert!(table.daily.contains_key(&("f1".to_string(), monday)));
    }

    #[test]
    fn unscoreable_docs_are_tone_missing() {
        let cal = weekday_calendar("2006-01-02", 30);
        let set = LexiconSet::new(vec![lexicon("2005-12-30")]);
        let docs = vec![clean("f1", "2006-01-03", &["firm", "report"], "newswire")];
        let table = compute_tones(&docs, &set, &cal).unwrap();
        assert!(table.daily.is_empty());
        assert!(table.docs.is_empty());
    }

    #[test]
    fn factor_weights_by_caps() {
        let cal = weekday_calendar("2006-01-02", 30);
        let set = LexiconSet::new(vec![lexicon("2005-12-30")]);
        let day = "2006-01-03";
        let docs = vec![
            clean("a", day, &["gain", "gain", "gain", "gain", "gain"], "newswire"),
            clean("b", day, &["loss", "loss", "loss", "loss", "loss"], "newswire"),
        ];
        let table = compute_tones(&docs, &set, &cal).unwrap();
        let d = parse_date(day).unwrap();
        let caps = BTreeMap::from([
            (("a".to_string(), d), 3.0),
            (("b".to_string(), d), 1.0),
        ]);
        let f = compute_factor_series(&table, &caps, false).unwrap();
        // tones are +1 and -1; weights 0.75/0.25.
        assert!((f[&d] - 0.5).abs() < 1e-12);
        let eq = compute_factor_series(&table, &BTreeMap::new(), true).unwrap();
        assert!(eq[&d].abs() < 1e-12);
    }

    #[test]
    fn missing_cap_is_a_named_validation_error() {
        let cal = weekday_calendar("2006-01-02", 30);
        let set = LexiconSet::new(vec![lexicon("2005-12-30")]);
        let docs = vec![clean("a", "2006-01-03", &["gain"], "newswire")];
        let table = compute_tones(&docs, &set, &cal).unwrap();
        let err = compute_factor_series(&table, &BTreeMap::new(), false).unwrap_err();
        match err {
            CliError::Validation(msg) => assert!(msg.contains('a'), "{msg}"),
            other => panic!("wrong error class: {other:?}"),
        }
    }
}
