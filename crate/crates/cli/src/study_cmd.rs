//! Full study pipeline: corpus screens, yearly lexicons, tone and factor,
//! market measures, disclosure tones, event construction, and the report
//! tables and figures.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::Serialize;

use tonestudy_core::calendar::{align_relative, TradingCalendar};
use tonestudy_core::lexicon::{doc_tone, lm_tone};
use tonestudy_core::market::{fit_market_model, fit_mean_turnover};
use tonestudy_core::porter;

use crate::calibrate_cmd::{
    self, doc_day, load_returns, load_seed_lexicon, train_lexicon, SeedLexicon,
};
use crate::classify::{keyword_similarity, select_candidate};
use crate::config::StudyConfig;
use crate::csvio::{self, ControlsRow, EarningsRow, EventsMarketRow};
use crate::dates::{date_string, parse_date, parse_timestamp, quarter_of};
use crate::doc::{CleanDoc, CLASS_PRESS_RELEASE, CLASS_TRANSCRIPT};
use crate::events_cmd::{
    allocate_ratc, build_events, residualize, tone_rows, BuiltEvents, EVENT_RULES,
};
use crate::figures::{self, BucketScheme, FigureEvent};
use crate::ingest::run_ingest;
use crate::market_cmd::{event_market, load_prices, FirmSeries, MARKET_RULES};
use crate::tables;
use crate::tone_cmd::{
    compute_factor_series, compute_tones, load_caps, write_factor, write_tones, LexiconSet,
    ToneTable,
};
use crate::{CliError, Result};

pub struct StudyInputs {
    pub docs: PathBuf,
    pub returns: PathBuf,
    pub prices: PathBuf,
    pub earnings: PathBuf,
    pub caps: PathBuf,
    pub seed_words: PathBuf,
    pub calendar: Option<PathBuf>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StudySummary {
    pub n_raw_docs: usize,
    pub n_clean_docs: usize,
    pub lexicon_years: Vec<String>,
    pub n_tone_cells: usize,
    pub n_factor_days: usize,
    pub n_earnings: usize,
    pub n_market_events: usize,
    pub n_qualified_events: usize,
    pub n_scored_events: usize,
    pub tables: Vec<String>,
    pub figures: Vec<String>,
}

/// Per-event abnormal series for the figure curves: market-model return
/// residuals and mean-adjusted turnover by event time.
struct EventCurves {
    ar: BTreeMap<i32, f64>,
    ast: BTreeMap<i32, f64>,
}

fn stemmed_reference(cfg: &StudyConfig) -> BTreeSet<String> {
    cfg.reference_terms.iter().map(|t| porter::stem(&t.to_lowercase())).collect()
}

struct Disclosure<'a> {
    doc: &'a CleanDoc,
    day: i32,
    seconds: u32,
}

/// Earnings press releases and call transcripts per firm, in time order.
fn disclosure_index<'a>(
    docs: &'a [CleanDoc],
    cal: &TradingCalendar,
) -> Result<BTreeMap<(&'a str, &'a str), Vec<Disclosure<'a>>>> {
    let mut index: BTreeMap<(&str, &str), Vec<Disclosure<'a>>> = BTreeMap::new();
    for d in docs {
        if d.class != CLASS_PRESS_RELEASE && d.class != CLASS_TRANSCRIPT {
            continue;
        }
        let Some(day) = doc_day(d, Some(cal))? else { continue };
        let (_, seconds) = parse_timestamp(&d.timestamp)?;
        index
            .entry((d.firm_id.as_str(), d.class.as_str()))
            .or_default()
            .push(Disclosure { doc: d, day, seconds });
    }
    for list in index.values_mut() {
        list.sort_by(|a, b| {
            (a.day, a.seconds, &a.doc.doc_id).cmp(&(b.day, b.seconds, &b.doc.doc_id))
        });
    }
    Ok(index)
}

/// LM and calibrated tone of the best disclosure candidate in the event
/// window, or None when the firm-quarter has no candidate.
fn disclosure_tones(
    candidates: Option<&Vec<Disclosure<'_>>>,
    cal: &TradingCalendar,
    event_pos: usize,
    window: (i32, i32),
    reference: &BTreeSet<String>,
    seed: &SeedLexicon,
    lex: &LexiconSet,
) -> Option<(f64, Option<f64>)> {
    let mut in_window: Vec<&Disclosure<'_>> = Vec::new();
    for c in candidates? {
        let Some(pos) = cal.position(c.day) else { continue };
        let tau = pos as i64 - event_pos as i64;
        if tau >= window.0 as i64 && tau <= window.1 as i64 {
            in_window.push(c);
        }
    }
    if in_window.is_empty() {
        return None;
    }
    let scores: Vec<f64> = in_window
        .iter()
        .map(|c| keyword_similarity(&c.doc.tokens, reference))
        .collect();
    let (best, _tied) = select_candidate(&scores);
    let chosen = in_window[best];
    let lm = lm_tone(&chosen.doc.tokens, &seed.lm);
    let gwp = lex
        .for_day(chosen.day)
        .and_then(|scores| doc_tone(&chosen.doc.tokens, scores).ok());
    Some((lm, gwp))
}

fn curve_range(cfg: &StudyConfig) -> (i32, i32) {
    (cfg.windows.pre.0, cfg.windows.long.1)
}

/// Market stage: per-event SUE, realignment, CAR, CAST, plus the abnormal
/// return and turnover paths the figures average over.
#[allow(clippy::type_complexity)]
fn market_stage(
    firms: &BTreeMap<String, FirmSeries>,
    cal: &TradingCalendar,
    earnings: &[EarningsRow],
    clean_docs: &[CleanDoc],
    seed: &SeedLexicon,
    lex: &LexiconSet,
    cfg: &StudyConfig,
) -> Result<(
    Vec<EventsMarketRow>,
    Vec<ControlsRow>,
    BTreeMap<String, EventCurves>,
    BTreeMap<&'static str, usize>,
)> {
    let reference = stemmed_reference(cfg);
    let disclosures = disclosure_index(clean_docs, cal)?;
    let range = curve_range(cfg);

    let mut market_rows = Vec::new();
    let mut controls = Vec::new();
    let mut curves = BTreeMap::new();
    let mut attrition: BTreeMap<&'static str, usize> = BTreeMap::new();
    let bump = |attr: &mut BTreeMap<&'static str, usize>, rule: &'static str| {
        *attr.entry(rule).or_insert(0) += 1;
    };

    for e in earnings {
        let announce_day = parse_date(&e.announce_date)?;
        let Some(series) = firms.get(&e.firm) else {
            bump(&mut attrition, "no_price_data");
            continue;
        };
        let w = match event_market(series, cal, announce_day, e, cfg) {
            Ok(w) => w,
            Err(rule) => {
                bump(&mut attrition, rule);
                continue;
            }
        };
        if !(e.book > 0.0) || !(e.mcap > 0.0) || !e.roa.is_finite() {
            bump(&mut attrition, "bad_fundamentals");
            continue;
        }

        let event_id = format!("{}:{}", e.firm, e.announce_date);
        market_rows.push(EventsMarketRow {
            event_id: event_id.clone(),
            firm: e.firm.clone(),
            announce_date: e.announce_date.clone(),
            realigned_date: date_string(w.realigned_day),
            sue: w.sue,
            car_pre: w.car[0],
            car_event: w.car[1],
            car_short: w.car[2],
            car_long: w.car[3],
            cast_pre: w.cast[0],
            cast_event: w.cast[1],
            cast_short: w.cast[2],
            cast_long: w.cast[3],
        });

        let ret = align_relative(&series.ret, cal, w.realigned_day)
            .expect("realigned day is a trading day");
        let market = align_relative(&series.market, cal, w.realigned_day)
            .expect("realigned day is a trading day");
        let turnover = align_relative(&series.turnover, cal, w.realigned_day)
            .expect("realigned day is a trading day");
        let fit = fit_market_model(&ret, &market, cfg.l, cfg.k, cfg.min_obs)
            .expect("event_market already fit this window");
        let mut ar = BTreeMap::new();
        for tau in range.0..=range.1 {
            if let (Some(&r), Some(&m)) = (ret.get(&tau), market.get(&tau)) {
                ar.insert(tau, r - fit.alpha - fit.beta * m);
            }
        }
        let mut ast = BTreeMap::new();
        if let Ok((mean_st, _)) = fit_mean_turnover(&turnover, cfg.l, cfg.k, cfg.min_obs) {
            for tau in range.0..=range.1 {
                if let Some(&st) = turnover.get(&tau) {
                    ast.insert(tau, st - mean_st);
                }
            }
        }
        curves.insert(event_id.clone(), EventCurves { ar, ast });

        let event_pos = cal.position(w.realigned_day).expect("trading day");
        let epr = disclosure_tones(
            disclosures.get(&(e.firm.as_str(), CLASS_PRESS_RELEASE)),
            cal,
            event_pos,
            cfg.windows.event,
            &reference,
            seed,
            lex,
        );
        let ec = disclosure_tones(
            disclosures.get(&(e.firm.as_str(), CLASS_TRANSCRIPT)),
            cal,
            event_pos,
            cfg.windows.event,
            &reference,
            seed,
            lex,
        );
        controls.push(ControlsRow {
            event_id,
            firm_id: e.firm.clone(),
            event_date: date_string(w.realigned_day),
            sue: w.sue,
            eprlm: epr.map(|(lm, _)| lm),
            eprgwp: epr.and_then(|(_, gwp)| gwp),
            eclm: ec.map(|(lm, _)| lm),
            ecgwp: ec.and_then(|(_, gwp)| gwp),
            car_pre: w.car[0],
            car_event: w.car[1],
            car_short: w.car[2],
            car_long: w.car[3],
            cast_pre: w.cast[0],
            cast_event: w.cast[1],
            roa: e.roa,
            log_bm: (e.book / e.mcap).ln(),
            log_m: e.mcap.ln(),
        });
    }
    Ok((market_rows, controls, curves, attrition))
}

/// Last trading day of each calendar year, for every year whose end falls
/// strictly inside the calendar; these are the lexicon training cutoffs.
fn year_ends(cal: &TradingCalendar) -> Vec<(u32, i32)> {
    let mut ends: BTreeMap<u32, i32> = BTreeMap::new();
    for &day in cal.days() {
        let year = quarter_of(day) / 4;
        let slot = ends.entry(year).or_insert(day);
        if day > *slot {
            *slot = day;
        }
    }
    let last_day = *cal.days().last().expect("nonempty calendar");
    ends.into_iter().filter(|(_, end)| *end < last_day).collect()
}

fn figure_events(
    built: &BuiltEvents,
    curves: &BTreeMap<String, EventCurves>,
    measure: &str,
    need_rcat: bool,
    range: (i32, i32),
) -> Vec<FigureEvent> {
    let mut out = Vec::new();
    for ev in &built.events {
        let rcat = match (need_rcat, ev.rcat) {
            (true, Some(r)) => r,
            (true, None) => continue,
            (false, _) => 0.0,
        };
        let series: BTreeMap<i32, f64> = match measure {
            "CAT" => ev
                .atone
                .range(range.0..=range.1)
                .map(|(&tau, &v)| (tau, v))
                .collect(),
            "CAR" => match curves.get(&ev.event_id) {
                Some(c) => c.ar.clone(),
                None => continue,
            },
            "CAST" => match curves.get(&ev.event_id) {
                Some(c) if !c.ast.is_empty() => c.ast.clone(),
                _ => continue,
            },
            other => unreachable!("unknown measure {other}"),
        };
        if series.is_empty() {
            continue;
        }
        out.push(FigureEvent {
            event_id: ev.event_id.clone(),
            sue: ev.controls.sue,
            rcat,
            series,
        });
    }
    out
}

fn write_attrition(
    path: &Path,
    input: usize,
    retained: usize,
    rules: &[&'static str],
    counts: &BTreeMap<&'static str, usize>,
) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        rule: &'a str,
        count: usize,
    }
    let mut rows = vec![
        Row { rule: "input", count: input },
        Row { rule: "retained", count: retained },
    ];
    for rule in rules {
        rows.push(Row { rule, count: counts.get(rule).copied().unwrap_or(0) });
    }
    csvio::write_csv(path, &rows)
}

pub fn run_study(
    inputs: &StudyInputs,
    table_ids: &[String],
    figure_ids: &[String],
    out_dir: &Path,
    cfg: &StudyConfig,
) -> Result<StudySummary> {
    for id in table_ids {
        if !matches!(id.as_str(), "T3" | "T4" | "T5" | "T6") {
            return Err(CliError::validation(format!("unknown table id {id}")));
        }
    }
    for id in figure_ids {
        if !matches!(id.as_str(), "F4" | "F5" | "F6") {
            return Err(CliError::validation(format!("unknown figure id {id}")));
        }
    }
    std::fs::create_dir_all(out_dir)?;
    let lex_dir = out_dir.join("lexicons");
    std::fs::create_dir_all(&lex_dir)?;

    let cal = match &inputs.calendar {
        Some(path) => crate::calendar_io::read_calendar(path)?,
        None => {
            let (_, dates) = load_prices(&inputs.prices)?;
            crate::calendar_io::calendar_from_dates(dates)?
        }
    };

    let ingest_stats = run_ingest(
        &inputs.docs,
        &out_dir.join("clean.jsonl"),
        Some(&out_dir.join("ingest_stats.csv")),
        cfg,
    )?;
    let clean_docs = crate::doc::read_clean_jsonl(&out_dir.join("clean.jsonl"))?;

    let returns = load_returns(&inputs.returns)?;
    let seed = load_seed_lexicon(&inputs.seed_words)?;
    let mut lexicon_years = Vec::new();
    for (year, end) in year_ends(&cal) {
        let trained =
            train_lexicon(&clean_docs, &returns, &seed, end, Some(&cal), cfg.min_days)?;
        calibrate_cmd::write_lexicon(&lex_dir.join(format!("lexicon_{year}.csv")), &trained)?;
        lexicon_years.push(year.to_string());
    }
    let lex = LexiconSet::load_dir(&lex_dir)?;

    let table: ToneTable = compute_tones(&clean_docs, &lex, &cal)?;
    let factor = if cfg.equal_weight {
        compute_factor_series(&table, &BTreeMap::new(), true)?
    } else {
        compute_factor_series(&table, &load_caps(&inputs.caps)?, false)?
    };
    write_tones(&out_dir.join("tones.csv"), &table)?;
    write_factor(&out_dir.join("factor.csv"), &factor)?;

    let (firms, _) = load_prices(&inputs.prices)?;
    let earnings: Vec<EarningsRow> = csvio::read_csv(&inputs.earnings)?;
    let (market_rows, controls, curves, market_attrition) =
        market_stage(&firms, &cal, &earnings, &clean_docs, &seed, &lex, cfg)?;
    csvio::write_csv(&out_dir.join("events_market.csv"), &market_rows)?;
    csvio::write_csv(&out_dir.join("controls.csv"), &controls)?;
    let mut market_rules: Vec<&'static str> = vec!["no_price_data"];
    market_rules.extend(MARKET_RULES.iter().filter(|r| **r != "no_price_data"));
    market_rules.push("bad_fundamentals");
    write_attrition(
        &out_dir.join("market_attrition.csv"),
        earnings.len(),
        controls.len(),
        &market_rules,
        &market_attrition,
    )?;

    let mut built = build_events(&table.daily, &factor, &controls, &cal, cfg)?;
    residualize(&mut built, cfg)?;
    allocate_ratc(&mut built, &table.docs, &factor, &cal, cfg)?;
    csvio::write_csv(&out_dir.join("events_tone.csv"), &tone_rows(&built))?;
    csvio::write_csv(&out_dir.join("ratc.csv"), &built.ratc)?;
    write_attrition(
        &out_dir.join("events_attrition.csv"),
        controls.len(),
        built.events.len(),
        &EVENT_RULES,
        &built.attrition,
    )?;

    for id in table_ids {
        let result = tables::run_table(id, &built.events, cfg)?;
        csvio::write_csv(&out_dir.join(format!("{id}.csv")), &tables::csv_rows(&result))?;
        std::fs::write(out_dir.join(format!("{id}.txt")), tables::render_text(&result, cfg))?;
        std::fs::write(
            out_dir.join(format!("{id}.json")),
            serde_json::to_string_pretty(&result)?,
        )?;
    }

    let range = curve_range(cfg);
    for id in figure_ids {
        let (title, measure, scheme, need_rcat) = match id.as_str() {
            "F4" => ("Average CAT around the event date", "CAT", BucketScheme::SueQuintiles, false),
            "F5" => (
                "Average CAR around the event date",
                "CAR",
                BucketScheme::RcatTercilesBySueSign,
                true,
            ),
            "F6" => (
                "Average CAST around the event date",
                "CAST",
                BucketScheme::AbsRcatTercilesBySueSign,
                true,
            ),
            _ => unreachable!("ids validated above"),
        };
        let events = figure_events(&built, &curves, measure, need_rcat, range);
        let result =
            figures::run_figure(id, title, measure, &events, scheme, range, cfg.windows.event)?;
        csvio::write_csv(&out_dir.join(format!("{id}.csv")), &figures::csv_rows(&result))?;
        std::fs::write(out_dir.join(format!("{id}.svg")), figures::render_svg(&result))?;
    }

    let summary = StudySummary {
        n_raw_docs: ingest_stats.input,
        n_clean_docs: clean_docs.len(),
        lexicon_years,
        n_tone_cells: table.daily.len(),
        n_factor_days: factor.len(),
        n_earnings: earnings.len(),
        n_market_events: market_rows.len(),
        n_qualified_events: built.events.len(),
        n_scored_events: built.events.iter().filter(|e| e.rcat.is_some()).count(),
        tables: table_ids.to_vec(),
        figures: figure_ids.to_vec(),
    };
    std::fs::write(out_dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_market, SynthConfig};

    fn study_inputs(dir: &Path) -> StudyInputs {
        StudyInputs {
            docs: dir.join("docs.jsonl"),
            returns: dir.join("returns.csv"),
            prices: dir.join("prices.csv"),
            earnings: dir.join("earnings.csv"),
            caps: dir.join("caps.csv"),
            seed_words: dir.join("seed.csv"),
            calendar: Some(dir.join("calendar.txt")),
        }
    }

    /// A compact market that still spans enough quarters to score events:
    /// the first year only feeds the first lexicon, so roughly three years
    /// of announcements survive qualification.
    fn small_market(dir: &Path) -> crate::synth::GroundTruth {
        let cfg = SynthConfig {
            seed: 11,
            n_firms: 8,
            n_days: 1000,
            vocab_size: 20,
            n_fillers: 40,
            doc_tokens: 210,
            return_noise: 0.0,
            event_every: 63,
            sue_scale: 0.01,
            tone_bump: 2,
            return_bump: 0.02,
            reversal: 0.012,
        };
        gen_market(&cfg, dir).unwrap()
    }

    fn fast_cfg() -> StudyConfig {
        StudyConfig { min_days: 60, start_quarters: 5, ..StudyConfig::default() }
    }

    #[test]
    fn end_to_end_produces_reports() {
        let data = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        small_market(data.path());
        let cfg = fast_cfg();
        let tables = vec!["T3".to_string(), "T4".to_string()];
        let figures = vec!["F4".to_string(), "F5".to_string()];
        let summary =
            run_study(&study_inputs(data.path()), &tables, &figures, out.path(), &cfg).unwrap();

        assert!(summary.n_clean_docs > 0);
        assert!(summary.n_qualified_events > 0);
        assert!(summary.n_scored_events > 0);
        assert!(summary.n_scored_events < summary.n_qualified_events);
        for name in [
            "clean.jsonl",
            "ingest_stats.csv",
            "tones.csv",
            "factor.csv",
            "events_market.csv",
            "controls.csv",
            "market_attrition.csv",
            "events_tone.csv",
            "ratc.csv",
            "events_attrition.csv",
            "T3.csv",
            "T3.txt",
            "T3.json",
            "T4.csv",
            "T4.txt",
            "T4.json",
            "F4.csv",
            "F4.svg",
            "F5.csv",
            "F5.svg",
            "summary.json",
        ] {
            assert!(out.path().join(name).exists(), "{name} missing");
        }
        let t4 = std::fs::read_to_string(out.path().join("T4.txt")).unwrap();
        assert!(t4.contains("RCAT(-1,1)"));
        assert!(t4.contains("CAR(-1,1)"));
    }

    #[test]
    fn rerun_is_byte_identical() {
        let data = tempfile::tempdir().unwrap();
        let out1 = tempfile::tempdir().unwrap();
        let out2 = tempfile::tempdir().unwrap();
        small_market(data.path());
        let cfg = fast_cfg();
        let tables = vec!["T4".to_string()];
        let figures = vec!["F4".to_string()];
        run_study(&study_inputs(data.path()), &tables, &figures, out1.path(), &cfg).unwrap();
        run_study(&study_inputs(data.path()), &tables, &figures, out2.path(), &cfg).unwrap();
        for name in ["tones.csv", "factor.csv", "controls.csv", "events_tone.csv", "T4.csv", "F4.svg"]
        {
            let a = std::fs::read(out1.path().join(name)).unwrap();
            let b = std::fs::read(out2.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between reruns");
        }
    }

    #[test]
    fn attrition_accounts_for_every_earnings_row() {
        let data = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        small_market(data.path());
        run_study(&study_inputs(data.path()), &[], &[], out.path(), &fast_cfg()).unwrap();

        let text = std::fs::read_to_string(out.path().join("market_attrition.csv")).unwrap();
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for line in text.lines().skip(1) {
            let (rule, n) = line.split_once(',').unwrap();
            counts.insert(rule.to_string(), n.parse().unwrap());
        }
        let rejected: usize = counts
            .iter()
            .filter(|(k, _)| k.as_str() != "input" && k.as_str() != "retained")
            .map(|(_, &v)| v)
            .sum();
        assert_eq!(counts["input"], counts["retained"] + rejected);

        let events_text =
            std::fs::read_to_string(out.path().join("events_attrition.csv")).unwrap();
        let mut ev: BTreeMap<String, usize> = BTreeMap::new();
        for line in events_text.lines().skip(1) {
            let (rule, n) = line.split_once(',').unwrap();
            ev.insert(rule.to_string(), n.parse().unwrap());
        }
        let ev_rejected: usize = EVENT_RULES.iter().map(|r| ev[*r]).sum();
        assert_eq!(ev["input"], ev["retained"] + ev_rejected);
        assert_eq!(ev["input"], counts["retained"]);
    }

    #[test]
    fn unknown_ids_are_validation_errors() {
        let data = tempfile::tempdir().unwrap();
        let out = tempfile::tempdir().unwrap();
        let err = run_study(
            &study_inputs(data.path()),
            &["T9".to_string()],
            &[],
            out.path(),
            &StudyConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run_study(
            &study_inputs(data.path()),
            &[],
            &["F1".to_string()],
            out.path(),
            &StudyConfig::default(),
        )
        .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn year_ends_exclude_the_running_year() {
        let days: Vec<i32> = {
            let start = parse_date("2000-12-20").unwrap();
            (0..30).map(|i| start + i).collect()
        };
        let cal = TradingCalendar::new(days).unwrap();
        let ends = year_ends(&cal);
        assert_eq!(ends.len(), 1);
        assert_eq!(ends[0].0, 2000);
        assert_eq!(date_string(ends[0].1), "2000-12-31");
    }
}
