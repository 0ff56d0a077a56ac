//! Synthetic data generators: a full market (corpus, prices, earnings) with
//! planted word scores and event effects, plus lighter event-level and
//! panel-level generators for property suites.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use tonestudy_core::calendar::TradingCalendar;
use tonestudy_core::event::NormalToneFit;
use tonestudy_core::porter::stem;
use tonestudy_core::stats::standardize;

use crate::csvio::{self, CapsRow, ControlsRow, EarningsRow, PriceRow, SeedRow};
use crate::dates::{date_string, parse_date};
use crate::doc::RawDoc;
use crate::events_cmd::EventRecord;
use crate::tone_cmd::DocToneRec;
use crate::Result;

fn randn(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on two uniforms; the second draw is discarded.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Lowercase words the stemmer maps to themselves, so planted vocabulary
/// survives the text pipeline unchanged.
fn stable_words(prefix: &str, need: usize, taken: &mut BTreeSet<String>) -> Vec<String> {
    let mut out = Vec::new();
    let mut i = 0usize;
    while out.len() < need {
        assert!(i < 26 * 26, "vocabulary space exhausted for {prefix}");
        let a = (b'a' + (i / 26) as u8) as char;
        let b = (b'a' + (i % 26) as u8) as char;
        i += 1;
        let w = format!("{prefix}{a}{b}");
        if stem(&w) == w && taken.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_firms: usize,
    pub n_days: usize,
    pub vocab_size: usize,
    pub n_fillers: usize,
    pub doc_tokens: usize,
    /// Standard deviation of the return noise; 0 gives the exact linear map
    /// from word frequencies to returns.
    pub return_noise: f64,
    /// Trading days between a firm's consecutive announcements.
    pub event_every: usize,
    pub sue_scale: f64,
    /// Extra occurrences of sign-aligned sentiment words on event days.
    pub tone_bump: usize,
    /// Total abnormal return planted over the event window, signed by event.
    pub return_bump: f64,
    /// Total reversal planted over the long window, opposite sign.
    pub reversal: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            n_firms: 50,
            n_days: 750,
            vocab_size: 50,
            n_fillers: 60,
            doc_tokens: 210,
            return_noise: 0.0,
            event_every: 63,
            sue_scale: 0.01,
            tone_bump: 2,
            return_bump: 0.02,
            reversal: 0.012,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantedWord {
    pub word: String,
    pub zeta: f64,
    /// The zeta vector standardized to mean 0 and unit population spread,
    /// the scale calibrated lexicon scores come out in.
    pub zeta_standardized: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlantedEvent {
    pub event_id: String,
    pub firm: String,
    pub announce_date: String,
    pub sign: i8,
    pub sue: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundTruth {
    pub config: SynthConfig,
    pub words: Vec<PlantedWord>,
    pub events: Vec<PlantedEvent>,
    pub n_calibration_cells: usize,
}

struct DocPlan {
    counts: Vec<usize>,
    source: &'static str,
    tags: Vec<String>,
    extra_words: Vec<&'static str>,
}

fn weekday_calendar(start: &str, n_days: usize) -> Vec<i32> {
    let mut days = Vec::with_capacity(n_days);
    let mut d = parse_date(start).expect("valid start date");
    while days.len() < n_days {
        // num_days_from_ce: day 1 is 0001-01-01, a Monday.
        let weekday = (d - 1).rem_euclid(7);
        if weekday < 5 {
            days.push(d);
        }
        d += 1;
    }
    days
}

/// Generates the full synthetic market and writes every pipeline input file
/// into `out_dir`. Returns the ground truth, which is also written as JSON.
pub fn gen_market(cfg: &SynthConfig, out_dir: &Path) -> Result<GroundTruth> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let days = weekday_calendar("2000-01-03", cfg.n_days);
    let cal = TradingCalendar::new(days.clone()).expect("sorted unique days");

    let mut taken = BTreeSet::new();
    let words = stable_words("sen", cfg.vocab_size, &mut taken);
    let fillers = stable_words("fil", cfg.n_fillers, &mut taken);
    let zeta: Vec<f64> = (0..cfg.vocab_size)
        .map(|j| {
            let mag = 0.2 + 0.8 * (j + 1) as f64 / cfg.vocab_size as f64;
            if j % 2 == 0 {
                mag
            } else {
                -mag
            }
        })
        .collect();

    let firms: Vec<String> = (1..=cfg.n_firms).map(|i| format!("F{i:03}")).collect();
    let shares: Vec<f64> = (0..cfg.n_firms).map(|i| 1.0e6 * (1.0 + i as f64)).collect();

    // Announcement positions per firm, staggered so events rarely share days.
    let mut event_pos: Vec<Vec<usize>> = Vec::new();
    for i in 0..cfg.n_firms {
        let mut pos = Vec::new();
        let mut p = 40 + (i * 7) % 40;
        while p + 21 < cfg.n_days {
            pos.push(p);
            p += cfg.event_every;
        }
        event_pos.push(pos);
    }
    let event_sign: Vec<Vec<i8>> = event_pos
        .iter()
        .map(|pos| pos.iter().map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
        .collect();

    // tau of day t relative to the firm's nearest announcement, if within
    // the planted effect range.
    let rel = |i: usize, t: usize| -> Option<(i32, i8)> {
        for (e, &p) in event_pos[i].iter().enumerate() {
            let tau = t as i64 - p as i64;
            if (-1..=20).contains(&tau) {
                return Some((tau as i32, event_sign[i][e]));
            }
        }
        None
    };

    let mut docs_out: Vec<RawDoc> = Vec::new();
    let mut f_cal: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; cfg.n_days]; cfg.n_firms];
    let mut ret_text: Vec<Vec<f64>> = vec![vec![0.0; cfg.n_days]; cfg.n_firms];

    for i in 0..cfg.n_firms {
        for t in 0..cfg.n_days {
            let mut plans: Vec<DocPlan> = Vec::new();
            let tilt = rel(i, t).filter(|(tau, _)| *tau <= 1);

            let mut counts: Vec<usize> =
                (0..cfg.vocab_size).map(|_| rng.gen_range(0..=3usize)).collect();
            if let Some((_, sign)) = tilt {
                for (j, c) in counts.iter_mut().enumerate() {
                    if (zeta[j] > 0.0) == (sign > 0) {
                        *c += cfg.tone_bump;
                    }
                }
            }
            let roll: f64 = rng.gen();
            let source = if roll < 0.6 {
                "newswire"
            } else if roll < 0.85 {
                "newspaper"
            } else {
                "web"
            };
            plans.push(DocPlan { counts, source, tags: vec![], extra_words: vec![] });

            if let Some((0, sign)) = rel(i, t) {
                for kind in 0..2 {
                    let mut counts: Vec<usize> =
                        (0..cfg.vocab_size).map(|_| rng.gen_range(0..=3usize)).collect();
                    for (j, c) in counts.iter_mut().enumerate() {
                        if (zeta[j] > 0.0) == (sign > 0) {
                            *c += cfg.tone_bump + 1;
                        }
                    }
                    if kind == 0 {
                        plans.push(DocPlan {
                            counts,
                            source: "newswire",
                            tags: vec!["company earnings".into()],
                            extra_words: vec!["contact", "earnings"],
                        });
                    } else {
                        plans.push(DocPlan {
                            counts,
                            source: "web",
                            tags: vec!["transcript".into()],
                            extra_words: vec!["earnings", "quarter"],
                        });
                    }
                }
            }

            let mut cal_freqs: Vec<Vec<f64>> = Vec::new();
            let mut all_freqs: Vec<Vec<f64>> = Vec::new();
            for (k, plan) in plans.iter().enumerate() {
                let mut tokens: Vec<&str> = Vec::with_capacity(cfg.doc_tokens + 2);
                for (j, &c) in plan.counts.iter().enumerate() {
                    for _ in 0..c {
                        tokens.push(&words[j]);
                    }
                }
                let fill_start = rng.gen_range(0..fillers.len());
                let mut fi = fill_start;
                while tokens.len() < cfg.doc_tokens {
                    tokens.push(&fillers[fi % fillers.len()]);
                    fi += 1;
                }
                for w in &plan.extra_words {
                    tokens.push(w);
                }
                let n = tokens.len() as f64;
                let freqs: Vec<f64> =
                    plan.counts.iter().map(|&c| c as f64 / n).collect();
                if plan.source == "newswire" {
                    cal_freqs.push(freqs.clone());
                }
                all_freqs.push(freqs);

                let mut text = String::with_capacity(tokens.len() * 6);
                for (wi, w) in tokens.iter().enumerate() {
                    if wi > 0 {
                        text.push(' ');
                    }
                    text.push_str(w);
                }
                docs_out.push(RawDoc {
                    doc_id: format!("d{:03}_{t:04}_{k}", i + 1),
                    firm_id: firms[i].clone(),
                    timestamp: format!("{}T10:0{}:00", date_string(days[t]), k),
                    source_type: plan.source.into(),
                    relevance: 90.0 + (rng.gen::<f64>() * 10.0).floor(),
                    tags: plan.tags.clone(),
                    major_firm_count: 1,
                    raw_text: text,
                });
            }

            let mean = |rows: &[Vec<f64>]| -> Vec<f64> {
                let mut m = vec![0.0; cfg.vocab_size];
                for r in rows {
                    for (j, v) in r.iter().enumerate() {
                        m[j] += v;
                    }
                }
                for v in &mut m {
                    *v /= rows.len() as f64;
                }
                m
            };
            let basis = if cal_freqs.is_empty() { mean(&all_freqs) } else { mean(&cal_freqs) };
            let mut r: f64 = basis.iter().zip(&zeta).map(|(f, z)| f * z).sum();
            if cfg.return_noise > 0.0 {
                r += cfg.return_noise * randn(&mut rng);
            }
            ret_text[i][t] = r;
            if !cal_freqs.is_empty() {
                f_cal[i][t] = Some(mean(&cal_freqs));
            }
        }
    }

    let n_cells = f_cal.iter().flatten().filter(|c| c.is_some()).count();
    let mut zeta_standardized = zeta.clone();
    standardize(&mut zeta_standardized);

    // Prices carry the planted event overlay on top of the text return.
    let mut prices = vec![vec![0.0; cfg.n_days]; cfg.n_firms];
    let mut rets = vec![vec![0.0; cfg.n_days]; cfg.n_firms];
    let mut volumes = vec![vec![0.0; cfg.n_days]; cfg.n_firms];
    for i in 0..cfg.n_firms {
        let mut p = 20.0 + i as f64;
        for t in 0..cfg.n_days {
            let overlay = match rel(i, t) {
                Some((tau, sign)) if (-1..=1).contains(&tau) => {
                    cfg.return_bump / 3.0 * sign as f64
                }
                Some((tau, sign)) if (2..=20).contains(&tau) => {
                    -cfg.reversal / 19.0 * sign as f64
                }
                _ => 0.0,
            };
            let r = ret_text[i][t] + overlay;
            p *= 1.0 + r;
            prices[i][t] = p;
            rets[i][t] = r;
            let vol_mult = match rel(i, t) {
                Some((tau, _)) if (-1..=1).contains(&tau) => 1.6,
                _ => 1.0,
            };
            volumes[i][t] =
                shares[i] * 0.008 * vol_mult * (0.9 + 0.2 * rng.gen::<f64>());
        }
    }

    let mut market_ret = vec![0.0; cfg.n_days];
    for t in 0..cfg.n_days {
        let mut wsum = 0.0;
        let mut rsum = 0.0;
        for i in 0..cfg.n_firms {
            let cap = prices[i][t] * shares[i];
            wsum += cap;
            rsum += cap * rets[i][t];
        }
        market_ret[t] = rsum / wsum;
    }

    let mut price_rows = Vec::new();
    let mut caps_rows = Vec::new();
    let mut return_rows = Vec::new();
    #[derive(Serialize)]
    struct ReturnRow<'a> {
        firm_id: &'a str,
        date: String,
        ret: f64,
    }
    for i in 0..cfg.n_firms {
        for t in 0..cfg.n_days {
            let date = date_string(days[t]);
            price_rows.push(PriceRow {
                firm: firms[i].clone(),
                date: date.clone(),
                price: prices[i][t],
                ret: rets[i][t],
                volume: volumes[i][t],
                shares: shares[i],
                market_return: market_ret[t],
            });
            caps_rows.push(CapsRow {
                firm_id: firms[i].clone(),
                date: date.clone(),
                cap: prices[i][t] * shares[i],
            });
            return_rows.push(ReturnRow {
                firm_id: &firms[i],
                date,
                ret: ret_text[i][t],
            });
        }
    }

    let mut earnings_rows = Vec::new();
    let mut planted_events = Vec::new();
    for i in 0..cfg.n_firms {
        for (e, &p) in event_pos[i].iter().enumerate() {
            let sign = event_sign[i][e];
            let sue = cfg.sue_scale * sign as f64 * (0.5 + rng.gen::<f64>());
            let qend_price = prices[i][p];
            let mcap = prices[i][p] * shares[i];
            let date = date_string(days[p]);
            earnings_rows.push(EarningsRow {
                firm: firms[i].clone(),
                announce_date: date.clone(),
                eps: 1.0 + sue * qend_price,
                median_forecast: 1.0,
                qend_price,
                roa: 0.04 * randn(&mut rng),
                book: mcap * (-0.5 + 0.6 * rng.gen::<f64>()).exp(),
                mcap,
            });
            planted_events.push(PlantedEvent {
                event_id: format!("{}:{date}", firms[i]),
                firm: firms[i].clone(),
                announce_date: date,
                sign,
                sue,
            });
        }
    }

    let seed_rows: Vec<SeedRow> = words
        .iter()
        .zip(&zeta)
        .map(|(w, &z)| SeedRow {
            word: w.clone(),
            polarity: if z > 0.0 { "positive".into() } else { "negative".into() },
        })
        .collect();

    std::fs::create_dir_all(out_dir)?;
    let mut jsonl = String::new();
    for d in &docs_out {
        let _ = writeln!(jsonl, "{}", serde_json::to_string(d)?);
    }
    std::fs::write(out_dir.join("docs.jsonl"), jsonl)?;
    csvio::write_csv(&out_dir.join("prices.csv"), &price_rows)?;
    csvio::write_csv(&out_dir.join("caps.csv"), &caps_rows)?;
    csvio::write_csv(&out_dir.join("returns.csv"), &return_rows)?;
    csvio::write_csv(&out_dir.join("earnings.csv"), &earnings_rows)?;
    csvio::write_csv(&out_dir.join("seed.csv"), &seed_rows)?;
    crate::calendar_io::write_calendar(&out_dir.join("calendar.txt"), &cal)?;

    let truth = GroundTruth {
        config: cfg.clone(),
        words: words
            .into_iter()
            .zip(zeta)
            .zip(zeta_standardized)
            .map(|((word, zeta), zeta_standardized)| PlantedWord {
                word,
                zeta,
                zeta_standardized,
            })
            .collect(),
        events: planted_events,
        n_calibration_cells: n_cells,
    };
    std::fs::write(
        out_dir.join("ground_truth.json"),
        serde_json::to_string_pretty(&truth)?,
    )?;
    Ok(truth)
}

/// In-memory inputs for the event-algebra property suite: tone and factor
/// series with gaps, fully populated controls, and per-day articles whose
/// mean tone reproduces the daily tone exactly.
pub struct AlgebraData {
    pub calendar: TradingCalendar,
    pub tones: BTreeMap<(String, i32), (f64, usize)>,
    pub factor: BTreeMap<i32, f64>,
    pub controls: Vec<ControlsRow>,
    pub docs: Vec<DocToneRec>,
}

pub fn gen_event_algebra(seed: u64, n_firms: usize, events_per_firm: usize) -> AlgebraData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spacing = 91;
    let n_days = spacing * (events_per_firm + 1) + 60;
    let base = parse_date("2000-01-03").unwrap();
    let days: Vec<i32> = (0..n_days as i32).map(|d| base + d).collect();
    let calendar = TradingCalendar::new(days.clone()).unwrap();

    let mut factor = BTreeMap::new();
    for &d in &days {
        factor.insert(d, 0.01 * randn(&mut rng));
    }

    let firms: Vec<String> = (0..n_firms).map(|i| format!("f{i:03}")).collect();
    let event_pos: Vec<Vec<usize>> = (0..n_firms)
        .map(|i| (1..=events_per_firm).map(|e| spacing * e + (i * 3) % 15).collect())
        .collect();

    let mut tones = BTreeMap::new();
    let mut docs = Vec::new();
    for (i, firm) in firms.iter().enumerate() {
        let alpha = 0.03 + 0.002 * i as f64;
        let beta = 0.4 + 0.03 * (i % 10) as f64;
        for (t, &d) in days.iter().enumerate() {
            let near_event = event_pos[i].iter().any(|&p| {
                let tau = t as i64 - p as i64;
                (-1..=1).contains(&tau)
            });
            if !near_event && rng.gen::<f64>() < 0.08 {
                continue;
            }
            let tone = alpha + beta * factor[&d] + 0.03 * randn(&mut rng);
            let n_docs = 1 + rng.gen_range(0..3usize);
            let delta = 0.02 * rng.gen::<f64>();
            let offsets: Vec<f64> = match n_docs {
                1 => vec![0.0],
                2 => vec![delta, -delta],
                _ => vec![delta, 0.0, -delta],
            };
            for (k, off) in offsets.iter().enumerate() {
                docs.push(DocToneRec {
                    doc_id: format!("a{i:03}_{t:04}_{k}"),
                    firm_id: firm.clone(),
                    day: d,
                    tone: tone + off,
                    newswire: rng.gen::<bool>(),
                });
            }
            tones.insert((firm.clone(), d), (tone, n_docs));
        }
    }

    let mut controls = Vec::new();
    for (i, firm) in firms.iter().enumerate() {
        for &p in &event_pos[i] {
            let date = date_string(days[p]);
            controls.push(ControlsRow {
                event_id: format!("{firm}:{date}"),
                firm_id: firm.clone(),
                event_date: date,
                sue: 0.02 * randn(&mut rng),
                eprlm: Some(0.1 * randn(&mut rng)),
                eprgwp: Some(0.1 * randn(&mut rng)),
                eclm: Some(0.1 * randn(&mut rng)),
                ecgwp: Some(0.1 * randn(&mut rng)),
                car_pre: 0.01 * randn(&mut rng),
                car_event: 0.01 * randn(&mut rng),
                car_short: 0.01 * randn(&mut rng),
                car_long: 0.01 * randn(&mut rng),
                cast_pre: Some(0.05 * randn(&mut rng)),
                cast_event: Some(0.05 * randn(&mut rng)),
                roa: 0.03 * randn(&mut rng),
                log_bm: -0.3 + 0.4 * randn(&mut rng),
                log_m: 8.0 + 0.8 * randn(&mut rng),
            });
        }
    }

    AlgebraData { calendar, tones, factor, controls, docs }
}

fn blank_fit() -> NormalToneFit {
    NormalToneFit { alpha: 0.0, beta: 0.0, n_obs: 30, degenerate: false, residual_variance: 0.0 }
}

fn base_controls(firm: &str, q: usize, day: i32, rng: &mut ChaCha8Rng) -> ControlsRow {
    let date = date_string(day);
    ControlsRow {
        event_id: format!("{firm}:q{q:02}"),
        firm_id: firm.into(),
        event_date: date,
        sue: 0.02 * randn(rng),
        eprlm: Some(0.1 * randn(rng)),
        eprgwp: Some(0.1 * randn(rng)),
        eclm: Some(0.1 * randn(rng)),
        ecgwp: Some(0.1 * randn(rng)),
        car_pre: 0.01 * randn(rng),
        car_event: 0.0,
        car_short: 0.0,
        car_long: 0.0,
        cast_pre: Some(0.05 * randn(rng)),
        cast_event: Some(0.05 * randn(rng)),
        roa: 0.03 * randn(rng),
        log_bm: -0.3 + 0.4 * randn(rng),
        log_m: 8.0 + 0.8 * randn(rng),
    }
}

/// Events with a planted residual-tone effect on abnormal returns: positive
/// in the event window, sign-flipped in the long window, with firm and
/// quarter error components.
pub fn gen_planted_panel(
    seed: u64,
    n_firms: usize,
    n_quarters: usize,
    beta_event: f64,
    beta_long: f64,
) -> Vec<EventRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = parse_date("2004-01-05").unwrap();
    let mut events = Vec::new();
    for i in 0..n_firms {
        let firm = format!("f{i:04}");
        let firm_eff = 0.005 * randn(&mut rng);
        for q in 0..n_quarters {
            let day = base + (q * 91) as i32;
            let mut controls = base_controls(&firm, q, day, &mut rng);
            let rcat = randn(&mut rng);
            let quarter_eff = 0.002 * randn(&mut rng);
            controls.car_event = beta_event * rcat
                + 1.0 * controls.sue
                + firm_eff
                + quarter_eff
                + 0.02 * randn(&mut rng);
            controls.car_short = 0.01 * randn(&mut rng);
            controls.car_long = beta_long * rcat + firm_eff + quarter_eff + 0.02 * randn(&mut rng);
            let nw_share = ated(&mut rng);
            let nw = nw_share * rcat;
            events.push(EventRecord {
                event_id: controls.event_id.clone(),
                firm: firm.clone(),
                event_day: day,
                quarter: 8000 + q as u32,
                quarter_index: q,
                fit: blank_fit(),
                atone: BTreeMap::new(),
                cat: [
                    0.1 * randn(&mut rng),
                    0.1 * randn(&mut rng),
                    0.1 * randn(&mut rng),
                    0.1 * randn(&mut rng),
                ],
                controls,
                rcat: Some(rcat),
                nwrcat: Some(nw),
                nprcat: Some(rcat - nw),
                truncated: false,
            });
        }
    }
    events
}

fn ated(rng: &mut ChaCha8Rng) -> f64 {
    0.3 + 0.4 * rng.gen::<f64>()
}

/// Events whose abnormal tone is independent of every regressor; the error
/// carries firm and quarter components so clustered inference is exercised.
pub fn gen_null_panel(seed: u64, n_firms: usize, n_quarters: usize) -> Vec<EventRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = parse_date("2004-01-05").unwrap();
    let mut quarter_eff = Vec::with_capacity(n_quarters);
    for _ in 0..n_quarters {
        quarter_eff.push(0.01 * randn(&mut rng));
    }
    let mut events = Vec::new();
    for i in 0..n_firms {
        let firm = format!("f{i:04}");
        let firm_eff = 0.01 * randn(&mut rng);
        for q in 0..n_quarters {
            let day = base + (q * 91) as i32;
            let controls = base_controls(&firm, q, day, &mut rng);
            let cat_event = firm_eff + quarter_eff[q] + 0.02 * randn(&mut rng);
            events.push(EventRecord {
                event_id: controls.event_id.clone(),
                firm: firm.clone(),
                event_day: day,
                quarter: 8000 + q as u32,
                quarter_index: q,
                fit: blank_fit(),
                atone: BTreeMap::new(),
                cat: [0.05 * randn(&mut rng), cat_event, 0.0, 0.0],
                controls,
                rcat: None,
                nwrcat: None,
                nprcat: None,
                truncated: false,
            });
        }
    }
    events
}
