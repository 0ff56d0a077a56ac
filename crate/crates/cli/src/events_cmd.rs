//! Event construction: qualify announcements, fit normal tone, cumulate
//! abnormal tone, and strip the predictable part via expanding panel refits.

use std::collections::BTreeMap;
use std::path::Path;

use tonestudy_core::calendar::{align_relative, TradingCalendar};
use tonestudy_core::event::{
    atone_series, fit_normal_tone, ratc_allocations, split_ratc, window_sum, DocTone, EventError,
    NormalToneFit,
};
use tonestudy_core::market::{clip, winsor_bounds};
use tonestudy_core::panel::{fe_ols, PanelTable};

use crate::config::StudyConfig;
use crate::csvio::{self, ControlsRow, EventsToneRow, RatcRow};
use crate::dates::{date_string, parse_date, quarter_label, quarter_of};
use crate::tone_cmd::DocToneRec;
use crate::{CliError, Result};

pub const EVENT_RULES: [&str; 4] =
    ["bad_event_date", "no_event_tone", "few_estimation_obs", "no_disclosure_tone"];

/// Regressors of the residual-tone specification, in column order.
pub const RCAT_COLS: [&str; 12] = [
    "sue", "sue_neg", "sue_x_neg", "eprlm", "eprgwp", "eclm", "ecgwp", "cat_pre", "car_pre",
    "roa", "log_bm", "log_m",
];

#[derive(Clone, Debug)]
pub struct EventRecord {
    pub event_id: String,
    pub firm: String,
    pub event_day: i32,
    pub quarter: u32,
    /// Position of the quarter among the sample's distinct quarters.
    pub quarter_index: usize,
    pub fit: NormalToneFit,
    pub atone: BTreeMap<i32, f64>,
    /// pre, event, short, long.
    pub cat: [f64; 4],
    pub controls: ControlsRow,
    pub rcat: Option<f64>,
    pub nwrcat: Option<f64>,
    pub nprcat: Option<f64>,
    pub truncated: bool,
}

impl EventRecord {
    pub fn cat_event(&self) -> f64 {
        self.cat[1]
    }
}

pub struct BuiltEvents {
    pub events: Vec<EventRecord>,
    pub attrition: BTreeMap<&'static str, usize>,
    pub ratc: Vec<RatcRow>,
    /// Distinct event quarters, ascending; `quarter_index` indexes this.
    pub quarters: Vec<u32>,
}

fn tone_tau(
    tones: &BTreeMap<(String, i32), (f64, usize)>,
    firm: &str,
    cal: &TradingCalendar,
    event_day: i32,
) -> std::result::Result<(BTreeMap<i32, f64>, BTreeMap<i32, usize>), EventError> {
    let mut series: BTreeMap<i32, (f64, usize)> = BTreeMap::new();
    for ((f, day), v) in tones {
        if f == firm {
            series.insert(*day, *v);
        }
    }
    let aligned = align_relative(&series, cal, event_day)
        .map_err(|_| EventError::EmptyWindow)?;
    let mut tone = BTreeMap::new();
    let mut counts = BTreeMap::new();
    for (tau, (t, c)) in aligned {
        tone.insert(tau, t);
        counts.insert(tau, c);
    }
    Ok((tone, counts))
}

/// A window sum over present days; a window with no tone day contributes 0.
fn cat_window(atone: &BTreeMap<i32, f64>, w: (i32, i32)) -> f64 {
    window_sum(atone, w).unwrap_or(0.0)
}

/// Stage one: qualification and cumulative abnormal tone, no residualizing.
pub fn build_events(
    tones: &BTreeMap<(String, i32), (f64, usize)>,
    factor: &BTreeMap<i32, f64>,
    controls: &[ControlsRow],
    cal: &TradingCalendar,
    cfg: &StudyConfig,
) -> Result<BuiltEvents> {
    let mut attrition: BTreeMap<&'static str, usize> = BTreeMap::new();
    let bump = |map: &mut BTreeMap<&'static str, usize>, rule: &'static str| {
        *map.entry(rule).or_insert(0) += 1;
    };

    let mut events: Vec<EventRecord> = Vec::new();
    for row in controls {
        let event_day = parse_date(&row.event_date)?;
        if cal.position(event_day).is_none() {
            bump(&mut attrition, "bad_event_date");
            continue;
        }
        let Ok((tone, _counts)) = tone_tau(tones, &row.firm_id, cal, event_day) else {
            bump(&mut attrition, "bad_event_date");
            continue;
        };
        let (we0, we1) = cfg.windows.event;
        if !tone.range(we0..=we1).any(|_| true) {
            bump(&mut attrition, "no_event_tone");
            continue;
        }
        let factor_tau = align_relative(factor, cal, event_day)
            .expect("event day verified as trading day");
        let fit = match fit_normal_tone(&tone, &factor_tau, cfg.l, cfg.k, cfg.min_obs) {
            Ok(f) => f,
            Err(EventError::InsufficientObservations { .. }) => {
                bump(&mut attrition, "few_estimation_obs");
                continue;
            }
            Err(e) => return Err(CliError::estimation(format!("{}: {e}", row.event_id))),
        };
        if row.eprlm.is_none() || row.eprgwp.is_none() || row.eclm.is_none() || row.ecgwp.is_none()
        {
            bump(&mut attrition, "no_disclosure_tone");
            continue;
        }
        let atone = atone_series(&tone, &factor_tau, &fit, -cfg.l - cfg.k, 20);
        let cat = [
            cat_window(&atone, cfg.windows.pre),
            cat_window(&atone, cfg.windows.event),
            cat_window(&atone, cfg.windows.short),
            cat_window(&atone, cfg.windows.long),
        ];
        events.push(EventRecord {
            event_id: row.event_id.clone(),
            firm: row.firm_id.clone(),
            event_day,
            quarter: quarter_of(event_day),
            quarter_index: 0,
            fit,
            atone,
            cat,
            controls: row.clone(),
            rcat: None,
            nwrcat: None,
            nprcat: None,
            truncated: false,
        });
    }

    events.sort_by(|a, b| (a.event_day, &a.event_id).cmp(&(b.event_day, &b.event_id)));

    // Flag events whose estimation window reaches into the same firm's
    // previous event window.
    let mut last_pos: BTreeMap<&str, usize> = BTreeMap::new();
    let mut truncated = vec![false; events.len()];
    for (i, ev) in events.iter().enumerate() {
        let pos = cal.position(ev.event_day).expect("trading day");
        if let Some(&prev) = last_pos.get(ev.firm.as_str()) {
            if (pos - prev) as i32 <= cfg.l + cfg.k + 20 {
                truncated[i] = true;
            }
        }
        last_pos.insert(ev.firm.as_str(), pos);
    }
    for (ev, t) in events.iter_mut().zip(truncated) {
        ev.truncated = t;
    }

    let mut quarters: Vec<u32> = events.iter().map(|e| e.quarter).collect();
    quarters.sort_unstable();
    quarters.dedup();
    let index: BTreeMap<u32, usize> =
        quarters.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    for ev in &mut events {
        ev.quarter_index = index[&ev.quarter];
    }

    Ok(BuiltEvents { events, attrition, ratc: Vec::new(), quarters })
}

/// Winsorized (sue, roa, log_bm, log_m) for each event of the sample, with
/// bounds computed on that sample.
pub fn winsorized_controls(sample: &[&EventRecord], lo: f64, hi: f64) -> Vec<[f64; 4]> {
    let pull = |f: &dyn Fn(&EventRecord) -> f64| -> Vec<f64> {
        sample.iter().map(|e| f(e)).collect()
    };
    let cols: [Vec<f64>; 4] = [
        pull(&|e| e.controls.sue),
        pull(&|e| e.controls.roa),
        pull(&|e| e.controls.log_bm),
        pull(&|e| e.controls.log_m),
    ];
    let clipped: Vec<Vec<f64>> = cols
        .iter()
        .map(|v| match winsor_bounds(v, lo, hi) {
            Some(b) => clip(v, b),
            None => v.clone(),
        })
        .collect();
    (0..sample.len())
        .map(|i| [clipped[0][i], clipped[1][i], clipped[2][i], clipped[3][i]])
        .collect()
}

/// The residual-tone regressor vector; `w` carries the winsorized values.
pub fn control_vector(ev: &EventRecord, w: &[f64; 4]) -> Vec<f64> {
    let [sue, roa, log_bm, log_m] = *w;
    let neg = if sue < 0.0 { 1.0 } else { 0.0 };
    vec![
        sue,
        neg,
        sue * neg,
        ev.controls.eprlm.expect("qualified event"),
        ev.controls.eprgwp.expect("qualified event"),
        ev.controls.eclm.expect("qualified event"),
        ev.controls.ecgwp.expect("qualified event"),
        ev.cat[0],
        ev.controls.car_pre,
        roa,
        log_bm,
        log_m,
    ]
}

fn firm_index(events: &[EventRecord]) -> BTreeMap<String, u32> {
    let mut firms: Vec<&str> = events.iter().map(|e| e.firm.as_str()).collect();
    firms.sort_unstable();
    firms.dedup();
    firms.iter().enumerate().map(|(i, f)| (f.to_string(), i as u32)).collect()
}

/// Stage two: expanding panel refits. Events of each quarter with at least
/// `start_quarters` full quarters behind them get a residual tone from a fit
/// over everything up to and including their own quarter.
pub fn residualize(built: &mut BuiltEvents, cfg: &StudyConfig) -> Result<()> {
    let firms = firm_index(&built.events);
    let n_quarters = built.quarters.len();
    for qi in cfg.start_quarters..n_quarters {
        let sample: Vec<usize> = built
            .events
            .iter()
            .enumerate()
            .filter(|(_, e)| e.quarter_index <= qi)
            .map(|(i, _)| i)
            .collect();
        let refs: Vec<&EventRecord> = sample.iter().map(|&i| &built.events[i]).collect();
        let wins = winsorized_controls(&refs, cfg.winsor_lo, cfg.winsor_hi);
        let mut table = PanelTable::new(RCAT_COLS.iter().map(|s| s.to_string()).collect());
        for (ev, w) in refs.iter().zip(&wins) {
            let x = control_vector(ev, w);
            if x.iter().any(|v| !v.is_finite()) {
                return Err(CliError::validation(format!(
                    "{}: non-finite regressor",
                    ev.event_id
                )));
            }
            table.push(ev.cat_event(), x, firms[&ev.firm], ev.quarter);
        }
        let fit = fe_ols(&table).map_err(|e| {
            CliError::estimation(format!(
                "residual tone refit at {}: {e}",
                quarter_label(built.quarters[qi])
            ))
        })?;
        for (row, &i) in sample.iter().enumerate() {
            if built.events[i].quarter_index == qi {
                built.events[i].rcat = Some(fit.residuals[row]);
            }
        }
    }
    Ok(())
}

/// Stage three: allocate each event's residual tone over its event-window
/// articles and split by source.
pub fn allocate_ratc(
    built: &mut BuiltEvents,
    docs: &[DocToneRec],
    factor: &BTreeMap<i32, f64>,
    cal: &TradingCalendar,
    cfg: &StudyConfig,
) -> Result<()> {
    let mut by_firm: BTreeMap<&str, Vec<&DocToneRec>> = BTreeMap::new();
    for d in docs {
        by_firm.entry(d.firm_id.as_str()).or_default().push(d);
    }
    let (w0, w1) = cfg.windows.event;
    let mut out: Vec<RatcRow> = Vec::new();
    for ev in &mut built.events {
        let Some(rcat) = ev.rcat else { continue };
        let pos = cal.position(ev.event_day).expect("trading day") as i64;
        let mut window_docs: Vec<(&DocToneRec, DocTone)> = Vec::new();
        for d in by_firm.get(ev.firm.as_str()).map_or(&[][..], |v| v) {
            let Some(dpos) = cal.position(d.day) else { continue };
            let tau = (dpos as i64 - pos) as i32;
            if tau >= w0 && tau <= w1 {
                window_docs
                    .push((d, DocTone { tau, tone: d.tone, newswire: d.newswire }));
            }
        }
        if window_docs.is_empty() {
            continue;
        }
        let doc_tones: Vec<DocTone> = window_docs.iter().map(|(_, t)| t.clone()).collect();
        let factor_tau = align_relative(factor, cal, ev.event_day)
            .expect("event day verified as trading day");
        let panel_fitted = ev.cat_event() - rcat;
        let shares =
            ratc_allocations(&doc_tones, &ev.fit, &factor_tau, panel_fitted, (w0, w1));
        let (nw, np) = split_ratc(&doc_tones, &shares);
        ev.nwrcat = Some(nw);
        ev.nprcat = Some(np);
        for ((rec, tone), share) in window_docs.iter().zip(&shares) {
            out.push(RatcRow {
                event_id: ev.event_id.clone(),
                doc_id: rec.doc_id.clone(),
                tau: tone.tau,
                ratc: *share,
            });
        }
    }
    built.ratc = out;
    Ok(())
}

pub fn tone_rows(built: &BuiltEvents) -> Vec<EventsToneRow> {
    built
        .events
        .iter()
        .map(|ev| EventsToneRow {
            event_id: ev.event_id.clone(),
            firm_id: ev.firm.clone(),
            event_date: date_string(ev.event_day),
            quarter: quarter_label(ev.quarter),
            n_est_obs: ev.fit.n_obs,
            cat_pre: ev.cat[0],
            cat_event: ev.cat[1],
            cat_short: ev.cat[2],
            cat_long: ev.cat[3],
            rcat: ev.rcat,
            nwrcat: ev.nwrcat,
            nprcat: ev.nprcat,
            truncated: ev.truncated as u8,
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn run_events(
    tones_path: &Path,
    factor_path: &Path,
    controls_path: &Path,
    calendar: &TradingCalendar,
    out: &Path,
    ratc_out: Option<&Path>,
    attrition_out: Option<&Path>,
    docs: Option<&[DocToneRec]>,
    cfg: &StudyConfig,
) -> Result<BuiltEvents> {
    let tones = crate::tone_cmd::load_tones(tones_path)?;
    let factor = crate::tone_cmd::load_factor(factor_path)?;
    let controls: Vec<ControlsRow> = csvio::read_csv(controls_path)?;
    let mut built = build_events(&tones, &factor, &controls, calendar, cfg)?;
    residualize(&mut built, cfg)?;
    if let Some(docs) = docs {
        allocate_ratc(&mut built, docs, &factor, calendar, cfg)?;
    }
    csvio::write_csv(out, &tone_rows(&built))?;
    if let Some(path) = ratc_out {
        csvio::write_csv(path, &built.ratc)?;
    }
    if let Some(path) = attrition_out {
        #[derive(serde::Serialize)]
        struct Row<'a> {
            rule: &'a str,
            count: usize,
        }
        let mut rows = vec![Row { rule: "input", count: controls.len() }];
        rows.push(Row { rule: "qualified", count: built.events.len() });
        for rule in EVENT_RULES {
            rows.push(Row { rule, count: built.attrition.get(rule).copied().unwrap_or(0) });
        }
        csvio::write_csv(path, &rows)?;
    }
    Ok(built)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn calendar(n: usize) -> TradingCalendar {
        TradingCalendar::new((0..n as i32).collect()).unwrap()
    }

    fn controls_row(firm: &str, day: i32) -> ControlsRow {
        ControlsRow {
            event_id: format!("{firm}:{}", date_string(day)),
            firm_id: firm.into(),
            event_date: date_string(day),
            sue: 0.01,
            eprlm: Some(0.1),
            eprgwp: Some(0.2),
            eclm: Some(0.1),
            ecgwp: Some(0.3),
            car_pre: 0.0,
            car_event: 0.0,
            car_short: 0.0,
            car_long: 0.0,
            cast_pre: Some(0.0),
            cast_event: Some(0.0),
            roa: 0.02,
            log_bm: -0.5,
            log_m: 10.0,
        }
    }

    /// Tone exactly alpha + beta * factor everywhere except a bump at tau=0.
    fn planted_inputs(
        firms: &[&str],
        event_pos: &[usize],
        n_days: usize,
        bump: f64,
    ) -> (BTreeMap<(String, i32), (f64, usize)>, BTreeMap<i32, f64>, Vec<ControlsRow>) {
        let mut tones = BTreeMap::new();
        let mut factor = BTreeMap::new();
        let mut controls = Vec::new();
        for d in 0..n_days as i32 {
            factor.insert(d, 0.01 * ((d % 11) as f64 - 5.0));
        }
        for (fi, firm) in firms.iter().enumerate() {
            let alpha = 0.05 + 0.01 * fi as f64;
            let beta = 0.5 + 0.1 * fi as f64;
            for d in 0..n_days as i32 {
                let mut tone = alpha + beta * factor[&d];
                if event_pos.contains(&(d as usize)) {
                    tone += bump;
                }
                tones.insert((firm.to_string(), d), (tone, 1));
            }
            for &p in event_pos {
                controls.push(controls_row(firm, p as i32));
            }
        }
        (tones, factor, controls)
    }

    #[test]
    fn noiseless_event_recovers_planted_cat() {
        let cal = calendar(120);
        let cfg = StudyConfig::default();
        let (tones, factor, controls) = planted_inputs(&["f1"], &[60], 120, 0.2);
        let built = build_events(&tones, &factor, &controls, &cal, &cfg).unwrap();
        assert_eq!(built.events.len(), 1);
        let ev = &built.events[0];
        // The estimation window is clean, so ATONE is zero off the event day
        // and the bump lands in CAT(-1,1) alone.
        assert!((ev.cat[1] - 0.2).abs() < 1e-10);
        assert!(ev.cat[0].abs() < 1e-10);
        assert!(ev.cat[2].abs() < 1e-10);
        assert!((ev.fit.alpha - 0.05).abs() < 1e-10);
        assert!((ev.fit.beta - 0.5).abs() < 1e-10);
    }

    #[test]
    fn event_tone_rule_checks_all_three_days() {
        let cal = calendar(120);
        let cfg = StudyConfig::default();
        let (mut tones, factor, controls) = planted_inputs(&["f1"], &[60], 120, 0.2);
        for tau in [-1, 0, 1] {
            tones.remove(&("f1".to_string(), 60 + tau));
        }
        let built = build_events(&tones, &factor, &controls, &cal, &cfg).unwrap();
        assert_eq!(built.events.len(), 0);
        assert_eq!(built.attrition["no_event_tone"], 1);

        // With tone only at tau = +1 the event is back.
        let (all, factor, controls) = planted_inputs(&["f1"], &[60], 120, 0.2);
        let mut tones = all.clone();
        tones.remove(&("f1".to_string(), 59));
        tones.remove(&("f1".to_string(), 60));
        let built = build_events(&tones, &factor, &controls, &cal, &cfg).unwrap();
        assert_eq!(built.events.len(), 1);
    }

    #[test]
    fn sparse_estimation_window_drops_event() {
        let cal = calendar(120);
        let cfg = StudyConfig::default();
        let (mut tones, factor, controls) = planted_inputs(&["f1"], &[60], 120, 0.2);
        // Keep only 9 estimation-window days.
        for d in 25..=54 {
            if d >= 34 {
                tones.remove(&("f1".to_string(), d));
            }
        }
        let built = build_events(&tones, &factor, &controls, &cal, &cfg).unwrap();
        assert_eq!(built.events.len(), 0);
        assert_eq!(built.attrition["few_estimation_obs"], 1);
    }

    #[test]
    fn missing_disclosure_tone_drops_event() {
        let cal = calendar(120);
        let cfg = StudyConfig::default();
        let (tones, factor, mut controls) = planted_inputs(&["f1"], &[60], 120, 0.2);
        controls[0].ecgwp = None;
        let built = build_events(&tones, &factor, &controls, &cal, &cfg).unwrap();
        assert_eq!(built.attrition["no_disclosure_tone"], 1);
    }

    #[test]
    fn close_events_get_truncation_flag() {
        let cal = calendar(200);
        let cfg = StudyConfig::default();
        let (tones, factor, controls) =
            planted_inputs(&["f1"], &[60, 100, 180], 200, 0.2);
        let built = build_events(&tones, &factor, &controls, &cal, &cfg).unwrap();
        assert_eq!(built.events.len(), 3);
        assert!(!built.events[0].truncated);
        // Gap 40 <= 55: flagged. Gap 80 > 55: clean.
        assert!(built.events[1].truncated);
        assert!(!built.events[2].truncated);
    }

    #[test]
    fn residualize_skips_early_quarters_and_scores_late_ones() {
        // Quarterly events for 20 firms over many quarters. Events every 63
        // days hop quarters; use a long calendar.
        let n_days = 65 * 20;
        let cal = calendar(n_days);
        let mut cfg = StudyConfig::default();
        cfg.start_quarters = 4;
        let firms: Vec<String> = (0..6).map(|i| format!("f{i}")).collect();
        let firm_refs: Vec<&str> = firms.iter().map(|s| s.as_str()).collect();
        let event_pos: Vec<usize> = (1..19).map(|i| 65 * i).collect();
        let (tones, factor, mut controls) =
            planted_inputs(&firm_refs, &event_pos, n_days, 0.1);
        // Vary sue so the design has spread.
        for (i, c) in controls.iter_mut().enumerate() {
            c.sue = 0.01 * ((i % 7) as f64 - 3.0);
            c.roa = 0.01 * ((i % 5) as f64);
            c.log_bm = -0.1 * ((i % 3) as f64);
            c.log_m = 8.0 + 0.1 * (i % 11) as f64;
        }
        let mut built = build_events(&tones, &factor, &controls, &cal, &cfg).unwrap();
        residualize(&mut built, &cfg).unwrap();
        let quarters = built.quarters.clone();
        assert!(quarters.len() >= 6);
        for ev in &built.events {
            if ev.quarter_index < cfg.start_quarters {
                assert!(ev.rcat.is_none(), "{} should be unscored", ev.event_id);
            } else {
                assert!(ev.rcat.is_some(), "{} should be scored", ev.event_id);
            }
        }
    }

    #[test]
    fn ratc_shares_rebuild_rcat() {
        let n_days = 65 * 20;
        let cal = calendar(n_days);
        let mut cfg = StudyConfig::default();
        cfg.start_quarters = 4;
        let firms: Vec<String> = (0..6).map(|i| format!("f{i}")).collect();
        let firm_refs: Vec<&str> = firms.iter().map(|s| s.as_str()).collect();
        let event_pos: Vec<usize> = (1..19).map(|i| 65 * i).collect();
        let (tones, factor, mut controls) =
            planted_inputs(&firm_refs, &event_pos, n_days, 0.1);
        for (i, c) in controls.iter_mut().enumerate() {
            c.sue = 0.01 * ((i % 7) as f64 - 3.0);
            c.roa = 0.01 * ((i % 5) as f64);
            c.log_bm = -0.1 * ((i % 3) as f64);
            c.log_m = 8.0 + 0.1 * (i % 11) as f64;
        }
        let mut built = build_events(&tones, &factor, &controls, &cal, &cfg).unwrap();
        residualize(&mut built, &cfg).unwrap();
        // One article per firm-day backs each tone observation.
        let mut docs = Vec::new();
        for ((firm, day), (tone, _)) in &tones {
            docs.push(DocToneRec {
                doc_id: format!("{firm}:{day}"),
                firm_id: firm.clone(),
                day: *day,
                tone: *tone,
                newswire: *day % 2 == 0,
            });
        }
        allocate_ratc(&mut built, &docs, &factor, &cal, &cfg).unwrap();
        assert!(!built.ratc.is_empty());
        for ev in &built.events {
            let Some(rcat) = ev.rcat else {
                assert!(ev.nwrcat.is_none());
                continue;
            };
            let total: f64 = built
                .ratc
                .iter()
                .filter(|r| r.event_id == ev.event_id)
                .map(|r| r.ratc)
                .sum();
            assert!((total - rcat).abs() < 1e-10, "{}: {total} vs {rcat}", ev.event_id);
            assert!((ev.nwrcat.unwrap() + ev.nprcat.unwrap() - rcat).abs() < 1e-10);
        }
    }
}
