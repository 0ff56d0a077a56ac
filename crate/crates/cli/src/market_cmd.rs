//! Market measures per earnings event: SUE, realignment, CAR, CAST.

use std::collections::BTreeMap;
use std::path::Path;

use tonestudy_core::calendar::{align_relative, TradingCalendar};
use tonestudy_core::market::{
    car, cast, fit_market_model, fit_mean_turnover, realign_event_date, share_turnover, sue,
    MarketError,
};

use crate::calendar_io::calendar_from_dates;
use crate::config::StudyConfig;
use crate::csvio::{self, EarningsRow, EventsMarketRow, PriceRow};
use crate::dates::{date_string, parse_date};
use crate::{CliError, Result};

pub const MARKET_RULES: [&str; 6] = [
    "no_price_data",
    "bad_announce",
    "missing_volume",
    "bad_price",
    "insufficient_returns",
    "empty_window",
];

#[derive(Clone, Debug, Default)]
pub struct MarketStats {
    pub input: usize,
    pub retained: usize,
    pub rejections: BTreeMap<&'static str, usize>,
}

impl MarketStats {
    fn bump(&mut self, rule: &'static str) {
        *self.rejections.entry(rule).or_insert(0) += 1;
    }
}

/// Per-firm daily series keyed by calendar day.
pub struct FirmSeries {
    pub ret: BTreeMap<i32, f64>,
    pub market: BTreeMap<i32, f64>,
    pub volume: BTreeMap<i32, f64>,
    pub turnover: BTreeMap<i32, f64>,
}

pub fn load_prices(path: &Path) -> Result<(BTreeMap<String, FirmSeries>, Vec<i32>)> {
    let rows: Vec<PriceRow> = csvio::read_csv(path)?;
    let mut firms: BTreeMap<String, FirmSeries> = BTreeMap::new();
    let mut dates = Vec::new();
    for r in rows {
        let day = parse_date(&r.date)?;
        if r.price <= 0.0 {
            return Err(CliError::validation(format!(
                "nonpositive price for {} on {}",
                r.firm, r.date
            )));
        }
        dates.push(day);
        let s = firms.entry(r.firm).or_insert_with(|| FirmSeries {
            ret: BTreeMap::new(),
            market: BTreeMap::new(),
            volume: BTreeMap::new(),
            turnover: BTreeMap::new(),
        });
        s.ret.insert(day, r.ret);
        s.market.insert(day, r.market_return);
        s.volume.insert(day, r.volume);
        if let Ok(st) = share_turnover(r.volume, r.shares) {
            s.turnover.insert(day, st);
        }
    }
    Ok((firms, dates))
}

#[derive(Debug)]
pub struct EventWindows {
    pub realigned_day: i32,
    pub sue: f64,
    pub car: [f64; 4],
    pub cast: [Option<f64>; 4],
}

/// One event's market measures, or the name of the screen that rejected it.
pub fn event_market(
    series: &FirmSeries,
    cal: &TradingCalendar,
    announce_day: i32,
    earn: &EarningsRow,
    cfg: &StudyConfig,
) -> std::result::Result<EventWindows, &'static str> {
    let sue_val = match sue(earn.eps, earn.median_forecast, earn.qend_price) {
        Ok(v) => v,
        Err(_) => return Err("bad_price"),
    };
    let Some(pos) = cal.roll_forward(announce_day) else { return Err("bad_announce") };
    if pos == 0 || pos + 1 >= cal.len() {
        return Err("missing_volume");
    }
    let days = [
        cal.day_at(pos - 1).unwrap(),
        cal.day_at(pos).unwrap(),
        cal.day_at(pos + 1).unwrap(),
    ];
    let volumes = days.map(|d| series.volume.get(&d).copied());
    let realigned_day = match realign_event_date(days, volumes) {
        Ok(d) => d,
        Err(_) => return Err("missing_volume"),
    };

    let align = |s: &BTreeMap<i32, f64>| align_relative(s, cal, realigned_day);
    let (Ok(ret), Ok(market), Ok(turnover)) =
        (align(&series.ret), align(&series.market), align(&series.turnover))
    else {
        return Err("bad_announce");
    };

    let fit = match fit_market_model(&ret, &market, cfg.l, cfg.k, cfg.min_obs) {
        Ok(f) => f,
        Err(MarketError::InsufficientObservations { .. }) => return Err("insufficient_returns"),
        Err(_) => return Err("insufficient_returns"),
    };
    let mut cars = [0.0; 4];
    for (slot, (_, w)) in cars.iter_mut().zip(cfg.windows.named()) {
        match car(&ret, &market, &fit, w) {
            Ok(v) => *slot = v,
            Err(_) => return Err("empty_window"),
        }
    }
    let casts = match fit_mean_turnover(&turnover, cfg.l, cfg.k, cfg.min_obs) {
        Ok((mean, _)) => {
            cfg.windows.named().map(|(_, w)| cast(&turnover, mean, w).ok())
        }
        Err(_) => [None; 4],
    };
    Ok(EventWindows { realigned_day, sue: sue_val, car: cars, cast: casts })
}

pub fn run_market(
    prices: &Path,
    earnings: &Path,
    out: &Path,
    calendar: Option<&TradingCalendar>,
    cfg: &StudyConfig,
) -> Result<MarketStats> {
    let (firms, dates) = load_prices(prices)?;
    let derived;
    let cal = match calendar {
        Some(c) => c,
        None => {
            derived = calendar_from_dates(dates)?;
            &derived
        }
    };
    let earns: Vec<EarningsRow> = csvio::read_csv(earnings)?;
    let mut stats = MarketStats { input: earns.len(), ..Default::default() };
    let mut rows: Vec<EventsMarketRow> = Vec::new();
    for e in earns {
        let announce_day = parse_date(&e.announce_date)?;
        let Some(series) = firms.get(&e.firm) else {
            stats.bump("no_price_data");
            continue;
        };
        match event_market(series, cal, announce_day, &e, cfg) {
            Ok(w) => rows.push(EventsMarketRow {
                event_id: format!("{}:{}", e.firm, e.announce_date),
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
            }),
            Err(rule) => stats.bump(rule),
        }
    }
    stats.retained = rows.len();
    csvio::write_csv(out, &rows)?;
    Ok(stats)
}
