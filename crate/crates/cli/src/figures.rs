//! Event-study figures: bucket events, average cumulative paths across the
//! bucket, and render the curves as SVG line charts.

use std::collections::BTreeMap;

use serde::Serialize;

use tonestudy_core::stats::quantile;

use crate::{CliError, Result};

/// One event's contribution to a figure: the bucket variables plus the
/// per-day measure (abnormal tone, abnormal return, or abnormal turnover).
#[derive(Clone, Debug)]
pub struct FigureEvent {
    pub event_id: String,
    pub sue: f64,
    pub rcat: f64,
    pub series: BTreeMap<i32, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BucketScheme {
    SueQuintiles,
    RcatTercilesBySueSign,
    AbsRcatTercilesBySueSign,
}

#[derive(Clone, Debug, Serialize)]
pub struct Bucket {
    pub label: String,
    /// Quantile cutoffs of the bucket variable, reported for reference.
    pub cutoffs: Vec<f64>,
    pub members: Vec<usize>,
}

/// Ranks split at round(n*b/k); runs of equal values fall to whichever side
/// their event_id sorts them, so the partition is total and deterministic.
fn rank_partition(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = order.len();
    let boundary = |b: usize| ((n * b) as f64 / k as f64).round() as usize;
    (0..k)
        .map(|b| order[boundary(b)..boundary(b + 1)].to_vec())
        .collect()
}

fn sorted_indices(events: &[FigureEvent], idx: &[usize], key: &dyn Fn(&FigureEvent) -> f64) -> Vec<usize> {
    let mut order = idx.to_vec();
    order.sort_by(|&a, &b| {
        let (va, vb) = (key(&events[a]), key(&events[b]));
        va.partial_cmp(&vb)
            .unwrap()
            .then_with(|| events[a].event_id.cmp(&events[b].event_id))
    });
    order
}

fn cutoffs(events: &[FigureEvent], idx: &[usize], key: &dyn Fn(&FigureEvent) -> f64, k: usize) -> Vec<f64> {
    let values: Vec<f64> = idx.iter().map(|&i| key(&events[i])).collect();
    (1..k).map(|b| quantile(&values, b as f64 / k as f64)).collect()
}

pub fn bucket_events(events: &[FigureEvent], scheme: BucketScheme) -> Result<Vec<Bucket>> {
    let all: Vec<usize> = (0..events.len()).collect();
    let too_few = |need: usize, have: usize, side: &str| {
        CliError::validation(format!(
            "too few events to bucket: need {need}, have {have}{side}"
        ))
    };
    match scheme {
        BucketScheme::SueQuintiles => {
            if events.len() < 5 {
                return Err(too_few(5, events.len(), ""));
            }
            let key = |e: &FigureEvent| e.sue;
            let order = sorted_indices(events, &all, &key);
            let cuts = cutoffs(events, &all, &key, 5);
            Ok(rank_partition(&order, 5)
                .into_iter()
                .enumerate()
                .map(|(b, members)| Bucket {
                    label: format!("SUE #{}", b + 1),
                    cutoffs: cuts.clone(),
                    members,
                })
                .collect())
        }
        BucketScheme::RcatTercilesBySueSign | BucketScheme::AbsRcatTercilesBySueSign => {
            let key: Box<dyn Fn(&FigureEvent) -> f64> = match scheme {
                BucketScheme::AbsRcatTercilesBySueSign => Box::new(|e: &FigureEvent| e.rcat.abs()),
                _ => Box::new(|e: &FigureEvent| e.rcat),
            };
            let var = match scheme {
                BucketScheme::AbsRcatTercilesBySueSign => "|RCAT|",
                _ => "RCAT",
            };
            let mut out = Vec::new();
            for (side, label) in [(false, "SUE<0"), (true, "SUE>=0")] {
                let idx: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|&i| (events[i].sue >= 0.0) == side)
                    .collect();
                if idx.len() < 3 {
                    return Err(too_few(3, idx.len(), &format!(" on side {label}")));
                }
                let order = sorted_indices(events, &idx, &key);
                let cuts = cutoffs(events, &idx, &key, 3);
                for (b, members) in rank_partition(&order, 3).into_iter().enumerate() {
                    out.push(Bucket {
                        label: format!("{label}, {var} #{}", b + 1),
                        cutoffs: cuts.clone(),
                        members,
                    });
                }
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub tau: i32,
    pub mean: f64,
    pub count: usize,
}

/// Cross-section average of cumulative paths. Each event's path at τ is the
/// sum of its observed per-day values in [range.0, τ]; an event enters the
/// τ mean once it has at least one observation at or before τ.
pub fn average_curve(
    events: &[FigureEvent],
    members: &[usize],
    range: (i32, i32),
) -> Vec<CurvePoint> {
    let mut points = Vec::new();
    for tau in range.0..=range.1 {
        let mut sum = 0.0;
        let mut count = 0usize;
        for &i in members {
            let ev = &events[i];
            let mut any = false;
            let mut cum = 0.0;
            for (_, v) in ev.series.range(range.0..=tau) {
                any = true;
                cum += v;
            }
            if any {
                sum += cum;
                count += 1;
            }
        }
        if count > 0 {
            points.push(CurvePoint { tau, mean: sum / count as f64, count });
        }
    }
    points
}

#[derive(Clone, Debug, Serialize)]
pub struct BucketCurve {
    pub label: String,
    pub n_events: usize,
    pub points: Vec<CurvePoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FigureResult {
    pub id: String,
    pub title: String,
    pub measure: String,
    pub range: (i32, i32),
    pub event_window: (i32, i32),
    pub buckets: Vec<BucketCurve>,
}

pub fn run_figure(
    id: &str,
    title: &str,
    measure: &str,
    events: &[FigureEvent],
    scheme: BucketScheme,
    range: (i32, i32),
    event_window: (i32, i32),
) -> Result<FigureResult> {
    let buckets = bucket_events(events, scheme)?;
    let curves = buckets
        .into_iter()
        .map(|b| BucketCurve {
            n_events: b.members.len(),
            points: average_curve(events, &b.members, range),
            label: b.label,
        })
        .collect();
    Ok(FigureResult {
        id: id.into(),
        title: title.into(),
        measure: measure.into(),
        range,
        event_window,
        buckets: curves,
    })
}

#[derive(Serialize)]
pub struct FigureCsvRow {
    pub figure: String,
    pub bucket: String,
    pub tau: i32,
    pub mean: f64,
    pub count: usize,
}

pub fn csv_rows(result: &FigureResult) -> Vec<FigureCsvRow> {
    let mut rows = Vec::new();
    for b in &result.buckets {
        for p in &b.points {
            rows.push(FigureCsvRow {
                figure: result.id.clone(),
                bucket: b.label.clone(),
                tau: p.tau,
                mean: p.mean,
                count: p.count,
            });
        }
    }
    rows
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.abs().log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    };
    step * mag
}

/// A self-contained SVG line chart: one polyline per bucket, shaded event
/// window, zero line, axis ticks, and a legend.
pub fn render_svg(result: &FigureResult) -> String {
    let (width, height) = (720.0, 480.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 50.0, 45.0);
    let plot_w = width - ml - mr;
    let plot_h = height - mt - mb;

    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for b in &result.buckets {
        for p in &b.points {
            y_min = y_min.min(p.mean);
            y_max = y_max.max(p.mean);
        }
    }
    if !y_min.is_finite() {
        y_min = -1.0;
        y_max = 1.0;
    }
    y_min = y_min.min(0.0);
    y_max = y_max.max(0.0);
    let pad = 0.08 * (y_max - y_min).max(1e-12);
    y_min -= pad;
    y_max += pad;

    let (x0, x1) = (result.range.0 as f64, result.range.1 as f64);
    let sx = |tau: f64| ml + (tau - x0) / (x1 - x0) * plot_w;
    let sy = |v: f64| mt + (y_max - v) / (y_max - y_min) * plot_h;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         font-family=\"Helvetica,Arial,sans-serif\" font-size=\"12\">\n"
    ));
    s.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}: {}</text>\n",
        width / 2.0,
        result.id,
        result.title
    ));

    let (ew0, ew1) = result.event_window;
    s.push_str(&format!(
        "<rect x=\"{:.1}\" y=\"{mt}\" width=\"{:.1}\" height=\"{plot_h}\" fill=\"#dddddd\"/>\n",
        sx(ew0 as f64 - 0.5),
        sx(ew1 as f64 + 0.5) - sx(ew0 as f64 - 0.5),
    ));

    let step = nice_step(y_max - y_min);
    let mut tick = (y_min / step).ceil() * step;
    while tick <= y_max {
        let y = sy(tick);
        s.push_str(&format!(
            "<line x1=\"{ml}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#eeeeee\"/>\n",
            width - mr
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
            ml - 6.0,
            y + 4.0,
            format_tick(tick)
        ));
        tick += step;
    }
    let mut tau = ((x0 / 5.0).ceil() * 5.0) as i32;
    while tau as f64 <= x1 {
        let x = sx(tau as f64);
        s.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#cccccc\"/>\n",
            mt + plot_h,
            mt + plot_h + 4.0
        ));
        s.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{tau}</text>\n",
            mt + plot_h + 18.0
        ));
        tau += 5;
    }
    s.push_str(&format!(
        "<line x1=\"{:.1}\" y1=\"{mt}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#999999\" \
         stroke-dasharray=\"4 3\"/>\n",
        sx(0.0),
        sx(0.0),
        mt + plot_h
    ));
    s.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#666666\"/>\n",
        sy(0.0),
        width - mr,
        sy(0.0)
    ));
    s.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{:.1}\" stroke=\"#333333\"/>\n",
        mt + plot_h
    ));
    s.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" stroke=\"#333333\"/>\n",
        mt + plot_h,
        width - mr,
        mt + plot_h
    ));
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">trading days from event</text>\n",
        ml + plot_w / 2.0,
        height - 8.0
    ));
    s.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        mt + plot_h / 2.0,
        mt + plot_h / 2.0,
        result.measure
    ));

    for (i, b) in result.buckets.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = b
            .points
            .iter()
            .map(|p| format!("{:.1},{:.1}", sx(p.tau as f64), sy(p.mean)))
            .collect();
        if !pts.is_empty() {
            s.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.6\"/>\n",
                pts.join(" ")
            ));
        }
        let ly = mt + 16.0 + 16.0 * i as f64;
        s.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            ml + 10.0,
            ml + 34.0
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{} (n={})</text>\n",
            ml + 40.0,
            ly + 4.0,
            b.label,
            b.n_events
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 0.01 {
        format!("{v:.3}")
            .trim_end_matches('0')
            .trim_end_matches('.')
            .to_string()
    } else {
        format!("{v:.1e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(id: &str, sue: f64, rcat: f64, series: &[(i32, f64)]) -> FigureEvent {
        FigureEvent {
            event_id: id.into(),
            sue,
            rcat,
            series: series.iter().copied().collect(),
        }
    }

    #[test]
    fn ten_events_quintile_into_pairs() {
        let events: Vec<FigureEvent> = (0..10)
            .map(|i| ev(&format!("e{i:02}"), i as f64 / 10.0 - 0.3, 0.0, &[]))
            .collect();
        let buckets = bucket_events(&events, BucketScheme::SueQuintiles).unwrap();
        assert_eq!(buckets.len(), 5);
        for b in &buckets {
            assert_eq!(b.members.len(), 2);
        }
        assert_eq!(buckets[0].label, "SUE #1");
    }

    #[test]
    fn conditional_terciles_split_evenly() {
        let mut events = Vec::new();
        for i in 0..9 {
            events.push(ev(&format!("p{i}"), 0.1, i as f64, &[]));
            events.push(ev(&format!("n{i}"), -0.1, i as f64, &[]));
        }
        let buckets = bucket_events(&events, BucketScheme::RcatTercilesBySueSign).unwrap();
        assert_eq!(buckets.len(), 6);
        for b in &buckets {
            assert_eq!(b.members.len(), 3);
        }
        assert!(buckets[0].label.starts_with("SUE<0"));
        assert!(buckets[3].label.starts_with("SUE>=0"));
    }

    #[test]
    fn ties_partition_by_event_id() {
        let events: Vec<FigureEvent> =
            (0..10).map(|i| ev(&format!("e{i:02}"), 1.0, 0.0, &[])).collect();
        let buckets = bucket_events(&events, BucketScheme::SueQuintiles).unwrap();
        for b in &buckets {
            assert_eq!(b.members.len(), 2);
        }
        assert_eq!(buckets[0].members, vec![0, 1]);
        assert_eq!(buckets[4].members, vec![8, 9]);
    }

    #[test]
    fn too_few_events_is_an_error() {
        let events: Vec<FigureEvent> =
            (0..4).map(|i| ev(&format!("e{i}"), i as f64, 0.0, &[])).collect();
        assert!(bucket_events(&events, BucketScheme::SueQuintiles).is_err());
        let one_sided: Vec<FigureEvent> =
            (0..6).map(|i| ev(&format!("e{i}"), 1.0, i as f64, &[])).collect();
        assert!(bucket_events(&one_sided, BucketScheme::RcatTercilesBySueSign).is_err());
    }

    #[test]
    fn average_curve_matches_hand_masked_mean() {
        let events = vec![
            ev("a", 0.0, 0.0, &[(-1, 1.0), (0, 1.0), (1, 1.0)]),
            ev("b", 0.0, 0.0, &[(0, 4.0)]),
        ];
        let pts = average_curve(&events, &[0, 1], (-2, 2));
        // tau -2: nobody has data yet. tau -1: only event a, cum 1.
        assert_eq!(pts[0].tau, -1);
        assert_eq!(pts[0].count, 1);
        assert!((pts[0].mean - 1.0).abs() < 1e-12);
        // tau 0: a has 2, b has 4 -> mean 3.
        let p0 = pts.iter().find(|p| p.tau == 0).unwrap();
        assert_eq!(p0.count, 2);
        assert!((p0.mean - 3.0).abs() < 1e-12);
        // tau 2: a has 3, b still 4 -> mean 3.5 with carry-forward.
        let p2 = pts.iter().find(|p| p.tau == 2).unwrap();
        assert!((p2.mean - 3.5).abs() < 1e-12);
    }

    #[test]
    fn svg_renders_every_bucket_and_is_deterministic() {
        let events: Vec<FigureEvent> = (0..10)
            .map(|i| {
                ev(
                    &format!("e{i:02}"),
                    i as f64 - 4.5,
                    0.0,
                    &[(-2, 0.1 * i as f64), (0, 0.2), (3, -0.1)],
                )
            })
            .collect();
        let fig = run_figure(
            "F4",
            "Average abnormal tone path",
            "average CAT",
            &events,
            BucketScheme::SueQuintiles,
            (-5, 20),
            (-1, 1),
        )
        .unwrap();
        let svg = render_svg(&fig);
        assert_eq!(svg.matches("<polyline").count(), 5);
        assert!(svg.contains("SUE #5"));
        assert!(svg.contains("trading days from event"));
        assert_eq!(svg, render_svg(&fig));
        let rows = csv_rows(&fig);
        assert!(rows.iter().all(|r| r.figure == "F4"));
    }
}
