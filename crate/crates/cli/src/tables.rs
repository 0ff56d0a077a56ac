//! Regression tables: panel fits with firm and year-quarter fixed effects,
//! double-clustered standard errors, and the paper-style text layout.

use serde::Serialize;

use tonestudy_core::linalg::Mat;
use tonestudy_core::panel::{dcluster_cov, fe_ols, stars, wald_equal, PanelTable};
use tonestudy_core::stats::two_sided_p;

use crate::config::StudyConfig;
use crate::events_cmd::{winsorized_controls, EventRecord};
use crate::{CliError, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dep {
    CatEvent,
    CatShort,
    CatLong,
    CarEvent,
    CarShort,
    CarLong,
    CastEvent,
}

impl Dep {
    fn label(self, cfg: &StudyConfig) -> String {
        let w = |(a, b): (i32, i32)| format!("({a},{b})");
        match self {
            Dep::CatEvent => format!("CAT{}", w(cfg.windows.event)),
            Dep::CatShort => format!("CAT{}", w(cfg.windows.short)),
            Dep::CatLong => format!("CAT{}", w(cfg.windows.long)),
            Dep::CarEvent => format!("CAR{}", w(cfg.windows.event)),
            Dep::CarShort => format!("CAR{}", w(cfg.windows.short)),
            Dep::CarLong => format!("CAR{}", w(cfg.windows.long)),
            Dep::CastEvent => format!("CAST{}", w(cfg.windows.event)),
        }
    }

    fn value(self, ev: &EventRecord) -> f64 {
        match self {
            Dep::CatEvent => ev.cat[1],
            Dep::CatShort => ev.cat[2],
            Dep::CatLong => ev.cat[3],
            Dep::CarEvent => ev.controls.car_event,
            Dep::CarShort => ev.controls.car_short,
            Dep::CarLong => ev.controls.car_long,
            Dep::CastEvent => ev.controls.cast_event.expect("sample filtered"),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Reg {
    Rcat,
    Nwrcat,
    Nprcat,
    AbsRcat,
    AbsNwrcat,
    AbsNprcat,
    Sue,
    SueNeg,
    SueXNeg,
    Eprlm,
    Eprgwp,
    Eclm,
    Ecgwp,
    AbsEprlm,
    AbsEprgwp,
    AbsEclm,
    AbsEcgwp,
    CatPre,
    CatEvent,
    CarPre,
    CarEvent,
    CastPre,
    AbsCarPre,
    Roa,
    AbsRoa,
    LogBm,
    LogM,
}

impl Reg {
    fn label(self, cfg: &StudyConfig) -> String {
        let pre = || {
            let (a, b) = cfg.windows.pre;
            format!("({a},{b})")
        };
        let event = || {
            let (a, b) = cfg.windows.event;
            format!("({a},{b})")
        };
        match self {
            Reg::Rcat => format!("RCAT{}", event()),
            Reg::Nwrcat => format!("NWRCAT{}", event()),
            Reg::Nprcat => format!("NPRCAT{}", event()),
            Reg::AbsRcat => format!("|RCAT{}|", event()),
            Reg::AbsNwrcat => format!("|NWRCAT{}|", event()),
            Reg::AbsNprcat => format!("|NPRCAT{}|", event()),
            Reg::Sue => "SUE".into(),
            Reg::SueNeg => "I[SUE<0]".into(),
            Reg::SueXNeg => "SUE x I[SUE<0]".into(),
            Reg::Eprlm => "EPRLM".into(),
            Reg::Eprgwp => "EPRGWP".into(),
            Reg::Eclm => "ECLM".into(),
            Reg::Ecgwp => "ECGWP".into(),
            Reg::AbsEprlm => "|EPRLM|".into(),
            Reg::AbsEprgwp => "|EPRGWP|".into(),
            Reg::AbsEclm => "|ECLM|".into(),
            Reg::AbsEcgwp => "|ECGWP|".into(),
            Reg::CatPre => format!("CAT{}", pre()),
            Reg::CatEvent => format!("CAT{}", event()),
            Reg::CarPre => format!("CAR{}", pre()),
            Reg::CarEvent => format!("CAR{}", event()),
            Reg::CastPre => format!("CAST{}", pre()),
            Reg::AbsCarPre => format!("|CAR{}|", pre()),
            Reg::Roa => "ROA".into(),
            Reg::AbsRoa => "|ROA|".into(),
            Reg::LogBm => "log(B/M)".into(),
            Reg::LogM => "log(M)".into(),
        }
    }

    /// `w` carries the winsorized (sue, roa, log_bm, log_m) for the event.
    fn value(self, ev: &EventRecord, w: &[f64; 4]) -> f64 {
        let c = &ev.controls;
        let need = |v: Option<f64>| v.expect("sample filtered");
        match self {
            Reg::Rcat => need(ev.rcat),
            Reg::Nwrcat => need(ev.nwrcat),
            Reg::Nprcat => need(ev.nprcat),
            Reg::AbsRcat => need(ev.rcat).abs(),
            Reg::AbsNwrcat => need(ev.nwrcat).abs(),
            Reg::AbsNprcat => need(ev.nprcat).abs(),
            Reg::Sue => w[0],
            Reg::SueNeg => (w[0] < 0.0) as u8 as f64,
            Reg::SueXNeg => w[0] * (w[0] < 0.0) as u8 as f64,
            Reg::Eprlm => need(c.eprlm),
            Reg::Eprgwp => need(c.eprgwp),
            Reg::Eclm => need(c.eclm),
            Reg::Ecgwp => need(c.ecgwp),
            Reg::AbsEprlm => need(c.eprlm).abs(),
            Reg::AbsEprgwp => need(c.eprgwp).abs(),
            Reg::AbsEclm => need(c.eclm).abs(),
            Reg::AbsEcgwp => need(c.ecgwp).abs(),
            Reg::CatPre => ev.cat[0],
            Reg::CatEvent => ev.cat[1],
            Reg::CarPre => c.car_pre,
            Reg::CarEvent => c.car_event,
            Reg::CastPre => need(c.cast_pre),
            Reg::AbsCarPre => c.car_pre.abs(),
            Reg::Roa => w[1],
            Reg::AbsRoa => w[1].abs(),
            Reg::LogBm => w[2],
            Reg::LogM => w[3],
        }
    }
}

struct ColumnSpec {
    dep: Dep,
    regs: Vec<Reg>,
    wald: Option<(Reg, Reg)>,
}

struct TableSpec {
    id: &'static str,
    title: &'static str,
    columns: Vec<ColumnSpec>,
    needs_split: bool,
    needs_cast: bool,
    needs_rcat: bool,
}

const CONTROLS: [Reg; 3] = [Reg::Sue, Reg::SueNeg, Reg::SueXNeg];
const TONES: [Reg; 4] = [Reg::Eprlm, Reg::Eprgwp, Reg::Eclm, Reg::Ecgwp];
const TAIL: [Reg; 3] = [Reg::Roa, Reg::LogBm, Reg::LogM];

fn concat(parts: &[&[Reg]]) -> Vec<Reg> {
    parts.iter().flat_map(|p| p.iter().copied()).collect()
}

fn spec_for(id: &str) -> Option<TableSpec> {
    match id {
        "T3" => Some(TableSpec {
            id: "T3",
            title: "Abnormal tone drivers",
            columns: vec![
                ColumnSpec {
                    dep: Dep::CatEvent,
                    regs: concat(&[&CONTROLS, &TONES, &[Reg::CatPre, Reg::CarPre], &TAIL]),
                    wald: None,
                },
                ColumnSpec {
                    dep: Dep::CatShort,
                    regs: concat(&[
                        &CONTROLS,
                        &TONES,
                        &[Reg::CatPre, Reg::CatEvent, Reg::CarEvent],
                        &TAIL,
                    ]),
                    wald: None,
                },
                ColumnSpec {
                    dep: Dep::CatLong,
                    regs: concat(&[
                        &CONTROLS,
                        &TONES,
                        &[Reg::CatPre, Reg::CatEvent, Reg::CarEvent],
                        &TAIL,
                    ]),
                    wald: None,
                },
            ],
            needs_split: false,
            needs_cast: false,
            needs_rcat: false,
        }),
        "T4" => Some(TableSpec {
            id: "T4",
            title: "Abnormal returns on residual tone",
            columns: vec![
                ColumnSpec {
                    dep: Dep::CarEvent,
                    regs: concat(&[&[Reg::Rcat], &CONTROLS, &TONES, &[Reg::CarPre], &TAIL]),
                    wald: None,
                },
                ColumnSpec {
                    dep: Dep::CarShort,
                    regs: concat(&[&[Reg::Rcat], &CONTROLS, &TONES, &[Reg::CarEvent], &TAIL]),
                    wald: None,
                },
                ColumnSpec {
                    dep: Dep::CarLong,
                    regs: concat(&[&[Reg::Rcat], &CONTROLS, &TONES, &[Reg::CarEvent], &TAIL]),
                    wald: None,
                },
            ],
            needs_split: false,
            needs_cast: false,
            needs_rcat: true,
        }),
        "T5" => Some(TableSpec {
            id: "T5",
            title: "Abnormal returns on source-specific residual tone",
            columns: vec![
                ColumnSpec {
                    dep: Dep::CarEvent,
                    regs: concat(&[
                        &[Reg::Nwrcat, Reg::Nprcat],
                        &CONTROLS,
                        &TONES,
                        &[Reg::CarPre],
                        &TAIL,
                    ]),
                    wald: Some((Reg::Nwrcat, Reg::Nprcat)),
                },
                ColumnSpec {
                    dep: Dep::CarShort,
                    regs: concat(&[
                        &[Reg::Nwrcat, Reg::Nprcat],
                        &CONTROLS,
                        &TONES,
                        &[Reg::CarEvent],
                        &TAIL,
                    ]),
                    wald: Some((Reg::Nwrcat, Reg::Nprcat)),
                },
                ColumnSpec {
                    dep: Dep::CarLong,
                    regs: concat(&[
                        &[Reg::Nwrcat, Reg::Nprcat],
                        &CONTROLS,
                        &TONES,
                        &[Reg::CarEvent],
                        &TAIL,
                    ]),
                    wald: Some((Reg::Nwrcat, Reg::Nprcat)),
                },
            ],
            needs_split: true,
            needs_cast: false,
            needs_rcat: true,
        }),
        "T6" => {
            let controls = concat(&[
                &CONTROLS,
                &[Reg::AbsEprlm, Reg::AbsEprgwp, Reg::AbsEclm, Reg::AbsEcgwp],
                &[Reg::CastPre, Reg::AbsCarPre, Reg::AbsRoa, Reg::LogBm, Reg::LogM],
            ]);
            let mut col1 = vec![Reg::AbsRcat];
            col1.extend(&controls);
            let mut col2 = vec![Reg::AbsNwrcat, Reg::AbsNprcat];
            col2.extend(&controls);
            Some(TableSpec {
                id: "T6",
                title: "Abnormal turnover on residual tone magnitude",
                columns: vec![
                    ColumnSpec { dep: Dep::CastEvent, regs: col1, wald: None },
                    ColumnSpec {
                        dep: Dep::CastEvent,
                        regs: col2,
                        wald: Some((Reg::AbsNwrcat, Reg::AbsNprcat)),
                    },
                ],
                needs_split: true,
                needs_cast: true,
                needs_rcat: true,
            })
        }
        _ => None,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoefCell {
    pub name: String,
    pub coef: Option<f64>,
    pub se: Option<f64>,
    pub p: Option<f64>,
    pub stars: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct ColumnResult {
    pub dep: String,
    pub regressors: Vec<String>,
    pub fixed_effects: [&'static str; 2],
    pub cluster_dims: [&'static str; 2],
    pub cells: Vec<CoefCell>,
    pub n: usize,
    pub n_firms: usize,
    pub n_quarters: usize,
    pub r2: f64,
    pub dropped: Vec<String>,
    /// Wald statistic and p-value for equality of the two lead coefficients.
    pub wald: Option<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableResult {
    pub id: String,
    pub title: String,
    pub columns: Vec<ColumnResult>,
}

fn sample<'a>(events: &'a [EventRecord], spec: &TableSpec) -> Vec<&'a EventRecord> {
    events
        .iter()
        .filter(|e| !spec.needs_rcat || e.rcat.is_some())
        .filter(|e| !spec.needs_split || (e.nwrcat.is_some() && e.nprcat.is_some()))
        .filter(|e| !spec.needs_cast || (e.controls.cast_pre.is_some() && e.controls.cast_event.is_some()))
        .collect()
}

fn firm_ids(sample: &[&EventRecord]) -> Vec<u32> {
    let mut firms: Vec<&str> = sample.iter().map(|e| e.firm.as_str()).collect();
    firms.sort_unstable();
    firms.dedup();
    let index: std::collections::BTreeMap<&str, u32> =
        firms.iter().enumerate().map(|(i, f)| (*f, i as u32)).collect();
    sample.iter().map(|e| index[e.firm.as_str()]).collect()
}

pub fn run_table(id: &str, events: &[EventRecord], cfg: &StudyConfig) -> Result<TableResult> {
    let spec = spec_for(id)
        .ok_or_else(|| CliError::validation(format!("unknown table id {id}")))?;
    let rows = sample(events, &spec);
    if rows.is_empty() {
        return Err(CliError::estimation(format!("{id}: no qualifying events")));
    }
    let wins = winsorized_controls(&rows, cfg.winsor_lo, cfg.winsor_hi);
    let firms = firm_ids(&rows);

    let mut columns = Vec::new();
    for col in &spec.columns {
        let names: Vec<String> = col.regs.iter().map(|r| r.label(cfg)).collect();
        let mut table = PanelTable::new(names.clone());
        for ((ev, w), firm) in rows.iter().zip(&wins).zip(&firms) {
            let x: Vec<f64> = col.regs.iter().map(|r| r.value(ev, w)).collect();
            if x.iter().any(|v| !v.is_finite()) {
                return Err(CliError::validation(format!(
                    "{id}: non-finite regressor for {}",
                    ev.event_id
                )));
            }
            table.push(col.dep.value(ev), x, *firm, ev.quarter);
        }
        let fit = fe_ols(&table)
            .map_err(|e| CliError::estimation(format!("{id} {}: {e}", col.dep.label(cfg))))?;
        let cov = dcluster_cov(&fit, &fit.firms.clone(), &fit.quarters.clone())
            .map_err(|e| CliError::estimation(format!("{id} {}: {e}", col.dep.label(cfg))))?;
        let cells = coef_cells(&names, &fit.coef, &cov);
        let wald = match col.wald {
            Some((a, b)) => Some(
                wald_equal(&fit, &cov, &a.label(cfg), &b.label(cfg)).map_err(|e| {
                    CliError::estimation(format!("{id} Wald: {e}"))
                })?,
            ),
            None => None,
        };
        columns.push(ColumnResult {
            dep: col.dep.label(cfg),
            regressors: names,
            fixed_effects: ["firm", "year-quarter"],
            cluster_dims: ["firm", "year-quarter"],
            cells,
            n: fit.n,
            n_firms: fit.n_firms,
            n_quarters: fit.n_quarters,
            r2: fit.r2,
            dropped: fit.dropped.clone(),
            wald,
        });
    }
    Ok(TableResult { id: spec.id.into(), title: spec.title.into(), columns })
}

fn coef_cells(names: &[String], coef: &[Option<f64>], cov: &Mat) -> Vec<CoefCell> {
    names
        .iter()
        .enumerate()
        .map(|(i, name)| match coef[i] {
            Some(b) => {
                let var = cov.at(i, i);
                if var > 0.0 {
                    let se = var.sqrt();
                    let p = two_sided_p(b / se);
                    CoefCell { name: name.clone(), coef: Some(b), se: Some(se), p: Some(p), stars: stars(p) }
                } else {
                    CoefCell { name: name.clone(), coef: Some(b), se: None, p: None, stars: "" }
                }
            }
            None => CoefCell { name: name.clone(), coef: None, se: None, p: None, stars: "" },
        })
        .collect()
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0.000".into();
    }
    let a = v.abs();
    if a >= 0.001 && a < 10000.0 {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

/// Paper-style text layout: per regressor a coefficient line and a
/// parenthesized standard-error line, then the panel summary block.
pub fn render_text(result: &TableResult, cfg: &StudyConfig) -> String {
    let mut row_names: Vec<String> = Vec::new();
    for col in &result.columns {
        for cell in &col.cells {
            if !row_names.contains(&cell.name) {
                row_names.push(cell.name.clone());
            }
        }
    }
    let label_w = row_names.iter().map(|n| n.len()).max().unwrap_or(0).max(12);
    let col_w = 14;

    let mut out = String::new();
    out.push_str(&format!("{}: {}\n", result.id, result.title));
    let _ = cfg;
    out.push_str(&format!("{:label_w$}", ""));
    for col in &result.columns {
        out.push_str(&format!("{:>col_w$}", col.dep));
    }
    out.push('\n');
    let rule_len = label_w + col_w * result.columns.len();
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');

    for name in &row_names {
        out.push_str(&format!("{name:label_w$}"));
        let mut se_line = format!("{:label_w$}", "");
        for col in &result.columns {
            let cell = col.cells.iter().find(|c| c.name == *name);
            match cell {
                Some(c) => match (c.coef, c.se) {
                    (Some(b), Some(se)) => {
                        out.push_str(&format!("{:>col_w$}", format!("{}{}", fmt_num(b), c.stars)));
                        se_line.push_str(&format!("{:>col_w$}", format!("({})", fmt_num(se))));
                    }
                    (Some(b), None) => {
                        out.push_str(&format!("{:>col_w$}", fmt_num(b)));
                        se_line.push_str(&format!("{:>col_w$}", "(.)"));
                    }
                    (None, _) => {
                        out.push_str(&format!("{:>col_w$}", "dropped"));
                        se_line.push_str(&format!("{:>col_w$}", ""));
                    }
                },
                None => {
                    out.push_str(&format!("{:>col_w$}", ""));
                    se_line.push_str(&format!("{:>col_w$}", ""));
                }
            }
        }
        out.push('\n');
        out.push_str(se_line.trim_end());
        out.push('\n');
    }

    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    let summary_rows: Vec<(&str, Box<dyn Fn(&ColumnResult) -> String>)> = vec![
        ("Firm FE", Box::new(|_| "Yes".into())),
        ("Year-quarter FE", Box::new(|_| "Yes".into())),
        ("Observations", Box::new(|c: &ColumnResult| c.n.to_string())),
        ("R2 (x100)", Box::new(|c: &ColumnResult| format!("{:.1}", c.r2 * 100.0))),
    ];
    for (label, f) in &summary_rows {
        out.push_str(&format!("{label:label_w$}"));
        for col in &result.columns {
            out.push_str(&format!("{:>col_w$}", f(col)));
        }
        out.push('\n');
    }
    if result.columns.iter().any(|c| c.wald.is_some()) {
        out.push_str(&format!("{:label_w$}", "Wald equal"));
        for col in &result.columns {
            match col.wald {
                Some((w, p)) => out.push_str(&format!(
                    "{:>col_w$}",
                    format!("{:.2} (p={:.2})", w, p)
                )),
                None => out.push_str(&format!("{:>col_w$}", "")),
            }
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
pub struct TableCsvRow {
    pub table: String,
    pub column: usize,
    pub dep: String,
    pub regressor: String,
    pub coef: Option<f64>,
    pub se: Option<f64>,
    pub p: Option<f64>,
    pub stars: String,
}

pub fn csv_rows(result: &TableResult) -> Vec<TableCsvRow> {
    let mut rows = Vec::new();
    for (ci, col) in result.columns.iter().enumerate() {
        for cell in &col.cells {
            rows.push(TableCsvRow {
                table: result.id.clone(),
                column: ci + 1,
                dep: col.dep.clone(),
                regressor: cell.name.clone(),
                coef: cell.coef,
                se: cell.se,
                p: cell.p,
                stars: cell.stars.to_string(),
            });
        }
    }
    rows
}
