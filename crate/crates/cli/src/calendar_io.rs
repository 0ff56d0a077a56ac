//! Trading calendar files: one ISO date per line, sorted ascending.

use std::path::Path;

use tonestudy_core::calendar::TradingCalendar;

use crate::dates::{date_string, parse_date};
use crate::{CliError, Result};

pub fn read_calendar(path: &Path) -> Result<TradingCalendar> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    let mut days = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        days.push(parse_date(line)?);
    }
    TradingCalendar::new(days)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

pub fn write_calendar(path: &Path, cal: &TradingCalendar) -> Result<()> {
    let mut out = String::new();
    for &d in cal.days() {
        out.push_str(&date_string(d));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Derives the calendar from the union of dates seen in a price panel.
pub fn calendar_from_dates(dates: impl IntoIterator<Item = i32>) -> Result<TradingCalendar> {
    let mut days: Vec<i32> = dates.into_iter().collect();
    days.sort_unstable();
    days.dedup();
    TradingCalendar::new(days).map_err(|e| CliError::validation(format!("price dates: {e}")))
}
