//! Calendar dates as days-from-CE integers, the unit every core routine
//! counts trading days in.

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};

use crate::{CliError, Result};

/// Parses `YYYY-MM-DD` into a day number.
pub fn parse_date(s: &str) -> Result<i32> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map(|d| d.num_days_from_ce())
        .map_err(|e| CliError::validation(format!("bad date {s:?}: {e}")))
}

/// Parses `YYYY-MM-DDTHH:MM:SS` into (day number, seconds into the day).
pub fn parse_timestamp(s: &str) -> Result<(i32, u32)> {
    let dt = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S")
        .map_err(|e| CliError::validation(format!("bad timestamp {s:?}: {e}")))?;
    Ok((dt.date().num_days_from_ce(), dt.time().num_seconds_from_midnight()))
}

pub fn date_string(day: i32) -> String {
    NaiveDate::from_num_days_from_ce_opt(day)
        .expect("day number out of calendar range")
        .format("%Y-%m-%d")
        .to_string()
}

/// Year-quarter index: 4*year + zero-based quarter. Orders chronologically.
pub fn quarter_of(day: i32) -> u32 {
    let d = NaiveDate::from_num_days_from_ce_opt(day).expect("day number out of calendar range");
    d.year() as u32 * 4 + (d.month0() / 3)
}

pub fn quarter_label(q: u32) -> String {
    format!("{}Q{}", q / 4, q % 4 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_dates() {
        let d = parse_date("2006-03-14").unwrap();
        assert_eq!(date_string(d), "2006-03-14");
    }

    #[test]
    fn timestamps_order_within_day() {
        let (d1, s1) = parse_timestamp("2006-03-14T09:30:00").unwrap();
        let (d2, s2) = parse_timestamp("2006-03-14T16:00:00").unwrap();
        assert_eq!(d1, d2);
        assert!(s1 < s2);
    }

    #[test]
    fn quarters_index_chronologically() {
        let q1 = quarter_of(parse_date("2006-03-31").unwrap());
        let q2 = quarter_of(parse_date("2006-04-01").unwrap());
        assert_eq!(q2, q1 + 1);
        assert_eq!(quarter_label(q1), "2006Q1");
        assert_eq!(quarter_label(q2), "2006Q2");
    }

    #[test]
    fn rejects_malformed() {
        assert!(parse_date("2006/03/14").is_err());
        assert!(parse_timestamp("2006-03-14 09:30:00").is_err());
    }
}
