//! Trading calendar and event-relative time.
//!
//! Dates are days since the Unix epoch (i32); the calendar is the sorted list
//! of trading days supplied as input. Event time τ counts positions in this
//! list, so weekends and holidays never occupy a τ slot.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CalendarError {
    Empty,
    NotSortedUnique,
    /// The event date is not a trading day in the calendar.
    NotTradingDay,
}

impl core::fmt::Display for CalendarError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CalendarError::Empty => write!(f, "calendar is empty"),
            CalendarError::NotSortedUnique => write!(f, "calendar days not strictly increasing"),
            CalendarError::NotTradingDay => write!(f, "event date is not a trading day"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TradingCalendar {
    days: Vec<i32>,
}

impl TradingCalendar {
    pub fn new(days: Vec<i32>) -> Result<Self, CalendarError> {
        if days.is_empty() {
            return Err(CalendarError::Empty);
        }
        if days.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CalendarError::NotSortedUnique);
        }
        Ok(TradingCalendar { days })
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    pub fn days(&self) -> &[i32] {
        &self.days
    }

    /// Position of an exact trading day.
    pub fn position(&self, day: i32) -> Option<usize> {
        self.days.binary_search(&day).ok()
    }

    pub fn day_at(&self, pos: usize) -> Option<i32> {
        self.days.get(pos).copied()
    }

    /// Position of the first trading day on or after `day` (documents
    /// published on non-trading days roll forward to it).
    pub fn roll_forward(&self, day: i32) -> Option<usize> {
        match self.days.binary_search(&day) {
            Ok(p) => Some(p),
            Err(p) if p < self.days.len() => Some(p),
            Err(_) => None,
        }
    }
}

/// Re-keys a trading-day series to event time: τ = position(date) −
/// position(event). Dates outside the calendar cannot receive a τ and are
/// skipped; missing dates stay missing.
pub fn align_relative<V: Clone>(
    series: &BTreeMap<i32, V>,
    cal: &TradingCalendar,
    event_day: i32,
) -> Result<BTreeMap<i32, V>, CalendarError> {
    let event_pos = cal.position(event_day).ok_or(CalendarError::NotTradingDay)? as i64;
    let mut out = BTreeMap::new();
    for (&day, v) in series {
        if let Some(pos) = cal.position(day) {
            out.insert((pos as i64 - event_pos) as i32, v.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn cal() -> TradingCalendar {
        TradingCalendar::new(vec![0, 1, 2, 5, 6, 7, 8, 9, 12, 13]).unwrap()
    }

    #[test]
    fn construction_validates() {
        assert!(matches!(TradingCalendar::new(vec![]), Err(CalendarError::Empty)));
        assert!(matches!(
            TradingCalendar::new(vec![3, 3]),
            Err(CalendarError::NotSortedUnique)
        ));
        assert!(matches!(
            TradingCalendar::new(vec![5, 4]),
            Err(CalendarError::NotSortedUnique)
        ));
    }

    #[test]
    fn positions_and_roll_forward() {
        let c = cal();
        assert_eq!(c.position(7), Some(5));
        assert_eq!(c.position(3), None);
        assert_eq!(c.roll_forward(3), Some(3));
        assert_eq!(c.day_at(3), Some(5));
        assert_eq!(c.roll_forward(13), Some(9));
        assert_eq!(c.roll_forward(14), None);
    }

    #[test]
    fn tau_counts_trading_days_across_gaps() {
        let c = cal();
        let mut s = BTreeMap::new();
        s.insert(5, 10.0);
        s.insert(7, 20.0);
        s.insert(12, 30.0);
        let a = align_relative(&s, &c, 7).unwrap();
        assert_eq!(a.get(&-2), Some(&10.0));
        assert_eq!(a.get(&0), Some(&20.0));
        assert_eq!(a.get(&3), Some(&30.0));
        assert_eq!(a.len(), 3);
    }

    #[test]
    fn event_must_be_trading_day() {
        let c = cal();
        let s: BTreeMap<i32, f64> = BTreeMap::new();
        assert!(matches!(align_relative(&s, &c, 4), Err(CalendarError::NotTradingDay)));
    }

    #[test]
    fn out_of_calendar_dates_skipped() {
        let c = cal();
        let mut s = BTreeMap::new();
        s.insert(4, 1.0);
        let a = align_relative(&s, &c, 7).unwrap();
        assert!(a.is_empty());
    }
}
