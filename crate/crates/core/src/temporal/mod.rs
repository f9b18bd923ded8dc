//! Normalization of TIMEX3 surface text into comparable anchors.

mod patterns;

use std::cmp::Ordering;
use std::fmt;

use chrono::{Datelike, Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::annotation::TimexType;

pub use patterns::{PatternTable, PatternTableError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Year,
    Month,
    Day,
}

/// A calendar date known to year, month or day precision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartialDateRepr", into = "PartialDateRepr")]
pub struct PartialDate {
    year: i32,
    month: Option<u32>,
    day: Option<u32>,
}

#[derive(Serialize, Deserialize)]
struct PartialDateRepr {
    year: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    month: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    day: Option<u32>,
    granularity: Granularity,
}

impl From<PartialDate> for PartialDateRepr {
    fn from(d: PartialDate) -> Self {
        Self {
            year: d.year,
            month: d.month,
            day: d.day,
            granularity: d.granularity(),
        }
    }
}

impl TryFrom<PartialDateRepr> for PartialDate {
    type Error = String;

    fn try_from(r: PartialDateRepr) -> Result<Self, String> {
        let date = match (r.month, r.day) {
            (None, None) => Some(PartialDate::year(r.year)),
            (Some(m), None) => PartialDate::year_month(r.year, m),
            (Some(m), Some(d)) => PartialDate::ymd(r.year, m, d),
            (None, Some(_)) => None,
        };
        let date = date.ok_or_else(|| format!("invalid partial date {}-{:?}-{:?}", r.year, r.month, r.day))?;
        if date.granularity() != r.granularity {
            return Err(format!(
                "granularity {:?} does not match the fields of {date}",
                r.granularity
            ));
        }
        Ok(date)
    }
}

impl PartialDate {
    pub fn year(year: i32) -> Self {
        Self {
            year,
            month: None,
            day: None,
        }
    }

    pub fn year_month(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self {
            year,
            month: Some(month),
            day: None,
        })
    }

    pub fn ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day).map(Self::from)
    }

    pub fn get_year(&self) -> i32 {
        self.year
    }

    pub fn get_month(&self) -> Option<u32> {
        self.month
    }

    pub fn get_day(&self) -> Option<u32> {
        self.day
    }

    pub fn granularity(&self) -> Granularity {
        match (self.month, self.day) {
            (Some(_), Some(_)) => Granularity::Day,
            (Some(_), None) => Granularity::Month,
            _ => Granularity::Year,
        }
    }

    /// First calendar day covered by this date.
    pub fn first_day(&self) -> NaiveDate {
        NaiveDate::from_ymd_opt(self.year, self.month.unwrap_or(1), self.day.unwrap_or(1))
            .expect("partial dates are validated on construction")
    }

    /// Fields down to `granularity`, for comparison.
    fn truncated(&self, granularity: Granularity) -> (i32, u32, u32) {
        match granularity {
            Granularity::Year => (self.year, 0, 0),
            Granularity::Month => (self.year, self.month.unwrap_or(0), 0),
            Granularity::Day => (self.year, self.month.unwrap_or(0), self.day.unwrap_or(0)),
        }
    }
}

impl From<NaiveDate> for PartialDate {
    fn from(d: NaiveDate) -> Self {
        Self {
            year: d.year(),
            month: Some(d.month()),
            day: Some(d.day()),
        }
    }
}

impl fmt::Display for PartialDate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}", self.year)?;
        if let Some(m) = self.month {
            write!(f, "-{m:02}")?;
        }
        if let Some(d) = self.day {
            write!(f, "-{d:02}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalendarUnit {
    Day,
    Week,
    Month,
    Year,
}

impl CalendarUnit {
    pub fn parse(word: &str) -> Option<Self> {
        let word = word.to_ascii_lowercase();
        let singular = word.strip_suffix('s').unwrap_or(&word);
        match singular {
            "day" => Some(Self::Day),
            "week" => Some(Self::Week),
            "month" => Some(Self::Month),
            "year" => Some(Self::Year),
            _ => None,
        }
    }
}

/// Offset units kept by relative anchors; weeks are folded into days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetUnit {
    Day,
    Month,
    Year,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum TimeAnchor {
    Absolute {
        date: PartialDate,
    },
    /// Signed offset from the document creation time.
    Relative {
        amount: i32,
        unit: OffsetUnit,
    },
    Duration {
        amount: u32,
        unit: CalendarUnit,
    },
    Unresolved {
        surface: String,
    },
}

impl TimeAnchor {
    pub fn absolute(date: PartialDate) -> Self {
        TimeAnchor::Absolute { date }
    }

    pub fn relative(amount: i32, unit: CalendarUnit) -> Self {
        match unit {
            CalendarUnit::Day => TimeAnchor::Relative {
                amount,
                unit: OffsetUnit::Day,
            },
            CalendarUnit::Week => TimeAnchor::Relative {
                amount: amount.saturating_mul(7),
                unit: OffsetUnit::Day,
            },
            CalendarUnit::Month => TimeAnchor::Relative {
                amount,
                unit: OffsetUnit::Month,
            },
            CalendarUnit::Year => TimeAnchor::Relative {
                amount,
                unit: OffsetUnit::Year,
            },
        }
    }

    pub fn unresolved(surface: impl Into<String>) -> Self {
        TimeAnchor::Unresolved {
            surface: surface.into(),
        }
    }

    pub fn is_duration(&self) -> bool {
        matches!(self, TimeAnchor::Duration { .. })
    }

    /// Resolve to a calendar date, if the anchor denotes one.
    ///
    /// Day offsets resolve at day granularity, month offsets at month
    /// granularity and year offsets at year granularity.
    pub fn resolve(&self, dct: NaiveDate) -> Option<PartialDate> {
        match *self {
            TimeAnchor::Absolute { date } => Some(date),
            TimeAnchor::Relative { amount, unit } => resolve_offset(amount, unit, dct),
            TimeAnchor::Duration { .. } | TimeAnchor::Unresolved { .. } => None,
        }
    }
}

fn resolve_offset(amount: i32, unit: OffsetUnit, dct: NaiveDate) -> Option<PartialDate> {
    let magnitude = amount.unsigned_abs();
    match unit {
        OffsetUnit::Day => {
            let days = Days::new(u64::from(magnitude));
            let date = if amount < 0 {
                dct.checked_sub_days(days)
            } else {
                dct.checked_add_days(days)
            };
            date.map(PartialDate::from)
        }
        OffsetUnit::Month => {
            let first = dct.with_day(1)?;
            let months = Months::new(magnitude);
            let date = if amount < 0 {
                first.checked_sub_months(months)
            } else {
                first.checked_add_months(months)
            }?;
            PartialDate::year_month(date.year(), date.month())
        }
        OffsetUnit::Year => dct.year().checked_add(amount).map(PartialDate::year),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AnchorOrder {
    Less,
    Greater,
    Equal,
    Incomparable,
}

impl AnchorOrder {
    pub fn reverse(self) -> Self {
        match self {
            AnchorOrder::Less => AnchorOrder::Greater,
            AnchorOrder::Greater => AnchorOrder::Less,
            other => other,
        }
    }
}

/// Chronological comparison at the coarsest granularity the two anchors
/// share. Equal prefixes with different granularities are `Incomparable`, as
/// are durations and unresolved anchors.
pub fn compare_anchors(a: &TimeAnchor, b: &TimeAnchor, dct: NaiveDate) -> AnchorOrder {
    let (Some(a), Some(b)) = (a.resolve(dct), b.resolve(dct)) else {
        return AnchorOrder::Incomparable;
    };
    compare_dates(&a, &b)
}

pub fn compare_dates(a: &PartialDate, b: &PartialDate) -> AnchorOrder {
    let common = a.granularity().min(b.granularity());
    match a.truncated(common).cmp(&b.truncated(common)) {
        Ordering::Less => AnchorOrder::Less,
        Ordering::Greater => AnchorOrder::Greater,
        Ordering::Equal if a.granularity() == b.granularity() => AnchorOrder::Equal,
        Ordering::Equal => AnchorOrder::Incomparable,
    }
}

/// Normalize with the built-in English rule table.
pub fn normalize_timex(surface: &str, timex_type: TimexType, dct: NaiveDate) -> TimeAnchor {
    PatternTable::english().normalize(surface, timex_type, dct)
}
