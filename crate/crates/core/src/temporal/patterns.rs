use std::path::Path;
use std::sync::OnceLock;

use chrono::{Datelike, NaiveDate};
use regex::{Captures, Regex};
use thiserror::Error;

use super::{CalendarUnit, PartialDate, TimeAnchor};
use crate::annotation::TimexType;

const ENGLISH_RULES: &str = include_str!("../../locale/en.rules");

#[derive(Debug, Error)]
pub enum PatternTableError {
    #[error("line {line}: expected `TEMPLATE => REGEX`")]
    Syntax { line: usize },
    #[error("line {line}: unknown template `{template}`")]
    Template { line: usize, template: String },
    #[error("line {line}: {source}")]
    Regex {
        line: usize,
        #[source]
        source: Box<regex::Error>,
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Template {
    Absolute,
    RelativePast,
    RelativeFuture,
    RelativeFixed(i32, CalendarUnit),
    Duration,
}

#[derive(Debug, Clone)]
struct Rule {
    template: Template,
    regex: Regex,
}

/// Ordered regex rules mapping time-expression surfaces to anchor templates.
#[derive(Debug, Clone)]
pub struct PatternTable {
    rules: Vec<Rule>,
}

impl PatternTable {
    /// The built-in English table, compiled once.
    pub fn english() -> &'static PatternTable {
        static TABLE: OnceLock<PatternTable> = OnceLock::new();
        TABLE.get_or_init(|| PatternTable::parse(ENGLISH_RULES).expect("built-in rule table is valid"))
    }

    pub fn english_source() -> &'static str {
        ENGLISH_RULES
    }

    pub fn load(path: &Path) -> Result<Self, PatternTableError> {
        let text = std::fs::read_to_string(path).map_err(|source| PatternTableError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(source: &str) -> Result<Self, PatternTableError> {
        let mut rules = Vec::new();
        for (idx, raw) in source.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (template, pattern) = trimmed.split_once("=>").ok_or(PatternTableError::Syntax { line })?;
            let template = parse_template(template.trim()).ok_or_else(|| PatternTableError::Template {
                line,
                template: template.trim().to_string(),
            })?;
            let regex = Regex::new(&format!("(?i){}", pattern.trim())).map_err(|e| PatternTableError::Regex {
                line,
                source: Box::new(e),
            })?;
            rules.push(Rule { template, regex });
        }
        Ok(Self { rules })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Only `date` and `duration` expressions are normalized; the other
    /// TIMEX3 types stay unresolved.
    pub fn normalize(&self, surface: &str, timex_type: TimexType, dct: NaiveDate) -> TimeAnchor {
        if !matches!(timex_type, TimexType::Date | TimexType::Duration) {
            return TimeAnchor::unresolved(surface);
        }
        let cleaned = clean_surface(surface);
        self.rules
            .iter()
            .filter_map(|rule| rule.regex.captures(&cleaned).map(|caps| (rule.template, caps)))
            .find_map(|(template, caps)| apply(template, &caps, dct))
            .unwrap_or_else(|| TimeAnchor::unresolved(surface))
    }
}

fn clean_surface(surface: &str) -> String {
    let words: Vec<&str> = surface.split_whitespace().collect();
    words.join(" ").trim_end_matches(['.', ',', ';', ':']).to_string()
}

fn parse_template(s: &str) -> Option<Template> {
    let words: Vec<&str> = s.split_whitespace().collect();
    match words.as_slice() {
        ["absolute"] => Some(Template::Absolute),
        ["duration"] => Some(Template::Duration),
        ["relative", "past"] => Some(Template::RelativePast),
        ["relative", "future"] => Some(Template::RelativeFuture),
        ["relative", amount, unit] => Some(Template::RelativeFixed(
            amount.parse().ok()?,
            CalendarUnit::parse(unit)?,
        )),
        _ => None,
    }
}

fn apply(template: Template, caps: &Captures<'_>, dct: NaiveDate) -> Option<TimeAnchor> {
    let group = |name: &str| caps.name(name).map(|m| m.as_str());
    match template {
        Template::Absolute => {
            let year = match group("year") {
                Some(y) => y.parse().ok()?,
                None => dct.year(),
            };
            let month = match group("month") {
                Some(m) => Some(parse_month(m)?),
                None => None,
            };
            let day = match group("day") {
                Some(d) => Some(d.parse::<u32>().ok()?),
                None => None,
            };
            let date = match (month, day) {
                (None, None) => PartialDate::year(year),
                (Some(m), None) => PartialDate::year_month(year, m)?,
                (Some(m), Some(d)) => PartialDate::ymd(year, m, d)?,
                (None, Some(_)) => return None,
            };
            Some(TimeAnchor::absolute(date))
        }
        Template::RelativePast | Template::RelativeFuture => {
            let n = group("n").map_or(Some(1), parse_count)?;
            let unit = CalendarUnit::parse(group("unit")?)?;
            let signed = i32::try_from(n).ok()?;
            let amount = if template == Template::RelativePast {
                -signed
            } else {
                signed
            };
            Some(TimeAnchor::relative(amount, unit))
        }
        Template::RelativeFixed(amount, unit) => Some(TimeAnchor::relative(amount, unit)),
        Template::Duration => {
            let amount = group("n").map_or(Some(1), parse_count)?;
            let unit = CalendarUnit::parse(group("unit")?)?;
            Some(TimeAnchor::Duration { amount, unit })
        }
    }
}

const MONTHS: [&str; 12] = [
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

fn parse_month(s: &str) -> Option<u32> {
    if let Ok(n) = s.parse::<u32>() {
        return (1..=12).contains(&n).then_some(n);
    }
    let lower = s.to_ascii_lowercase();
    let lower = if lower == "sept" { "sep".to_string() } else { lower };
    MONTHS
        .iter()
        .position(|m| *m == lower || (lower.len() == 3 && m.starts_with(&lower)))
        .map(|i| i as u32 + 1)
}

const NUMBER_WORDS: [(&str, u32); 23] = [
    ("a", 1),
    ("an", 1),
    ("one", 1),
    ("two", 2),
    ("three", 3),
    ("four", 4),
    ("five", 5),
    ("six", 6),
    ("seven", 7),
    ("eight", 8),
    ("nine", 9),
    ("ten", 10),
    ("eleven", 11),
    ("twelve", 12),
    ("thirteen", 13),
    ("fourteen", 14),
    ("fifteen", 15),
    ("sixteen", 16),
    ("seventeen", 17),
    ("eighteen", 18),
    ("nineteen", 19),
    ("twenty", 20),
    ("thirty", 30),
];

fn parse_count(s: &str) -> Option<u32> {
    if let Ok(n) = s.parse::<u32>() {
        return Some(n);
    }
    let lower = s.to_ascii_lowercase();
    NUMBER_WORDS.iter().find(|(w, _)| *w == lower).map(|(_, n)| *n)
}
