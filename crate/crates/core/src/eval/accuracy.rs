use std::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::Entity;
use crate::diagnostic::Diagnostic;
use crate::timeline::{EntityBundle, EntitySpan, Timeline};

pub const GOLD_SCHEMA: &str = "heart-gold/1";

/// Expected placements for one document. Entries name bundles by the surface
/// and start offset of their root entity; columns are named by cluster label
/// (the TIMEX3 surface, or `DCT`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GoldPlacement {
    pub schema: String,
    #[serde(default)]
    pub doc_id: String,
    pub entries: Vec<GoldEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GoldEntry {
    pub surface: String,
    pub start: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<GoldSpan>,
    /// Present only for bundles whose changes are judged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub changes: Option<Vec<GoldChange>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GoldSpan {
    pub begin: String,
    pub end: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GoldChange {
    pub change: String,
    #[serde(default, rename = "ref", skip_serializing_if = "Option::is_none")]
    pub ref_surface: Option<String>,
}

impl GoldPlacement {
    pub fn from_json(json: &str) -> Result<Self, String> {
        let gold: GoldPlacement = serde_json::from_str(json).map_err(|e| format!("invalid gold JSON: {e}"))?;
        if gold.schema != GOLD_SCHEMA {
            return Err(format!("unsupported schema `{}` (expected {GOLD_SCHEMA})", gold.schema));
        }
        Ok(gold)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("gold serializes");
        out.push('\n');
        out
    }

    /// Gold describing `timeline` exactly as placed; a starting point for
    /// hand review. Changes are recorded only for bundles that have any.
    pub fn from_timeline(timeline: &Timeline) -> Self {
        let entries = timeline
            .bundles
            .iter()
            .filter_map(|bundle| {
                let root = timeline.entity(&bundle.root_id)?;
                let span = timeline.span_of(&bundle.root_id)?;
                let (begin, end) = span_labels(timeline, span);
                let changes = observed_changes(timeline, bundle);
                Some(GoldEntry {
                    surface: root.surface.clone(),
                    start: root.span.start,
                    onset: Some(begin.clone()),
                    span: Some(GoldSpan { begin, end }),
                    changes: (!changes.is_empty()).then_some(changes),
                })
            })
            .collect();
        GoldPlacement {
            schema: GOLD_SCHEMA.to_string(),
            doc_id: timeline.doc_id.clone(),
            entries,
        }
    }
}

/// Correct out of judged, one axis of the report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Score {
    pub correct: usize,
    pub total: usize,
}

impl Score {
    fn record(&mut self, ok: bool) {
        self.total += 1;
        self.correct += usize::from(ok);
    }

    pub fn ratio(&self) -> Option<f64> {
        (self.total > 0).then(|| self.correct as f64 / self.total as f64)
    }
}

impl std::ops::Add for Score {
    type Output = Score;

    fn add(self, other: Score) -> Score {
        Score {
            correct: self.correct + other.correct,
            total: self.total + other.total,
        }
    }
}

/// `18/20 (90.0%)`, `15/15 (100%)`, or `---` when nothing was judged.
impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ratio() {
            None => f.write_str("---"),
            Some(r) if self.correct == self.total => {
                write!(f, "{}/{} ({}%)", self.correct, self.total, (r * 100.0) as u32)
            }
            Some(r) => write!(f, "{}/{} ({:.1}%)", self.correct, self.total, r * 100.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityVerdict {
    pub surface: String,
    pub start: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle_root_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub onset: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub change_info: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AccuracyReport {
    pub onset: Score,
    pub duration: Score,
    pub change_info: Score,
    pub verdicts: Vec<EntityVerdict>,
    pub diagnostics: Vec<Diagnostic>,
}

fn label_at(timeline: &Timeline, index: usize) -> String {
    timeline
        .cluster_at(index)
        .map_or_else(String::new, |c| c.anchor_label.clone())
}

fn span_labels(timeline: &Timeline, span: &EntitySpan) -> (String, String) {
    (
        label_at(timeline, span.begin_cluster),
        label_at(timeline, span.end_cluster),
    )
}

fn observed_changes(timeline: &Timeline, bundle: &EntityBundle) -> Vec<GoldChange> {
    let surface = |id: &str| timeline.entity(id).map(|e: &Entity| e.surface.clone());
    let mut out: Vec<GoldChange> = bundle
        .changes
        .iter()
        .filter_map(|c| {
            Some(GoldChange {
                change: surface(&c.change_id)?,
                ref_surface: c.ref_id.as_deref().and_then(surface),
            })
        })
        .collect();
    out.sort();
    out
}

/// Score a timeline against gold placements.
///
/// Each gold entry is judged on the axes it specifies: OnSet compares the
/// label of the span's first column, Duration both end labels, ChangeInfo the
/// sorted (change surface, reference surface) pairs. An entry naming no
/// bundle counts as wrong on every axis it specifies.
pub fn placement_accuracy(timeline: &Timeline, gold: &GoldPlacement) -> AccuracyReport {
    let mut report = AccuracyReport {
        onset: Score::default(),
        duration: Score::default(),
        change_info: Score::default(),
        verdicts: Vec::new(),
        diagnostics: Vec::new(),
    };
    for entry in &gold.entries {
        let bundle = timeline.bundles.iter().find(|b| {
            timeline
                .entity(&b.root_id)
                .is_some_and(|e| e.surface == entry.surface && e.span.start == entry.start)
        });
        let placed = bundle.and_then(|b| Some((b, timeline.span_of(&b.root_id)?)));
        if placed.is_none() {
            let msg = format!(
                "gold entry `{}` at {} matches no bundle root",
                entry.surface, entry.start
            );
            report
                .diagnostics
                .push(Diagnostic::warning("gold.unresolved", msg).at(entry.start));
        }
        let labels = placed.map(|(_, span)| span_labels(timeline, span));

        let onset = entry
            .onset
            .as_ref()
            .map(|want| labels.as_ref().is_some_and(|(b, _)| b == want));
        let duration = entry
            .span
            .as_ref()
            .map(|want| labels.as_ref().is_some_and(|(b, e)| *b == want.begin && *e == want.end));
        let change_info = entry.changes.as_ref().map(|want| {
            let mut want = want.clone();
            want.sort();
            placed.is_some_and(|(b, _)| observed_changes(timeline, b) == want)
        });
        if let Some(ok) = onset {
            report.onset.record(ok);
        }
        if let Some(ok) = duration {
            report.duration.record(ok);
        }
        if let Some(ok) = change_info {
            report.change_info.record(ok);
        }
        report.verdicts.push(EntityVerdict {
            surface: entry.surface.clone(),
            start: entry.start,
            bundle_root_id: placed.map(|(b, _)| b.root_id.clone()),
            onset,
            duration,
            change_info,
        });
    }
    report
}

/// Plain-text table with one line per named report plus a header.
pub fn format_table(rows: &[(&str, &AccuracyReport)]) -> String {
    let name_width = rows.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max(8);
    let cells: Vec<[String; 3]> = rows
        .iter()
        .map(|(_, r)| [r.onset.to_string(), r.duration.to_string(), r.change_info.to_string()])
        .collect();
    let headers = ["OnSet", "Duration", "ChangeInfo"];
    let widths: Vec<usize> = (0..3)
        .map(|i| {
            cells
                .iter()
                .map(|c| c[i].len())
                .chain([headers[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = format!("{:name_width$}", "");
    for (h, w) in headers.iter().zip(&widths) {
        out.push_str(&format!("  {h:>w$}"));
    }
    out.push('\n');
    for ((name, _), row) in rows.iter().zip(&cells) {
        out.push_str(&format!("{name:name_width$}"));
        for (cell, w) in row.iter().zip(&widths) {
            out.push_str(&format!("  {cell:>w$}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::parse_document;
    use crate::timeline::build_timeline;

    #[test]
    fn score_formatting() {
        assert_eq!(Score { correct: 18, total: 20 }.to_string(), "18/20 (90.0%)");
        assert_eq!(Score { correct: 15, total: 17 }.to_string(), "15/17 (88.2%)");
        assert_eq!(Score { correct: 15, total: 15 }.to_string(), "15/15 (100%)");
        assert_eq!(Score { correct: 1, total: 2 }.to_string(), "1/2 (50.0%)");
        assert_eq!(Score::default().to_string(), "---");
    }

    fn sample() -> Timeline {
        build_timeline(
            &parse_document(
                concat!(
                    r#"<doc id="r1" dct="2021-04-01"><timex3 id="t0" type="date">2020-10-01</timex3> prior <d id="d0" rel="timeOn:t0">nodule</d>. "#,
                    r#"Now the <d id="d1">nodule</d> has <c id="c1" rel="changeSbj:d1;changeRef:d0">enlarged</c>. "#,
                    r#"<m-key id="k" rel="timeBegin:t0">aspirin</m-key></doc>"#
                ),
                None,
            )
            .unwrap(),
        )
    }

    #[test]
    fn self_gold_is_perfect() {
        let tl = sample();
        let gold = GoldPlacement::from_timeline(&tl);
        assert_eq!(gold.entries.len(), 3);
        let r = placement_accuracy(&tl, &gold);
        assert_eq!(r.onset, Score { correct: 3, total: 3 });
        assert_eq!(r.duration, Score { correct: 3, total: 3 });
        assert_eq!(r.change_info, Score { correct: 1, total: 1 });
        assert!(r.diagnostics.is_empty());
        assert_eq!(GoldPlacement::from_json(&gold.to_json()).unwrap(), gold);
    }

    #[test]
    fn perturbed_onset_drops_one() {
        let tl = sample();
        let mut gold = GoldPlacement::from_timeline(&tl);
        gold.entries[0].onset = Some("DCT".into());
        let r = placement_accuracy(&tl, &gold);
        assert_eq!(r.onset, Score { correct: 2, total: 3 });
        assert_eq!(r.duration.correct, 3);
    }

    #[test]
    fn unknown_reference_is_wrong_with_diagnostic() {
        let tl = sample();
        let mut gold = GoldPlacement::from_timeline(&tl);
        gold.entries[0].start += 1;
        let r = placement_accuracy(&tl, &gold);
        assert_eq!(r.onset.correct, 2);
        assert_eq!(r.duration.correct, 2);
        assert_eq!(r.diagnostics[0].code, "gold.unresolved");
    }

    #[test]
    fn table_layout() {
        let a = AccuracyReport {
            onset: Score { correct: 18, total: 20 },
            duration: Score { correct: 18, total: 20 },
            change_info: Score::default(),
            verdicts: vec![],
            diagnostics: vec![],
        };
        let text = format_table(&[("Case report", &a)]);
        assert_eq!(
            text,
            "                     OnSet       Duration  ChangeInfo\nCase report  18/20 (90.0%)  18/20 (90.0%)         ---\n"
        );
    }
}
