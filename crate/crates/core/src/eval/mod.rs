//! Evaluation: surface overlap between texts, structural similarity between
//! timelines, and placement accuracy against gold annotations.

mod accuracy;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::annotation::EntityKind;
use crate::diagnostic::Diagnostic;
use crate::timeline::Timeline;

pub use accuracy::{
    format_table, placement_accuracy, AccuracyReport, EntityVerdict, GoldChange, GoldEntry, GoldPlacement, GoldSpan,
    Score, GOLD_SCHEMA,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BigramOverlap {
    pub ratio: f64,
    pub shared: usize,
    pub union: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<Diagnostic>,
}

/// Whitespace tokens, lowercased, with punctuation trimmed from both ends.
pub fn tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|t| !t.is_empty())
        .collect()
}

fn bigrams(tokens: &[String]) -> HashSet<(&str, &str)> {
    tokens.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect()
}

/// Jaccard index of the word-bigram sets of two texts. A text with fewer
/// than two tokens has no bigrams; the ratio is then 0 with a warning.
pub fn bigram_overlap(a: &str, b: &str) -> BigramOverlap {
    let (ta, tb) = (tokens(a), tokens(b));
    if ta.len() < 2 || tb.len() < 2 {
        return BigramOverlap {
            ratio: 0.0,
            shared: 0,
            union: 0,
            warning: Some(Diagnostic::warning(
                "eval.short-text",
                "a text has fewer than two tokens; overlap is 0",
            )),
        };
    }
    let (ba, bb) = (bigrams(&ta), bigrams(&tb));
    let shared = ba.intersection(&bb).count();
    let union = ba.union(&bb).count();
    BigramOverlap {
        ratio: shared as f64 / union as f64,
        shared,
        union,
        warning: None,
    }
}

/// What similarity compares per bundle: dense rank of its onset column among
/// the onset columns in use, root kind, and certainty or execution state.
pub type StructuralTriple = (usize, EntityKind, Option<String>);

pub fn structural_triples(timeline: &Timeline) -> Vec<StructuralTriple> {
    let mut used: Vec<usize> = timeline.spans.iter().map(|s| s.begin_cluster).collect();
    used.sort_unstable();
    used.dedup();
    let mut triples: Vec<StructuralTriple> = timeline
        .spans
        .iter()
        .filter_map(|span| {
            let root = timeline.entity(&span.bundle_root_id)?;
            let rank = used.binary_search(&span.begin_cluster).ok()?;
            let attr = root
                .certainty
                .map(|c| c.as_str().to_string())
                .or(root.state.map(|s| s.as_str().to_string()));
            Some((rank, root.kind, attr))
        })
        .collect();
    triples.sort();
    triples
}

/// F1 over structural triples, matched greedily in column order.
/// Two empty timelines are identical (1.0).
pub fn timeline_similarity(a: &Timeline, b: &Timeline) -> f64 {
    let (ta, tb) = (structural_triples(a), structural_triples(b));
    if ta.is_empty() && tb.is_empty() {
        return 1.0;
    }
    let mut available: BTreeMap<&StructuralTriple, usize> = BTreeMap::new();
    for t in &tb {
        *available.entry(t).or_default() += 1;
    }
    let mut matched = 0usize;
    for t in &ta {
        if let Some(n) = available.get_mut(t).filter(|n| **n > 0) {
            *n -= 1;
            matched += 1;
        }
    }
    2.0 * matched as f64 / (ta.len() + tb.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::parse_document;
    use crate::timeline::build_timeline;

    fn tl(body: &str) -> Timeline {
        build_timeline(&parse_document(&format!(r#"<doc dct="2021-04-01">{body}</doc>"#), None).unwrap())
    }

    #[test]
    fn bigram_identity_and_disjointness() {
        let text = "The nodule in the left lung has grown.";
        assert_eq!(bigram_overlap(text, text).ratio, 1.0);
        assert_eq!(bigram_overlap(text, "no shared words whatsoever").ratio, 0.0);
        let short = bigram_overlap("fever", text);
        assert_eq!(short.ratio, 0.0);
        assert!(short.warning.is_some());
    }

    #[test]
    fn bigram_jaccard_by_hand() {
        // {a b, b c, c d} vs {b c, c d, d e}: 2 shared of 4.
        let o = bigram_overlap("a b c d", "B, c d e.");
        assert_eq!((o.shared, o.union), (2, 4));
        assert_eq!(o.ratio, 0.5);
    }

    #[test]
    fn similarity_identity_symmetry_and_disjoint_kinds() {
        let a =
            tl(r#"<timex3 id="t" type="date">March 1</timex3> <d id="d" rel="timeOn:t">fever</d> <r id="r">rest</r>"#);
        let b = tl(
            r#"<timex3 id="x" type="date">March 2</timex3> <d id="y" rel="timeOn:x">pyrexia</d> <r id="z">bed rest</r>"#,
        );
        assert_eq!(timeline_similarity(&a, &a), 1.0);
        assert_eq!(timeline_similarity(&a, &b), 1.0);
        let c = tl(r#"<m-key id="k">aspirin</m-key>"#);
        assert_eq!(timeline_similarity(&a, &c), 0.0);
        assert_eq!(timeline_similarity(&c, &a), 0.0);
        let d = tl(
            r#"<timex3 id="t" type="date">March 1</timex3> <d id="d" rel="timeOn:t" certainty="negative">fever</d> <r id="r">rest</r>"#,
        );
        assert_eq!(timeline_similarity(&a, &d), 0.5);
        assert_eq!(timeline_similarity(&tl(""), &tl("")), 1.0);
    }
}
