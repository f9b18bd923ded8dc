use std::collections::HashMap;

use super::cluster::bundle_links;
use super::{DocIndex, EntityBundle, EntitySpan, TimeCluster};
use crate::annotation::{AnnotatedDocument, DCT_ID};
use crate::diagnostic::Diagnostic;

/// One span per bundle over ordered clusters.
///
/// | links              | span                                   |
/// |--------------------|----------------------------------------|
/// | begin + end        | `[begin, end]`                         |
/// | on + end           | `[on, end]`                            |
/// | begin only         | `[begin, last]`, open end              |
/// | end only           | `[end, end]`, open start               |
/// | on                 | `[on, on]`                             |
/// | before T           | `[T-1, T-1]` (clamped), open start     |
/// | after T            | `[T+1, T+1]` (clamped), open end       |
/// | none               | the DCT cluster                        |
///
/// A begin that comes after its end collapses to the begin cluster with a
/// warning.
pub fn infer_spans(
    doc: &AnnotatedDocument,
    ordered: &[TimeCluster],
    bundles: &[EntityBundle],
) -> (Vec<EntitySpan>, Vec<Diagnostic>) {
    let index = DocIndex::new(doc);
    let position: HashMap<&str, usize> = ordered
        .iter()
        .map(|c| (c.anchor_timex_id.as_str(), c.order_index))
        .collect();
    let last = ordered.len().saturating_sub(1);
    let dct_idx = position.get(DCT_ID).copied().unwrap_or(0);
    let idx = |target: &Option<String>| target.as_deref().and_then(|t| position.get(t).copied());

    let mut spans = Vec::with_capacity(bundles.len());
    let mut diags = Vec::new();
    for bundle in bundles {
        let (links, _) = bundle_links(&index, bundle);
        let (on, begin, end) = (idx(&links.on), idx(&links.begin), idx(&links.end));
        let (before, after) = (idx(&links.before), idx(&links.after));

        let closed = |b: usize, e: usize, diags: &mut Vec<Diagnostic>| {
            if b > e {
                let msg = format!("`{}` begins after it ends; span collapsed to its begin", bundle.root_id);
                let mut d = Diagnostic::warning("span.inverted", msg);
                d.location = index.get(&bundle.root_id).map(|e| e.span.start);
                diags.push(d);
                (b, b, false, false)
            } else {
                (b, e, false, false)
            }
        };
        let (begin_cluster, end_cluster, open_start, open_end) = match (begin, on, end) {
            (Some(b), _, Some(e)) => closed(b, e, &mut diags),
            (None, Some(o), Some(e)) => closed(o, e, &mut diags),
            (Some(b), _, None) => (b, last, false, true),
            (None, None, Some(e)) => (e, e, true, false),
            (None, Some(o), None) => (o, o, false, false),
            (None, None, None) => match (before, after) {
                (Some(t), _) => {
                    let p = t.saturating_sub(1);
                    (p, p, true, false)
                }
                (None, Some(t)) => {
                    let p = (t + 1).min(last);
                    (p, p, false, true)
                }
                (None, None) => (dct_idx, dct_idx, false, false),
            },
        };
        spans.push(EntitySpan {
            bundle_root_id: bundle.root_id.clone(),
            begin_cluster,
            end_cluster,
            open_start,
            open_end,
        });
    }
    (spans, diags)
}

#[cfg(test)]
mod tests {
    use crate::annotation::parse_document;
    use crate::timeline::{build_timeline, EntitySpan, Timeline};

    fn timeline(body: &str) -> Timeline {
        build_timeline(&parse_document(&format!(r#"<doc dct="2021-04-01">{body}</doc>"#), None).unwrap())
    }

    fn span(tl: &Timeline, root: &str) -> (usize, usize, bool, bool) {
        let EntitySpan {
            begin_cluster,
            end_cluster,
            open_start,
            open_end,
            ..
        } = tl.span_of(root).unwrap().clone();
        (begin_cluster, end_cluster, open_start, open_end)
    }

    const FOUR: &str = concat!(
        r#"<timex3 id="t0" type="date">2021-01-01</timex3> <timex3 id="t1" type="date">2021-02-01</timex3> "#,
        r#"<timex3 id="t2" type="date">2021-03-01</timex3> <d id="x" rel="timeOn:t0">x</d> "#,
        r#"<d id="y" rel="timeOn:t1">y</d> <d id="z" rel="timeOn:t2">z</d> "#
    );

    #[test]
    fn begin_and_end() {
        let tl = timeline(&format!(
            r#"{FOUR}<m-key id="m1" rel="timeBegin:t0;timeEnd:t2">drug</m-key>"#
        ));
        assert_eq!(span(&tl, "m1"), (0, 2, false, false));
    }

    #[test]
    fn time_on_point() {
        let tl = timeline(FOUR);
        assert_eq!(span(&tl, "y"), (1, 1, false, false));
    }

    #[test]
    fn begin_only_runs_to_last_cluster() {
        let tl = timeline(&format!(r#"{FOUR}<r id="r1" rel="timeBegin:t1">chemo</r>"#));
        assert_eq!(tl.clusters.len(), 4);
        assert_eq!(span(&tl, "r1"), (1, 3, false, true));
    }

    #[test]
    fn end_only_before_and_after() {
        let tl = timeline(&format!(
            r#"{FOUR}<r id="r1" rel="timeEnd:t1">a</r> <r id="r2" rel="timeBefore:t0">b</r> <r id="r3" rel="timeAfter:t1">c</r> <r id="r4" rel="timeAfter:DCT">d</r>"#
        ));
        assert_eq!(span(&tl, "r1"), (1, 1, true, false));
        assert_eq!(span(&tl, "r2"), (0, 0, true, false));
        assert_eq!(span(&tl, "r3"), (2, 2, false, true));
        assert_eq!(span(&tl, "r4"), (3, 3, false, true));
    }

    #[test]
    fn inverted_span_collapses_with_warning() {
        let tl = timeline(&format!(
            r#"{FOUR}<m-key id="m1" rel="timeBegin:t2;timeEnd:t0">drug</m-key>"#
        ));
        assert_eq!(span(&tl, "m1"), (2, 2, false, false));
        assert!(tl.diagnostics.iter().any(|d| d.code == "span.inverted"));
    }

    #[test]
    fn duration_inherits_its_bounds() {
        let tl = timeline(&format!(
            r#"{FOUR}<timex3 id="p" type="duration" rel="timeBegin:t0;timeEnd:t1">for a month</timex3> <m-key id="m1" rel="timeOn:p">drug</m-key>"#
        ));
        assert_eq!(span(&tl, "m1"), (0, 1, false, false));
        assert_eq!(tl.bundle("m1").unwrap().durations, ["p"]);
        assert_eq!(tl.clusters.len(), 4);
    }

    #[test]
    fn untimed_bundle_sits_on_dct() {
        let tl = timeline(&format!(r#"{FOUR}<cc id="c" >follow-up</cc>"#));
        assert_eq!(span(&tl, "c"), (3, 3, false, false));
    }
}
