use std::collections::BTreeMap;

use super::{cluster_id_for, DocIndex, EntityBundle, TimeCluster};
use crate::annotation::{AnnotatedDocument, EntityKind, RelationKind, TimexType, DCT_ID};
use crate::diagnostic::Diagnostic;
use crate::temporal::{PartialDate, PatternTable, TimeAnchor};

/// The temporal relations that place one bundle, each reduced to a single
/// target (TIMEX3 id or `DCT`).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TemporalLinks {
    pub on: Option<String>,
    pub begin: Option<String>,
    pub end: Option<String>,
    pub before: Option<String>,
    pub after: Option<String>,
}

impl TemporalLinks {
    pub fn is_empty(&self) -> bool {
        self.targets().next().is_none()
    }

    pub fn targets(&self) -> impl Iterator<Item = &str> {
        [&self.on, &self.begin, &self.end, &self.before, &self.after]
            .into_iter()
            .filter_map(|t| t.as_deref())
    }

    /// Cluster the bundle is a member of; `None` means the DCT cluster.
    pub fn membership(&self) -> Option<&str> {
        self.on
            .as_deref()
            .or(self.begin.as_deref())
            .or(self.end.as_deref())
            .or(self.before.as_deref())
            .or(self.after.as_deref())
    }
}

fn is_duration_timex(index: &DocIndex<'_>, id: &str) -> bool {
    index
        .get(id)
        .is_some_and(|e| e.kind == EntityKind::Timex3 && e.timex_type == Some(TimexType::Duration))
}

fn is_anchor_target(index: &DocIndex<'_>, id: &str) -> bool {
    id == DCT_ID || index.get(id).is_some_and(|e| e.kind == EntityKind::Timex3)
}

/// Temporal relations of a bundle's placing member.
///
/// The placing member is the first of root, contained entities and key-value
/// partner that has any temporal relation. A `timeOn` to a duration TIMEX3 is
/// replaced by that duration's own `timeBegin`/`timeEnd` links; other links to
/// durations are ignored. Of several targets of one kind the earliest
/// mentioned is kept.
pub(crate) fn bundle_links(index: &DocIndex<'_>, bundle: &EntityBundle) -> (TemporalLinks, Vec<Diagnostic>) {
    let doc = index.doc;
    let outgoing = |source: &str| -> Vec<(RelationKind, String)> {
        let mut out = Vec::new();
        for rel in doc
            .relations
            .iter()
            .filter(|r| r.kind.is_temporal() && r.source_id == source)
        {
            if !is_anchor_target(index, &rel.target_id) {
                continue;
            }
            if !is_duration_timex(index, &rel.target_id) {
                out.push((rel.kind, rel.target_id.clone()));
                continue;
            }
            if rel.kind != RelationKind::TimeOn {
                continue;
            }
            for inner in doc.relations.iter().filter(|r| r.source_id == rel.target_id) {
                if matches!(inner.kind, RelationKind::TimeBegin | RelationKind::TimeEnd)
                    && is_anchor_target(index, &inner.target_id)
                    && !is_duration_timex(index, &inner.target_id)
                {
                    out.push((inner.kind, inner.target_id.clone()));
                }
            }
        }
        out
    };

    let Some((member, rels)) = bundle
        .core_members()
        .map(|m| (m, outgoing(m)))
        .find(|(_, rels)| !rels.is_empty())
    else {
        return (TemporalLinks::default(), Vec::new());
    };

    let mut diags = Vec::new();
    let mut pick = |kind: RelationKind| -> Option<String> {
        let mut targets: Vec<&str> = rels
            .iter()
            .filter(|(k, _)| *k == kind)
            .map(|(_, t)| t.as_str())
            .collect();
        targets.sort_by_key(|t| index.mention_key(t));
        targets.dedup();
        let chosen = targets.first()?.to_string();
        if targets.len() > 1 {
            let msg = format!("`{member}` has {} {kind} targets; `{chosen}` kept", targets.len());
            let at = index.get(member).map(|e| e.span.start);
            let mut diag = Diagnostic::warning("time.multiple-targets", msg);
            diag.location = at;
            diags.push(diag);
        }
        Some(chosen)
    };
    let links = TemporalLinks {
        on: pick(RelationKind::TimeOn),
        begin: pick(RelationKind::TimeBegin),
        end: pick(RelationKind::TimeEnd),
        before: pick(RelationKind::TimeBefore),
        after: pick(RelationKind::TimeAfter),
    };
    (links, diags)
}

/// Time clusters with the built-in English rule table.
pub fn build_clusters(doc: &AnnotatedDocument, bundles: &[EntityBundle]) -> (Vec<TimeCluster>, Vec<Diagnostic>) {
    build_clusters_with(doc, bundles, PatternTable::english())
}

/// One cluster for the DCT plus one per non-duration TIMEX3 that places a
/// bundle or takes part in a TIMEX3-to-TIMEX3 before/after relation. Each
/// bundle joins the cluster of its `timeOn` target, falling back to its
/// begin, end, before and after targets, then to the DCT cluster.
///
/// Clusters come back in document order of their TIMEX3 (DCT last) with
/// provisional order indices; [`super::order_clusters`] assigns the final ones.
pub fn build_clusters_with(
    doc: &AnnotatedDocument,
    bundles: &[EntityBundle],
    patterns: &PatternTable,
) -> (Vec<TimeCluster>, Vec<Diagnostic>) {
    let index = DocIndex::new(doc);
    let mut diags = Vec::new();
    let mut anchors: BTreeMap<(usize, usize, String), Vec<String>> = BTreeMap::new();
    let key = |id: &str| {
        let (a, b, _) = index.mention_key(id);
        (a, b, id.to_string())
    };
    anchors.insert(key(DCT_ID), Vec::new());

    for bundle in bundles {
        let (links, link_diags) = bundle_links(&index, bundle);
        diags.extend(link_diags);
        for target in links.targets() {
            anchors.entry(key(target)).or_default();
        }
        let home = links.membership().unwrap_or(DCT_ID);
        anchors.entry(key(home)).or_default().push(bundle.root_id.clone());
    }

    for rel in &doc.relations {
        if !matches!(rel.kind, RelationKind::TimeBefore | RelationKind::TimeAfter) {
            continue;
        }
        let source_is_timex = index.kind(&rel.source_id) == Some(EntityKind::Timex3);
        let usable = |id: &str| is_anchor_target(&index, id) && !is_duration_timex(&index, id);
        if source_is_timex && usable(&rel.source_id) && usable(&rel.target_id) {
            anchors.entry(key(&rel.source_id)).or_default();
            anchors.entry(key(&rel.target_id)).or_default();
        }
    }

    let clusters = anchors
        .into_iter()
        .enumerate()
        .map(|(i, ((_, _, id), members))| {
            let (anchor, label, mention) = if id == DCT_ID {
                (
                    TimeAnchor::absolute(PartialDate::from(doc.dct)),
                    DCT_ID.to_string(),
                    None,
                )
            } else {
                let e = index.get(&id).expect("anchors are known entities");
                let ty = e.timex_type.unwrap_or(TimexType::Date);
                (
                    patterns.normalize(&e.surface, ty, doc.dct),
                    e.surface.clone(),
                    Some(e.span.start),
                )
            };
            TimeCluster {
                cluster_id: cluster_id_for(&id),
                resolved_date: anchor.resolve(doc.dct).map(|d| d.to_string()),
                anchor_timex_id: id,
                anchor_label: label,
                anchor,
                mention_offset: mention,
                order_index: i,
                members,
            }
        })
        .collect();
    (clusters, diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::parse_document;
    use crate::timeline::bundle_entities;

    fn clusters(body: &str) -> Vec<TimeCluster> {
        let doc = parse_document(&format!(r#"<doc dct="2021-04-01">{body}</doc>"#), None).unwrap();
        let (bundles, _) = bundle_entities(&doc);
        build_clusters(&doc, &bundles).0
    }

    fn summary(cs: &[TimeCluster]) -> Vec<(String, Vec<String>)> {
        cs.iter()
            .map(|c| (c.anchor_timex_id.clone(), c.members.clone()))
            .collect()
    }

    #[test]
    fn shared_time_on_target() {
        let cs = clusters(
            r#"<timex3 id="t1" type="date">April 3</timex3> <d id="d1" rel="timeOn:t1">fever</d> <d id="d2" rel="timeOn:t1">cough</d>"#,
        );
        assert_eq!(
            summary(&cs),
            vec![("t1".into(), vec!["d1".into(), "d2".into()]), ("DCT".into(), vec![])]
        );
    }

    #[test]
    fn empty_document_has_only_dct() {
        let cs = clusters("");
        assert_eq!(summary(&cs), vec![("DCT".into(), vec![])]);
        assert_eq!(cs[0].resolved_date.as_deref(), Some("2021-04-01"));
        assert_eq!(cs[0].cluster_id, "c-DCT");
    }

    #[test]
    fn untimed_entity_joins_dct() {
        let cs = clusters(r#"<d id="d1">fever</d>"#);
        assert_eq!(summary(&cs), vec![("DCT".into(), vec!["d1".into()])]);
    }

    #[test]
    fn earliest_mentioned_time_on_wins() {
        let doc = parse_document(
            r#"<doc dct="2021-04-01"><timex3 id="t1" type="date">May 1</timex3> <timex3 id="t2" type="date">May 2</timex3> <d id="d1" rel="timeOn:t2;timeOn:t1">fever</d></doc>"#,
            None,
        )
        .unwrap();
        let (bundles, _) = bundle_entities(&doc);
        let (cs, diags) = build_clusters(&doc, &bundles);
        assert_eq!(cs[0].members, ["d1"]);
        assert_eq!(cs[0].anchor_timex_id, "t1");
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "time.multiple-targets");
    }

    #[test]
    fn durations_never_make_clusters() {
        let cs = clusters(concat!(
            r#"<timex3 id="t1" type="date">April 3</timex3> <timex3 id="t2" type="date">April 9</timex3> "#,
            r#"<timex3 id="p" type="duration" rel="timeBegin:t1;timeEnd:t2">for five days</timex3> "#,
            r#"<m-key id="k" rel="timeOn:p">aspirin</m-key>"#
        ));
        assert_eq!(
            summary(&cs),
            vec![
                ("t1".into(), vec!["k".into()]),
                ("t2".into(), vec![]),
                ("DCT".into(), vec![])
            ]
        );
    }

    #[test]
    fn contained_member_places_bundle() {
        let cs = clusters(
            r#"<timex3 id="t1" type="date">2021-03-02</timex3> <a id="a1" rel="subRegion:d1">lung</a> <d id="d1" rel="timeOn:t1">nodule</d>"#,
        );
        assert_eq!(summary(&cs)[0], ("t1".into(), vec!["a1".into()]));
    }

    #[test]
    fn timex_to_timex_relations_create_clusters() {
        let cs = clusters(
            r#"<timex3 id="t1" type="misc" rel="timeBefore:t2">admission</timex3> <timex3 id="t2" type="misc">discharge</timex3>"#,
        );
        let ids: Vec<_> = cs.iter().map(|c| c.anchor_timex_id.as_str()).collect();
        assert_eq!(ids, ["t1", "t2", "DCT"]);
        assert_eq!(cs[0].anchor, TimeAnchor::unresolved("admission"));
    }
}
