use std::collections::{HashMap, HashSet};

use super::{ChangeNote, DocIndex, EntityBundle};
use crate::annotation::{AnnotatedDocument, EntityKind, Relation, RelationKind, TimexType};
use crate::diagnostic::Diagnostic;

/// Relations of one kind in a document-order that does not depend on the
/// order of the relation list itself.
pub(crate) fn sorted_relations<'a>(index: &DocIndex<'a>, kind: RelationKind) -> Vec<&'a Relation> {
    let mut rels: Vec<&Relation> = index.doc.relations.iter().filter(|r| r.kind == kind).collect();
    rels.sort_by(|a, b| {
        index
            .mention_key(&a.source_id)
            .cmp(&index.mention_key(&b.source_id))
            .then_with(|| index.mention_key(&a.target_id).cmp(&index.mention_key(&b.target_id)))
    });
    rels.dedup();
    rels
}

/// Group entities into bundles.
///
/// SubRegion relations form a containment forest (the first container of an
/// entity wins, cycle-closing relations are dropped with an error), KeyValue
/// joins a value to its key, and Feature/Change entities attach to the bundle
/// of their subject. Every other non-TIMEX3 entity becomes a singleton.
pub fn bundle_entities(doc: &AnnotatedDocument) -> (Vec<EntityBundle>, Vec<Diagnostic>) {
    let index = DocIndex::new(doc);
    let mut diags = Vec::new();

    let mut parent: HashMap<&str, &str> = HashMap::new();
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for rel in sorted_relations(&index, RelationKind::SubRegion) {
        let (src, dst) = (rel.source_id.as_str(), rel.target_id.as_str());
        let (Some(src_e), Some(dst_e)) = (index.get(src), index.get(dst)) else {
            continue;
        };
        if src == dst {
            continue;
        }
        if dst_e.kind == EntityKind::Timex3 {
            let msg = format!("subRegion from `{src}` to TIMEX3 `{dst}` ignored");
            diags.push(Diagnostic::warning("bundle.subregion-timex", msg).at(src_e.span.start));
            continue;
        }
        if let Some(existing) = parent.get(dst) {
            let msg = format!("`{dst}` is already contained by `{existing}`; subRegion from `{src}` dropped");
            diags.push(Diagnostic::warning("bundle.multiple-containers", msg).at(src_e.span.start));
            continue;
        }
        let mut cursor = Some(src);
        let mut closes_cycle = false;
        while let Some(node) = cursor {
            if node == dst {
                closes_cycle = true;
                break;
            }
            cursor = parent.get(node).copied();
        }
        if closes_cycle {
            let msg = format!("subRegion from `{src}` to `{dst}` closes a containment cycle; dropped");
            diags.push(Diagnostic::error("bundle.subregion-cycle", msg).at(src_e.span.start));
            continue;
        }
        parent.insert(dst, src);
        children.entry(src).or_default().push(dst);
    }

    let mut value_of: HashMap<&str, &str> = HashMap::new();
    let mut key_of: HashMap<&str, &str> = HashMap::new();
    for rel in sorted_relations(&index, RelationKind::KeyValue) {
        let (key, value) = (rel.source_id.as_str(), rel.target_id.as_str());
        let (Some(key_e), Some(_)) = (index.get(key), index.get(value)) else {
            continue;
        };
        if value_of.contains_key(key)
            || key_of.contains_key(value)
            || parent.contains_key(value)
            || children.contains_key(value)
        {
            let msg = format!("keyValue from `{key}` to `{value}` dropped; one side is already paired or contained");
            diags.push(Diagnostic::warning("bundle.keyvalue-conflict", msg).at(key_e.span.start));
            continue;
        }
        value_of.insert(key, value);
        key_of.insert(value, key);
    }

    let mut supplement_subject: HashMap<&str, &str> = HashMap::new();
    for (kind, rel_kind) in [
        (EntityKind::Feature, RelationKind::FeatureSbj),
        (EntityKind::Change, RelationKind::ChangeSbj),
    ] {
        for rel in sorted_relations(&index, rel_kind) {
            let (src, dst) = (rel.source_id.as_str(), rel.target_id.as_str());
            let (Some(src_e), Some(dst_e)) = (index.get(src), index.get(dst)) else {
                continue;
            };
            if src_e.kind != kind
                || parent.contains_key(src)
                || children.contains_key(src)
                || supplement_subject.contains_key(src)
            {
                continue;
            }
            if matches!(
                dst_e.kind,
                EntityKind::Timex3 | EntityKind::Feature | EntityKind::Change
            ) {
                let msg = format!(
                    "{rel_kind} from `{src}` to {} `{dst}` cannot attach; kept as its own bundle",
                    dst_e.kind
                );
                diags.push(Diagnostic::warning("bundle.unattached-supplement", msg).at(src_e.span.start));
                continue;
            }
            supplement_subject.insert(src, dst);
        }
    }

    let mut bundles = Vec::new();
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for e in &doc.entities {
        let id = e.id.as_str();
        if e.kind == EntityKind::Timex3
            || parent.contains_key(id)
            || key_of.contains_key(id)
            || supplement_subject.contains_key(id)
            || owner.contains_key(id)
        {
            continue;
        }
        let mut bundle = EntityBundle::singleton(id);
        let slot = bundles.len();
        owner.insert(id, slot);
        bundle.key_value = value_of.get(id).map(|v| v.to_string());
        if let Some(v) = value_of.get(id) {
            owner.insert(v, slot);
        }
        let mut stack: Vec<(&str, usize)> = sorted_children(&index, &children, id)
            .into_iter()
            .map(|k| (k, 1))
            .collect();
        stack.reverse();
        while let Some((node, depth)) = stack.pop() {
            owner.insert(node, slot);
            bundle.contained_ids.push(node.to_string());
            bundle.contained_depths.push(depth);
            if let Some(v) = value_of.get(node) {
                owner.insert(v, slot);
                bundle.contained_ids.push(v.to_string());
                bundle.contained_depths.push(depth);
            }
            let kids = sorted_children(&index, &children, node);
            stack.extend(kids.into_iter().rev().map(|k| (k, depth + 1)));
        }
        bundles.push(bundle);
    }

    for e in &doc.entities {
        let Some(subject) = supplement_subject.get(e.id.as_str()) else {
            continue;
        };
        let Some(&slot) = owner.get(subject) else {
            // Subject is itself unbundled (e.g. a TIMEX3); keep the supplement visible.
            owner.insert(e.id.as_str(), bundles.len());
            bundles.push(EntityBundle::singleton(e.id.as_str()));
            continue;
        };
        owner.insert(e.id.as_str(), slot);
        match e.kind {
            EntityKind::Feature => bundles[slot].features.push(e.id.clone()),
            _ => {
                let ref_id = sorted_relations(&index, RelationKind::ChangeRef)
                    .into_iter()
                    .find(|r| r.source_id == e.id && index.get(&r.target_id).is_some())
                    .map(|r| r.target_id.clone());
                bundles[slot].changes.push(ChangeNote {
                    change_id: e.id.clone(),
                    ref_id,
                });
            }
        }
    }

    for bundle in &mut bundles {
        let members: HashSet<&str> = bundle.core_members().collect();
        let mut durations: Vec<&str> = doc
            .relations
            .iter()
            .filter(|r| r.kind.is_temporal() && members.contains(r.source_id.as_str()))
            .filter(|r| index.get(&r.target_id).and_then(|t| t.timex_type) == Some(TimexType::Duration))
            .map(|r| r.target_id.as_str())
            .collect();
        durations.sort_by_key(|id| index.mention_key(id));
        durations.dedup();
        bundle.durations = durations.into_iter().map(str::to_string).collect();
    }

    bundles.sort_by_key(|b| {
        let (start, end, _) = index.mention_key(&b.root_id);
        (start, end, b.root_id.clone())
    });
    (bundles, diags)
}

fn sorted_children<'a>(index: &DocIndex<'_>, children: &HashMap<&'a str, Vec<&'a str>>, node: &str) -> Vec<&'a str> {
    let mut kids = children.get(node).cloned().unwrap_or_default();
    kids.sort_by_key(|id| index.mention_key(id));
    kids
}
