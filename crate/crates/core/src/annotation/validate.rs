use std::collections::{HashMap, HashSet};

use super::{char_slice, AnnotatedDocument, Entity, EntityKind, RelationKind, DCT_ID};
use crate::diagnostic::Diagnostic;

/// Check every entity and relation invariant. An empty result means the
/// document is valid; warnings alone do not make it invalid for strict use.
pub fn validate_document(doc: &AnnotatedDocument) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let text_len = doc.char_len();

    let mut seen = HashSet::new();
    for e in &doc.entities {
        let at = e.span.start;
        if e.id.is_empty() {
            out.push(Diagnostic::error("id.missing", format!("{} entity without id", e.kind)).at(at));
        }
        if e.id == DCT_ID {
            out.push(Diagnostic::error("id.reserved", format!("entity id `{DCT_ID}` is reserved")).at(at));
        }
        if !seen.insert(e.id.as_str()) {
            out.push(Diagnostic::error("id.duplicate", format!("duplicate entity id `{}`", e.id)).at(at));
        }
        check_span(e, &doc.text, text_len, &mut out);
        check_attributes(e, &mut out);
    }
    check_bracketing(&doc.entities, &mut out);

    let index: HashMap<&str, &Entity> = doc.entities.iter().map(|e| (e.id.as_str(), e)).collect();
    for rel in &doc.relations {
        let kind = rel.kind;
        let Some(source) = index.get(rel.source_id.as_str()) else {
            let msg = format!("{kind} relation from unknown entity `{}`", rel.source_id);
            out.push(Diagnostic::error("rel.dangling", msg));
            continue;
        };
        let at = source.span.start;
        if rel.source_id == rel.target_id {
            out.push(Diagnostic::error("rel.self", format!("`{}` relates to itself", rel.source_id)).at(at));
            continue;
        }
        let target = if rel.target_id == DCT_ID {
            None
        } else {
            match index.get(rel.target_id.as_str()) {
                Some(t) => Some(*t),
                None => {
                    let msg = format!(
                        "{kind} relation from `{}` to unknown entity `{}`",
                        rel.source_id, rel.target_id
                    );
                    out.push(Diagnostic::error("rel.dangling", msg).at(at));
                    continue;
                }
            }
        };

        if kind.is_temporal() {
            if target.is_some_and(|t| t.kind != EntityKind::Timex3) {
                out.push(Diagnostic::error("rel.temporal-target", "temporal relation target must be TIMEX3").at(at));
            }
            continue;
        }

        let Some(target) = target else {
            let msg = format!("{kind} relation cannot target the document creation time");
            out.push(Diagnostic::error("rel.target", msg).at(at));
            continue;
        };
        let source_ok = match kind {
            RelationKind::ChangeSbj | RelationKind::ChangeRef => source.kind == EntityKind::Change,
            RelationKind::FeatureSbj => source.kind == EntityKind::Feature,
            RelationKind::SubRegion => matches!(source.kind, EntityKind::Anatomical | EntityKind::Disease),
            RelationKind::KeyValue => matches!(source.kind, EntityKind::TestKey | EntityKind::MedKey),
            _ => true,
        };
        if !source_ok {
            let msg = format!("{kind} relation cannot start at a {} entity", source.kind);
            out.push(Diagnostic::error("rel.source", msg).at(at));
        }
        if kind == RelationKind::KeyValue {
            let expected = match source.kind {
                EntityKind::TestKey => Some(EntityKind::TestVal),
                EntityKind::MedKey => Some(EntityKind::MedVal),
                _ => None,
            };
            if expected.is_some_and(|k| k != target.kind) {
                let msg = format!("keyValue from {} cannot target a {} entity", source.kind, target.kind);
                out.push(Diagnostic::error("rel.target", msg).at(at));
            }
        }
    }

    for e in doc.entities.iter().filter(|e| e.kind == EntityKind::Change) {
        let has_subject = doc
            .relations
            .iter()
            .any(|r| r.kind == RelationKind::ChangeSbj && r.source_id == e.id);
        if !has_subject {
            out.push(Diagnostic::warning("change.orphan", "orphan change").at(e.span.start));
        }
    }
    out
}

fn check_span(e: &Entity, text: &str, text_len: usize, out: &mut Vec<Diagnostic>) {
    let at = e.span.start;
    if e.span.is_empty() {
        out.push(Diagnostic::error("span.empty", format!("entity `{}` has an empty span", e.id)).at(at));
        return;
    }
    if e.span.end > text_len {
        let msg = format!(
            "entity `{}` span {}..{} exceeds text length {text_len}",
            e.id, e.span.start, e.span.end
        );
        out.push(Diagnostic::error("span.bounds", msg).at(at));
        return;
    }
    if char_slice(text, e.span) != Some(e.surface.as_str()) {
        let msg = format!("entity `{}` surface does not match the text it spans", e.id);
        out.push(Diagnostic::error("span.surface", msg).at(at));
    }
}

fn check_attributes(e: &Entity, out: &mut Vec<Diagnostic>) {
    let at = e.span.start;
    let mut reject = |attr: &str| {
        let msg = format!("`{attr}` attribute is not allowed on {} entity `{}`", e.kind, e.id);
        out.push(Diagnostic::error("attr.kind", msg).at(at));
    };
    if e.certainty.is_some() && !e.kind.allows_certainty() {
        reject("certainty");
    }
    if e.timex_type.is_some() && !e.kind.allows_timex_type() {
        reject("type");
    }
    if e.state.is_some() && !e.kind.allows_state() {
        reject("state");
    }
    if e.kind == EntityKind::Timex3 && e.timex_type.is_none() {
        let msg = format!("timex3 entity `{}` requires a `type` attribute", e.id);
        out.push(Diagnostic::error("attr.required", msg).at(at));
    }
}

fn check_bracketing(entities: &[Entity], out: &mut Vec<Diagnostic>) {
    let mut sorted: Vec<&Entity> = entities.iter().filter(|e| !e.span.is_empty()).collect();
    sorted.sort_by(|a, b| a.span.start.cmp(&b.span.start).then(b.span.end.cmp(&a.span.end)));
    let mut open: Vec<&Entity> = Vec::new();
    for e in sorted {
        while open.last().is_some_and(|top| top.span.end <= e.span.start) {
            open.pop();
        }
        if let Some(top) = open.last() {
            if e.span.end > top.span.end {
                let msg = format!("entities `{}` and `{}` partially overlap", top.id, e.id);
                out.push(Diagnostic::error("span.overlap", msg).at(e.span.start));
                continue;
            }
        }
        open.push(e);
    }
}

#[cfg(test)]
mod tests {
    use chrono::NaiveDate;

    use super::*;
    use crate::annotation::{Certainty, ExecState, Relation, Span, TimexType};
    use crate::diagnostic::Severity;

    fn dct() -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 4, 1).unwrap()
    }

    fn fever_doc() -> AnnotatedDocument {
        AnnotatedDocument::new(
            "t",
            "April 3: fever",
            dct(),
            vec![
                Entity::new("t1", EntityKind::Timex3, Span::new(0, 7), "April 3").with_timex_type(TimexType::Date),
                Entity::new("d1", EntityKind::Disease, Span::new(9, 14), "fever").with_certainty(Certainty::Positive),
            ],
            vec![Relation::new(RelationKind::TimeOn, "d1", "t1")],
        )
    }

    #[test]
    fn valid_document_has_no_diagnostics() {
        assert!(validate_document(&fever_doc()).is_empty());
    }

    #[test]
    fn temporal_relation_to_disease_is_rejected() {
        let mut doc = fever_doc();
        doc.entities
            .push(Entity::new("d2", EntityKind::Disease, Span::new(0, 5), "April"));
        doc.entities.retain(|e| e.id != "t1");
        doc.relations = vec![Relation::new(RelationKind::TimeOn, "d1", "d2")];
        let diags = validate_document(&doc);
        assert_eq!(diags.len(), 1, "{diags:?}");
        assert_eq!(diags[0].severity, Severity::Error);
        assert_eq!(diags[0].message, "temporal relation target must be TIMEX3");
    }

    #[test]
    fn change_without_subject_warns() {
        let mut doc = fever_doc();
        doc.text = "April 3: fever worse".into();
        doc.entities
            .push(Entity::new("c1", EntityKind::Change, Span::new(15, 20), "worse"));
        let diags = validate_document(&doc);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].severity, Severity::Warning);
        assert_eq!(diags[0].message, "orphan change");
    }

    #[test]
    fn attribute_kind_mismatch() {
        let mut doc = fever_doc();
        doc.entities[1].state = Some(ExecState::Executed);
        doc.entities[0].certainty = Some(Certainty::General);
        let codes: Vec<_> = validate_document(&doc).into_iter().map(|d| d.code).collect();
        assert_eq!(codes, ["attr.kind", "attr.kind"]);
    }

    #[test]
    fn relation_endpoint_rules() {
        let mut doc = fever_doc();
        doc.relations = vec![
            Relation::new(RelationKind::KeyValue, "d1", "t1"),
            Relation::new(RelationKind::TimeOn, "d1", "nope"),
            Relation::new(RelationKind::SubRegion, "d1", DCT_ID),
            Relation::new(RelationKind::TimeOn, "d1", DCT_ID),
            Relation::new(RelationKind::TimeOn, DCT_ID, "t1"),
        ];
        let codes: Vec<_> = validate_document(&doc).into_iter().map(|d| d.code).collect();
        assert_eq!(codes, ["rel.source", "rel.dangling", "rel.target", "rel.dangling"]);
    }

    #[test]
    fn partial_overlap_and_surface_mismatch() {
        let mut doc = fever_doc();
        doc.entities
            .push(Entity::new("a1", EntityKind::Anatomical, Span::new(5, 12), "3: fev"));
        let codes: Vec<_> = validate_document(&doc).into_iter().map(|d| d.code).collect();
        assert!(codes.contains(&"span.surface".to_string()));
        assert!(codes.contains(&"span.overlap".to_string()));
    }

    #[test]
    fn duplicate_and_reserved_ids() {
        let mut doc = fever_doc();
        doc.entities[1].id = "t1".into();
        doc.relations.clear();
        doc.entities
            .push(Entity::new(DCT_ID, EntityKind::Disease, Span::new(10, 12), "ev"));
        let codes: Vec<_> = validate_document(&doc).into_iter().map(|d| d.code).collect();
        assert_eq!(codes, ["id.duplicate", "id.reserved"]);
    }
}
