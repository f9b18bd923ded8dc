//! Entity/relation data model for annotated clinical notes and its inline-XML
//! wire format.
//!
//! Tag vocabulary (frozen):
//!
//! | tag      | kind            | attributes                |
//! |----------|-----------------|---------------------------|
//! | `d`      | Disease         | `certainty`               |
//! | `a`      | Anatomical      |                           |
//! | `f`      | Feature         |                           |
//! | `c`      | Change          |                           |
//! | `timex3` | Timex3          | `type` (required)         |
//! | `t-key`  | TestKey         | `state`                   |
//! | `t-val`  | TestVal         |                           |
//! | `m-key`  | MedKey          | `state`                   |
//! | `m-val`  | MedVal          |                           |
//! | `r`      | Remedy          | `state`                   |
//! | `cc`     | ClinicalContext |                           |
//!
//! Every entity element carries a unique `id` and an optional
//! `rel="kind:target;kind:target"` list of outgoing relations.

mod parse;
mod serialize;
mod validate;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

pub use parse::parse_document;
pub use serialize::serialize_document;
pub use validate::validate_document;

/// Reserved id of the document-creation-time pseudo entity.
pub const DCT_ID: &str = "DCT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EntityKind {
    Disease,
    Anatomical,
    Feature,
    Change,
    Timex3,
    TestKey,
    TestVal,
    MedKey,
    MedVal,
    Remedy,
    ClinicalContext,
}

impl EntityKind {
    pub const ALL: [EntityKind; 11] = [
        EntityKind::Disease,
        EntityKind::Anatomical,
        EntityKind::Feature,
        EntityKind::Change,
        EntityKind::Timex3,
        EntityKind::TestKey,
        EntityKind::TestVal,
        EntityKind::MedKey,
        EntityKind::MedVal,
        EntityKind::Remedy,
        EntityKind::ClinicalContext,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            EntityKind::Disease => "d",
            EntityKind::Anatomical => "a",
            EntityKind::Feature => "f",
            EntityKind::Change => "c",
            EntityKind::Timex3 => "timex3",
            EntityKind::TestKey => "t-key",
            EntityKind::TestVal => "t-val",
            EntityKind::MedKey => "m-key",
            EntityKind::MedVal => "m-val",
            EntityKind::Remedy => "r",
            EntityKind::ClinicalContext => "cc",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    pub fn allows_certainty(self) -> bool {
        self == EntityKind::Disease
    }

    pub fn allows_timex_type(self) -> bool {
        self == EntityKind::Timex3
    }

    pub fn allows_state(self) -> bool {
        matches!(self, EntityKind::TestKey | EntityKind::MedKey | EntityKind::Remedy)
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

macro_rules! wire_enum {
    ($name:ident { $($variant:ident => $wire:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "camelCase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $wire),+
                }
            }
        }

        impl FromStr for $name {
            type Err = ();

            fn from_str(s: &str) -> Result<Self, ()> {
                match s {
                    $($wire => Ok($name::$variant),)+
                    _ => Err(()),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

wire_enum!(Certainty {
    Positive => "positive",
    Negative => "negative",
    Suspicious => "suspicious",
    General => "general",
});

wire_enum!(TimexType {
    Date => "date",
    Time => "time",
    Duration => "duration",
    Set => "set",
    Age => "age",
    Medical => "medical",
    Misc => "misc",
});

wire_enum!(ExecState {
    Executed => "executed",
    Negated => "negated",
    Scheduled => "scheduled",
    Other => "other",
});

wire_enum!(RelationKind {
    ChangeSbj => "changeSbj",
    ChangeRef => "changeRef",
    FeatureSbj => "featureSbj",
    SubRegion => "subRegion",
    KeyValue => "keyValue",
    TimeOn => "timeOn",
    TimeBefore => "timeBefore",
    TimeAfter => "timeAfter",
    TimeBegin => "timeBegin",
    TimeEnd => "timeEnd",
});

impl RelationKind {
    pub fn is_temporal(self) -> bool {
        matches!(
            self,
            RelationKind::TimeOn
                | RelationKind::TimeBefore
                | RelationKind::TimeAfter
                | RelationKind::TimeBegin
                | RelationKind::TimeEnd
        )
    }
}

/// Half-open interval of character (Unicode scalar) offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Overlap that is neither disjoint nor nested.
    pub fn crosses(&self, other: &Span) -> bool {
        let overlap = self.start < other.end && other.start < self.end;
        overlap && !self.contains(other) && !other.contains(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Entity {
    pub id: String,
    pub kind: EntityKind,
    pub span: Span,
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certainty: Option<Certainty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timex_type: Option<TimexType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<ExecState>,
}

impl Entity {
    pub fn new(id: impl Into<String>, kind: EntityKind, span: Span, surface: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            kind,
            span,
            surface: surface.into(),
            certainty: None,
            timex_type: None,
            state: None,
        }
    }

    pub fn with_certainty(mut self, certainty: Certainty) -> Self {
        self.certainty = Some(certainty);
        self
    }

    pub fn with_timex_type(mut self, timex_type: TimexType) -> Self {
        self.timex_type = Some(timex_type);
        self
    }

    pub fn with_state(mut self, state: ExecState) -> Self {
        self.state = Some(state);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Relation {
    pub kind: RelationKind,
    pub source_id: String,
    pub target_id: String,
}

impl Relation {
    pub fn new(kind: RelationKind, source: impl Into<String>, target: impl Into<String>) -> Self {
        Self {
            kind,
            source_id: source.into(),
            target_id: target.into(),
        }
    }
}

/// One parsed clinical note.
///
/// Documents built through [`AnnotatedDocument::new`] are canonical: entities
/// are ordered by (start, longest first, id) and relations are grouped by the
/// canonical position of their source, keeping their relative order. The
/// wire format preserves exactly this order, so structural equality survives
/// a serialize/parse round trip.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnnotatedDocument {
    pub doc_id: String,
    pub text: String,
    pub dct: NaiveDate,
    pub entities: Vec<Entity>,
    pub relations: Vec<Relation>,
}

impl AnnotatedDocument {
    pub fn new(
        doc_id: impl Into<String>,
        text: impl Into<String>,
        dct: NaiveDate,
        entities: Vec<Entity>,
        relations: Vec<Relation>,
    ) -> Self {
        let mut doc = Self {
            doc_id: doc_id.into(),
            text: text.into(),
            dct,
            entities,
            relations,
        };
        doc.canonicalize();
        doc
    }

    pub fn canonicalize(&mut self) {
        self.entities.sort_by(|a, b| {
            a.span
                .start
                .cmp(&b.span.start)
                .then(b.span.end.cmp(&a.span.end))
                .then_with(|| a.id.cmp(&b.id))
        });
        let position: HashMap<&str, usize> = self
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.as_str(), i))
            .collect();
        let mut keyed: Vec<(usize, Relation)> = self
            .relations
            .drain(..)
            .map(|r| (position.get(r.source_id.as_str()).copied().unwrap_or(usize::MAX), r))
            .collect();
        keyed.sort_by_key(|(k, _)| *k);
        self.relations = keyed.into_iter().map(|(_, r)| r).collect();
    }

    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn entity_index(&self) -> HashMap<&str, &Entity> {
        self.entities.iter().map(|e| (e.id.as_str(), e)).collect()
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// Slice `text` by character offsets.
pub fn char_slice(text: &str, span: Span) -> Option<&str> {
    if span.start > span.end {
        return None;
    }
    let mut indices = text.char_indices().map(|(i, _)| i).chain(std::iter::once(text.len()));
    let start = indices.nth(span.start)?;
    let end = if span.end == span.start {
        start
    } else {
        indices.nth(span.end - span.start - 1)?
    };
    Some(&text[start..end])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_vocabulary_covers_every_kind_once() {
        let tags: Vec<_> = EntityKind::ALL.iter().map(|k| k.tag()).collect();
        assert_eq!(
            tags,
            ["d", "a", "f", "c", "timex3", "t-key", "t-val", "m-key", "m-val", "r", "cc"]
        );
        for kind in EntityKind::ALL {
            assert_eq!(EntityKind::from_tag(kind.tag()), Some(kind));
        }
        assert_eq!(EntityKind::from_tag("x"), None);
    }

    #[test]
    fn char_slice_counts_scalars() {
        let text = "熱 fever";
        assert_eq!(char_slice(text, Span::new(0, 1)), Some("熱"));
        assert_eq!(char_slice(text, Span::new(2, 7)), Some("fever"));
        assert_eq!(char_slice(text, Span::new(2, 8)), None);
        assert_eq!(char_slice(text, Span::new(7, 7)), Some(""));
    }

    #[test]
    fn crossing_spans() {
        let a = Span::new(0, 5);
        assert!(a.crosses(&Span::new(3, 8)));
        assert!(!a.crosses(&Span::new(1, 4)));
        assert!(!a.crosses(&Span::new(5, 8)));
        assert!(!a.crosses(&Span::new(0, 5)));
    }

    #[test]
    fn relation_kind_wire_names() {
        assert_eq!("timeOn".parse::<RelationKind>(), Ok(RelationKind::TimeOn));
        assert_eq!(RelationKind::SubRegion.as_str(), "subRegion");
        assert!(RelationKind::TimeEnd.is_temporal());
        assert!(!RelationKind::KeyValue.is_temporal());
    }
}
