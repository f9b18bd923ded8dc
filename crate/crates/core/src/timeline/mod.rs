//! Timeline inference: entity bundles, time clusters, chronological cluster
//! order and per-bundle spans.

mod bundle;
mod cluster;
mod order;
mod spans;

use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::annotation::{validate_document, AnnotatedDocument, Entity, EntityKind, DCT_ID};
use crate::diagnostic::Diagnostic;
use crate::temporal::{PatternTable, TimeAnchor};

pub use bundle::bundle_entities;
pub use cluster::{build_clusters, build_clusters_with, TemporalLinks};
pub use order::{order_clusters, EdgeSource, OrderedClusters, PrecedenceEdge};
pub use spans::infer_spans;

pub const TIMELINE_SCHEMA: &str = "heart-timeline/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ChangeNote {
    pub change_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_id: Option<String>,
}

/// A root entity with everything folded into it: SubRegion descendants,
/// the value of a key-value pair, and Feature/Change supplements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityBundle {
    pub root_id: String,
    /// SubRegion descendants in preorder, each followed by its key-value partner.
    pub contained_ids: Vec<String>,
    /// Depth below the root of each entry in `contained_ids` (children are 1).
    #[serde(default)]
    pub contained_depths: Vec<usize>,
    pub features: Vec<String>,
    pub changes: Vec<ChangeNote>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_value: Option<String>,
    /// Duration TIMEX3s linked to the bundle; they annotate length only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub durations: Vec<String>,
}

impl EntityBundle {
    pub fn singleton(root_id: impl Into<String>) -> Self {
        Self {
            root_id: root_id.into(),
            contained_ids: Vec::new(),
            contained_depths: Vec::new(),
            features: Vec::new(),
            changes: Vec::new(),
            key_value: None,
            durations: Vec::new(),
        }
    }

    /// Root, contained entities and the key-value partner, in that order.
    pub fn core_members(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.root_id.as_str())
            .chain(self.contained_ids.iter().map(String::as_str))
            .chain(self.key_value.as_deref())
    }

    /// Every entity the bundle stands for, supplements included.
    pub fn all_members(&self) -> impl Iterator<Item = &str> {
        self.core_members()
            .chain(self.features.iter().map(String::as_str))
            .chain(self.changes.iter().map(|c| c.change_id.as_str()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TimeCluster {
    pub cluster_id: String,
    pub anchor_timex_id: String,
    pub anchor_label: String,
    pub anchor: TimeAnchor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_date: Option<String>,
    /// Start offset of the anchoring TIMEX3; `None` for the DCT cluster.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mention_offset: Option<usize>,
    pub order_index: usize,
    pub members: Vec<String>,
}

impl TimeCluster {
    pub fn is_dct(&self) -> bool {
        self.anchor_timex_id == DCT_ID
    }

    /// Tie-break key: first mention in the document, DCT last.
    pub fn mention_key(&self) -> (usize, &str) {
        (self.mention_offset.unwrap_or(usize::MAX), self.cluster_id.as_str())
    }
}

pub fn cluster_id_for(anchor_id: &str) -> String {
    format!("c-{anchor_id}")
}

/// Column range of a bundle, in cluster order indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EntitySpan {
    pub bundle_root_id: String,
    pub begin_cluster: usize,
    pub end_cluster: usize,
    pub open_start: bool,
    pub open_end: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Timeline {
    pub schema: String,
    pub doc_id: String,
    pub dct: NaiveDate,
    pub text: String,
    pub entities: Vec<Entity>,
    pub clusters: Vec<TimeCluster>,
    pub bundles: Vec<EntityBundle>,
    pub spans: Vec<EntitySpan>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Timeline {
    pub fn entity(&self, id: &str) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == id)
    }

    pub fn entity_index(&self) -> HashMap<&str, &Entity> {
        self.entities.iter().map(|e| (e.id.as_str(), e)).collect()
    }

    pub fn span_of(&self, root_id: &str) -> Option<&EntitySpan> {
        self.spans.iter().find(|s| s.bundle_root_id == root_id)
    }

    pub fn bundle(&self, root_id: &str) -> Option<&EntityBundle> {
        self.bundles.iter().find(|b| b.root_id == root_id)
    }

    pub fn cluster_at(&self, order_index: usize) -> Option<&TimeCluster> {
        self.clusters.get(order_index)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("timeline serializes")
    }

    pub fn root_kind(&self, bundle: &EntityBundle) -> Option<EntityKind> {
        self.entity(&bundle.root_id).map(|e| e.kind)
    }
}

/// Run the full inference with the built-in English rule table.
pub fn build_timeline(doc: &AnnotatedDocument) -> Timeline {
    build_timeline_with(doc, PatternTable::english())
}

pub fn build_timeline_with(doc: &AnnotatedDocument, patterns: &PatternTable) -> Timeline {
    let mut diagnostics = validate_document(doc);
    let (bundles, bundle_diags) = bundle_entities(doc);
    diagnostics.extend(bundle_diags);
    let (clusters, cluster_diags) = build_clusters_with(doc, &bundles, patterns);
    diagnostics.extend(cluster_diags);
    let ordered = order_clusters(clusters, &doc.relations, doc.dct);
    diagnostics.extend(ordered.diagnostics);
    let (spans, span_diags) = infer_spans(doc, &ordered.clusters, &bundles);
    diagnostics.extend(span_diags);

    Timeline {
        schema: TIMELINE_SCHEMA.to_string(),
        doc_id: doc.doc_id.clone(),
        dct: doc.dct,
        text: doc.text.clone(),
        entities: doc.entities.clone(),
        clusters: ordered.clusters,
        bundles,
        spans,
        diagnostics,
    }
}

/// Lookup helpers over a document shared by the inference stages.
pub(crate) struct DocIndex<'a> {
    pub doc: &'a AnnotatedDocument,
    pub by_id: HashMap<&'a str, &'a Entity>,
}

impl<'a> DocIndex<'a> {
    pub fn new(doc: &'a AnnotatedDocument) -> Self {
        Self {
            doc,
            by_id: doc.entity_index(),
        }
    }

    pub fn get(&self, id: &str) -> Option<&'a Entity> {
        self.by_id.get(id).copied()
    }

    pub fn kind(&self, id: &str) -> Option<EntityKind> {
        self.get(id).map(|e| e.kind)
    }

    /// Document-order key; the DCT and unknown ids sort last.
    pub fn mention_key<'b>(&self, id: &'b str) -> (usize, usize, &'b str) {
        match self.get(id) {
            Some(e) => (e.span.start, usize::MAX - e.span.end, id),
            None => (usize::MAX, 0, id),
        }
    }
}
