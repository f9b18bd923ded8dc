use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::TimeCluster;
use crate::annotation::{Relation, RelationKind};
use crate::diagnostic::Diagnostic;
use crate::temporal::{compare_anchors, AnchorOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EdgeSource {
    /// Both anchors resolve and one is strictly earlier.
    Anchor,
    /// An explicit TIMEX3-to-TIMEX3 `timeBefore`/`timeAfter`.
    Relation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PrecedenceEdge {
    pub before: String,
    pub after: String,
    pub source: EdgeSource,
}

#[derive(Debug, Clone)]
pub struct OrderedClusters {
    pub clusters: Vec<TimeCluster>,
    /// Every edge the final order respects.
    pub edges: Vec<PrecedenceEdge>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Sort clusters into a linear extension of the precedence graph.
///
/// Anchor edges are always kept. Explicit relations are added in document
/// order of their source TIMEX3; one that would close a cycle is dropped with
/// a warning, so among conflicting explicit edges the latest mentioned goes.
/// Unrelated clusters are ordered by first mention, with the DCT last.
pub fn order_clusters(clusters: Vec<TimeCluster>, relations: &[Relation], dct: NaiveDate) -> OrderedClusters {
    let n = clusters.len();
    let mut succ: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut edges = Vec::new();
    let mut diagnostics = Vec::new();

    for i in 0..n {
        for j in i + 1..n {
            let (u, v) = match compare_anchors(&clusters[i].anchor, &clusters[j].anchor, dct) {
                AnchorOrder::Less => (i, j),
                AnchorOrder::Greater => (j, i),
                AnchorOrder::Equal | AnchorOrder::Incomparable => continue,
            };
            succ[u].insert(v);
            edges.push((u, v, EdgeSource::Anchor));
        }
    }

    let by_anchor: HashMap<&str, usize> = clusters
        .iter()
        .enumerate()
        .map(|(i, c)| (c.anchor_timex_id.as_str(), i))
        .collect();
    let mut explicit: Vec<(usize, usize, &Relation)> = relations
        .iter()
        .filter(|r| matches!(r.kind, RelationKind::TimeBefore | RelationKind::TimeAfter))
        .filter_map(|r| {
            Some((
                *by_anchor.get(r.source_id.as_str())?,
                *by_anchor.get(r.target_id.as_str())?,
                r,
            ))
        })
        .filter(|(s, t, _)| s != t && clusters[*s].mention_offset.is_some())
        .collect();
    explicit.sort_by(|a, b| {
        clusters[a.0]
            .mention_key()
            .cmp(&clusters[b.0].mention_key())
            .then_with(|| clusters[a.1].mention_key().cmp(&clusters[b.1].mention_key()))
            .then(a.2.kind.cmp(&b.2.kind))
    });
    for (s, t, rel) in explicit {
        let (u, v) = if rel.kind == RelationKind::TimeBefore {
            (s, t)
        } else {
            (t, s)
        };
        if succ[u].contains(&v) {
            continue;
        }
        if reaches(&succ, v, u) {
            let msg = format!(
                "{} from `{}` to `{}` contradicts the established order; dropped",
                rel.kind, rel.source_id, rel.target_id
            );
            let mut diag = Diagnostic::warning("order.cycle", msg);
            diag.location = clusters[s].mention_offset;
            diagnostics.push(diag);
            continue;
        }
        succ[u].insert(v);
        edges.push((u, v, EdgeSource::Relation));
    }

    let mut indegree = vec![0usize; n];
    for targets in &succ {
        for &v in targets {
            indegree[v] += 1;
        }
    }
    let mut ready: BinaryHeap<Reverse<(usize, &str, usize)>> = BinaryHeap::new();
    for (i, c) in clusters.iter().enumerate() {
        if indegree[i] == 0 {
            let (offset, id) = c.mention_key();
            ready.push(Reverse((offset, id, i)));
        }
    }
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, _, i))) = ready.pop() {
        order.push(i);
        for &v in &succ[i] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                let (offset, id) = clusters[v].mention_key();
                ready.push(Reverse((offset, id, v)));
            }
        }
    }
    debug_assert_eq!(order.len(), n, "precedence graph is acyclic by construction");

    let edges = edges
        .into_iter()
        .map(|(u, v, source)| PrecedenceEdge {
            before: clusters[u].cluster_id.clone(),
            after: clusters[v].cluster_id.clone(),
            source,
        })
        .collect();
    let mut slots: Vec<Option<TimeCluster>> = clusters.into_iter().map(Some).collect();
    let clusters = order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let mut c = slots[i].take().expect("each cluster placed once");
            c.order_index = rank;
            c
        })
        .collect();
    OrderedClusters {
        clusters,
        edges,
        diagnostics,
    }
}

fn reaches(succ: &[BTreeSet<usize>], from: usize, to: usize) -> bool {
    let mut seen = vec![false; succ.len()];
    let mut stack = vec![from];
    while let Some(node) = stack.pop() {
        if node == to {
            return true;
        }
        if std::mem::replace(&mut seen[node], true) {
            continue;
        }
        stack.extend(succ[node].iter().copied());
    }
    false
}
