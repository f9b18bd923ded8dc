//! Oracles that re-derive expected results without going through the code
//! under test, plus fixture access shared by the test suites.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use heart_core::annotation::{AnnotatedDocument, EntityKind, RelationKind, DCT_ID};
use heart_core::layout::{LayoutModel, RowCategory};
use heart_core::timeline::{
    build_clusters, build_timeline, bundle_entities, order_clusters, OrderedClusters, TimeCluster, Timeline,
};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

/// (stem, xml) for every corpus document, sorted by file name.
pub fn corpus() -> Vec<(String, String)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(fixtures_dir().join("corpus"))
        .expect("corpus dir")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "xml"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let stem = p.file_stem().expect("stem").to_string_lossy().into_owned();
            (stem, fs::read_to_string(&p).expect("read fixture"))
        })
        .collect()
}

pub fn comparable() -> (String, String) {
    let dir = fixtures_dir().join("comparable");
    (
        fs::read_to_string(dir.join("report_a.xml")).expect("report a"),
        fs::read_to_string(dir.join("report_b.xml")).expect("report b"),
    )
}

/// Compare against a frozen file, or rewrite it when HEART_BLESS is set.
pub fn check_golden(path: &Path, actual: &str) {
    if std::env::var_os("HEART_BLESS").is_some() {
        fs::create_dir_all(path.parent().expect("parent")).expect("mkdir");
        fs::write(path, actual).expect("write golden");
        return;
    }
    let expected = fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with HEART_BLESS=1 to create it)", path.display()));
    assert!(
        expected == actual,
        "{} differs from the produced output",
        path.display()
    );
}

pub fn corpus_path(stem: &str) -> PathBuf {
    fixtures_dir().join("corpus").join(format!("{stem}.xml"))
}

pub fn golden_path(file: &str) -> PathBuf {
    fixtures_dir().join("golden").join(file)
}

pub fn gold_path(stem: &str) -> PathBuf {
    fixtures_dir().join("gold").join(format!("{stem}.gold.json"))
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Proleptic Gregorian day numbers (days since 1970-01-01), after the civil
// calendar algorithms published by H. Hinnant.

pub fn days_from_civil(y: i64, m: i64, d: i64) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = (m + 9) % 12;
    let doy = (153 * mp + 2) / 5 + d - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

pub fn civil_from_days(z: i64) -> (i64, i64, i64) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let m = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = yoe + era * 400 + i64::from(m <= 2);
    (y, m, d)
}

#[derive(Debug, Clone)]
pub struct CalendarCase {
    pub surface: String,
    pub dct: NaiveDate,
    /// `YYYY-MM-DD` for day and week offsets, `YYYY-MM` for months.
    pub expected: String,
}

/// Relative expressions whose offsets cross month and year boundaries:
/// DCTs sit near month ends and the turn of the year.
pub fn calendar_cases(seed: u64, count: usize) -> Vec<CalendarCase> {
    let mut rng = seeded(seed);
    let mut cases = Vec::with_capacity(count);
    while cases.len() < count {
        let year = rng.random_range(1990..2040i64);
        let month = rng.random_range(1..=12i64);
        let day = *[1i64, 2, 28, 29, 30, 31].choose(&mut rng).expect("non-empty");
        let z = days_from_civil(year, month, day);
        let (y2, m2, d2) = civil_from_days(z);
        if (y2, m2, d2) != (year, month, day) {
            continue; // e.g. 30 February
        }
        let dct = NaiveDate::from_ymd_opt(year as i32, month as u32, day as u32).expect("valid civil date");
        let n = rng.random_range(1..=60i64);
        let future = rng.random_bool(0.5);
        let sign = if future { 1 } else { -1 };
        let word = if future { "later" } else { "ago" };
        let (surface, expected) = match rng.random_range(0..3) {
            0 => {
                let (y, m, d) = civil_from_days(z + sign * n);
                (format!("{n} day{} {word}", plural(n)), format!("{y:04}-{m:02}-{d:02}"))
            }
            1 => {
                let (y, m, d) = civil_from_days(z + sign * 7 * n);
                (format!("{n} week{} {word}", plural(n)), format!("{y:04}-{m:02}-{d:02}"))
            }
            _ => {
                let idx = year * 12 + (month - 1) + sign * n;
                let (y, m) = (idx.div_euclid(12), idx.rem_euclid(12) + 1);
                (format!("{n} month{} {word}", plural(n)), format!("{y:04}-{m:02}"))
            }
        };
        cases.push(CalendarCase { surface, dct, expected });
    }
    cases
}

fn plural(n: i64) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

/// Check that `ordered` is a linear extension of its surviving edges by
/// enumerating every permutation of its clusters (at most 8).
pub fn check_linear_extension(ordered: &OrderedClusters) -> Result<(), String> {
    let ids: Vec<&str> = ordered.clusters.iter().map(|c| c.cluster_id.as_str()).collect();
    if ids.len() > 8 {
        return Err(format!("{} clusters exceed the brute-force bound", ids.len()));
    }
    let pos: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
    let edges: Vec<(usize, usize)> = ordered
        .edges
        .iter()
        .map(|e| (pos[e.before.as_str()], pos[e.after.as_str()]))
        .collect();
    let mut perm: Vec<usize> = (0..ids.len()).collect();
    let mut extensions = Vec::new();
    permute(&mut perm, 0, &mut |p| {
        let mut rank = vec![0; p.len()];
        for (r, &c) in p.iter().enumerate() {
            rank[c] = r;
        }
        if edges.iter().all(|&(u, v)| rank[u] < rank[v]) {
            extensions.push(p.to_vec());
        }
    });
    let produced: Vec<usize> = (0..ids.len()).collect();
    if extensions.is_empty() {
        return Err("surviving edges admit no linear extension".into());
    }
    if !extensions.contains(&produced) {
        return Err(format!("order {ids:?} violates a surviving edge"));
    }
    for (i, c) in ordered.clusters.iter().enumerate() {
        if c.order_index != i {
            return Err(format!(
                "cluster {} has order index {} at position {i}",
                c.cluster_id, c.order_index
            ));
        }
    }
    Ok(())
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Anchors given as full ISO dates must come out in calendar order.
pub fn check_iso_dates_sorted(timeline: &Timeline) -> Result<(), String> {
    let dated: Vec<(usize, &str)> = timeline
        .clusters
        .iter()
        .filter_map(|c| {
            let d = c.resolved_date.as_deref()?;
            (d.len() == 10).then_some((c.order_index, d))
        })
        .collect();
    for a in &dated {
        for b in &dated {
            if a.1 < b.1 && a.0 > b.0 {
                return Err(format!("{} placed after {}", a.1, b.1));
            }
        }
    }
    Ok(())
}

/// Order checks for one document: the ordering stage yields a linear
/// extension of its surviving edges, the timeline keeps that order, ISO dates
/// are chronological and explicit orderings hold.
pub fn check_cluster_order(doc: &AnnotatedDocument) -> Result<(), String> {
    let (bundles, _) = bundle_entities(doc);
    let (clusters, _) = build_clusters(doc, &bundles);
    let ordered = order_clusters(clusters, &doc.relations, doc.dct);
    check_linear_extension(&ordered)?;
    let timeline = build_timeline(doc);
    let ids = |cs: &[TimeCluster]| cs.iter().map(|c| c.cluster_id.clone()).collect::<Vec<_>>();
    if ids(&ordered.clusters) != ids(&timeline.clusters) {
        return Err("timeline order differs from the ordering stage".into());
    }
    check_iso_dates_sorted(&timeline)?;
    check_explicit_orderings(doc, &timeline)
}

pub fn cluster_count(doc: &AnnotatedDocument) -> usize {
    let (bundles, _) = bundle_entities(doc);
    build_clusters(doc, &bundles).0.len()
}

/// Explicit TIMEX3-to-TIMEX3 orderings hold in the final cluster order,
/// except for as many as were reported dropped to break cycles.
pub fn check_explicit_orderings(doc: &AnnotatedDocument, timeline: &Timeline) -> Result<(), String> {
    let cluster_of: HashMap<&str, usize> = timeline
        .clusters
        .iter()
        .flat_map(|c| {
            std::iter::once((c.anchor_timex_id.as_str(), c.order_index))
                .chain(c.members.iter().map(move |m| (m.as_str(), c.order_index)))
        })
        .collect();
    let kinds: HashMap<&str, EntityKind> = doc.entities.iter().map(|e| (e.id.as_str(), e.kind)).collect();
    let is_timex = |id: &str| kinds.get(id) == Some(&EntityKind::Timex3) || id == DCT_ID;
    let violated = doc
        .relations
        .iter()
        .filter(|r| is_timex(&r.source_id) && is_timex(&r.target_id))
        .filter_map(|r| {
            let (s, t) = (
                cluster_of.get(r.source_id.as_str())?,
                cluster_of.get(r.target_id.as_str())?,
            );
            match r.kind {
                RelationKind::TimeBefore => Some(s >= t),
                RelationKind::TimeAfter => Some(s <= t),
                _ => None,
            }
        })
        .filter(|v| *v)
        .count();
    let dropped = timeline.diagnostics.iter().filter(|d| d.code == "order.cycle").count();
    if violated > dropped {
        return Err(format!("{violated} explicit orderings violated, {dropped} reported"));
    }
    Ok(())
}

/// Layout invariants: lanes are disjoint, each bundle is drawn exactly once,
/// and rows follow the category rules, re-derived from the raw relations.
///
/// The row check assumes SubRegion forms a forest in which only Anatomical
/// entities contain Anatomical ones.
pub fn layout_violations(doc: &AnnotatedDocument, timeline: &Timeline, layout: &LayoutModel) -> Vec<String> {
    let mut out = Vec::new();

    type Placed<'a> = (usize, usize, &'a str);
    let mut by_lane: HashMap<(&str, usize), Vec<Placed>> = HashMap::new();
    for b in &layout.bars {
        by_lane
            .entry((&b.row_id, b.lane))
            .or_default()
            .push((b.start_col, b.end_col, &b.bar_id));
    }
    for t in &layout.tables {
        by_lane
            .entry((&t.row_id, t.lane))
            .or_default()
            .push((t.start_col, t.end_col, &t.table_id));
    }
    for ((row, lane), items) in &by_lane {
        for (i, a) in items.iter().enumerate() {
            if a.0 > a.1 {
                out.push(format!("{} starts after it ends", a.2));
            }
            for b in &items[i + 1..] {
                if a.0 <= b.1 && b.0 <= a.1 {
                    out.push(format!("{} and {} overlap in {row} lane {lane}", a.2, b.2));
                }
            }
        }
    }

    let mut drawn: Vec<&str> = layout.bars.iter().map(|b| b.bundle_root_id.as_str()).collect();
    drawn.extend(
        layout
            .tables
            .iter()
            .flat_map(|t| t.entries.iter().map(|e| e.bundle_root_id.as_str())),
    );
    if drawn.len() != timeline.bundles.len() {
        out.push(format!(
            "{} bars+entries for {} bundles",
            drawn.len(),
            timeline.bundles.len()
        ));
    }
    let unique: HashSet<&str> = drawn.iter().copied().collect();
    for b in &timeline.bundles {
        if !unique.contains(b.root_id.as_str()) {
            out.push(format!("bundle {} not drawn", b.root_id));
        }
    }
    if layout.columns.len() != timeline.clusters.len() {
        out.push(format!(
            "{} columns for {} clusters",
            layout.columns.len(),
            timeline.clusters.len()
        ));
    }

    // Row rule, from the raw SubRegion relations.
    let kind: HashMap<&str, EntityKind> = doc.entities.iter().map(|e| (e.id.as_str(), e.kind)).collect();
    let surface: HashMap<&str, &str> = doc
        .entities
        .iter()
        .map(|e| (e.id.as_str(), e.surface.as_str()))
        .collect();
    let parent: HashMap<&str, &str> = doc
        .relations
        .iter()
        .filter(|r| r.kind == RelationKind::SubRegion)
        .map(|r| (r.target_id.as_str(), r.source_id.as_str()))
        .collect();
    let row_of_entity: HashMap<&str, &str> = layout
        .bars
        .iter()
        .flat_map(|b| b.entity_ids.iter().map(move |id| (id.as_str(), b.row_id.as_str())))
        .chain(layout.tables.iter().flat_map(|t| {
            t.entries
                .iter()
                .flat_map(move |e| e.entity_ids.iter().map(move |id| (id.as_str(), t.row_id.as_str())))
        }))
        .collect();
    let category: HashMap<&str, &RowCategory> = layout.rows.iter().map(|r| (r.row_id.as_str(), &r.category)).collect();
    let norm = |s: &str| s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase();
    for e in doc.entities.iter().filter(|e| e.kind == EntityKind::Disease) {
        let mut top = e.id.as_str();
        let mut steps = 0;
        while let Some(p) = parent.get(top) {
            top = p;
            steps += 1;
            if steps > doc.entities.len() {
                break;
            }
        }
        let Some(row) = row_of_entity.get(e.id.as_str()) else {
            out.push(format!("disease {} not drawn", e.id));
            continue;
        };
        let got = category.get(row).copied();
        let ok = match kind.get(top) {
            Some(EntityKind::Anatomical) => matches!(
                got,
                Some(RowCategory::AnatomicalGroup { name }) if norm(name) == norm(surface[top])
            ),
            _ => matches!(got, Some(RowCategory::Diseases)),
        };
        if !ok {
            out.push(format!("disease {} under {top} landed in row {row} ({got:?})", e.id));
        }
    }
    out
}
