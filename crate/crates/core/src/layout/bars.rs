use std::collections::HashMap;

use chrono::Datelike;

use super::rows::RowAssignment;
use super::{
    Bar, CanvasMetrics, Column, KeyValueTable, Lane, LayoutConfig, LayoutModel, NestedLabel, Rect, Spacing, StyleFlags,
    SupplementalLabel, TableEntry,
};
use crate::annotation::{Certainty, Entity, EntityKind, ExecState, Span};
use crate::diagnostic::Diagnostic;
use crate::timeline::{EntityBundle, EntitySpan, Timeline};

const BAR_PAD: f64 = 4.0;
const ROW_PAD: f64 = 6.0;
const LEGEND_HEIGHT: f64 = 36.0;

/// Greedy first-fit lane packing. Intervals must come sorted by start; each
/// goes to the lowest lane whose last interval ends before it starts.
pub fn pack_lanes(intervals: &[(usize, usize)]) -> Vec<usize> {
    let mut lane_ends: Vec<usize> = Vec::new();
    intervals
        .iter()
        .map(|&(start, end)| match lane_ends.iter().position(|&last| last < start) {
            Some(lane) => {
                lane_ends[lane] = end;
                lane
            }
            None => {
                lane_ends.push(end);
                lane_ends.len() - 1
            }
        })
        .collect()
}

/// (begin, end, open start, open end) of a span.
type SpanKey = (usize, usize, bool, bool);

enum Item {
    Bar(usize),
    Table(Vec<usize>),
}

/// Place every bundle of `timeline` as a bar, or for Test and Medicine rows
/// as an entry of a key-value table shared by bundles with identical spans,
/// then pack lanes and compute coordinates.
pub fn layout_bars(rows: &RowAssignment, timeline: &Timeline, config: &LayoutConfig) -> LayoutModel {
    let entities = timeline.entity_index();
    let spans: HashMap<&str, &EntitySpan> = timeline.spans.iter().map(|s| (s.bundle_root_id.as_str(), s)).collect();
    let span_of = |b: &EntityBundle| -> EntitySpan {
        spans
            .get(b.root_id.as_str())
            .map(|s| (*s).clone())
            .unwrap_or(EntitySpan {
                bundle_root_id: b.root_id.clone(),
                begin_cluster: 0,
                end_cluster: 0,
                open_start: false,
                open_end: false,
            })
    };
    let mut diagnostics = Vec::new();

    let dct_used = timeline.spans.iter().any(|s| {
        timeline.cluster_at(s.begin_cluster).is_some_and(|c| c.is_dct())
            || timeline.cluster_at(s.end_cluster).is_some_and(|c| c.is_dct())
    });
    let visible: Vec<_> = timeline
        .clusters
        .iter()
        .filter(|c| config.show_empty_dct || dct_used || !c.is_dct())
        .collect();
    let cw = config.column_width;
    let plot_x = config.margin + config.row_header_width;
    let offsets = column_offsets(timeline, &visible, config, &mut diagnostics);
    let columns: Vec<Column> = visible
        .iter()
        .zip(&offsets)
        .map(|(c, off)| Column {
            cluster_id: c.cluster_id.clone(),
            order_index: c.order_index,
            label: c.anchor_label.clone(),
            resolved_date: c.resolved_date.clone(),
            x: plot_x + off,
            width: cw,
        })
        .collect();
    let col_x: HashMap<usize, f64> = columns.iter().map(|c| (c.order_index, c.x)).collect();
    let x_of = |col: usize| col_x.get(&col).copied().unwrap_or(plot_x);

    let mut out_rows = rows.rows.clone();
    let mut bars = Vec::new();
    let mut tables = Vec::new();
    let mut y = config.margin + config.header_height;

    for row in &mut out_rows {
        let members: Vec<usize> = (0..timeline.bundles.len())
            .filter(|&i| rows.bundle_rows[i] == row.row_id)
            .collect();
        let mut items: Vec<(SpanKey, usize, Item)> = Vec::new();
        if row.category.uses_tables() {
            for &i in &members {
                let s = span_of(&timeline.bundles[i]);
                let key = (s.begin_cluster, s.end_cluster, s.open_start, s.open_end);
                match items.iter_mut().find(|(k, _, _)| *k == key) {
                    Some((_, _, Item::Table(list))) => list.push(i),
                    _ => items.push((key, i, Item::Table(vec![i]))),
                }
            }
        } else {
            for &i in &members {
                let s = span_of(&timeline.bundles[i]);
                items.push((
                    (s.begin_cluster, s.end_cluster, s.open_start, s.open_end),
                    i,
                    Item::Bar(i),
                ));
            }
        }
        // Stable on bundle order, which is document order of roots.
        items.sort_by_key(|((start, end, _, _), first, _)| (*start, *end, *first));
        let intervals: Vec<(usize, usize)> = items.iter().map(|((s, e, _, _), _, _)| (*s, *e)).collect();
        let lanes = pack_lanes(&intervals);
        let lane_count = lanes.iter().max().map_or(0, |m| m + 1);

        let mut row_bars: Vec<Bar> = Vec::new();
        let mut row_tables: Vec<KeyValueTable> = Vec::new();
        let mut lane_heights = vec![config.lane_height; lane_count];
        let mut placement: Vec<(bool, usize)> = Vec::new();
        for (((start, end, open_start, open_end), _, item), lane) in items.into_iter().zip(lanes) {
            let height = match item {
                Item::Bar(i) => {
                    let bar = make_bar(timeline, &entities, &timeline.bundles[i], row, config);
                    let h = config.lane_height + bar.nested.len() as f64 * config.nested_line_height;
                    row_bars.push(Bar {
                        bar_id: format!("bar-{}", timeline.bundles[i].root_id),
                        lane,
                        start_col: start,
                        end_col: end,
                        open_start,
                        open_end,
                        ..bar
                    });
                    placement.push((true, row_bars.len() - 1));
                    h
                }
                Item::Table(list) => {
                    let entries: Vec<TableEntry> = list
                        .iter()
                        .map(|&i| make_entry(&entities, &timeline.bundles[i]))
                        .collect();
                    let h = (entries.len() as f64 * config.nested_line_height + 2.0 * BAR_PAD).max(config.lane_height);
                    row_tables.push(KeyValueTable {
                        table_id: format!("table-{}", timeline.bundles[list[0]].root_id),
                        row_id: row.row_id.clone(),
                        lane,
                        start_col: start,
                        end_col: end,
                        open_start,
                        open_end,
                        entries,
                        rect: Rect::default(),
                    });
                    placement.push((false, row_tables.len() - 1));
                    h
                }
            };
            lane_heights[lane] = lane_heights[lane].max(height);
        }

        let mut lane_y = Vec::with_capacity(lane_count);
        let mut cursor = y + ROW_PAD / 2.0;
        for h in &lane_heights {
            lane_y.push(cursor);
            cursor += h;
        }
        row.y = y;
        row.height = lane_heights.iter().sum::<f64>() + ROW_PAD;
        row.lanes = (0..lane_count)
            .map(|index| Lane {
                index,
                items: Vec::new(),
            })
            .collect();
        let rect_for = |lane: usize, start: usize, end: usize, h: f64| Rect {
            x: x_of(start) + BAR_PAD,
            y: lane_y[lane] + BAR_PAD / 2.0,
            w: (x_of(end) + cw - BAR_PAD) - (x_of(start) + BAR_PAD),
            h: h - BAR_PAD,
        };
        for (is_bar, idx) in placement {
            if is_bar {
                let bar = &mut row_bars[idx];
                let h = config.lane_height + bar.nested.len() as f64 * config.nested_line_height;
                bar.rect = rect_for(bar.lane, bar.start_col, bar.end_col, h);
                row.lanes[bar.lane].items.push(bar.bar_id.clone());
            } else {
                let table = &mut row_tables[idx];
                let h =
                    (table.entries.len() as f64 * config.nested_line_height + 2.0 * BAR_PAD).max(config.lane_height);
                table.rect = rect_for(table.lane, table.start_col, table.end_col, h);
                row.lanes[table.lane].items.push(table.table_id.clone());
            }
        }
        y += row.height;
        bars.extend(row_bars);
        tables.extend(row_tables);
    }

    let plot_width = offsets.last().map_or(0.0, |last| last + cw);
    let legend_y = y + config.margin;
    let metrics = CanvasMetrics {
        width: plot_x + plot_width + config.supplemental_margin + config.margin,
        height: legend_y + LEGEND_HEIGHT + config.margin,
        column_width: cw,
        lane_height: config.lane_height,
        nested_line_height: config.nested_line_height,
        row_header_width: config.row_header_width,
        header_height: config.header_height,
        margin: config.margin,
        legend_y,
    };
    LayoutModel {
        title: timeline.doc_id.clone(),
        spacing: if diagnostics.is_empty() {
            config.spacing
        } else {
            Spacing::Ordinal
        },
        columns,
        rows: out_rows,
        bars,
        tables,
        metrics,
        diagnostics,
    }
}

/// Column offsets from the plot origin. Proportional spacing needs every
/// visible anchor to resolve; columns never come closer than one width.
fn column_offsets(
    timeline: &Timeline,
    visible: &[&crate::timeline::TimeCluster],
    config: &LayoutConfig,
    diagnostics: &mut Vec<Diagnostic>,
) -> Vec<f64> {
    let cw = config.column_width;
    let ordinal = || (0..visible.len()).map(|i| i as f64 * cw).collect::<Vec<_>>();
    if config.spacing == Spacing::Ordinal || visible.len() < 2 {
        return ordinal();
    }
    let days: Option<Vec<i64>> = visible
        .iter()
        .map(|c| {
            c.anchor
                .resolve(timeline.dct)
                .map(|d| d.first_day().num_days_from_ce().into())
        })
        .collect();
    let Some(days) = days else {
        let unresolved: Vec<&str> = visible
            .iter()
            .filter(|c| c.anchor.resolve(timeline.dct).is_none())
            .map(|c| c.anchor_label.as_str())
            .collect();
        let msg = format!(
            "proportional spacing needs resolved anchors; {} do not resolve ({}); using ordinal spacing",
            unresolved.len(),
            unresolved.join(", ")
        );
        diagnostics.push(Diagnostic::warning("layout.proportional-fallback", msg));
        return ordinal();
    };
    let min = *days.iter().min().expect("at least two columns");
    let max = *days.iter().max().expect("at least two columns");
    let per_day = if max > min {
        cw * (visible.len() - 1) as f64 / (max - min) as f64
    } else {
        0.0
    };
    let mut offsets: Vec<f64> = Vec::with_capacity(days.len());
    for d in days {
        let raw = (d - min) as f64 * per_day;
        let x = match offsets.last() {
            Some(prev) => raw.max(prev + cw),
            None => 0.0,
        };
        offsets.push(x.round());
    }
    offsets
}

fn style_of(entity: Option<&Entity>) -> StyleFlags {
    let mut style = StyleFlags::default();
    let Some(e) = entity else { return style };
    match e.certainty {
        Some(Certainty::Negative) => {
            style.hollow = true;
            style.strikethrough = true;
        }
        Some(Certainty::Suspicious) => style.dashed = true,
        Some(Certainty::General) => style.gray = true,
        _ => {}
    }
    match e.state {
        Some(ExecState::Negated) => style.cancelled = true,
        Some(ExecState::Scheduled) => style.outline = true,
        _ => {}
    }
    style
}

fn spans_of(entities: &HashMap<&str, &Entity>, ids: &[String]) -> Vec<Span> {
    ids.iter()
        .filter_map(|id| entities.get(id.as_str()).map(|e| e.span))
        .collect()
}

fn surface<'a>(entities: &HashMap<&str, &'a Entity>, id: &str) -> &'a str {
    entities.get(id).map_or("", |e| e.surface.as_str())
}

pub(crate) fn truncate(text: &str, budget: usize) -> String {
    if text.chars().count() <= budget {
        return text.to_string();
    }
    let keep = budget.saturating_sub(1);
    let mut out: String = text.chars().take(keep).collect();
    out.push('…');
    out
}

fn make_bar(
    timeline: &Timeline,
    entities: &HashMap<&str, &Entity>,
    bundle: &EntityBundle,
    row: &super::Row,
    config: &LayoutConfig,
) -> Bar {
    let root = entities.get(bundle.root_id.as_str()).copied();
    // An anatomical bar is titled by its first disease; the part itself names the row.
    let primary = match root.map(|e| e.kind) {
        Some(EntityKind::Anatomical) => bundle
            .contained_ids
            .iter()
            .find(|id| entities.get(id.as_str()).is_some_and(|e| e.kind == EntityKind::Disease))
            .map_or(bundle.root_id.as_str(), String::as_str),
        _ => bundle.root_id.as_str(),
    };

    let mut nested = Vec::new();
    let mut path: Vec<&str> = Vec::new();
    for (id, &depth) in bundle.contained_ids.iter().zip(&bundle.contained_depths) {
        path.truncate(depth - 1);
        path.push(surface(entities, id));
        if id == primary {
            continue;
        }
        let text = if depth > 2 {
            path[1..].join(" / ")
        } else {
            path[depth - 1].to_string()
        };
        nested.push(NestedLabel {
            entity_id: id.clone(),
            text,
            depth: depth.min(2),
        });
    }
    if let Some(v) = &bundle.key_value {
        nested.push(NestedLabel {
            entity_id: v.clone(),
            text: surface(entities, v).to_string(),
            depth: 1,
        });
    }

    let mut supplemental = Vec::new();
    for id in &bundle.features {
        let text = surface(entities, id).to_string();
        supplemental.push(SupplementalLabel {
            entity_id: id.clone(),
            display: truncate(&text, config.label_budget),
            text,
        });
    }
    for change in &bundle.changes {
        let mut text = surface(entities, &change.change_id).to_string();
        if let Some(r) = &change.ref_id {
            let when = timeline
                .bundles
                .iter()
                .find(|b| b.all_members().any(|m| m == r))
                .and_then(|b| timeline.span_of(&b.root_id))
                .and_then(|s| timeline.cluster_at(s.begin_cluster))
                .map(|c| c.anchor_label.as_str());
            match when {
                Some(label) => text.push_str(&format!(" (vs. {} {label})", surface(entities, r))),
                None => text.push_str(&format!(" (vs. {})", surface(entities, r))),
            }
        }
        supplemental.push(SupplementalLabel {
            entity_id: change.change_id.clone(),
            display: truncate(&text, config.label_budget),
            text,
        });
    }

    let entity_ids: Vec<String> = bundle.all_members().map(str::to_string).collect();
    Bar {
        bar_id: String::new(),
        bundle_root_id: bundle.root_id.clone(),
        row_id: row.row_id.clone(),
        lane: 0,
        start_col: 0,
        end_col: 0,
        open_start: false,
        open_end: false,
        label: surface(entities, primary).to_string(),
        nested,
        supplemental_labels: supplemental,
        style: style_of(entities.get(primary).copied()),
        source_spans: spans_of(entities, &entity_ids),
        entity_ids,
        rect: Rect::default(),
    }
}

fn make_entry(entities: &HashMap<&str, &Entity>, bundle: &EntityBundle) -> TableEntry {
    let root = entities.get(bundle.root_id.as_str()).copied();
    let root_is_value = root.is_some_and(|e| matches!(e.kind, EntityKind::TestVal | EntityKind::MedVal));
    let (key, value) = if root_is_value {
        (String::new(), surface(entities, &bundle.root_id).to_string())
    } else {
        let value = bundle.key_value.as_deref().map_or("", |v| surface(entities, v));
        (surface(entities, &bundle.root_id).to_string(), value.to_string())
    };
    let entity_ids: Vec<String> = bundle.all_members().map(str::to_string).collect();
    TableEntry {
        bundle_root_id: bundle.root_id.clone(),
        key,
        value,
        style: style_of(root),
        source_spans: spans_of(entities, &entity_ids),
        entity_ids,
    }
}
