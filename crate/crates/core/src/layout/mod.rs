//! Gantt layout of a [`Timeline`]: clusters become columns, entity categories
//! become rows, spans become bars or key-value tables packed into lanes.

mod bars;
mod rows;
mod svg;
mod theme;
mod view;

use serde::{Deserialize, Serialize};

use crate::annotation::Span;
use crate::diagnostic::Diagnostic;
use crate::timeline::Timeline;

pub use bars::{layout_bars, pack_lanes};
pub use rows::{assign_rows, RowAssignment};
pub use svg::render_svg;
pub use theme::{Theme, ThemeError};
pub use view::{timeline_to_view_json, ViewDocument, VIEW_SCHEMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Ordinal,
    Proportional,
}

impl std::str::FromStr for Spacing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ordinal" => Ok(Spacing::Ordinal),
            "proportional" => Ok(Spacing::Proportional),
            other => Err(format!("unknown spacing `{other}` (expected ordinal or proportional)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct LayoutConfig {
    pub spacing: Spacing,
    /// Keep the DCT column even when nothing is placed on it. When off, an
    /// unused DCT column is dropped from the layout.
    pub show_empty_dct: bool,
    /// Characters of a supplemental label shown before truncation.
    pub label_budget: usize,
    pub column_width: f64,
    pub lane_height: f64,
    pub nested_line_height: f64,
    pub row_header_width: f64,
    pub header_height: f64,
    pub margin: f64,
    pub supplemental_margin: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self {
            spacing: Spacing::Ordinal,
            show_empty_dct: true,
            label_budget: 24,
            column_width: 140.0,
            lane_height: 26.0,
            nested_line_height: 14.0,
            row_header_width: 150.0,
            header_height: 48.0,
            margin: 16.0,
            supplemental_margin: 160.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColorToken {
    Orange,
    Pink,
    Violet,
    Green,
    Lightgreen,
}

impl ColorToken {
    pub const ALL: [ColorToken; 5] = [
        ColorToken::Orange,
        ColorToken::Pink,
        ColorToken::Violet,
        ColorToken::Green,
        ColorToken::Lightgreen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ColorToken::Orange => "orange",
            ColorToken::Pink => "pink",
            ColorToken::Violet => "violet",
            ColorToken::Green => "green",
            ColorToken::Lightgreen => "lightgreen",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase")]
pub enum RowCategory {
    AnatomicalGroup { name: String },
    Diseases,
    Test,
    Medicine,
    ClinicalTreatment,
}

impl RowCategory {
    pub fn color(&self) -> ColorToken {
        match self {
            RowCategory::AnatomicalGroup { .. } => ColorToken::Orange,
            RowCategory::Diseases => ColorToken::Pink,
            RowCategory::Test => ColorToken::Violet,
            RowCategory::Medicine => ColorToken::Green,
            RowCategory::ClinicalTreatment => ColorToken::Lightgreen,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            RowCategory::AnatomicalGroup { name } => name,
            RowCategory::Diseases => "Diseases",
            RowCategory::Test => "Test",
            RowCategory::Medicine => "Medicine",
            RowCategory::ClinicalTreatment => "Clinical treatment",
        }
    }

    /// Test and Medicine rows hold key-value tables instead of bars.
    pub fn uses_tables(&self) -> bool {
        matches!(self, RowCategory::Test | RowCategory::Medicine)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Lane {
    pub index: usize,
    /// Bar and table ids in placement order.
    pub items: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Row {
    pub row_id: String,
    pub category: RowCategory,
    pub color_token: ColorToken,
    pub label: String,
    pub lanes: Vec<Lane>,
    #[serde(default)]
    pub y: f64,
    #[serde(default)]
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StyleFlags {
    pub hollow: bool,
    pub strikethrough: bool,
    pub dashed: bool,
    pub gray: bool,
    pub cancelled: bool,
    pub outline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NestedLabel {
    pub entity_id: String,
    pub text: String,
    /// Indentation level, 1 or 2.
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SupplementalLabel {
    pub entity_id: String,
    /// Full text, kept for tooltips.
    pub text: String,
    /// Text as drawn, truncated to the label budget.
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Bar {
    pub bar_id: String,
    pub bundle_root_id: String,
    pub row_id: String,
    pub lane: usize,
    pub start_col: usize,
    pub end_col: usize,
    pub open_start: bool,
    pub open_end: bool,
    pub label: String,
    pub nested: Vec<NestedLabel>,
    pub supplemental_labels: Vec<SupplementalLabel>,
    pub style: StyleFlags,
    /// Entities drawn by this bar, for cross-highlighting.
    pub entity_ids: Vec<String>,
    pub source_spans: Vec<Span>,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableEntry {
    pub bundle_root_id: String,
    pub key: String,
    pub value: String,
    pub style: StyleFlags,
    pub entity_ids: Vec<String>,
    pub source_spans: Vec<Span>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct KeyValueTable {
    pub table_id: String,
    pub row_id: String,
    pub lane: usize,
    pub start_col: usize,
    pub end_col: usize,
    pub open_start: bool,
    pub open_end: bool,
    pub entries: Vec<TableEntry>,
    pub rect: Rect,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Column {
    pub cluster_id: String,
    pub order_index: usize,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolved_date: Option<String>,
    pub x: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CanvasMetrics {
    pub width: f64,
    pub height: f64,
    pub column_width: f64,
    pub lane_height: f64,
    pub nested_line_height: f64,
    pub row_header_width: f64,
    pub header_height: f64,
    pub margin: f64,
    pub legend_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutModel {
    pub title: String,
    pub spacing: Spacing,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
    pub bars: Vec<Bar>,
    pub tables: Vec<KeyValueTable>,
    pub metrics: CanvasMetrics,
    pub diagnostics: Vec<Diagnostic>,
}

impl LayoutModel {
    pub fn column(&self, order_index: usize) -> Option<&Column> {
        self.columns.iter().find(|c| c.order_index == order_index)
    }

    pub fn table_entry_count(&self) -> usize {
        self.tables.iter().map(|t| t.entries.len()).sum()
    }
}

/// Rows then bars: the whole layout in one call.
pub fn layout_timeline(timeline: &Timeline, config: &LayoutConfig) -> LayoutModel {
    let rows = assign_rows(timeline);
    layout_bars(&rows, timeline, config)
}
