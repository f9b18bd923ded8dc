use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::annotation::{parse_document, serialize_document, AnnotatedDocument};
use crate::diagnostic::Diagnostic;
use crate::layout::{layout_timeline, render_svg, timeline_to_view_json, LayoutConfig, LayoutModel, Spacing, Theme};
use crate::temporal::PatternTable;
use crate::timeline::{build_timeline_with, Timeline};

/// Per-call overrides, as accepted on the command line and in HTTP query
/// strings.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RequestOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dct: Option<NaiveDate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub show_empty_dct: Option<bool>,
}

/// Pipeline configuration: rule table, layout settings and colors. Cheap to
/// share; every method is pure.
#[derive(Debug, Clone)]
pub struct Engine {
    pub patterns: PatternTable,
    pub layout: LayoutConfig,
    pub theme: Theme,
}

impl Default for Engine {
    fn default() -> Self {
        Self {
            patterns: PatternTable::english().clone(),
            layout: LayoutConfig::default(),
            theme: Theme::default(),
        }
    }
}

impl Engine {
    /// A copy with the layout overrides of `options` applied.
    pub fn with_options(&self, options: &RequestOptions) -> Engine {
        let mut engine = self.clone();
        if let Some(spacing) = options.spacing {
            engine.layout.spacing = spacing;
        }
        if let Some(show) = options.show_empty_dct {
            engine.layout.show_empty_dct = show;
        }
        engine
    }

    pub fn parse(&self, xml: &str, dct: Option<NaiveDate>) -> Result<AnnotatedDocument, Vec<Diagnostic>> {
        parse_document(xml, dct)
    }

    /// Canonical wire form of a document.
    pub fn canonical_xml(&self, xml: &str, dct: Option<NaiveDate>) -> Result<String, Vec<Diagnostic>> {
        self.parse(xml, dct).map(|doc| serialize_document(&doc))
    }

    pub fn timeline(&self, xml: &str, dct: Option<NaiveDate>) -> Result<Timeline, Vec<Diagnostic>> {
        self.parse(xml, dct).map(|doc| self.timeline_of(&doc))
    }

    pub fn timeline_of(&self, doc: &AnnotatedDocument) -> Timeline {
        build_timeline_with(doc, &self.patterns)
    }

    pub fn layout_of(&self, timeline: &Timeline) -> LayoutModel {
        layout_timeline(timeline, &self.layout)
    }

    /// `heart-view/1` JSON for an annotated document.
    pub fn view_json(&self, xml: &str, dct: Option<NaiveDate>) -> Result<String, Vec<Diagnostic>> {
        let timeline = self.timeline(xml, dct)?;
        Ok(timeline_to_view_json(&timeline, &self.layout_of(&timeline)))
    }

    pub fn svg(&self, xml: &str, dct: Option<NaiveDate>) -> Result<String, Vec<Diagnostic>> {
        let timeline = self.timeline(xml, dct)?;
        Ok(render_svg(&self.layout_of(&timeline), &self.theme))
    }
}
