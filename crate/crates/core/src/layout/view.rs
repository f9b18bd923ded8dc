use serde::{Deserialize, Serialize};

use super::LayoutModel;
use crate::timeline::Timeline;

pub const VIEW_SCHEMA: &str = "heart-view/1";

/// The document handed to viewers: the timeline (with source text and
/// entity offsets) next to its layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewDocument {
    pub schema: String,
    pub timeline: Timeline,
    pub layout: LayoutModel,
}

impl ViewDocument {
    pub fn new(timeline: Timeline, layout: LayoutModel) -> Self {
        Self {
            schema: VIEW_SCHEMA.to_string(),
            timeline,
            layout,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("view serializes");
        out.push('\n');
        out
    }

    /// Parse a view document, rejecting other schema versions.
    pub fn from_json(json: &str) -> Result<Self, String> {
        let view: ViewDocument = serde_json::from_str(json).map_err(|e| format!("invalid view JSON: {e}"))?;
        if view.schema != VIEW_SCHEMA {
            return Err(format!("unsupported schema `{}` (expected {VIEW_SCHEMA})", view.schema));
        }
        Ok(view)
    }
}

pub fn timeline_to_view_json(timeline: &Timeline, layout: &LayoutModel) -> String {
    ViewDocument::new(timeline.clone(), layout.clone()).to_json()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::parse_document;
    use crate::layout::{layout_timeline, render_svg, LayoutConfig, Theme};
    use crate::timeline::build_timeline;

    #[test]
    fn reparsed_view_renders_identically() {
        let doc = parse_document(
            r#"<doc id="n" dct="2021-04-01"><timex3 id="t1" type="date">2 weeks ago</timex3> <a id="a1" rel="subRegion:d1">lung</a> <d id="d1" rel="timeOn:t1">nodule</d> <f id="f1" rel="featureSbj:d1">5 mm</f></doc>"#,
            None,
        )
        .unwrap();
        let tl = build_timeline(&doc);
        let layout = layout_timeline(&tl, &LayoutConfig::default());
        let json = timeline_to_view_json(&tl, &layout);
        let back = ViewDocument::from_json(&json).unwrap();
        assert_eq!(back.layout, layout);
        assert_eq!(
            render_svg(&back.layout, &Theme::default()),
            render_svg(&layout, &Theme::default())
        );
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn empty_timeline_view() {
        let doc = parse_document(r#"<doc dct="2021-04-01">nothing</doc>"#, None).unwrap();
        let tl = build_timeline(&doc);
        let layout = layout_timeline(&tl, &LayoutConfig::default());
        let v: serde_json::Value = serde_json::from_str(&timeline_to_view_json(&tl, &layout)).unwrap();
        assert_eq!(v["schema"], VIEW_SCHEMA);
        assert_eq!(v["layout"]["bars"].as_array().unwrap().len(), 0);
        assert_eq!(v["layout"]["columns"].as_array().unwrap().len(), 1);
        assert_eq!(v["timeline"]["text"], "nothing");
    }

    #[test]
    fn wrong_schema_rejected() {
        let doc = parse_document(r#"<doc dct="2021-04-01"></doc>"#, None).unwrap();
        let tl = build_timeline(&doc);
        let layout = layout_timeline(&tl, &LayoutConfig::default());
        let json = timeline_to_view_json(&tl, &layout).replace(VIEW_SCHEMA, "heart-view/9");
        assert!(ViewDocument::from_json(&json).is_err());
    }
}
