use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Row, RowCategory};
use crate::annotation::EntityKind;
use crate::timeline::Timeline;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RowAssignment {
    /// Rows in display order, lanes still empty.
    pub rows: Vec<Row>,
    /// Row id of each timeline bundle, parallel to `Timeline::bundles`.
    pub bundle_rows: Vec<String>,
}

impl RowAssignment {
    pub fn row_of(&self, timeline: &Timeline, root_id: &str) -> Option<&Row> {
        let i = timeline.bundles.iter().position(|b| b.root_id == root_id)?;
        self.rows.iter().find(|r| r.row_id == self.bundle_rows[i])
    }
}

/// Grouping key for anatomical rows: two mentions of "Lung" and "lung" share
/// one row.
pub(crate) fn anatomical_key(surface: &str) -> String {
    surface.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

/// Assign every bundle to a row.
///
/// A bundle rooted at an Anatomical entity goes to that part's group (its
/// SubRegion diseases ride along); Disease bundles without an anatomical
/// container and unattached Feature/Change entities go to Diseases; tests,
/// medicines and treatments (Remedy, ClinicalContext) get their own rows.
/// Anatomical groups come first in order of first mention, then Diseases,
/// Test, Medicine and Clinical treatment. Empty rows are omitted.
pub fn assign_rows(timeline: &Timeline) -> RowAssignment {
    let entities = timeline.entity_index();
    let mut groups: Vec<(String, String)> = Vec::new();
    let mut group_slot: HashMap<String, usize> = HashMap::new();
    let mut categories = Vec::with_capacity(timeline.bundles.len());

    for bundle in &timeline.bundles {
        let root = entities.get(bundle.root_id.as_str());
        let category = match root.map(|e| e.kind) {
            Some(EntityKind::Anatomical) => {
                let surface = &root.expect("kind implies entity").surface;
                let key = anatomical_key(surface);
                let slot = *group_slot.entry(key.clone()).or_insert_with(|| {
                    groups.push((key, surface.clone()));
                    groups.len() - 1
                });
                CategorySlot::Anatomical(slot)
            }
            Some(EntityKind::TestKey | EntityKind::TestVal) => CategorySlot::Fixed(RowCategory::Test),
            Some(EntityKind::MedKey | EntityKind::MedVal) => CategorySlot::Fixed(RowCategory::Medicine),
            Some(EntityKind::Remedy | EntityKind::ClinicalContext) => {
                CategorySlot::Fixed(RowCategory::ClinicalTreatment)
            }
            _ => CategorySlot::Fixed(RowCategory::Diseases),
        };
        categories.push(category);
    }

    let fixed = [
        (RowCategory::Diseases, "row-diseases"),
        (RowCategory::Test, "row-test"),
        (RowCategory::Medicine, "row-medicine"),
        (RowCategory::ClinicalTreatment, "row-treatment"),
    ];
    let group_id = |slot: usize| format!("row-anatomy-{}", slot + 1);
    let mut rows: Vec<Row> = groups
        .iter()
        .enumerate()
        .map(|(slot, (_, name))| new_row(group_id(slot), RowCategory::AnatomicalGroup { name: name.clone() }))
        .collect();
    for (category, id) in &fixed {
        if categories
            .iter()
            .any(|c| matches!(c, CategorySlot::Fixed(f) if f == category))
        {
            rows.push(new_row(id.to_string(), category.clone()));
        }
    }

    let bundle_rows = categories
        .into_iter()
        .map(|c| match c {
            CategorySlot::Anatomical(slot) => group_id(slot),
            CategorySlot::Fixed(category) => fixed
                .iter()
                .find(|(f, _)| *f == category)
                .expect("fixed row")
                .1
                .to_string(),
        })
        .collect();
    RowAssignment { rows, bundle_rows }
}

enum CategorySlot {
    Anatomical(usize),
    Fixed(RowCategory),
}

fn new_row(row_id: String, category: RowCategory) -> Row {
    Row {
        row_id,
        color_token: category.color(),
        label: category.label().to_string(),
        category,
        lanes: Vec::new(),
        y: 0.0,
        height: 0.0,
    }
}
