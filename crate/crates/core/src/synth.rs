//! Random valid annotated documents, for property tests and benchmarks.

use chrono::{Days, NaiveDate};
use rand::seq::IndexedRandom;
use rand::Rng;

use crate::annotation::{
    AnnotatedDocument, Certainty, Entity, EntityKind, ExecState, Relation, RelationKind, Span, TimexType, DCT_ID,
};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub max_segments: usize,
    /// Keep SubRegion a forest (one container each, no cycles) with
    /// Anatomical over Anatomical or Disease and Disease over Disease only.
    pub tree_subregions: bool,
    /// Allow TIMEX3-to-TIMEX3 before/after links, which may contradict each
    /// other or the anchors.
    pub timex_links: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            max_segments: 14,
            tree_subregions: false,
            timex_links: true,
        }
    }
}

const DISEASES: &[&str] = &[
    "fever",
    "cough",
    "nodule",
    "pneumonia",
    "effusion",
    "ground-glass opacity",
    "mass",
    "édema",
];
const ANATOMY: &[&str] = &["lung", "left lung", "liver", "S1+2", "kidney", "chest"];
const FEATURES: &[&str] = &["5 mm", "solid", "spiculated", "part-solid"];
const CHANGES: &[&str] = &["enlarged", "no change", "decreased", "new"];
const TEST_KEYS: &[&str] = &["CRP", "WBC", "blood pressure"];
const TEST_VALS: &[&str] = &["2.3 mg/dL", "8900", "120/80", "<0.5"];
const MED_KEYS: &[&str] = &["tegafur", "aspirin", "cisplatin"];
const MED_VALS: &[&str] = &["300 mg", "100 mg", "2 tabs"];
const REMEDIES: &[&str] = &["chemotherapy", "surgery", "radiation"];
const CONTEXTS: &[&str] = &["follow-up", "admission", "discharge"];
const FILLER: &[&str] = &[
    " ",
    ", ",
    ". ",
    " and ",
    " on ",
    " with ",
    " & ",
    " (x>y) ",
    "\n",
    " \"noted\" ",
    "; ",
];
const NUMBER_WORDS: &[&str] = &["two", "three", "five", "ten"];
const UNITS: &[&str] = &["days", "weeks", "months", "years"];
const UNRESOLVED: &[&str] = &["at admission", "before surgery", "on discharge", "recently"];

fn timex_surface(rng: &mut impl Rng, dct: NaiveDate) -> (String, TimexType) {
    match rng.random_range(0..6) {
        0 | 1 => {
            let offset = rng.random_range(0..900u64);
            let date = if rng.random_bool(0.8) {
                dct.checked_sub_days(Days::new(offset))
            } else {
                dct.checked_add_days(Days::new(offset % 60))
            }
            .unwrap_or(dct);
            (date.format("%Y-%m-%d").to_string(), TimexType::Date)
        }
        2 => {
            let n = rng.random_range(1..40);
            let unit = UNITS.choose(rng).expect("non-empty");
            let dir = if rng.random_bool(0.7) { "ago" } else { "later" };
            (format!("{n} {unit} {dir}"), TimexType::Date)
        }
        3 => {
            let n = NUMBER_WORDS.choose(rng).expect("non-empty");
            let unit = UNITS.choose(rng).expect("non-empty");
            (format!("for {n} {unit}"), TimexType::Duration)
        }
        4 => (
            (*["yesterday", "today", "last month", "next week"]
                .choose(rng)
                .expect("non-empty"))
            .to_string(),
            TimexType::Date,
        ),
        _ => (
            (*UNRESOLVED.choose(rng).expect("non-empty")).to_string(),
            TimexType::Misc,
        ),
    }
}

struct Builder {
    text: String,
    len: usize,
    entities: Vec<Entity>,
}

impl Builder {
    fn push_text(&mut self, s: &str) {
        self.text.push_str(s);
        self.len += s.chars().count();
    }

    fn push_entity(&mut self, kind: EntityKind, surface: &str) -> usize {
        let start = self.len;
        self.push_text(surface);
        let id = format!("e{}", self.entities.len() + 1);
        self.entities
            .push(Entity::new(id, kind, Span::new(start, self.len), surface));
        self.entities.len() - 1
    }
}

/// A random document that passes validation. Entities may nest textually
/// (an anatomical phrase around its disease) but never cross.
pub fn random_document(rng: &mut impl Rng, config: &SynthConfig) -> AnnotatedDocument {
    let dct = NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date") + Days::new(rng.random_range(0..3650));
    let mut b = Builder {
        text: String::new(),
        len: 0,
        entities: Vec::new(),
    };
    let segments = rng.random_range(0..=config.max_segments);
    for _ in 0..segments {
        b.push_text(FILLER.choose(rng).expect("non-empty"));
        match rng.random_range(0..12) {
            0 | 1 => {
                let (surface, ty) = timex_surface(rng, dct);
                let i = b.push_entity(EntityKind::Timex3, &surface);
                b.entities[i].timex_type = Some(ty);
            }
            2 | 3 => {
                b.push_entity(EntityKind::Disease, DISEASES.choose(rng).expect("non-empty"));
            }
            4 => {
                // "left lung nodule": an anatomical span around a disease span.
                let start = b.len;
                b.push_text(ANATOMY.choose(rng).expect("non-empty"));
                b.push_text(" ");
                let inner = b.push_entity(EntityKind::Disease, DISEASES.choose(rng).expect("non-empty"));
                let surface: String = b.text.chars().skip(start).collect();
                let id = format!("e{}", b.entities.len() + 1);
                b.entities.insert(
                    inner,
                    Entity::new(id, EntityKind::Anatomical, Span::new(start, b.len), surface),
                );
            }
            5 => {
                b.push_entity(EntityKind::Anatomical, ANATOMY.choose(rng).expect("non-empty"));
            }
            6 => {
                b.push_entity(EntityKind::Feature, FEATURES.choose(rng).expect("non-empty"));
            }
            7 => {
                b.push_entity(EntityKind::Change, CHANGES.choose(rng).expect("non-empty"));
            }
            8 => {
                b.push_entity(EntityKind::TestKey, TEST_KEYS.choose(rng).expect("non-empty"));
                if rng.random_bool(0.8) {
                    b.push_text(" ");
                    b.push_entity(EntityKind::TestVal, TEST_VALS.choose(rng).expect("non-empty"));
                }
            }
            9 => {
                b.push_entity(EntityKind::MedKey, MED_KEYS.choose(rng).expect("non-empty"));
                if rng.random_bool(0.8) {
                    b.push_text(" ");
                    b.push_entity(EntityKind::MedVal, MED_VALS.choose(rng).expect("non-empty"));
                }
            }
            10 => {
                b.push_entity(EntityKind::Remedy, REMEDIES.choose(rng).expect("non-empty"));
            }
            _ => {
                b.push_entity(EntityKind::ClinicalContext, CONTEXTS.choose(rng).expect("non-empty"));
            }
        }
    }
    b.push_text(".");

    let mut entities = b.entities;
    for e in &mut entities {
        match e.kind {
            EntityKind::Disease if rng.random_bool(0.7) => {
                e.certainty = Some(*Certainty::ALL.choose(rng).expect("non-empty"));
            }
            EntityKind::TestKey | EntityKind::MedKey | EntityKind::Remedy if rng.random_bool(0.6) => {
                e.state = Some(*ExecState::ALL.choose(rng).expect("non-empty"));
            }
            _ => {}
        }
    }
    let relations = random_relations(rng, &entities, config);
    AnnotatedDocument::new(
        format!("synth-{}", rng.random::<u32>()),
        b.text,
        dct,
        entities,
        relations,
    )
}

fn random_relations(rng: &mut impl Rng, entities: &[Entity], config: &SynthConfig) -> Vec<Relation> {
    let ids_of = |pred: &dyn Fn(&Entity) -> bool| -> Vec<&str> {
        entities.iter().filter(|e| pred(e)).map(|e| e.id.as_str()).collect()
    };
    let timexes = ids_of(&|e| e.kind == EntityKind::Timex3);
    let points = ids_of(&|e| e.kind == EntityKind::Timex3 && e.timex_type != Some(TimexType::Duration));
    let subjects = ids_of(&|e| matches!(e.kind, EntityKind::Disease | EntityKind::Anatomical));
    let diseases = ids_of(&|e| e.kind == EntityKind::Disease);
    let temporal = [
        RelationKind::TimeOn,
        RelationKind::TimeOn,
        RelationKind::TimeBegin,
        RelationKind::TimeEnd,
        RelationKind::TimeBefore,
        RelationKind::TimeAfter,
    ];
    let mut rels = Vec::new();
    let mut contained: Vec<&str> = Vec::new();
    let mut paired: Vec<&str> = Vec::new();

    for (i, e) in entities.iter().enumerate() {
        let id = e.id.as_str();
        match e.kind {
            EntityKind::Timex3 if e.timex_type == Some(TimexType::Duration) => {
                for kind in [RelationKind::TimeBegin, RelationKind::TimeEnd] {
                    if let Some(t) = points.choose(rng).filter(|_| rng.random_bool(0.5)) {
                        rels.push(Relation::new(kind, id, *t));
                    }
                }
            }
            EntityKind::Timex3 => {
                if config.timex_links && rng.random_bool(0.3) {
                    if let Some(t) = points.choose(rng).filter(|t| **t != id) {
                        let kind = if rng.random_bool(0.5) {
                            RelationKind::TimeBefore
                        } else {
                            RelationKind::TimeAfter
                        };
                        rels.push(Relation::new(kind, id, *t));
                    }
                }
            }
            EntityKind::Feature => {
                if let Some(s) = subjects.choose(rng).filter(|_| rng.random_bool(0.8)) {
                    rels.push(Relation::new(RelationKind::FeatureSbj, id, *s));
                }
            }
            EntityKind::Change => {
                if let Some(s) = diseases.choose(rng) {
                    rels.push(Relation::new(RelationKind::ChangeSbj, id, *s));
                    if let Some(r) = diseases.choose(rng).filter(|r| *r != s && rng.random_bool(0.5)) {
                        rels.push(Relation::new(RelationKind::ChangeRef, id, *r));
                    }
                }
            }
            EntityKind::TestKey | EntityKind::MedKey => {
                let want = if e.kind == EntityKind::TestKey {
                    EntityKind::TestVal
                } else {
                    EntityKind::MedVal
                };
                if let Some(v) = entities.get(i + 1).filter(|v| v.kind == want) {
                    if !paired.contains(&v.id.as_str()) {
                        paired.push(v.id.as_str());
                        rels.push(Relation::new(RelationKind::KeyValue, id, v.id.as_str()));
                    }
                }
            }
            EntityKind::Anatomical | EntityKind::Disease => {
                let candidates: Vec<&Entity> = entities[i + 1..]
                    .iter()
                    .filter(|t| match (e.kind, t.kind) {
                        (_, EntityKind::Disease) => true,
                        (EntityKind::Anatomical, EntityKind::Anatomical) => true,
                        (EntityKind::Disease, EntityKind::Anatomical) => !config.tree_subregions,
                        _ => false,
                    })
                    .filter(|t| !config.tree_subregions || !contained.contains(&t.id.as_str()))
                    .collect();
                if let Some(t) = candidates.choose(rng).filter(|_| rng.random_bool(0.4)) {
                    contained.push(t.id.as_str());
                    rels.push(Relation::new(RelationKind::SubRegion, id, t.id.as_str()));
                }
                if !config.tree_subregions && rng.random_bool(0.05) {
                    // Backwards link; may close a containment cycle.
                    if let Some(t) = subjects.choose(rng).filter(|t| **t != id) {
                        rels.push(Relation::new(RelationKind::SubRegion, id, *t));
                    }
                }
            }
            _ => {}
        }

        if e.kind != EntityKind::Timex3 && rng.random_bool(0.6) {
            let kind = *temporal.choose(rng).expect("non-empty");
            let target = if rng.random_bool(0.15) {
                Some(DCT_ID)
            } else {
                timexes.choose(rng).copied()
            };
            if let Some(t) = target {
                rels.push(Relation::new(kind, id, t));
                if kind == RelationKind::TimeBegin && rng.random_bool(0.5) {
                    if let Some(end) = points.choose(rng) {
                        rels.push(Relation::new(RelationKind::TimeEnd, id, *end));
                    }
                }
            }
        }
    }
    rels.dedup();
    rels
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::validate_document;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_documents_validate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for config in [
            SynthConfig::default(),
            SynthConfig {
                tree_subregions: true,
                ..SynthConfig::default()
            },
        ] {
            for _ in 0..300 {
                let doc = random_document(&mut rng, &config);
                let errors: Vec<_> = validate_document(&doc).into_iter().filter(|d| d.is_error()).collect();
                assert!(errors.is_empty(), "{errors:?}\n{doc:?}");
            }
        }
    }
}
