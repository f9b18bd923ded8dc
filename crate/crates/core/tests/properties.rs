use heart_core::annotation::{parse_document, serialize_document, AnnotatedDocument, TimexType};
use heart_core::eval::{bigram_overlap, placement_accuracy, timeline_similarity, GoldPlacement};
use heart_core::layout::{layout_timeline, LayoutConfig};
use heart_core::synth::{random_document, SynthConfig};
use heart_core::temporal::normalize_timex;
use heart_core::timeline::{build_clusters, build_timeline, bundle_entities, order_clusters, Timeline};
use heart_testkit as kit;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn doc_from_seed(seed: u64, config: &SynthConfig) -> AnnotatedDocument {
    random_document(&mut kit::seeded(seed), config)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn serialize_then_parse_is_identity(seed in any::<u64>()) {
        let doc = doc_from_seed(seed, &SynthConfig::default());
        let xml = serialize_document(&doc);
        let back = parse_document(&xml, None).map_err(|d| TestCaseError::fail(format!("{d:?}")))?;
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize_document(&back), xml);
    }

    #[test]
    fn crossing_brackets_are_rejected(a in "[a-z]{1,6}", b in "[a-z]{1,6}", c in "[a-z]{1,6}") {
        let xml = format!(r#"<doc dct="2021-01-01"><d id="x">{a} <a id="y">{b}</d> {c}</a></doc>"#);
        prop_assert!(parse_document(&xml, None).is_err());
    }

    #[test]
    fn entity_and_relation_order_do_not_matter(seed in any::<u64>(), shuffle in any::<u64>()) {
        let doc = doc_from_seed(seed, &SynthConfig::default());
        let mut rng = kit::seeded(shuffle);
        let mut entities = doc.entities.clone();
        let mut relations = doc.relations.clone();
        entities.shuffle(&mut rng);
        relations.shuffle(&mut rng);
        let shuffled = AnnotatedDocument::new(doc.doc_id.clone(), doc.text.clone(), doc.dct, entities, relations);
        prop_assert_eq!(build_timeline(&shuffled), build_timeline(&doc));
    }

    #[test]
    fn similarity_is_symmetric_and_reflexive(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = build_timeline(&doc_from_seed(s1, &SynthConfig::default()));
        let b = build_timeline(&doc_from_seed(s2, &SynthConfig::default()));
        prop_assert_eq!(timeline_similarity(&a, &a), 1.0);
        prop_assert_eq!(timeline_similarity(&a, &b), timeline_similarity(&b, &a));
        let s = timeline_similarity(&a, &b);
        prop_assert!((0.0..=1.0).contains(&s));
    }
}

#[test]
fn relative_dates_match_the_day_number_oracle() {
    let cases = kit::calendar_cases(7, 200);
    let mut failures = Vec::new();
    for case in &cases {
        let got = normalize_timex(&case.surface, TimexType::Date, case.dct)
            .resolve(case.dct)
            .map(|d| d.to_string());
        if got.as_deref() != Some(case.expected.as_str()) {
            failures.push(format!(
                "{} from {}: {got:?} != {}",
                case.surface, case.dct, case.expected
            ));
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn cluster_order_is_a_linear_extension_on_fixtures() {
    for (name, xml) in kit::corpus() {
        let doc = parse_document(&xml, None).unwrap();
        kit::check_cluster_order(&doc).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn cluster_order_is_a_linear_extension_on_random_documents() {
    let config = SynthConfig {
        max_segments: 8,
        ..SynthConfig::default()
    };
    let mut checked = 0;
    for seed in 0..2000u64 {
        let doc = doc_from_seed(seed, &config);
        if kit::cluster_count(&doc) > 8 {
            continue;
        }
        kit::check_cluster_order(&doc).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        checked += 1;
    }
    assert!(checked >= 500, "only {checked} documents within the brute-force bound");
}

#[test]
fn random_layouts_satisfy_invariants() {
    let config = SynthConfig {
        tree_subregions: true,
        ..SynthConfig::default()
    };
    for seed in 0..500u64 {
        let doc = doc_from_seed(seed, &config);
        let timeline = build_timeline(&doc);
        let layout = layout_timeline(&timeline, &LayoutConfig::default());
        let problems = kit::layout_violations(&doc, &timeline, &layout);
        assert!(problems.is_empty(), "seed {seed}: {problems:#?}");
    }
}

#[test]
fn fixture_layouts_satisfy_invariants() {
    for (name, xml) in kit::corpus() {
        let doc = parse_document(&xml, None).unwrap();
        let timeline = build_timeline(&doc);
        let layout = layout_timeline(&timeline, &LayoutConfig::default());
        let problems = kit::layout_violations(&doc, &timeline, &layout);
        assert!(problems.is_empty(), "{name}: {problems:#?}");
    }
}

fn gold_for(stem: &str) -> GoldPlacement {
    GoldPlacement::from_json(&std::fs::read_to_string(kit::gold_path(stem)).unwrap()).unwrap()
}

fn fixture_timeline(stem: &str) -> Timeline {
    build_timeline(&parse_document(&std::fs::read_to_string(kit::corpus_path(stem)).unwrap(), None).unwrap())
}

#[test]
fn one_wrong_onset_costs_exactly_one_point() {
    for (stem, _) in kit::corpus() {
        let timeline = fixture_timeline(&stem);
        let gold = gold_for(&stem);
        let base = placement_accuracy(&timeline, &gold);
        for i in 0..gold.entries.len() {
            if gold.entries[i].onset.is_none() {
                continue;
            }
            let mut perturbed = gold.clone();
            perturbed.entries[i].onset = Some("1900-01-01".into());
            let r = placement_accuracy(&timeline, &perturbed);
            assert_eq!(r.onset.correct + 1, base.onset.correct, "{stem} entry {i}");
            assert_eq!(r.onset.total, base.onset.total);
            assert_eq!(r.duration, base.duration);
            assert_eq!(r.change_info, base.change_info);
        }
    }
}

#[test]
fn discharge_note_with_one_perturbed_entry() {
    let timeline = fixture_timeline("01_discharge");
    let mut gold = gold_for("01_discharge");
    let n = gold.entries.iter().filter(|e| e.onset.is_some()).count();
    let i = gold.entries.iter().position(|e| e.onset.is_some()).unwrap();
    gold.entries[i].onset = Some("1900-01-01".into());
    let r = placement_accuracy(&timeline, &gold);
    assert_eq!((r.onset.correct, r.onset.total), (n - 1, n));
    let expected = format!("{}/{} ({:.1}%)", n - 1, n, 100.0 * (n - 1) as f64 / n as f64);
    assert_eq!(r.onset.to_string(), expected);
}

#[test]
fn comparable_reports_differ_in_wording_but_not_structure() {
    let (a, b) = kit::comparable();
    let (da, db) = (parse_document(&a, None).unwrap(), parse_document(&b, None).unwrap());
    let overlap = bigram_overlap(&da.text, &db.text);
    let similarity = timeline_similarity(&build_timeline(&da), &build_timeline(&db));
    println!(
        "bigram overlap {:.3}, timeline similarity {:.3}",
        overlap.ratio, similarity
    );
    assert!(overlap.ratio < 0.3, "overlap {}", overlap.ratio);
    assert!(similarity >= 0.8, "similarity {similarity}");
}

#[test]
fn oracles_catch_broken_outputs() {
    let doc = parse_document(
        &std::fs::read_to_string(kit::corpus_path("01_discharge")).unwrap(),
        None,
    )
    .unwrap();
    let (bundles, _) = bundle_entities(&doc);
    let (clusters, _) = build_clusters(&doc, &bundles);
    let mut ordered = order_clusters(clusters, &doc.relations, doc.dct);
    assert!(!ordered.edges.is_empty());
    ordered.clusters.reverse();
    for (i, c) in ordered.clusters.iter_mut().enumerate() {
        c.order_index = i;
    }
    assert!(kit::check_linear_extension(&ordered).is_err());

    let timeline = build_timeline(&doc);
    let mut layout = layout_timeline(&timeline, &LayoutConfig::default());
    let anatomical = layout
        .bars
        .iter()
        .position(|b| b.row_id.starts_with("row-anatomy"))
        .unwrap();
    layout.bars[anatomical].row_id = "row-diseases".into();
    assert!(!kit::layout_violations(&doc, &timeline, &layout).is_empty());
    layout.bars.pop();
    assert!(kit::layout_violations(&doc, &timeline, &layout).len() >= 2);
}
