//! Release gate: one PASS/FAIL line per criterion, non-zero exit if any fail.

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use heart_client::{Client, ClientError};
use heart_core::annotation::{parse_document, serialize_document, TimexType};
use heart_core::eval::{bigram_overlap, placement_accuracy, timeline_similarity, GoldPlacement, Score};
use heart_core::layout::{layout_timeline, LayoutConfig, ViewDocument, VIEW_SCHEMA};
use heart_core::synth::{random_document, SynthConfig};
use heart_core::temporal::normalize_timex;
use heart_core::timeline::build_timeline;
use heart_core::RequestOptions;
use heart_service::ServiceConfig;
use heart_testkit as kit;

const ROUND_TRIP_RANDOM_DOCS: u64 = 1000;
const ROUND_TRIP_BUDGET: Duration = Duration::from_secs(5);
const BRUTE_FORCE_MAX_CLUSTERS: usize = 8;
const CALENDAR_CASES: usize = 200;
const LAYOUT_RANDOM_TIMELINES: u64 = 500;
const RENDER_RUNS: usize = 3;
const MAX_BIGRAM_OVERLAP: f64 = 0.3;
const MIN_TIMELINE_SIMILARITY: f64 = 0.8;
const CONCURRENT_REQUESTS: usize = 100;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("round-trip", round_trip),
        ("linear-extension", linear_extension),
        ("calendar", calendar),
        ("layout-conformance", layout_conformance),
        ("determinism", determinism),
        ("precision-self-check", precision_self_check),
        ("coherence", coherence),
        ("service-contract", service_contract),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn round_trip() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut check = |label: String, xml: &str| match parse_document(xml, None) {
        Ok(doc) => {
            let again = serialize_document(&doc);
            match parse_document(&again, None) {
                Ok(back) if back == doc && serialize_document(&back) == again => {}
                _ => failures.push(label),
            }
        }
        Err(_) => failures.push(label),
    };
    let corpus = kit::corpus();
    for (name, xml) in &corpus {
        check(name.clone(), xml);
    }
    let config = SynthConfig::default();
    for seed in 0..ROUND_TRIP_RANDOM_DOCS {
        let doc = random_document(&mut kit::seeded(seed), &config);
        check(format!("seed {seed}"), &serialize_document(&doc));
    }
    let elapsed = start.elapsed();
    let total = corpus.len() as u64 + ROUND_TRIP_RANDOM_DOCS;
    if !failures.is_empty() {
        return Err(format!(
            "{} of {total} documents failed: {:?}",
            failures.len(),
            &failures[..failures.len().min(5)]
        ));
    }
    if elapsed >= ROUND_TRIP_BUDGET {
        return Err(format!(
            "{total} documents took {elapsed:.2?}, budget {ROUND_TRIP_BUDGET:?}"
        ));
    }
    Ok(format!("{total} documents identical after re-parse in {elapsed:.2?}"))
}

fn linear_extension() -> Verdict {
    let mut checked = Vec::new();
    for (name, xml) in kit::corpus() {
        let doc = parse_document(&xml, None).map_err(|d| format!("{name}: {d:?}"))?;
        if kit::cluster_count(&doc) > BRUTE_FORCE_MAX_CLUSTERS {
            continue;
        }
        kit::check_cluster_order(&doc).map_err(|e| format!("{name}: {e}"))?;
        checked.push(name);
    }
    if checked.is_empty() {
        return Err("no fixture within the brute-force bound".into());
    }
    Ok(format!(
        "{} fixtures with <= {BRUTE_FORCE_MAX_CLUSTERS} clusters, zero violations",
        checked.len()
    ))
}

fn calendar() -> Verdict {
    let cases = kit::calendar_cases(7, CALENDAR_CASES);
    let wrong: Vec<String> = cases
        .iter()
        .filter_map(|c| {
            let got = normalize_timex(&c.surface, TimexType::Date, c.dct)
                .resolve(c.dct)
                .map(|d| d.to_string());
            (got.as_deref() != Some(c.expected.as_str()))
                .then(|| format!("{} from {}: {got:?} != {}", c.surface, c.dct, c.expected))
        })
        .collect();
    if wrong.is_empty() {
        Ok(format!(
            "{} relative expressions match day-number arithmetic",
            cases.len()
        ))
    } else {
        Err(format!(
            "{} mismatches: {:?}",
            wrong.len(),
            &wrong[..wrong.len().min(5)]
        ))
    }
}

fn layout_conformance() -> Verdict {
    let config = SynthConfig {
        tree_subregions: true,
        ..SynthConfig::default()
    };
    let mut bundles = 0;
    for seed in 0..LAYOUT_RANDOM_TIMELINES {
        let doc = random_document(&mut kit::seeded(seed), &config);
        let timeline = build_timeline(&doc);
        let layout = layout_timeline(&timeline, &LayoutConfig::default());
        let problems = kit::layout_violations(&doc, &timeline, &layout);
        if !problems.is_empty() {
            return Err(format!("seed {seed}: {problems:?}"));
        }
        bundles += timeline.bundles.len();
    }
    Ok(format!(
        "{LAYOUT_RANDOM_TIMELINES} random timelines ({bundles} bundles), zero violations"
    ))
}

fn heart(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_heart"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn cli_render(input: &Path, format: &str, out: &Path) -> Result<String, String> {
    let output = heart(&["render", path_str(input), "--format", format, "-o", path_str(out)])?;
    if !output.status.success() {
        return Err(format!("{}: exit {:?}", input.display(), output.status.code()));
    }
    std::fs::read_to_string(out).map_err(|e| e.to_string())
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn determinism() -> Verdict {
    let dir = std::env::temp_dir().join(format!("heart-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let corpus = kit::corpus();
    let result = (|| {
        for (name, _) in &corpus {
            let input = kit::corpus_path(name);
            for (format, ext) in [("svg", "svg"), ("json", "view.json")] {
                let golden =
                    std::fs::read_to_string(kit::golden_path(&format!("{name}.{ext}"))).map_err(|e| e.to_string())?;
                for run in 0..RENDER_RUNS {
                    let out = dir.join(format!("{name}.{run}.{ext}"));
                    if cli_render(&input, format, &out)? != golden {
                        return Err(format!("{name} {format} run {run} differs from golden"));
                    }
                }
            }
        }
        Ok(format!(
            "{} fixtures x {RENDER_RUNS} runs, SVG and view JSON byte-equal to golden",
            corpus.len()
        ))
    })();
    let _ = std::fs::remove_dir_all(&dir);
    result
}

fn precision_self_check() -> Verdict {
    let mut sums = (Score::default(), Score::default(), Score::default());
    for (name, xml) in kit::corpus() {
        let timeline = build_timeline(&parse_document(&xml, None).map_err(|d| format!("{name}: {d:?}"))?);
        let gold = std::fs::read_to_string(kit::gold_path(&name)).map_err(|e| format!("{name}: {e}"))?;
        let gold = GoldPlacement::from_json(&gold).map_err(|e| format!("{name}: {e}"))?;
        let r = placement_accuracy(&timeline, &gold);
        for s in [r.onset, r.duration, r.change_info] {
            if s.correct != s.total {
                return Err(format!("{name}: {} / {} / {}", r.onset, r.duration, r.change_info));
            }
        }
        sums = (sums.0 + r.onset, sums.1 + r.duration, sums.2 + r.change_info);
    }

    let discharge = std::fs::read_to_string(kit::corpus_path("01_discharge")).map_err(|e| e.to_string())?;
    let timeline = build_timeline(&parse_document(&discharge, None).map_err(|d| format!("{d:?}"))?);
    let mut gold =
        GoldPlacement::from_json(&std::fs::read_to_string(kit::gold_path("01_discharge")).map_err(|e| e.to_string())?)?;
    let n = gold.entries.iter().filter(|e| e.onset.is_some()).count();
    let first = gold
        .entries
        .iter()
        .position(|e| e.onset.is_some())
        .ok_or("discharge gold has no onset")?;
    gold.entries[first].onset = Some("1900-01-01".into());
    let perturbed = placement_accuracy(&timeline, &gold).onset;
    let expected = format!("{}/{n} ({:.1}%)", n - 1, 100.0 * (n - 1) as f64 / n as f64);
    if perturbed.to_string() != expected {
        return Err(format!("perturbed OnSet {perturbed}, expected {expected}"));
    }
    Ok(format!(
        "corpus OnSet {} Duration {} ChangeInfo {}; one perturbed entry gives {perturbed}",
        sums.0, sums.1, sums.2
    ))
}

fn coherence() -> Verdict {
    let (a, b) = kit::comparable();
    let da = parse_document(&a, None).map_err(|d| format!("{d:?}"))?;
    let db = parse_document(&b, None).map_err(|d| format!("{d:?}"))?;
    let overlap = bigram_overlap(&da.text, &db.text).ratio;
    let similarity = timeline_similarity(&build_timeline(&da), &build_timeline(&db));
    let detail = format!("bigram Jaccard {overlap:.3} (< {MAX_BIGRAM_OVERLAP}), similarity {similarity:.3} (>= {MIN_TIMELINE_SIMILARITY})");
    if overlap < MAX_BIGRAM_OVERLAP && similarity >= MIN_TIMELINE_SIMILARITY {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn service_contract() -> Verdict {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let config = ServiceConfig {
        listen: "127.0.0.1:0".parse().expect("address"),
        ..ServiceConfig::default()
    };
    let addr = runtime
        .block_on(heart_service::spawn(&config))
        .map_err(|e| e.to_string())?;
    let client = Client::new(format!("http://{addr}"));

    let dir = std::env::temp_dir().join(format!("heart-contract-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let mut cli_views = HashMap::new();
    for (name, _) in kit::corpus() {
        let view = cli_render(&kit::corpus_path(&name), "json", &dir.join(format!("{name}.json")))?;
        cli_views.insert(name, view);
    }
    let _ = std::fs::remove_dir_all(&dir);

    runtime.block_on(async {
        let corpus = kit::corpus();
        for (name, xml) in &corpus {
            let body = client.timeline(xml, &RequestOptions::default()).await.map_err(|e| format!("{name}: {e}"))?;
            let doc = ViewDocument::from_json(&body).map_err(|e| format!("{name}: {e}"))?;
            if doc.schema != VIEW_SCHEMA || body != cli_views[name] {
                return Err(format!("{name}: service body differs from CLI output"));
            }
        }

        match client.timeline("<doc>", &RequestOptions::default()).await {
            Err(ClientError::Rejected(d)) if d.iter().any(|d| d.is_error()) => {}
            other => return Err(format!("malformed input answered with {other:?}")),
        }

        let mut jobs = tokio::task::JoinSet::new();
        for i in 0..CONCURRENT_REQUESTS {
            let (name, xml) = corpus[i % corpus.len()].clone();
            let client = client.clone();
            jobs.spawn(async move { (name, client.timeline(&xml, &RequestOptions::default()).await) });
        }
        let mut answered = 0;
        while let Some(joined) = jobs.join_next().await {
            let (name, body) = joined.map_err(|e| e.to_string())?;
            let body = body.map_err(|e| format!("{name}: {e}"))?;
            if body != cli_views[&name] {
                return Err(format!("concurrent answer for {name} differs"));
            }
            answered += 1;
        }
        Ok(format!(
            "{} fixtures equal CLI view JSON, malformed input gets 400 with diagnostics, {answered} concurrent requests consistent",
            corpus.len()
        ))
    })
}
