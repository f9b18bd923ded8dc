use std::io::Write;
use std::process::{Command, Output, Stdio};

use heart_core::Diagnostic;
use heart_service::ServiceConfig;
use heart_testkit as kit;

fn heart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heart"))
        .args(args)
        .output()
        .expect("run heart")
}

fn heart_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_heart"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn heart");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn fixture(stem: &str) -> String {
    kit::corpus_path(stem).to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_diagnostics(o: &Output) -> Vec<Diagnostic> {
    String::from_utf8(o.stderr.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap_or_else(|e| panic!("{l}: {e}")))
        .collect()
}

#[test]
fn timeline_matches_golden() {
    let out = heart(&["timeline", &fixture("03_case_report")]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read_to_string(kit::golden_path("03_case_report.timeline.json")).unwrap();
    assert!(stdout(&out) == golden);
}

#[test]
fn parse_prints_canonical_xml() {
    let out = heart(&["parse", &fixture("12_escapes")]);
    assert_eq!(out.status.code(), Some(0));
    let xml = std::fs::read_to_string(kit::corpus_path("12_escapes")).unwrap();
    let doc = heart_core::annotation::parse_document(&xml, None).unwrap();
    assert_eq!(stdout(&out), heart_core::annotation::serialize_document(&doc) + "\n");
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = heart(&["timeline", "/definitely/missing.xml"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(
        heart(&["render", &fixture("01_discharge"), "--spacing", "sideways"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(heart(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        heart(&["--remote", "http://127.0.0.1:1", "parse", &fixture("01_discharge")])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn bad_document_exits_one_with_json_diagnostics() {
    let out = heart_stdin(&["parse", "-"], "<doc>");
    assert_eq!(out.status.code(), Some(1));
    let diags = stderr_diagnostics(&out);
    assert!(
        diags.iter().any(|d| d.is_error() && d.code == "xml.unclosed"),
        "{diags:?}"
    );
}

#[test]
fn dct_flag_overrides_the_document() {
    let doc = r#"<doc><timex3 id="t" type="date">3 days ago</timex3> <d id="d" rel="timeOn:t">fever</d></doc>"#;
    let out = heart_stdin(&["timeline", "-", "--dct", "2021-03-02"], doc);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("\"resolvedDate\": \"2021-02-27\""));
}

#[test]
fn render_format_follows_output_extension() {
    let dir = std::env::temp_dir().join(format!("heart-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("out.json");
    let out = heart(&["render", &fixture("07_open_spans"), "-o", json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read_to_string(kit::golden_path("07_open_spans.view.json")).unwrap();
    assert!(std::fs::read_to_string(&json).unwrap() == golden);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn proportional_spacing_warns_when_dates_are_missing() {
    let out = heart(&["render", &fixture("05_unresolved"), "--spacing", "proportional"]);
    assert_eq!(out.status.code(), Some(0));
    let diags = stderr_diagnostics(&out);
    assert!(
        diags.iter().any(|d| d.code == "layout.proportional-fallback"),
        "{diags:?}"
    );
}

#[test]
fn eval_reports_table_and_similarity() {
    let gold_dir = kit::fixtures_dir().join("gold");
    let out = heart(&[
        "eval",
        "accuracy",
        &fixture("01_discharge"),
        &fixture("02_radiology_lung"),
        "--gold-dir",
        gold_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = stdout(&out);
    assert!(table.lines().next().unwrap().contains("OnSet"));
    assert!(table.lines().last().unwrap().starts_with("total"));
    assert!(table.contains("(100%)"));

    let dir = kit::fixtures_dir().join("comparable");
    let out = heart(&[
        "eval",
        "similarity",
        dir.join("report_a.xml").to_str().unwrap(),
        dir.join("report_b.xml").to_str().unwrap(),
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["bigramOverlap"].as_f64().unwrap() < 0.3);
    assert_eq!(v["timelineSimilarity"].as_f64().unwrap(), 1.0);
}

#[test]
fn remote_mode_matches_local_output() {
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let config = ServiceConfig {
        listen: "127.0.0.1:0".parse().unwrap(),
        ..ServiceConfig::default()
    };
    let addr = runtime.block_on(heart_service::spawn(&config)).unwrap();
    let remote = format!("http://{addr}");
    for stem in ["01_discharge", "06_cycle", "10_deep_nesting"] {
        for args in [vec!["timeline"], vec!["render"], vec!["render", "--format", "json"]] {
            let f = fixture(stem);
            let mut local = args.clone();
            local.push(&f);
            let mut via = vec!["--remote", remote.as_str()];
            via.extend(local.iter().copied());
            let (a, b) = (heart(&local), heart(&via));
            assert_eq!(
                b.status.code(),
                Some(0),
                "{stem} {args:?}: {}",
                String::from_utf8_lossy(&b.stderr)
            );
            assert!(a.stdout == b.stdout, "{stem} {args:?}");
        }
    }
    let bad = heart_stdin(&["--remote", &remote, "render", "-"], "<doc>");
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr_diagnostics(&bad).iter().any(|d| d.is_error()));
}
