//! `heart`: annotated clinical notes to timelines from the command line.
//!
//! Exit status: 0 on success, 1 when the document has errors, 2 on usage or
//! I/O problems. Diagnostics go to stderr, one JSON object per line.

use std::fs;
use std::io::{self, Read, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use heart_client::{Client, ClientError};
use heart_core::annotation::serialize_document;
use heart_core::eval::{
    bigram_overlap, format_table, placement_accuracy, timeline_similarity, AccuracyReport, GoldPlacement,
};
use heart_core::layout::{render_svg, timeline_to_view_json, Spacing, Theme, ViewDocument};
use heart_core::temporal::PatternTable;
use heart_core::timeline::Timeline;
use heart_core::{Diagnostic, Engine, RequestOptions};
use heart_service::ServiceConfig;

#[derive(Parser)]
#[command(
    name = "heart",
    version,
    about = "Clinical note annotations to Gantt-style timelines"
)]
struct Cli {
    /// Send timeline and render work to a running service instead of
    /// computing locally, e.g. http://127.0.0.1:8680
    #[arg(long, global = true, value_name = "URL")]
    remote: Option<String>,

    /// Time-expression rule table (defaults to the built-in English table).
    #[arg(long, global = true, value_name = "PATH")]
    locale_table: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Annotated XML document; `-` reads stdin.
    file: PathBuf,

    /// Document creation time (YYYY-MM-DD), overriding the `dct` attribute.
    #[arg(long)]
    dct: Option<NaiveDate>,

    /// Write here instead of stdout.
    #[arg(short, long, value_name = "PATH")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Svg,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a document and print its canonical XML.
    Parse(Input),
    /// Print the inferred timeline as JSON.
    Timeline(Input),
    /// Lay out and render a timeline as SVG or view JSON.
    Render {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long, value_parser = parse_spacing)]
        spacing: Option<Spacing>,
        /// Drop the DCT column when nothing sits on it.
        #[arg(long)]
        hide_empty_dct: bool,
        /// Color theme (TOML).
        #[arg(long, value_name = "PATH")]
        theme: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        /// Listen address; defaults to $HEART_LISTEN or 127.0.0.1:8680.
        #[arg(long)]
        listen: Option<SocketAddr>,
        #[arg(long, value_parser = parse_spacing)]
        spacing: Option<Spacing>,
        #[arg(long)]
        hide_empty_dct: bool,
        /// Directory holding the built webapp, served at /.
        #[arg(long, value_name = "DIR")]
        webapp: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        theme: Option<PathBuf>,
    },
    /// Score timelines.
    #[command(subcommand)]
    Eval(Eval),
}

#[derive(Subcommand)]
enum Eval {
    /// OnSet / Duration / ChangeInfo accuracy against gold placements.
    Accuracy {
        /// Annotated documents; gold for `NAME.xml` is `GOLD_DIR/NAME.gold.json`.
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long, value_name = "DIR")]
        gold_dir: PathBuf,
        /// Print per-entity verdicts as JSON instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Surface bigram overlap and structural similarity of two documents.
    Similarity { a: PathBuf, b: PathBuf },
    /// Draft a gold file from the pipeline's own placements.
    DraftGold(Input),
}

fn parse_spacing(s: &str) -> Result<Spacing, String> {
    s.parse()
}

enum Failure {
    Document(Vec<Diagnostic>),
    Usage(String),
}

impl From<io::Error> for Failure {
    fn from(err: io::Error) -> Self {
        Failure::Usage(err.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Document(diagnostics)) => {
            emit_diagnostics(&diagnostics);
            ExitCode::from(1)
        }
        Err(Failure::Usage(message)) => {
            eprintln!("heart: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let mut engine = Engine::default();
    if let Some(path) = &cli.locale_table {
        engine.patterns = PatternTable::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let remote = cli.remote.map(Client::new);
    match cli.command {
        Command::Parse(input) => {
            if remote.is_some() {
                return Err(Failure::Usage("parse runs locally; drop --remote".into()));
            }
            let doc = engine
                .parse(&read_input(&input.file)?, input.dct)
                .map_err(Failure::Document)?;
            write_output(input.output.as_deref(), &(serialize_document(&doc) + "\n"))
        }
        Command::Timeline(input) => {
            let xml = read_input(&input.file)?;
            let timeline = match &remote {
                Some(client) => {
                    let options = RequestOptions {
                        dct: input.dct,
                        ..RequestOptions::default()
                    };
                    let view = block_on(client.timeline(&xml, &options))?;
                    ViewDocument::from_json(&view).map_err(Failure::Usage)?.timeline
                }
                None => engine.timeline(&xml, input.dct).map_err(Failure::Document)?,
            };
            emit_diagnostics(&timeline.diagnostics);
            write_output(input.output.as_deref(), &(timeline.to_json() + "\n"))
        }
        Command::Render {
            input,
            format,
            spacing,
            hide_empty_dct,
            theme,
        } => {
            let format = format.unwrap_or(match input.output.as_ref().and_then(|p| p.extension()) {
                Some(ext) if ext == "json" => Format::Json,
                _ => Format::Svg,
            });
            let options = RequestOptions {
                dct: input.dct,
                spacing,
                show_empty_dct: hide_empty_dct.then_some(false),
            };
            let mut engine = engine.with_options(&options);
            if let Some(path) = &theme {
                engine.theme = Theme::load(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            }
            let xml = read_input(&input.file)?;
            let text = match (&remote, format) {
                (Some(_), Format::Svg) if theme.is_some() => {
                    return Err(Failure::Usage("--theme applies to local rendering only".into()));
                }
                (Some(client), Format::Svg) => block_on(client.render(&xml, &options))?,
                (Some(client), Format::Json) => block_on(client.timeline(&xml, &options))?,
                (None, format) => render_local(&engine, &xml, options.dct, format)?,
            };
            write_output(input.output.as_deref(), &text)
        }
        Command::Serve {
            listen,
            spacing,
            hide_empty_dct,
            webapp,
            theme,
        } => {
            let mut config = ServiceConfig::from_env().map_err(|e| Failure::Usage(e.to_string()))?;
            if let Some(listen) = listen {
                config.listen = listen;
            }
            if let Some(spacing) = spacing {
                config.spacing = spacing;
            }
            if hide_empty_dct {
                config.show_empty_dct = false;
            }
            if cli.locale_table.is_some() {
                config.locale_table = cli.locale_table;
            }
            if webapp.is_some() {
                config.webapp_dir = webapp;
            }
            if theme.is_some() {
                config.theme = theme;
            }
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
                )
                .with_writer(io::stderr)
                .init();
            runtime()?
                .block_on(heart_service::serve(&config))
                .map_err(|e| Failure::Usage(e.to_string()))
        }
        Command::Eval(eval) => run_eval(&engine, eval),
    }
}

fn render_local(engine: &Engine, xml: &str, dct: Option<NaiveDate>, format: Format) -> Result<String, Failure> {
    let timeline = engine.timeline(xml, dct).map_err(Failure::Document)?;
    let layout = engine.layout_of(&timeline);
    emit_diagnostics(&timeline.diagnostics);
    emit_diagnostics(&layout.diagnostics);
    Ok(match format {
        Format::Svg => render_svg(&layout, &engine.theme),
        Format::Json => timeline_to_view_json(&timeline, &layout),
    })
}

fn run_eval(engine: &Engine, eval: Eval) -> Outcome {
    match eval {
        Eval::Accuracy { files, gold_dir, json } => {
            let mut named = Vec::new();
            for file in &files {
                let name = file
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let timeline = local_timeline(engine, file, None)?;
                let gold_path = gold_dir.join(format!("{name}.gold.json"));
                let gold = GoldPlacement::from_json(&read_input(&gold_path)?)
                    .map_err(|e| Failure::Usage(format!("{}: {e}", gold_path.display())))?;
                let report = placement_accuracy(&timeline, &gold);
                emit_diagnostics(&report.diagnostics);
                named.push((name, report));
            }
            if json {
                let object: serde_json::Map<String, serde_json::Value> = named
                    .iter()
                    .map(|(n, r)| (n.clone(), serde_json::to_value(r).expect("report serializes")))
                    .collect();
                let text = serde_json::to_string_pretty(&object).expect("json") + "\n";
                return write_output(None, &text);
            }
            let total = named
                .iter()
                .fold(AccuracyReport::default(), |acc, (_, r)| AccuracyReport {
                    onset: acc.onset + r.onset,
                    duration: acc.duration + r.duration,
                    change_info: acc.change_info + r.change_info,
                    ..AccuracyReport::default()
                });
            let mut rows: Vec<(&str, &AccuracyReport)> = named.iter().map(|(n, r)| (n.as_str(), r)).collect();
            if named.len() > 1 {
                rows.push(("total", &total));
            }
            write_output(None, &format_table(&rows))
        }
        Eval::Similarity { a, b } => {
            let (ta, tb) = (local_timeline(engine, &a, None)?, local_timeline(engine, &b, None)?);
            let overlap = bigram_overlap(&ta.text, &tb.text);
            if let Some(w) = &overlap.warning {
                emit_diagnostics(std::slice::from_ref(w));
            }
            let out = serde_json::json!({
                "bigramOverlap": overlap.ratio,
                "sharedBigrams": overlap.shared,
                "unionBigrams": overlap.union,
                "timelineSimilarity": timeline_similarity(&ta, &tb),
            });
            write_output(None, &(serde_json::to_string_pretty(&out).expect("json") + "\n"))
        }
        Eval::DraftGold(input) => {
            let timeline = local_timeline(engine, &input.file, input.dct)?;
            write_output(
                input.output.as_deref(),
                &GoldPlacement::from_timeline(&timeline).to_json(),
            )
        }
    }
}

fn local_timeline(engine: &Engine, path: &Path, dct: Option<NaiveDate>) -> Result<Timeline, Failure> {
    engine.timeline(&read_input(path)?, dct).map_err(Failure::Document)
}

fn runtime() -> Result<tokio::runtime::Runtime, Failure> {
    tokio::runtime::Runtime::new().map_err(Failure::from)
}

fn block_on<T>(fut: impl std::future::Future<Output = Result<T, ClientError>>) -> Result<T, Failure> {
    runtime()?.block_on(fut).map_err(|err| match err {
        ClientError::Rejected(diagnostics) => Failure::Document(diagnostics),
        other => Failure::Usage(other.to_string()),
    })
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        return Ok(text);
    }
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_output(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn emit_diagnostics(diagnostics: &[Diagnostic]) {
    let mut err = io::stderr().lock();
    for d in diagnostics {
        let _ = writeln!(err, "{}", serde_json::to_string(d).expect("diagnostic serializes"));
    }
}
