//! The `faceatlas` command line. Exit codes: 0 success, 1 user or
//! validation error, 2 internal error.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use crate::adl::{census, load_atlas, AtlasProgram};
use crate::channels::{parse_channels, select_channels, ChannelRegistry, ChannelSelection};
use crate::evaluator::evaluate_atlas;
use crate::fixture;
use crate::geometry::{read_frames, LandmarkFrame, SemanticsConfig};
use crate::pipeline::{accuracy_experiment, bench, run_stream, Pacing, StreamOptions};
use crate::service::{serve, Engine, ServiceOptions};
use crate::svg::render_overlay;

pub const LOG_ENV: &str = "FACEATLAS_LOG";

#[derive(Debug, Parser)]
#[command(name = "faceatlas", version, about = "Facial acupoint localization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and compile an atlas, print its census.
    Validate(Inputs),
    /// Evaluate an atlas on one frame or a frame stream.
    Eval(EvalArgs),
    /// Time parsing, compiling and evaluation.
    Bench(BenchArgs),
    /// Run the pose-sweep accuracy experiment.
    Experiment(ExperimentArgs),
    /// Start the websocket service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Atlas CSV; the bundled sample atlas when omitted.
    #[arg(long)]
    pub atlas: Option<PathBuf>,
    /// Channel registry CSV.
    #[arg(long)]
    pub channels: Option<PathBuf>,
    /// Mesh semantics, TOML or JSON.
    #[arg(long)]
    pub semantics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// JSONL file whose first frame is evaluated (`-` for stdin).
    #[arg(long, conflicts_with = "stream", required_unless_present = "stream")]
    pub frame: Option<PathBuf>,
    /// JSONL frame stream (`-` for stdin); one atlas per output line.
    #[arg(long)]
    pub stream: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Channel codes to keep, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub select: Vec<String>,
    /// Also write an SVG overlay (single frame only).
    #[arg(long, requires = "frame")]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub pretty: bool,
    /// Replay the stream at its timestamps instead of as fast as possible.
    #[arg(long)]
    pub realtime: bool,
    #[arg(long, default_value_t = 1)]
    pub max_in_flight: usize,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Frame to evaluate; the synthetic fixture when omitted.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub iterations: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    /// Frontal frame; the synthetic fixture when omitted.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Port to listen on; 0 picks a free one.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Static files served at `/`.
    #[arg(long)]
    pub web_root: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub max_in_flight: usize,
}

#[derive(Debug)]
pub enum CliError {
    User(anyhow::Error),
    Internal(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::User(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::User(e)
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    init_logging();
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let (CliError::User(err) | CliError::Internal(err)) = &e;
            eprintln!("error: {err:#}");
            e.exit_code()
        }
    }
}

fn init_logging() {
    let filter = tracing_subscriber::EnvFilter::try_from_env(LOG_ENV)
        .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn"));
    let _ = tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(io::stderr)
        .try_init();
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Validate(inputs) => cmd_validate(&inputs),
        Command::Eval(args) => cmd_eval(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Experiment(args) => cmd_experiment(&args),
        Command::Serve(args) => cmd_serve(&args),
    }
}

fn atlas_text(inputs: &Inputs) -> anyhow::Result<String> {
    match &inputs.atlas {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(fixture::SAMPLE_ATLAS_CSV.to_string()),
    }
}

fn load_program(inputs: &Inputs) -> anyhow::Result<AtlasProgram> {
    let text = atlas_text(inputs)?;
    load_atlas(&text).map_err(|e| anyhow!("{e}"))
}

fn load_registry(inputs: &Inputs, program: &AtlasProgram) -> anyhow::Result<ChannelRegistry> {
    let specs = match &inputs.channels {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_channels(&text).map_err(|errs| anyhow!("{}", join_lines(&errs)))?
        }
        None => Vec::new(),
    };
    ChannelRegistry::bind(&specs, program).map_err(|errs| anyhow!("{}", join_lines(&errs)))
}

fn load_semantics(inputs: &Inputs) -> anyhow::Result<SemanticsConfig> {
    match &inputs.semantics {
        Some(p) => SemanticsConfig::load(p).map_err(|e| anyhow!("{}: {e}", p.display())),
        None => Ok(SemanticsConfig::default()),
    }
}

fn join_lines<E: std::fmt::Display>(errs: &[E]) -> String {
    errs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

fn open_input(path: &Path) -> anyhow::Result<Box<dyn BufRead + Send>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Box::new(BufReader::new(f)))
}

fn open_output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn first_frame(path: &Path) -> anyhow::Result<LandmarkFrame> {
    read_frames(open_input(path)?)
        .next()
        .ok_or_else(|| anyhow!("{}: no frame found", path.display()))?
        .map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn frame_or_fixture(path: Option<&Path>) -> anyhow::Result<LandmarkFrame> {
    match path {
        Some(p) => first_frame(p),
        None => Ok(fixture::canonical_frame(0)),
    }
}

fn internal(e: impl Into<anyhow::Error>) -> CliError {
    CliError::Internal(e.into())
}

fn to_json<T: serde::Serialize>(value: &T, pretty: bool) -> Result<String, CliError> {
    if pretty {
        serde_json::to_string_pretty(value).map_err(internal)
    } else {
        serde_json::to_string(value).map_err(internal)
    }
}

fn cmd_validate(inputs: &Inputs) -> CliResult {
    let program = load_program(inputs)?;
    load_semantics(inputs)?;
    let registry = load_registry(inputs, &program)?;
    println!("{}", census(&program));
    println!(
        "channels: {}",
        registry
            .specs()
            .iter()
            .map(|s| s.code.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(())
}

fn selection(codes: &[String], program: &AtlasProgram) -> ChannelSelection {
    let sel = select_channels(codes, program);
    for d in &sel.diagnostics {
        eprintln!("warning: {d}");
    }
    sel
}

fn cmd_eval(args: &EvalArgs) -> CliResult {
    let program = load_program(&args.inputs)?;
    let cfg = load_semantics(&args.inputs)?;
    let registry = load_registry(&args.inputs, &program)?;
    let sel = selection(&args.select, &program);
    let mut out = open_output(args.out.as_deref())?;

    if let Some(path) = &args.stream {
        if args.max_in_flight == 0 {
            return Err(CliError::User(anyhow!("--max-in-flight must be positive")));
        }
        let options = StreamOptions {
            max_in_flight: args.max_in_flight,
            pacing: if args.realtime {
                Pacing::Realtime { speed: 1.0 }
            } else {
                Pacing::Blocking
            },
            workers: None,
        };
        let mut write_err = None;
        let summary = run_stream(
            read_frames(open_input(path)?),
            &program,
            &cfg,
            &options,
            |atlas| {
                if write_err.is_none() {
                    let line = sel.filter(&atlas).to_json();
                    if let Err(e) = writeln!(out, "{line}") {
                        write_err = Some(e);
                    }
                }
            },
        );
        if let Some(e) = write_err {
            return Err(internal(e));
        }
        out.flush().map_err(internal)?;
        eprintln!("{}", to_json(&summary, false)?);
        return Ok(());
    }

    let path = args.frame.as_deref().expect("clap requires --frame or --stream");
    let frame = first_frame(path)?;
    let atlas = evaluate_atlas(&program, &frame, &cfg);
    if atlas.degenerate {
        eprintln!("warning: degenerate face at ts {}", atlas.timestamp);
    }
    let shown = sel.filter(&atlas);
    writeln!(out, "{}", to_json(&shown.to_record(), args.pretty)?).map_err(internal)?;
    out.flush().map_err(internal)?;
    if let Some(svg_path) = &args.svg {
        let doc = render_overlay(&atlas, &registry, &sel, frame.width(), frame.height());
        fs::write(svg_path, doc).with_context(|| format!("writing {}", svg_path.display()))?;
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> CliResult {
    let text = atlas_text(&args.inputs)?;
    let cfg = load_semantics(&args.inputs)?;
    let frame = frame_or_fixture(args.frame.as_deref())?;
    let report = bench(&text, &frame, &cfg, args.iterations).map_err(|e| anyhow!("{e}"))?;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "{}", to_json(&report, true)?).map_err(internal)?;
    out.flush().map_err(internal)?;
    eprintln!("{}", report.summary_line());
    Ok(())
}

fn cmd_experiment(args: &ExperimentArgs) -> CliResult {
    let program = load_program(&args.inputs)?;
    let cfg = load_semantics(&args.inputs)?;
    let frame = frame_or_fixture(args.frame.as_deref())?;
    let report = accuracy_experiment(&program, &frame, &cfg).map_err(|e| anyhow!("{e}"))?;
    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "{}", to_json(&report, args.pretty)?).map_err(internal)?;
    out.flush().map_err(internal)?;
    Ok(())
}

fn cmd_serve(args: &ServeArgs) -> CliResult {
    if args.max_in_flight == 0 {
        return Err(CliError::User(anyhow!("--max-in-flight must be positive")));
    }
    let program = load_program(&args.inputs)?;
    let semantics = load_semantics(&args.inputs)?;
    let registry = load_registry(&args.inputs, &program)?;
    if let Some(root) = &args.web_root {
        if !root.is_dir() {
            return Err(CliError::User(anyhow!("{} is not a directory", root.display())));
        }
    }
    let engine = Arc::new(Engine::new(program, registry, semantics));
    let options = ServiceOptions {
        max_in_flight: args.max_in_flight,
        web_root: args.web_root.clone(),
    };
    let rt = tokio::runtime::Runtime::new().map_err(internal)?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .with_context(|| format!("binding {}:{}", args.host, args.port))?;
        let addr = listener.local_addr().map_err(internal)?;
        println!("listening on http://{addr}");
        io::stdout().flush().map_err(internal)?;
        serve(listener, engine, &options).await.map_err(internal)
    })
}
