mod commands;
mod config;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Debug)]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(category: &'static str, message: impl Into<String>) -> Self {
        CliError {
            category,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line = self.message.replace('\n', "; ");
        write!(f, "error[{}]: {}", self.category, one_line)
    }
}

#[derive(Debug, Parser)]
#[command(name = "screenkit", version, about = "Virtual-screening dataset curation and benchmarking")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Dataset version string recorded in reports.
    #[arg(long = "version-tag", global = true)]
    pub version_tag: Option<String>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Download assay outcome tables and compound identifiers.
    Fetch(FetchArgs),
    /// Run the curation pipeline over a dataset CSV.
    Curate(CurateArgs),
    /// Evaluate a screen hierarchy spec into active/inactive labels.
    Hierarchy(HierarchyArgs),
    /// Write adapted-CV or scaffold split plans.
    Split(SplitArgs),
    /// Build 2D or 3D graph tensors.
    Featurize(FeaturizeArgs),
    /// Compute the 391-value descriptor for molecules with coordinates.
    Describe(DescribeArgs),
    /// Train the linear baseline ranker and write test scores per fold.
    TrainBaseline(TrainArgs),
    /// Score predictions against split test sets.
    Evaluate(EvaluateArgs),
    /// Tabulate and plot benchmark reports.
    Report(ReportArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Fetch(_) => "fetch",
            Command::Curate(_) => "curate",
            Command::Hierarchy(_) => "hierarchy",
            Command::Split(_) => "split",
            Command::Featurize(_) => "featurize",
            Command::Describe(_) => "describe",
            Command::TrainBaseline(_) => "train-baseline",
            Command::Evaluate(_) => "evaluate",
            Command::Report(_) => "report",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FetchArgs {
    #[arg(long = "aid", required = true, num_args = 1..)]
    pub aids: Vec<u64>,
    /// File with one cid per line to exchange for SMILES and InChI.
    #[arg(long)]
    pub cids: Option<PathBuf>,
    /// Serve requests from a fixture directory instead of the network.
    #[arg(long, env = "SCREENKIT_FIXTURES")]
    pub fixtures: Option<PathBuf>,
    #[arg(long, env = "SCREENKIT_CACHE")]
    pub cache: Option<PathBuf>,
    /// Requests per second.
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CurateArgs {
    /// Dataset CSV; overrides `data.records`.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HierarchyArgs {
    /// Hierarchy spec (TOML); overrides `data.hierarchy`.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SplitArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// `cv` or `scaffold`.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Train:valid:test, e.g. 3:1:1.
    #[arg(long)]
    pub ratio: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FeaturizeArgs {
    /// Dataset CSV (2D graphs, implicit hydrogens).
    #[arg(long, conflicts_with = "sdf")]
    pub dataset: Option<PathBuf>,
    /// SDF with coordinates.
    #[arg(long)]
    pub sdf: Option<PathBuf>,
    /// `2d` or `3d`.
    #[arg(long)]
    pub kind: Option<String>,
    /// Per-atom property file; missing values are computed natively.
    #[arg(long)]
    pub props: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DescribeArgs {
    #[arg(long)]
    pub sdf: Option<PathBuf>,
    #[arg(long)]
    pub props: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TrainArgs {
    /// Descriptor CSV from `describe`.
    #[arg(long)]
    pub descriptors: Option<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Split CSVs, one per fold.
    #[arg(long = "split", required = true, num_args = 1..)]
    pub splits: Vec<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvaluateArgs {
    /// `cid<TAB>score` files, one per split.
    #[arg(long = "pred", required = true, num_args = 1..)]
    pub preds: Vec<PathBuf>,
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long = "split", required = true, num_args = 1..)]
    pub splits: Vec<PathBuf>,
    /// Seed for the single tie-breaking shuffle.
    #[arg(long)]
    pub tie_seed: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Benchmark report JSON files from `evaluate`.
    #[arg(required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
}

/// Settings shared by every subcommand after merging flags over the config.
pub struct Context {
    pub out: PathBuf,
    pub seed: u64,
    pub version_tag: String,
    pub config: RunConfig,
}

impl Context {
    pub fn output(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn build_context(global: &GlobalArgs) -> Result<Context, CliError> {
    let config = match &global.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let out = global
        .out
        .clone()
        .or_else(|| config.path(&config.output_dir))
        .unwrap_or_else(|| PathBuf::from("out"));
    let seed = global.seed.or(config.seed).unwrap_or(0);
    let version_tag = global
        .version_tag
        .clone()
        .or_else(|| config.version_tag.clone())
        .unwrap_or_else(|| "unversioned".into());
    std::fs::create_dir_all(&out).map_err(|e| CliError::new("io", format!("{}: {e}", out.display())))?;
    Ok(Context {
        out,
        seed,
        version_tag,
        config,
    })
}

#[derive(Serialize)]
struct Snapshot<'a> {
    subcommand: &'a str,
    args: &'a Command,
    out: &'a PathBuf,
    seed: u64,
    version_tag: &'a str,
    jobs: Option<usize>,
    config_file: Option<&'a PathBuf>,
    config: &'a RunConfig,
}

fn write_snapshot(ctx: &Context, cli: &Cli) -> Result<(), CliError> {
    let snap = Snapshot {
        subcommand: cli.command.name(),
        args: &cli.command,
        out: &ctx.out,
        seed: ctx.seed,
        version_tag: &ctx.version_tag,
        jobs: cli.global.jobs,
        config_file: cli.global.config.as_ref(),
        config: &ctx.config,
    };
    let path = ctx.output("resolved_config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&snap).unwrap() + "\n")
        .map_err(|e| CliError::new("io", format!("{}: {e}", path.display())))
}

fn append_log(out: &std::path::Path, line: &str) {
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    if let Ok(mut f) = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(out.join("run.log"))
    {
        let _ = writeln!(f, "{ts} {line}");
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.global.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::new("config", format!("--jobs: {e}")))?;
    }
    let ctx = build_context(&cli.global)?;
    write_snapshot(&ctx, cli)?;
    let result = match &cli.command {
        Command::Fetch(a) => commands::fetch(&ctx, a),
        Command::Curate(a) => commands::curate(&ctx, a),
        Command::Hierarchy(a) => commands::hierarchy(&ctx, a),
        Command::Split(a) => commands::split(&ctx, a),
        Command::Featurize(a) => commands::featurize(&ctx, a),
        Command::Describe(a) => commands::describe(&ctx, a),
        Command::TrainBaseline(a) => commands::train_baseline(&ctx, a),
        Command::Evaluate(a) => commands::evaluate(&ctx, a),
        Command::Report(a) => commands::report(&ctx, a),
    };
    match &result {
        Ok(()) => append_log(&ctx.out, &format!("{} ok", cli.command.name())),
        Err(e) => append_log(&ctx.out, &format!("{} {e}", cli.command.name())),
    }
    result
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
