mod commands;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Spectral color naming, superpixel segmentation and map comparison.
#[derive(Debug, Parser)]
#[command(name = "huemap", version)]
struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "HUEMAP_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Name every pixel of a calibrated image with a rule set.
    Classify(ClassifyArgs),
    /// Superpixels, cross-aura contours, description table, reconstruction and RMSE.
    Segment(SegmentArgs),
    /// Contingency table, harmonization steps and CVPAI2 of two legends.
    Compare(CompareArgs),
    /// Combine color names with shape, texture and spatial memberships.
    Evidence(EvidenceArgs),
    /// Relabel a map through a child-to-parent CSV.
    Aggregate(AggregateArgs),
    /// Relabel a map through a one-to-many legend crosswalk.
    Translate(TranslateArgs),
    /// Write a deterministic synthetic six-band scene.
    Synth(SynthArgs),
    /// Print a rule file in canonical form.
    FormatRules(RuleSource),
}

#[derive(Debug, Args, Serialize)]
pub struct RuleSource {
    /// Rule file; the built-in SPECL set when omitted.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Override the rule file's match policy (last-match or first-match).
    #[arg(long)]
    policy: Option<String>,
    /// Use the literal printed threshold of SPECL rule 8 (built-in set only).
    #[arg(long)]
    specl_printed_row8: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    rules: RuleSource,
    /// Input image header.
    #[arg(long = "in")]
    input: PathBuf,
    /// Output map header.
    #[arg(long)]
    out: PathBuf,
    /// Process the image in strips of this many rows.
    #[arg(long)]
    stream: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SegmentArgs {
    #[command(flatten)]
    rules: RuleSource,
    /// Input image header.
    #[arg(long = "in")]
    input: PathBuf,
    /// Existing categorical map; the image is classified when omitted.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out_dir: PathBuf,
    /// Connectivity for components (4 or 8).
    #[arg(long, default_value = "8")]
    adjacency: String,
    /// Neighborhood for the cross-aura map (4 or 8).
    #[arg(long, default_value = "8")]
    aura_adjacency: String,
    /// Process the image in strips of this many rows.
    #[arg(long)]
    stream: Option<usize>,
    /// Print the summary as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Contingency counts CSV with dictionary headers.
    #[arg(long, conflicts_with_all = ["test", "reference"])]
    counts: Option<PathBuf>,
    /// Test map header.
    #[arg(long, requires = "reference")]
    test: Option<PathBuf>,
    /// Reference map header.
    #[arg(long, requires = "test")]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 0.09)]
    th1: f64,
    #[arg(long, default_value_t = 0.06)]
    th2: f64,
    /// Expert overrides CSV `test_label,reference_label,value,note`.
    #[arg(long)]
    overrides: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out_dir: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct EvidenceArgs {
    /// Binary relation CSV (color names by classes).
    #[arg(long)]
    relation: PathBuf,
    /// Evidence CSV `object_id,color_name,class,shape,texture,spatial`.
    #[arg(long)]
    evidence: PathBuf,
    /// Output scores CSV.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct AggregateArgs {
    #[arg(long)]
    map: PathBuf,
    /// CSV `child_label,parent_label[,parent_name]`.
    #[arg(long)]
    mapping: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TranslateArgs {
    #[arg(long)]
    map: PathBuf,
    /// Crosswalk CSV `code,abbreviation,name,parents`; the built-in land
    /// cover crosswalk when omitted.
    #[arg(long)]
    crosswalk: Option<PathBuf>,
    /// CSV `code,parent` settling ambiguous codes.
    #[arg(long)]
    resolution: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    #[arg(long)]
    width: usize,
    #[arg(long)]
    height: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Side of the square patches sharing one surface type.
    #[arg(long, default_value_t = 16)]
    block: usize,
    #[arg(long)]
    out: PathBuf,
}

/// Failure classes with distinct exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or missing input: exit 2.
    Usage(String),
    /// Processing failure: exit 1.
    Failed(String),
    /// Outputs written but a consistency check failed: exit 3.
    Invariant(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        let msg = format!("{}: {e}", path.display());
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::Usage(msg)
        } else {
            CliError::Failed(msg)
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<huemap_core::Error> for CliError {
    fn from(e: huemap_core::Error) -> Self {
        use huemap_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                CliError::Usage(msg)
            }
            E::Config(_)
            | E::Syntax { .. }
            | E::UndeclaredBand { .. }
            | E::MissingBand(_)
            | E::Threshold(_)
            | E::Override(_) => CliError::Usage(msg),
            _ => CliError::Failed(msg),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => f.write_str(m),
            CliError::Invariant(m) => write!(f, "invariant check failed: {m}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(CliError::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    match cli.command {
        Command::Classify(a) => commands::classify(&a),
        Command::Segment(a) => commands::segment(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Evidence(a) => commands::evidence(&a),
        Command::Aggregate(a) => commands::aggregate(&a),
        Command::Translate(a) => commands::translate(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::FormatRules(a) => commands::format_rules(&a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("huemap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
