use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use flowkit::curation::PairingPolicy;
use flowkit::FlowParams;

use crate::UsageError;

#[derive(Debug, Parser)]
#[command(
    name = "flowkit",
    version,
    about = "Optical-flow scoring, motion-range curation, warping and coherency evaluation"
)]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode a GIF into a directory of numbered PPM frames.
    Extract {
        gif: PathBuf,
        /// Output directory; created if missing.
        #[arg(long)]
        out: PathBuf,
    },
    /// Flow magnitude between two frames, printed as JSON.
    Flow {
        prev: PathBuf,
        next: PathBuf,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Score, filter, sample and caption frame pairs of a corpus.
    Curate(CurateArgs),
    /// Backward-warp an image by a .flo flow field.
    Warp {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        flow: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare commanded motion values with flow measured on generated frames.
    Eval(EvalArgs),
    /// Per-clip pair and magnitude statistics without sampling.
    Stats(StatsArgs),
}

/// Flow tunables. A `--params` file is read first, then individual flags
/// override its entries.
#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    /// Flat `key = value` file of flow parameters.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub max_corners: Option<usize>,
    #[arg(long)]
    pub quality_level: Option<f64>,
    #[arg(long)]
    pub min_distance: Option<f64>,
    /// Odd LK window side in pixels.
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub pyramid_levels: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Flow vectors no longer than this many pixels are ignored.
    #[arg(long)]
    pub noise_threshold: Option<f64>,
}

impl FlowArgs {
    pub fn resolve(&self) -> Result<FlowParams, UsageError> {
        let mut p = match &self.params {
            Some(path) => FlowParams::load(path).map_err(|e| UsageError(e.to_string()))?,
            None => FlowParams::default(),
        };
        macro_rules! apply {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { p.$field = v; } )* };
        }
        apply!(
            max_corners,
            quality_level,
            min_distance,
            window,
            pyramid_levels,
            max_iters,
            eps,
            noise_threshold
        );
        p.validate().map_err(|e| UsageError(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// Directory holding `.gif` files and/or directories of numbered frames.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 20.0)]
    pub hi: f64,
    /// Pairs kept per clip.
    #[arg(long, default_value_t = 10)]
    pub quota: usize,
    /// `all` or `gap:G` (only pairs at most G frames apart).
    #[arg(long, default_value = "all", value_parser = parse_pairing)]
    pub pairing: PairingPolicy,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    pub flow: FlowArgs,
}

fn parse_pairing(s: &str) -> Result<PairingPolicy, String> {
    s.parse()
        .map_err(|e: flowkit::curation::CurationError| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct CurateArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Tab-separated `clip_id<TAB>caption` lines.
    #[arg(long)]
    pub captions: PathBuf,
    /// JSON-lines manifest to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON file for per-clip and corpus statistics.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Source image (PPM or PGM).
    #[arg(long)]
    pub source: PathBuf,
    /// Directory of numbered generated frames.
    #[arg(long)]
    pub frames: PathBuf,
    /// Comma-separated commanded magnitudes, one per frame.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,11,14,17,19")]
    pub motions: Vec<f64>,
    /// Guidance scale label recorded with the report.
    #[arg(long)]
    pub cfg_label: Option<f64>,
    /// Method name for the printed table row.
    #[arg(long, default_value = "flowkit")]
    pub method: String,
    /// Report JSON; printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub flow: FlowArgs,
}
