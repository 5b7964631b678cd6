//! Motion-range pair curation: score every frame pair of a clip, keep the
//! pairs whose flow magnitude falls in a range, sample an evenly spread
//! subset and caption each pair with its magnitude in words.

mod caption;
pub mod manifest;
mod sampling;
mod stats;

pub use self::caption::{augment_caption, number_to_words, FLOW_PHRASE};
pub use self::sampling::{filter_range, sample_diverse, sample_uniform};
pub use self::stats::{corpus_stats, ClipStats, CorpusSummary, Histogram};

use std::fmt;
use std::str::FromStr;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flow::{
    flow_magnitude_prepared, FlowError, FlowMagnitudeResult, FlowParams, PreparedFrame,
};
use crate::media::{to_grayscale, FrameSequence};

#[derive(Debug, Error)]
pub enum CurationError {
    #[error("clip {clip_id} has {frames} frame(s), at least 2 are needed")]
    TooFewFrames { clip_id: String, frames: usize },
    #[error("invalid range [{lo}, {hi}]: need finite lo < hi")]
    InvalidRange { lo: f64, hi: f64 },
    #[error("pairs per clip must be at least 1")]
    ZeroQuota,
    #[error("invalid pairing policy: {0}")]
    Pairing(String),
    #[error("{0} cannot be written in words (0..=999)")]
    NumberOutOfRange(u64),
    #[error("caption is empty")]
    EmptyCaption,
    #[error("no clips to summarize")]
    NoClips,
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("manifest: {0}")]
    Manifest(String),
}

/// Closed magnitude interval `[lo, hi]` in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnitudeRange {
    lo: f64,
    hi: f64,
}

impl MagnitudeRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self, CurationError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(CurationError::InvalidRange { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn contains(&self, m: f64) -> bool {
        self.lo <= m && m <= self.hi
    }

    /// Index of the equal-width bin holding `m` among `bins` bins; values
    /// at or beyond the ends land in the first or last bin.
    pub fn bin_of(&self, m: f64, bins: usize) -> usize {
        let t = (m - self.lo) / (self.hi - self.lo) * bins as f64;
        if t.is_nan() || t < 0.0 {
            0
        } else {
            (t.floor() as usize).min(bins - 1)
        }
    }
}

/// Which frame pairs of a clip get scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairingPolicy {
    /// Every `(i, j)` with `i < j`.
    #[default]
    AllPairs,
    /// Only pairs with `j - i <= g`.
    MaxGap(usize),
}

impl PairingPolicy {
    pub fn pairs(&self, frames: usize) -> Vec<(usize, usize)> {
        let gap = match *self {
            PairingPolicy::AllPairs => usize::MAX,
            PairingPolicy::MaxGap(g) => g,
        };
        (0..frames)
            .flat_map(|i| {
                (i + 1..frames)
                    .take_while(move |j| j - i <= gap)
                    .map(move |j| (i, j))
            })
            .collect()
    }
}

impl fmt::Display for PairingPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairingPolicy::AllPairs => f.write_str("all"),
            PairingPolicy::MaxGap(g) => write!(f, "gap:{g}"),
        }
    }
}

impl FromStr for PairingPolicy {
    type Err = CurationError;

    /// Accepts `all` or `gap:G` with `G >= 1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            return Ok(PairingPolicy::AllPairs);
        }
        let g = s
            .strip_prefix("gap:")
            .and_then(|g| g.parse::<usize>().ok())
            .ok_or_else(|| CurationError::Pairing(format!("{s:?}, expected `all` or `gap:G`")))?;
        if g == 0 {
            return Err(CurationError::Pairing("gap must be at least 1".into()));
        }
        Ok(PairingPolicy::MaxGap(g))
    }
}

impl Serialize for PairingPolicy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PairingPolicy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurationConfig {
    pub lo: f64,
    pub hi: f64,
    pub pairs_per_clip: usize,
    pub seed: u64,
    pub flow_params: FlowParams,
    pub pairing_policy: PairingPolicy,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            lo: 2.0,
            hi: 20.0,
            pairs_per_clip: 10,
            seed: 0,
            flow_params: FlowParams::default(),
            pairing_policy: PairingPolicy::AllPairs,
        }
    }
}

impl CurationConfig {
    pub fn validate(&self) -> Result<(), CurationError> {
        self.range()?;
        if self.pairs_per_clip == 0 {
            return Err(CurationError::ZeroQuota);
        }
        if self.pairing_policy == PairingPolicy::MaxGap(0) {
            return Err(CurationError::Pairing("gap must be at least 1".into()));
        }
        self.flow_params.validate()?;
        Ok(())
    }

    pub fn range(&self) -> Result<MagnitudeRange, CurationError> {
        MagnitudeRange::new(self.lo, self.hi)
    }
}

/// One scored frame pair of a clip.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub src: usize,
    pub tgt: usize,
    pub result: FlowMagnitudeResult,
}

impl ScoredPair {
    pub fn magnitude(&self) -> f64 {
        self.result.magnitude
    }
}

/// A manifest row. Field order is the serialized key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub clip_id: String,
    pub src_index: usize,
    pub tgt_index: usize,
    pub magnitude: f64,
    pub caption: String,
    pub augmented_caption: String,
}

/// Scores the pairs selected by `config.pairing_policy`, in `(src, tgt)`
/// order. Each frame is grayscaled and prepared once and shared by all of
/// its pairs.
pub fn score_pairs(
    seq: &FrameSequence,
    config: &CurationConfig,
) -> Result<Vec<ScoredPair>, CurationError> {
    if seq.len() < 2 {
        return Err(CurationError::TooFewFrames {
            clip_id: seq.clip_id().to_string(),
            frames: seq.len(),
        });
    }
    let params = &config.flow_params;
    let prepared = seq
        .frames()
        .par_iter()
        .map(|f| PreparedFrame::new(&to_grayscale(f), params))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(config
        .pairing_policy
        .pairs(seq.len())
        .into_par_iter()
        .map(|(src, tgt)| ScoredPair {
            src,
            tgt,
            result: flow_magnitude_prepared(&prepared[src], &prepared[tgt], params),
        })
        .collect())
}

/// A clip waiting to be curated.
#[derive(Debug, Clone)]
pub struct ClipInput {
    pub clip_id: String,
    pub caption: String,
    /// Decoded frames, or why loading failed.
    pub frames: Result<FrameSequence, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClipFailure {
    pub clip_id: String,
    pub error: String,
}

/// What one clip contributes to the manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct ClipOutcome {
    pub records: Vec<PairRecord>,
    pub stats: ClipStats,
}

/// Runs score, filter, sample and caption on a single clip.
pub fn curate_clip(
    seq: &FrameSequence,
    caption: &str,
    config: &CurationConfig,
) -> Result<ClipOutcome, CurationError> {
    config.validate()?;
    if caption.is_empty() {
        return Err(CurationError::EmptyCaption);
    }
    let range = config.range()?;
    let scored = score_pairs(seq, config)?;
    let in_range = filter_range(&scored, range);
    let chosen = sample_diverse(
        &in_range,
        config.pairs_per_clip,
        range,
        config.seed,
        seq.clip_id(),
    );
    let records = chosen
        .iter()
        .map(|p| {
            Ok(PairRecord {
                clip_id: seq.clip_id().to_string(),
                src_index: p.src,
                tgt_index: p.tgt,
                magnitude: p.magnitude(),
                caption: caption.to_string(),
                augmented_caption: augment_caption(caption, p.magnitude())?,
            })
        })
        .collect::<Result<Vec<_>, CurationError>>()?;
    let stats = ClipStats::new(
        seq.clip_id(),
        seq.len(),
        &scored,
        in_range.len(),
        records.len(),
    );
    Ok(ClipOutcome { records, stats })
}

/// Everything a corpus run produced, in input order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CurationOutput {
    pub records: Vec<PairRecord>,
    pub clip_stats: Vec<ClipStats>,
    pub failures: Vec<ClipFailure>,
}

/// Curates a stream of clips. Clips are processed in parallel in batches of
/// `batch` (0 picks twice the thread count); results are emitted in input
/// order so the output is deterministic for a fixed config and input order.
/// A clip that fails to load or score is recorded in `failures` and
/// skipped.
pub fn curate<I>(
    clips: I,
    config: &CurationConfig,
    batch: usize,
) -> Result<CurationOutput, CurationError>
where
    I: IntoIterator<Item = ClipInput>,
{
    config.validate()?;
    let batch = if batch == 0 {
        2 * rayon::current_num_threads()
    } else {
        batch
    };
    let mut out = CurationOutput::default();
    let mut clips = clips.into_iter().peekable();
    while clips.peek().is_some() {
        let chunk: Vec<ClipInput> = clips.by_ref().take(batch).collect();
        let results: Vec<(String, Result<ClipOutcome, String>)> = chunk
            .into_par_iter()
            .map(|clip| {
                let result = clip.frames.and_then(|seq| {
                    curate_clip(
                        &seq.with_clip_id(clip.clip_id.clone()),
                        &clip.caption,
                        config,
                    )
                    .map_err(|e| e.to_string())
                });
                (clip.clip_id, result)
            })
            .collect();
        for (clip_id, result) in results {
            match result {
                Ok(outcome) => {
                    debug!(
                        "{clip_id}: {} scored, {} in range, {} kept",
                        outcome.stats.pair_count_scored,
                        outcome.stats.pair_count_in_range,
                        outcome.records.len()
                    );
                    out.records.extend(outcome.records);
                    out.clip_stats.push(outcome.stats);
                }
                Err(error) => {
                    warn!("skipping clip {clip_id}: {error}");
                    out.failures.push(ClipFailure { clip_id, error });
                }
            }
        }
    }
    Ok(out)
}
