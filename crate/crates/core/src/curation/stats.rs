use serde::{Deserialize, Serialize};

use super::{CurationError, ScoredPair};

/// Magnitude counts in bins of `bin_width` pixels over `[0, upper)`, with a
/// final bin for everything at or above `upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_width: f64,
    pub upper: f64,
    pub counts: Vec<usize>,
}

impl Default for Histogram {
    /// Twenty 10 px bins up to 200 px plus overflow.
    fn default() -> Self {
        Self::new(10.0, 20)
    }
}

impl Histogram {
    pub fn new(bin_width: f64, bins: usize) -> Self {
        Self {
            bin_width,
            upper: bin_width * bins as f64,
            counts: vec![0; bins + 1],
        }
    }

    pub fn add(&mut self, magnitude: f64) {
        let last = self.counts.len() - 1;
        let bin = if magnitude >= self.upper {
            last
        } else {
            ((magnitude / self.bin_width).floor().max(0.0) as usize).min(last)
        };
        self.counts[bin] += 1;
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Adds `other`'s counts; both must share a layout.
    pub fn merge(&mut self, other: &Histogram) {
        debug_assert_eq!(self.counts.len(), other.counts.len());
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipStats {
    pub clip_id: String,
    pub frame_count: usize,
    pub pair_count_scored: usize,
    pub pair_count_in_range: usize,
    pub pair_count_emitted: usize,
    /// Over all scored pairs, before range filtering.
    pub magnitude_histogram: Histogram,
}

impl ClipStats {
    pub fn new(
        clip_id: &str,
        frame_count: usize,
        scored: &[ScoredPair],
        in_range: usize,
        emitted: usize,
    ) -> Self {
        let mut magnitude_histogram = Histogram::default();
        for p in scored {
            magnitude_histogram.add(p.magnitude());
        }
        Self {
            clip_id: clip_id.to_string(),
            frame_count,
            pair_count_scored: scored.len(),
            pair_count_in_range: in_range,
            pair_count_emitted: emitted,
            magnitude_histogram,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub clips: usize,
    pub frames_min: usize,
    pub frames_mean: f64,
    pub frames_max: usize,
    pub total_scored: usize,
    pub total_in_range: usize,
    pub total_emitted: usize,
    pub magnitude_histogram: Histogram,
}

pub fn corpus_stats(stats: &[ClipStats]) -> Result<CorpusSummary, CurationError> {
    let first = stats.first().ok_or(CurationError::NoClips)?;
    let mut hist = Histogram {
        counts: vec![0; first.magnitude_histogram.counts.len()],
        ..first.magnitude_histogram.clone()
    };
    for s in stats {
        hist.merge(&s.magnitude_histogram);
    }
    let frames = stats.iter().map(|s| s.frame_count);
    Ok(CorpusSummary {
        clips: stats.len(),
        frames_min: frames.clone().min().unwrap_or(0),
        frames_mean: frames.clone().sum::<usize>() as f64 / stats.len() as f64,
        frames_max: frames.max().unwrap_or(0),
        total_scored: stats.iter().map(|s| s.pair_count_scored).sum(),
        total_in_range: stats.iter().map(|s| s.pair_count_in_range).sum(),
        total_emitted: stats.iter().map(|s| s.pair_count_emitted).sum(),
        magnitude_histogram: hist,
    })
}
