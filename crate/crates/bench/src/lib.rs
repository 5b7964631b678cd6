//! Inputs shared by the benchmarks.

use std::borrow::Cow;

use flowkit::curation::ScoredPair;
use flowkit::FlowMagnitudeResult;

/// An animated GIF of `frames` full-screen `size x size` frames cycling
/// through a 256-entry gray palette.
pub fn gray_ramp_gif(size: u16, frames: usize) -> Vec<u8> {
    let palette: Vec<u8> = (0..=255u8).flat_map(|v| [v, v, v]).collect();
    let mut out = Vec::new();
    {
        let mut enc = gif::Encoder::new(&mut out, size, size, &palette).expect("valid screen");
        for k in 0..frames {
            let buffer: Vec<u8> = (0..size as usize * size as usize)
                .map(|i| ((i % size as usize) * 3 + i / size as usize + 7 * k) as u8)
                .collect();
            let frame = gif::Frame {
                width: size,
                height: size,
                buffer: Cow::Owned(buffer),
                ..gif::Frame::default()
            };
            enc.write_frame(&frame).expect("in-memory write");
        }
    }
    out
}

/// `n` scored pairs with magnitudes spread evenly over `[lo, hi]`.
pub fn spread_pairs(n: usize, lo: f64, hi: f64) -> Vec<ScoredPair> {
    (0..n)
        .map(|k| ScoredPair {
            src: k,
            tgt: k + 1,
            result: FlowMagnitudeResult {
                magnitude: lo + (hi - lo) * (k as f64 + 0.5) / n as f64,
                n_features_detected: 1,
                n_tracked: 1,
                n_above_threshold: 1,
            },
        })
        .collect()
}
