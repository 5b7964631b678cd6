//! Magnitude-range filtering and stratified per-clip sampling.

use super::{MagnitudeRange, ScoredPair};
use crate::rng::{below, clip_rng, shuffle};

/// Keeps pairs with `lo <= magnitude <= hi`, preserving order.
pub fn filter_range(scored: &[ScoredPair], range: MagnitudeRange) -> Vec<ScoredPair> {
    scored
        .iter()
        .filter(|p| range.contains(p.magnitude()))
        .cloned()
        .collect()
}

/// Picks at most `quota` pairs spread evenly over the magnitude range.
///
/// If there are no more than `quota` pairs, all are returned. Otherwise the
/// range is cut into `quota` equal-width bins and bins are visited
/// round-robin, each visit taking one not-yet-chosen pair from the bin, until
/// `quota` pairs are chosen. Empty or exhausted bins are skipped, so their
/// share is refilled from the others. Pair order within a bin and the bin
/// visiting order are shuffled by the clip's random stream (see
/// [`crate::rng`]); the result depends only on the set of pairs, not on
/// their input order, and is returned sorted by `(src, tgt)`.
pub fn sample_diverse(
    in_range: &[ScoredPair],
    quota: usize,
    range: MagnitudeRange,
    seed: u64,
    clip_id: &str,
) -> Vec<ScoredPair> {
    let mut pairs = in_range.to_vec();
    pairs.sort_by_key(|p| (p.src, p.tgt));
    if pairs.len() <= quota {
        return pairs;
    }

    let mut rng = clip_rng(seed, clip_id);
    let mut bins: Vec<Vec<usize>> = vec![Vec::new(); quota];
    for (i, p) in pairs.iter().enumerate() {
        bins[range.bin_of(p.magnitude(), quota)].push(i);
    }
    for bin in &mut bins {
        shuffle(&mut rng, bin);
    }
    let mut order: Vec<usize> = (0..quota).filter(|&b| !bins[b].is_empty()).collect();
    shuffle(&mut rng, &mut order);

    let mut chosen = Vec::with_capacity(quota);
    let mut cursor = vec![0usize; quota];
    'fill: loop {
        for &b in &order {
            if cursor[b] < bins[b].len() {
                chosen.push(bins[b][cursor[b]]);
                cursor[b] += 1;
                if chosen.len() == quota {
                    break 'fill;
                }
            }
        }
    }
    chosen.sort_unstable();
    chosen.into_iter().map(|i| pairs[i].clone()).collect()
}

/// Uniform sample of `k` distinct indices below `n` without stratification;
/// used by tests as a reference point for how uneven plain sampling is.
pub fn sample_uniform(n: usize, k: usize, seed: u64, clip_id: &str) -> Vec<usize> {
    let mut rng = clip_rng(seed, clip_id);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k.min(n) {
        let j = i + below(&mut rng, n - i);
        idx.swap(i, j);
    }
    idx.truncate(k.min(n));
    idx.sort_unstable();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::FlowMagnitudeResult;

    fn pair(src: usize, tgt: usize, m: f64) -> ScoredPair {
        ScoredPair {
            src,
            tgt,
            result: FlowMagnitudeResult {
                magnitude: m,
                n_features_detected: 1,
                n_tracked: 1,
                n_above_threshold: usize::from(m > 0.0),
            },
        }
    }

    fn range() -> MagnitudeRange {
        MagnitudeRange::new(2.0, 20.0).unwrap()
    }

    /// 100 pairs with magnitudes spread uniformly over `[2, 20]`.
    fn uniform_pairs() -> Vec<ScoredPair> {
        (0..100)
            .map(|k| pair(k, k + 1, 2.0 + 18.0 * (k as f64 + 0.5) / 100.0))
            .collect()
    }

    #[test]
    fn filter_inclusive() {
        let scored = vec![
            pair(0, 1, 0.0),
            pair(0, 2, 7.3),
            pair(1, 2, 25.0),
            pair(0, 3, 2.0),
            pair(1, 3, 20.0),
        ];
        let kept: Vec<f64> = filter_range(&scored, range())
            .iter()
            .map(|p| p.magnitude())
            .collect();
        assert_eq!(kept, vec![7.3, 2.0, 20.0]);
        let statics = vec![pair(0, 1, 0.0), pair(0, 2, 0.0)];
        assert!(filter_range(&statics, range()).is_empty());
    }

    #[test]
    fn fewer_than_quota_returns_all() {
        let p = vec![
            pair(2, 3, 5.0),
            pair(0, 1, 3.0),
            pair(0, 2, 9.0),
            pair(1, 2, 4.0),
        ];
        let out = sample_diverse(&p, 10, range(), 1, "c");
        let keys: Vec<_> = out.iter().map(|p| (p.src, p.tgt)).collect();
        assert_eq!(keys, vec![(0, 1), (0, 2), (1, 2), (2, 3)]);
    }

    #[test]
    fn deterministic_and_exact_quota() {
        let p: Vec<ScoredPair> = (0..100)
            .map(|k| pair(k, k + 1, 2.0 + (k % 17) as f64))
            .collect();
        let a = sample_diverse(&p, 10, range(), 42, "clip");
        let b = sample_diverse(&p, 10, range(), 42, "clip");
        assert_eq!(a.len(), 10);
        assert_eq!(a, b);
        let mut reversed = p.clone();
        reversed.reverse();
        assert_eq!(sample_diverse(&reversed, 10, range(), 42, "clip"), a);
    }

    #[test]
    fn one_per_decile_bin() {
        let out = sample_diverse(&uniform_pairs(), 10, range(), 7, "clip");
        // Oracle: bin by hand with 1.8-wide intervals.
        let mut counts = [0usize; 10];
        for p in &out {
            let b = (((p.magnitude() - 2.0) / 1.8).floor() as usize).min(9);
            counts[b] += 1;
        }
        assert_eq!(counts, [1; 10]);
    }

    #[test]
    fn empty_bins_are_refilled() {
        // Everything in the lowest two bins: quota still met.
        let p: Vec<ScoredPair> = (0..30)
            .map(|k| pair(k, k + 1, 2.0 + 0.1 * k as f64))
            .collect();
        let out = sample_diverse(&p, 10, range(), 3, "c");
        assert_eq!(out.len(), 10);
        let mut keys: Vec<_> = out.iter().map(|p| (p.src, p.tgt)).collect();
        keys.dedup();
        assert_eq!(keys.len(), 10);
    }

    #[test]
    fn stratified_beats_uniform_on_skewed_input() {
        // 90 pairs crowd the low end, 10 spread over the rest.
        let mut p: Vec<ScoredPair> = (0..90)
            .map(|k| pair(k, k + 1, 2.0 + 0.01 * k as f64))
            .collect();
        p.extend((0..10).map(|k| pair(100 + k, 101 + k, 4.0 + 1.6 * k as f64)));
        let strat = sample_diverse(&p, 10, range(), 11, "c");
        let high = strat.iter().filter(|q| q.magnitude() > 4.0).count();
        assert!(high >= 8, "{high}");
        let uni = sample_uniform(p.len(), 10, 11, "c");
        assert_eq!(uni.len(), 10);
    }
}
