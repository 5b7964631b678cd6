//! Shi-Tomasi corner detection.

use serde::{Deserialize, Serialize};

use crate::media::GrayImage;

/// A feature location in pixel coordinates of the image it was found in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeaturePoint {
    pub x: f64,
    pub y: f64,
}

impl FeaturePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &FeaturePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Side length of the structure tensor summation window.
pub const BLOCK_SIZE: usize = 3;

/// 3x3 Sobel derivatives with clamped borders, unnormalized.
pub(crate) fn sobel(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
    let (w, h) = (img.width(), img.height());
    let at = |x: isize, y: isize| {
        img.get(
            x.clamp(0, w as isize - 1) as usize,
            y.clamp(0, h as isize - 1) as usize,
        )
    };
    let mut gx = vec![0.0; w * h];
    let mut gy = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let i = y as usize * w + x as usize;
            gx[i] = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            gy[i] = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
        }
    }
    (gx, gy)
}

/// Smaller eigenvalue of the symmetric matrix `[[a, b], [b, c]]`.
#[inline]
pub fn min_eigenvalue(a: f64, b: f64, c: f64) -> f64 {
    let half_trace = 0.5 * (a + c);
    let half_diff = 0.5 * (a - c);
    half_trace - (half_diff * half_diff + b * b).sqrt()
}

/// Per-pixel Shi-Tomasi response: the smaller eigenvalue of the structure
/// tensor of Sobel gradients summed over a `BLOCK_SIZE` window.
pub fn corner_response(img: &GrayImage) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let (gx, gy) = sobel(img);
    let r = (BLOCK_SIZE / 2) as isize;
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
            for dy in -r..=r {
                let yy = (y + dy).clamp(0, h as isize - 1) as usize;
                for dx in -r..=r {
                    let xx = (x + dx).clamp(0, w as isize - 1) as usize;
                    let (ix, iy) = (gx[yy * w + xx], gy[yy * w + xx]);
                    a += ix * ix;
                    b += ix * iy;
                    c += iy * iy;
                }
            }
            // Rounding can push a zero eigenvalue slightly negative.
            out[y as usize * w + x as usize] = min_eigenvalue(a, b, c).max(0.0);
        }
    }
    out
}

/// Strongest Shi-Tomasi corners, sorted by descending response.
///
/// Candidates must reach `quality_level` times the image's maximum response.
/// They are accepted greedily, strongest first, skipping any closer than
/// `min_distance` to one already accepted, until `max_corners` are found.
/// Equal responses are ordered by row-major pixel index.
pub fn good_features_to_track(
    img: &GrayImage,
    max_corners: usize,
    quality_level: f64,
    min_distance: f64,
) -> Vec<FeaturePoint> {
    if img.width() < 3 || img.height() < 3 || max_corners == 0 {
        return Vec::new();
    }
    let response = corner_response(img);
    let max = response.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let threshold = quality_level * max;
    let mut candidates: Vec<(f64, usize)> = response
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= threshold && r > 0.0)
        .map(|(i, &r)| (r, i))
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let w = img.width();
    let mut accepted: Vec<FeaturePoint> = Vec::with_capacity(max_corners.min(candidates.len()));
    for (_, i) in candidates {
        let p = FeaturePoint::new((i % w) as f64, (i / w) as f64);
        if accepted.iter().all(|q| q.distance(&p) >= min_distance) {
            accepted.push(p);
            if accepted.len() == max_corners {
                break;
            }
        }
    }
    accepted
}
