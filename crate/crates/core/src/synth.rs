//! Procedural fixtures with exactly known motion.
//!
//! [`Texture`] is a seeded blob field defined on the whole plane, so a frame
//! translated by any subpixel amount is rendered directly rather than
//! resampled. [`moving_square_clip`] renders an antialiased bright square
//! travelling at constant velocity.

use crate::media::{ColorImage, FrameSequence, GrayImage};
use crate::rng::splitmix64;

/// Spacing of the jittered blob lattice, in pixels.
const CELL: f64 = 8.0;
/// Cells searched in each direction around a sample.
const REACH: i64 = 2;

/// Smooth random intensity field: one Gaussian blob per lattice cell with
/// hashed position, radius and signed amplitude on a mid-gray base.
#[derive(Debug, Clone, Copy)]
pub struct Texture {
    seed: u64,
}

struct Blob {
    cx: f64,
    cy: f64,
    inv_two_sigma_sq: f64,
    amplitude: f64,
}

impl Texture {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn blob(&self, i: i64, j: i64) -> Blob {
        let mut state = self.seed
            ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
            ^ (j as u64).wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
        let mut unit = || (splitmix64(&mut state) >> 11) as f64 / (1u64 << 53) as f64;
        let cx = (i as f64 + unit()) * CELL;
        let cy = (j as f64 + unit()) * CELL;
        let sigma = 1.5 + 2.0 * unit();
        let amplitude = 0.5 * (unit() - 0.5);
        Blob {
            cx,
            cy,
            inv_two_sigma_sq: 1.0 / (2.0 * sigma * sigma),
            amplitude,
        }
    }

    /// Field value at a plane point.
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let ci = (x / CELL).floor() as i64;
        let cj = (y / CELL).floor() as i64;
        let mut v = 0.5;
        for j in cj - REACH..=cj + REACH {
            for i in ci - REACH..=ci + REACH {
                let b = self.blob(i, j);
                let r2 = (x - b.cx).powi(2) + (y - b.cy).powi(2);
                v += b.amplitude * (-r2 * b.inv_two_sigma_sq).exp();
            }
        }
        v.clamp(0.0, 1.0)
    }

    /// Renders the field with content moved by `(shift_x, shift_y)`: output
    /// pixel `(x, y)` shows the field at `(x - shift_x, y - shift_y)`.
    pub fn render(&self, width: usize, height: usize, shift_x: f64, shift_y: f64) -> GrayImage {
        GrayImage::from_fn(width, height, |x, y| {
            self.value(x as f64 - shift_x, y as f64 - shift_y)
        })
    }

    pub fn render_color(
        &self,
        width: usize,
        height: usize,
        shift_x: f64,
        shift_y: f64,
    ) -> ColorImage {
        ColorImage::from_gray(&self.render(width, height, shift_x, shift_y))
    }
}

/// Length of the overlap between `[a0, a1]` and `[b0, b1]`.
fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

/// One frame with a bright `side`-pixel square whose top-left edge is at
/// `(left, top)` in continuous coordinates (pixel `x` spans `[x-0.5, x+0.5]`).
pub fn square_frame(width: usize, height: usize, side: f64, left: f64, top: f64) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        let cx = overlap(x as f64 - 0.5, x as f64 + 0.5, left, left + side);
        let cy = overlap(y as f64 - 0.5, y as f64 + 0.5, top, top + side);
        0.1 + 0.8 * cx * cy
    })
}

/// A clip of `frames` frames of a square moving by `(vx, vy)` pixels per frame.
pub fn moving_square_clip(
    clip_id: &str,
    frames: usize,
    size: usize,
    side: f64,
    start: (f64, f64),
    velocity: (f64, f64),
) -> FrameSequence {
    let images = (0..frames)
        .map(|k| {
            let t = k as f64;
            ColorImage::from_gray(&square_frame(
                size,
                size,
                side,
                start.0 + velocity.0 * t,
                start.1 + velocity.1 * t,
            ))
        })
        .collect();
    FrameSequence::new(clip_id, images, Vec::new()).expect("frames share one size")
}

/// A clip of a texture translating by `(vx, vy)` pixels per frame.
pub fn translating_texture_clip(
    clip_id: &str,
    seed: u64,
    frames: usize,
    size: usize,
    velocity: (f64, f64),
) -> FrameSequence {
    let tex = Texture::new(seed);
    let images = (0..frames)
        .map(|k| tex.render_color(size, size, velocity.0 * k as f64, velocity.1 * k as f64))
        .collect();
    FrameSequence::new(clip_id, images, Vec::new()).expect("frames share one size")
}
