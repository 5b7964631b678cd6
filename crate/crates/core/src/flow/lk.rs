//! Coarse-to-fine iterative Lucas-Kanade tracking of sparse points.

use serde::{Deserialize, Serialize};

use super::features::{min_eigenvalue, FeaturePoint};
use super::pyramid::gaussian_pyramid;
use super::FlowError;
use crate::media::GrayImage;
use crate::warp::sample_window;

/// A window whose normal-equation matrix has smallest eigenvalue below
/// `MIN_EIG_FACTOR * window_area` is treated as untrackable.
pub const MIN_EIG_FACTOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LkParams {
    /// Odd side length of the square integration window.
    pub window: usize,
    pub pyramid_levels: usize,
    pub max_iters: usize,
    /// Iterations stop once the update norm drops below this, in pixels of
    /// the current pyramid level.
    pub eps: f64,
}

impl LkParams {
    pub fn validate(&self) -> Result<(), FlowError> {
        if self.window < 3 || self.window.is_multiple_of(2) {
            return Err(FlowError::InvalidParam(format!(
                "window must be odd and at least 3, got {}",
                self.window
            )));
        }
        if self.pyramid_levels == 0 {
            return Err(FlowError::InvalidParam(
                "pyramid_levels must be at least 1".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(FlowError::InvalidParam(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(FlowError::InvalidParam(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackStatus {
    Tracked,
    Lost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedPoint {
    pub origin: FeaturePoint,
    /// Meaningless when `status` is `Lost`.
    pub displaced: FeaturePoint,
    pub status: TrackStatus,
}

impl TrackedPoint {
    pub fn is_tracked(&self) -> bool {
        self.status == TrackStatus::Tracked
    }

    pub fn displacement(&self) -> (f64, f64) {
        (
            self.displaced.x - self.origin.x,
            self.displaced.y - self.origin.y,
        )
    }
}

struct Level {
    width: usize,
    height: usize,
    intensity: Vec<f64>,
    grad_x: Vec<f64>,
    grad_y: Vec<f64>,
}

/// A frame's Gaussian pyramid with Scharr gradients at every level, built
/// once and reused for every pair the frame takes part in.
pub struct PyramidFrame {
    levels: Vec<Level>,
}

impl PyramidFrame {
    pub fn new(img: &GrayImage, levels: usize) -> Result<Self, FlowError> {
        let levels = gaussian_pyramid(img, levels)?
            .into_iter()
            .map(|l| {
                let (grad_x, grad_y) = scharr(&l);
                Level {
                    width: l.width(),
                    height: l.height(),
                    intensity: l.data().to_vec(),
                    grad_x,
                    grad_y,
                }
            })
            .collect();
        Ok(Self { levels })
    }

    pub fn width(&self) -> usize {
        self.levels[0].width
    }

    pub fn height(&self) -> usize {
        self.levels[0].height
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }
}

/// Scharr derivative normalized to intensity units per pixel.
fn scharr(img: &GrayImage) -> (Vec<f64>, Vec<f64>) {
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
            gx[i] = (3.0 * (at(x + 1, y - 1) - at(x - 1, y - 1))
                + 10.0 * (at(x + 1, y) - at(x - 1, y))
                + 3.0 * (at(x + 1, y + 1) - at(x - 1, y + 1)))
                / 32.0;
            gy[i] = (3.0 * (at(x - 1, y + 1) - at(x - 1, y - 1))
                + 10.0 * (at(x, y + 1) - at(x, y - 1))
                + 3.0 * (at(x + 1, y + 1) - at(x + 1, y - 1)))
                / 32.0;
        }
    }
    (gx, gy)
}

/// Tracks `points` from `prev` into `next`.
///
/// At each pyramid level, coarsest first, the 2x2 normal equations of the
/// window around the scaled point are solved repeatedly, resampling `next`
/// at the current estimate, until the update is shorter than `eps` or
/// `max_iters` is reached. The estimate is doubled on the way down.
///
/// A point is lost when its window is near-singular at the finest level or
/// when the tracked position leaves the image.
pub fn lucas_kanade(
    prev: &GrayImage,
    next: &GrayImage,
    points: &[FeaturePoint],
    params: &LkParams,
) -> Result<Vec<TrackedPoint>, FlowError> {
    params.validate()?;
    if prev.width() != next.width() || prev.height() != next.height() {
        return Err(FlowError::DimensionMismatch {
            prev: (prev.width(), prev.height()),
            next: (next.width(), next.height()),
        });
    }
    let a = PyramidFrame::new(prev, params.pyramid_levels)?;
    let b = PyramidFrame::new(next, params.pyramid_levels)?;
    Ok(track_points(&a, &b, points, params))
}

/// Tracking over prebuilt pyramids. Both frames must share size and level count.
pub fn track_points(
    prev: &PyramidFrame,
    next: &PyramidFrame,
    points: &[FeaturePoint],
    params: &LkParams,
) -> Vec<TrackedPoint> {
    debug_assert_eq!(prev.num_levels(), next.num_levels());
    let mut scratch = Window::new(params.window);
    points
        .iter()
        .map(|&p| track_one(prev, next, p, params, &mut scratch))
        .collect()
}

/// Reused per-point buffers for the window samples.
struct Window {
    half: usize,
    intensity: Vec<f64>,
    warped: Vec<f64>,
    grad_x: Vec<f64>,
    grad_y: Vec<f64>,
}

impl Window {
    fn new(size: usize) -> Self {
        let n = size * size;
        Self {
            half: size / 2,
            intensity: vec![0.0; n],
            warped: vec![0.0; n],
            grad_x: vec![0.0; n],
            grad_y: vec![0.0; n],
        }
    }

    fn area(&self) -> f64 {
        self.intensity.len() as f64
    }
}

fn track_one(
    prev: &PyramidFrame,
    next: &PyramidFrame,
    origin: FeaturePoint,
    params: &LkParams,
    win: &mut Window,
) -> TrackedPoint {
    let lost = TrackedPoint {
        origin,
        displaced: origin,
        status: TrackStatus::Lost,
    };
    let top = prev.num_levels() - 1;
    let (mut gx, mut gy) = (0.0f64, 0.0f64);

    for level in (0..=top).rev() {
        let scale = 0.5f64.powi(level as i32);
        let (px, py) = (origin.x * scale, origin.y * scale);
        let src = &prev.levels[level];
        let dst = &next.levels[level];
        let (w, h) = (src.width, src.height);

        // Template and gradients around the point in the previous frame.
        sample_window(&src.intensity, w, h, px, py, win.half, &mut win.intensity);
        sample_window(&src.grad_x, w, h, px, py, win.half, &mut win.grad_x);
        sample_window(&src.grad_y, w, h, px, py, win.half, &mut win.grad_y);
        let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
        for (ix, iy) in win.grad_x.iter().zip(&win.grad_y) {
            a11 += ix * ix;
            a12 += ix * iy;
            a22 += iy * iy;
        }
        let det = a11 * a22 - a12 * a12;
        if min_eigenvalue(a11, a12, a22) < MIN_EIG_FACTOR * win.area() || det <= f64::EPSILON {
            if level == 0 {
                return lost;
            }
            // Too flat at this scale: carry the estimate down unrefined.
            gx *= 2.0;
            gy *= 2.0;
            continue;
        }

        let (mut vx, mut vy) = (0.0f64, 0.0f64);
        for _ in 0..params.max_iters {
            let (qx, qy) = (px + gx + vx, py + gy + vy);
            let margin = win.half as f64;
            if qx < -margin
                || qy < -margin
                || qx > (w - 1) as f64 + margin
                || qy > (h - 1) as f64 + margin
            {
                return lost;
            }
            sample_window(&dst.intensity, w, h, qx, qy, win.half, &mut win.warped);
            let (mut b1, mut b2) = (0.0, 0.0);
            for k in 0..win.warped.len() {
                let diff = win.intensity[k] - win.warped[k];
                b1 += diff * win.grad_x[k];
                b2 += diff * win.grad_y[k];
            }
            let ex = (a22 * b1 - a12 * b2) / det;
            let ey = (a11 * b2 - a12 * b1) / det;
            vx += ex;
            vy += ey;
            if ex.hypot(ey) < params.eps {
                break;
            }
        }

        if level > 0 {
            gx = 2.0 * (gx + vx);
            gy = 2.0 * (gy + vy);
        } else {
            gx += vx;
            gy += vy;
        }
    }

    let displaced = FeaturePoint::new(origin.x + gx, origin.y + gy);
    let inside = (0.0..=(prev.width() - 1) as f64).contains(&displaced.x)
        && (0.0..=(prev.height() - 1) as f64).contains(&displaced.y);
    if !inside || !displaced.x.is_finite() || !displaced.y.is_finite() {
        return lost;
    }
    TrackedPoint {
        origin,
        displaced,
        status: TrackStatus::Tracked,
    }
}
