//! Frame containers and decoding.
//!
//! Every pixel channel is an `f64` in `[0, 1]`. Integer sample values from
//! GIF palettes and netpbm files are divided by 255 at the decode boundary
//! and never seen again by downstream numeric code.

mod frames;
pub mod gif;
pub mod netpbm;

pub use self::frames::{load_frame_dir, write_frame_dir};
pub use self::gif::decode_gif;

use std::path::PathBuf;

use thiserror::Error;

/// BT.601 luma weights.
pub const LUMA_R: f64 = 0.299;
pub const LUMA_G: f64 = 0.587;
pub const LUMA_B: f64 = 0.114;

#[derive(Debug, Error)]
pub enum MediaError {
    #[error("gif decode error at byte {offset}: {reason}")]
    Gif { offset: usize, reason: String },
    #[error("{path}: {reason}")]
    File { path: PathBuf, reason: String },
    #[error("no frames found in {0}")]
    EmptyDir(PathBuf),
    #[error("mixed frame dimensions: {first} is {w0}x{h0}, {other} is {w1}x{h1}")]
    MixedDimensions {
        first: PathBuf,
        w0: usize,
        h0: usize,
        other: PathBuf,
        w1: usize,
        h1: usize,
    },
    #[error("invalid image: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Row-major RGB raster.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl ColorImage {
    /// Builds an image from interleaved RGB values.
    pub fn from_rgb(width: usize, height: usize, data: Vec<f64>) -> Result<Self, MediaError> {
        if width == 0 || height == 0 {
            return Err(MediaError::Invalid(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height * 3 {
            return Err(MediaError::Invalid(format!(
                "expected {} channel values for {width}x{height} RGB, got {}",
                width * height * 3,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(MediaError::Invalid(format!(
                "channel value {v} outside [0,1]"
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image from 8-bit interleaved RGB samples.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self, MediaError> {
        Self::from_rgb(
            width,
            height,
            bytes.iter().map(|&b| b as f64 / 255.0).collect(),
        )
    }

    /// Uniform image filled with one color.
    pub fn filled(width: usize, height: usize, rgb: [f64; 3]) -> Result<Self, MediaError> {
        let data = (0..width * height).flat_map(|_| rgb).collect();
        Self::from_rgb(width, height, data)
    }

    /// Replicates a gray image into all three channels.
    pub fn from_gray(gray: &GrayImage) -> Self {
        Self {
            width: gray.width,
            height: gray.height,
            data: gray.data.iter().flat_map(|&v| [v, v, v]).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Channel values quantized back to 8 bits (round half away from zero).
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }
}

/// Row-major single-channel raster.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, MediaError> {
        if width == 0 || height == 0 {
            return Err(MediaError::Invalid(format!("empty image {width}x{height}")));
        }
        if data.len() != width * height {
            return Err(MediaError::Invalid(format!(
                "expected {} intensities for {width}x{height}, got {}",
                width * height,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(MediaError::Invalid(format!("intensity {v} outside [0,1]")));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Samples `f(x, y)` at every pixel center, clamping the result to `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "empty image");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y).clamp(0.0, 1.0));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn to_gray8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize(v)).collect()
    }

    /// Internal constructor for values already known to be in range.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), width * height);
        Self {
            width,
            height,
            data,
        }
    }
}

fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Luma conversion with BT.601 weights.
pub fn to_grayscale(img: &ColorImage) -> GrayImage {
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| {
            // The weights sum to 1; keep gray pixels bit-exact despite rounding.
            if p[0] == p[1] && p[1] == p[2] {
                p[0]
            } else {
                (LUMA_R * p[0] + LUMA_G * p[1] + LUMA_B * p[2]).clamp(0.0, 1.0)
            }
        })
        .collect();
    GrayImage::from_raw(img.width, img.height, data)
}

/// An ordered clip of same-sized frames.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence {
    clip_id: String,
    frames: Vec<ColorImage>,
    frame_delays: Vec<Option<u16>>,
}

impl FrameSequence {
    /// `frame_delays` must be empty (no timing known) or one entry per frame,
    /// in centiseconds.
    pub fn new(
        clip_id: impl Into<String>,
        frames: Vec<ColorImage>,
        frame_delays: Vec<Option<u16>>,
    ) -> Result<Self, MediaError> {
        let Some(first) = frames.first() else {
            return Err(MediaError::Invalid("frame sequence is empty".into()));
        };
        let (w, h) = (first.width, first.height);
        if let Some((i, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| f.width != w || f.height != h)
        {
            return Err(MediaError::Invalid(format!(
                "frame {i} is {}x{}, frame 0 is {w}x{h}",
                f.width, f.height
            )));
        }
        let frame_delays = if frame_delays.is_empty() {
            vec![None; frames.len()]
        } else if frame_delays.len() == frames.len() {
            frame_delays
        } else {
            return Err(MediaError::Invalid(format!(
                "{} delays for {} frames",
                frame_delays.len(),
                frames.len()
            )));
        };
        Ok(Self {
            clip_id: clip_id.into(),
            frames,
            frame_delays,
        })
    }

    pub fn clip_id(&self) -> &str {
        &self.clip_id
    }

    pub fn frames(&self) -> &[ColorImage] {
        &self.frames
    }

    pub fn frame_delays(&self) -> &[Option<u16>] {
        &self.frame_delays
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    pub fn with_clip_id(mut self, clip_id: impl Into<String>) -> Self {
        self.clip_id = clip_id.into();
        self
    }
}
