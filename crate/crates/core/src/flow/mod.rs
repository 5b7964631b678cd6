//! Scalar optical-flow magnitude between two frames.
//!
//! Corners are detected in the first frame, tracked into the second with
//! pyramidal Lucas-Kanade, and the lengths of the surviving displacement
//! vectors are averaged after discarding those at or below a noise floor.
//! When nothing survives the magnitude is zero.

mod features;
mod lk;
mod pyramid;

pub use self::features::{corner_response, good_features_to_track, min_eigenvalue, FeaturePoint};
pub use self::lk::{
    lucas_kanade, track_points, LkParams, PyramidFrame, TrackStatus, TrackedPoint, MIN_EIG_FACTOR,
};
pub use self::pyramid::{gaussian_pyramid, gaussian_pyramid_planes, GAUSS5};

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::media::GrayImage;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("frame size mismatch: {}x{} vs {}x{}", prev.0, prev.1, next.0, next.1)]
    DimensionMismatch {
        prev: (usize, usize),
        next: (usize, usize),
    },
    #[error(
        "{width}x{height} image too small for {levels} pyramid levels (needs {min} px per side)"
    )]
    ImageTooSmall {
        width: usize,
        height: usize,
        levels: usize,
        min: usize,
    },
    #[error("invalid flow parameter: {0}")]
    InvalidParam(String),
    #[error("flow config: {0}")]
    Config(String),
}

/// Every tunable of the magnitude computation. Serialized as a flat
/// `key = value` file whose keys are exactly the field names.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowParams {
    pub max_corners: usize,
    pub quality_level: f64,
    pub min_distance: f64,
    pub window: usize,
    pub pyramid_levels: usize,
    pub max_iters: usize,
    pub eps: f64,
    /// Vectors no longer than this (pixels) are dropped before averaging.
    pub noise_threshold: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            max_corners: 200,
            quality_level: 0.01,
            min_distance: 7.0,
            window: 15,
            pyramid_levels: 3,
            max_iters: 30,
            eps: 0.01,
            noise_threshold: 0.5,
        }
    }
}

impl FlowParams {
    pub fn lk(&self) -> LkParams {
        LkParams {
            window: self.window,
            pyramid_levels: self.pyramid_levels,
            max_iters: self.max_iters,
            eps: self.eps,
        }
    }

    pub fn validate(&self) -> Result<(), FlowError> {
        if self.max_corners == 0 {
            return Err(FlowError::InvalidParam(
                "max_corners must be at least 1".into(),
            ));
        }
        if !(self.quality_level > 0.0 && self.quality_level <= 1.0) {
            return Err(FlowError::InvalidParam(format!(
                "quality_level must be in (0, 1], got {}",
                self.quality_level
            )));
        }
        if !(self.min_distance >= 0.0 && self.min_distance.is_finite()) {
            return Err(FlowError::InvalidParam(format!(
                "min_distance must be nonnegative, got {}",
                self.min_distance
            )));
        }
        if !(self.noise_threshold >= 0.0 && self.noise_threshold.is_finite()) {
            return Err(FlowError::InvalidParam(format!(
                "noise_threshold must be nonnegative, got {}",
                self.noise_threshold
            )));
        }
        self.lk().validate()
    }

    pub fn from_config_str(text: &str) -> Result<Self, FlowError> {
        let params: FlowParams =
            toml::from_str(text).map_err(|e| FlowError::Config(e.to_string()))?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_config_string(&self) -> String {
        toml::to_string(self).expect("flat struct serializes")
    }

    pub fn load(path: &Path) -> Result<Self, FlowError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| FlowError::Config(format!("{}: {e}", path.display())))?;
        Self::from_config_str(&text)
            .map_err(|e| FlowError::Config(format!("{}: {e}", path.display())))
    }
}

/// Displacements of the tracked points, lost ones excluded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowVectorSet {
    pub vectors: Vec<(f64, f64)>,
}

impl FlowVectorSet {
    pub fn from_tracks(tracks: &[TrackedPoint]) -> Self {
        Self {
            vectors: tracks
                .iter()
                .filter(|t| t.is_tracked())
                .map(TrackedPoint::displacement)
                .collect(),
        }
    }

    pub fn magnitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.vectors.iter().map(|(dx, dy)| dx.hypot(*dy))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowMagnitudeResult {
    /// Mean length in pixels of vectors above the noise threshold, or 0.
    pub magnitude: f64,
    pub n_features_detected: usize,
    pub n_tracked: usize,
    pub n_above_threshold: usize,
}

/// A frame ready to take part in any number of pairs: its pyramid with
/// gradients and its detected corners.
pub struct PreparedFrame {
    pyramid: PyramidFrame,
    features: Vec<FeaturePoint>,
}

impl PreparedFrame {
    pub fn new(img: &GrayImage, params: &FlowParams) -> Result<Self, FlowError> {
        params.validate()?;
        let features = good_features_to_track(
            img,
            params.max_corners,
            params.quality_level,
            params.min_distance,
        );
        Ok(Self {
            pyramid: PyramidFrame::new(img, params.pyramid_levels)?,
            features,
        })
    }

    pub fn features(&self) -> &[FeaturePoint] {
        &self.features
    }
}

/// Flow magnitude from `prev` to `next`.
pub fn flow_magnitude(
    prev: &GrayImage,
    next: &GrayImage,
    params: &FlowParams,
) -> Result<FlowMagnitudeResult, FlowError> {
    check_same_size(prev, next)?;
    let a = PreparedFrame::new(prev, params)?;
    let b = PreparedFrame::new(next, params)?;
    Ok(flow_magnitude_prepared(&a, &b, params))
}

pub(crate) fn check_same_size(prev: &GrayImage, next: &GrayImage) -> Result<(), FlowError> {
    if prev.width() != next.width() || prev.height() != next.height() {
        return Err(FlowError::DimensionMismatch {
            prev: (prev.width(), prev.height()),
            next: (next.width(), next.height()),
        });
    }
    Ok(())
}

/// Same as [`flow_magnitude`] over frames prepared with the same `params`.
pub fn flow_magnitude_prepared(
    prev: &PreparedFrame,
    next: &PreparedFrame,
    params: &FlowParams,
) -> FlowMagnitudeResult {
    let tracks = track_points(&prev.pyramid, &next.pyramid, &prev.features, &params.lk());
    let vectors = FlowVectorSet::from_tracks(&tracks);
    let kept: Vec<f64> = vectors
        .magnitudes()
        .filter(|&m| m > params.noise_threshold)
        .collect();
    let magnitude = if kept.is_empty() {
        0.0
    } else {
        kept.iter().sum::<f64>() / kept.len() as f64
    };
    FlowMagnitudeResult {
        magnitude,
        n_features_detected: prev.features.len(),
        n_tracked: vectors.vectors.len(),
        n_above_threshold: kept.len(),
    }
}
