//! Training-free motion tooling for image-to-GIF datasets: sparse optical
//! flow magnitude scoring, motion-range pair curation with motion-word
//! captions, dense flow warping with perceptual losses, and motion
//! coherency metrics.

pub mod curation;
pub mod eval;
pub mod flow;
pub mod media;
pub mod rng;
pub mod synth;
pub mod warp;

pub use curation::{CurationConfig, PairRecord, PairingPolicy};
pub use eval::{motion_coherency, CoherencyReport, EvalError, RolloutSpec};
pub use flow::{flow_magnitude, FlowError, FlowMagnitudeResult, FlowParams};
pub use media::{to_grayscale, ColorImage, FrameSequence, GrayImage, MediaError};
pub use warp::{warp_image, FeatureMap, FlowField, WarpError};
