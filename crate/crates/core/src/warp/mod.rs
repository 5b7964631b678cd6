//! Dense backward warping of multi-channel maps by a flow field, plus the
//! feature-space losses used to compare a warped map against its target.

pub mod flo;
mod loss;
mod pyramid;
mod sample;

pub use self::loss::{perceptual_loss, perceptual_loss_grad_b, total_loss, LayerWeights};
pub use self::pyramid::feature_pyramid;
pub use self::sample::bilinear_clamped;
pub(crate) use self::sample::sample_window;

use thiserror::Error;

use crate::media::{ColorImage, GrayImage};

#[derive(Debug, Error)]
pub enum WarpError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid weights: {0}")]
    Weights(String),
    #[error("image too small: {0}")]
    TooSmall(String),
    #[error("flo: {0}")]
    Flo(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-pixel displacement. `u` is horizontal, `v` vertical, both row-major.
///
/// The vector at output pixel `p` points from `p` to the location sampled
/// in the source map.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, u: Vec<f64>, v: Vec<f64>) -> Result<Self, WarpError> {
        let n = width * height;
        if u.len() != n || v.len() != n {
            return Err(WarpError::Shape(format!(
                "flow components have {} and {} entries, expected {n}",
                u.len(),
                v.len()
            )));
        }
        Ok(Self {
            width,
            height,
            u,
            v,
        })
    }

    /// The same displacement everywhere.
    pub fn constant(width: usize, height: usize, u: f64, v: f64) -> Self {
        Self {
            width,
            height,
            u: vec![u; width * height],
            v: vec![v; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> (f64, f64) {
        let i = y * self.width + x;
        (self.u[i], self.v[i])
    }
}

/// Channel-major stack of `channels` planes of `width x height` reals.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    channels: usize,
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FeatureMap {
    pub fn new(
        channels: usize,
        width: usize,
        height: usize,
        data: Vec<f64>,
    ) -> Result<Self, WarpError> {
        if channels == 0 || width == 0 || height == 0 {
            return Err(WarpError::Shape(format!(
                "empty feature map {channels}x{width}x{height}"
            )));
        }
        if data.len() != channels * width * height {
            return Err(WarpError::Shape(format!(
                "{} values for a {channels}x{width}x{height} map",
                data.len()
            )));
        }
        Ok(Self {
            channels,
            width,
            height,
            data,
        })
    }

    pub fn zeros(channels: usize, width: usize, height: usize) -> Self {
        Self {
            channels,
            width,
            height,
            data: vec![0.0; channels * width * height],
        }
    }

    pub fn from_gray(img: &GrayImage) -> Self {
        Self {
            channels: 1,
            width: img.width(),
            height: img.height(),
            data: img.data().to_vec(),
        }
    }

    /// Splits interleaved RGB into three planes.
    pub fn from_color(img: &ColorImage) -> Self {
        let (w, h) = (img.width(), img.height());
        let mut data = vec![0.0; 3 * w * h];
        for (i, px) in img.data().chunks_exact(3).enumerate() {
            for c in 0..3 {
                data[c * w * h + i] = px[c];
            }
        }
        Self {
            channels: 3,
            width: w,
            height: h,
            data,
        }
    }

    /// Interleaves the first three planes back into RGB, clamping to `[0, 1]`.
    pub fn to_color(&self) -> Result<ColorImage, WarpError> {
        if self.channels != 3 {
            return Err(WarpError::Shape(format!(
                "{} channels cannot be viewed as RGB",
                self.channels
            )));
        }
        let n = self.width * self.height;
        let data = (0..n)
            .flat_map(|i| (0..3).map(move |c| (c, i)))
            .map(|(c, i)| self.data[c * n + i].clamp(0.0, 1.0))
            .collect();
        ColorImage::from_rgb(self.width, self.height, data)
            .map_err(|e| WarpError::Shape(e.to_string()))
    }

    pub fn channels(&self) -> usize {
        self.channels
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

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn plane(&self, c: usize) -> &[f64] {
        let n = self.width * self.height;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.width * self.height;
        &mut self.data[c * n..(c + 1) * n]
    }

    #[inline]
    pub fn get(&self, c: usize, x: usize, y: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub fn same_shape(&self, other: &FeatureMap) -> bool {
        self.channels == other.channels && self.width == other.width && self.height == other.height
    }
}

/// Bilinear value of every channel at `(x, y)`, clamped to the map's extent.
pub fn bilinear_sample(img: &FeatureMap, x: f64, y: f64) -> Vec<f64> {
    (0..img.channels)
        .map(|c| bilinear_clamped(img.plane(c), img.width, img.height, x, y))
        .collect()
}

/// Backward warp: `out(p) = img(p + flow(p))`, sampled bilinearly with
/// clamp-to-edge addressing. All channels use the same field.
pub fn warp_image(img: &FeatureMap, flow: &FlowField) -> Result<FeatureMap, WarpError> {
    if img.width != flow.width || img.height != flow.height {
        return Err(WarpError::Shape(format!(
            "map is {}x{}, flow is {}x{}",
            img.width, img.height, flow.width, flow.height
        )));
    }
    let (w, h) = (img.width, img.height);
    let mut out = FeatureMap::zeros(img.channels, w, h);
    for c in 0..img.channels {
        let src = img.plane(c);
        let dst = out.plane_mut(c);
        for y in 0..h {
            for x in 0..w {
                let (u, v) = flow.at(x, y);
                dst[y * w + x] = bilinear_clamped(src, w, h, x as f64 + u, y as f64 + v);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(w: usize, h: usize) -> FeatureMap {
        let data = (0..w * h).map(|i| i as f64).collect();
        FeatureMap::new(1, w, h, data).unwrap()
    }

    #[test]
    fn bilinear_sample_cases() {
        let m = ramp(4, 3);
        assert_eq!(bilinear_sample(&m, 2.0, 1.0), vec![6.0]);
        let mid = bilinear_sample(&m, 1.5, 2.0)[0];
        assert!((mid - (m.get(0, 1, 2) + m.get(0, 2, 2)) / 2.0).abs() < 1e-6);
        assert_eq!(bilinear_sample(&m, -50.0, 80.0), vec![8.0]);
    }

    #[test]
    fn zero_flow_is_identity() {
        let m = ramp(5, 4);
        let out = warp_image(&m, &FlowField::constant(5, 4, 0.0, 0.0)).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn shift_left_by_three() {
        let m = ramp(8, 8);
        let out = warp_image(&m, &FlowField::constant(8, 8, -3.0, 0.0)).unwrap();
        for y in 0..8 {
            for x in 3..8 {
                assert_eq!(out.get(0, x, y), m.get(0, x - 3, y));
            }
        }
    }

    #[test]
    fn shape_mismatch() {
        let m = ramp(5, 4);
        assert!(warp_image(&m, &FlowField::constant(4, 5, 0.0, 0.0)).is_err());
        assert!(FlowField::new(2, 2, vec![0.0; 4], vec![0.0; 3]).is_err());
    }

    #[test]
    fn color_roundtrip() {
        let img = ColorImage::from_rgb8(2, 1, &[10, 20, 30, 40, 50, 60]).unwrap();
        let m = FeatureMap::from_color(&img);
        assert_eq!(m.plane(1), &[20.0 / 255.0, 50.0 / 255.0]);
        assert_eq!(m.to_color().unwrap(), img);
    }

    proptest! {
        #[test]
        fn warp_is_linear_in_pixels(
            a in proptest::collection::vec(-1.0f64..1.0, 2 * 36),
            b in proptest::collection::vec(-1.0f64..1.0, 2 * 36),
            u in proptest::collection::vec(-4.0f64..4.0, 36),
            v in proptest::collection::vec(-4.0f64..4.0, 36),
            s in -2.0f64..2.0,
            t in -2.0f64..2.0,
        ) {
            let flow = FlowField::new(6, 6, u, v).unwrap();
            let ma = FeatureMap::new(2, 6, 6, a.clone()).unwrap();
            let mb = FeatureMap::new(2, 6, 6, b.clone()).unwrap();
            let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + t * y).collect();
            let lhs = warp_image(&FeatureMap::new(2, 6, 6, mix).unwrap(), &flow).unwrap();
            let wa = warp_image(&ma, &flow).unwrap();
            let wb = warp_image(&mb, &flow).unwrap();
            for i in 0..lhs.data().len() {
                let rhs = s * wa.data()[i] + t * wb.data()[i];
                prop_assert!((lhs.data()[i] - rhs).abs() < 1e-6);
            }
        }
    }
}
