use super::{FeatureMap, WarpError};
use crate::flow::gaussian_pyramid_planes;

/// Multi-scale features without learned weights.
///
/// Level `l` holds, for an input of `C` channels, `2C` planes at pyramid
/// scale `l`: the `C` Gaussian-pyramid intensity planes followed by their
/// `C` Sobel gradient magnitudes (stencil divided by 8, clamped borders).
/// Level 0 intensities are the input unchanged.
pub fn feature_pyramid(img: &FeatureMap, levels: usize) -> Result<Vec<FeatureMap>, WarpError> {
    let per_channel: Vec<Vec<(usize, usize, Vec<f64>)>> = (0..img.channels())
        .map(|c| gaussian_pyramid_planes(img.plane(c), img.width(), img.height(), levels))
        .collect::<Result<_, _>>()
        .map_err(|e| WarpError::TooSmall(e.to_string()))?;

    let c = img.channels();
    Ok((0..levels)
        .map(|l| {
            let (w, h, _) = per_channel[0][l];
            let mut out = FeatureMap::zeros(2 * c, w, h);
            for (ch, pyr) in per_channel.iter().enumerate() {
                let plane = &pyr[l].2;
                out.plane_mut(ch).copy_from_slice(plane);
                let grad = sobel_magnitude(plane, w, h);
                out.plane_mut(c + ch).copy_from_slice(&grad);
            }
            out
        })
        .collect())
}

pub(crate) fn sobel_magnitude(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let at = |x: isize, y: isize| {
        plane[y.clamp(0, h as isize - 1) as usize * w + x.clamp(0, w as isize - 1) as usize]
    };
    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out[y as usize * w + x as usize] = gx.hypot(gy) / 8.0;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_has_no_gradient() {
        let m = FeatureMap::new(2, 8, 8, vec![0.3; 128]).unwrap();
        for level in feature_pyramid(&m, 3).unwrap() {
            assert_eq!(level.channels(), 4);
            assert!(level
                .plane(2)
                .iter()
                .chain(level.plane(3))
                .all(|&g| g == 0.0));
        }
    }

    #[test]
    fn base_level_is_input() {
        let data: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let m = FeatureMap::new(1, 6, 5, data.clone()).unwrap();
        let levels = feature_pyramid(&m, 1).unwrap();
        assert_eq!(levels.len(), 1);
        assert_eq!(levels[0].plane(0), &data[..]);
    }

    #[test]
    fn step_edge_peaks_on_edge_columns() {
        // Left half 0, right half 1, edge between columns 3 and 4.
        let (w, h) = (8, 6);
        let data: Vec<f64> = (0..w * h)
            .map(|i| if i % w >= 4 { 1.0 } else { 0.0 })
            .collect();
        let m = FeatureMap::new(1, w, h, data).unwrap();
        let g = &feature_pyramid(&m, 1).unwrap()[0];
        // Hand Sobel: columns 3 and 4 see (1 + 2 + 1) * (1 - 0) / 8 = 0.5,
        // every other column sees no change across its 3x3 neighbourhood.
        for y in 0..h {
            for x in 0..w {
                let want = if x == 3 || x == 4 { 0.5 } else { 0.0 };
                assert_eq!(g.get(1, x, y), want, "({x},{y})");
            }
        }
    }

    #[test]
    fn too_small_rejected() {
        let m = FeatureMap::zeros(1, 3, 3);
        assert!(feature_pyramid(&m, 3).is_err());
        assert!(feature_pyramid(&m, 0).is_err());
    }
}
