use super::FlowError;
use crate::media::GrayImage;

/// Binomial approximation of a Gaussian with sigma close to 1.
pub const GAUSS5: [f64; 5] = [1.0 / 16.0, 4.0 / 16.0, 6.0 / 16.0, 4.0 / 16.0, 1.0 / 16.0];

/// Builds a Gaussian pyramid: level 0 is `img`, each further level is the
/// previous one blurred with the separable 5-tap kernel (clamped borders)
/// and decimated by keeping even rows and columns, giving `ceil(n / 2)`.
pub fn gaussian_pyramid(img: &GrayImage, levels: usize) -> Result<Vec<GrayImage>, FlowError> {
    Ok(
        gaussian_pyramid_planes(img.data(), img.width(), img.height(), levels)?
            .into_iter()
            .map(|(w, h, data)| {
                GrayImage::from_raw(w, h, data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
            })
            .collect(),
    )
}

/// The same pyramid over an arbitrary real-valued plane, as `(width, height, data)`.
pub fn gaussian_pyramid_planes(
    plane: &[f64],
    width: usize,
    height: usize,
    levels: usize,
) -> Result<Vec<(usize, usize, Vec<f64>)>, FlowError> {
    check_pyramid_size(width, height, levels)?;
    let mut out = Vec::with_capacity(levels);
    out.push((width, height, plane.to_vec()));
    for _ in 1..levels {
        let (w, h, prev) = out.last().unwrap();
        let blurred = blur5(prev, *w, *h);
        out.push(decimate(&blurred, *w, *h));
    }
    Ok(out)
}

pub(crate) fn check_pyramid_size(
    width: usize,
    height: usize,
    levels: usize,
) -> Result<(), FlowError> {
    if levels == 0 {
        return Err(FlowError::InvalidParam(
            "pyramid levels must be at least 1".into(),
        ));
    }
    let min = 1usize.checked_shl(levels as u32 - 1).unwrap_or(usize::MAX);
    if width < min || height < min {
        return Err(FlowError::ImageTooSmall {
            width,
            height,
            levels,
            min,
        });
    }
    Ok(())
}

/// Separable 5-tap blur of a row-major plane with clamp-to-edge borders.
fn blur5(plane: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut tmp = vec![0.0; w * h];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in GAUSS5.iter().enumerate() {
                let xx = (x as isize + k as isize - 2).clamp(0, w as isize - 1) as usize;
                acc += weight * row[xx];
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, weight) in GAUSS5.iter().enumerate() {
                let yy = (y as isize + k as isize - 2).clamp(0, h as isize - 1) as usize;
                acc += weight * tmp[yy * w + x];
            }
            out[y * w + x] = acc;
        }
    }
    out
}

fn decimate(plane: &[f64], w: usize, h: usize) -> (usize, usize, Vec<f64>) {
    let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
    let mut data = Vec::with_capacity(nw * nh);
    for y in 0..nh {
        for x in 0..nw {
            data.push(plane[2 * y * w + 2 * x]);
        }
    }
    (nw, nh, data)
}
