//! Bilinear sampling with clamp-to-edge addressing, shared by the LK
//! tracker and the flow warp.

/// Samples a single row-major plane at `(x, y)`.
///
/// Coordinates are clamped to `[0, width-1] x [0, height-1]` before
/// interpolation, so any out-of-bounds read returns the nearest edge value.
#[inline]
pub fn bilinear_clamped(plane: &[f64], width: usize, height: usize, x: f64, y: f64) -> f64 {
    debug_assert_eq!(plane.len(), width * height);
    let max_x = (width - 1) as f64;
    let max_y = (height - 1) as f64;
    // NaN coordinates clamp to the origin rather than poisoning the index math.
    let x = if x.is_nan() { 0.0 } else { x.clamp(0.0, max_x) };
    let y = if y.is_nan() { 0.0 } else { y.clamp(0.0, max_y) };
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(width - 1);
    let y1 = (y0 + 1).min(height - 1);
    let ax = x - x0 as f64;
    let ay = y - y0 as f64;

    let top = plane[y0 * width + x0] * (1.0 - ax) + plane[y0 * width + x1] * ax;
    let bottom = plane[y1 * width + x0] * (1.0 - ax) + plane[y1 * width + x1] * ax;
    top * (1.0 - ay) + bottom * ay
}

/// Samples the `(2 * half + 1)^2` grid centred on `(cx, cy)` at integer
/// offsets into `out`, row by row. All samples share one fractional offset,
/// so a window lying fully inside the plane is read with a single set of
/// weights; otherwise each sample falls back to [`bilinear_clamped`].
pub(crate) fn sample_window(
    plane: &[f64],
    width: usize,
    height: usize,
    cx: f64,
    cy: f64,
    half: usize,
    out: &mut [f64],
) {
    let size = 2 * half + 1;
    debug_assert_eq!(out.len(), size * size);
    let (fx, fy) = (cx.floor(), cy.floor());
    let inside = fx - half as f64 >= 0.0
        && fy - half as f64 >= 0.0
        && fx + half as f64 + 1.0 <= (width - 1) as f64
        && fy + half as f64 + 1.0 <= (height - 1) as f64;
    if !inside {
        let mut k = 0;
        for dy in -(half as isize)..=half as isize {
            for dx in -(half as isize)..=half as isize {
                out[k] = bilinear_clamped(plane, width, height, cx + dx as f64, cy + dy as f64);
                k += 1;
            }
        }
        return;
    }
    let (ax, ay) = (cx - fx, cy - fy);
    let (x0, y0) = (fx as usize - half, fy as usize - half);
    for (r, row_out) in out.chunks_exact_mut(size).enumerate() {
        let top = &plane[(y0 + r) * width + x0..][..size + 1];
        let bottom = &plane[(y0 + r + 1) * width + x0..][..size + 1];
        for (c, o) in row_out.iter_mut().enumerate() {
            let t = top[c] * (1.0 - ax) + top[c + 1] * ax;
            let b = bottom[c] * (1.0 - ax) + bottom[c + 1] * ax;
            *o = t * (1.0 - ay) + b * ay;
        }
    }
}
