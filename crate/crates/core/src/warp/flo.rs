//! Middlebury `.flo` files: `PIEH` magic (the little-endian float
//! 202021.25), width and height as little-endian `i32`, then row-major
//! interleaved `(u, v)` pairs as little-endian `f32`.
//!
//! Values above 1e9 mark unknown flow in that format; they are passed
//! through untouched.

use std::fs;
use std::path::Path;

use super::{FlowField, WarpError};

pub const MAGIC: &[u8; 4] = b"PIEH";

pub fn decode(bytes: &[u8]) -> Result<FlowField, WarpError> {
    if bytes.len() < 12 {
        return Err(WarpError::Flo(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(WarpError::Flo("missing PIEH magic".into()));
    }
    let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 {
        return Err(WarpError::Flo(format!("bad dimensions {width}x{height}")));
    }
    let (w, h) = (width as usize, height as usize);
    let need = w
        .checked_mul(h)
        .and_then(|n| n.checked_mul(8))
        .ok_or_else(|| WarpError::Flo(format!("dimensions {w}x{h} overflow")))?;
    let body = &bytes[12..];
    if body.len() != need {
        return Err(WarpError::Flo(format!(
            "expected {need} payload bytes for {w}x{h}, found {}",
            body.len()
        )));
    }
    let mut u = Vec::with_capacity(w * h);
    let mut v = Vec::with_capacity(w * h);
    for pair in body.chunks_exact(8) {
        u.push(f32::from_le_bytes(pair[..4].try_into().unwrap()) as f64);
        v.push(f32::from_le_bytes(pair[4..].try_into().unwrap()) as f64);
    }
    FlowField::new(w, h, u, v)
}

/// Encodes with `f32` precision.
pub fn encode(flow: &FlowField) -> Vec<u8> {
    let mut out = Vec::with_capacity(12 + 8 * flow.u().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(flow.width() as i32).to_le_bytes());
    out.extend_from_slice(&(flow.height() as i32).to_le_bytes());
    for (u, v) in flow.u().iter().zip(flow.v()) {
        out.extend_from_slice(&(*u as f32).to_le_bytes());
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn read(path: &Path) -> Result<FlowField, WarpError> {
    let bytes = fs::read(path)?;
    decode(&bytes).map_err(|e| WarpError::Flo(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, flow: &FlowField) -> Result<(), WarpError> {
    fs::write(path, encode(flow))?;
    Ok(())
}
