//! Binary PPM (P6) and PGM (P5) with maxval 255.

use std::fs;
use std::path::Path;

use super::{ColorImage, GrayImage, MediaError};

/// A decoded netpbm raster, keeping track of which flavour it was.
#[derive(Debug, Clone, PartialEq)]
pub enum Netpbm {
    Color(ColorImage),
    Gray(GrayImage),
}

impl Netpbm {
    pub fn into_color(self) -> ColorImage {
        match self {
            Netpbm::Color(c) => c,
            Netpbm::Gray(g) => ColorImage::from_gray(&g),
        }
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl HeaderReader<'_> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, String> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(format!("missing {what} at byte {start}"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|e| format!("bad {what}: {e}"))
    }
}

/// Parses a P5 or P6 byte stream.
pub fn decode(bytes: &[u8]) -> Result<Netpbm, String> {
    let channels = match bytes.get(..2) {
        Some(b"P6") => 3,
        Some(b"P5") => 1,
        _ => return Err("not a binary PPM/PGM (expected P6 or P5 magic)".into()),
    };
    let mut r = HeaderReader { bytes, pos: 2 };
    let width = r.number("width")?;
    let height = r.number("height")?;
    let maxval = r.number("maxval")?;
    if maxval != 255 {
        return Err(format!("unsupported maxval {maxval}, only 255 is accepted"));
    }
    if width == 0 || height == 0 {
        return Err(format!("empty image {width}x{height}"));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(r.pos) {
        Some(b) if b.is_ascii_whitespace() => r.pos += 1,
        _ => return Err("missing whitespace after maxval".into()),
    }
    let need = width * height * channels;
    let raster = &bytes[r.pos..];
    if raster.len() < need {
        return Err(format!(
            "truncated raster: need {need} bytes, have {}",
            raster.len()
        ));
    }
    let raster = &raster[..need];
    Ok(if channels == 3 {
        Netpbm::Color(ColorImage::from_rgb8(width, height, raster).map_err(|e| e.to_string())?)
    } else {
        let data = raster.iter().map(|&b| b as f64 / 255.0).collect();
        Netpbm::Gray(GrayImage::new(width, height, data).map_err(|e| e.to_string())?)
    })
}

pub fn encode_ppm(img: &ColorImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_rgb8());
    out
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.to_gray8());
    out
}

/// Reads a PPM or PGM file; gray files are replicated to RGB.
pub fn read_color(path: &Path) -> Result<ColorImage, MediaError> {
    let bytes = fs::read(path).map_err(|e| file_err(path, e.to_string()))?;
    decode(&bytes)
        .map(Netpbm::into_color)
        .map_err(|reason| file_err(path, reason))
}

pub fn write_ppm(path: &Path, img: &ColorImage) -> Result<(), MediaError> {
    fs::write(path, encode_ppm(img)).map_err(|e| file_err(path, e.to_string()))
}

fn file_err(path: &Path, reason: String) -> MediaError {
    MediaError::File {
        path: path.to_path_buf(),
        reason,
    }
}
