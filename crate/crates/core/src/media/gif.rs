//! GIF87a / GIF89a decoding into fully composited frames.
//!
//! Layout recap (all integers little endian):
//!
//! * header `GIF87a` | `GIF89a`
//! * logical screen descriptor: width u16, height u16, packed, background index, aspect
//! * optional global color table, `3 * 2^(n+1)` bytes
//! * blocks until the `0x3B` trailer:
//!   * `0x21 0xF9` graphic control extension: packed (disposal in bits 2..5,
//!     transparency flag in bit 0), delay u16 in centiseconds, transparent index
//!   * `0x21 <label>` any other extension, skipped sub-block by sub-block
//!   * `0x2C` image descriptor: left, top, width, height u16, packed (local
//!     table flag, interlace flag, table size), optional local color table,
//!     LZW minimum code size, then data sub-blocks ending with a zero length
//!
//! The canvas starts fully transparent and is flattened to black, which is
//! also what disposal method 2 restores a frame rectangle to.

use super::{ColorImage, FrameSequence, MediaError};

const TRAILER: u8 = 0x3B;
const EXTENSION: u8 = 0x21;
const IMAGE: u8 = 0x2C;
const GRAPHIC_CONTROL: u8 = 0xF9;
const MAX_CODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
enum Disposal {
    #[default]
    Keep,
    Background,
    Previous,
}

impl Disposal {
    fn from_bits(bits: u8) -> Self {
        match bits {
            2 => Disposal::Background,
            3 => Disposal::Previous,
            // 0 (unspecified), 1 (do not dispose) and reserved values all leave the canvas.
            _ => Disposal::Keep,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct GraphicControl {
    disposal: Disposal,
    delay: u16,
    transparent: Option<u8>,
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err<T>(&self, reason: impl Into<String>) -> Result<T, MediaError> {
        Err(MediaError::Gif {
            offset: self.pos,
            reason: reason.into(),
        })
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], MediaError> {
        match self.bytes.get(self.pos..self.pos + n) {
            Some(s) => {
                self.pos += n;
                Ok(s)
            }
            None => self.err(format!("truncated stream while reading {what}")),
        }
    }

    fn u8(&mut self, what: &str) -> Result<u8, MediaError> {
        Ok(self.take(1, what)?[0])
    }

    fn u16(&mut self, what: &str) -> Result<u16, MediaError> {
        let b = self.take(2, what)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    /// Reads a color table of `2^(size_bits+1)` entries.
    fn color_table(&mut self, size_bits: u8) -> Result<Vec<[u8; 3]>, MediaError> {
        let n = 1usize << (size_bits + 1);
        let raw = self.take(3 * n, "color table")?;
        Ok(raw.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect())
    }

    /// Concatenates data sub-blocks up to and including the zero terminator.
    fn sub_blocks(&mut self, what: &str) -> Result<Vec<u8>, MediaError> {
        let mut out = Vec::new();
        loop {
            let len = self.u8(what)? as usize;
            if len == 0 {
                return Ok(out);
            }
            out.extend_from_slice(self.take(len, what)?);
        }
    }
}

/// Decodes every frame of a GIF and composites it onto the logical screen.
///
/// Frame delays come from the graphic control extension preceding each
/// image; frames without one get `None`. The returned sequence has an empty
/// clip id.
pub fn decode_gif(bytes: &[u8]) -> Result<FrameSequence, MediaError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let magic = cur.take(6, "header")?;
    if magic != b"GIF87a" && magic != b"GIF89a" {
        cur.pos = 0;
        return cur.err("not a GIF87a/GIF89a header");
    }
    let screen_w = cur.u16("screen width")? as usize;
    let screen_h = cur.u16("screen height")? as usize;
    let packed = cur.u8("screen descriptor")?;
    let _background = cur.u8("background index")?;
    let _aspect = cur.u8("aspect ratio")?;
    if screen_w == 0 || screen_h == 0 {
        cur.pos = 6;
        return cur.err(format!("empty logical screen {screen_w}x{screen_h}"));
    }
    let global_table = if packed & 0x80 != 0 {
        Some(cur.color_table(packed & 0x07)?)
    } else {
        None
    };

    let mut canvas = vec![[0u8; 3]; screen_w * screen_h];
    let mut frames = Vec::new();
    let mut delays = Vec::new();
    let mut pending_control: Option<GraphicControl> = None;

    loop {
        let block_start = cur.pos;
        match cur.u8("block introducer")? {
            TRAILER => break,
            EXTENSION => {
                let label = cur.u8("extension label")?;
                if label == GRAPHIC_CONTROL {
                    let data = cur.sub_blocks("graphic control extension")?;
                    if data.len() < 4 {
                        cur.pos = block_start;
                        return cur.err("graphic control extension shorter than 4 bytes");
                    }
                    pending_control = Some(GraphicControl {
                        disposal: Disposal::from_bits((data[0] >> 2) & 0x07),
                        delay: u16::from_le_bytes([data[1], data[2]]),
                        transparent: (data[0] & 0x01 != 0).then_some(data[3]),
                    });
                } else {
                    cur.sub_blocks("extension")?;
                }
            }
            IMAGE => {
                let control = pending_control.take();
                let frame = read_image(&mut cur, global_table.as_deref())?;
                let control_or_default = control.unwrap_or_default();
                let before =
                    (control_or_default.disposal == Disposal::Previous).then(|| canvas.clone());
                frame.draw(
                    &mut canvas,
                    screen_w,
                    screen_h,
                    control_or_default.transparent,
                );
                let rgb: Vec<u8> = canvas.iter().flatten().copied().collect();
                frames.push(ColorImage::from_rgb8(screen_w, screen_h, &rgb)?);
                delays.push(control.map(|c| c.delay));
                match control_or_default.disposal {
                    Disposal::Keep => {}
                    Disposal::Background => frame.clear(&mut canvas, screen_w, screen_h),
                    Disposal::Previous => canvas = before.unwrap(),
                }
            }
            other => {
                cur.pos = block_start;
                return cur.err(format!("unknown block introducer 0x{other:02X}"));
            }
        }
    }
    if frames.is_empty() {
        return cur.err("GIF contains no images");
    }
    FrameSequence::new(String::new(), frames, delays)
}

struct DecodedImage {
    left: usize,
    top: usize,
    width: usize,
    height: usize,
    /// Palette indices in row-major order; transparency is applied at draw time.
    indices: Vec<u8>,
    palette: Vec<[u8; 3]>,
}

impl DecodedImage {
    fn visible(
        &self,
        screen_w: usize,
        screen_h: usize,
    ) -> impl Iterator<Item = (usize, usize)> + '_ {
        let x_end = (self.left + self.width).min(screen_w);
        let y_end = (self.top + self.height).min(screen_h);
        (self.top..y_end).flat_map(move |y| (self.left..x_end).map(move |x| (x, y)))
    }

    fn draw(
        &self,
        canvas: &mut [[u8; 3]],
        screen_w: usize,
        screen_h: usize,
        transparent: Option<u8>,
    ) {
        for (x, y) in self.visible(screen_w, screen_h) {
            let idx = self.indices[(y - self.top) * self.width + (x - self.left)];
            if Some(idx) != transparent {
                canvas[y * screen_w + x] = self.palette[idx as usize];
            }
        }
    }

    fn clear(&self, canvas: &mut [[u8; 3]], screen_w: usize, screen_h: usize) {
        for (x, y) in self.visible(screen_w, screen_h) {
            canvas[y * screen_w + x] = [0; 3];
        }
    }
}

fn read_image(
    cur: &mut Cursor<'_>,
    global: Option<&[[u8; 3]]>,
) -> Result<DecodedImage, MediaError> {
    let descriptor_at = cur.pos;
    let left = cur.u16("image left")? as usize;
    let top = cur.u16("image top")? as usize;
    let width = cur.u16("image width")? as usize;
    let height = cur.u16("image height")? as usize;
    let packed = cur.u8("image descriptor")?;
    let local = if packed & 0x80 != 0 {
        Some(cur.color_table(packed & 0x07)?)
    } else {
        None
    };
    let interlaced = packed & 0x40 != 0;
    let palette = match (local, global) {
        (Some(l), _) => l,
        (None, Some(g)) => g.to_vec(),
        (None, None) => {
            cur.pos = descriptor_at;
            return cur.err("image has no local or global color table");
        }
    };

    let code_size_at = cur.pos;
    let min_code_size = cur.u8("LZW minimum code size")?;
    if !(2..=8).contains(&min_code_size) {
        cur.pos = code_size_at;
        return cur.err(format!("unsupported LZW minimum code size {min_code_size}"));
    }
    let data_at = cur.pos;
    let data = cur.sub_blocks("image data")?;
    let pixels = width * height;
    let decoded = lzw_decode(&data, min_code_size, pixels).map_err(|reason| MediaError::Gif {
        offset: data_at,
        reason,
    })?;
    if let Some(&bad) = decoded.iter().find(|&&i| i as usize >= palette.len()) {
        return Err(MediaError::Gif {
            offset: data_at,
            reason: format!("color index {bad} outside a {}-entry table", palette.len()),
        });
    }
    let indices = if interlaced {
        deinterlace(&decoded, width, height)
    } else {
        decoded
    };
    Ok(DecodedImage {
        left,
        top,
        width,
        height,
        indices,
        palette,
    })
}

fn deinterlace(rows_in_pass_order: &[u8], width: usize, height: usize) -> Vec<u8> {
    let mut out = vec![0u8; rows_in_pass_order.len()];
    let passes = [(0usize, 8usize), (4, 8), (2, 4), (1, 2)];
    let mut src_row = 0;
    for (start, step) in passes {
        for y in (start..height).step_by(step) {
            out[y * width..(y + 1) * width]
                .copy_from_slice(&rows_in_pass_order[src_row * width..(src_row + 1) * width]);
            src_row += 1;
        }
    }
    out
}

/// Variable-width LSB-first LZW as used by GIF. Decodes exactly `expected`
/// indices; extra output after that is ignored, a short stream is an error.
fn lzw_decode(data: &[u8], min_code_size: u8, expected: usize) -> Result<Vec<u8>, String> {
    let clear = 1usize << min_code_size;
    let end = clear + 1;

    let mut prefix = vec![0u16; MAX_CODES];
    let mut suffix = vec![0u8; MAX_CODES];
    let mut first = vec![0u8; MAX_CODES];
    let mut length = vec![0u16; MAX_CODES];
    for code in 0..clear {
        suffix[code] = code as u8;
        first[code] = code as u8;
        length[code] = 1;
    }

    let mut out = Vec::with_capacity(expected);
    let mut code_size = min_code_size as u32 + 1;
    let mut next = clear + 2;
    let mut prev: Option<usize> = None;

    let mut acc: u32 = 0;
    let mut bits: u32 = 0;
    let mut bytes = data.iter();

    while out.len() < expected {
        while bits < code_size {
            match bytes.next() {
                Some(&b) => {
                    acc |= (b as u32) << bits;
                    bits += 8;
                }
                None => {
                    return Err(format!(
                        "image data ended after {} of {expected} pixels",
                        out.len()
                    ))
                }
            }
        }
        let code = (acc & ((1 << code_size) - 1)) as usize;
        acc >>= code_size;
        bits -= code_size;

        if code == clear {
            code_size = min_code_size as u32 + 1;
            next = clear + 2;
            prev = None;
            continue;
        }
        if code == end {
            return Err(format!(
                "end-of-information code after {} of {expected} pixels",
                out.len()
            ));
        }
        let Some(p) = prev else {
            if code >= clear {
                return Err(format!("first code {code} after clear is not a literal"));
            }
            out.push(code as u8);
            prev = Some(code);
            continue;
        };

        let entry_first = if code < next {
            emit(&mut out, code, &prefix, &suffix, &length);
            first[code]
        } else if code == next && next < MAX_CODES {
            // KwKwK case: the string is prev + first(prev).
            let f = first[p];
            emit(&mut out, p, &prefix, &suffix, &length);
            out.push(f);
            f
        } else {
            return Err(format!("invalid LZW code {code} (next free code {next})"));
        };

        if next < MAX_CODES {
            prefix[next] = p as u16;
            suffix[next] = entry_first;
            first[next] = first[p];
            length[next] = length[p] + 1;
            next += 1;
            if next == (1 << code_size) && code_size < 12 {
                code_size += 1;
            }
        }
        prev = Some(code);
    }
    out.truncate(expected);
    Ok(out)
}

fn emit(out: &mut Vec<u8>, code: usize, prefix: &[u16], suffix: &[u8], length: &[u16]) {
    let n = length[code] as usize;
    let start = out.len();
    out.resize(start + n, 0);
    let mut c = code;
    for slot in out[start..].iter_mut().rev() {
        *slot = suffix[c];
        c = prefix[c] as usize;
    }
}
