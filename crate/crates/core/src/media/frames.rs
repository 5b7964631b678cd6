use std::fs;
use std::path::{Path, PathBuf};

use super::{netpbm, ColorImage, FrameSequence, MediaError};

const FRAME_EXTENSIONS: [&str; 2] = ["ppm", "pgm"];

/// Loads every `<integer>.ppm` / `<integer>.pgm` file in `dir`, ordered by
/// the numeric value of the stem. Files with other extensions are ignored.
///
/// The clip id is the directory's file name.
pub fn load_frame_dir(dir: &Path) -> Result<FrameSequence, MediaError> {
    let mut entries: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| MediaError::File {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })? {
        let path = entry?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if !ext.is_some_and(|e| FRAME_EXTENSIONS.contains(&e.as_str())) || !path.is_file() {
            continue;
        }
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("");
        let index = stem.parse::<u64>().map_err(|_| MediaError::File {
            path: path.clone(),
            reason: format!("frame file stem {stem:?} is not an integer"),
        })?;
        entries.push((index, path));
    }
    if entries.is_empty() {
        return Err(MediaError::EmptyDir(dir.to_path_buf()));
    }
    entries.sort();
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(MediaError::File {
            path: w[1].1.clone(),
            reason: format!(
                "duplicate frame index {} (also {})",
                w[0].0,
                w[0].1.display()
            ),
        });
    }

    let mut frames: Vec<ColorImage> = Vec::with_capacity(entries.len());
    for (_, path) in &entries {
        let img = netpbm::read_color(path)?;
        if let Some(first) = frames.first() {
            if first.width() != img.width() || first.height() != img.height() {
                return Err(MediaError::MixedDimensions {
                    first: entries[0].1.clone(),
                    w0: first.width(),
                    h0: first.height(),
                    other: path.clone(),
                    w1: img.width(),
                    h1: img.height(),
                });
            }
        }
        frames.push(img);
    }
    let clip_id = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    FrameSequence::new(clip_id, frames, Vec::new())
}

/// Writes frames as `000.ppm`, `001.ppm`, ... (wider padding past 1000 frames).
/// Returns the written paths in frame order.
pub fn write_frame_dir(seq: &FrameSequence, dir: &Path) -> Result<Vec<PathBuf>, MediaError> {
    fs::create_dir_all(dir)?;
    let digits = seq.len().saturating_sub(1).to_string().len().max(3);
    seq.frames()
        .iter()
        .enumerate()
        .map(|(i, frame)| {
            let path = dir.join(format!("{i:0digits$}.ppm"));
            netpbm::write_ppm(&path, frame)?;
            Ok(path)
        })
        .collect()
}
