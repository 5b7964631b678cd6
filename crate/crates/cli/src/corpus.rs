//! Finding clips on disk and reading caption files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use flowkit::media::{decode_gif, load_frame_dir};
use flowkit::FrameSequence;

use crate::UsageError;

#[derive(Debug, Clone)]
pub enum ClipSource {
    Gif(PathBuf),
    FrameDir(PathBuf),
}

#[derive(Debug, Clone)]
pub struct ClipEntry {
    pub clip_id: String,
    pub source: ClipSource,
}

impl ClipEntry {
    pub fn load(&self) -> Result<FrameSequence, String> {
        match &self.source {
            ClipSource::Gif(path) => fs::read(path)
                .map_err(|e| format!("{}: {e}", path.display()))
                .and_then(|bytes| {
                    decode_gif(&bytes).map_err(|e| format!("{}: {e}", path.display()))
                })
                .map(|seq| seq.with_clip_id(self.clip_id.clone())),
            ClipSource::FrameDir(dir) => load_frame_dir(dir).map_err(|e| e.to_string()),
        }
    }
}

/// Every `.gif` file and every subdirectory of `dir`, sorted by clip id.
/// A GIF's clip id is its file stem; a frame directory's is its name.
pub fn discover(dir: &Path) -> Result<Vec<ClipEntry>> {
    if !dir.is_dir() {
        return Err(UsageError(format!("input {} is not a directory", dir.display())).into());
    }
    let mut clips: BTreeMap<String, ClipEntry> = BTreeMap::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        let (clip_id, source) = if path.is_dir() {
            (file_name(&path, false), ClipSource::FrameDir(path.clone()))
        } else if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("gif"))
        {
            (file_name(&path, true), ClipSource::Gif(path.clone()))
        } else {
            continue;
        };
        if let Some(prev) = clips.insert(
            clip_id.clone(),
            ClipEntry {
                clip_id: clip_id.clone(),
                source,
            },
        ) {
            return Err(UsageError(format!(
                "clip id {clip_id:?} is used by both {:?} and {}",
                prev.source,
                path.display()
            ))
            .into());
        }
    }
    Ok(clips.into_values().collect())
}

fn file_name(path: &Path, stem: bool) -> String {
    let part = if stem {
        path.file_stem()
    } else {
        path.file_name()
    };
    part.map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Parses `clip_id<TAB>caption` lines. Blank lines are skipped; a repeated
/// clip id or a line without a tab is an error naming the line.
pub fn read_captions(path: &Path) -> Result<BTreeMap<String, String>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading captions {}", path.display()))?;
    let mut captions = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let (id, caption) = line.split_once('\t').ok_or_else(|| {
            UsageError(format!(
                "{}:{}: expected clip_id<TAB>caption",
                path.display(),
                n + 1
            ))
        })?;
        let caption = caption.trim();
        if caption.is_empty() {
            return Err(UsageError(format!(
                "{}:{}: empty caption for {id}",
                path.display(),
                n + 1
            ))
            .into());
        }
        if captions
            .insert(id.trim().to_string(), caption.to_string())
            .is_some()
        {
            return Err(UsageError(format!(
                "{}:{}: duplicate clip id {id}",
                path.display(),
                n + 1
            ))
            .into());
        }
    }
    Ok(captions)
}
