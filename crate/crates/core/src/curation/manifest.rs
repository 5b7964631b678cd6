//! JSON-lines manifests: one [`PairRecord`] per line, UTF-8, keys in the
//! order `clip_id, src_index, tgt_index, magnitude, caption,
//! augmented_caption`.

use std::io::{BufRead, Write};

use super::{CurationError, PairRecord};

pub fn write_jsonl<W: Write>(mut out: W, records: &[PairRecord]) -> Result<(), CurationError> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| CurationError::Manifest(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_jsonl_string(records: &[PairRecord]) -> String {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, records).expect("writing to memory");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Parses a manifest, skipping blank lines. Errors name the 1-based line.
pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<PairRecord>, CurationError> {
    let mut records = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line)
            .map_err(|e| CurationError::Manifest(format!("line {}: {e}", n + 1)))?;
        records.push(r);
    }
    Ok(records)
}
