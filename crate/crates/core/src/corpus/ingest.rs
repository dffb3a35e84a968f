//! Streaming corpus ingestion: newline-delimited documents in, cleaned
//! one-document-per-line output. Peak memory is independent of corpus
//! size.

use super::clean::{clean_text, CleanCounters, EmojiRanges};
use super::{CleaningStats, CorpusError};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Documents longer than this are split at the last sentence boundary
/// before the limit, keeping per-document memory bounded.
pub const MAX_DOCUMENT_BYTES: usize = 1 << 20;

/// Splits an oversized document at sentence boundaries so every part stays
/// within `max_bytes`. Parts are split after the last `.`, `!` or `?`
/// before the limit; a part with no boundary splits at the last char
/// boundary instead.
pub fn split_oversized(text: &str, max_bytes: usize) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut rest = text;
    while rest.len() > max_bytes {
        let mut split_at = 0;
        let mut last_boundary = 0;
        for (idx, c) in rest.char_indices() {
            let end = idx + c.len_utf8();
            if end > max_bytes {
                break;
            }
            split_at = end;
            if matches!(c, '.' | '!' | '?') {
                last_boundary = end;
            }
        }
        if last_boundary > 0 {
            split_at = last_boundary;
        }
        if split_at == 0 {
            // a single char longer than the limit; emit it whole
            split_at = rest.chars().next().map(char::len_utf8).unwrap_or(0);
            if split_at == 0 {
                break;
            }
        }
        parts.push(&rest[..split_at]);
        rest = &rest[split_at..];
    }
    if !rest.is_empty() || parts.is_empty() {
        parts.push(rest);
    }
    parts
}

/// Expands input paths: files stay, directories are walked recursively in
/// sorted order.
fn expand_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, CorpusError> {
    let mut files = Vec::new();
    let mut failures = Vec::new();
    let mut stack: Vec<PathBuf> = paths.iter().rev().cloned().collect();
    // depth-first, sorted at each level so output order is stable
    while let Some(path) = stack.pop() {
        if path.is_dir() {
            match std::fs::read_dir(&path) {
                Ok(entries) => {
                    let mut children: Vec<PathBuf> =
                        entries.filter_map(|e| e.ok().map(|e| e.path())).collect();
                    children.sort();
                    // reversed so the stack pops in sorted order
                    stack.extend(children.into_iter().rev());
                }
                Err(e) => failures.push((path, e.to_string())),
            }
        } else {
            match File::open(&path) {
                Ok(_) => files.push(path),
                Err(e) => failures.push((path, e.to_string())),
            }
        }
    }
    if failures.is_empty() {
        Ok(files)
    } else {
        Err(CorpusError::UnreadableInputs(failures))
    }
}

/// Cleans every document of the input files (one document per line,
/// lossily decoded as UTF-8) into `output_path`, preserving input order.
pub fn ingest_corpus(
    input_paths: &[PathBuf],
    output_path: &Path,
    ranges: &EmojiRanges,
) -> Result<CleaningStats, CorpusError> {
    let files = expand_inputs(input_paths)?;
    let out_file = File::create(output_path).map_err(|source| CorpusError::Io {
        path: output_path.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(out_file);
    let mut stats = CleaningStats::default();
    let io_err = |path: &Path, source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };

    for path in &files {
        let file = File::open(path).map_err(|e| io_err(path, e))?;
        let mut reader = BufReader::new(file);
        let mut buf = Vec::new();
        loop {
            buf.clear();
            let n = reader
                .read_until(b'\n', &mut buf)
                .map_err(|e| io_err(path, e))?;
            if n == 0 {
                break;
            }
            if buf.last() == Some(&b'\n') {
                buf.pop();
                if buf.last() == Some(&b'\r') {
                    buf.pop();
                }
            }
            let raw = String::from_utf8_lossy(&buf);
            for part in split_oversized(&raw, MAX_DOCUMENT_BYTES) {
                stats.docs_in += 1;
                let mut counters = CleanCounters::default();
                match clean_text(part, ranges, &mut counters) {
                    Some(cleaned) => {
                        writer
                            .write_all(cleaned.as_bytes())
                            .and_then(|_| writer.write_all(b"\n"))
                            .map_err(|e| io_err(output_path, e))?;
                        stats.docs_out += 1;
                    }
                    None => stats.docs_dropped_empty += 1,
                }
                counters.add_to(&mut stats);
            }
        }
    }
    writer.flush().map_err(|e| io_err(output_path, e))?;
    Ok(stats)
}
