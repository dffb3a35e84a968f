//! Corpus ingestion: raw documents in, cleaned one-document-per-line files
//! out.
//!
//! Cleaning is a fixed four-stage transform (HTML stripping, literal
//! `\uXXXX` escape decoding, Latin-1 mojibake repair, emoji removal)
//! followed by whitespace normalization. Every stage is deterministic so
//! runs are reproducible bit-exactly.

mod clean;
mod ingest;

pub use clean::{
    clean_document, clean_text, decode_unicode_escapes, fix_mojibake, remove_emoji, strip_html,
    EmojiRanges,
};
pub use ingest::{ingest_corpus, split_oversized, MAX_DOCUMENT_BYTES};

use std::path::PathBuf;
use thiserror::Error;

/// A raw input document prior to cleaning.
#[derive(Clone, Debug)]
pub struct RawDocument {
    pub source_id: String,
    pub text: String,
}

impl RawDocument {
    pub fn new(source_id: impl Into<String>, text: impl Into<String>) -> Self {
        RawDocument {
            source_id: source_id.into(),
            text: text.into(),
        }
    }
}

/// A cleaned document: no HTML, no literal escapes, no emoji, no control
/// characters, single-space separated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CleanDocument {
    pub text: String,
}

/// Counters reported by a cleaning run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CleaningStats {
    pub docs_in: u64,
    pub docs_out: u64,
    pub docs_dropped_empty: u64,
    pub tags_stripped: u64,
    pub escapes_decoded: u64,
    pub mojibake_fixed: u64,
    pub emoji_removed: u64,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unreadable input paths:\n{}", format_path_errors(.0))]
    UnreadableInputs(Vec<(PathBuf, String)>),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("bad emoji range on line {line}: {message}")]
    EmojiRangeParse { line: usize, message: String },
}

fn format_path_errors(errors: &[(PathBuf, String)]) -> String {
    errors
        .iter()
        .map(|(p, e)| format!("  {}: {}", p.display(), e))
        .collect::<Vec<_>>()
        .join("\n")
}
