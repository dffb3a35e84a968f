//! Unigram language-model subword tokenizer: training (EM + pruning),
//! Viterbi segmentation, and a TSV vocabulary format.
//!
//! Text is marker-normalized before segmentation: whitespace is removed
//! and every word is prefixed with U+2581 so decoding can restore spaces
//! losslessly. Special tokens occupy pinned ids 0–4.

mod lattice;
mod trainer;
mod vocab;

pub use lattice::{viterbi_segment, Segmentation, Segmenter};
pub use trainer::{
    collect_seed_candidates, em_step, prune_vocab, train_unigram, TrainerConfig,
};
pub use vocab::{load_vocab, persist_vocab, Vocabulary};

use thiserror::Error;

pub const PAD_ID: u32 = 0;
pub const CLS_ID: u32 = 1;
pub const SEP_ID: u32 = 2;
pub const UNK_ID: u32 = 3;
pub const MASK_ID: u32 = 4;

/// The five special tokens, in pinned id order.
pub const SPECIAL_TOKENS: [&str; 5] = ["[PAD]", "[CLS]", "[SEP]", "[UNK]", "[MASK]"];

/// Word-boundary marker prepended to every word during normalization.
pub const WORD_BOUNDARY: char = '\u{2581}';

/// Score assigned to a character no vocabulary piece covers.
pub const DEFAULT_UNK_PENALTY: f64 = -20.0;

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("target vocabulary size {target} is unreachable: alphabet ({alphabet}) + specials exceed it")]
    TargetUnreachable { target: usize, alphabet: usize },
    #[error("corpus yields only {available} candidate pieces, fewer than target size {target}")]
    CorpusTooSmall { target: usize, available: usize },
    #[error("piece set cannot cover corpus text {unit:?}")]
    AlphabetCoverage { unit: String },
    #[error("vocab file line {line}: {message}")]
    VocabFormat { line: usize, message: String },
    #[error("invalid vocabulary: {message}")]
    VocabInvariant { message: String },
    #[error("decode id {id} out of range for vocabulary of size {size}")]
    IdOutOfRange { id: u32, size: usize },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Replaces whitespace runs with word-boundary markers prefixing each word.
pub fn marker_normalize(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    for word in text.split_whitespace() {
        out.push(WORD_BOUNDARY);
        out.push_str(word);
    }
    out
}

/// Tokenizes raw text to ids. No CLS/SEP framing; unknown characters map
/// to the UNK id.
pub fn encode(text: &str, vocab: &Vocabulary) -> Vec<u32> {
    Segmenter::new(vocab).encode(text)
}

/// Reconstructs text from ids: pieces are concatenated, word-boundary
/// markers become single spaces, and special tokens are dropped.
pub fn decode(ids: &[u32], vocab: &Vocabulary) -> Result<String, TokenizerError> {
    let mut out = String::new();
    for &id in ids {
        let piece = vocab
            .piece(id)
            .ok_or(TokenizerError::IdOutOfRange {
                id,
                size: vocab.size(),
            })?;
        if Vocabulary::is_special(id) {
            continue;
        }
        out.push_str(piece);
    }
    let spaced: String = out
        .chars()
        .map(|c| if c == WORD_BOUNDARY { ' ' } else { c })
        .collect();
    Ok(spaced.trim().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_vocab() -> Vocabulary {
        Vocabulary::from_pieces(vec![
            ("\u{2581}ab".to_string(), -1.0f64.ln() - 1.0),
            ("a".to_string(), -2.0),
            ("b".to_string(), -2.2),
        ])
        .unwrap()
    }

    #[test]
    fn encode_empty_and_single_piece() {
        let v = toy_vocab();
        assert!(encode("", &v).is_empty());
        let id = v.id_of("\u{2581}ab").unwrap();
        assert_eq!(encode("ab", &v), vec![id]);
    }

    #[test]
    fn encode_matches_viterbi_oracle() {
        let v = toy_vocab();
        let id = v.id_of("\u{2581}ab").unwrap();
        // brute force over the normalized text "▁ab▁ab": the only
        // segmentation not using UNK for the markers is [▁ab, ▁ab]
        assert_eq!(encode("ab ab", &v), vec![id, id]);
    }

    #[test]
    fn decode_inverts_encode_and_strips_specials() {
        let v = toy_vocab();
        assert_eq!(decode(&[], &v).unwrap(), "");
        let ids = encode("ab ab", &v);
        assert_eq!(decode(&ids, &v).unwrap(), "ab ab");
        let mut framed = vec![CLS_ID];
        framed.extend(&ids);
        framed.push(SEP_ID);
        framed.push(PAD_ID);
        assert_eq!(decode(&framed, &v).unwrap(), "ab ab");
    }

    #[test]
    fn decode_rejects_out_of_range_ids() {
        let v = toy_vocab();
        let bad = v.size() as u32;
        assert!(matches!(
            decode(&[bad], &v),
            Err(TokenizerError::IdOutOfRange { .. })
        ));
    }

    #[test]
    fn marker_normalization() {
        assert_eq!(marker_normalize("bom dia"), "\u{2581}bom\u{2581}dia");
        assert_eq!(marker_normalize("  a  b "), "\u{2581}a\u{2581}b");
        assert_eq!(marker_normalize(""), "");
    }
}
