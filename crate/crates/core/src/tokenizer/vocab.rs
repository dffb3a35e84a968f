//! The vocabulary type and its TSV persistence format.

use super::{TokenizerError, DEFAULT_UNK_PENALTY, SPECIAL_TOKENS};
use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

/// An ordered piece table: five pinned specials followed by learned pieces
/// with log probabilities.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    entries: Vec<(String, f64)>,
    chars: Vec<Vec<char>>,
    index: HashMap<String, u32>,
    max_piece_chars: usize,
    pub unk_penalty: f64,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.entries == other.entries
    }
}

impl Vocabulary {
    /// Builds a vocabulary from learned `(piece, log_prob)` pairs; the five
    /// specials are prepended at ids 0–4.
    pub fn from_pieces(pieces: Vec<(String, f64)>) -> Result<Self, TokenizerError> {
        let mut entries: Vec<(String, f64)> = SPECIAL_TOKENS
            .iter()
            .map(|s| (s.to_string(), 0.0))
            .collect();
        entries.extend(pieces);
        Self::from_entries(entries)
    }

    fn from_entries(entries: Vec<(String, f64)>) -> Result<Self, TokenizerError> {
        let invariant = |message: String| TokenizerError::VocabInvariant { message };
        let mut index = HashMap::with_capacity(entries.len());
        let mut chars = Vec::with_capacity(entries.len());
        let mut max_piece_chars = 1;
        for (i, (piece, log_prob)) in entries.iter().enumerate() {
            if piece.is_empty() {
                return Err(invariant(format!("empty piece at id {i}")));
            }
            if i >= SPECIAL_TOKENS.len() {
                if piece.chars().any(|c| c.is_whitespace() || c.is_control()) {
                    return Err(invariant(format!("piece {piece:?} contains whitespace")));
                }
                if *log_prob > 0.0 || log_prob.is_nan() {
                    return Err(invariant(format!(
                        "piece {piece:?} has log probability {log_prob} > 0"
                    )));
                }
            }
            if index.insert(piece.clone(), i as u32).is_some() {
                return Err(invariant(format!("duplicate piece {piece:?}")));
            }
            let cs: Vec<char> = piece.chars().collect();
            max_piece_chars = max_piece_chars.max(cs.len());
            chars.push(cs);
        }
        Ok(Vocabulary {
            entries,
            chars,
            index,
            max_piece_chars,
            unk_penalty: DEFAULT_UNK_PENALTY,
        })
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_special(id: u32) -> bool {
        (id as usize) < SPECIAL_TOKENS.len()
    }

    pub fn piece(&self, id: u32) -> Option<&str> {
        self.entries.get(id as usize).map(|(p, _)| p.as_str())
    }

    pub fn log_prob(&self, id: u32) -> f64 {
        self.entries[id as usize].1
    }

    pub fn id_of(&self, piece: &str) -> Option<u32> {
        self.index.get(piece).copied()
    }

    /// Learned (non-special) entries in id order.
    pub fn learned(&self) -> &[(String, f64)] {
        &self.entries[SPECIAL_TOKENS.len()..]
    }

    pub(crate) fn piece_chars(&self, id: u32) -> &[char] {
        &self.chars[id as usize]
    }

    pub(crate) fn all_piece_chars(&self) -> &[Vec<char>] {
        &self.chars
    }

    pub(crate) fn max_piece_chars(&self) -> usize {
        self.max_piece_chars
    }

    /// Replaces learned log probabilities in place, keeping piece order.
    pub(crate) fn with_log_probs(&self, log_probs: &[f64]) -> Vocabulary {
        assert_eq!(log_probs.len(), self.learned().len());
        let mut out = self.clone();
        for (entry, &lp) in out.entries[SPECIAL_TOKENS.len()..]
            .iter_mut()
            .zip(log_probs.iter())
        {
            entry.1 = lp;
        }
        out
    }

    /// Keeps only the learned pieces whose ids satisfy `keep`, then
    /// renormalizes so learned probabilities sum to one.
    pub(crate) fn retain_learned(&self, keep: impl Fn(u32) -> bool) -> Vocabulary {
        let kept: Vec<(String, f64)> = self
            .entries
            .iter()
            .enumerate()
            .skip(SPECIAL_TOKENS.len())
            .filter(|(i, _)| keep(*i as u32))
            .map(|(_, e)| e.clone())
            .collect();
        let log_z = log_sum_exp(kept.iter().map(|(_, lp)| *lp));
        let renormed = kept
            .into_iter()
            .map(|(p, lp)| (p, lp - log_z))
            .collect();
        Vocabulary::from_pieces(renormed).expect("retained pieces stay valid")
    }

    /// |Σ exp(log_prob) − 1| over learned pieces.
    pub fn normalization_error(&self) -> f64 {
        let sum: f64 = self.learned().iter().map(|(_, lp)| lp.exp()).sum();
        (sum - 1.0).abs()
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let vals: Vec<f64> = values.collect();
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Writes the vocabulary as TSV: one `piece<TAB>log_prob` line per entry,
/// specials first, log probabilities at 17 significant digits.
pub fn persist_vocab(vocab: &Vocabulary, path: &Path) -> Result<(), TokenizerError> {
    let io_err = |source| TokenizerError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = std::io::BufWriter::new(file);
    for (piece, log_prob) in &vocab.entries {
        writeln!(w, "{piece}\t{log_prob:.16e}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a vocabulary written by [`persist_vocab`], validating the format
/// line by line.
pub fn load_vocab(path: &Path) -> Result<Vocabulary, TokenizerError> {
    let text = std::fs::read_to_string(path).map_err(|source| TokenizerError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |line: usize, message: String| TokenizerError::VocabFormat { line, message };
    let mut entries = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let (piece, lp_text) = line
            .split_once('\t')
            .ok_or_else(|| bad(lineno, "expected piece<TAB>log_prob".into()))?;
        let log_prob: f64 = lp_text
            .parse()
            .map_err(|e| bad(lineno, format!("bad log_prob {lp_text:?}: {e}")))?;
        if piece.is_empty() {
            return Err(bad(lineno, "empty piece".into()));
        }
        if let Some(spec) = SPECIAL_TOKENS.get(i) {
            if piece != *spec {
                return Err(bad(lineno, format!("expected special token {spec}")));
            }
        } else {
            if piece.chars().any(|c| c.is_whitespace() || c.is_control()) {
                return Err(bad(lineno, format!("piece {piece:?} contains whitespace")));
            }
            if log_prob > 0.0 || log_prob.is_nan() {
                return Err(bad(lineno, format!("log_prob {log_prob} > 0")));
            }
        }
        if let Some(first) = seen.insert(piece.to_string(), lineno) {
            return Err(bad(
                lineno,
                format!("duplicate piece {piece:?} (first on line {first})"),
            ));
        }
        entries.push((piece.to_string(), log_prob));
    }
    if entries.len() < SPECIAL_TOKENS.len() {
        return Err(bad(
            entries.len() + 1,
            format!("expected special token {}", SPECIAL_TOKENS[entries.len()]),
        ));
    }
    Vocabulary::from_entries(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_pieces_pins_specials() {
        let v = Vocabulary::from_pieces(vec![("a".into(), -1.0)]).unwrap();
        assert_eq!(v.size(), 6);
        assert_eq!(v.piece(0), Some("[PAD]"));
        assert_eq!(v.piece(1), Some("[CLS]"));
        assert_eq!(v.piece(2), Some("[SEP]"));
        assert_eq!(v.piece(3), Some("[UNK]"));
        assert_eq!(v.piece(4), Some("[MASK]"));
        assert_eq!(v.id_of("a"), Some(5));
    }

    #[test]
    fn rejects_duplicates_and_positive_probs() {
        assert!(Vocabulary::from_pieces(vec![("a".into(), -1.0), ("a".into(), -2.0)]).is_err());
        assert!(Vocabulary::from_pieces(vec![("a".into(), 0.5)]).is_err());
        assert!(Vocabulary::from_pieces(vec![("a b".into(), -0.5)]).is_err());
    }

    #[test]
    fn persist_load_round_trip() {
        let v = Vocabulary::from_pieces(vec![
            ("\u{2581}ol\u{e1}".into(), -0.3234567890123456),
            ("a".into(), -1.75),
        ])
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.tsv");
        persist_vocab(&v, &path).unwrap();
        let loaded = load_vocab(&path).unwrap();
        assert_eq!(v, loaded);
    }

    #[test]
    fn load_names_offending_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.tsv");
        // [CLS] missing on line 2
        std::fs::write(&path, "[PAD]\t0\n[SEP]\t0\n").unwrap();
        match load_vocab(&path) {
            Err(TokenizerError::VocabFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }

        // duplicate piece on line 7
        std::fs::write(
            &path,
            "[PAD]\t0\n[CLS]\t0\n[SEP]\t0\n[UNK]\t0\n[MASK]\t0\na\t-1.0\na\t-2.0\n",
        )
        .unwrap();
        match load_vocab(&path) {
            Err(TokenizerError::VocabFormat { line, .. }) => assert_eq!(line, 7),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn loads_hand_written_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.tsv");
        std::fs::write(
            &path,
            "[PAD]\t0\n[CLS]\t0\n[SEP]\t0\n[UNK]\t0\n[MASK]\t0\n\u{2581}oi\t-0.5\nx\t-1.5\n",
        )
        .unwrap();
        let v = load_vocab(&path).unwrap();
        assert_eq!(v.size(), 7);
        assert_eq!(v.id_of("\u{2581}oi"), Some(5));
        assert_eq!(v.log_prob(6), -1.5);
    }
}
