//! Segmentation lattice: Viterbi decoding and forward–backward marginals
//! over all segmentations of a marker-normalized string.

use super::vocab::Vocabulary;
use super::{SPECIAL_TOKENS, UNK_ID};
use std::collections::HashMap;

/// One decoded segmentation: piece strings (unknown characters appear as
/// `[UNK]`) and the summed log-probability score.
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    pub pieces: Vec<String>,
    pub score: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Step {
    Piece { id: u32, len: usize },
    Unknown,
}

/// Piece index over a vocabulary, reusable across many segmentation calls.
pub struct Segmenter<'v> {
    vocab: &'v Vocabulary,
    by_chars: HashMap<&'v [char], u32>,
    max_len: usize,
}

impl<'v> Segmenter<'v> {
    pub fn new(vocab: &'v Vocabulary) -> Self {
        let mut by_chars = HashMap::new();
        for (id, cs) in vocab.all_piece_chars().iter().enumerate() {
            if id >= SPECIAL_TOKENS.len() {
                by_chars.insert(cs.as_slice(), id as u32);
            }
        }
        Segmenter {
            vocab,
            by_chars,
            max_len: vocab.max_piece_chars(),
        }
    }

    /// Highest-score segmentation of `chars`. Ties break on fewer pieces,
    /// then the lexicographically earliest piece at the tie position.
    /// `disabled` excludes one piece id from the lattice.
    pub(crate) fn viterbi_steps(
        &self,
        chars: &[char],
        disabled: Option<u32>,
    ) -> (f64, Vec<Step>) {
        let n = chars.len();
        let mut score = vec![0.0f64; n + 1];
        let mut count = vec![0u32; n + 1];
        let mut step = vec![Step::Unknown; n + 1];
        for i in (0..n).rev() {
            let mut best: Option<(f64, u32, &[char], Step)> = None;
            for len in 1..=self.max_len.min(n - i) {
                let Some(&id) = self.by_chars.get(&chars[i..i + len]) else {
                    continue;
                };
                if disabled == Some(id) {
                    continue;
                }
                let s = self.vocab.log_prob(id) + score[i + len];
                let c = count[i + len] + 1;
                let piece = self.vocab.piece_chars(id);
                let take = match &best {
                    None => true,
                    Some((bs, bc, bp, _)) => {
                        s > *bs || (s == *bs && (c < *bc || (c == *bc && piece < *bp)))
                    }
                };
                if take {
                    best = Some((s, c, piece, Step::Piece { id, len }));
                }
            }
            match best {
                Some((s, c, _, st)) => {
                    score[i] = s;
                    count[i] = c;
                    step[i] = st;
                }
                None => {
                    // no piece starts here: a single unknown character
                    score[i] = self.vocab.unk_penalty + score[i + 1];
                    count[i] = count[i + 1] + 1;
                    step[i] = Step::Unknown;
                }
            }
        }
        let mut steps = Vec::new();
        let mut i = 0;
        while i < n {
            steps.push(step[i]);
            i += match step[i] {
                Step::Piece { len, .. } => len,
                Step::Unknown => 1,
            };
        }
        (score[0], steps)
    }

    /// Tokenizes raw text (marker normalization applied here).
    pub fn encode(&self, text: &str) -> Vec<u32> {
        let norm = super::marker_normalize(text);
        let chars: Vec<char> = norm.chars().collect();
        if chars.is_empty() {
            return Vec::new();
        }
        let (_, steps) = self.viterbi_steps(&chars, None);
        steps
            .iter()
            .map(|s| match s {
                Step::Piece { id, .. } => *id,
                Step::Unknown => UNK_ID,
            })
            .collect()
    }

    /// Log of the summed probability of all segmentations of `chars`,
    /// accumulating `weight`-scaled expected piece counts when requested.
    /// Returns `None` when the piece set cannot cover the string.
    pub(crate) fn marginal(
        &self,
        chars: &[char],
        weight: f64,
        counts: Option<&mut [f64]>,
    ) -> Option<f64> {
        let n = chars.len();
        let mut alpha = vec![f64::NEG_INFINITY; n + 1];
        alpha[0] = 0.0;
        for i in 0..n {
            if alpha[i] == f64::NEG_INFINITY {
                continue;
            }
            self.for_edges(chars, i, |id, len, lp| {
                alpha[i + len] = log_add(alpha[i + len], alpha[i] + lp);
                let _ = id;
            });
        }
        let log_z = alpha[n];
        if log_z == f64::NEG_INFINITY {
            return None;
        }
        if let Some(counts) = counts {
            let mut beta = vec![f64::NEG_INFINITY; n + 1];
            beta[n] = 0.0;
            for i in (0..n).rev() {
                self.for_edges(chars, i, |_, len, lp| {
                    beta[i] = log_add(beta[i], lp + beta[i + len]);
                });
            }
            for i in 0..n {
                if alpha[i] == f64::NEG_INFINITY {
                    continue;
                }
                self.for_edges(chars, i, |id, len, lp| {
                    let posterior = (alpha[i] + lp + beta[i + len] - log_z).exp();
                    counts[id as usize] += weight * posterior;
                });
            }
        }
        Some(log_z)
    }

    fn for_edges(&self, chars: &[char], i: usize, mut f: impl FnMut(u32, usize, f64)) {
        let n = chars.len();
        for len in 1..=self.max_len.min(n - i) {
            if let Some(&id) = self.by_chars.get(&chars[i..i + len]) {
                f(id, len, self.vocab.log_prob(id));
            }
        }
    }

    pub(crate) fn steps_to_segmentation(&self, score: f64, steps: &[Step]) -> Segmentation {
        let pieces = steps
            .iter()
            .map(|s| match s {
                Step::Piece { id, .. } => self.vocab.piece(*id).unwrap().to_string(),
                Step::Unknown => SPECIAL_TOKENS[UNK_ID as usize].to_string(),
            })
            .collect();
        Segmentation { pieces, score }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Maximum-score segmentation of marker-normalized `text`.
pub fn viterbi_segment(text: &str, vocab: &Vocabulary) -> Segmentation {
    let seg = Segmenter::new(vocab);
    let chars: Vec<char> = text.chars().collect();
    let (score, steps) = seg.viterbi_steps(&chars, None);
    seg.steps_to_segmentation(score, &steps)
}
