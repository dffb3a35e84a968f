//! Desk-scale toolkit for adapting a pretrained English transformer encoder
//! to a new language.
//!
//! The pipeline runs in seven stages, each exposed both as a library module
//! and as a CLI subcommand:
//!
//! 1. [`corpus`] — clean raw text (HTML, escape sequences, mojibake, emoji)
//!    into one-document-per-line files.
//! 2. [`tokenizer`] — train a unigram language-model subword vocabulary
//!    (EM + likelihood pruning) with Viterbi encoding.
//! 3. [`packing`] — tokenize a corpus into fixed 512-token examples framed
//!    `[CLS] … [SEP]`.
//! 4. [`model`] — a small transformer encoder with relative-position-bias
//!    attention, checkpoint serialization, and donor-weight embedding
//!    surgery.
//! 5. [`rtd`] — generator/discriminator replaced-token-detection
//!    pretraining with gradient-disentangled embedding sharing.
//! 6. [`finetune`] — task heads, training with early stopping, and metrics
//!    (entity F1, accuracy, Pearson) for NER, classification, and
//!    sentence-pair regression.
//!
//! Everything is deterministic given a seed and runs on CPU; numerics are
//! f32 with an f64 mode used by the gradient test suites.

pub mod corpus;
pub mod finetune;
pub mod model;
pub mod optim;
pub mod packing;
pub mod rtd;
pub mod tensor;
pub mod tokenizer;

pub use tensor::{Real, Tensor, TensorMap};
