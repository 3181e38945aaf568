//! A self-contained Bi-LSTM-CRF sequence labeler for detecting dataset
//! mentions in tokenized scientific text.
//!
//! The pipeline: a character-level Bi-LSTM encodes each token from its
//! characters, the result is concatenated with a (optionally pre-trained)
//! word embedding, a stacked Bi-LSTM encodes the sentence, a dense layer
//! projects to per-token label scores, and a linear-chain CRF scores and
//! decodes whole tag sequences. Gradients come from a small reverse-mode
//! tape; training is Adam with L2, inverted dropout, and early stopping on
//! validation span F1.
//!
//! Corpora use the CoNLL layout (`token<TAB>tag` lines, blank-line sentence
//! separators) over the tags `O`, `B-DS`, `I-DS`. Evaluation is span-exact
//! micro-averaged precision/recall/F1.

pub mod checkpoint;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod gradcheck;
pub mod model;
pub mod optim;
pub mod recurrent;
pub mod tape;
pub mod tensor;
pub mod vocab;

pub use corpus::{
    parse_conll, split_corpus, spans_to_tags, tags_to_spans, write_conll, CorpusSplit,
    MentionSpan, Sentence, Tag,
};
pub use error::{Error, Result};
pub use eval::{span_prf, token_accuracy, Metrics};
pub use model::{build_model, Model, ModelConfig, TrainHistory};
pub use tensor::Tensor;
