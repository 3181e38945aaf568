//! Word and character vocabularies, pre-trained vector loading, and the
//! embedding tables.

use std::collections::HashMap;
use std::io::BufRead;

use rand::Rng;

use crate::corpus::Sentence;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

/// Bijective token↔id map with reserved PAD (0) and UNK (1) entries.
/// Ids follow first-occurrence insertion order, so construction is
/// deterministic for a given corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::new()
    }
}

impl Vocabulary {
    pub fn new() -> Self {
        let mut v = Self {
            tokens: Vec::new(),
            index: HashMap::new(),
        };
        v.insert(PAD_TOKEN);
        v.insert(UNK_TOKEN);
        v
    }

    /// Rebuilds a vocabulary from its token list (checkpoint loading).
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 || tokens[PAD_ID] != PAD_TOKEN || tokens[UNK_ID] != UNK_TOKEN {
            return Err(Error::Validation(
                "vocabulary must start with the PAD and UNK reserved tokens".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (id, token) in tokens.iter().enumerate() {
            if index.insert(token.clone(), id).is_some() {
                return Err(Error::Validation(format!("duplicate token {token:?}")));
            }
        }
        Ok(Self { tokens, index })
    }

    pub fn insert(&mut self, token: &str) -> usize {
        if let Some(&id) = self.index.get(token) {
            return id;
        }
        let id = self.tokens.len();
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), id);
        id
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Exact match first, then a lowercase fallback, then UNK.
    pub fn id_or_unk(&self, token: &str) -> usize {
        if let Some(id) = self.id_of(token) {
            return id;
        }
        let lower = token.to_lowercase();
        if lower != token {
            if let Some(id) = self.id_of(&lower) {
                return id;
            }
        }
        UNK_ID
    }

    pub fn token_of(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Builds the word vocabulary from tokens with corpus frequency
/// ≥ `min_count`, in first-occurrence order.
pub fn build_word_vocab(sentences: &[Sentence], min_count: usize) -> Result<Vocabulary> {
    if min_count < 1 {
        return Err(Error::Validation("min_count must be ≥ 1".into()));
    }
    if sentences.is_empty() {
        return Err(Error::Validation(
            "cannot build a vocabulary from an empty corpus".into(),
        ));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for sentence in sentences {
        for token in sentence.tokens() {
            let entry = counts.entry(token.as_str()).or_insert(0);
            if *entry == 0 {
                order.push(token.as_str());
            }
            *entry += 1;
        }
    }
    let mut vocab = Vocabulary::new();
    for token in order {
        if counts[token] >= min_count {
            vocab.insert(token);
        }
    }
    Ok(vocab)
}

/// Character vocabulary over every character of every token.
pub fn build_char_vocab(sentences: &[Sentence]) -> Result<Vocabulary> {
    if sentences.is_empty() {
        return Err(Error::Validation(
            "cannot build a vocabulary from an empty corpus".into(),
        ));
    }
    let mut vocab = Vocabulary::new();
    let mut buf = [0u8; 4];
    for sentence in sentences {
        for token in sentence.tokens() {
            for ch in token.chars() {
                vocab.insert(ch.encode_utf8(&mut buf));
            }
        }
    }
    Ok(vocab)
}

/// A dense |V|×d vector table. The PAD row is all-zero and stays out of
/// gradient updates.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub table: Tensor,
    pub dim: usize,
    pub trainable: bool,
}

impl EmbeddingMatrix {
    /// Random uniform(−init_scale, init_scale) initialization for all rows
    /// except PAD, which is zero.
    pub fn random<R: Rng>(
        vocab_size: usize,
        dim: usize,
        init_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if dim == 0 || vocab_size < 2 {
            return Err(Error::Config(format!(
                "embedding table {vocab_size}×{dim}"
            )));
        }
        let mut table = crate::optim::uniform(&[vocab_size, dim], init_scale, rng);
        table.data_mut()[..dim].fill(0.0); // PAD row
        Ok(Self {
            table,
            dim,
            trainable: true,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.table.shape()[0]
    }

    pub fn row(&self, id: usize) -> &[f64] {
        self.table.row(id)
    }
}

/// Rows copied from a pre-trained vector file plus the number of
/// vocabulary tokens it covered.
#[derive(Debug)]
pub struct PretrainedLoad {
    pub matrix: EmbeddingMatrix,
    pub coverage: usize,
}

/// Loads GloVe-layout text vectors (`token v1 … vd` per line): covered
/// vocabulary rows copy the file vector (exact token match first, then
/// lowercase), everything else keeps its seeded uniform(−init_scale,
/// init_scale) draw, PAD stays zero.
pub fn load_pretrained<R: BufRead, G: Rng>(
    reader: R,
    dim: usize,
    vocab: &Vocabulary,
    init_scale: f64,
    rng: &mut G,
) -> Result<PretrainedLoad> {
    let mut matrix = EmbeddingMatrix::random(vocab.len(), dim, init_scale, rng)?;

    let mut file_vectors: HashMap<String, Vec<f64>> = HashMap::new();
    let mut file_dim: Option<usize> = None;
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().ok_or_else(|| Error::Parse {
            line: lineno,
            message: "empty vector line".into(),
        })?;
        let values: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad number {f:?}"),
                })
            })
            .collect::<Result<_>>()?;
        match file_dim {
            None => {
                if values.len() != dim {
                    return Err(Error::Config(format!(
                        "vector file has dimension {}, expected {dim}",
                        values.len()
                    )));
                }
                file_dim = Some(values.len());
            }
            Some(d) if values.len() != d => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected {d} values, got {}", values.len()),
                });
            }
            _ => {}
        }
        file_vectors.insert(token.to_string(), values);
    }

    let mut coverage = 0;
    for id in 2..vocab.len() {
        let token = vocab.token_of(id).expect("id < len");
        let hit = file_vectors
            .get(token)
            .or_else(|| file_vectors.get(&token.to_lowercase()));
        if let Some(values) = hit {
            let row = &mut matrix.table.data_mut()[id * dim..(id + 1) * dim];
            row.copy_from_slice(values);
            coverage += 1;
        }
    }
    Ok(PretrainedLoad { matrix, coverage })
}

/// A sentence converted to ids: per-token word id, per-token character id
/// list, per-token tag id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedSentence {
    pub word_ids: Vec<usize>,
    pub char_ids: Vec<Vec<usize>>,
    pub tag_ids: Vec<usize>,
}

impl EncodedSentence {
    pub fn len(&self) -> usize {
        self.word_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_ids.is_empty()
    }
}

/// Word and character ids for a bare token sequence (prediction input).
pub fn encode_tokens(
    tokens: &[String],
    words: &Vocabulary,
    chars: &Vocabulary,
) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut buf = [0u8; 4];
    let word_ids = tokens.iter().map(|t| words.id_or_unk(t)).collect();
    let char_ids = tokens
        .iter()
        .map(|t| {
            t.chars()
                .map(|c| chars.id_of(c.encode_utf8(&mut buf)).unwrap_or(UNK_ID))
                .collect()
        })
        .collect();
    (word_ids, char_ids)
}

/// Encodes a sentence against both vocabularies. Unknown words fall back
/// to UNK (after the lowercase retry); unknown characters map to UNK.
pub fn encode(sentence: &Sentence, words: &Vocabulary, chars: &Vocabulary) -> EncodedSentence {
    let (word_ids, char_ids) = encode_tokens(sentence.tokens(), words, chars);
    let tag_ids = sentence.tags().iter().map(|t| t.index()).collect();
    EncodedSentence {
        word_ids,
        char_ids,
        tag_ids,
    }
}

/// Plain (non-recorded) embedding lookup: row i of the output is table row
/// `ids[i]`.
pub fn lookup(matrix: &EmbeddingMatrix, ids: &[usize]) -> Result<Tensor> {
    let mut data = Vec::with_capacity(ids.len() * matrix.dim);
    for &id in ids {
        if id >= matrix.vocab_size() {
            return Err(Error::Index(format!(
                "embedding id {id} in table of {}",
                matrix.vocab_size()
            )));
        }
        data.extend_from_slice(matrix.row(id));
    }
    Tensor::matrix(ids.len(), matrix.dim, data)
}
