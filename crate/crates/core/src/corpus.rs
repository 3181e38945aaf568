//! CoNLL-style corpus I/O for the single-class DS tag set, conversion
//! between tag sequences and mention spans, and the seeded corpus split.
//!
//! File format: UTF-8, one `token<TAB>tag` pair per line, a blank line
//! between sentences, exactly one trailing newline on write.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// IOB tag over the single DS entity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tag {
    Outside,
    Begin,
    Inside,
}

pub const NUM_TAGS: usize = 3;

impl Tag {
    pub fn index(self) -> usize {
        match self {
            Tag::Outside => 0,
            Tag::Begin => 1,
            Tag::Inside => 2,
        }
    }

    pub fn from_index(idx: usize) -> Result<Self> {
        match idx {
            0 => Ok(Tag::Outside),
            1 => Ok(Tag::Begin),
            2 => Ok(Tag::Inside),
            other => Err(Error::Index(format!("tag index {other}"))),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "O" => Some(Tag::Outside),
            "B-DS" => Some(Tag::Begin),
            "I-DS" => Some(Tag::Inside),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Outside => "O",
            Tag::Begin => "B-DS",
            Tag::Inside => "I-DS",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A token sequence with one tag per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<String>,
    tags: Vec<Tag>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>, tags: Vec<Tag>) -> Result<Self> {
        if tokens.is_empty() || tokens.len() != tags.len() {
            return Err(Error::Validation(format!(
                "sentence with {} tokens and {} tags",
                tokens.len(),
                tags.len()
            )));
        }
        for token in &tokens {
            if token.is_empty() || token.contains('\t') || token.contains('\n') {
                return Err(Error::Validation(format!("invalid token {token:?}")));
            }
        }
        Ok(Self { tokens, tags })
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn spans(&self) -> Vec<MentionSpan> {
        tags_to_spans(&self.tags)
    }
}

/// Half-open token interval `[start, end)` identifying one mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MentionSpan {
    pub start: usize,
    pub end: usize,
}

impl MentionSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    /// Space-joined surface form over the sentence's tokens.
    pub fn surface(&self, tokens: &[String]) -> String {
        tokens[self.start..self.end].join(" ")
    }
}

/// Counts of deviations tolerated while parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseWarnings {
    /// I-DS tags rewritten to B-DS because no mention was open.
    pub tag_repairs: usize,
    /// -DOCSTART- document boundary lines skipped.
    pub skipped_lines: usize,
}

impl ParseWarnings {
    pub fn total(&self) -> usize {
        self.tag_repairs + self.skipped_lines
    }
}

/// Rewrites any I-DS whose predecessor is neither B-DS nor I-DS into B-DS,
/// returning the number of rewrites. Idempotent.
pub fn repair_iob(tags: &mut [Tag]) -> usize {
    let mut repairs = 0;
    for i in 0..tags.len() {
        if tags[i] == Tag::Inside && (i == 0 || tags[i - 1] == Tag::Outside) {
            tags[i] = Tag::Begin;
            repairs += 1;
        }
    }
    repairs
}

/// Parses CoNLL text into sentences, repairing IOB violations.
pub fn parse_conll(text: &str) -> Result<(Vec<Sentence>, ParseWarnings)> {
    fn flush(
        tokens: &mut Vec<String>,
        tags: &mut Vec<Tag>,
        sentences: &mut Vec<Sentence>,
        warnings: &mut ParseWarnings,
    ) -> Result<()> {
        if tokens.is_empty() {
            return Ok(());
        }
        warnings.tag_repairs += repair_iob(tags);
        sentences.push(Sentence::new(
            std::mem::take(tokens),
            std::mem::take(tags),
        )?);
        Ok(())
    }

    let mut sentences = Vec::new();
    let mut warnings = ParseWarnings::default();
    let mut tokens: Vec<String> = Vec::new();
    let mut tags: Vec<Tag> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        if line.is_empty() {
            flush(&mut tokens, &mut tags, &mut sentences, &mut warnings)?;
            continue;
        }
        if line.starts_with("-DOCSTART-") {
            warnings.skipped_lines += 1;
            continue;
        }
        let mut fields = line.split('\t');
        let (token, tag_str) = match (fields.next(), fields.next(), fields.next()) {
            (Some(token), Some(tag), None) if !token.is_empty() && !tag.is_empty() => {
                (token, tag)
            }
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("expected `token<TAB>tag`, got {line:?}"),
                })
            }
        };
        let tag = Tag::parse(tag_str).ok_or_else(|| Error::Parse {
            line: lineno,
            message: format!("unknown tag {tag_str:?}"),
        })?;
        tokens.push(token.to_string());
        tags.push(tag);
    }
    flush(&mut tokens, &mut tags, &mut sentences, &mut warnings)?;
    Ok((sentences, warnings))
}

/// Renders sentences back to CoNLL text. Inverse of [`parse_conll`] on
/// valid corpora; produces `""` for an empty list and otherwise ends with
/// exactly one newline.
pub fn write_conll(sentences: &[Sentence]) -> String {
    let mut out = String::new();
    for (i, sentence) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (token, tag) in sentence.tokens().iter().zip(sentence.tags()) {
            out.push_str(token);
            out.push('\t');
            out.push_str(tag.as_str());
            out.push('\n');
        }
    }
    out
}

/// One span per maximal `B-DS (I-DS)*` run; sorted and disjoint.
/// An orphan I-DS (possible only on unrepaired input) opens a span,
/// mirroring the repair rule.
pub fn tags_to_spans(tags: &[Tag]) -> Vec<MentionSpan> {
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (i, tag) in tags.iter().enumerate() {
        match tag {
            Tag::Begin => {
                if let Some(start) = open.take() {
                    spans.push(MentionSpan::new(start, i));
                }
                open = Some(i);
            }
            Tag::Inside => {
                if open.is_none() {
                    open = Some(i);
                }
            }
            Tag::Outside => {
                if let Some(start) = open.take() {
                    spans.push(MentionSpan::new(start, i));
                }
            }
        }
    }
    if let Some(start) = open {
        spans.push(MentionSpan::new(start, tags.len()));
    }
    spans
}

/// Inverse of [`tags_to_spans`]: materializes spans as a tag sequence.
pub fn spans_to_tags(spans: &[MentionSpan], length: usize) -> Result<Vec<Tag>> {
    let mut sorted: Vec<MentionSpan> = spans.to_vec();
    sorted.sort();
    let mut previous_end = 0;
    for span in &sorted {
        if span.start >= span.end || span.end > length {
            return Err(Error::Validation(format!(
                "span ({}, {}) out of range for length {length}",
                span.start, span.end
            )));
        }
        if span.start < previous_end {
            return Err(Error::Validation(format!(
                "span ({}, {}) overlaps an earlier span",
                span.start, span.end
            )));
        }
        previous_end = span.end;
    }
    let mut tags = vec![Tag::Outside; length];
    for span in &sorted {
        tags[span.start] = Tag::Begin;
        for slot in &mut tags[span.start + 1..span.end] {
            *slot = Tag::Inside;
        }
    }
    Ok(tags)
}

/// Disjoint train/validation/test partition with the shuffle seed that
/// produced it.
#[derive(Debug, Clone)]
pub struct CorpusSplit {
    pub train: Vec<Sentence>,
    pub validation: Vec<Sentence>,
    pub test: Vec<Sentence>,
    pub seed: u64,
}

/// Seeded random split. Part sizes are `floor(r·N)` with the remainder
/// assigned to train.
pub fn split_corpus(
    sentences: &[Sentence],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<CorpusSplit> {
    let (r1, r2, r3) = ratios;
    if ((r1 + r2 + r3) - 1.0).abs() > 1e-9 || r1 < 0.0 || r2 < 0.0 || r3 < 0.0 {
        return Err(Error::Validation(format!(
            "split ratios ({r1}, {r2}, {r3}) do not sum to 1"
        )));
    }
    if sentences.is_empty() {
        return Err(Error::Validation("cannot split an empty corpus".into()));
    }
    let n = sentences.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    let n_val = (r2 * n as f64).floor() as usize;
    let n_test = (r3 * n as f64).floor() as usize;
    let n_train = n - n_val - n_test;

    let pick = |range: std::ops::Range<usize>| -> Vec<Sentence> {
        order[range].iter().map(|&i| sentences[i].clone()).collect()
    };
    Ok(CorpusSplit {
        train: pick(0..n_train),
        validation: pick(n_train..n_train + n_val),
        test: pick(n_train + n_val..n),
        seed,
    })
}
