//! The assembled network: character encoder → word representation →
//! stacked Bi-LSTM encoder → dense projection → CRF, plus the training
//! loop (Adam, L2, dropout, early stopping with best-weight restore) and
//! prediction.

use std::io::BufRead;
use std::time::Instant;

use log::{info, warn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{tags_to_spans, CorpusSplit, MentionSpan, Sentence, Tag, NUM_TAGS};
use crate::crf::{
    viterbi_decode_constrained, CrfNodes, CrfParams, DecodeConstraints, EmissionMatrix,
};
use crate::error::{Error, Result};
use crate::eval::span_prf;
use crate::optim::{adam_step, xavier_uniform, AdamState, Parameter};
use crate::recurrent::{char_encode_word, stacked_encode, BiLstmLayer, LstmWeights, GATE_FORGET, GATE_NAMES};
use crate::tape::{NodeId, Tape};
use crate::tensor::Tensor;
use crate::vocab::{encode, encode_tokens, EmbeddingMatrix, EncodedSentence, Vocabulary, PAD_ID};

/// Hyperparameters and run controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub word_dim: usize,
    pub char_dim: usize,
    pub char_hidden: usize,
    pub encoder_hidden: usize,
    pub encoder_layers: usize,
    pub dropout: f64,
    pub lr: f64,
    pub l2: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub min_count: usize,
    pub init_scale: f64,
    pub grad_clip: Option<f64>,
}

impl Default for ModelConfig {
    /// The best assignment column: GloVe size 100, dropout 0.5, encoder
    /// hidden 300 with 2 layers, Adam at 0.001, L2 0.01, batch 64,
    /// 50 epochs with patience 10, char LSTM hidden 80.
    fn default() -> Self {
        Self {
            word_dim: 100,
            char_dim: 25,
            char_hidden: 80,
            encoder_hidden: 300,
            encoder_layers: 2,
            dropout: 0.5,
            lr: 0.001,
            l2: 0.01,
            batch_size: 64,
            max_epochs: 50,
            patience: 10,
            seed: 0,
            min_count: 1,
            init_scale: 0.1,
            grad_clip: None,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("word_dim", self.word_dim),
            ("char_dim", self.char_dim),
            ("char_hidden", self.char_hidden),
            ("encoder_hidden", self.encoder_hidden),
            ("encoder_layers", self.encoder_layers),
            ("batch_size", self.batch_size),
            ("max_epochs", self.max_epochs),
            ("min_count", self.min_count),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if self.lr <= 0.0 || self.l2 < 0.0 || self.init_scale <= 0.0 {
            return Err(Error::Config("lr, l2, init_scale out of range".into()));
        }
        if self.patience > self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        Ok(())
    }

    /// Width of the per-token vector fed to the encoder.
    pub fn token_width(&self) -> usize {
        self.word_dim + 2 * self.char_hidden
    }
}

#[derive(Debug, Clone, Copy)]
struct LstmIdx {
    wx: [usize; 4],
    wh: [usize; 4],
    b: [usize; 4],
}

#[derive(Debug, Clone, Copy)]
struct BiIdx {
    forward: LstmIdx,
    backward: LstmIdx,
}

#[derive(Debug, Clone)]
struct Layout {
    word_table: usize,
    char_table: usize,
    char_layer: BiIdx,
    encoder: Vec<BiIdx>,
    dense_w: usize,
    dense_b: usize,
    crf_transitions: usize,
    crf_start: usize,
    crf_end: usize,
}

/// Per-epoch training record. Wall time is informational; it is excluded
/// from the deterministic report.
#[derive(Debug, Clone)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub wall_seconds: f64,
}

/// Loss/metric trajectory plus the epoch whose weights were kept.
#[derive(Debug, Clone)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
    pub best_epoch: usize,
}

impl TrainHistory {
    /// Deterministic tab-separated report: identical runs produce
    /// byte-identical output.
    pub fn report(&self) -> String {
        let mut out = String::from("epoch\ttrain_loss\tval_precision\tval_recall\tval_f1\n");
        for r in &self.epochs {
            out.push_str(&format!(
                "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
                r.epoch, r.train_loss, r.precision, r.recall, r.f1
            ));
        }
        out.push_str(&format!("best_epoch\t{}\n", self.best_epoch));
        out
    }

    pub fn best(&self) -> Option<&EpochRecord> {
        self.epochs.iter().find(|r| r.epoch == self.best_epoch)
    }
}

/// Test-instrumentation hooks for the training loop.
#[derive(Default)]
pub struct TrainHooks<'a> {
    /// Replaces the monitored validation F1 (epoch, measured) → monitored.
    pub metric_override: Option<&'a dyn Fn(usize, f64) -> f64>,
}

/// The Bi-LSTM-CRF tagger: embedding tables, character encoder, stacked
/// sentence encoder, dense projection, and CRF parameters, all owned as a
/// flat named parameter list.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: ModelConfig,
    pub word_vocab: Vocabulary,
    pub char_vocab: Vocabulary,
    params: Vec<Parameter>,
    layout: Layout,
}

fn push_lstm(
    params: &mut Vec<Parameter>,
    prefix: &str,
    in_dim: usize,
    hidden: usize,
    rng: &mut ChaCha8Rng,
) -> LstmIdx {
    let mut wx = [0; 4];
    let mut wh = [0; 4];
    let mut b = [0; 4];
    for (g, gate) in GATE_NAMES.iter().enumerate() {
        wx[g] = params.len();
        params.push(Parameter::new(
            format!("{prefix}.wx_{gate}"),
            xavier_uniform(in_dim, hidden, rng),
        ));
    }
    for (g, gate) in GATE_NAMES.iter().enumerate() {
        wh[g] = params.len();
        params.push(Parameter::new(
            format!("{prefix}.wh_{gate}"),
            xavier_uniform(hidden, hidden, rng),
        ));
    }
    for (g, gate) in GATE_NAMES.iter().enumerate() {
        b[g] = params.len();
        let bias = if g == GATE_FORGET {
            Tensor::new(vec![hidden], vec![1.0; hidden]).expect("consistent shape")
        } else {
            Tensor::zeros(&[hidden])
        };
        params.push(Parameter::new(format!("{prefix}.b_{gate}"), bias));
    }
    LstmIdx { wx, wh, b }
}

fn push_bilstm(
    params: &mut Vec<Parameter>,
    prefix: &str,
    in_dim: usize,
    hidden: usize,
    rng: &mut ChaCha8Rng,
) -> BiIdx {
    BiIdx {
        forward: push_lstm(params, &format!("{prefix}.fwd"), in_dim, hidden, rng),
        backward: push_lstm(params, &format!("{prefix}.bwd"), in_dim, hidden, rng),
    }
}

impl Model {
    /// Builds a freshly initialized model. When a pre-trained vector reader
    /// is given, covered word rows copy the file vectors; everything else is
    /// seeded-random. Returns the coverage count alongside.
    pub fn new(
        config: ModelConfig,
        word_vocab: Vocabulary,
        char_vocab: Vocabulary,
        pretrained: Option<&mut dyn BufRead>,
    ) -> Result<(Self, usize)> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

        let mut params = Vec::new();
        let (word_matrix, coverage) = match pretrained {
            Some(reader) => {
                let load = crate::vocab::load_pretrained(
                    reader,
                    config.word_dim,
                    &word_vocab,
                    config.init_scale,
                    &mut rng,
                )?;
                (load.matrix, load.coverage)
            }
            None => (
                EmbeddingMatrix::random(
                    word_vocab.len(),
                    config.word_dim,
                    config.init_scale,
                    &mut rng,
                )?,
                0,
            ),
        };
        let word_table = params.len();
        params.push(Parameter::new("word_table", word_matrix.table));

        let char_matrix = EmbeddingMatrix::random(
            char_vocab.len(),
            config.char_dim,
            config.init_scale,
            &mut rng,
        )?;
        let char_table = params.len();
        params.push(Parameter::new("char_table", char_matrix.table));

        let char_layer = push_bilstm(
            &mut params,
            "char",
            config.char_dim,
            config.char_hidden,
            &mut rng,
        );

        let mut encoder = Vec::with_capacity(config.encoder_layers);
        let mut in_dim = config.token_width();
        for layer in 0..config.encoder_layers {
            encoder.push(push_bilstm(
                &mut params,
                &format!("enc{layer}"),
                in_dim,
                config.encoder_hidden,
                &mut rng,
            ));
            in_dim = 2 * config.encoder_hidden;
        }

        let dense_w = params.len();
        params.push(Parameter::new(
            "dense.w",
            xavier_uniform(2 * config.encoder_hidden, NUM_TAGS, &mut rng),
        ));
        let dense_b = params.len();
        params.push(Parameter::new("dense.b", Tensor::zeros(&[NUM_TAGS])));

        let crf_transitions = params.len();
        params.push(Parameter::without_decay(
            "crf.transitions",
            Tensor::zeros(&[NUM_TAGS, NUM_TAGS]),
        ));
        let crf_start = params.len();
        params.push(Parameter::new("crf.start", Tensor::zeros(&[NUM_TAGS])));
        let crf_end = params.len();
        params.push(Parameter::new("crf.end", Tensor::zeros(&[NUM_TAGS])));

        let layout = Layout {
            word_table,
            char_table,
            char_layer,
            encoder,
            dense_w,
            dense_b,
            crf_transitions,
            crf_start,
            crf_end,
        };
        Ok((
            Self {
                config,
                word_vocab,
                char_vocab,
                params,
                layout,
            },
            coverage,
        ))
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Parameter] {
        &mut self.params
    }

    /// Snapshot of all parameter values, in layout order.
    pub fn param_values(&self) -> Vec<Tensor> {
        self.params.iter().map(|p| p.value.clone()).collect()
    }

    pub fn set_param_values(&mut self, values: &[Tensor]) -> Result<()> {
        if values.len() != self.params.len() {
            return Err(Error::Config(format!(
                "{} parameter tensors for a model with {}",
                values.len(),
                self.params.len()
            )));
        }
        for (p, v) in self.params.iter_mut().zip(values) {
            if p.value.shape() != v.shape() {
                return Err(Error::Shape(format!(
                    "parameter {}: {:?} vs {:?}",
                    p.name,
                    p.value.shape(),
                    v.shape()
                )));
            }
            p.value = v.clone();
        }
        Ok(())
    }

    /// A decode-ready view of the CRF parameters.
    pub fn crf_params(&self) -> CrfParams {
        CrfParams {
            transitions: self.params[self.layout.crf_transitions].value.clone(),
            start: self.params[self.layout.crf_start].value.clone(),
            end: self.params[self.layout.crf_end].value.clone(),
        }
    }
}

/// One forward construction over a tape: leaves are created lazily, one per
/// touched parameter, so a whole batch shares them and backward accumulates
/// across sentences.
struct GraphBuilder<'m> {
    model: &'m Model,
    tape: Tape,
    leaves: Vec<Option<NodeId>>,
}

impl<'m> GraphBuilder<'m> {
    fn new(model: &'m Model) -> Self {
        Self {
            model,
            tape: Tape::new(),
            leaves: vec![None; model.params.len()],
        }
    }

    fn leaf(&mut self, index: usize) -> NodeId {
        if let Some(id) = self.leaves[index] {
            return id;
        }
        let id = self.tape.leaf(self.model.params[index].value.clone());
        self.leaves[index] = Some(id);
        id
    }

    fn lstm_weights(&mut self, idx: LstmIdx) -> LstmWeights {
        LstmWeights {
            wx: idx.wx.map(|i| self.leaf(i)),
            wh: idx.wh.map(|i| self.leaf(i)),
            b: idx.b.map(|i| self.leaf(i)),
        }
    }

    fn bilstm(&mut self, idx: BiIdx) -> BiLstmLayer {
        BiLstmLayer {
            forward: self.lstm_weights(idx.forward),
            backward: self.lstm_weights(idx.backward),
        }
    }

    fn crf_nodes(&mut self) -> CrfNodes {
        CrfNodes {
            transitions: self.leaf(self.model.layout.crf_transitions),
            start: self.leaf(self.model.layout.crf_start),
            end: self.leaf(self.model.layout.crf_end),
        }
    }

    /// Emission matrix (n×K) for one encoded sentence.
    fn emissions(
        &mut self,
        sentence: &EncodedSentence,
        training: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<NodeId> {
        if sentence.is_empty() {
            return Err(Error::Validation("forward over empty sentence".into()));
        }
        let word_table = self.leaf(self.model.layout.word_table);
        let char_table = self.leaf(self.model.layout.char_table);
        let char_layer = self.bilstm(self.model.layout.char_layer);

        let word_rows = self.tape.gather_rows(word_table, &sentence.word_ids)?;
        let mut tokens = Vec::with_capacity(sentence.len());
        for (t, chars) in sentence.char_ids.iter().enumerate() {
            let word_vec = self.tape.row(word_rows, t)?;
            let char_vec = char_encode_word(&self.tape, chars, char_table, &char_layer)?;
            tokens.push(self.tape.concat(word_vec, char_vec, 0)?);
        }

        let layers: Vec<BiLstmLayer> = self
            .model
            .layout
            .encoder
            .clone()
            .into_iter()
            .map(|idx| self.bilstm(idx))
            .collect();
        let encoded = stacked_encode(
            &self.tape,
            &tokens,
            &layers,
            self.model.config.dropout,
            training,
            rng,
        )?;
        let matrix = self.tape.stack_rows(&encoded)?;
        let dense_w = self.leaf(self.model.layout.dense_w);
        let dense_b = self.leaf(self.model.layout.dense_b);
        self.tape.affine(matrix, dense_w, dense_b)
    }
}

impl Model {
    /// Emission matrices for a batch. Sentences are processed one by one at
    /// their exact lengths, so batches of any composition agree with the
    /// single-sentence result.
    pub fn forward(
        &self,
        batch: &[EncodedSentence],
        training: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<EmissionMatrix>> {
        if batch.is_empty() {
            return Err(Error::Validation("forward over empty batch".into()));
        }
        let mut builder = GraphBuilder::new(self);
        batch
            .iter()
            .map(|s| {
                let id = builder.emissions(s, training, rng)?;
                EmissionMatrix::new(builder.tape.value(id))
            })
            .collect()
    }

    /// Mean per-sentence CRF NLL of a batch; fills parameter gradients.
    fn loss_and_grads(
        &mut self,
        batch: &[EncodedSentence],
        training: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<f64> {
        let mut builder = GraphBuilder::new(self);
        let crf = builder.crf_nodes();
        let mut losses = Vec::with_capacity(batch.len());
        for sentence in batch {
            let emissions = builder.emissions(sentence, training, rng)?;
            losses.push(crate::crf::nll_on_tape(
                &builder.tape,
                emissions,
                &sentence.tag_ids,
                &crf,
            )?);
        }
        let stacked = builder.tape.stack_rows(&losses)?;
        let total = builder.tape.sum(stacked);
        let mean = builder.tape.scale(total, 1.0 / batch.len() as f64);
        let loss = builder.tape.item(mean);
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("non-finite batch loss {loss}")));
        }

        let grads = builder.tape.backward(mean)?;
        let leaves = builder.leaves;
        for (index, leaf) in leaves.iter().enumerate() {
            if let Some(id) = leaf {
                let g = grads.wrt(*id, self.params[index].value.shape());
                self.params[index].grad = g;
            }
        }
        // PAD embedding rows stay out of gradient updates.
        for table in [self.layout.word_table, self.layout.char_table] {
            let dim = self.params[table].value.cols();
            self.params[table].grad.data_mut()[PAD_ID * dim..(PAD_ID + 1) * dim].fill(0.0);
        }
        if let Some(limit) = self.config.grad_clip {
            clip_gradients(&mut self.params, limit);
        }
        Ok(loss)
    }

    /// End-to-end NLL of a single sentence with dropout disabled; used by
    /// the gradient-check harness.
    pub fn sentence_nll(&self, sentence: &EncodedSentence) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut builder = GraphBuilder::new(self);
        let crf = builder.crf_nodes();
        let emissions = builder.emissions(sentence, false, &mut rng)?;
        let loss = crate::crf::nll_on_tape(&builder.tape, emissions, &sentence.tag_ids, &crf)?;
        Ok(builder.tape.item(loss))
    }

    /// As [`sentence_nll`](Self::sentence_nll) but also fills parameter
    /// gradients from the tape.
    pub fn sentence_nll_with_grads(&mut self, sentence: &EncodedSentence) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        self.zero_grads();
        let loss = self.loss_and_grads(std::slice::from_ref(sentence), false, &mut rng)?;
        Ok(loss)
    }

    fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.zero_grad();
        }
    }

    /// Trains with Adam + L2 + dropout and early stopping on validation
    /// span F1, restoring the best epoch's weights before returning.
    pub fn train(&mut self, split: &CorpusSplit) -> Result<TrainHistory> {
        self.train_with(split, TrainHooks::default())
    }

    pub fn train_with(&mut self, split: &CorpusSplit, hooks: TrainHooks) -> Result<TrainHistory> {
        self.config.validate()?;
        if split.train.is_empty() || split.validation.is_empty() {
            return Err(Error::Validation(
                "training requires non-empty train and validation parts".into(),
            ));
        }

        let encoded: Vec<EncodedSentence> = split
            .train
            .iter()
            .map(|s| encode(s, &self.word_vocab, &self.char_vocab))
            .collect();
        let val_tokens: Vec<Vec<String>> = split
            .validation
            .iter()
            .map(|s| s.tokens().to_vec())
            .collect();
        let val_gold: Vec<Vec<MentionSpan>> =
            split.validation.iter().map(|s| s.spans()).collect();

        let mut shuffle_rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        shuffle_rng.set_stream(1);
        let mut dropout_rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        dropout_rng.set_stream(2);

        let mut state = AdamState::new(&self.params);
        let mut history: Vec<EpochRecord> = Vec::new();
        let mut best: Option<(f64, usize, Vec<Tensor>)> = None;
        let mut stale_epochs = 0;

        let restore_best = |model: &mut Model, best: &Option<(f64, usize, Vec<Tensor>)>| {
            if let Some((_, _, weights)) = best {
                model
                    .set_param_values(weights)
                    .expect("snapshot shapes match");
            }
        };

        for epoch in 1..=self.config.max_epochs {
            let started = Instant::now();
            let mut order: Vec<usize> = (0..encoded.len()).collect();
            use rand::seq::SliceRandom;
            order.shuffle(&mut shuffle_rng);

            let mut loss_sum = 0.0;
            for chunk in order.chunks(self.config.batch_size) {
                let batch: Vec<EncodedSentence> =
                    chunk.iter().map(|&i| encoded[i].clone()).collect();
                self.zero_grads();
                let loss = match self.loss_and_grads(&batch, true, &mut dropout_rng) {
                    Ok(loss) => loss,
                    Err(err) => {
                        restore_best(self, &best);
                        return Err(err);
                    }
                };
                if let Err(err) = adam_step(
                    &mut self.params,
                    &mut state,
                    self.config.lr,
                    self.config.l2,
                ) {
                    restore_best(self, &best);
                    return Err(err);
                }
                loss_sum += loss * batch.len() as f64;
            }
            let train_loss = loss_sum / encoded.len() as f64;

            let predicted = self.predict(&val_tokens)?;
            let metrics = span_prf(&val_gold, &predicted)?;
            let monitored = match hooks.metric_override {
                Some(hook) => hook(epoch, metrics.f1),
                None => metrics.f1,
            };

            let wall_seconds = started.elapsed().as_secs_f64();
            info!(
                "epoch {epoch}: loss {train_loss:.6}, val F1 {:.3} ({wall_seconds:.1}s)",
                metrics.f1
            );
            history.push(EpochRecord {
                epoch,
                train_loss,
                precision: metrics.precision,
                recall: metrics.recall,
                f1: metrics.f1,
                wall_seconds,
            });

            let improved = best
                .as_ref()
                .map_or(true, |(best_f1, _, _)| monitored > *best_f1);
            if improved {
                best = Some((monitored, epoch, self.param_values()));
                stale_epochs = 0;
            } else {
                stale_epochs += 1;
                if stale_epochs >= self.config.patience {
                    info!("early stop at epoch {epoch}");
                    break;
                }
            }
        }

        let best_epoch = best.as_ref().map(|(_, e, _)| *e).unwrap_or(0);
        restore_best(self, &best);
        Ok(TrainHistory {
            epochs: history,
            best_epoch,
        })
    }

    /// Predicted tags for bare token sequences: encode → forward in
    /// inference mode → constrained Viterbi. Empty sequences are skipped
    /// with a warning and yield empty tag lists.
    pub fn predict_tags(&self, sentences: &[Vec<String>]) -> Result<Vec<Vec<Tag>>> {
        let crf = self.crf_params();
        let constraints = DecodeConstraints::iob();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut out = Vec::with_capacity(sentences.len());
        for tokens in sentences {
            if tokens.is_empty() {
                warn!("skipping empty sentence in prediction input");
                out.push(Vec::new());
                continue;
            }
            let (word_ids, char_ids) =
                encode_tokens(tokens, &self.word_vocab, &self.char_vocab);
            let encoded = EncodedSentence {
                tag_ids: vec![0; word_ids.len()],
                word_ids,
                char_ids,
            };
            let emissions = self
                .forward(std::slice::from_ref(&encoded), false, &mut rng)?
                .pop()
                .expect("one emission matrix per sentence");
            let (tag_ids, _) = viterbi_decode_constrained(&emissions, &crf, &constraints)?;
            out.push(
                tag_ids
                    .into_iter()
                    .map(Tag::from_index)
                    .collect::<Result<Vec<Tag>>>()?,
            );
        }
        Ok(out)
    }

    /// Predicted mention spans per sentence.
    pub fn predict(&self, sentences: &[Vec<String>]) -> Result<Vec<Vec<MentionSpan>>> {
        Ok(self
            .predict_tags(sentences)?
            .iter()
            .map(|tags| tags_to_spans(tags))
            .collect())
    }

    /// Convenience: spans for already-tagged sentences (gold tags ignored).
    pub fn predict_sentences(&self, sentences: &[Sentence]) -> Result<Vec<Vec<MentionSpan>>> {
        let tokens: Vec<Vec<String>> = sentences.iter().map(|s| s.tokens().to_vec()).collect();
        self.predict(&tokens)
    }
}

fn clip_gradients(params: &mut [Parameter], limit: f64) {
    let norm: f64 = params
        .iter()
        .flat_map(|p| p.grad.data())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt();
    if norm > limit {
        let factor = limit / norm;
        for p in params {
            for g in p.grad.data_mut() {
                *g *= factor;
            }
        }
    }
}

/// Builds vocabularies from the training part and assembles a model.
pub fn build_model(
    config: ModelConfig,
    train: &[Sentence],
    pretrained: Option<&mut dyn BufRead>,
) -> Result<(Model, usize)> {
    let word_vocab = crate::vocab::build_word_vocab(train, config.min_count)?;
    let char_vocab = crate::vocab::build_char_vocab(train)?;
    Model::new(config, word_vocab, char_vocab, pretrained)
}
