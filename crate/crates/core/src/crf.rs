//! Linear-chain CRF over the label space: sequence scoring, log-partition
//! via the forward recursion, the training loss, and Viterbi decoding.
//!
//! Score of a tag sequence t_1..t_n:
//! `start[t_1] + Σ em[t, t_t] + Σ transitions[t_t, t_{t+1}] + end[t_n]`.
//!
//! Scoring and decoding work on plain tensors; the differentiable loss is
//! assembled from tape primitives so parameter gradients come from the same
//! machinery as the rest of the network.

use crate::error::{Error, Result};
use crate::tape::{NodeId, Tape};
use crate::tensor::{log_sum_exp, Tensor};

/// Transition table (score of label j following label i) plus start/end
/// score vectors.
#[derive(Debug, Clone)]
pub struct CrfParams {
    pub transitions: Tensor,
    pub start: Tensor,
    pub end: Tensor,
}

impl CrfParams {
    pub fn zeros(num_labels: usize) -> Self {
        Self {
            transitions: Tensor::zeros(&[num_labels, num_labels]),
            start: Tensor::zeros(&[num_labels]),
            end: Tensor::zeros(&[num_labels]),
        }
    }

    pub fn num_labels(&self) -> usize {
        self.start.len()
    }

    fn validate(&self) -> Result<()> {
        let k = self.num_labels();
        if self.transitions.shape() != [k, k] || self.end.len() != k {
            return Err(Error::Shape(format!(
                "crf: transitions {:?}, start {k}, end {}",
                self.transitions.shape(),
                self.end.len()
            )));
        }
        Ok(())
    }
}

/// Per-token label scores from the dense layer, n×K with n ≥ 1.
#[derive(Debug, Clone)]
pub struct EmissionMatrix {
    pub scores: Tensor,
}

impl EmissionMatrix {
    pub fn new(scores: Tensor) -> Result<Self> {
        if scores.shape().len() != 2 || scores.shape()[0] == 0 {
            return Err(Error::Shape(format!(
                "emission matrix must be n×K with n ≥ 1, got {:?}",
                scores.shape()
            )));
        }
        Ok(Self { scores })
    }

    pub fn num_tokens(&self) -> usize {
        self.scores.shape()[0]
    }

    pub fn num_labels(&self) -> usize {
        self.scores.shape()[1]
    }
}

fn check_instance(em: &EmissionMatrix, crf: &CrfParams) -> Result<()> {
    crf.validate()?;
    if em.num_labels() != crf.num_labels() {
        return Err(Error::Shape(format!(
            "emissions carry {} labels, crf {}",
            em.num_labels(),
            crf.num_labels()
        )));
    }
    Ok(())
}

fn check_tags(em: &EmissionMatrix, tags: &[usize]) -> Result<()> {
    if tags.len() != em.num_tokens() {
        return Err(Error::Shape(format!(
            "{} tags for {} tokens",
            tags.len(),
            em.num_tokens()
        )));
    }
    if let Some(bad) = tags.iter().find(|t| **t >= em.num_labels()) {
        return Err(Error::Index(format!(
            "tag id {bad} with {} labels",
            em.num_labels()
        )));
    }
    Ok(())
}

/// Score of one specific tag sequence.
pub fn sequence_score(em: &EmissionMatrix, tags: &[usize], crf: &CrfParams) -> Result<f64> {
    check_instance(em, crf)?;
    check_tags(em, tags)?;
    let n = tags.len();
    let mut score = crf.start.data()[tags[0]] + crf.end.data()[tags[n - 1]];
    for (t, &tag) in tags.iter().enumerate() {
        score += em.scores.at(t, tag);
    }
    for t in 0..n - 1 {
        score += crf.transitions.at(tags[t], tags[t + 1]);
    }
    Ok(score)
}

/// `log Σ exp(score)` over all K^n tag sequences, by the forward recursion.
pub fn log_partition(em: &EmissionMatrix, crf: &CrfParams) -> Result<f64> {
    check_instance(em, crf)?;
    let (n, k) = (em.num_tokens(), em.num_labels());
    let mut alpha: Vec<f64> = (0..k)
        .map(|j| crf.start.data()[j] + em.scores.at(0, j))
        .collect();
    let mut scratch = vec![0.0; k];
    for t in 1..n {
        let mut next = vec![0.0; k];
        for (j, slot) in next.iter_mut().enumerate() {
            for i in 0..k {
                scratch[i] = alpha[i] + crf.transitions.at(i, j);
            }
            *slot = log_sum_exp(&scratch)? + em.scores.at(t, j);
        }
        alpha = next;
    }
    for (j, a) in alpha.iter_mut().enumerate() {
        *a += crf.end.data()[j];
    }
    log_sum_exp(&alpha)
}

/// Negative log-likelihood of the gold tags: `log_partition − sequence_score`.
pub fn nll_loss(em: &EmissionMatrix, tags: &[usize], crf: &CrfParams) -> Result<f64> {
    Ok(log_partition(em, crf)? - sequence_score(em, tags, crf)?)
}

/// Transitions forbidden at decode time (their score is fixed to −1e4).
#[derive(Debug, Clone, Default)]
pub struct DecodeConstraints {
    /// Labels that may not start a sequence.
    pub banned_start: Vec<usize>,
    /// (from, to) label pairs that may not occur.
    pub banned_transitions: Vec<(usize, usize)>,
}

pub const BANNED_SCORE: f64 = -1e4;

impl DecodeConstraints {
    /// The IOB structural constraint for the O/B-DS/I-DS tag order used
    /// across this crate (O=0, B-DS=1, I-DS=2): I-DS may not open a
    /// sequence and may not follow O.
    pub fn iob() -> Self {
        Self {
            banned_start: vec![2],
            banned_transitions: vec![(0, 2)],
        }
    }
}

/// Highest-scoring tag sequence and its score. Ties break toward the lower
/// label index at every backtracking step.
pub fn viterbi_decode(em: &EmissionMatrix, crf: &CrfParams) -> Result<(Vec<usize>, f64)> {
    viterbi_decode_constrained(em, crf, &DecodeConstraints::default())
}

/// Viterbi with decode-time structural constraints.
pub fn viterbi_decode_constrained(
    em: &EmissionMatrix,
    crf: &CrfParams,
    constraints: &DecodeConstraints,
) -> Result<(Vec<usize>, f64)> {
    check_instance(em, crf)?;
    let (n, k) = (em.num_tokens(), em.num_labels());

    let mut start = crf.start.data().to_vec();
    for &j in &constraints.banned_start {
        start[j] = BANNED_SCORE;
    }
    let mut trans = crf.transitions.clone();
    for &(i, j) in &constraints.banned_transitions {
        trans.set(i, j, BANNED_SCORE);
    }

    let mut delta: Vec<f64> = (0..k).map(|j| start[j] + em.scores.at(0, j)).collect();
    let mut backpointers: Vec<Vec<usize>> = Vec::with_capacity(n.saturating_sub(1));
    for t in 1..n {
        let mut next = vec![f64::NEG_INFINITY; k];
        let mut bp = vec![0; k];
        for j in 0..k {
            let mut best = f64::NEG_INFINITY;
            let mut best_i = 0;
            for i in 0..k {
                let cand = delta[i] + trans.at(i, j);
                if cand > best {
                    best = cand;
                    best_i = i;
                }
            }
            next[j] = best + em.scores.at(t, j);
            bp[j] = best_i;
        }
        delta = next;
        backpointers.push(bp);
    }

    let mut best_last = 0;
    let mut best_score = f64::NEG_INFINITY;
    for (j, d) in delta.iter().enumerate() {
        let cand = d + crf.end.data()[j];
        if cand > best_score {
            best_score = cand;
            best_last = j;
        }
    }

    let mut tags = vec![best_last];
    for bp in backpointers.iter().rev() {
        tags.push(bp[*tags.last().expect("non-empty")]);
    }
    tags.reverse();
    Ok((tags, best_score))
}

/// CRF parameters bound to tape leaves.
#[derive(Debug, Clone, Copy)]
pub struct CrfNodes {
    pub transitions: NodeId,
    pub start: NodeId,
    pub end: NodeId,
}

/// Differentiable NLL assembled on the tape; gradients flow to the
/// emissions and to all three CRF parameter tensors.
pub fn nll_on_tape(
    tape: &Tape,
    emissions: NodeId,
    tags: &[usize],
    crf: &CrfNodes,
) -> Result<NodeId> {
    let shape = tape.shape_of(emissions);
    if shape.len() != 2 || shape[0] != tags.len() {
        return Err(Error::Shape(format!(
            "{} tags for emissions {:?}",
            tags.len(),
            shape
        )));
    }
    let n = tags.len();

    // Gold score.
    let em_coords: Vec<(usize, usize)> = tags.iter().copied().enumerate().collect();
    let em_picks = tape.gather_elems(emissions, &em_coords)?;
    let mut gold = tape.sum(em_picks);
    if n > 1 {
        let tr_coords: Vec<(usize, usize)> =
            tags.windows(2).map(|w| (w[0], w[1])).collect();
        let tr_picks = tape.gather_elems(crf.transitions, &tr_coords)?;
        gold = tape.add(gold, tape.sum(tr_picks))?;
    }
    gold = tape.add(gold, tape.elem(crf.start, tags[0])?)?;
    gold = tape.add(gold, tape.elem(crf.end, tags[n - 1])?)?;

    // Forward recursion for the partition.
    let mut alpha = tape.add(tape.row(emissions, 0)?, crf.start)?;
    for t in 1..n {
        let scored = tape.add_col(crf.transitions, alpha)?;
        let reduced = tape.log_sum_exp_cols(scored)?;
        alpha = tape.add(reduced, tape.row(emissions, t)?)?;
    }
    let log_z = tape.log_sum_exp(tape.add(alpha, crf.end)?)?;

    tape.sub(log_z, gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{grad_check, Parameter};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive enumeration over all K^n sequences, scoring each by the
    /// direct sum. Kept deliberately independent of the implementation.
    fn brute_force(em: &EmissionMatrix, crf: &CrfParams) -> (f64, Vec<usize>, f64) {
        let (n, k) = (em.num_tokens(), em.num_labels());
        let total = k.pow(n as u32);
        let mut scores = Vec::with_capacity(total);
        let mut best_score = f64::NEG_INFINITY;
        let mut best_seq = vec![0; n];
        for idx in 0..total {
            let mut seq = vec![0; n];
            let mut rem = idx;
            // Lexicographic: position 0 is the most significant digit.
            for slot in seq.iter_mut().rev() {
                *slot = rem % k;
                rem /= k;
            }
            let mut s = crf.start.data()[seq[0]] + crf.end.data()[seq[n - 1]];
            for (t, &tag) in seq.iter().enumerate() {
                s += em.scores.at(t, tag);
            }
            for t in 0..n - 1 {
                s += crf.transitions.at(seq[t], seq[t + 1]);
            }
            if s > best_score {
                best_score = s;
                best_seq = seq.clone();
            }
            scores.push(s);
        }
        (log_sum_exp(&scores).unwrap(), best_seq, best_score)
    }

    fn random_instance<R: Rng>(n: usize, k: usize, rng: &mut R) -> (EmissionMatrix, CrfParams) {
        let em = EmissionMatrix::new(crate::optim::uniform(&[n, k], 2.0, rng)).unwrap();
        let crf = CrfParams {
            transitions: crate::optim::uniform(&[k, k], 2.0, rng),
            start: crate::optim::uniform(&[k], 2.0, rng),
            end: crate::optim::uniform(&[k], 2.0, rng),
        };
        (em, crf)
    }

    #[test]
    fn single_token_score_is_emission() {
        let em = EmissionMatrix::new(Tensor::matrix(1, 3, vec![0.3, -1.0, 2.0]).unwrap()).unwrap();
        let crf = CrfParams::zeros(3);
        assert_eq!(sequence_score(&em, &[2], &crf).unwrap(), 2.0);
    }

    #[test]
    fn all_zero_parameters_score_zero() {
        let em = EmissionMatrix::new(Tensor::zeros(&[4, 3])).unwrap();
        let crf = CrfParams::zeros(3);
        for tags in [[0, 0, 0, 0], [1, 2, 0, 1], [2, 2, 2, 2]] {
            assert_eq!(sequence_score(&em, &tags, &crf).unwrap(), 0.0);
        }
    }

    #[test]
    fn random_score_matches_term_by_term_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (em, crf) = random_instance(4, 3, &mut rng);
        let tags = [1usize, 0, 2, 2];
        let mut expected = crf.start.data()[1] + crf.end.data()[2];
        expected += em.scores.at(0, 1) + em.scores.at(1, 0) + em.scores.at(2, 2) + em.scores.at(3, 2);
        expected += crf.transitions.at(1, 0) + crf.transitions.at(0, 2) + crf.transitions.at(2, 2);
        let got = sequence_score(&em, &tags, &crf).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn partition_single_token() {
        let em = EmissionMatrix::new(Tensor::matrix(1, 3, vec![0.5, 1.5, -0.5]).unwrap()).unwrap();
        let mut crf = CrfParams::zeros(3);
        crf.end = Tensor::vector(vec![0.1, 0.2, 0.3]);
        let expected = log_sum_exp(&[0.6, 1.7, -0.2]).unwrap();
        assert!((log_partition(&em, &crf).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn partition_all_zero_is_n_ln_k() {
        let em = EmissionMatrix::new(Tensor::zeros(&[5, 3])).unwrap();
        let crf = CrfParams::zeros(3);
        let expected = 5.0 * 3.0_f64.ln();
        assert!((log_partition(&em, &crf).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn partition_matches_enumeration_n5() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let (em, crf) = random_instance(5, 3, &mut rng);
        let (log_z, _, _) = brute_force(&em, &crf);
        assert!((log_partition(&em, &crf).unwrap() - log_z).abs() < 1e-9);
    }

    #[test]
    fn nll_zero_when_gold_is_only_live_sequence() {
        // Suppress every non-gold label with −1e4 emissions.
        let gold = [1usize, 2, 0];
        let mut scores = vec![-1e4; 9];
        for (t, &g) in gold.iter().enumerate() {
            scores[t * 3 + g] = 0.0;
        }
        let em = EmissionMatrix::new(Tensor::matrix(3, 3, scores).unwrap()).unwrap();
        let crf = CrfParams::zeros(3);
        let loss = nll_loss(&em, &gold, &crf).unwrap();
        assert!(loss.abs() < 1e-9, "loss = {loss}");
    }

    #[test]
    fn nll_all_zero_instance() {
        let em = EmissionMatrix::new(Tensor::zeros(&[4, 3])).unwrap();
        let crf = CrfParams::zeros(3);
        let loss = nll_loss(&em, &[0, 1, 2, 0], &crf).unwrap();
        assert!((loss - 4.0 * 3.0_f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn nll_invariant_to_per_token_emission_shift() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (em, crf) = random_instance(4, 3, &mut rng);
        let tags = [0usize, 1, 2, 1];
        let base = nll_loss(&em, &tags, &crf).unwrap();
        let mut shifted = em.scores.clone();
        for j in 0..3 {
            shifted.set(2, j, shifted.at(2, j) + 7.5);
        }
        let shifted = EmissionMatrix::new(shifted).unwrap();
        assert!((nll_loss(&shifted, &tags, &crf).unwrap() - base).abs() < 1e-9);
    }

    #[test]
    fn viterbi_single_token() {
        let em = EmissionMatrix::new(Tensor::matrix(1, 3, vec![0.1, 0.9, 0.5]).unwrap()).unwrap();
        let crf = CrfParams::zeros(3);
        let (tags, score) = viterbi_decode(&em, &crf).unwrap();
        assert_eq!(tags, vec![1]);
        assert!((score - 0.9).abs() < 1e-12);
    }

    #[test]
    fn viterbi_matches_enumeration_n6() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let (em, crf) = random_instance(6, 3, &mut rng);
        let (_, best_seq, best_score) = brute_force(&em, &crf);
        let (tags, score) = viterbi_decode(&em, &crf).unwrap();
        assert_eq!(tags, best_seq);
        assert_eq!(score, best_score);
        let rescored = sequence_score(&em, &tags, &crf).unwrap();
        assert!((score - rescored).abs() < 1e-9);
    }

    #[test]
    fn viterbi_follows_strong_emissions() {
        // ±10 margins on [B, I, O] with zero transitions.
        let want = [1usize, 2, 0];
        let mut scores = vec![-10.0; 9];
        for (t, &g) in want.iter().enumerate() {
            scores[t * 3 + g] = 10.0;
        }
        let em = EmissionMatrix::new(Tensor::matrix(3, 3, scores).unwrap()).unwrap();
        let crf = CrfParams::zeros(3);
        let (tags, _) = viterbi_decode(&em, &crf).unwrap();
        assert_eq!(tags, want.to_vec());
    }

    #[test]
    fn viterbi_tie_breaks_to_lowest_label() {
        let em = EmissionMatrix::new(Tensor::zeros(&[4, 3])).unwrap();
        let crf = CrfParams::zeros(3);
        let (tags, score) = viterbi_decode(&em, &crf).unwrap();
        assert_eq!(tags, vec![0, 0, 0, 0]);
        assert_eq!(score, 0.0);
    }

    #[test]
    fn constrained_decode_never_opens_with_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let n = rng.random_range(1..=6);
            let (em, crf) = random_instance(n, 3, &mut rng);
            let (tags, _) =
                viterbi_decode_constrained(&em, &crf, &DecodeConstraints::iob()).unwrap();
            assert_ne!(tags[0], 2, "I-DS at sequence start");
            for w in tags.windows(2) {
                assert!(!(w[0] == 0 && w[1] == 2), "I-DS after O in {tags:?}");
            }
        }
    }

    #[test]
    fn partition_bounds_any_sequence_score() {
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..20 {
            let n = rng.random_range(1..=5);
            let (em, crf) = random_instance(n, 3, &mut rng);
            let log_z = log_partition(&em, &crf).unwrap();
            let (tags, score) = viterbi_decode(&em, &crf).unwrap();
            assert!(log_z >= score - 1e-12, "logZ {log_z} < max score {score}");
            let _ = tags;
        }
    }

    #[test]
    fn tape_nll_matches_plain_nll() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        for _ in 0..10 {
            let n = rng.random_range(1..=5);
            let (em, crf) = random_instance(n, 3, &mut rng);
            let tags: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
            let plain = nll_loss(&em, &tags, &crf).unwrap();

            let tape = Tape::new();
            let em_id = tape.leaf(em.scores.clone());
            let nodes = CrfNodes {
                transitions: tape.leaf(crf.transitions.clone()),
                start: tape.leaf(crf.start.clone()),
                end: tape.leaf(crf.end.clone()),
            };
            let loss = nll_on_tape(&tape, em_id, &tags, &nodes).unwrap();
            assert!((tape.item(loss) - plain).abs() < 1e-9);
        }
    }

    #[test]
    fn nll_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(28);
        let n = 4;
        let tags = vec![1usize, 2, 0, 1];
        let mut params = vec![
            Parameter::new("em", crate::optim::uniform(&[n, 3], 1.0, &mut rng)),
            Parameter::new("trans", crate::optim::uniform(&[3, 3], 1.0, &mut rng)),
            Parameter::new("start", crate::optim::uniform(&[3], 1.0, &mut rng)),
            Parameter::new("end", crate::optim::uniform(&[3], 1.0, &mut rng)),
        ];

        let eval = |ps: &[Parameter]| -> f64 {
            let em = EmissionMatrix::new(ps[0].value.clone()).unwrap();
            let crf = CrfParams {
                transitions: ps[1].value.clone(),
                start: ps[2].value.clone(),
                end: ps[3].value.clone(),
            };
            nll_loss(&em, &tags, &crf).unwrap()
        };

        {
            let tape = Tape::new();
            let ids: Vec<NodeId> = params.iter().map(|p| tape.leaf(p.value.clone())).collect();
            let nodes = CrfNodes {
                transitions: ids[1],
                start: ids[2],
                end: ids[3],
            };
            let loss = nll_on_tape(&tape, ids[0], &tags, &nodes).unwrap();
            let grads = tape.backward(loss).unwrap();
            for (p, id) in params.iter_mut().zip(ids) {
                p.grad = grads.wrt(id, p.value.shape());
            }
        }

        let err = grad_check(eval, &mut params, 1e-5);
        assert!(err < 1e-6, "max rel err {err}");
    }
}
