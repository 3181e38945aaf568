//! LSTM cell and sequence runners, the bidirectional wrapper, the stacked
//! encoder, and the character-level word encoder.
//!
//! All functions operate on tape nodes so gradients flow through every gate.
//! Gate order is input, forget, cell candidate, output.

use rand::Rng;

use crate::error::{Error, Result};
use crate::tape::{NodeId, Tape};
use crate::tensor::Tensor;

pub const GATE_INPUT: usize = 0;
pub const GATE_FORGET: usize = 1;
pub const GATE_CELL: usize = 2;
pub const GATE_OUTPUT: usize = 3;
pub const GATE_NAMES: [&str; 4] = ["i", "f", "g", "o"];

/// One direction's weights, bound to a tape: per gate an input matrix
/// (in_dim×H), a recurrent matrix (H×H), and a bias (H).
#[derive(Debug, Clone, Copy)]
pub struct LstmWeights {
    pub wx: [NodeId; 4],
    pub wh: [NodeId; 4],
    pub b: [NodeId; 4],
}

/// Hidden and cell state at one timestep.
#[derive(Debug, Clone, Copy)]
pub struct LstmState {
    pub h: NodeId,
    pub c: NodeId,
}

/// A forward and a backward LSTM of equal hidden size; output width is 2H.
#[derive(Debug, Clone, Copy)]
pub struct BiLstmLayer {
    pub forward: LstmWeights,
    pub backward: LstmWeights,
}

/// One LSTM step:
/// i = σ(Wx_i·x + Wh_i·h + b_i), f and o likewise, g = tanh(…),
/// c' = f⊙c + i⊙g, h' = o⊙tanh(c').
pub fn lstm_cell_step(
    tape: &Tape,
    x: NodeId,
    state: LstmState,
    w: &LstmWeights,
) -> Result<LstmState> {
    let mut gates = [None; 4];
    for gate in 0..4 {
        let from_x = tape.vecmat(x, w.wx[gate])?;
        let from_h = tape.vecmat(state.h, w.wh[gate])?;
        let pre = tape.add(tape.add(from_x, from_h)?, w.b[gate])?;
        gates[gate] = Some(if gate == GATE_CELL {
            tape.tanh_op(pre)
        } else {
            tape.sigmoid(pre)
        });
    }
    let [i, f, g, o] = gates.map(|n| n.expect("all four gates computed"));
    let c_next = tape.add(tape.hadamard(f, state.c)?, tape.hadamard(i, g)?)?;
    let h_next = tape.hadamard(o, tape.tanh_op(c_next))?;
    Ok(LstmState {
        h: h_next,
        c: c_next,
    })
}

fn zero_state(tape: &Tape, hidden: usize) -> LstmState {
    LstmState {
        h: tape.leaf(Tensor::zeros(&[hidden])),
        c: tape.leaf(Tensor::zeros(&[hidden])),
    }
}

fn hidden_size(tape: &Tape, w: &LstmWeights) -> usize {
    tape.shape_of(w.b[GATE_INPUT])[0]
}

/// Runs the cell over a sequence from a zero initial state and returns
/// `[h_1..h_n]`.
pub fn lstm_run(tape: &Tape, seq: &[NodeId], w: &LstmWeights) -> Result<Vec<NodeId>> {
    if seq.is_empty() {
        return Err(Error::Validation("lstm_run over empty sequence".into()));
    }
    let mut state = zero_state(tape, hidden_size(tape, w));
    let mut outputs = Vec::with_capacity(seq.len());
    for &x in seq {
        state = lstm_cell_step(tape, x, state, w)?;
        outputs.push(state.h);
    }
    Ok(outputs)
}

/// Per position t, `concat(forward h_t, backward h_t)` where the backward
/// pass consumes the reversed sequence and its outputs are re-reversed to
/// align.
pub fn bilstm_run(tape: &Tape, seq: &[NodeId], layer: &BiLstmLayer) -> Result<Vec<NodeId>> {
    let forward = lstm_run(tape, seq, &layer.forward)?;
    let reversed: Vec<NodeId> = seq.iter().rev().copied().collect();
    let mut backward = lstm_run(tape, &reversed, &layer.backward)?;
    backward.reverse();
    forward
        .into_iter()
        .zip(backward)
        .map(|(f, b)| tape.concat(f, b, 0))
        .collect()
}

/// Stacked bidirectional encoder with inverted dropout on the input and
/// between layers (training mode only).
pub fn stacked_encode<R: Rng>(
    tape: &Tape,
    seq: &[NodeId],
    layers: &[BiLstmLayer],
    dropout_rate: f64,
    training: bool,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    if layers.is_empty() {
        return Err(Error::Config("encoder needs at least one layer".into()));
    }
    let mut xs: Vec<NodeId> = seq
        .iter()
        .map(|&x| tape.dropout(x, dropout_rate, training, rng))
        .collect::<Result<_>>()?;
    for (k, layer) in layers.iter().enumerate() {
        let expected = tape.shape_of(layer.forward.wx[GATE_INPUT])[0];
        let got = tape.shape_of(xs[0])[0];
        if expected != got {
            return Err(Error::Config(format!(
                "encoder layer {k} expects input width {expected}, got {got}"
            )));
        }
        xs = bilstm_run(tape, &xs, layer)?;
        if k + 1 < layers.len() {
            xs = xs
                .iter()
                .map(|&x| tape.dropout(x, dropout_rate, training, rng))
                .collect::<Result<_>>()?;
        }
    }
    Ok(xs)
}

/// Encodes one word from its character ids: embeds the characters, runs a
/// Bi-LSTM over them, and concatenates the final hidden state of each
/// direction into a fixed-size vector.
pub fn char_encode_word(
    tape: &Tape,
    char_ids: &[usize],
    char_table: NodeId,
    layer: &BiLstmLayer,
) -> Result<NodeId> {
    if char_ids.is_empty() {
        return Err(Error::Validation(
            "char_encode_word on empty character list".into(),
        ));
    }
    let embedded = tape.gather_rows(char_table, char_ids)?;
    let xs: Vec<NodeId> = (0..char_ids.len())
        .map(|t| tape.row(embedded, t))
        .collect::<Result<_>>()?;
    let forward = lstm_run(tape, &xs, &layer.forward)?;
    let reversed: Vec<NodeId> = xs.iter().rev().copied().collect();
    let backward = lstm_run(tape, &reversed, &layer.backward)?;
    let last_f = *forward.last().expect("non-empty by validation");
    let last_b = *backward.last().expect("non-empty by validation");
    tape.concat(last_f, last_b, 0)
}

/// High-precision scalar LSTM oracle: evaluates the six cell equations for
/// H = in_dim = 1. Used by tests as the independent reference for the cell.
pub fn scalar_cell_oracle(
    x: f64,
    h: f64,
    c: f64,
    wx: [f64; 4],
    wh: [f64; 4],
    b: [f64; 4],
) -> (f64, f64) {
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let i = sig(wx[GATE_INPUT] * x + wh[GATE_INPUT] * h + b[GATE_INPUT]);
    let f = sig(wx[GATE_FORGET] * x + wh[GATE_FORGET] * h + b[GATE_FORGET]);
    let g = (wx[GATE_CELL] * x + wh[GATE_CELL] * h + b[GATE_CELL]).tanh();
    let o = sig(wx[GATE_OUTPUT] * x + wh[GATE_OUTPUT] * h + b[GATE_OUTPUT]);
    let c_next = f * c + i * g;
    let h_next = o * c_next.tanh();
    (h_next, c_next)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::optim::{grad_check, Parameter};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn constant_weights(tape: &Tape, in_dim: usize, hidden: usize, value: f64) -> LstmWeights {
        let fill = |shape: &[usize]| {
            let n: usize = shape.iter().product();
            tape.leaf(Tensor::new(shape.to_vec(), vec![value; n]).unwrap())
        };
        LstmWeights {
            wx: [0; 4].map(|_| fill(&[in_dim, hidden])),
            wh: [0; 4].map(|_| fill(&[hidden, hidden])),
            b: [0; 4].map(|_| tape.leaf(Tensor::zeros(&[hidden]))),
        }
    }

    #[test]
    fn zero_everything_gives_zero_state() {
        let tape = Tape::new();
        let w = constant_weights(&tape, 2, 3, 0.0);
        let x = tape.leaf(Tensor::zeros(&[2]));
        let state = zero_state(&tape, 3);
        let next = lstm_cell_step(&tape, x, state, &w).unwrap();
        assert_eq!(tape.value(next.h).data(), &[0.0, 0.0, 0.0]);
        assert_eq!(tape.value(next.c).data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn scalar_all_ones_matches_oracle() {
        let (h_ref, c_ref) = scalar_cell_oracle(1.0, 0.0, 0.0, [1.0; 4], [1.0; 4], [0.0; 4]);
        // Independently derived constants for the all-ones scalar cell.
        assert!((c_ref - 0.55677).abs() < 1e-5, "c' = {c_ref}");
        assert!((h_ref - 0.369_606_4).abs() < 1e-5, "h' = {h_ref}");

        let tape = Tape::new();
        let w = constant_weights(&tape, 1, 1, 1.0);
        let x = tape.leaf(Tensor::vector(vec![1.0]));
        let next = lstm_cell_step(&tape, x, zero_state(&tape, 1), &w).unwrap();
        assert!((tape.value(next.c).data()[0] - c_ref).abs() < 1e-12);
        assert!((tape.value(next.h).data()[0] - h_ref).abs() < 1e-12);
    }

    #[test]
    fn run_of_length_one_equals_single_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = test_support::lstm_params("w", 2, 3, &mut rng);
        let tape = Tape::new();
        let (w, _) = test_support::bind(&tape, &params);
        let x = tape.leaf(Tensor::vector(vec![0.3, -0.7]));
        let run = lstm_run(&tape, &[x], &w).unwrap();
        let step = lstm_cell_step(&tape, x, zero_state(&tape, 3), &w).unwrap();
        assert_eq!(tape.value(run[0]), tape.value(step.h));
    }

    #[test]
    fn empty_sequence_rejected() {
        let tape = Tape::new();
        let w = constant_weights(&tape, 1, 1, 0.0);
        assert!(lstm_run(&tape, &[], &w).is_err());
    }

    #[test]
    fn three_step_scalar_run_matches_iterated_oracle() {
        let tape = Tape::new();
        let w = constant_weights(&tape, 1, 1, 1.0);
        let xs: Vec<NodeId> = [0.5, -1.0, 2.0]
            .iter()
            .map(|&v| tape.leaf(Tensor::vector(vec![v])))
            .collect();
        let outputs = lstm_run(&tape, &xs, &w).unwrap();

        let (mut h, mut c) = (0.0, 0.0);
        for (t, &x) in [0.5, -1.0, 2.0].iter().enumerate() {
            let (h2, c2) = scalar_cell_oracle(x, h, c, [1.0; 4], [1.0; 4], [0.0; 4]);
            h = h2;
            c = c2;
            assert!(
                (tape.value(outputs[t]).data()[0] - h).abs() < 1e-12,
                "step {t}"
            );
        }
    }

    #[test]
    fn bilstm_output_width_is_2h() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let fparams = test_support::lstm_params("f", 2, 3, &mut rng);
        let bparams = test_support::lstm_params("b", 2, 3, &mut rng);
        let tape = Tape::new();
        let (fw, _) = test_support::bind(&tape, &fparams);
        let (bw, _) = test_support::bind(&tape, &bparams);
        let layer = BiLstmLayer {
            forward: fw,
            backward: bw,
        };
        let xs: Vec<NodeId> = (0..4)
            .map(|i| tape.leaf(Tensor::vector(vec![i as f64, -1.0])))
            .collect();
        let out = bilstm_run(&tape, &xs, &layer).unwrap();
        assert_eq!(out.len(), 4);
        for &o in &out {
            assert_eq!(tape.shape_of(o), vec![6]);
        }
    }

    #[test]
    fn bilstm_forward_half_equals_lstm_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fparams = test_support::lstm_params("f", 2, 3, &mut rng);
        let bparams = test_support::lstm_params("b", 2, 3, &mut rng);
        let tape = Tape::new();
        let (fw, _) = test_support::bind(&tape, &fparams);
        let (bw, _) = test_support::bind(&tape, &bparams);
        let layer = BiLstmLayer {
            forward: fw,
            backward: bw,
        };
        let xs: Vec<NodeId> = (0..3)
            .map(|i| tape.leaf(Tensor::vector(vec![0.2 * i as f64, 0.5])))
            .collect();
        let both = bilstm_run(&tape, &xs, &layer).unwrap();
        let fwd_only = lstm_run(&tape, &xs, &fw).unwrap();
        for (pair, f) in both.iter().zip(fwd_only) {
            assert_eq!(tape.value(*pair).data()[..3], *tape.value(f).data());
        }
    }

    #[test]
    fn palindrome_with_tied_weights_is_mirror_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let params = test_support::lstm_params("w", 1, 2, &mut rng);
        let tape = Tape::new();
        let (w, _) = test_support::bind(&tape, &params);
        let layer = BiLstmLayer {
            forward: w,
            backward: w,
        };
        let xs: Vec<NodeId> = [0.4, -0.9, 0.4]
            .iter()
            .map(|&v| tape.leaf(Tensor::vector(vec![v])))
            .collect();
        let out = bilstm_run(&tape, &xs, &layer).unwrap();
        let n = out.len();
        for t in 0..n {
            let here = tape.value(out[t]);
            let mirror = tape.value(out[n - 1 - t]);
            // concat(f, b) at t mirrors to concat(b, f) at n-1-t
            assert!(here.data()[..2]
                .iter()
                .zip(&mirror.data()[2..])
                .all(|(a, b)| (a - b).abs() < 1e-12));
            assert!(here.data()[2..]
                .iter()
                .zip(&mirror.data()[..2])
                .all(|(a, b)| (a - b).abs() < 1e-12));
        }
    }

    #[test]
    fn stacked_with_one_layer_no_dropout_is_bilstm() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let fparams = test_support::lstm_params("f", 2, 2, &mut rng);
        let bparams = test_support::lstm_params("b", 2, 2, &mut rng);
        let tape = Tape::new();
        let (fw, _) = test_support::bind(&tape, &fparams);
        let (bw, _) = test_support::bind(&tape, &bparams);
        let layer = BiLstmLayer {
            forward: fw,
            backward: bw,
        };
        let xs: Vec<NodeId> = (0..3)
            .map(|i| tape.leaf(Tensor::vector(vec![i as f64 * 0.1, -0.2])))
            .collect();
        let mut rng2 = ChaCha8Rng::seed_from_u64(0);
        let stacked = stacked_encode(&tape, &xs, &[layer], 0.0, false, &mut rng2).unwrap();
        let direct = bilstm_run(&tape, &xs, &layer).unwrap();
        for (s, d) in stacked.iter().zip(direct) {
            assert_eq!(tape.value(*s), tape.value(d));
        }
    }

    #[test]
    fn inference_mode_ignores_rng() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let fparams = test_support::lstm_params("f", 2, 2, &mut rng);
        let bparams = test_support::lstm_params("b", 2, 2, &mut rng);
        let run = |seed: u64| {
            let tape = Tape::new();
            let (fw, _) = test_support::bind(&tape, &fparams);
            let (bw, _) = test_support::bind(&tape, &bparams);
            let layer = BiLstmLayer {
                forward: fw,
                backward: bw,
            };
            let xs: Vec<NodeId> = (0..3)
                .map(|i| tape.leaf(Tensor::vector(vec![i as f64 * 0.1, -0.2])))
                .collect();
            let mut drop_rng = ChaCha8Rng::seed_from_u64(seed);
            let out = stacked_encode(&tape, &xs, &[layer], 0.5, false, &mut drop_rng).unwrap();
            out.iter().map(|&o| tape.value(o)).collect::<Vec<_>>()
        };
        assert_eq!(run(1), run(2));
    }

    #[test]
    fn mismatched_layer_width_is_config_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let fparams = test_support::lstm_params("f", 3, 2, &mut rng);
        let bparams = test_support::lstm_params("b", 3, 2, &mut rng);
        let tape = Tape::new();
        let (fw, _) = test_support::bind(&tape, &fparams);
        let (bw, _) = test_support::bind(&tape, &bparams);
        let layer = BiLstmLayer {
            forward: fw,
            backward: bw,
        };
        let xs = vec![tape.leaf(Tensor::vector(vec![0.0, 0.0]))];
        let mut rng2 = ChaCha8Rng::seed_from_u64(0);
        let err = stacked_encode(&tape, &xs, &[layer], 0.0, false, &mut rng2);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn char_encoder_fixed_width_regardless_of_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let fparams = test_support::lstm_params("f", 2, 3, &mut rng);
        let bparams = test_support::lstm_params("b", 2, 3, &mut rng);
        let tape = Tape::new();
        let (fw, _) = test_support::bind(&tape, &fparams);
        let (bw, _) = test_support::bind(&tape, &bparams);
        let layer = BiLstmLayer {
            forward: fw,
            backward: bw,
        };
        let table = tape.leaf(crate::optim::uniform(&[10, 2], 0.5, &mut rng));
        let short = char_encode_word(&tape, &[3], table, &layer).unwrap();
        let long = char_encode_word(&tape, &[1, 4, 2, 9, 5], table, &layer).unwrap();
        assert_eq!(tape.shape_of(short), vec![6]);
        assert_eq!(tape.shape_of(long), vec![6]);
        assert!(char_encode_word(&tape, &[], table, &layer).is_err());
    }

    #[test]
    fn zero_char_weights_give_zero_word_vector() {
        let tape = Tape::new();
        let layer = BiLstmLayer {
            forward: constant_weights(&tape, 2, 3, 0.0),
            backward: constant_weights(&tape, 2, 3, 0.0),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let table = tape.leaf(crate::optim::uniform(&[10, 2], 0.5, &mut rng));
        let vec = char_encode_word(&tape, &[1, 2, 3], table, &layer).unwrap();
        assert!(tape.value(vec).data().iter().all(|v| *v == 0.0));
    }

    /// Full-cell gradient against central differences, every weight.
    #[test]
    fn cell_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let mut params = test_support::lstm_params("w", 2, 3, &mut rng);
        params.push(Parameter::new(
            "x",
            crate::optim::uniform(&[2], 0.5, &mut rng),
        ));

        let loss = |ps: &[Parameter]| -> f64 {
            let tape = Tape::new();
            let (w, _) = test_support::bind(&tape, &ps[..12]);
            let x = tape.leaf(ps[12].value.clone());
            let next = lstm_cell_step(&tape, x, zero_state(&tape, 3), &w).unwrap();
            let total = tape.sum(next.h);
            tape.item(total)
        };

        // Analytic pass.
        {
            let tape = Tape::new();
            let (w, ids) = test_support::bind(&tape, &params[..12]);
            let x = tape.leaf(params[12].value.clone());
            let next = lstm_cell_step(&tape, x, zero_state(&tape, 3), &w).unwrap();
            let total = tape.sum(next.h);
            let grads = tape.backward(total).unwrap();
            for (p, id) in params.iter_mut().zip(ids.into_iter().chain([x])) {
                p.grad = grads.wrt(id, p.value.shape());
            }
        }

        let err = grad_check(loss, &mut params, 1e-5);
        assert!(err < 1e-6, "max rel err {err}");
    }
}
