//! Verification harness: analytic gradients vs central finite differences
//! for every tape primitive and for the full model NLL, reported per
//! parameter group.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Sentence, Tag};
use crate::error::Result;
use crate::model::{build_model, ModelConfig};
use crate::optim::{grad_check, uniform, Parameter};
use crate::recurrent::{lstm_cell_step, LstmState, LstmWeights};
use crate::tape::{NodeId, Tape};
use crate::tensor::Tensor;
use crate::vocab::encode;

/// Maximum relative gradient error of one checked unit.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub max_rel_error: f64,
}

/// Primitive ops are held to this bound.
pub const PRIMITIVE_TOLERANCE: f64 = 1e-6;
/// The composed end-to-end loss is held to this bound.
pub const MODEL_TOLERANCE: f64 = 1e-4;

fn check_op<F>(name: &str, inputs: Vec<Tensor>, build: F) -> CheckReport
where
    F: Fn(&Tape, &[NodeId]) -> Result<NodeId>,
{
    let mut params: Vec<Parameter> = inputs
        .into_iter()
        .enumerate()
        .map(|(i, t)| Parameter::new(format!("in{i}"), t))
        .collect();

    let run = |ps: &[Parameter]| -> (Tape, Vec<NodeId>, NodeId) {
        let tape = Tape::new();
        let ids: Vec<NodeId> = ps.iter().map(|p| tape.leaf(p.value.clone())).collect();
        let out = build(&tape, &ids).expect("op builds on conforming shapes");
        let loss = tape.sum(out);
        (tape, ids, loss)
    };

    {
        let (tape, ids, loss) = run(&params);
        let grads = tape.backward(loss).expect("scalar loss");
        for (p, id) in params.iter_mut().zip(ids) {
            p.grad = grads.wrt(id, p.value.shape());
        }
    }
    let max_rel_error = grad_check(
        |ps| {
            let (tape, _, loss) = run(ps);
            tape.item(loss)
        },
        &mut params,
        1e-5,
    );
    CheckReport {
        name: name.to_string(),
        max_rel_error,
    }
}

/// Gradient checks for every differentiable tape primitive on small random
/// shapes.
pub fn primitives_report(seed: u64) -> Vec<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vec3 = uniform(&[3], 1.0, &mut rng);
    let vec3b = uniform(&[3], 1.0, &mut rng);
    let mat23 = uniform(&[2, 3], 1.0, &mut rng);
    let mat23b = uniform(&[2, 3], 1.0, &mut rng);
    let mat32 = uniform(&[3, 2], 1.0, &mut rng);
    let bias2 = uniform(&[2], 1.0, &mut rng);
    let mat33 = uniform(&[3, 3], 1.0, &mut rng);
    let table = uniform(&[5, 3], 1.0, &mut rng);

    let mut reports = vec![
        check_op("add", vec![vec3.clone(), vec3b.clone()], |t, ids| {
            t.add(ids[0], ids[1])
        }),
        check_op("sub", vec![mat23.clone(), mat23b.clone()], |t, ids| {
            t.sub(ids[0], ids[1])
        }),
        check_op("hadamard", vec![mat23.clone(), mat23b.clone()], |t, ids| {
            t.hadamard(ids[0], ids[1])
        }),
        check_op("sigmoid", vec![mat23.clone()], |t, ids| Ok(t.sigmoid(ids[0]))),
        check_op("tanh", vec![mat23.clone()], |t, ids| Ok(t.tanh_op(ids[0]))),
        check_op("vecmat", vec![vec3.clone(), mat32.clone()], |t, ids| {
            t.vecmat(ids[0], ids[1])
        }),
        check_op(
            "affine(matrix)",
            vec![mat23.clone(), mat32.clone(), bias2.clone()],
            |t, ids| t.affine(ids[0], ids[1], ids[2]),
        ),
        check_op(
            "affine(vector)",
            vec![vec3.clone(), mat32.clone(), bias2.clone()],
            |t, ids| t.affine(ids[0], ids[1], ids[2]),
        ),
        check_op(
            "concat(axis 0)",
            vec![vec3.clone(), vec3b.clone()],
            |t, ids| t.concat(ids[0], ids[1], 0),
        ),
        check_op(
            "concat(axis 1)",
            vec![mat23.clone(), mat23b.clone()],
            |t, ids| t.concat(ids[0], ids[1], 1),
        ),
        check_op(
            "stack_rows",
            vec![vec3.clone(), vec3b.clone()],
            |t, ids| t.stack_rows(ids),
        ),
        check_op("row", vec![mat23.clone()], |t, ids| t.row(ids[0], 1)),
        check_op("gather_rows", vec![table.clone()], |t, ids| {
            t.gather_rows(ids[0], &[0, 2, 2, 4])
        }),
        check_op("gather_elems", vec![mat23.clone()], |t, ids| {
            t.gather_elems(ids[0], &[(0, 1), (1, 2), (0, 1)])
        }),
        check_op("elem", vec![vec3.clone()], |t, ids| t.elem(ids[0], 2)),
        check_op("scale", vec![mat23.clone()], |t, ids| Ok(t.scale(ids[0], -1.7))),
        check_op("log_sum_exp", vec![vec3.clone()], |t, ids| {
            t.log_sum_exp(ids[0])
        }),
        check_op("log_sum_exp_cols", vec![mat33.clone()], |t, ids| {
            t.log_sum_exp_cols(ids[0])
        }),
        check_op(
            "add_col",
            vec![mat33.clone(), vec3.clone()],
            |t, ids| t.add_col(ids[0], ids[1]),
        ),
        check_op("dropout", vec![mat23.clone()], |t, ids| {
            // Fixed seed per evaluation makes the mask deterministic.
            let mut mask_rng = ChaCha8Rng::seed_from_u64(77);
            t.dropout(ids[0], 0.4, true, &mut mask_rng)
        }),
    ];

    // The assembled LSTM cell as one composed unit.
    let mut cell_inputs = Vec::new();
    for _ in 0..4 {
        cell_inputs.push(uniform(&[2, 3], 0.6, &mut rng)); // wx
    }
    for _ in 0..4 {
        cell_inputs.push(uniform(&[3, 3], 0.6, &mut rng)); // wh
    }
    for _ in 0..4 {
        cell_inputs.push(uniform(&[3], 0.6, &mut rng)); // b
    }
    cell_inputs.push(uniform(&[2], 0.6, &mut rng)); // x
    reports.push(check_op("lstm_cell", cell_inputs, |t, ids| {
        let w = LstmWeights {
            wx: [ids[0], ids[1], ids[2], ids[3]],
            wh: [ids[4], ids[5], ids[6], ids[7]],
            b: [ids[8], ids[9], ids[10], ids[11]],
        };
        let state = LstmState {
            h: t.leaf(Tensor::zeros(&[3])),
            c: t.leaf(Tensor::zeros(&[3])),
        };
        let next = lstm_cell_step(t, ids[12], state, &w)?;
        t.concat(next.h, next.c, 0)
    }));

    // CRF NLL against its emissions and all three parameter tensors.
    let crf_inputs = vec![
        uniform(&[4, 3], 1.0, &mut rng),
        uniform(&[3, 3], 1.0, &mut rng),
        uniform(&[3], 1.0, &mut rng),
        uniform(&[3], 1.0, &mut rng),
    ];
    reports.push(check_op("crf_nll", crf_inputs, |t, ids| {
        let crf = crate::crf::CrfNodes {
            transitions: ids[1],
            start: ids[2],
            end: ids[3],
        };
        crate::crf::nll_on_tape(t, ids[0], &[1, 2, 0, 1], &crf)
    }));

    reports
}

fn group_of(name: &str) -> &'static str {
    if name == "word_table" {
        "word_table"
    } else if name == "char_table" {
        "char_table"
    } else if name.starts_with("char.") {
        "char_lstm"
    } else if name.starts_with("enc") {
        "encoder"
    } else if name.starts_with("dense.") {
        "dense"
    } else {
        "crf"
    }
}

/// Builds a tiny random model, computes the full NLL gradient of a 3-token
/// sentence, and compares every parameter group against central finite
/// differences. `corrupt_gradient` perturbs one analytic entry first (test
/// hook for the failure path).
pub fn model_report(seed: u64, corrupt_gradient: bool) -> Result<Vec<CheckReport>> {
    let corpus = vec![
        Sentence::new(
            vec!["the".into(), "Brell".into(), "Survey".into()],
            vec![Tag::Outside, Tag::Begin, Tag::Inside],
        )?,
        Sentence::new(
            vec!["plain".into(), "words".into()],
            vec![Tag::Outside, Tag::Outside],
        )?,
    ];
    let config = ModelConfig {
        word_dim: 4,
        char_dim: 3,
        char_hidden: 2,
        encoder_hidden: 3,
        encoder_layers: 1,
        dropout: 0.0,
        seed,
        ..ModelConfig::default()
    };
    let (mut model, _) = build_model(config, &corpus, None)?;
    let sentence = encode(&corpus[0], &model.word_vocab, &model.char_vocab);

    model.sentence_nll_with_grads(&sentence)?;
    if corrupt_gradient {
        let slot = model.params_mut().last_mut().expect("model has parameters");
        slot.grad.data_mut()[0] += 1.0;
    }

    // Group parameters into contiguous name-prefixed ranges.
    let names: Vec<String> = model.params().iter().map(|p| p.name.clone()).collect();
    let mut groups: Vec<(&'static str, std::ops::Range<usize>)> = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let group = group_of(name);
        match groups.last_mut() {
            Some((g, range)) if *g == group => range.end = i + 1,
            _ => groups.push((group, i..i + 1)),
        }
    }

    let mut reports = Vec::new();
    for (group, range) in groups {
        // Fresh copy per group: grad_check's last restore only reaches the
        // probe on the next evaluation, so a shared probe would leak an
        // eps-sized perturbation into the following group.
        let mut probe = model.clone();
        let mut slice: Vec<Parameter> = model.params()[range.clone()].to_vec();
        let base = range.start;
        let err = grad_check(
            |ps: &[Parameter]| {
                for (offset, p) in ps.iter().enumerate() {
                    probe.params_mut()[base + offset].value = p.value.clone();
                }
                probe
                    .sentence_nll(&sentence)
                    .expect("loss evaluates on perturbed parameters")
            },
            &mut slice,
            1e-5,
        );
        reports.push(CheckReport {
            name: group.to_string(),
            max_rel_error: err,
        });
    }
    Ok(reports)
}
