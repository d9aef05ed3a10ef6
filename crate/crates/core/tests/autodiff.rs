//! Finite-difference verification for every tape operation, plus
//! structural properties of the autodiff machinery.

use std::collections::BTreeMap;

use hrgr_core::error::NumericsError;
use hrgr_core::numerics::{grad_check, Array, OpKind, Rng, Tape};
use proptest::prelude::*;

/// Build `loss = sum(op(inputs) * fixed_weights)` so that gradients are
/// non-degenerate even for ops with built-in normalization (softmax rows
/// always summing to one would otherwise zero out every gradient).
fn weighted_loss(
    kind: OpKind,
    params: &BTreeMap<String, Array>,
) -> Result<f64, NumericsError> {
    let mut tape = Tape::new();
    let ids: Vec<_> = params
        .iter()
        .map(|(name, value)| tape.param(name, value))
        .collect();
    let out = tape.forward_op(kind, &ids)?;
    let out_len = tape.value(out).len();
    let out_shape = tape.value(out).shape().to_vec();
    let weights: Vec<f64> = (0..out_len)
        .map(|i| 0.5 + 0.37 * ((i % 7) as f64) - 1.1 * ((i % 3) as f64))
        .collect();
    let w = tape.input(Array::new(out_shape, weights)?);
    let prod = tape.mul(out, w)?;
    let loss = tape.sum(prod);
    Ok(tape.value(loss).item())
}

fn check_kind(kind: OpKind, inputs: Vec<Array>, tol: f64) {
    let mut params: BTreeMap<String, Array> = inputs
        .into_iter()
        .enumerate()
        .map(|(i, a)| (format!("p{i}"), a))
        .collect();

    // Analytic gradients from one taped pass.
    let analytic = {
        let mut tape = Tape::new();
        let ids: Vec<_> = params
            .iter()
            .map(|(name, value)| tape.param(name, value))
            .collect();
        let out = tape.forward_op(kind, &ids).expect("forward");
        let out_len = tape.value(out).len();
        let out_shape = tape.value(out).shape().to_vec();
        let weights: Vec<f64> = (0..out_len)
            .map(|i| 0.5 + 0.37 * ((i % 7) as f64) - 1.1 * ((i % 3) as f64))
            .collect();
        let w = tape.input(Array::new(out_shape, weights).unwrap());
        let prod = tape.mul(out, w).unwrap();
        let loss = tape.sum(prod);
        tape.backward(loss).expect("backward")
    };

    let report = grad_check(&mut params, &analytic, 1e-5, 0, |p| weighted_loss(kind, p))
        .expect("grad check evaluation");
    assert!(
        report.passes(tol),
        "{kind:?} failed finite-difference check: {report}"
    );
}

fn rand_vec(rng: &mut Rng, n: usize) -> Array {
    Array::vector((0..n).map(|_| rng.uniform(-2.0, 2.0)).collect())
}

fn rand_mat(rng: &mut Rng, r: usize, c: usize) -> Array {
    Array::new(vec![r, c], (0..r * c).map(|_| rng.uniform(-2.0, 2.0)).collect()).unwrap()
}

/// Keep inputs away from the relu kink so central differences are valid.
fn off_kink(mut a: Array) -> Array {
    for v in a.data_mut() {
        if v.abs() < 0.15 {
            *v += 0.3;
        }
    }
    a
}

#[test]
fn matmul_all_rank_combinations_differentiate() {
    let mut rng = Rng::new(11);
    for _ in 0..5 {
        let (m, k, n) = (
            1 + rng.below(3),
            1 + rng.below(3),
            1 + rng.below(3),
        );
        check_kind(
            OpKind::Matmul,
            vec![rand_mat(&mut rng, m, k), rand_mat(&mut rng, k, n)],
            1e-6,
        );
        check_kind(
            OpKind::Matmul,
            vec![rand_mat(&mut rng, m, k), rand_vec(&mut rng, k)],
            1e-6,
        );
        check_kind(
            OpKind::Matmul,
            vec![rand_vec(&mut rng, k), rand_mat(&mut rng, k, n)],
            1e-6,
        );
        check_kind(
            OpKind::Matmul,
            vec![rand_vec(&mut rng, k), rand_vec(&mut rng, k)],
            1e-6,
        );
    }
}

#[test]
fn unary_and_binary_ops_differentiate() {
    let mut rng = Rng::new(23);
    for _ in 0..5 {
        let n = 1 + rng.below(6);
        check_kind(
            OpKind::Add,
            vec![rand_vec(&mut rng, n), rand_vec(&mut rng, n)],
            1e-6,
        );
        check_kind(
            OpKind::ElementwiseMul,
            vec![rand_vec(&mut rng, n), rand_vec(&mut rng, n)],
            1e-6,
        );
        check_kind(OpKind::Sigmoid, vec![rand_vec(&mut rng, n)], 1e-6);
        check_kind(OpKind::Tanh, vec![rand_vec(&mut rng, n)], 1e-6);
        check_kind(OpKind::Relu, vec![off_kink(rand_vec(&mut rng, n))], 1e-6);
        check_kind(
            OpKind::Affine {
                scale: rng.uniform(-2.0, 2.0),
                shift: rng.uniform(-1.0, 1.0),
            },
            vec![rand_vec(&mut rng, n)],
            1e-6,
        );
        check_kind(OpKind::Sum, vec![rand_vec(&mut rng, n)], 1e-6);
        check_kind(
            OpKind::Pick { index: rng.below(n) },
            vec![rand_vec(&mut rng, n)],
            1e-6,
        );

        // Log needs strictly positive inputs.
        let mut pos = rand_vec(&mut rng, n);
        for v in pos.data_mut() {
            *v = v.abs() + 0.5;
        }
        check_kind(OpKind::Log, vec![pos], 1e-6);
    }
}

#[test]
fn structured_ops_differentiate() {
    let mut rng = Rng::new(37);
    for _ in 0..5 {
        let (r, c) = (1 + rng.below(4), 1 + rng.below(4));
        check_kind(
            OpKind::SoftmaxLastDim,
            vec![rand_mat(&mut rng, r, c)],
            1e-6,
        );
        check_kind(OpKind::SoftmaxLastDim, vec![rand_vec(&mut rng, c)], 1e-6);
        check_kind(OpKind::MeanRows, vec![rand_mat(&mut rng, r, c)], 1e-6);
        check_kind(
            OpKind::AddRowBroadcast,
            vec![rand_mat(&mut rng, r, c), rand_vec(&mut rng, c)],
            1e-6,
        );
        check_kind(
            OpKind::EmbeddingLookup { row: rng.below(r) },
            vec![rand_mat(&mut rng, r, c)],
            1e-6,
        );
        let parts = 1 + rng.below(3);
        let mut pieces = Vec::new();
        for _ in 0..parts {
            let len = 1 + rng.below(3);
            pieces.push(rand_vec(&mut rng, len));
        }
        check_kind(OpKind::Concat, pieces, 1e-6);
    }
}

#[test]
fn composite_network_differentiates() {
    // A miniature two-layer network exercising op chaining and fan-in:
    // loss = sum(softmax(W2 tanh(W1 x + b1)) * w)
    let mut rng = Rng::new(99);
    let mut params = BTreeMap::new();
    params.insert("w1".to_string(), rand_mat(&mut rng, 4, 3));
    params.insert("b1".to_string(), rand_vec(&mut rng, 4));
    params.insert("w2".to_string(), rand_mat(&mut rng, 5, 4));
    let x = rand_vec(&mut rng, 3);

    let eval = |p: &BTreeMap<String, Array>| -> Result<(f64, hrgr_core::numerics::Gradients), NumericsError> {
        let mut tape = Tape::new();
        let w1 = tape.param("w1", &p["w1"]);
        let b1 = tape.param("b1", &p["b1"]);
        let w2 = tape.param("w2", &p["w2"]);
        let xin = tape.input(x.clone());
        let h = tape.matmul(w1, xin)?;
        let h = tape.add(h, b1)?;
        let h = tape.tanh(h);
        let logits = tape.matmul(w2, h)?;
        let probs = tape.softmax_lastdim(logits)?;
        let w = tape.input(Array::vector(vec![1.0, -2.0, 0.5, 3.0, -0.7]));
        let prod = tape.mul(probs, w)?;
        let loss = tape.sum(prod);
        let grads = tape.backward(loss)?;
        Ok((tape.value(loss).item(), grads))
    };

    let (_, analytic) = eval(&params).unwrap();
    let report = grad_check(&mut params, &analytic, 1e-5, 0, |p| eval(p).map(|(l, _)| l))
        .unwrap();
    assert!(report.passes(1e-7), "{report}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_rows_are_distributions(
        rows in 1usize..4,
        cols in 1usize..6,
        seed in 0u64..1000,
    ) {
        let mut rng = Rng::new(seed);
        let m = rand_mat(&mut rng, rows, cols);
        let mut tape = Tape::new();
        let x = tape.input(m);
        let y = tape.softmax_lastdim(x).unwrap();
        for row in tape.value(y).data().chunks(cols) {
            let total: f64 = row.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!(row.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn add_gradient_is_identity_for_both_sides(
        n in 1usize..8,
        seed in 0u64..1000,
    ) {
        let mut rng = Rng::new(seed);
        let a = rand_vec(&mut rng, n);
        let b = rand_vec(&mut rng, n);
        let mut tape = Tape::new();
        let pa = tape.param("a", &a);
        let pb = tape.param("b", &b);
        let s = tape.add(pa, pb).unwrap();
        let loss = tape.sum(s);
        let grads = tape.backward(loss).unwrap();
        prop_assert!(grads.get("a").unwrap().data().iter().all(|&g| g == 1.0));
        prop_assert!(grads.get("b").unwrap().data().iter().all(|&g| g == 1.0));
    }

    #[test]
    fn backward_is_deterministic(seed in 0u64..500) {
        let mut rng = Rng::new(seed);
        let w = rand_mat(&mut rng, 3, 3);
        let x = rand_vec(&mut rng, 3);
        let run = || {
            let mut tape = Tape::new();
            let pw = tape.param("w", &w);
            let px = tape.input(x.clone());
            let y = tape.matmul(pw, px).unwrap();
            let s = tape.sigmoid(y);
            let loss = tape.sum(s);
            tape.backward(loss).unwrap()
        };
        let g1 = run();
        let g2 = run();
        let b1: Vec<u64> = g1.get("w").unwrap().data().iter().map(|v| v.to_bits()).collect();
        let b2: Vec<u64> = g2.get("w").unwrap().data().iter().map(|v| v.to_bits()).collect();
        prop_assert_eq!(b1, b2);
    }
}
