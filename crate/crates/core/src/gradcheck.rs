//! Finite-difference verification of every backward pass.
//!
//! Each check draws a random toy configuration (sequence length ≤ 8, widths
//! ≤ 4), evaluates a scalar objective `Σ G ⊙ layer(x)` for a random upstream
//! gradient `G`, and compares the hand-written backward pass against
//! 64-bit central differences for the input and for every parameter.

use rand::Rng;

use crate::layers::{self, GruParams};
use crate::model::{Model, ModelConfig, ModelParams};
use crate::num::{finite_diff_grad, rel_err, uniform, Prng, RngState, Stream, Tensor};
use crate::trainer::bce_loss;

pub const TOLERANCE: f64 = 1e-4;
pub const STEP: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub configs: usize,
    pub max_rel_err: f64,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.max_rel_err <= TOLERANCE
    }
}

type CheckFn = fn(&mut Prng) -> f64;

const CHECKS: [(&str, CheckFn); 11] = [
    ("embedding", check_embedding),
    ("conv1d+relu", check_conv),
    ("maxpool", check_maxpool),
    ("gru", check_gru),
    ("bigru", check_bigru),
    ("attention", check_attention),
    ("global_avg_pool", check_gap),
    ("dropout", check_dropout),
    ("dense+sigmoid", check_dense),
    ("bce_loss", check_bce),
    ("end_to_end", check_end_to_end),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(n, _)| *n).collect()
}

/// Runs every check on `configs` random configurations each.
pub fn run_suite(seed: u64, configs: usize) -> Vec<CheckOutcome> {
    CHECKS
        .iter()
        .enumerate()
        .map(|(i, (name, check))| {
            let mut rng = RngState::new(seed).substream(Stream::Sampling, i as u64);
            let max_rel_err = (0..configs).map(|_| check(&mut rng)).fold(0.0, nan_max);
            CheckOutcome {
                name,
                configs,
                max_rel_err,
            }
        })
        .collect()
}

pub fn max_rel_err(analytic: &Tensor<f64>, numeric: &Tensor<f64>) -> f64 {
    assert_eq!(analytic.shape(), numeric.shape());
    analytic
        .data()
        .iter()
        .zip(numeric.data())
        .map(|(&a, &n)| rel_err(a, n))
        .fold(0.0, nan_max)
}

/// Like `f64::max`, but a NaN anywhere wins so broken gradients fail.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

fn weighted_sum(out: &Tensor<f64>, g: &Tensor<f64>) -> f64 {
    out.data().iter().zip(g.data()).map(|(a, b)| a * b).sum()
}

fn dim(rng: &mut Prng, lo: usize, hi: usize) -> usize {
    rng.gen_range(lo..=hi)
}

fn check_embedding(rng: &mut Prng) -> f64 {
    let vocab = dim(rng, 2, 6);
    let d = dim(rng, 1, 4);
    let t = dim(rng, 1, 8);
    let ids: Vec<u32> = (0..t).map(|_| rng.gen_range(0..vocab as u32)).collect();
    let table = uniform::<f64>(&[vocab, d], 1.0, rng);
    let g = uniform::<f64>(&[t, d], 1.0, rng);
    let mut analytic = table.zeros_like();
    layers::embed_bwd(&ids, &g, &mut analytic);
    let numeric = finite_diff_grad(
        |e| weighted_sum(&layers::embed_fwd(&ids, e).unwrap(), &g),
        &table,
        STEP,
    );
    max_rel_err(&analytic, &numeric)
}

fn check_conv(rng: &mut Prng) -> f64 {
    let kernel = dim(rng, 1, 5);
    let t = dim(rng, kernel, 8);
    let (c_in, c_out) = (dim(rng, 1, 4), dim(rng, 1, 4));
    let x = uniform::<f64>(&[t, c_in], 1.0, rng);
    let w = uniform::<f64>(&[kernel, c_in, c_out], 1.0, rng);
    let b = uniform::<f64>(&[c_out], 0.5, rng);
    let g = uniform::<f64>(&[t - kernel + 1, c_out], 1.0, rng);
    let (_, pre) = layers::conv1d_fwd(&x, &w, &b).unwrap();
    let (mut dw, mut db) = (w.zeros_like(), b.zeros_like());
    let dx = layers::conv1d_bwd(&x, &w, &pre, &g, &mut dw, &mut db);
    let f = |x: &Tensor<f64>, w: &Tensor<f64>, b: &Tensor<f64>| {
        weighted_sum(&layers::conv1d_fwd(x, w, b).unwrap().0, &g)
    };
    [
        max_rel_err(&dx, &finite_diff_grad(|v| f(v, &w, &b), &x, STEP)),
        max_rel_err(&dw, &finite_diff_grad(|v| f(&x, v, &b), &w, STEP)),
        max_rel_err(&db, &finite_diff_grad(|v| f(&x, &w, v), &b, STEP)),
    ]
    .into_iter()
    .fold(0.0, nan_max)
}

fn check_maxpool(rng: &mut Prng) -> f64 {
    let t = dim(rng, 2, 8);
    let c = dim(rng, 1, 4);
    let x = uniform::<f64>(&[t, c], 1.0, rng);
    let g = uniform::<f64>(&[t / 2, c], 1.0, rng);
    let (_, arg) = layers::maxpool1d_fwd(&x, 2);
    let dx = layers::maxpool1d_bwd(&g, &arg, x.shape());
    let numeric = finite_diff_grad(|v| weighted_sum(&layers::maxpool1d_fwd(v, 2).0, &g), &x, STEP);
    max_rel_err(&dx, &numeric)
}

fn random_gru(rng: &mut Prng, input: usize, hidden: usize) -> GruParams<f64> {
    let mut p = GruParams::zeros(input, hidden);
    for t in p.tensors_mut() {
        *t = uniform(t.shape(), 0.8, rng);
    }
    p
}

fn with_gru_tensor(p: &GruParams<f64>, k: usize, v: &Tensor<f64>) -> GruParams<f64> {
    let mut q = p.clone();
    *q.tensors_mut()[k] = v.clone();
    q
}

fn check_gru(rng: &mut Prng) -> f64 {
    let t = dim(rng, 1, 8);
    let (input, hidden) = (dim(rng, 1, 4), dim(rng, 1, 4));
    let x = uniform::<f64>(&[t, input], 1.0, rng);
    let p = random_gru(rng, input, hidden);
    let g = uniform::<f64>(&[t, hidden], 1.0, rng);
    let (_, cache) = layers::gru_fwd(&x, &p);
    let mut grads = GruParams::zeros(input, hidden);
    let dx = layers::gru_bwd(&x, &p, &cache, &g, &mut grads);
    let f = |x: &Tensor<f64>, p: &GruParams<f64>| weighted_sum(&layers::gru_fwd(x, p).0, &g);
    let mut worst = max_rel_err(&dx, &finite_diff_grad(|v| f(v, &p), &x, STEP));
    for (k, (analytic, param)) in grads.tensors().into_iter().zip(p.tensors()).enumerate() {
        let numeric = finite_diff_grad(|v| f(&x, &with_gru_tensor(&p, k, v)), param, STEP);
        worst = worst.max(max_rel_err(analytic, &numeric));
    }
    worst
}

fn check_bigru(rng: &mut Prng) -> f64 {
    let t = dim(rng, 1, 8);
    let (input, hidden) = (dim(rng, 1, 4), dim(rng, 1, 4));
    let x = uniform::<f64>(&[t, input], 1.0, rng);
    let pf = random_gru(rng, input, hidden);
    let pb = random_gru(rng, input, hidden);
    let g = uniform::<f64>(&[t, 2 * hidden], 1.0, rng);
    let (_, cache) = layers::bigru_fwd(&x, &pf, &pb);
    let mut gf = GruParams::zeros(input, hidden);
    let mut gb = GruParams::zeros(input, hidden);
    let dx = layers::bigru_bwd(&x, &pf, &pb, &cache, &g, &mut gf, &mut gb);
    let f = |x: &Tensor<f64>, pf: &GruParams<f64>, pb: &GruParams<f64>| {
        weighted_sum(&layers::bigru_fwd(x, pf, pb).0, &g)
    };
    let mut worst = max_rel_err(&dx, &finite_diff_grad(|v| f(v, &pf, &pb), &x, STEP));
    for k in 0..9 {
        let nf = finite_diff_grad(|v| f(&x, &with_gru_tensor(&pf, k, v), &pb), pf.tensors()[k], STEP);
        let nb = finite_diff_grad(|v| f(&x, &pf, &with_gru_tensor(&pb, k, v)), pb.tensors()[k], STEP);
        worst = worst
            .max(max_rel_err(gf.tensors()[k], &nf))
            .max(max_rel_err(gb.tensors()[k], &nb));
    }
    worst
}

fn check_attention(rng: &mut Prng) -> f64 {
    let t = dim(rng, 1, 8);
    let (d, a) = (dim(rng, 1, 4), dim(rng, 1, 4));
    let x = uniform::<f64>(&[t, d], 1.0, rng);
    let w = uniform::<f64>(&[d, a], 1.0, rng);
    let b = uniform::<f64>(&[a], 0.5, rng);
    let v = uniform::<f64>(&[a], 1.5, rng);
    let g = uniform::<f64>(&[t, d], 1.0, rng);
    let (_, cache) = layers::attention_fwd(&x, &w, &b, &v);
    let (mut dw, mut db, mut dv) = (w.zeros_like(), b.zeros_like(), v.zeros_like());
    let dx = layers::attention_bwd(&x, &w, &v, &cache, &g, &mut dw, &mut db, &mut dv);
    let f = |x: &Tensor<f64>, w: &Tensor<f64>, b: &Tensor<f64>, v: &Tensor<f64>| {
        weighted_sum(&layers::attention_fwd(x, w, b, v).0, &g)
    };
    [
        max_rel_err(&dx, &finite_diff_grad(|z| f(z, &w, &b, &v), &x, STEP)),
        max_rel_err(&dw, &finite_diff_grad(|z| f(&x, z, &b, &v), &w, STEP)),
        max_rel_err(&db, &finite_diff_grad(|z| f(&x, &w, z, &v), &b, STEP)),
        max_rel_err(&dv, &finite_diff_grad(|z| f(&x, &w, &b, z), &v, STEP)),
    ]
    .into_iter()
    .fold(0.0, nan_max)
}

fn check_gap(rng: &mut Prng) -> f64 {
    let (t, d) = (dim(rng, 1, 8), dim(rng, 1, 4));
    let x = uniform::<f64>(&[t, d], 1.0, rng);
    let g = uniform::<f64>(&[d], 1.0, rng);
    let dx = layers::gap_bwd(&g, t);
    let numeric = finite_diff_grad(|v| weighted_sum(&layers::gap_fwd(v), &g), &x, STEP);
    max_rel_err(&dx, &numeric)
}

fn check_dropout(rng: &mut Prng) -> f64 {
    let d = dim(rng, 1, 8);
    let p = rng.gen_range(0.0..0.9);
    let mask_seed: u64 = rng.gen();
    let x = uniform::<f64>(&[d], 1.0, rng);
    let g = uniform::<f64>(&[d], 1.0, rng);
    let run = |x: &Tensor<f64>| {
        let mut r = RngState::new(mask_seed).stream(Stream::Dropout);
        layers::dropout_fwd(x, p, Some(&mut r)).unwrap()
    };
    let (_, mask) = run(&x);
    let dx = layers::dropout_bwd(&g, mask.as_deref());
    let numeric = finite_diff_grad(|v| weighted_sum(&run(v).0, &g), &x, STEP);
    max_rel_err(&dx, &numeric)
}

fn check_dense(rng: &mut Prng) -> f64 {
    let d = dim(rng, 1, 8);
    let x = uniform::<f64>(&[d], 1.0, rng);
    let w = uniform::<f64>(&[d], 1.0, rng);
    let b = uniform::<f64>(&[1], 1.0, rng);
    let g: f64 = rng.gen_range(-1.0..1.0);
    let (p, _) = layers::dense_sigmoid_fwd(&x, &w, &b);
    let (mut dw, mut db) = (w.zeros_like(), b.zeros_like());
    let dx = layers::dense_sigmoid_bwd(&x, &w, g * p * (1.0 - p), &mut dw, &mut db);
    let f = |x: &Tensor<f64>, w: &Tensor<f64>, b: &Tensor<f64>| g * layers::dense_sigmoid_fwd(x, w, b).0;
    [
        max_rel_err(&dx, &finite_diff_grad(|v| f(v, &w, &b), &x, STEP)),
        max_rel_err(&dw, &finite_diff_grad(|v| f(&x, v, &b), &w, STEP)),
        max_rel_err(&db, &finite_diff_grad(|v| f(&x, &w, v), &b, STEP)),
    ]
    .into_iter()
    .fold(0.0, nan_max)
}

fn check_bce(rng: &mut Prng) -> f64 {
    let p = rng.gen_range(0.02..0.98);
    let y = if rng.gen::<bool>() { 1.0 } else { 0.0 };
    let (_, analytic) = bce_loss(p, y);
    let x = Tensor::scalar(p);
    let numeric = finite_diff_grad(|v| bce_loss(v.data()[0], y).0, &x, STEP);
    rel_err(analytic, numeric.data()[0])
}

/// Random toy architecture within the suite's size limits.
pub fn random_toy_config(rng: &mut Prng) -> ModelConfig {
    let kernel_size = dim(rng, 1, 3);
    let pool_size = 2;
    let max_len = dim(rng, kernel_size + pool_size - 1, 8);
    ModelConfig {
        vocab_size: dim(rng, 3, 6),
        max_len,
        embed_dim: dim(rng, 1, 4),
        conv_filters: dim(rng, 1, 4),
        kernel_size,
        pool_size,
        gru_units: dim(rng, 1, 4),
        attention_width: dim(rng, 1, 4),
        dropout: rng.gen_range(0.0..0.6),
    }
}

/// Loss of the whole network (training mode, fixed dropout mask) against
/// central differences for every parameter tensor.
pub fn end_to_end_max_err(model: &Model<f64>, ids: &[u32], label: f64, mask_seed: u64) -> f64 {
    let loss = |params: &ModelParams<f64>| {
        let m = Model {
            config: model.config,
            params: params.clone(),
        };
        let mut r = RngState::new(mask_seed).stream(Stream::Dropout);
        let tr = m.forward(ids, Some(&mut r)).unwrap();
        bce_loss(tr.prob, label).0
    };
    let mut r = RngState::new(mask_seed).stream(Stream::Dropout);
    let trace = model.forward(ids, Some(&mut r)).unwrap();
    let (_, dprob) = bce_loss(trace.prob, label);
    let mut grads = ModelParams::zeros(&model.config);
    model.backward(&trace, dprob * trace.prob * (1.0 - trace.prob), &mut grads);

    let mut worst: f64 = 0.0;
    for (k, analytic) in grads.tensors().into_iter().enumerate() {
        let numeric = finite_diff_grad(
            |v| {
                let mut p = model.params.clone();
                *p.tensors_mut()[k] = v.clone();
                loss(&p)
            },
            model.params.tensors()[k],
            STEP,
        );
        worst = worst.max(max_rel_err(analytic, &numeric));
    }
    worst
}

fn check_end_to_end(rng: &mut Prng) -> f64 {
    let config = random_toy_config(rng);
    let mut params = ModelParams::<f64>::zeros(&config);
    for t in params.tensors_mut() {
        *t = uniform(t.shape(), 0.8, rng);
    }
    let model = Model::from_params(config, params).unwrap();
    let ids: Vec<u32> = (0..config.max_len)
        .map(|_| rng.gen_range(0..config.vocab_size as u32))
        .collect();
    let label = if rng.gen::<bool>() { 1.0 } else { 0.0 };
    end_to_end_max_err(&model, &ids, label, rng.gen())
}
