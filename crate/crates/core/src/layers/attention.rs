//! Additive attention that keeps the sequence.
//!
//! `u_t = tanh(x_t W_a + b_a)`, `e_t = v_a · u_t`, `α = softmax(e)`, and the
//! output row is `α_t x_t`. Pooling over time happens in the next layer.

use crate::num::linalg::{dot, mat_vec_t_acc, outer_acc, vec_mat_acc};
use crate::num::{softmax, softmax_backward, Real, Tensor};

#[derive(Debug, Clone)]
pub struct AttentionCache<F> {
    /// `u_t`, shape `[T x A]`.
    pub hidden: Tensor<F>,
    /// Unnormalised scores `e_t`.
    pub scores: Vec<F>,
    /// Attention weights `α_t`.
    pub weights: Vec<F>,
}

pub fn attention_fwd<F: Real>(
    x: &Tensor<F>,
    w: &Tensor<F>,
    b: &Tensor<F>,
    v: &Tensor<F>,
) -> (Tensor<F>, AttentionCache<F>) {
    let steps = x.rows();
    let width = b.len();
    let mut hidden = Tensor::zeros(&[steps, width]);
    let mut scores = Vec::with_capacity(steps);
    for t in 0..steps {
        let u = hidden.row_mut(t);
        u.copy_from_slice(b.data());
        vec_mat_acc(x.row(t), w.data(), width, u);
        u.iter_mut().for_each(|a| *a = a.tanh());
        scores.push(dot(v.data(), u));
    }
    let mut weights = scores.clone();
    softmax(&mut weights);
    let mut out = x.clone();
    for (t, &a) in weights.iter().enumerate() {
        out.row_mut(t).iter_mut().for_each(|o| *o *= a);
    }
    (
        out,
        AttentionCache {
            hidden,
            scores,
            weights,
        },
    )
}

/// Returns `dx`; accumulates into `dw`, `db`, `dv`.
#[allow(clippy::too_many_arguments)]
pub fn attention_bwd<F: Real>(
    x: &Tensor<F>,
    w: &Tensor<F>,
    v: &Tensor<F>,
    cache: &AttentionCache<F>,
    dout: &Tensor<F>,
    dw: &mut Tensor<F>,
    db: &mut Tensor<F>,
    dv: &mut Tensor<F>,
) -> Tensor<F> {
    let steps = x.rows();
    let width = v.len();
    let mut dx = dout.clone();
    let mut dweights = Vec::with_capacity(steps);
    for t in 0..steps {
        dweights.push(dot(dout.row(t), x.row(t)));
        let a = cache.weights[t];
        dx.row_mut(t).iter_mut().for_each(|d| *d *= a);
    }
    let dscores = softmax_backward(&cache.weights, &dweights);
    let mut da = vec![F::zero(); width];
    for (t, &de) in dscores.iter().enumerate() {
        let u = cache.hidden.row(t);
        for j in 0..width {
            dv.data_mut()[j] += de * u[j];
            da[j] = de * v.data()[j] * (F::one() - u[j] * u[j]);
            db.data_mut()[j] += da[j];
        }
        outer_acc(x.row(t), &da, dw.data_mut());
        mat_vec_t_acc(w.data(), &da, width, dx.row_mut(t));
    }
    dx
}
