//! Gated recurrent unit and its bidirectional wrapper.
//!
//! Per step, with `h_0 = 0` and row-vector inputs:
//!
//! ```text
//! z_t  = σ(x_t W_z + h_{t-1} U_z + b_z)
//! r_t  = σ(x_t W_r + h_{t-1} U_r + b_r)
//! h̃_t  = tanh(x_t W_h + (r_t ⊙ h_{t-1}) U_h + b_h)
//! h_t  = (1 - z_t) ⊙ h_{t-1} + z_t ⊙ h̃_t
//! ```
//!
//! The backward direction runs the same cell on the time-reversed input with
//! its own parameters; the bidirectional output at step `t` is
//! `[forward_t ; backward_t]` with the backward states re-reversed.

use rand::Rng;

use crate::num::linalg::{mat_vec_t_acc, outer_acc, vec_mat_acc};
use crate::num::{glorot_uniform, sigmoid, Real, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct GruParams<F> {
    pub w_z: Tensor<F>,
    pub w_r: Tensor<F>,
    pub w_h: Tensor<F>,
    pub u_z: Tensor<F>,
    pub u_r: Tensor<F>,
    pub u_h: Tensor<F>,
    pub b_z: Tensor<F>,
    pub b_r: Tensor<F>,
    pub b_h: Tensor<F>,
}

pub const GRU_TENSOR_NAMES: [&str; 9] = ["w_z", "w_r", "w_h", "u_z", "u_r", "u_h", "b_z", "b_r", "b_h"];

impl<F: Real> GruParams<F> {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        GruParams {
            w_z: Tensor::zeros(&[input, hidden]),
            w_r: Tensor::zeros(&[input, hidden]),
            w_h: Tensor::zeros(&[input, hidden]),
            u_z: Tensor::zeros(&[hidden, hidden]),
            u_r: Tensor::zeros(&[hidden, hidden]),
            u_h: Tensor::zeros(&[hidden, hidden]),
            b_z: Tensor::zeros(&[hidden]),
            b_r: Tensor::zeros(&[hidden]),
            b_h: Tensor::zeros(&[hidden]),
        }
    }

    /// Glorot-uniform weights with fans `(input, hidden)` and
    /// `(hidden, hidden)`; zero biases.
    pub fn init(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        GruParams {
            w_z: glorot_uniform(&[input, hidden], None, rng),
            w_r: glorot_uniform(&[input, hidden], None, rng),
            w_h: glorot_uniform(&[input, hidden], None, rng),
            u_z: glorot_uniform(&[hidden, hidden], None, rng),
            u_r: glorot_uniform(&[hidden, hidden], None, rng),
            u_h: glorot_uniform(&[hidden, hidden], None, rng),
            b_z: Tensor::zeros(&[hidden]),
            b_r: Tensor::zeros(&[hidden]),
            b_h: Tensor::zeros(&[hidden]),
        }
    }

    pub fn hidden(&self) -> usize {
        self.b_z.len()
    }

    pub fn input(&self) -> usize {
        self.w_z.rows()
    }

    pub fn tensors(&self) -> [&Tensor<F>; 9] {
        [
            &self.w_z, &self.w_r, &self.w_h, &self.u_z, &self.u_r, &self.u_h, &self.b_z,
            &self.b_r, &self.b_h,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor<F>; 9] {
        [
            &mut self.w_z,
            &mut self.w_r,
            &mut self.w_h,
            &mut self.u_z,
            &mut self.u_r,
            &mut self.u_h,
            &mut self.b_z,
            &mut self.b_r,
            &mut self.b_h,
        ]
    }
}

/// Everything the backward pass needs from one direction.
#[derive(Debug, Clone)]
pub struct GruCache<F> {
    /// Hidden states `h_0..h_T`, shape `[(T+1) x H]`.
    pub states: Tensor<F>,
    pub update: Tensor<F>,
    pub reset: Tensor<F>,
    pub candidate: Tensor<F>,
}

/// Returns the hidden states `[T x H]` (without `h_0`) and the cache.
pub fn gru_fwd<F: Real>(x: &Tensor<F>, p: &GruParams<F>) -> (Tensor<F>, GruCache<F>) {
    let steps = x.rows();
    let hidden = p.hidden();
    let mut states = Tensor::zeros(&[steps + 1, hidden]);
    let mut update = Tensor::zeros(&[steps, hidden]);
    let mut reset = Tensor::zeros(&[steps, hidden]);
    let mut candidate = Tensor::zeros(&[steps, hidden]);
    let mut a_z = vec![F::zero(); hidden];
    let mut a_r = vec![F::zero(); hidden];
    let mut a_h = vec![F::zero(); hidden];
    let mut gated = vec![F::zero(); hidden];
    for t in 0..steps {
        let xt = x.row(t);
        let h_prev = states.row(t).to_vec();
        a_z.copy_from_slice(p.b_z.data());
        a_r.copy_from_slice(p.b_r.data());
        a_h.copy_from_slice(p.b_h.data());
        vec_mat_acc(xt, p.w_z.data(), hidden, &mut a_z);
        vec_mat_acc(xt, p.w_r.data(), hidden, &mut a_r);
        vec_mat_acc(xt, p.w_h.data(), hidden, &mut a_h);
        vec_mat_acc(&h_prev, p.u_z.data(), hidden, &mut a_z);
        vec_mat_acc(&h_prev, p.u_r.data(), hidden, &mut a_r);
        for j in 0..hidden {
            a_z[j] = sigmoid(a_z[j]);
            a_r[j] = sigmoid(a_r[j]);
            gated[j] = a_r[j] * h_prev[j];
        }
        vec_mat_acc(&gated, p.u_h.data(), hidden, &mut a_h);
        let h_next = states.row_mut(t + 1);
        for j in 0..hidden {
            a_h[j] = a_h[j].tanh();
            h_next[j] = (F::one() - a_z[j]) * h_prev[j] + a_z[j] * a_h[j];
        }
        update.row_mut(t).copy_from_slice(&a_z);
        reset.row_mut(t).copy_from_slice(&a_r);
        candidate.row_mut(t).copy_from_slice(&a_h);
    }
    let mut out = Tensor::zeros(&[steps, hidden]);
    out.data_mut()
        .copy_from_slice(&states.data()[hidden..]);
    (
        out,
        GruCache {
            states,
            update,
            reset,
            candidate,
        },
    )
}

/// Backpropagation through time. `dh` is the gradient w.r.t. the emitted
/// states `[T x H]`; returns `dx` and accumulates into `grads`.
pub fn gru_bwd<F: Real>(
    x: &Tensor<F>,
    p: &GruParams<F>,
    cache: &GruCache<F>,
    dh: &Tensor<F>,
    grads: &mut GruParams<F>,
) -> Tensor<F> {
    let steps = x.rows();
    let hidden = p.hidden();
    let mut dx = x.zeros_like();
    let mut carry = vec![F::zero(); hidden];
    let mut da_z = vec![F::zero(); hidden];
    let mut da_r = vec![F::zero(); hidden];
    let mut da_h = vec![F::zero(); hidden];
    let mut gated = vec![F::zero(); hidden];
    let mut dgated = vec![F::zero(); hidden];
    for t in (0..steps).rev() {
        let h_prev = cache.states.row(t);
        let z = cache.update.row(t);
        let r = cache.reset.row(t);
        let cand = cache.candidate.row(t);
        let mut dh_prev = vec![F::zero(); hidden];
        for j in 0..hidden {
            let g = dh.row(t)[j] + carry[j];
            let dz = g * (cand[j] - h_prev[j]);
            let dcand = g * z[j];
            dh_prev[j] = g * (F::one() - z[j]);
            da_z[j] = dz * z[j] * (F::one() - z[j]);
            da_h[j] = dcand * (F::one() - cand[j] * cand[j]);
            gated[j] = r[j] * h_prev[j];
        }
        // Candidate path.
        dgated.iter_mut().for_each(|v| *v = F::zero());
        mat_vec_t_acc(p.u_h.data(), &da_h, hidden, &mut dgated);
        for j in 0..hidden {
            let dr = dgated[j] * h_prev[j];
            dh_prev[j] += dgated[j] * r[j];
            da_r[j] = dr * r[j] * (F::one() - r[j]);
        }
        let xt = x.row(t);
        outer_acc(xt, &da_z, grads.w_z.data_mut());
        outer_acc(xt, &da_r, grads.w_r.data_mut());
        outer_acc(xt, &da_h, grads.w_h.data_mut());
        outer_acc(h_prev, &da_z, grads.u_z.data_mut());
        outer_acc(h_prev, &da_r, grads.u_r.data_mut());
        outer_acc(&gated, &da_h, grads.u_h.data_mut());
        for j in 0..hidden {
            grads.b_z.data_mut()[j] += da_z[j];
            grads.b_r.data_mut()[j] += da_r[j];
            grads.b_h.data_mut()[j] += da_h[j];
        }
        mat_vec_t_acc(p.u_z.data(), &da_z, hidden, &mut dh_prev);
        mat_vec_t_acc(p.u_r.data(), &da_r, hidden, &mut dh_prev);
        let dxt = dx.row_mut(t);
        mat_vec_t_acc(p.w_z.data(), &da_z, hidden, dxt);
        mat_vec_t_acc(p.w_r.data(), &da_r, hidden, dxt);
        mat_vec_t_acc(p.w_h.data(), &da_h, hidden, dxt);
        carry = dh_prev;
    }
    dx
}

pub(crate) fn reverse_rows<F: Real>(x: &Tensor<F>) -> Tensor<F> {
    let mut out = x.zeros_like();
    let n = x.rows();
    for t in 0..n {
        out.row_mut(t).copy_from_slice(x.row(n - 1 - t));
    }
    out
}

#[derive(Debug, Clone)]
pub struct BiGruCache<F> {
    pub forward: GruCache<F>,
    pub backward: GruCache<F>,
    pub reversed_input: Tensor<F>,
}

/// `[T x In]` to `[T x 2H]`.
pub fn bigru_fwd<F: Real>(
    x: &Tensor<F>,
    fwd: &GruParams<F>,
    bwd: &GruParams<F>,
) -> (Tensor<F>, BiGruCache<F>) {
    let steps = x.rows();
    let hidden = fwd.hidden();
    let (hf, cf) = gru_fwd(x, fwd);
    let reversed_input = reverse_rows(x);
    let (hb_rev, cb) = gru_fwd(&reversed_input, bwd);
    let mut out = Tensor::zeros(&[steps, 2 * hidden]);
    for t in 0..steps {
        let row = out.row_mut(t);
        row[..hidden].copy_from_slice(hf.row(t));
        row[hidden..].copy_from_slice(hb_rev.row(steps - 1 - t));
    }
    (
        out,
        BiGruCache {
            forward: cf,
            backward: cb,
            reversed_input,
        },
    )
}

pub fn bigru_bwd<F: Real>(
    x: &Tensor<F>,
    fwd: &GruParams<F>,
    bwd: &GruParams<F>,
    cache: &BiGruCache<F>,
    dout: &Tensor<F>,
    dfwd: &mut GruParams<F>,
    dbwd: &mut GruParams<F>,
) -> Tensor<F> {
    let steps = x.rows();
    let hidden = fwd.hidden();
    let mut dhf = Tensor::zeros(&[steps, hidden]);
    let mut dhb_rev = Tensor::zeros(&[steps, hidden]);
    for t in 0..steps {
        let row = dout.row(t);
        dhf.row_mut(t).copy_from_slice(&row[..hidden]);
        dhb_rev.row_mut(steps - 1 - t).copy_from_slice(&row[hidden..]);
    }
    let mut dx = gru_bwd(x, fwd, &cache.forward, &dhf, dfwd);
    let dx_rev = gru_bwd(&cache.reversed_input, bwd, &cache.backward, &dhb_rev, dbwd);
    for t in 0..steps {
        for (d, &g) in dx.row_mut(t).iter_mut().zip(dx_rev.row(steps - 1 - t)) {
            *d += g;
        }
    }
    dx
}
