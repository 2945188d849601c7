use crate::num::linalg::{axpy, dot};
use crate::num::{sigmoid, Real, Tensor};

/// `σ(w·x + b)`. Returns `(probability, logit)`.
pub fn dense_sigmoid_fwd<F: Real>(x: &Tensor<F>, w: &Tensor<F>, b: &Tensor<F>) -> (F, F) {
    let logit = dot(w.data(), x.data()) + b.data()[0];
    (sigmoid(logit), logit)
}

/// Backward from the logit gradient. Returns `dx`.
pub fn dense_sigmoid_bwd<F: Real>(
    x: &Tensor<F>,
    w: &Tensor<F>,
    dlogit: F,
    dw: &mut Tensor<F>,
    db: &mut Tensor<F>,
) -> Tensor<F> {
    axpy(dlogit, x.data(), dw.data_mut());
    db.data_mut()[0] += dlogit;
    let mut dx = x.zeros_like();
    axpy(dlogit, w.data(), dx.data_mut());
    dx
}
