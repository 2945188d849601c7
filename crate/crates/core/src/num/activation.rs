use crate::num::{Real, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Sigmoid,
    Tanh,
    Relu,
    /// Normalises over the last axis.
    Softmax,
}

/// Logistic function, evaluated without overflow for large `|x|`.
#[inline]
pub fn sigmoid<F: Real>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

#[inline]
pub fn sigmoid_grad_from_output<F: Real>(y: F) -> F {
    y * (F::one() - y)
}

#[inline]
pub fn tanh_grad_from_output<F: Real>(y: F) -> F {
    F::one() - y * y
}

#[inline]
pub fn relu<F: Real>(x: F) -> F {
    if x > F::zero() {
        x
    } else {
        F::zero()
    }
}

/// Subgradient 0 at the kink.
#[inline]
pub fn relu_grad<F: Real>(x: F) -> F {
    if x > F::zero() {
        F::one()
    } else {
        F::zero()
    }
}

/// In-place stable softmax over a single slice.
pub fn softmax<F: Real>(xs: &mut [F]) {
    let max = xs.iter().copied().fold(F::neg_infinity(), F::max);
    let mut total = F::zero();
    for v in xs.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in xs.iter_mut() {
        *v /= total;
    }
}

/// Gradient of the logits given softmax output `y` and upstream `dy`.
pub fn softmax_backward<F: Real>(y: &[F], dy: &[F]) -> Vec<F> {
    let inner: F = y.iter().zip(dy).map(|(&a, &b)| a * b).sum();
    y.iter().zip(dy).map(|(&a, &b)| a * (b - inner)).collect()
}

pub fn activate<F: Real>(x: &Tensor<F>, kind: Activation) -> Tensor<F> {
    match kind {
        Activation::Sigmoid => x.map(sigmoid),
        Activation::Tanh => x.map(|v| v.tanh()),
        Activation::Relu => x.map(relu),
        Activation::Softmax => {
            let mut out = x.clone();
            let width = *x.shape().last().unwrap_or(&1);
            if width > 0 {
                for chunk in out.data_mut().chunks_mut(width) {
                    softmax(chunk);
                }
            }
            out
        }
    }
}

/// Backward pass of [`activate`]: takes the forward input `x`, its output `y`
/// and the upstream gradient `dy`.
pub fn activate_backward<F: Real>(
    x: &Tensor<F>,
    y: &Tensor<F>,
    dy: &Tensor<F>,
    kind: Activation,
) -> Tensor<F> {
    let mut dx = dy.clone();
    match kind {
        Activation::Sigmoid => {
            for (d, &o) in dx.data_mut().iter_mut().zip(y.data()) {
                *d *= sigmoid_grad_from_output(o);
            }
        }
        Activation::Tanh => {
            for (d, &o) in dx.data_mut().iter_mut().zip(y.data()) {
                *d *= tanh_grad_from_output(o);
            }
        }
        Activation::Relu => {
            for (d, &i) in dx.data_mut().iter_mut().zip(x.data()) {
                *d *= relu_grad(i);
            }
        }
        Activation::Softmax => {
            let width = *x.shape().last().unwrap_or(&1);
            for ((dchunk, ychunk), gchunk) in dx
                .data_mut()
                .chunks_mut(width)
                .zip(y.data().chunks(width))
                .zip(dy.data().chunks(width))
            {
                dchunk.copy_from_slice(&softmax_backward(ychunk, gchunk));
            }
        }
    }
    dx
}
