use crate::error::{Error, Result};
use crate::num::linalg::{mat_vec_t_acc, outer_acc, vec_mat_acc};
use crate::num::{relu, relu_grad, Real, Tensor};

/// Valid (unpadded) 1-D correlation followed by ReLU.
///
/// `x` is `[T x C_in]`, `weight` is `[K x C_in x C_out]`, `bias` is `[C_out]`.
/// Returns the activated output `[(T-K+1) x C_out]` and the pre-activation.
pub fn conv1d_fwd<F: Real>(
    x: &Tensor<F>,
    weight: &Tensor<F>,
    bias: &Tensor<F>,
) -> Result<(Tensor<F>, Tensor<F>)> {
    let (kernel, c_in, c_out) = kernel_dims(weight);
    let steps = x.rows();
    if x.row_len() != c_in {
        return Err(Error::ShapeMismatch {
            op: "conv1d",
            left: x.shape().to_vec(),
            right: weight.shape().to_vec(),
        });
    }
    if steps < kernel {
        return Err(Error::SequenceTooShort { len: steps, kernel });
    }
    let out_len = steps - kernel + 1;
    let mut pre = Tensor::zeros(&[out_len, c_out]);
    let xd = x.data();
    for t in 0..out_len {
        let window = &xd[t * c_in..(t + kernel) * c_in];
        let row = pre.row_mut(t);
        row.copy_from_slice(bias.data());
        // The window of K consecutive rows is one contiguous (K*C_in) vector.
        vec_mat_acc(window, weight.data(), c_out, row);
    }
    let out = pre.map(relu);
    Ok((out, pre))
}

/// Returns `dx`; accumulates into `dweight` and `dbias`.
pub fn conv1d_bwd<F: Real>(
    x: &Tensor<F>,
    weight: &Tensor<F>,
    pre: &Tensor<F>,
    dout: &Tensor<F>,
    dweight: &mut Tensor<F>,
    dbias: &mut Tensor<F>,
) -> Tensor<F> {
    let (kernel, c_in, c_out) = kernel_dims(weight);
    let mut dx = x.zeros_like();
    let xd = x.data();
    let mut dpre = vec![F::zero(); c_out];
    for t in 0..pre.rows() {
        for ((d, &g), &p) in dpre.iter_mut().zip(dout.row(t)).zip(pre.row(t)) {
            *d = g * relu_grad(p);
        }
        if dpre.iter().all(|&v| v == F::zero()) {
            continue;
        }
        for (b, &g) in dbias.data_mut().iter_mut().zip(&dpre) {
            *b += g;
        }
        let window = &xd[t * c_in..(t + kernel) * c_in];
        outer_acc(window, &dpre, dweight.data_mut());
        let dwindow = &mut dx.data_mut()[t * c_in..(t + kernel) * c_in];
        mat_vec_t_acc(weight.data(), &dpre, c_out, dwindow);
    }
    dx
}

fn kernel_dims<F: Real>(weight: &Tensor<F>) -> (usize, usize, usize) {
    let s = weight.shape();
    (s[0], s[1], s[2])
}
