use crate::num::{Real, Tensor};

/// Mean over the time axis: `[T x D]` to `[D]`.
pub fn gap_fwd<F: Real>(x: &Tensor<F>) -> Tensor<F> {
    let (steps, dim) = (x.rows(), x.row_len());
    let mut out = Tensor::zeros(&[dim]);
    for t in 0..steps {
        for (o, &v) in out.data_mut().iter_mut().zip(x.row(t)) {
            *o += v;
        }
    }
    out.scale(F::one() / F::of(steps as f64));
    out
}

/// Spreads `g / T` to every step.
pub fn gap_bwd<F: Real>(dout: &Tensor<F>, steps: usize) -> Tensor<F> {
    let dim = dout.len();
    let inv = F::one() / F::of(steps as f64);
    let mut dx = Tensor::zeros(&[steps, dim]);
    for t in 0..steps {
        for (d, &g) in dx.row_mut(t).iter_mut().zip(dout.data()) {
            *d = g * inv;
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averages_rows() {
        let x = Tensor::from_vec(&[2, 2], vec![1.0f64, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(gap_fwd(&x).data(), &[2.0, 3.0]);
        let c = Tensor::from_vec(&[3, 2], vec![7.0f64, -1.0, 7.0, -1.0, 7.0, -1.0]).unwrap();
        assert_eq!(gap_fwd(&c).data(), &[7.0, -1.0]);
    }

    #[test]
    fn backward_is_uniform() {
        let g = Tensor::from_vec(&[2], vec![4.0f64, -8.0]).unwrap();
        let dx = gap_bwd(&g, 4);
        for t in 0..4 {
            assert_eq!(dx.row(t), &[1.0, -2.0]);
        }
    }
}
