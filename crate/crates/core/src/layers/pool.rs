use crate::num::{Real, Tensor};

/// Non-overlapping max pooling over time. A trailing partial window is
/// dropped. Returns the pooled `[T/pool x C]` tensor and, per output cell,
/// the source time index of its maximum (first index on ties).
pub fn maxpool1d_fwd<F: Real>(x: &Tensor<F>, pool: usize) -> (Tensor<F>, Vec<usize>) {
    let (steps, channels) = (x.rows(), x.row_len());
    let out_len = steps / pool;
    let mut out = Tensor::zeros(&[out_len, channels]);
    let mut argmax = vec![0usize; out_len * channels];
    for t in 0..out_len {
        for c in 0..channels {
            let mut best_t = t * pool;
            let mut best = x.data()[best_t * channels + c];
            for s in t * pool + 1..(t + 1) * pool {
                let v = x.data()[s * channels + c];
                if v > best {
                    best = v;
                    best_t = s;
                }
            }
            out.data_mut()[t * channels + c] = best;
            argmax[t * channels + c] = best_t;
        }
    }
    (out, argmax)
}

/// Routes each output gradient to its argmax source.
pub fn maxpool1d_bwd<F: Real>(dout: &Tensor<F>, argmax: &[usize], input_shape: &[usize]) -> Tensor<F> {
    let channels = input_shape[1];
    let mut dx = Tensor::zeros(input_shape);
    for (cell, (&g, &src)) in dout.data().iter().zip(argmax).enumerate() {
        let c = cell % channels;
        dx.data_mut()[src * channels + c] += g;
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_window_max() {
        let x = Tensor::from_vec(&[4, 1], vec![1.0f64, 3.0, 2.0, 0.0]).unwrap();
        let (out, arg) = maxpool1d_fwd(&x, 2);
        assert_eq!(out.data(), &[3.0, 2.0]);
        assert_eq!(arg, vec![1, 2]);
    }

    #[test]
    fn halves_paper_length_and_drops_odd_tail() {
        let (out, _) = maxpool1d_fwd(&Tensor::<f32>::zeros(&[96, 3]), 2);
        assert_eq!(out.shape(), &[48, 3]);
        let (odd, _) = maxpool1d_fwd(&Tensor::<f32>::zeros(&[7, 3]), 2);
        assert_eq!(odd.shape(), &[3, 3]);
    }

    #[test]
    fn tie_routes_to_first_index() {
        let x = Tensor::from_vec(&[2, 1], vec![5.0f64, 5.0]).unwrap();
        let (_, arg) = maxpool1d_fwd(&x, 2);
        let dx = maxpool1d_bwd(&Tensor::from_vec(&[1, 1], vec![1.0]).unwrap(), &arg, &[2, 1]);
        assert_eq!(dx.data(), &[1.0, 0.0]);
    }
}
