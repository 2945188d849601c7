use rand::Rng;

use crate::error::{Error, Result};
use crate::num::{Prng, Real, Tensor};

/// Inverted dropout. With `rng = None` (evaluation) this is the identity and
/// no mask is produced. In training, each unit is kept with probability
/// `1 - p` and survivors are scaled by `1 / (1 - p)`; the returned mask holds
/// the per-unit multiplier (0 or `1/(1-p)`).
pub fn dropout_fwd<F: Real>(
    x: &Tensor<F>,
    p: f64,
    rng: Option<&mut Prng>,
) -> Result<(Tensor<F>, Option<Vec<F>>)> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!(
            "dropout rate must be in [0, 1), got {p}"
        )));
    }
    let Some(rng) = rng else {
        return Ok((x.clone(), None));
    };
    let keep = F::of(1.0 / (1.0 - p));
    let mask: Vec<F> = (0..x.len())
        .map(|_| {
            if p > 0.0 && rng.gen::<f64>() < p {
                F::zero()
            } else {
                keep
            }
        })
        .collect();
    let mut out = x.clone();
    for (o, &m) in out.data_mut().iter_mut().zip(&mask) {
        *o *= m;
    }
    Ok((out, Some(mask)))
}

pub fn dropout_bwd<F: Real>(dout: &Tensor<F>, mask: Option<&[F]>) -> Tensor<F> {
    let mut dx = dout.clone();
    if let Some(mask) = mask {
        for (d, &m) in dx.data_mut().iter_mut().zip(mask) {
            *d *= m;
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{RngState, Stream};

    #[test]
    fn eval_mode_is_identity() {
        let x = Tensor::from_vec(&[3], vec![1.0f32, -2.0, 3.0]).unwrap();
        let (y, mask) = dropout_fwd(&x, 0.5, None).unwrap();
        assert_eq!(y, x);
        assert!(mask.is_none());
    }

    #[test]
    fn zero_rate_is_identity_in_training() {
        let x = Tensor::from_vec(&[3], vec![1.0f32, -2.0, 3.0]).unwrap();
        let mut rng = RngState::new(0).stream(Stream::Dropout);
        let (y, _) = dropout_fwd(&x, 0.0, Some(&mut rng)).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn rate_of_one_is_rejected() {
        let x = Tensor::<f32>::zeros(&[2]);
        assert!(dropout_fwd(&x, 1.0, None).is_err());
    }

    #[test]
    fn inverted_scaling_preserves_mean() {
        let n = 10_000;
        let x = Tensor::filled(&[n], 1.0f64);
        let mut rng = RngState::new(17).stream(Stream::Dropout);
        let (y, _) = dropout_fwd(&x, 0.5, Some(&mut rng)).unwrap();
        let mean = y.sum() / n as f64;
        // Each output is 0 or 2 with equal probability: sigma = 1.
        let sigma = 1.0 / (n as f64).sqrt();
        assert!((mean - 1.0).abs() <= 3.0 * sigma, "mean {mean}");
    }
}
