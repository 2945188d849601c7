use rand::Rng;

use crate::num::{Real, Tensor};

/// Glorot/Xavier bound `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// I.i.d. uniform draws on `[-limit, limit]`.
pub fn uniform<F: Real>(shape: &[usize], limit: f64, rng: &mut impl Rng) -> Tensor<F> {
    let len: usize = shape.iter().product();
    let data = (0..len)
        .map(|_| F::of(rng.gen_range(-limit..=limit)))
        .collect();
    Tensor::from_vec(shape, data).expect("length matches shape")
}

/// Glorot-uniform initialisation. `fans` is `(fan_in, fan_out)`; when `None`
/// the convention is: 2-D `[in x out]` uses `(in, out)`; a 3-D convolution
/// kernel `[k x in x out]` uses `(k*in, k*out)`; 1-D uses `(n, n)`.
pub fn glorot_uniform<F: Real>(
    shape: &[usize],
    fans: Option<(usize, usize)>,
    rng: &mut impl Rng,
) -> Tensor<F> {
    assert!(!shape.is_empty(), "glorot_uniform needs at least one dimension");
    let (fan_in, fan_out) = fans.unwrap_or(match shape.len() {
        1 => (shape[0], shape[0]),
        2 => (shape[0], shape[1]),
        _ => {
            let receptive: usize = shape[..shape.len() - 2].iter().product();
            (
                receptive * shape[shape.len() - 2],
                receptive * shape[shape.len() - 1],
            )
        }
    });
    uniform(shape, glorot_limit(fan_in, fan_out), rng)
}
