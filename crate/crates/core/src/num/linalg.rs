//! Slice-level kernels shared by the layer implementations. Matrices are
//! row-major `[rows x cols]` slices.

use crate::num::Real;

/// `out += x · W` where `x` has length `rows`.
#[inline]
pub fn vec_mat_acc<F: Real>(x: &[F], w: &[F], cols: usize, out: &mut [F]) {
    debug_assert_eq!(w.len(), x.len() * cols);
    debug_assert_eq!(out.len(), cols);
    for (i, &xi) in x.iter().enumerate() {
        if xi == F::zero() {
            continue;
        }
        let w_row = &w[i * cols..(i + 1) * cols];
        for (o, &wv) in out.iter_mut().zip(w_row) {
            *o += xi * wv;
        }
    }
}

/// `dx += W · dy` where `dy` has length `cols`.
#[inline]
pub fn mat_vec_t_acc<F: Real>(w: &[F], dy: &[F], cols: usize, dx: &mut [F]) {
    debug_assert_eq!(w.len(), dx.len() * cols);
    for (i, d) in dx.iter_mut().enumerate() {
        let w_row = &w[i * cols..(i + 1) * cols];
        let mut acc = F::zero();
        for (&wv, &g) in w_row.iter().zip(dy) {
            acc += wv * g;
        }
        *d += acc;
    }
}

/// `dW += x ⊗ dy`.
#[inline]
pub fn outer_acc<F: Real>(x: &[F], dy: &[F], dw: &mut [F]) {
    let cols = dy.len();
    debug_assert_eq!(dw.len(), x.len() * cols);
    for (i, &xi) in x.iter().enumerate() {
        if xi == F::zero() {
            continue;
        }
        let row = &mut dw[i * cols..(i + 1) * cols];
        for (d, &g) in row.iter_mut().zip(dy) {
            *d += xi * g;
        }
    }
}

#[inline]
pub fn axpy<F: Real>(alpha: F, x: &[F], y: &mut [F]) {
    for (yv, &xv) in y.iter_mut().zip(x) {
        *yv += alpha * xv;
    }
}

#[inline]
pub fn dot<F: Real>(a: &[F], b: &[F]) -> F {
    let mut acc = F::zero();
    for (&x, &y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}
