use crate::error::{Error, Result};
use crate::num::{Real, Tensor};

/// Row lookup: `[T]` ids into a `[V x D]` table gives `[T x D]`.
pub fn embed_fwd<F: Real>(ids: &[u32], table: &Tensor<F>) -> Result<Tensor<F>> {
    let (vocab, dim) = (table.rows(), table.row_len());
    let mut out = Tensor::zeros(&[ids.len(), dim]);
    for (t, &id) in ids.iter().enumerate() {
        if id as usize >= vocab {
            return Err(Error::TokenOutOfRange {
                id,
                vocab_size: vocab,
            });
        }
        out.row_mut(t).copy_from_slice(table.row(id as usize));
    }
    Ok(out)
}

/// Scatter-add of `dout` rows into the table gradient. Repeated ids sum.
pub fn embed_bwd<F: Real>(ids: &[u32], dout: &Tensor<F>, dtable: &mut Tensor<F>) {
    for (t, &id) in ids.iter().enumerate() {
        let src = dout.row(t);
        for (d, &g) in dtable.row_mut(id as usize).iter_mut().zip(src) {
            *d += g;
        }
    }
}
