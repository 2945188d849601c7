//! Forward and backward passes for each layer of the classifier.
//!
//! Every `*_fwd` returns its output plus whatever the matching `*_bwd` needs.
//! Backward functions accumulate parameter gradients into caller-provided
//! buffers (`+=`), so one buffer can collect a whole chunk of examples.

pub mod attention;
pub mod conv;
pub mod dense;
pub mod dropout;
pub mod embedding;
pub mod gap;
pub mod gru;
pub mod pool;

pub use attention::{attention_bwd, attention_fwd, AttentionCache};
pub use conv::{conv1d_bwd, conv1d_fwd};
pub use dense::{dense_sigmoid_bwd, dense_sigmoid_fwd};
pub use dropout::{dropout_bwd, dropout_fwd};
pub use embedding::{embed_bwd, embed_fwd};
pub use gap::{gap_bwd, gap_fwd};
pub use gru::{bigru_bwd, bigru_fwd, gru_bwd, gru_fwd, BiGruCache, GruCache, GruParams};
pub use pool::{maxpool1d_bwd, maxpool1d_fwd};
