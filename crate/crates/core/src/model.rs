//! The full classifier: embedding → conv1d+ReLU → max-pool → BiGRU →
//! additive attention → global average pooling → dropout → dense+sigmoid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layers::{self, gru::GRU_TENSOR_NAMES, AttentionCache, BiGruCache, GruParams};
use crate::num::{glorot_uniform, uniform, Prng, Real, RngState, Stream, Tensor};

/// Architecture hyperparameters. [`ModelConfig::paper`] gives the reference
/// sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub max_len: usize,
    pub embed_dim: usize,
    pub conv_filters: usize,
    pub kernel_size: usize,
    pub pool_size: usize,
    pub gru_units: usize,
    pub attention_width: usize,
    pub dropout: f64,
}

impl ModelConfig {
    pub fn paper() -> Self {
        ModelConfig {
            vocab_size: 10_000,
            max_len: 100,
            embed_dim: 128,
            conv_filters: 128,
            kernel_size: 5,
            pool_size: 2,
            gru_units: 128,
            attention_width: 64,
            dropout: 0.5,
        }
    }

    pub fn conv_len(&self) -> usize {
        self.max_len + 1 - self.kernel_size
    }

    pub fn pooled_len(&self) -> usize {
        self.conv_len() / self.pool_size
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("vocab_size", self.vocab_size),
            ("max_len", self.max_len),
            ("embed_dim", self.embed_dim),
            ("conv_filters", self.conv_filters),
            ("kernel_size", self.kernel_size),
            ("pool_size", self.pool_size),
            ("gru_units", self.gru_units),
            ("attention_width", self.attention_width),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be positive")));
            }
        }
        if self.vocab_size < 2 {
            return Err(Error::InvalidArgument(
                "vocab_size must leave room for the PAD and OOV ids".into(),
            ));
        }
        if self.max_len < self.kernel_size {
            return Err(Error::SequenceTooShort {
                len: self.max_len,
                kernel: self.kernel_size,
            });
        }
        if self.pooled_len() == 0 {
            return Err(Error::InvalidArgument(format!(
                "pool size {} leaves no time steps after a {}-step convolution",
                self.pool_size,
                self.conv_len()
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!(
                "dropout must be in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    /// Activation shapes from input ids to the output probability.
    pub fn shape_pipeline(&self) -> Vec<(&'static str, Vec<usize>)> {
        let two_h = 2 * self.gru_units;
        vec![
            ("input", vec![self.max_len]),
            ("embedding", vec![self.max_len, self.embed_dim]),
            ("conv1d", vec![self.conv_len(), self.conv_filters]),
            ("maxpool", vec![self.pooled_len(), self.conv_filters]),
            ("bigru", vec![self.pooled_len(), two_h]),
            ("attention", vec![self.pooled_len(), two_h]),
            ("global_avg_pool", vec![two_h]),
            ("output", vec![1]),
        ]
    }
}

/// All trainable tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F> {
    /// `[vocab x embed]`
    pub embedding: Tensor<F>,
    /// `[kernel x embed x filters]`
    pub conv_w: Tensor<F>,
    pub conv_b: Tensor<F>,
    pub gru_fwd: GruParams<F>,
    pub gru_bwd: GruParams<F>,
    /// `[2H x attention_width]`
    pub attn_w: Tensor<F>,
    pub attn_b: Tensor<F>,
    pub attn_v: Tensor<F>,
    /// `[2H]`
    pub out_w: Tensor<F>,
    /// `[1]`
    pub out_b: Tensor<F>,
}

impl<F: Real> ModelParams<F> {
    pub fn zeros(c: &ModelConfig) -> Self {
        let two_h = 2 * c.gru_units;
        ModelParams {
            embedding: Tensor::zeros(&[c.vocab_size, c.embed_dim]),
            conv_w: Tensor::zeros(&[c.kernel_size, c.embed_dim, c.conv_filters]),
            conv_b: Tensor::zeros(&[c.conv_filters]),
            gru_fwd: GruParams::zeros(c.conv_filters, c.gru_units),
            gru_bwd: GruParams::zeros(c.conv_filters, c.gru_units),
            attn_w: Tensor::zeros(&[two_h, c.attention_width]),
            attn_b: Tensor::zeros(&[c.attention_width]),
            attn_v: Tensor::zeros(&[c.attention_width]),
            out_w: Tensor::zeros(&[two_h]),
            out_b: Tensor::zeros(&[1]),
        }
    }

    /// Embedding rows are uniform on ±0.05; weight matrices are
    /// Glorot-uniform; biases start at zero.
    pub fn init(c: &ModelConfig, rng: &mut Prng) -> Self {
        let two_h = 2 * c.gru_units;
        ModelParams {
            embedding: uniform(&[c.vocab_size, c.embed_dim], 0.05, rng),
            conv_w: glorot_uniform(&[c.kernel_size, c.embed_dim, c.conv_filters], None, rng),
            conv_b: Tensor::zeros(&[c.conv_filters]),
            gru_fwd: GruParams::init(c.conv_filters, c.gru_units, rng),
            gru_bwd: GruParams::init(c.conv_filters, c.gru_units, rng),
            attn_w: glorot_uniform(&[two_h, c.attention_width], None, rng),
            attn_b: Tensor::zeros(&[c.attention_width]),
            attn_v: glorot_uniform(&[c.attention_width], Some((c.attention_width, 1)), rng),
            out_w: glorot_uniform(&[two_h], Some((two_h, 1)), rng),
            out_b: Tensor::zeros(&[1]),
        }
    }

    /// Stable ordering used for serialisation and optimisation.
    pub fn names() -> Vec<String> {
        let mut names = vec!["embedding".to_string(), "conv.w".into(), "conv.b".into()];
        for dir in ["gru_fwd", "gru_bwd"] {
            names.extend(GRU_TENSOR_NAMES.iter().map(|n| format!("{dir}.{n}")));
        }
        names.extend(
            ["attention.w", "attention.b", "attention.v", "output.w", "output.b"]
                .iter()
                .map(|s| s.to_string()),
        );
        names
    }

    pub fn tensors(&self) -> Vec<&Tensor<F>> {
        let mut out = vec![&self.embedding, &self.conv_w, &self.conv_b];
        out.extend(self.gru_fwd.tensors());
        out.extend(self.gru_bwd.tensors());
        out.extend([
            &self.attn_w,
            &self.attn_b,
            &self.attn_v,
            &self.out_w,
            &self.out_b,
        ]);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor<F>> {
        let mut out = vec![&mut self.embedding, &mut self.conv_w, &mut self.conv_b];
        out.extend(self.gru_fwd.tensors_mut());
        out.extend(self.gru_bwd.tensors_mut());
        out.extend([
            &mut self.attn_w,
            &mut self.attn_b,
            &mut self.attn_v,
            &mut self.out_w,
            &mut self.out_b,
        ]);
        out
    }

    pub fn named(&self) -> Vec<(String, &Tensor<F>)> {
        Self::names().into_iter().zip(self.tensors()).collect()
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    pub fn add_assign(&mut self, other: &Self) -> Result<()> {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.add_assign(b)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: F) {
        for t in self.tensors_mut() {
            t.scale(factor);
        }
    }

    pub fn sum_sq(&self) -> F {
        self.tensors().iter().map(|t| t.sum_sq()).sum()
    }

    pub fn cast<G: Real>(&self) -> ModelParams<G> {
        let mut out = ModelParams::<G> {
            embedding: self.embedding.cast(),
            conv_w: self.conv_w.cast(),
            conv_b: self.conv_b.cast(),
            gru_fwd: GruParams::zeros(1, 1),
            gru_bwd: GruParams::zeros(1, 1),
            attn_w: self.attn_w.cast(),
            attn_b: self.attn_b.cast(),
            attn_v: self.attn_v.cast(),
            out_w: self.out_w.cast(),
            out_b: self.out_b.cast(),
        };
        for (dst, src) in out.gru_fwd.tensors_mut().into_iter().zip(self.gru_fwd.tensors()) {
            *dst = src.cast();
        }
        for (dst, src) in out.gru_bwd.tensors_mut().into_iter().zip(self.gru_bwd.tensors()) {
            *dst = src.cast();
        }
        out
    }

    /// Checks every tensor against the shapes implied by `config`.
    pub fn check_shapes(&self, config: &ModelConfig) -> Result<()> {
        let expected = ModelParams::<F>::zeros(config);
        for ((name, got), want) in self.named().into_iter().zip(expected.tensors()) {
            if got.shape() != want.shape() {
                return Err(Error::InvalidArgument(format!(
                    "tensor `{name}` has shape {:?}, expected {:?}",
                    got.shape(),
                    want.shape()
                )));
            }
        }
        Ok(())
    }
}

/// Cached activations of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardTrace<F> {
    pub ids: Vec<u32>,
    pub embedded: Tensor<F>,
    pub conv_pre: Tensor<F>,
    pub conv_out_shape: Vec<usize>,
    pub pool_argmax: Vec<usize>,
    pub pooled: Tensor<F>,
    pub bigru: BiGruCache<F>,
    pub recurrent: Tensor<F>,
    pub attention: AttentionCache<F>,
    pub dropout_mask: Option<Vec<F>>,
    /// Input to the dense layer (after dropout).
    pub features: Tensor<F>,
    pub logit: F,
    pub prob: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model<F> {
    pub config: ModelConfig,
    pub params: ModelParams<F>,
}

impl<F: Real> Model<F> {
    /// Fresh model initialised from the `Init` stream of `seed`.
    pub fn new(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = RngState::new(seed).stream(Stream::Init);
        Ok(Model {
            config,
            params: ModelParams::init(&config, &mut rng),
        })
    }

    pub fn from_params(config: ModelConfig, params: ModelParams<F>) -> Result<Self> {
        config.validate()?;
        params.check_shapes(&config)?;
        Ok(Model { config, params })
    }

    /// Forward pass. `dropout_rng = None` is evaluation mode.
    pub fn forward(&self, ids: &[u32], dropout_rng: Option<&mut Prng>) -> Result<ForwardTrace<F>> {
        let p = &self.params;
        let embedded = layers::embed_fwd(ids, &p.embedding)?;
        let (conv_out, conv_pre) = layers::conv1d_fwd(&embedded, &p.conv_w, &p.conv_b)?;
        let (pooled, pool_argmax) = layers::maxpool1d_fwd(&conv_out, self.config.pool_size);
        if pooled.rows() == 0 {
            return Err(Error::InvalidArgument(format!(
                "input of {} tokens leaves no pooled steps",
                ids.len()
            )));
        }
        let (recurrent, bigru) = layers::bigru_fwd(&pooled, &p.gru_fwd, &p.gru_bwd);
        let (attended, attention) = layers::attention_fwd(&recurrent, &p.attn_w, &p.attn_b, &p.attn_v);
        let summary = layers::gap_fwd(&attended);
        let (features, dropout_mask) = layers::dropout_fwd(&summary, self.config.dropout, dropout_rng)?;
        let (prob, logit) = layers::dense_sigmoid_fwd(&features, &p.out_w, &p.out_b);
        Ok(ForwardTrace {
            ids: ids.to_vec(),
            embedded,
            conv_pre,
            conv_out_shape: conv_out.shape().to_vec(),
            pool_argmax,
            pooled,
            bigru,
            recurrent,
            attention,
            dropout_mask,
            features,
            logit,
            prob,
        })
    }

    /// Probability in evaluation mode.
    pub fn predict(&self, ids: &[u32]) -> Result<F> {
        Ok(self.forward(ids, None)?.prob)
    }

    /// Backward pass from `dL/dlogit`, accumulating into `grads`.
    pub fn backward(&self, trace: &ForwardTrace<F>, dlogit: F, grads: &mut ModelParams<F>) {
        let p = &self.params;
        let dfeatures =
            layers::dense_sigmoid_bwd(&trace.features, &p.out_w, dlogit, &mut grads.out_w, &mut grads.out_b);
        let dsummary = layers::dropout_bwd(&dfeatures, trace.dropout_mask.as_deref());
        let dattended = layers::gap_bwd(&dsummary, trace.recurrent.rows());
        let drecurrent = layers::attention_bwd(
            &trace.recurrent,
            &p.attn_w,
            &p.attn_v,
            &trace.attention,
            &dattended,
            &mut grads.attn_w,
            &mut grads.attn_b,
            &mut grads.attn_v,
        );
        let dpooled = layers::bigru_bwd(
            &trace.pooled,
            &p.gru_fwd,
            &p.gru_bwd,
            &trace.bigru,
            &drecurrent,
            &mut grads.gru_fwd,
            &mut grads.gru_bwd,
        );
        let dconv = layers::maxpool1d_bwd(&dpooled, &trace.pool_argmax, &trace.conv_out_shape);
        let dembedded = layers::conv1d_bwd(
            &trace.embedded,
            &p.conv_w,
            &trace.conv_pre,
            &dconv,
            &mut grads.conv_w,
            &mut grads.conv_b,
        );
        layers::embed_bwd(&trace.ids, &dembedded, &mut grads.embedding);
    }

    pub fn cast<G: Real>(&self) -> Model<G> {
        Model {
            config: self.config,
            params: self.params.cast(),
        }
    }

    pub fn param_count(&self) -> usize {
        self.params.param_count()
    }
}
