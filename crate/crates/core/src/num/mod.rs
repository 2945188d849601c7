//! Minimal dense-tensor arithmetic, activations, seeded randomness,
//! initialisers and the central-difference gradient oracle.

mod activation;
mod finite_diff;
mod init;
pub mod linalg;
mod real;
mod rng;
mod tensor;

pub use activation::{
    activate, activate_backward, relu, relu_grad, sigmoid, sigmoid_grad_from_output, softmax,
    softmax_backward, tanh_grad_from_output, Activation,
};
pub use finite_diff::{finite_diff_grad, rel_err};
pub use init::{glorot_limit, glorot_uniform, uniform};
pub use real::Real;
pub use rng::{Prng, RngState, Stream};
pub use tensor::Tensor;
