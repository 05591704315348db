//! Layer kernels with explicit backward passes.
//!
//! Image tensors are `[batch, height, width, channels]` (NHWC). Every
//! `*_backward` takes the upstream gradient plus whatever the forward pass
//! saw, and returns exact analytic gradients.

mod activation;
mod affine;
mod conv;
mod dropout;
mod loss;
mod pool;

pub use activation::{relu, relu_backward};
pub use affine::{affine_backward, affine_forward, AffineGrads, AffineParams};
pub use conv::{conv2d_backward, conv2d_forward, ConvGrads, ConvParams, FILTER_SIZE};
pub use dropout::{dropout_backward, dropout_forward, DropoutSpec};
pub use loss::{softmax, softmax_cross_entropy, SoftmaxCrossEntropy};
pub use pool::{maxpool_backward, maxpool_forward, Padding, PoolSpec};

/// Whether stochastic layers are active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Test,
}

/// Splits an NHWC shape, failing for any other rank.
pub(crate) fn nhwc(op: &'static str, shape: &[usize]) -> crate::Result<[usize; 4]> {
    match *shape {
        [b, h, w, c] => Ok([b, h, w, c]),
        _ => Err(crate::Error::shape(op, shape, &[0, 0, 0, 0])),
    }
}
