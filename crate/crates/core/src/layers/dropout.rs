use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use super::Mode;

/// Inverted dropout: train-time masks are rescaled by `1 / keep_probability`
/// so test mode is the exact identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DropoutSpec {
    keep_probability: f64,
}

impl DropoutSpec {
    pub fn new(keep_probability: f64) -> Result<Self> {
        if !(keep_probability > 0.0 && keep_probability <= 1.0) {
            return Err(Error::invalid(alloc::format!(
                "keep probability {keep_probability} outside (0, 1]"
            )));
        }
        Ok(DropoutSpec { keep_probability })
    }

    pub fn keep_probability(&self) -> f64 {
        self.keep_probability
    }
}

/// Returns `(y, mask)`; the mask holds 0/1 entries. Test mode and
/// `keep_probability == 1` draw nothing from `rng`.
pub fn dropout_forward<T: Scalar>(
    x: &Tensor<T>,
    spec: &DropoutSpec,
    mode: Mode,
    rng: &mut Prng,
) -> (Tensor<T>, Tensor<T>) {
    let keep = spec.keep_probability;
    if mode == Mode::Test || keep >= 1.0 {
        return (x.clone(), Tensor::full(x.shape(), T::one()));
    }
    let scale = T::from_f64_lossy(1.0 / keep);
    let mut mask = Tensor::zeros(x.shape());
    let mut y = Tensor::zeros(x.shape());
    for ((m, out), &v) in mask.data_mut().iter_mut().zip(y.data_mut()).zip(x.data()) {
        if rng.bernoulli(keep) {
            *m = T::one();
            *out = v * scale;
        }
    }
    (y, mask)
}

pub fn dropout_backward<T: Scalar>(
    dy: &Tensor<T>,
    mask: &Tensor<T>,
    spec: &DropoutSpec,
) -> Result<Tensor<T>> {
    if dy.shape() != mask.shape() {
        return Err(Error::shape("dropout_backward", dy.shape(), mask.shape()));
    }
    let scale = T::from_f64_lossy(1.0 / spec.keep_probability);
    let data = dy
        .data()
        .iter()
        .zip(mask.data())
        .map(|(&g, &m)| g * m * scale)
        .collect();
    Tensor::from_vec(dy.shape(), data)
}
