use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::scalar::{gemm, Scalar};
use crate::tensor::Tensor;

/// Fully connected parameters. `weight` is `[out_dim, in_dim]`, applied to
/// column vectors: `y = W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineParams<T> {
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineGrads<T> {
    pub dx: Tensor<T>,
    pub dweight: Tensor<T>,
    pub dbias: Tensor<T>,
}

impl<T: Scalar> AffineParams<T> {
    pub fn new(weight: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        match (weight.shape(), bias.shape()) {
            (&[out, _], &[b]) if out == b => Ok(AffineParams { weight, bias }),
            _ => Err(Error::shape("affine params", weight.shape(), bias.shape())),
        }
    }

    /// Gaussian weights, zero bias.
    pub fn init(
        in_dim: usize,
        out_dim: usize,
        mean: f64,
        std: f64,
        rng: &mut Prng,
    ) -> Result<Self> {
        Ok(AffineParams {
            weight: Tensor::gaussian(&[out_dim, in_dim], mean, std, rng)?,
            bias: Tensor::zeros(&[out_dim]),
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn out_dim(&self) -> usize {
        self.weight.shape()[0]
    }
}

fn batch_dims(op: &'static str, x: &[usize], in_dim: usize) -> Result<usize> {
    match *x {
        [b, i] if i == in_dim => Ok(b),
        _ => Err(Error::shape(op, x, &[0, in_dim])),
    }
}

/// `y[b, o] = sum_i W[o, i] * x[b, i] + bias[o]`.
pub fn affine_forward<T: Scalar>(x: &Tensor<T>, p: &AffineParams<T>) -> Result<Tensor<T>> {
    let (in_dim, out_dim) = (p.in_dim(), p.out_dim());
    let batch = batch_dims("affine_forward", x.shape(), in_dim)?;
    let mut y = Tensor::zeros(&[batch, out_dim]);
    for row in y.data_mut().chunks_exact_mut(out_dim) {
        row.copy_from_slice(p.bias.data());
    }
    gemm(
        batch,
        in_dim,
        out_dim,
        T::one(),
        x.data(),
        false,
        p.weight.data(),
        true,
        T::one(),
        y.data_mut(),
    );
    Ok(y)
}

pub fn affine_backward<T: Scalar>(
    dy: &Tensor<T>,
    x: &Tensor<T>,
    p: &AffineParams<T>,
) -> Result<AffineGrads<T>> {
    let (in_dim, out_dim) = (p.in_dim(), p.out_dim());
    let batch = batch_dims("affine_backward", x.shape(), in_dim)?;
    if dy.shape() != [batch, out_dim] {
        return Err(Error::shape(
            "affine_backward",
            dy.shape(),
            &[batch, out_dim],
        ));
    }
    let mut dx = Tensor::zeros(&[batch, in_dim]);
    gemm(
        batch,
        out_dim,
        in_dim,
        T::one(),
        dy.data(),
        false,
        p.weight.data(),
        false,
        T::zero(),
        dx.data_mut(),
    );
    let mut dweight = Tensor::zeros(&[out_dim, in_dim]);
    gemm(
        out_dim,
        batch,
        in_dim,
        T::one(),
        dy.data(),
        true,
        x.data(),
        false,
        T::zero(),
        dweight.data_mut(),
    );
    let mut dbias = Tensor::zeros(&[out_dim]);
    for row in dy.data().chunks_exact(out_dim) {
        for (acc, &g) in dbias.data_mut().iter_mut().zip(row) {
            *acc += g;
        }
    }
    Ok(AffineGrads { dx, dweight, dbias })
}
