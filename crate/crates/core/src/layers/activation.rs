use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Element-wise `max(x, 0)`.
pub fn relu<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Passes `dy` where `x > 0`; the subgradient at exactly zero is zero.
pub fn relu_backward<T: Scalar>(dy: &Tensor<T>, x: &Tensor<T>) -> Result<Tensor<T>> {
    if dy.shape() != x.shape() {
        return Err(Error::shape("relu_backward", dy.shape(), x.shape()));
    }
    let data = dy
        .data()
        .iter()
        .zip(x.data())
        .map(|(&g, &v)| if v > T::zero() { g } else { T::zero() })
        .collect();
    Tensor::from_vec(x.shape(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_values_and_kink() {
        let x = Tensor::from_vec(&[3], alloc::vec![3.0f64, -2.0, 0.0]).unwrap();
        assert_eq!(relu(&x).data(), &[3.0, 0.0, 0.0]);
        let dy = Tensor::full(&[3], 1.0);
        assert_eq!(relu_backward(&dy, &x).unwrap().data(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn relu_backward_shape_check() {
        let x = Tensor::<f32>::zeros(&[3]);
        assert!(relu_backward(&Tensor::zeros(&[4]), &x).is_err());
    }
}
