//! Valid, stride-1 2-D cross-correlation via im2col + GEMM.

use alloc::vec;

use crate::error::{Error, Result};
use crate::rng::Prng;
use crate::scalar::{gemm, Scalar};
use crate::tensor::Tensor;

use super::nhwc;

/// Spatial side of every convolution filter.
pub const FILTER_SIZE: usize = 5;

/// `filters` is `[out_channels, 5, 5, in_channels]`, `bias` is `[out_channels]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvParams<T> {
    pub filters: Tensor<T>,
    pub bias: Tensor<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvGrads<T> {
    pub dx: Tensor<T>,
    pub dfilters: Tensor<T>,
    pub dbias: Tensor<T>,
}

impl<T: Scalar> ConvParams<T> {
    pub fn new(filters: Tensor<T>, bias: Tensor<T>) -> Result<Self> {
        match (filters.shape(), bias.shape()) {
            (&[k, FILTER_SIZE, FILTER_SIZE, _], &[kb]) if k == kb => {
                Ok(ConvParams { filters, bias })
            }
            _ => Err(Error::shape("conv params", filters.shape(), bias.shape())),
        }
    }

    pub fn init(
        in_channels: usize,
        out_channels: usize,
        mean: f64,
        std: f64,
        rng: &mut Prng,
    ) -> Result<Self> {
        Ok(ConvParams {
            filters: Tensor::gaussian(
                &[out_channels, FILTER_SIZE, FILTER_SIZE, in_channels],
                mean,
                std,
                rng,
            )?,
            bias: Tensor::zeros(&[out_channels]),
        })
    }

    pub fn in_channels(&self) -> usize {
        self.filters.shape()[3]
    }

    pub fn out_channels(&self) -> usize {
        self.filters.shape()[0]
    }
}

struct Geometry {
    batch: usize,
    h: usize,
    w: usize,
    c: usize,
    k: usize,
    oh: usize,
    ow: usize,
}

impl Geometry {
    fn new<T: Scalar>(op: &'static str, x: &[usize], p: &ConvParams<T>) -> Result<Self> {
        let [batch, h, w, c] = nhwc(op, x)?;
        if c != p.in_channels() {
            return Err(Error::shape(op, x, p.filters.shape()));
        }
        if h < FILTER_SIZE || w < FILTER_SIZE {
            return Err(Error::invalid(alloc::format!(
                "{op}: spatial size {h}x{w} smaller than {FILTER_SIZE}x{FILTER_SIZE} filter"
            )));
        }
        Ok(Geometry {
            batch,
            h,
            w,
            c,
            k: p.out_channels(),
            oh: h - FILTER_SIZE + 1,
            ow: w - FILTER_SIZE + 1,
        })
    }

    fn patch(&self) -> usize {
        FILTER_SIZE * FILTER_SIZE * self.c
    }

    fn out_shape(&self) -> [usize; 4] {
        [self.batch, self.oh, self.ow, self.k]
    }
}

/// Rows are output positions, columns follow the filter layout `(dy, dx, c)`.
fn im2col<T: Scalar>(g: &Geometry, image: &[T], cols: &mut [T]) {
    let row_len = FILTER_SIZE * g.c;
    let mut out = cols.chunks_exact_mut(row_len);
    for oy in 0..g.oh {
        for ox in 0..g.ow {
            for dy in 0..FILTER_SIZE {
                let start = ((oy + dy) * g.w + ox) * g.c;
                out.next()
                    .unwrap()
                    .copy_from_slice(&image[start..start + row_len]);
            }
        }
    }
}

fn col2im_add<T: Scalar>(g: &Geometry, cols: &[T], image: &mut [T]) {
    let row_len = FILTER_SIZE * g.c;
    let mut src = cols.chunks_exact(row_len);
    for oy in 0..g.oh {
        for ox in 0..g.ow {
            for dy in 0..FILTER_SIZE {
                let start = ((oy + dy) * g.w + ox) * g.c;
                for (d, &s) in image[start..start + row_len]
                    .iter_mut()
                    .zip(src.next().unwrap())
                {
                    *d += s;
                }
            }
        }
    }
}

/// `[B,H,W,C]` -> `[B,H-4,W-4,K]`, no padding, no filter flip.
pub fn conv2d_forward<T: Scalar>(x: &Tensor<T>, p: &ConvParams<T>) -> Result<Tensor<T>> {
    let g = Geometry::new("conv2d_forward", x.shape(), p)?;
    let positions = g.oh * g.ow;
    let in_len = g.h * g.w * g.c;
    let out_len = positions * g.k;
    let mut y = Tensor::zeros(&g.out_shape());
    let mut cols = vec![T::zero(); positions * g.patch()];
    for (image, out) in x
        .data()
        .chunks_exact(in_len)
        .zip(y.data_mut().chunks_exact_mut(out_len))
    {
        im2col(&g, image, &mut cols);
        for row in out.chunks_exact_mut(g.k) {
            row.copy_from_slice(p.bias.data());
        }
        gemm(
            positions,
            g.patch(),
            g.k,
            T::one(),
            &cols,
            false,
            p.filters.data(),
            true,
            T::one(),
            out,
        );
    }
    Ok(y)
}

pub fn conv2d_backward<T: Scalar>(
    dy: &Tensor<T>,
    x: &Tensor<T>,
    p: &ConvParams<T>,
) -> Result<ConvGrads<T>> {
    let g = Geometry::new("conv2d_backward", x.shape(), p)?;
    if dy.shape() != g.out_shape() {
        return Err(Error::shape("conv2d_backward", dy.shape(), &g.out_shape()));
    }
    let positions = g.oh * g.ow;
    let in_len = g.h * g.w * g.c;
    let out_len = positions * g.k;
    let mut dx = Tensor::zeros(x.shape());
    let mut dfilters = Tensor::zeros(p.filters.shape());
    let mut dbias = Tensor::zeros(&[g.k]);
    let mut cols = vec![T::zero(); positions * g.patch()];
    for ((image, grad_out), grad_in) in x
        .data()
        .chunks_exact(in_len)
        .zip(dy.data().chunks_exact(out_len))
        .zip(dx.data_mut().chunks_exact_mut(in_len))
    {
        im2col(&g, image, &mut cols);
        // dfilters[K, patch] += dy^T[K, positions] * cols[positions, patch]
        gemm(
            g.k,
            positions,
            g.patch(),
            T::one(),
            grad_out,
            true,
            &cols,
            false,
            T::one(),
            dfilters.data_mut(),
        );
        // dcols[positions, patch] = dy[positions, K] * filters[K, patch]
        gemm(
            positions,
            g.k,
            g.patch(),
            T::one(),
            grad_out,
            false,
            p.filters.data(),
            false,
            T::zero(),
            &mut cols,
        );
        col2im_add(&g, &cols, grad_in);
        for row in grad_out.chunks_exact(g.k) {
            for (acc, &v) in dbias.data_mut().iter_mut().zip(row) {
                *acc += v;
            }
        }
    }
    Ok(ConvGrads {
        dx,
        dfilters,
        dbias,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_filter_on_ones_input() {
        let p =
            ConvParams::new(Tensor::<f64>::full(&[1, 5, 5, 1], 1.0), Tensor::zeros(&[1])).unwrap();
        let y = conv2d_forward(&Tensor::full(&[1, 5, 5, 1], 1.0), &p).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1, 1]);
        assert_eq!(y.data(), &[25.0]);
    }

    #[test]
    fn shrinks_by_four() {
        let mut rng = Prng::new(3);
        let p = ConvParams::<f32>::init(3, 2, 0.0, 0.1, &mut rng).unwrap();
        let y = conv2d_forward(&Tensor::zeros(&[2, 32, 32, 3]), &p).unwrap();
        assert_eq!(y.shape(), &[2, 28, 28, 2]);
    }

    #[test]
    fn centered_delta_crops() {
        let mut rng = Prng::new(4);
        let x: Tensor<f64> = Tensor::gaussian(&[1, 9, 7, 1], 0.0, 1.0, &mut rng).unwrap();
        let mut f = Tensor::zeros(&[1, 5, 5, 1]);
        f.data_mut()[2 * 5 + 2] = 1.0;
        let p = ConvParams::new(f, Tensor::zeros(&[1])).unwrap();
        let y = conv2d_forward(&x, &p).unwrap();
        for oy in 0..5 {
            for ox in 0..3 {
                assert_eq!(y.get(&[0, oy, ox, 0]), x.get(&[0, oy + 2, ox + 2, 0]));
            }
        }
    }

    #[test]
    fn bias_gradient_is_upstream_sum() {
        let mut rng = Prng::new(5);
        let p = ConvParams::<f64>::init(2, 3, 0.0, 0.1, &mut rng).unwrap();
        let x = Tensor::gaussian(&[2, 7, 6, 2], 0.0, 1.0, &mut rng).unwrap();
        let dy = Tensor::gaussian(&[2, 3, 2, 3], 0.0, 1.0, &mut rng).unwrap();
        let g = conv2d_backward(&dy, &x, &p).unwrap();
        for k in 0..3 {
            let s: f64 = dy.data().iter().skip(k).step_by(3).sum();
            assert!((g.dbias.data()[k] - s).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_upstream_zero_grads() {
        let mut rng = Prng::new(6);
        let p = ConvParams::<f64>::init(2, 3, 0.0, 0.1, &mut rng).unwrap();
        let x = Tensor::gaussian(&[1, 8, 8, 2], 0.0, 1.0, &mut rng).unwrap();
        let g = conv2d_backward(&Tensor::zeros(&[1, 4, 4, 3]), &x, &p).unwrap();
        assert!(g
            .dx
            .data()
            .iter()
            .chain(g.dfilters.data())
            .chain(g.dbias.data())
            .all(|&v| v == 0.0));
    }

    #[test]
    fn too_small_input_rejected() {
        let p = ConvParams::<f32>::init(1, 1, 0.0, 0.1, &mut Prng::new(0)).unwrap();
        assert!(conv2d_forward(&Tensor::zeros(&[1, 4, 8, 1]), &p).is_err());
        assert!(conv2d_forward(&Tensor::zeros(&[1, 8, 8, 2]), &p).is_err());
        assert!(conv2d_backward(
            &Tensor::zeros(&[1, 3, 4, 1]),
            &Tensor::zeros(&[1, 8, 8, 1]),
            &p
        )
        .is_err());
    }
}
