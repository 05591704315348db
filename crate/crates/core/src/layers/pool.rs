//! Max pooling, with either no padding or size-preserving padding.

use alloc::vec;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

use super::nhwc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    /// Output side `ceil(H / stride)`; padded cells never win the max.
    Same,
    /// Output side `floor((H - window) / stride) + 1`.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoolSpec {
    pub window: usize,
    pub stride: usize,
    pub padding: Padding,
}

impl PoolSpec {
    pub fn new(window: usize, stride: usize, padding: Padding) -> Result<Self> {
        if window == 0 || stride == 0 {
            return Err(Error::invalid("pool window and stride must be >= 1"));
        }
        Ok(PoolSpec {
            window,
            stride,
            padding,
        })
    }

    /// Output length along one axis and the leading pad.
    fn axis(&self, n: usize) -> Result<(usize, usize)> {
        match self.padding {
            Padding::None => {
                if n < self.window {
                    return Err(Error::invalid(alloc::format!(
                        "pool window {} exceeds input side {n}",
                        self.window
                    )));
                }
                Ok(((n - self.window) / self.stride + 1, 0))
            }
            Padding::Same => {
                let out = n.div_ceil(self.stride);
                let total = ((out - 1) * self.stride + self.window).saturating_sub(n);
                Ok((out, total / 2))
            }
        }
    }

    pub fn output_hw(&self, h: usize, w: usize) -> Result<(usize, usize)> {
        Ok((self.axis(h)?.0, self.axis(w)?.0))
    }
}

/// Visits every output cell with the flat input index of its (first) maximum
/// per channel.
fn for_each_argmax<T: Scalar>(
    x: &Tensor<T>,
    spec: &PoolSpec,
    mut visit: impl FnMut(usize, usize),
) -> Result<[usize; 4]> {
    let [batch, h, w, c] = nhwc("maxpool", x.shape())?;
    let (oh, pad_y) = spec.axis(h)?;
    let (ow, pad_x) = spec.axis(w)?;
    let data = x.data();
    let mut best = vec![T::neg_infinity(); c];
    let mut arg = vec![usize::MAX; c];
    let mut out_idx = 0;
    for b in 0..batch {
        let base = b * h * w * c;
        for oy in 0..oh {
            let y0 = (oy * spec.stride) as isize - pad_y as isize;
            let ys = y0.max(0) as usize..((y0 + spec.window as isize).min(h as isize)) as usize;
            for ox in 0..ow {
                let x0 = (ox * spec.stride) as isize - pad_x as isize;
                let xs = x0.max(0) as usize..((x0 + spec.window as isize).min(w as isize)) as usize;
                best.fill(T::neg_infinity());
                arg.fill(usize::MAX);
                for iy in ys.clone() {
                    for ix in xs.clone() {
                        let off = base + (iy * w + ix) * c;
                        for ch in 0..c {
                            let v = data[off + ch];
                            // Strict comparison keeps the first maximum.
                            if v > best[ch] || arg[ch] == usize::MAX {
                                best[ch] = v;
                                arg[ch] = off + ch;
                            }
                        }
                    }
                }
                for &a in &arg {
                    visit(out_idx, a);
                    out_idx += 1;
                }
            }
        }
    }
    Ok([batch, oh, ow, c])
}

pub fn maxpool_forward<T: Scalar>(x: &Tensor<T>, spec: &PoolSpec) -> Result<Tensor<T>> {
    let mut out = alloc::vec::Vec::new();
    let data = x.data();
    let shape = for_each_argmax(x, spec, |_, src| out.push(data[src]))?;
    Tensor::from_vec(&shape, out)
}

/// Routes each upstream value to its window's argmax (first in row-major
/// order on ties); overlapping windows accumulate.
pub fn maxpool_backward<T: Scalar>(
    dy: &Tensor<T>,
    x: &Tensor<T>,
    spec: &PoolSpec,
) -> Result<Tensor<T>> {
    let [batch, h, w, c] = nhwc("maxpool_backward", x.shape())?;
    let (oh, ow) = spec.output_hw(h, w)?;
    if dy.shape() != [batch, oh, ow, c] {
        return Err(Error::shape(
            "maxpool_backward",
            dy.shape(),
            &[batch, oh, ow, c],
        ));
    }
    let mut dx = Tensor::zeros(x.shape());
    let g = dy.data();
    let out = dx.data_mut();
    for_each_argmax(x, spec, |o, src| out[src] += g[o])?;
    Ok(dx)
}
