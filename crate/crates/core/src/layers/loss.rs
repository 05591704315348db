use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxCrossEntropy<T> {
    /// Mean negative log-likelihood over the batch.
    pub loss: T,
    pub probs: Tensor<T>,
    /// `(probs - onehot) / batch`.
    pub dlogits: Tensor<T>,
}

fn rows<T: Scalar>(logits: &Tensor<T>) -> Result<(usize, usize)> {
    match *logits.shape() {
        [b, c] if c > 0 => Ok((b, c)),
        _ => Err(Error::shape("softmax", logits.shape(), &[0, 5])),
    }
}

/// Row-wise softmax with max subtraction.
pub fn softmax<T: Scalar>(logits: &Tensor<T>) -> Result<Tensor<T>> {
    let (_, classes) = rows(logits)?;
    let mut probs = logits.clone();
    for row in probs.data_mut().chunks_exact_mut(classes) {
        let max = row.iter().copied().fold(T::neg_infinity(), T::max);
        let mut sum = T::zero();
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    Ok(probs)
}

pub fn softmax_cross_entropy<T: Scalar>(
    logits: &Tensor<T>,
    labels: &[usize],
) -> Result<SoftmaxCrossEntropy<T>> {
    let (batch, classes) = rows(logits)?;
    if labels.len() != batch {
        return Err(Error::shape(
            "softmax_cross_entropy",
            logits.shape(),
            &[labels.len()],
        ));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::LabelOutOfRange(bad));
    }
    let probs = softmax(logits)?;
    let inv_batch = T::one() / T::from_usize(batch.max(1)).unwrap();
    let mut loss = T::zero();
    let mut dlogits = probs.clone();
    for ((logit_row, grad_row), &label) in logits
        .data()
        .chunks_exact(classes)
        .zip(dlogits.data_mut().chunks_exact_mut(classes))
        .zip(labels)
    {
        // -log p_label = logsumexp(row) - row[label], evaluated stably.
        let max = logit_row.iter().copied().fold(T::neg_infinity(), T::max);
        let lse = max + logit_row.iter().map(|&v| (v - max).exp()).sum::<T>().ln();
        loss += lse - logit_row[label];
        grad_row[label] -= T::one();
        for g in grad_row.iter_mut() {
            *g *= inv_batch;
        }
    }
    Ok(SoftmaxCrossEntropy {
        loss: loss * inv_batch,
        probs,
        dlogits,
    })
}
