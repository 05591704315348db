//! Mini-batch training with Adam and per-epoch hold-out validation.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::Float;

use crate::error::{Error, Result};
use crate::label::EmotionLabel;
use crate::metrics::accuracy;
use crate::network::{batch_input, Mode, Model};
use crate::rng::Prng;
use crate::scalar::Scalar;
use crate::tensor::Tensor;
use crate::text::{split_dataset, ByteSequence};

/// An encoded, labeled dialogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Example {
    pub seq: ByteSequence,
    pub label: EmotionLabel,
}

impl Example {
    pub fn new(seq: ByteSequence, label: EmotionLabel) -> Self {
        Example { seq, label }
    }
}

/// Adam moments for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub m: Vec<Tensor<T>>,
    pub v: Vec<Tensor<T>>,
    pub t: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl<T: Scalar> AdamState<T> {
    /// Zeroed moments shaped like `params`; beta1 0.9, beta2 0.999, eps 1e-8.
    pub fn new<'a>(params: impl IntoIterator<Item = &'a Tensor<T>>, learning_rate: f64) -> Self {
        let m: Vec<Tensor<T>> = params
            .into_iter()
            .map(|p| Tensor::zeros(p.shape()))
            .collect();
        AdamState {
            v: m.clone(),
            m,
            t: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }

    /// One bias-corrected Adam update. Fails without touching anything if a
    /// gradient is non-finite or misaligned.
    pub fn step(&mut self, params: &mut [&mut Tensor<T>], grads: &[Tensor<T>]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::invalid(alloc::format!(
                "adam: {} params, {} grads, {} moment slots",
                params.len(),
                grads.len(),
                self.m.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            if p.shape() != g.shape() || g.shape() != m.shape() {
                return Err(Error::shape("adam_step", p.shape(), g.shape()));
            }
        }
        if !grads.iter().all(Tensor::all_finite) {
            return Err(Error::NonFinite {
                what: "gradient",
                step: self.t + 1,
            });
        }

        self.t += 1;
        let t = i32::try_from(self.t).unwrap_or(i32::MAX);
        let b1 = T::from_f64_lossy(self.beta1);
        let b2 = T::from_f64_lossy(self.beta2);
        let one = T::one();
        let corr1 = T::from_f64_lossy(1.0 - Float::powi(self.beta1, t));
        let corr2 = T::from_f64_lossy(1.0 - Float::powi(self.beta2, t));
        let lr = T::from_f64_lossy(self.learning_rate);
        let eps = T::from_f64_lossy(self.epsilon);

        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for (((pv, &gv), mv), vv) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mv = b1 * *mv + (one - b1) * gv;
                *vv = b2 * *vv + (one - b2) * gv * gv;
                let m_hat = *mv / corr1;
                let v_hat = *vv / corr2;
                *pv -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Free-function form of [`AdamState::step`] over a whole model.
pub fn adam_step<T: Scalar>(
    model: &mut Model<T>,
    grads: &[Tensor<T>],
    state: &mut AdamState<T>,
) -> Result<()> {
    state.step(&mut model.params_mut(), grads)
}

/// Shuffles `0..n` and cuts it into `batches` runs whose sizes differ by at
/// most one (the larger ones first).
pub fn make_batches(n: usize, batches: usize, rng: &mut Prng) -> Result<Vec<Vec<usize>>> {
    if n == 0 || batches == 0 {
        return Err(Error::invalid("need at least one example and one batch"));
    }
    if batches > n {
        return Err(Error::invalid(alloc::format!(
            "{batches} batches requested for {n} examples"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let (base, extra) = (n / batches, n % batches);
    let mut out = Vec::with_capacity(batches);
    let mut rest = order.as_slice();
    for b in 0..batches {
        let size = base + usize::from(b < extra);
        let (head, tail) = rest.split_at(size);
        out.push(head.to_vec());
        rest = tail;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub learning_rate: f64,
    pub l2_strength: f64,
    pub seed: u64,
    pub eval_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 100,
            batches_per_epoch: 32,
            learning_rate: 5e-6,
            l2_strength: 1.5e-4,
            seed: 0,
            eval_fraction: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batches_per_epoch == 0 {
            return Err(Error::invalid("batches per epoch must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be finite and >= 0"));
        }
        if !(self.l2_strength >= 0.0 && self.l2_strength.is_finite()) {
            return Err(Error::invalid("l2 strength must be finite and >= 0"));
        }
        if !(self.eval_fraction > 0.0 && self.eval_fraction < 1.0) {
            return Err(Error::invalid("eval fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    /// `(step, training batch loss)`, steps counted from 1.
    pub steps: Vec<(u64, f64)>,
    /// `(epoch, validation top-1)`, epochs counted from 1.
    pub epochs: Vec<(usize, f64)>,
}

// Sub-stream ids for the seeded generators.
const STREAM_SPLIT: u64 = 1;
const STREAM_BATCHES: u64 = 2;
const STREAM_DROPOUT: u64 = 3;

/// Epoch-at-a-time training driver.
pub struct Trainer<T> {
    model: Model<T>,
    adam: AdamState<T>,
    train: Vec<Example>,
    validation: Vec<Example>,
    batches_per_epoch: usize,
    batch_rng: Prng,
    dropout_rng: Prng,
    epoch: usize,
    log: TrainLog,
}

impl<T: Scalar> Trainer<T> {
    /// Trains on `train`; an empty `validation` set skips per-epoch
    /// validation.
    pub fn new(
        mut model: Model<T>,
        train: Vec<Example>,
        validation: Vec<Example>,
        config: &TrainConfig,
    ) -> Result<Self> {
        config.validate()?;
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if config.batches_per_epoch > train.len() {
            return Err(Error::invalid(alloc::format!(
                "{} batches per epoch for {} training examples",
                config.batches_per_epoch,
                train.len()
            )));
        }
        model.set_l2_strength(config.l2_strength);
        let adam = AdamState::new(model.params(), config.learning_rate);
        Ok(Trainer {
            model,
            adam,
            train,
            validation,
            batches_per_epoch: config.batches_per_epoch,
            batch_rng: Prng::derive(config.seed, STREAM_BATCHES),
            dropout_rng: Prng::derive(config.seed, STREAM_DROPOUT),
            epoch: 0,
            log: TrainLog::default(),
        })
    }

    pub fn model(&self) -> &Model<T> {
        &self.model
    }

    pub fn log(&self) -> &TrainLog {
        &self.log
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    pub fn adam(&self) -> &AdamState<T> {
        &self.adam
    }

    /// One pass over the training set; returns the validation top-1 if a
    /// validation set is present.
    pub fn run_epoch(&mut self) -> Result<Option<f64>> {
        let batches = make_batches(
            self.train.len(),
            self.batches_per_epoch,
            &mut self.batch_rng,
        )?;
        for batch in batches {
            let seqs: Vec<ByteSequence> = batch.iter().map(|&i| self.train[i].seq).collect();
            let labels: Vec<usize> = batch.iter().map(|&i| self.train[i].label.index()).collect();
            let x = batch_input::<T>(&seqs);
            let out = self
                .model
                .loss_and_grads(&x, &labels, Mode::Train, &mut self.dropout_rng)?;
            let step = self.adam.t + 1;
            if !out.loss.is_finite() {
                return Err(Error::NonFinite { what: "loss", step });
            }
            self.adam.step(&mut self.model.params_mut(), &out.grads)?;
            self.log.steps.push((step, out.loss.to_f64_lossless()));
        }
        self.epoch += 1;
        if self.validation.is_empty() {
            return Ok(None);
        }
        let acc = accuracy(&self.model, &self.validation)?;
        self.log.epochs.push((self.epoch, acc));
        Ok(Some(acc))
    }

    pub fn finish(self) -> (Model<T>, TrainLog) {
        (self.model, self.log)
    }
}

/// Checks class support and splits `dataset` into `(train, hold-out)` the
/// way [`train`] does.
pub fn split_for_training(
    dataset: &[Example],
    config: &TrainConfig,
) -> Result<(Vec<Example>, Vec<Example>)> {
    config.validate()?;
    let mut per_class: BTreeMap<EmotionLabel, usize> = BTreeMap::new();
    for ex in dataset {
        *per_class.entry(ex.label).or_default() += 1;
    }
    if let Some((label, &n)) = per_class.iter().find(|(_, &n)| n < 2) {
        return Err(Error::invalid(alloc::format!(
            "class {label} has {n} example(s); at least 2 are required"
        )));
    }
    split_dataset(
        dataset,
        config.eval_fraction,
        Prng::derive(config.seed, STREAM_SPLIT).next_u64(),
    )
}

/// Splits `dataset` into train / hold-out and runs `config.epochs` epochs.
pub fn train<T: Scalar>(
    model: Model<T>,
    dataset: &[Example],
    config: &TrainConfig,
) -> Result<(Model<T>, TrainLog)> {
    let (train_set, validation) = split_for_training(dataset, config)?;
    let mut trainer = Trainer::new(model, train_set, validation, config)?;
    for _ in 0..config.epochs {
        trainer.run_epoch()?;
    }
    Ok(trainer.finish())
}
