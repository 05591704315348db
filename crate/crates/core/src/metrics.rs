//! Top-1 accuracy, per-class accuracy and confusion matrices.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::label::{EmotionLabel, NUM_CLASSES};
use crate::network::Model;
use crate::scalar::Scalar;
use crate::text::ByteSequence;
use crate::training::Example;

/// Rows per inference call during evaluation.
const EVAL_CHUNK: usize = 32;

/// Anything that maps encoded dialogues to labels.
pub trait Classifier {
    fn classify(&self, seqs: &[ByteSequence]) -> Result<Vec<EmotionLabel>>;
}

impl<T: Scalar> Classifier for Model<T> {
    fn classify(&self, seqs: &[ByteSequence]) -> Result<Vec<EmotionLabel>> {
        let mut out = Vec::with_capacity(seqs.len());
        for chunk in seqs.chunks(EVAL_CHUNK) {
            for idx in self.classify_batch(chunk)? {
                out.push(EmotionLabel::from_index(idx)?);
            }
        }
        Ok(out)
    }
}

/// Counts indexed `[true][predicted]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_total(&self, truth: EmotionLabel) -> u64 {
        self.counts[truth.index()].iter().sum()
    }

    pub fn get(&self, truth: EmotionLabel, predicted: EmotionLabel) -> u64 {
        self.counts[truth.index()][predicted.index()]
    }
}

pub fn confusion_matrix(
    preds: &[EmotionLabel],
    truths: &[EmotionLabel],
) -> Result<ConfusionMatrix> {
    if preds.len() != truths.len() {
        return Err(Error::shape(
            "confusion_matrix",
            &[preds.len()],
            &[truths.len()],
        ));
    }
    let mut cm = ConfusionMatrix::default();
    for (p, t) in preds.iter().zip(truths) {
        cm.counts[t.index()][p.index()] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub overall_top1: f64,
    /// `None` for classes without examples.
    pub per_class_top1: [Option<f64>; NUM_CLASSES],
    pub confusion: ConfusionMatrix,
    pub n_examples: usize,
}

impl EvalReport {
    pub fn from_confusion(confusion: ConfusionMatrix) -> Result<Self> {
        let n = confusion.total();
        if n == 0 {
            return Err(Error::EmptyDataset);
        }
        let mut per_class = [None; NUM_CLASSES];
        for label in EmotionLabel::ALL {
            let row = confusion.row_total(label);
            if row > 0 {
                per_class[label.index()] = Some(confusion.get(label, label) as f64 / row as f64);
            }
        }
        Ok(EvalReport {
            overall_top1: confusion.trace() as f64 / n as f64,
            per_class_top1: per_class,
            n_examples: n as usize,
            confusion,
        })
    }

    pub fn class_examples(&self, label: EmotionLabel) -> u64 {
        self.confusion.row_total(label)
    }
}

/// Test-mode evaluation of `classifier` on labeled examples.
pub fn evaluate<C: Classifier + ?Sized>(classifier: &C, dataset: &[Example]) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let seqs: Vec<ByteSequence> = dataset.iter().map(|e| e.seq).collect();
    let truths: Vec<EmotionLabel> = dataset.iter().map(|e| e.label).collect();
    let preds = classifier.classify(&seqs)?;
    EvalReport::from_confusion(confusion_matrix(&preds, &truths)?)
}

/// Overall top-1 only.
pub fn accuracy<C: Classifier + ?Sized>(classifier: &C, dataset: &[Example]) -> Result<f64> {
    Ok(evaluate(classifier, dataset)?.overall_top1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;
    use EmotionLabel::*;

    #[test]
    fn diagonal_when_perfect() {
        let labels = [Positive, Neutral, Neutral, Wondering];
        let cm = confusion_matrix(&labels, &labels).unwrap();
        assert_eq!(cm.trace(), 4);
        assert_eq!(cm.total(), 4);
    }

    #[test]
    fn empty_is_zero_matrix() {
        let cm = confusion_matrix(&[], &[]).unwrap();
        assert_eq!(cm, ConfusionMatrix::default());
    }

    #[test]
    fn single_off_diagonal() {
        let cm = confusion_matrix(&[Positive], &[Neutral]).unwrap();
        assert_eq!(cm.get(Neutral, Positive), 1);
        assert_eq!(cm.total(), 1);
        assert_eq!(cm.trace(), 0);
    }

    #[test]
    fn length_mismatch() {
        assert!(confusion_matrix(&[Positive], &[]).is_err());
    }

    struct Constant(EmotionLabel);
    impl Classifier for Constant {
        fn classify(&self, seqs: &[ByteSequence]) -> Result<Vec<EmotionLabel>> {
            Ok(vec![self.0; seqs.len()])
        }
    }

    #[test]
    fn per_class_only_for_present_classes() {
        let data = vec![
            Example::new(ByteSequence::default(), Negative),
            Example::new(ByteSequence::default(), Positive),
        ];
        let r = evaluate(&Constant(Negative), &data).unwrap();
        assert_eq!(r.overall_top1, 0.5);
        assert_eq!(r.per_class_top1[Negative.index()], Some(1.0));
        assert_eq!(r.per_class_top1[Positive.index()], Some(0.0));
        assert_eq!(r.per_class_top1[Neutral.index()], None);
        assert!(evaluate(&Constant(Negative), &[]).is_err());
    }

    /// Deterministic stand-in that labels by the first byte code.
    struct FirstCode;

    impl Classifier for FirstCode {
        fn classify(&self, seqs: &[ByteSequence]) -> Result<Vec<EmotionLabel>> {
            Ok(seqs
                .iter()
                .map(|s| EmotionLabel::from_index(s.codes()[0] as usize % NUM_CLASSES).unwrap())
                .collect())
        }
    }

    fn dataset(pairs: &[(u8, usize)]) -> Vec<Example> {
        pairs
            .iter()
            .map(|&(code, label)| {
                let mut codes = [0u8; crate::text::SEQUENCE_LEN];
                codes[0] = code;
                Example::new(
                    ByteSequence::from_codes(codes),
                    EmotionLabel::from_index(label).unwrap(),
                )
            })
            .collect()
    }

    proptest! {
        #[test]
        fn permutation_invariant(
            pairs in proptest::collection::vec((any::<u8>(), 0usize..NUM_CLASSES), 1..60),
            seed in any::<u64>(),
        ) {
            let data = dataset(&pairs);
            let mut shuffled = data.clone();
            crate::rng::Prng::new(seed).shuffle(&mut shuffled);
            prop_assert_eq!(evaluate(&FirstCode, &data).unwrap(), evaluate(&FirstCode, &shuffled).unwrap());
        }

        #[test]
        fn per_class_recombines_to_overall(
            pairs in proptest::collection::vec((any::<u8>(), 0usize..NUM_CLASSES), 1..60),
        ) {
            let r = evaluate(&FirstCode, &dataset(&pairs)).unwrap();
            prop_assert_eq!(r.confusion.total() as usize, r.n_examples);
            prop_assert_eq!(r.overall_top1, r.confusion.trace() as f64 / r.n_examples as f64);
            let weighted: f64 = EmotionLabel::ALL
                .iter()
                .filter_map(|&l| r.per_class_top1[l.index()].map(|a| a * r.class_examples(l) as f64))
                .sum();
            prop_assert!((weighted / r.n_examples as f64 - r.overall_top1).abs() <= 1e-12);
        }
    }
}
