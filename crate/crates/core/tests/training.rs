use emonet_core::layers::{AffineParams, ConvParams, DropoutSpec, Padding, PoolSpec};
use emonet_core::network::{batch_input, Layer};
use emonet_core::training::train;
use emonet_core::*;

fn tiny(seed: u64, keep: f64) -> Model<f64> {
    let rng = &mut Prng::new(seed);
    let layers = vec![
        Layer::Affine {
            name: "augment".into(),
            params: AffineParams::init(144, 72, 0.0, 0.1, rng).unwrap(),
        },
        Layer::Reshape(vec![6, 6, 2]),
        Layer::Conv {
            name: "conv1".into(),
            params: ConvParams::init(2, 4, 0.0, 0.1, rng).unwrap(),
        },
        Layer::Relu,
        Layer::MaxPool(PoolSpec::new(5, 1, Padding::Same).unwrap()),
        Layer::Flatten,
        Layer::Dropout(DropoutSpec::new(keep).unwrap()),
        Layer::Affine {
            name: "fc1".into(),
            params: AffineParams::init(16, 5, 0.0, 0.1, rng).unwrap(),
        },
    ];
    Model::new(layers, 144, 1e-3).unwrap()
}

fn config(epochs: usize, lr: f64) -> TrainConfig {
    TrainConfig {
        epochs,
        batches_per_epoch: 4,
        learning_rate: lr,
        seed: 9,
        ..TrainConfig::default()
    }
}

fn data() -> Vec<Example> {
    synthetic::examples(40, 5, &mut Prng::new(77))
}

fn bits(m: &Model<f64>) -> Vec<u64> {
    m.params()
        .iter()
        .flat_map(|p| p.data().iter().map(|v| v.to_bits()))
        .collect()
}

#[test]
fn zero_epochs_change_nothing() {
    let before = tiny(1, 0.5);
    let (after, log) = train(before.clone(), &data(), &config(0, 1e-2)).unwrap();
    assert_eq!(bits(&before), bits(&after));
    assert!(log.steps.is_empty());
    assert!(log.epochs.is_empty());
}

#[test]
fn same_seed_same_losses() {
    let run = || {
        let (m, log) = train(tiny(2, 0.5), &data(), &config(3, 1e-2)).unwrap();
        (
            log.steps.iter().map(|s| s.1.to_bits()).collect::<Vec<_>>(),
            bits(&m),
        )
    };
    let (a, b) = (run(), run());
    assert_eq!(a.0.len(), 12);
    assert_eq!(a, b);
}

#[test]
fn one_validation_entry_per_epoch() {
    let (_, log) = train(tiny(3, 0.5), &data(), &config(3, 1e-2)).unwrap();
    let epochs: Vec<usize> = log.epochs.iter().map(|e| e.0).collect();
    assert_eq!(epochs, [1, 2, 3]);
    let steps: Vec<u64> = log.steps.iter().map(|s| s.0).collect();
    assert_eq!(steps, (1..=12).collect::<Vec<_>>());
}

#[test]
fn zero_learning_rate_keeps_parameters() {
    let before = tiny(4, 0.5);
    let (after, log) = train(before.clone(), &data(), &config(5, 0.0)).unwrap();
    assert_eq!(log.steps.len(), 20);
    assert_eq!(bits(&before), bits(&after));
}

#[test]
fn repeated_batch_loss_decreases() {
    let mut model = tiny(5, 1.0);
    let examples = data();
    let seqs: Vec<ByteSequence> = examples[..8].iter().map(|e| e.seq).collect();
    let labels: Vec<usize> = examples[..8].iter().map(|e| e.label.index()).collect();
    let x = batch_input::<f64>(&seqs);
    let mut adam = AdamState::new(model.params(), 1e-3);
    let mut rng = Prng::new(0);
    let mut losses = Vec::new();
    for _ in 0..100 {
        let out = model
            .loss_and_grads(&x, &labels, Mode::Train, &mut rng)
            .unwrap();
        losses.push(out.loss);
        adam.step(&mut model.params_mut(), &out.grads).unwrap();
    }
    for w in losses.windows(2) {
        assert!(w[1] <= w[0] * 1.05, "{} -> {}", w[0], w[1]);
    }
    assert!(losses[99] < losses[0]);
}

#[test]
fn non_finite_loss_reports_step() {
    let mut model = tiny(6, 1.0);
    model.params_mut()[0].data_mut()[0] = f64::NAN;
    let err = train(model, &data(), &config(1, 1e-3)).unwrap_err();
    assert_eq!(
        err,
        Error::NonFinite {
            what: "loss",
            step: 1
        }
    );
}

#[test]
fn needs_two_examples_per_present_class() {
    let mut d = data();
    d.retain(|e| e.label != EmotionLabel::Wondering);
    d.push(Example::new(d[0].seq, EmotionLabel::Wondering));
    assert!(matches!(
        train(tiny(7, 1.0), &d, &config(1, 1e-3)),
        Err(Error::InvalidArgument(_))
    ));
}
