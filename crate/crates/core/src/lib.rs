//! Character-level convolutional emotion classifier for short dialogues.
//!
//! The crate is `no_std` (with `alloc`) and holds every numeric and text
//! transformation: the byte-encoding front end, dense tensors, layer kernels
//! with hand-written backward passes, the full network, Adam training and
//! evaluation metrics. File formats and the command line live in the
//! companion `emonet` crate.
//!
//! Enable the default `std` feature for runtime CPU feature detection in the
//! matrix kernels.

#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod label;
pub mod layers;
pub mod metrics;
pub mod network;
pub mod rng;
pub mod scalar;
pub mod synthetic;
pub mod tensor;
pub mod text;
pub mod training;

pub use error::{Error, Result};
pub use label::EmotionLabel;
pub use metrics::{confusion_matrix, evaluate, Classifier, ConfusionMatrix, EvalReport};
pub use network::{
    build_model, compute_augmentation_size, Init, Layer, Mode, Model, NetworkConfig, Variant,
};
pub use rng::Prng;
pub use scalar::Scalar;
pub use tensor::Tensor;
pub use text::{Alphabet, ByteSequence, RawDialogue, StopWordList, SEQUENCE_LEN};
pub use training::{AdamState, Example, TrainConfig, TrainLog, Trainer};
