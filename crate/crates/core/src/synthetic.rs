//! Synthetic labeled dialogues for smoke tests and demos.
//!
//! Each class owns one marker character. A generated dialogue alternates its
//! class marker with random CJK filler characters, starting with the marker.
//! Marker ordinals are chosen so their byte codes (25, 75, 125, 175, 225)
//! are far apart.

use alloc::string::String;
use alloc::vec::Vec;

use crate::label::{EmotionLabel, NUM_CLASSES};
use crate::rng::Prng;
use crate::text::{encode_dialogue, Alphabet, RawDialogue, StopWordList};
use crate::training::Example;

const LEN_MIN: usize = 24;
const LEN_MAX: usize = 48;
/// Size of the CJK block in the alphabet.
const CJK_COUNT: usize = 20902;

/// Marker character for class `label`.
pub fn marker(label: EmotionLabel) -> char {
    let ordinal = 256 * 10 + 25 + 50 * label.index();
    Alphabet::standard().char_at(ordinal).unwrap()
}

/// `n` dialogues with labels cycling through the first `classes` classes.
pub fn dialogues(n: usize, classes: usize, rng: &mut Prng) -> Vec<RawDialogue> {
    assert!((1..=NUM_CLASSES).contains(&classes));
    let alphabet = Alphabet::standard();
    (0..n)
        .map(|i| {
            let label = EmotionLabel::ALL[i % classes];
            let len = LEN_MIN + rng.below(LEN_MAX - LEN_MIN + 1);
            let text: String = (0..len)
                .map(|pos| {
                    if pos % 2 == 0 {
                        marker(label)
                    } else {
                        alphabet.char_at(rng.below(CJK_COUNT)).unwrap()
                    }
                })
                .collect();
            RawDialogue::new(text, Some(label))
        })
        .collect()
}

/// Encoded form of [`dialogues`].
pub fn examples(n: usize, classes: usize, rng: &mut Prng) -> Vec<Example> {
    let stops = StopWordList::empty();
    dialogues(n, classes, rng)
        .into_iter()
        .map(|d| Example::new(encode_dialogue(&d.text, &stops), d.label.unwrap()))
        .collect()
}
