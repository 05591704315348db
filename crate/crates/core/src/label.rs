use alloc::string::ToString;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;

pub const NUM_CLASSES: usize = 5;

/// Emotion classes in canonical index order. The order is fixed across
/// checkpoints and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EmotionLabel {
    Positive = 0,
    Negative = 1,
    Wondering = 2,
    Neutral = 3,
    Meaningless = 4,
}

impl EmotionLabel {
    pub const ALL: [EmotionLabel; NUM_CLASSES] = [
        EmotionLabel::Positive,
        EmotionLabel::Negative,
        EmotionLabel::Wondering,
        EmotionLabel::Neutral,
        EmotionLabel::Meaningless,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Result<Self, Error> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or(Error::LabelOutOfRange(index))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EmotionLabel::Positive => "positive",
            EmotionLabel::Negative => "negative",
            EmotionLabel::Wondering => "wondering",
            EmotionLabel::Neutral => "neutral",
            EmotionLabel::Meaningless => "meaningless",
        }
    }
}

impl fmt::Display for EmotionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmotionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownLabel(s.to_string()))
    }
}
