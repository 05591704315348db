use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: Vec<usize>,
        right: Vec<usize>,
    },

    #[error("cannot reshape {from:?} ({from_len} elements) into {to:?}")]
    Reshape {
        from: Vec<usize>,
        from_len: usize,
        to: Vec<usize>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("label index {0} out of range (expected 0..5)")]
    LabelOutOfRange(usize),

    #[error("unknown emotion label {0:?}")]
    UnknownLabel(String),

    #[error("layer {index} ({layer}): {reason}")]
    Construction {
        index: usize,
        layer: String,
        reason: String,
    },

    #[error("non-finite {what} at step {step}")]
    NonFinite { what: &'static str, step: u64 },

    #[error("dataset is empty")]
    EmptyDataset,
}

impl Error {
    pub(crate) fn shape(op: &'static str, left: &[usize], right: &[usize]) -> Self {
        Error::ShapeMismatch {
            op,
            left: left.to_vec(),
            right: right.to_vec(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// True for faults caused by NaN/Inf values rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }
}
