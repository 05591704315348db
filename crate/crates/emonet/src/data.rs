//! Dataset (`<label>\t<text>` TSV) and stop-word files.

use std::fs;
use std::path::Path;

use emonet_core::text::encode_dialogue;
use emonet_core::{EmotionLabel, Example, RawDialogue, StopWordList};

use crate::error::AppError;

fn read(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

/// Parses TSV records; `line` numbers in errors are 1-based.
pub fn parse_dataset(contents: &str, path: &Path) -> Result<Vec<RawDialogue>, AppError> {
    let mut out = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let data_err = |reason: String| AppError::Data {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(data_err(format!(
                "expected 2 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let label: EmotionLabel = fields[0].parse().map_err(|e| data_err(format!("{e}")))?;
        out.push(RawDialogue::new(fields[1], Some(label)));
    }
    Ok(out)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<RawDialogue>, AppError> {
    let path = path.as_ref();
    parse_dataset(&read(path)?, path)
}

/// One entry per line; blank lines and `#` comments are skipped.
pub fn parse_stop_words(contents: &str) -> Result<StopWordList, emonet_core::Error> {
    StopWordList::new(
        contents
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#')),
    )
}

pub fn load_stop_words(path: impl AsRef<Path>) -> Result<StopWordList, AppError> {
    let path = path.as_ref();
    Ok(parse_stop_words(&read(path)?)?)
}

/// Encodes labeled dialogues; unlabeled ones are skipped.
pub fn encode_dataset(dialogues: &[RawDialogue], stops: &StopWordList) -> Vec<Example> {
    dialogues
        .iter()
        .filter_map(|d| {
            d.label
                .map(|label| Example::new(encode_dialogue(&d.text, stops), label))
        })
        .collect()
}
