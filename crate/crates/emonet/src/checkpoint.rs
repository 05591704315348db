//! Binary checkpoints.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"EMON" | version: u16 | metadata length: u32 | metadata (UTF-8) | f32 payload
//! ```
//!
//! The metadata is line-oriented `key=value` text followed by a tensor
//! directory, one `tensor <name> <rank> <d0>x<d1>... <byte offset>` line per
//! parameter, offsets relative to the start of the payload. The payload is
//! the raw little-endian `f32` data of every tensor in directory order and
//! must end exactly where the last tensor does.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use emonet_core::{build_model, EmotionLabel, Model, NetworkConfig, Prng, Variant};

use crate::error::AppError;

pub const MAGIC: &[u8; 4] = b"EMON";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckpointError {
    #[error("not a checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("unsupported format version {found} (expected {expected})")]
    Version { found: u16, expected: u16 },
    #[error("truncated: need {needed} bytes, file has {found}")]
    Truncated { needed: usize, found: usize },
    #[error("corrupt metadata: {0}")]
    Corrupt(String),
    #[error("checkpoint holds variant {found}, expected {expected}")]
    ConfigMismatch { expected: Variant, found: Variant },
    #[error("tensor {name}: shape {found:?} does not match model shape {expected:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
}

fn corrupt(msg: impl Into<String>) -> CheckpointError {
    CheckpointError::Corrupt(msg.into())
}

fn label_order() -> String {
    EmotionLabel::ALL
        .iter()
        .map(|l| l.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// Serializes a model built by [`build_model`].
pub fn to_bytes(model: &Model<f32>) -> Result<Vec<u8>, CheckpointError> {
    let config = model
        .config()
        .ok_or_else(|| corrupt("only models built from a NetworkConfig can be saved"))?;
    let mut meta = String::new();
    writeln!(meta, "variant={}", config.variant).unwrap();
    writeln!(meta, "labels={}", label_order()).unwrap();
    writeln!(meta, "init={}", config.init).unwrap();
    writeln!(meta, "keep_input={}", config.dropout_keep_input).unwrap();
    writeln!(meta, "keep_hidden={}", config.dropout_keep_hidden).unwrap();
    writeln!(meta, "l2={}", config.l2_strength).unwrap();
    let params = model.params();
    writeln!(meta, "tensors={}", params.len()).unwrap();
    let mut offset = 0usize;
    for (name, p) in model.param_names().iter().zip(&params) {
        let dims: Vec<String> = p.shape().iter().map(|d| d.to_string()).collect();
        writeln!(
            meta,
            "tensor {name} {} {} {offset}",
            p.shape().len(),
            dims.join("x")
        )
        .unwrap();
        offset += p.len() * 4;
    }

    let mut out = Vec::with_capacity(HEADER_LEN + meta.len() + offset);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    out.extend_from_slice(meta.as_bytes());
    for p in params {
        for v in p.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

struct Entry {
    name: String,
    shape: Vec<usize>,
    offset: usize,
}

fn parse_f64(key: &str, v: &str) -> Result<f64, CheckpointError> {
    v.parse()
        .map_err(|_| corrupt(format!("bad value for {key}: {v:?}")))
}

fn parse_metadata(meta: &str) -> Result<(NetworkConfig, Vec<Entry>), CheckpointError> {
    let mut config = NetworkConfig::default();
    let mut variant = None;
    let mut declared = None;
    let mut entries = Vec::new();
    for line in meta.lines() {
        if let Some(rest) = line.strip_prefix("tensor ") {
            let f: Vec<&str> = rest.split(' ').collect();
            if f.len() != 4 {
                return Err(corrupt(format!("bad tensor line {line:?}")));
            }
            let rank: usize = f[1].parse().map_err(|_| corrupt("bad tensor rank"))?;
            let shape = f[2]
                .split('x')
                .map(|d| d.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| corrupt(format!("bad dims {:?}", f[2])))?;
            if shape.len() != rank {
                return Err(corrupt(format!("rank {rank} but dims {:?}", f[2])));
            }
            let offset = f[3].parse().map_err(|_| corrupt("bad tensor offset"))?;
            entries.push(Entry {
                name: f[0].to_string(),
                shape,
                offset,
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| corrupt(format!("bad metadata line {line:?}")))?;
        match key {
            "variant" => {
                variant = Some(
                    value
                        .parse::<Variant>()
                        .map_err(|_| corrupt(format!("unknown variant {value:?}")))?,
                )
            }
            "labels" => {
                if value != label_order() {
                    return Err(corrupt(format!("unexpected label order {value:?}")));
                }
            }
            "init" => {
                config.init = value
                    .parse()
                    .map_err(|_| corrupt(format!("bad init {value:?}")))?
            }
            "keep_input" => config.dropout_keep_input = parse_f64(key, value)?,
            "keep_hidden" => config.dropout_keep_hidden = parse_f64(key, value)?,
            "l2" => config.l2_strength = parse_f64(key, value)?,
            "tensors" => {
                declared = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| corrupt("bad tensor count"))?,
                )
            }
            other => return Err(corrupt(format!("unknown key {other:?}"))),
        }
    }
    config.variant = variant.ok_or_else(|| corrupt("missing variant"))?;
    if declared != Some(entries.len()) {
        return Err(corrupt(format!(
            "tensor count {declared:?} but {} directory entries",
            entries.len()
        )));
    }
    Ok((config, entries))
}

fn need(bytes: &[u8], needed: usize) -> Result<(), CheckpointError> {
    if bytes.len() < needed {
        Err(CheckpointError::Truncated {
            needed,
            found: bytes.len(),
        })
    } else {
        Ok(())
    }
}

/// Parses a checkpoint, optionally insisting on a variant.
pub fn from_bytes(bytes: &[u8], expected: Option<Variant>) -> Result<Model<f32>, CheckpointError> {
    need(bytes, 4)?;
    if &bytes[..4] != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    need(bytes, HEADER_LEN)?;
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(CheckpointError::Version {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let meta_len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    need(bytes, HEADER_LEN + meta_len)?;
    let meta = std::str::from_utf8(&bytes[HEADER_LEN..HEADER_LEN + meta_len])
        .map_err(|_| corrupt("metadata is not UTF-8"))?;
    let (config, entries) = parse_metadata(meta)?;
    if let Some(want) = expected {
        if want != config.variant {
            return Err(CheckpointError::ConfigMismatch {
                expected: want,
                found: config.variant,
            });
        }
    }

    let mut model: Model<f32> =
        build_model(&config, &mut Prng::new(0)).map_err(|e| corrupt(e.to_string()))?;
    let names = model.param_names();
    if names.len() != entries.len() {
        return Err(corrupt(format!(
            "{} tensors stored, model has {}",
            entries.len(),
            names.len()
        )));
    }
    let payload = &bytes[HEADER_LEN + meta_len..];
    let payload_len: usize = entries
        .iter()
        .map(|e| e.shape.iter().product::<usize>() * 4)
        .sum();
    if payload.len() < payload_len {
        return Err(CheckpointError::Truncated {
            needed: HEADER_LEN + meta_len + payload_len,
            found: bytes.len(),
        });
    }
    if payload.len() > payload_len {
        return Err(corrupt(format!(
            "{} trailing bytes after tensor data",
            payload.len() - payload_len
        )));
    }
    let mut expected_offset = 0;
    for ((entry, name), param) in entries.iter().zip(&names).zip(model.params_mut()) {
        if &entry.name != name {
            return Err(corrupt(format!(
                "expected tensor {name}, found {}",
                entry.name
            )));
        }
        if entry.shape != param.shape() {
            return Err(CheckpointError::ShapeMismatch {
                name: entry.name.clone(),
                expected: param.shape().to_vec(),
                found: entry.shape.clone(),
            });
        }
        if entry.offset != expected_offset {
            return Err(corrupt(format!("tensor {name} at offset {}", entry.offset)));
        }
        let raw = &payload[entry.offset..entry.offset + param.len() * 4];
        for (dst, chunk) in param.data_mut().iter_mut().zip(raw.chunks_exact(4)) {
            *dst = f32::from_le_bytes(chunk.try_into().unwrap());
        }
        expected_offset += param.len() * 4;
    }
    Ok(model)
}

pub fn save_checkpoint(model: &Model<f32>, path: impl AsRef<Path>) -> Result<(), AppError> {
    let path = path.as_ref();
    let bytes = to_bytes(model).map_err(|source| AppError::Checkpoint {
        path: path.to_path_buf(),
        source,
    })?;
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

pub fn load_checkpoint(
    path: impl AsRef<Path>,
    expected: Option<Variant>,
) -> Result<Model<f32>, AppError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    from_bytes(&bytes, expected).map_err(|source| AppError::Checkpoint {
        path: path.to_path_buf(),
        source,
    })
}
