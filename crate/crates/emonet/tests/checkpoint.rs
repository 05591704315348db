use emonet::checkpoint::{from_bytes, to_bytes, CheckpointError};
use emonet::{load_checkpoint, save_checkpoint, AppError};
use emonet_core::{build_model, Model, NetworkConfig, Prng, Variant};

fn model(variant: Variant, seed: u64) -> Model<f32> {
    build_model(&NetworkConfig::new(variant), &mut Prng::new(seed)).unwrap()
}

fn bits(m: &Model<f32>) -> Vec<u32> {
    m.params()
        .iter()
        .flat_map(|p| p.data().iter().map(|v| v.to_bits()))
        .collect()
}

#[test]
fn round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    let m = model(Variant::C, 3);
    save_checkpoint(&m, &path).unwrap();
    let back = load_checkpoint(&path, Some(Variant::C)).unwrap();
    assert_eq!(bits(&m), bits(&back));
    assert_eq!(back.config(), m.config());
    assert_eq!(to_bytes(&back).unwrap(), std::fs::read(&path).unwrap());
}

#[test]
fn header_starts_with_magic_and_version() {
    let bytes = to_bytes(&model(Variant::B, 0)).unwrap();
    assert_eq!(&bytes[..4], b"EMON");
    assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
    let meta_len = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let meta = std::str::from_utf8(&bytes[10..10 + meta_len]).unwrap();
    assert!(meta.contains("variant=B"));
    assert!(meta.contains("labels=positive,negative,wondering,neutral,meaningless"));
    assert!(meta.contains("tensor fc1.weight 2 1024x9216 "));
}

#[test]
fn variant_mismatch() {
    let bytes = to_bytes(&model(Variant::A, 1)).unwrap();
    assert_eq!(
        from_bytes(&bytes, Some(Variant::B)).unwrap_err(),
        CheckpointError::ConfigMismatch {
            expected: Variant::B,
            found: Variant::A
        }
    );
    assert!(from_bytes(&bytes, None).is_ok());
}

#[test]
fn one_byte_short_is_truncated() {
    let bytes = to_bytes(&model(Variant::B, 1)).unwrap();
    let err = from_bytes(&bytes[..bytes.len() - 1], None).unwrap_err();
    assert!(matches!(err, CheckpointError::Truncated { .. }), "{err}");
    for cut in [0, 3, 7, 200] {
        assert!(matches!(
            from_bytes(&bytes[..cut], None).unwrap_err(),
            CheckpointError::Truncated { .. } | CheckpointError::BadMagic
        ));
    }
}

#[test]
fn damaged_files_give_distinct_errors() {
    let bytes = to_bytes(&model(Variant::B, 1)).unwrap();

    let mut version = bytes.clone();
    version[4] = 9;
    assert_eq!(
        from_bytes(&version, None).unwrap_err(),
        CheckpointError::Version {
            found: 9,
            expected: 1
        }
    );

    let mut trailing = bytes.clone();
    trailing.push(0);
    assert!(matches!(
        from_bytes(&trailing, None).unwrap_err(),
        CheckpointError::Corrupt(_)
    ));

    let mut magic = bytes.clone();
    magic[1] = b'X';
    assert_eq!(
        from_bytes(&magic, None).unwrap_err(),
        CheckpointError::BadMagic
    );

    let mut meta = bytes;
    let pos = meta.windows(9).position(|w| w == b"variant=B").unwrap();
    meta[pos + 8] = b'Q';
    assert!(matches!(
        from_bytes(&meta, None).unwrap_err(),
        CheckpointError::Corrupt(_)
    ));
}

#[test]
fn load_errors_exit_with_data_code() {
    let dir = tempfile::tempdir().unwrap();
    let missing = load_checkpoint(dir.path().join("nope.ckpt"), None).unwrap_err();
    assert!(matches!(missing, AppError::Io { .. }));
    assert_eq!(missing.exit_code(), 2);
    let path = dir.path().join("short.ckpt");
    std::fs::write(&path, b"EMON").unwrap();
    let short = load_checkpoint(&path, None).unwrap_err();
    assert!(matches!(
        short,
        AppError::Checkpoint {
            source: CheckpointError::Truncated { .. },
            ..
        }
    ));
    assert_eq!(short.exit_code(), 2);
}
