//! Training-curve CSV: a `step,loss` table, a blank line, then an
//! `epoch,val_top1` table. Values are written in shortest round-trip form.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use emonet_core::TrainLog;

use crate::error::AppError;

pub fn curve_to_string(log: &TrainLog) -> String {
    let mut s = String::from("step,loss\n");
    for (step, loss) in &log.steps {
        writeln!(s, "{step},{loss}").unwrap();
    }
    s.push_str("\nepoch,val_top1\n");
    for (epoch, acc) in &log.epochs {
        writeln!(s, "{epoch},{acc}").unwrap();
    }
    s
}

pub fn export_curve(log: &TrainLog, path: impl AsRef<Path>) -> Result<(), AppError> {
    let path = path.as_ref();
    fs::write(path, curve_to_string(log)).map_err(|e| AppError::io(path, e))
}

/// Inverse of [`curve_to_string`].
pub fn parse_curve(contents: &str) -> Result<TrainLog, String> {
    let mut log = TrainLog::default();
    let mut section = None;
    for (i, line) in contents.lines().enumerate() {
        match line {
            "" => continue,
            "step,loss" => section = Some(0),
            "epoch,val_top1" => section = Some(1),
            row => {
                let (a, b) = row
                    .split_once(',')
                    .ok_or_else(|| format!("line {}: expected two fields", i + 1))?;
                let bad = || format!("line {}: bad number", i + 1);
                let value: f64 = b.parse().map_err(|_| bad())?;
                match section {
                    Some(0) => log.steps.push((a.parse().map_err(|_| bad())?, value)),
                    Some(1) => log.epochs.push((a.parse().map_err(|_| bad())?, value)),
                    _ => return Err(format!("line {}: data before header", i + 1)),
                }
            }
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_log_is_headers_only() {
        let s = curve_to_string(&TrainLog::default());
        assert_eq!(s, "step,loss\n\nepoch,val_top1\n");
        assert_eq!(parse_curve(&s).unwrap(), TrainLog::default());
    }

    #[test]
    fn one_row_per_step() {
        let log = TrainLog {
            steps: vec![(1, 1.5), (2, 1.25), (3, 1.0)],
            epochs: vec![(1, 0.5)],
        };
        let s = curve_to_string(&log);
        let step_rows = s.split("\n\n").next().unwrap().lines().count() - 1;
        assert_eq!(step_rows, 3);
    }

    proptest! {
        #[test]
        fn round_trip(
            steps in proptest::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 0..50),
            accs in proptest::collection::vec(0.0f64..=1.0, 0..10),
        ) {
            let log = TrainLog {
                steps: steps.iter().enumerate().map(|(i, &l)| (i as u64 + 1, l)).collect(),
                epochs: accs.iter().enumerate().map(|(i, &a)| (i + 1, a)).collect(),
            };
            prop_assert_eq!(parse_curve(&curve_to_string(&log)).unwrap(), log);
        }
    }
}
