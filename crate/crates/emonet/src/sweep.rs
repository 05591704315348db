//! Configuration and hyper-parameter sweeps under a shared seed and budget.

use std::fmt::Write as _;
use std::time::Instant;

use emonet_core::metrics::accuracy;
use emonet_core::training::split_for_training;
use emonet_core::{
    build_model, Example, Init, Model, NetworkConfig, Prng, TrainConfig, Trainer, Variant,
};

use crate::error::AppError;

/// Training budget shared by every sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepBudget {
    pub epochs: usize,
    pub batches_per_epoch: usize,
    pub learning_rate: f64,
    pub l2_strength: f64,
    pub seed: u64,
    pub eval_fraction: f64,
    pub init: Init,
}

impl Default for SweepBudget {
    fn default() -> Self {
        let t = TrainConfig::default();
        SweepBudget {
            epochs: 1,
            batches_per_epoch: t.batches_per_epoch,
            learning_rate: t.learning_rate,
            l2_strength: t.l2_strength,
            seed: t.seed,
            eval_fraction: t.eval_fraction,
            init: NetworkConfig::default().init,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigRow {
    pub variant: Variant,
    pub val_top1: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamRow {
    pub learning_rate: f64,
    pub l2_strength: f64,
    pub val_top1: f64,
}

/// Trains one cell and scores it on the hold-out split.
fn run_cell(
    dataset: &[Example],
    variant: Variant,
    budget: &SweepBudget,
    learning_rate: f64,
    l2_strength: f64,
) -> Result<f64, AppError> {
    let train_cfg = TrainConfig {
        epochs: budget.epochs,
        batches_per_epoch: budget.batches_per_epoch,
        learning_rate,
        l2_strength,
        seed: budget.seed,
        eval_fraction: budget.eval_fraction,
    };
    let mut net_cfg = NetworkConfig::new(variant);
    net_cfg.init = budget.init;
    net_cfg.l2_strength = l2_strength;
    let (train, validation) = split_for_training(dataset, &train_cfg)?;
    if validation.is_empty() {
        return Err(AppError::Usage(
            "hold-out split is empty; use more data".into(),
        ));
    }
    let model: Model<f32> = build_model(&net_cfg, &mut Prng::new(budget.seed))?;
    // Validation is scored once at the end rather than every epoch.
    let mut trainer = Trainer::new(model, train, Vec::new(), &train_cfg)?;
    for _ in 0..budget.epochs {
        trainer.run_epoch()?;
    }
    Ok(accuracy(trainer.model(), &validation)?)
}

pub fn sweep_configs(
    dataset: &[Example],
    variants: &[Variant],
    budget: &SweepBudget,
) -> Result<Vec<ConfigRow>, AppError> {
    variants
        .iter()
        .map(|&variant| {
            let start = Instant::now();
            let val_top1 = run_cell(
                dataset,
                variant,
                budget,
                budget.learning_rate,
                budget.l2_strength,
            )?;
            Ok(ConfigRow {
                variant,
                val_top1,
                wall_seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect()
}

/// Every `(learning rate, l2)` pair in `grid`, in order.
pub fn sweep_params(
    dataset: &[Example],
    variant: Variant,
    grid: &[(f64, f64)],
    budget: &SweepBudget,
) -> Result<Vec<ParamRow>, AppError> {
    if grid.is_empty() {
        return Err(AppError::Usage("parameter grid is empty".into()));
    }
    grid.iter()
        .map(|&(lr, l2)| {
            Ok(ParamRow {
                learning_rate: lr,
                l2_strength: l2,
                val_top1: run_cell(dataset, variant, budget, lr, l2)?,
            })
        })
        .collect()
}

pub fn configs_csv(rows: &[ConfigRow]) -> String {
    let mut s = String::from("variant,val_top1,wall_seconds\n");
    for r in rows {
        writeln!(s, "{},{},{}", r.variant, r.val_top1, r.wall_seconds).unwrap();
    }
    s
}

pub fn params_csv(rows: &[ParamRow]) -> String {
    let mut s = String::from("learning_rate,l2,val_top1\n");
    for r in rows {
        writeln!(s, "{},{},{}", r.learning_rate, r.l2_strength, r.val_top1).unwrap();
    }
    s
}
