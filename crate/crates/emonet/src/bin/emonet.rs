use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emonet::report::{confusion_table, report_csv};
use emonet::sweep::{configs_csv, params_csv};
use emonet::{
    encode_dataset, export_curve, load_checkpoint, load_dataset, load_stop_words, save_checkpoint,
    sweep_configs, sweep_params, AppError, SweepBudget,
};
use emonet_core::text::encode_dialogue;
use emonet_core::training::split_for_training;
use emonet_core::{
    build_model, evaluate, EmotionLabel, Example, Init, Model, NetworkConfig, Prng, StopWordList,
    TrainConfig, Trainer, Variant,
};

/// Emotion classification of short dialogues with a character-level CNN.
#[derive(Parser)]
#[command(name = "emonet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a dataset and print one hex-encoded 144-byte sequence per line.
    Preprocess {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model and write a checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a labeled dataset.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        stopwords: Option<PathBuf>,
        /// Write the per-class CSV here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify one dialogue.
    Predict {
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        text: String,
        #[arg(long)]
        stopwords: Option<PathBuf>,
    },
    /// Compare network variants under one budget.
    SweepConfig {
        #[command(flatten)]
        common: SweepArgs,
        #[arg(long, value_delimiter = ',', default_value = "A,B,C,D")]
        variants: Vec<Variant>,
        #[arg(long, default_value_t = 5e-6)]
        lr: f64,
        #[arg(long, default_value_t = 1.5e-4)]
        l2: f64,
    },
    /// Grid over learning rate and L2 strength.
    SweepParams {
        #[command(flatten)]
        common: SweepArgs,
        #[arg(long, default_value = "B")]
        variant: Variant,
        /// Learning rates (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        lr: Vec<f64>,
        /// L2 strengths (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        l2: Vec<f64>,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long, default_value = "B")]
    variant: Variant,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 5e-6)]
    lr: f64,
    #[arg(long, default_value_t = 1.5e-4)]
    l2: f64,
    #[arg(long, default_value_t = 32)]
    batches: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    eval_fraction: f64,
    /// `he` or `gaussian:<mean>:<std>`.
    #[arg(long, default_value = "gaussian:0:0.01")]
    init: Init,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    curve: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    epochs: usize,
    #[arg(long, default_value_t = 32)]
    batches: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    eval_fraction: f64,
    #[arg(long, default_value = "gaussian:0:0.01")]
    init: Init,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn stop_words(path: Option<&Path>) -> Result<StopWordList, AppError> {
    path.map_or_else(|| Ok(StopWordList::empty()), load_stop_words)
}

fn labeled(data: &Path, stops: Option<&Path>) -> Result<Vec<Example>, AppError> {
    Ok(encode_dataset(&load_dataset(data)?, &stop_words(stops)?))
}

fn write_or_print(path: Option<&Path>, contents: &str) -> Result<(), AppError> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|source| AppError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn train(args: TrainArgs) -> Result<(), AppError> {
    let dataset = labeled(&args.data, args.stopwords.as_deref())?;
    let config = TrainConfig {
        epochs: args.epochs,
        batches_per_epoch: args.batches,
        learning_rate: args.lr,
        l2_strength: args.l2,
        seed: args.seed,
        eval_fraction: args.eval_fraction,
    };
    let mut net = NetworkConfig::new(args.variant);
    net.init = args.init;
    net.l2_strength = args.l2;
    let (train_set, validation) = split_for_training(&dataset, &config)?;
    eprintln!(
        "variant {}: {} training / {} hold-out examples",
        args.variant,
        train_set.len(),
        validation.len()
    );
    let model: Model<f32> = build_model(&net, &mut Prng::new(args.seed))?;
    let mut trainer = Trainer::new(model, train_set, validation, &config)?;
    for epoch in 1..=args.epochs {
        let val = trainer.run_epoch()?;
        let last = trainer.log().steps.last().map_or(f64::NAN, |s| s.1);
        match val {
            Some(acc) => eprintln!("epoch {epoch}: loss {last:.5} val_top1 {acc:.4}"),
            None => eprintln!("epoch {epoch}: loss {last:.5}"),
        }
    }
    let (model, log) = trainer.finish();
    save_checkpoint(&model, &args.out)?;
    if let Some(curve) = &args.curve {
        export_curve(&log, curve)?;
    }
    Ok(())
}

fn budget(common: &SweepArgs, lr: f64, l2: f64) -> SweepBudget {
    SweepBudget {
        epochs: common.epochs,
        batches_per_epoch: common.batches,
        learning_rate: lr,
        l2_strength: l2,
        seed: common.seed,
        eval_fraction: common.eval_fraction,
        init: common.init,
    }
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Preprocess {
            data,
            stopwords,
            out,
        } => {
            let stops = stop_words(stopwords.as_deref())?;
            let mut s = String::new();
            for d in load_dataset(&data)? {
                let enc = encode_dialogue(&d.text, &stops);
                for b in enc.codes() {
                    s.push_str(&format!("{b:02x}"));
                }
                s.push('\n');
            }
            write_or_print(Some(&out), &s)
        }
        Command::Train(args) => train(args),
        Command::Eval {
            data,
            ckpt,
            stopwords,
            report,
        } => {
            let model = load_checkpoint(&ckpt, None)?;
            let dataset = labeled(&data, stopwords.as_deref())?;
            let r = evaluate(&model, &dataset)?;
            eprint!("{}", confusion_table(&r));
            write_or_print(report.as_deref(), &report_csv(&r))
        }
        Command::Predict {
            ckpt,
            text,
            stopwords,
        } => {
            let model = load_checkpoint(&ckpt, None)?;
            let seq = encode_dialogue(&text, &stop_words(stopwords.as_deref())?);
            let (label, probs) = model.predict(&seq)?;
            println!("{label}");
            for (l, p) in EmotionLabel::ALL.iter().zip(probs) {
                println!("{l}\t{p:.6}");
            }
            Ok(())
        }
        Command::SweepConfig {
            common,
            variants,
            lr,
            l2,
        } => {
            let dataset = labeled(&common.data, common.stopwords.as_deref())?;
            let rows = sweep_configs(&dataset, &variants, &budget(&common, lr, l2))?;
            write_or_print(common.out.as_deref(), &configs_csv(&rows))
        }
        Command::SweepParams {
            common,
            variant,
            lr,
            l2,
        } => {
            let dataset = labeled(&common.data, common.stopwords.as_deref())?;
            let grid: Vec<(f64, f64)> = lr
                .iter()
                .flat_map(|&g| l2.iter().map(move |&l| (g, l)))
                .collect();
            let rows = sweep_params(&dataset, variant, &grid, &budget(&common, lr[0], l2[0]))?;
            write_or_print(common.out.as_deref(), &params_csv(&rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
