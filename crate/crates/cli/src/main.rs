/// `println!` that exits quietly when stdout is closed, e.g. piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if let Err(e) = writeln!(std::io::stdout().lock(), $($arg)*) {
            if e.kind() == std::io::ErrorKind::BrokenPipe {
                std::process::exit(0);
            }
            panic!("failed writing to stdout: {e}");
        }
    }};
}

mod commands;
mod config;
mod failure;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qlabel::baselines::BaselineKind;
use qlabel::training::TrainConfig;

use crate::commands::{AnyModel, PrepareArgs};
use crate::config::RunConfig;
use crate::failure::Failure;

/// Single-readout quantum multi-classifier: quantum-label clustering,
/// supervised fine-tuning, evaluation and baselines.
#[derive(Parser, Debug)]
#[command(name = "qlabel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// Flat `key=value` configuration file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Supervised loss weight in [0, 1]
    #[arg(long)]
    w: Option<f64>,
    /// Adjuster threshold, or `auto`
    #[arg(long)]
    r: Option<String>,
    /// `exact`, `shots N` or `noisy P1 P2 PM [N]`
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    cluster_steps: Option<usize>,
    #[arg(long)]
    supervised_steps: Option<usize>,
    /// Train with the plain label distance only
    #[arg(long)]
    no_adjuster: bool,
}

impl ConfigArgs {
    /// Default, then the configuration file, then `--set`, then typed flags.
    fn resolve(&self, base: TrainConfig) -> Result<RunConfig, Failure> {
        let mut run = RunConfig::new(base);
        if let Some(path) = &self.config {
            run.apply_file(path)?;
        }
        run.apply_pairs(self.set.iter().map(String::as_str), "--set")?;
        let mut flags = Vec::new();
        if let Some(s) = self.seed {
            flags.push(format!("seed={s}"));
        }
        if let Some(w) = self.w {
            flags.push(format!("w={w}"));
        }
        if let Some(r) = &self.r {
            flags.push(format!("r={r}"));
        }
        if let Some(m) = &self.mode {
            flags.push(format!("mode={m}"));
        }
        if let Some(n) = self.cluster_steps {
            flags.push(format!("cluster_steps={n}"));
        }
        if let Some(n) = self.supervised_steps {
            flags.push(format!("supervised_steps={n}"));
        }
        if self.no_adjuster {
            flags.push("adjuster=false".into());
        }
        run.apply_pairs(flags.iter().map(String::as_str), "flag")?;
        run.validate()?;
        Ok(run)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split a dataset, fit PCA and min-max scaling, write feature CSVs
    Prepare {
        /// `iris` or `mnist` (overrides the `dataset` key)
        #[arg(long)]
        dataset: Option<String>,
        /// Iris CSV file
        #[arg(long)]
        data: Option<PathBuf>,
        /// MNIST IDX image file (optionally gzipped)
        #[arg(long)]
        images: Option<PathBuf>,
        /// MNIST IDX label file (optionally gzipped)
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Comma-separated class subset
        #[arg(long)]
        classes: Option<String>,
        #[arg(long)]
        qubits: Option<usize>,
        #[arg(long)]
        train_per_class: Option<usize>,
        #[arg(long)]
        test_per_class: Option<usize>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Variational clustering; writes a checkpoint with labels and scaler array
    Cluster {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Supervised training towards the quantum labels
    Train {
        #[arg(long)]
        train: PathBuf,
        /// Clustering checkpoint; clustering runs first when omitted
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Test accuracy, confusion matrix and per-instance Bloch coordinates
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        test: PathBuf,
        /// Directory for confusion.csv, bloch.csv, metrics.csv and eval.txt
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Classify one feature row
    Predict {
        #[arg(long)]
        model: PathBuf,
        /// Comma-separated feature values
        #[arg(long, allow_hyphen_values = true)]
        features: String,
        /// Pipeline from `prepare`; applied to raw features first
        #[arg(long)]
        pipeline: Option<PathBuf>,
    },
    /// Print quantum labels, their distances and the suggested threshold
    Labels {
        /// Model or clustering checkpoint
        #[arg(long)]
        model: PathBuf,
    },
    /// Train a z-expectation baseline with the same budget
    Baseline {
        /// `basebin` or `basemea`
        #[arg(long)]
        kind: String,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Prepare {
            dataset,
            data,
            images,
            labels,
            classes,
            qubits,
            train_per_class,
            test_per_class,
            out,
            cfg,
        } => {
            let mut run = cfg.resolve(TrainConfig::default())?;
            let overrides = [
                ("dataset", dataset),
                ("classes", classes),
                ("qubits", qubits.map(|v| v.to_string())),
                ("train_per_class", train_per_class.map(|v| v.to_string())),
                ("test_per_class", test_per_class.map(|v| v.to_string())),
            ];
            for (k, v) in overrides {
                if let Some(v) = v {
                    run.set(k, &v).map_err(|e| e.context("flag"))?;
                }
            }
            run.validate()?;
            let args = PrepareArgs {
                data,
                images,
                labels,
                out,
            };
            commands::prepare(&args, &run)
        }
        Command::Cluster { train, out, cfg } => commands::cluster(&train, &out, &cfg.resolve(TrainConfig::default())?),
        Command::Train {
            train,
            checkpoint,
            out,
            cfg,
        } => {
            let base = match &checkpoint {
                Some(path) => commands::load_checkpoint(path)?.1,
                None => TrainConfig::default(),
            };
            commands::train(&train, checkpoint.as_deref(), &out, &cfg.resolve(base)?)
        }
        Command::Eval { model, test, out, cfg } => {
            let loaded = AnyModel::load(&model)?;
            let run = cfg.resolve(loaded.config().clone())?;
            commands::eval(&model, &test, out.as_deref(), loaded, &run)
        }
        Command::Predict {
            model,
            features,
            pipeline,
        } => commands::predict(&AnyModel::load(&model)?, &features, pipeline.as_deref()),
        Command::Labels { model } => commands::labels(&model),
        Command::Baseline {
            kind,
            train,
            test,
            out,
            cfg,
        } => {
            let kind = BaselineKind::parse(&kind)?;
            commands::baseline(
                kind,
                &train,
                test.as_deref(),
                &out,
                &cfg.resolve(TrainConfig::default())?,
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", first.trim_start_matches("error: "));
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
