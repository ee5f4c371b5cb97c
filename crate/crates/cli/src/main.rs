mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ehrgan::config::{parse_arms, parse_classifiers, ExperimentConfig};

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_PARTIAL: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "ehrgan",
    version,
    about = "Autoencoder imputation and AC-GAN disease prediction on the WDBC dataset"
)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Config file of `key = value` lines (defaults apply to missing keys).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; trial t uses seed + t.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma list of dt,nb,svm,ada,rf,mlp,gb,acgan.
    #[arg(long, global = true, value_name = "LIST")]
    classifiers: Option<String>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true)]
    folds: Option<usize>,
    /// Imputation arm(s) to evaluate.
    #[arg(long, global = true, value_enum)]
    arm: Option<ArmChoice>,
    /// Worker threads for the experiment grid (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArmChoice {
    Mean,
    Ae,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate missingness and write the masked dataset, its ground truth and a manifest.
    Prepare,
    /// Run the cross-validated comparison and write metrics, ROC data and models.
    Run,
    /// Embed records with t-SNE for the imputation or generation map.
    Tsne {
        #[arg(value_enum)]
        mode: TsneMode,
    },
    /// Configuration helpers.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
    },
}

#[derive(Subcommand)]
enum ConfigAction {
    /// Print the fully commented configuration.
    Template,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TsneMode {
    Imputation,
    Generation,
}

impl Overrides {
    fn apply(&self) -> ehrgan::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(list) = &self.classifiers {
            cfg.classifiers = parse_classifiers(list)?;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(f) = self.folds {
            cfg.folds = f;
        }
        if let Some(a) = self.arm {
            cfg.arms = parse_arms(match a {
                ArmChoice::Mean => "mean",
                ArmChoice::Ae => "ae",
                ArmChoice::Both => "both",
            })?;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let cfg = match cli.overrides.apply() {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let outcome = match cli.command {
        Command::Prepare => commands::prepare(&cfg).map(|_| 0),
        Command::Run => commands::run(&cfg),
        Command::Tsne { mode } => commands::tsne(&cfg, mode).map(|_| 0),
        Command::Config {
            action: ConfigAction::Template,
        } => {
            print!("{}", cfg.template());
            Ok(0)
        }
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
