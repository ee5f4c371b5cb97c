//! Experiment configuration: a flat `key = value` file with `#` comments.
//!
//! Every key has a default; a file only needs the keys it changes. The config
//! hash covers every key that can influence results, so two runs with equal
//! hashes produce identical outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::acgan::{AcganConfig, GeneratorObjective};
use crate::baselines::{
    AdaBoostConfig, BaselineConfig, Classifier, ForestConfig, Gamma, GradientBoostingConfig,
    MlpConfig, SvmConfig, TreeConfig,
};
use crate::data::{LoadOptions, MaskedMatrix, MissingnessSpec};
use crate::error::{Error, Result};
use crate::impute::{AeLoss, AutoencoderConfig, Corruption};

/// Where scaling statistics and imputers are fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakageMode {
    /// Once on the whole dataset before cross-validation.
    Paper,
    /// Inside every training fold.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Arm {
    Mean,
    Ae,
}

impl Arm {
    pub const BOTH: [Arm; 2] = [Arm::Mean, Arm::Ae];

    pub fn tag(self) -> &'static str {
        match self {
            Arm::Mean => "mean",
            Arm::Ae => "ae",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Arm::Mean),
            "ae" => Ok(Arm::Ae),
            _ => Err(Error::Config(format!("unknown arm {s:?} (mean, ae)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AeCorruption {
    None,
    /// Missing patterns resampled from the dataset's own mask.
    Patterns,
    Dropout(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    pub header: bool,
    pub zero_is_missing: bool,
    pub seed: u64,
    pub mask_seed: u64,
    pub missing_attr_count: usize,
    pub missing_fraction: (usize, usize),
    pub sparsity_threshold: f64,
    pub leakage_mode: LeakageMode,

    pub ae_val_fraction: f64,
    pub ae_patience: usize,
    pub ae_max_epochs: usize,
    pub ae_batch: usize,
    pub ae_lr: f64,
    pub ae_momentum: f64,
    pub ae_loss: AeLoss,
    pub ae_corruption: AeCorruption,

    pub acgan_noise_dim: usize,
    pub acgan_batch: usize,
    pub acgan_epochs: usize,
    pub acgan_alpha: f64,
    pub acgan_beta1: f64,
    pub acgan_d_steps: usize,
    pub acgan_g_objective: GeneratorObjective,

    pub dt_max_depth: Option<usize>,
    pub dt_min_leaf: usize,
    pub nb_var_smoothing: f64,
    pub svm_c: f64,
    pub svm_gamma: Gamma,
    pub svm_tol: f64,
    pub svm_max_iter: usize,
    pub rf_trees: usize,
    pub rf_attrs: usize,
    pub rf_bootstrap: bool,
    pub rf_per_split: bool,
    pub ada_estimators: usize,
    pub gb_estimators: usize,
    pub gb_lr: f64,
    pub gb_depth: usize,
    pub mlp_hidden: usize,
    pub mlp_epochs: usize,
    pub mlp_batch: usize,
    pub mlp_lr: f64,
    pub mlp_l2: f64,

    pub folds: usize,
    pub trials: usize,
    pub threshold: f64,
    pub classifiers: Vec<Classifier>,
    pub arms: Vec<Arm>,

    pub tsne_perplexity: f64,
    pub tsne_iterations: usize,
    pub tsne_seed: u64,
    pub tsne_arm: Arm,

    pub out_dir: PathBuf,
    /// 0 = all available cores.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let ae = AutoencoderConfig::default();
        let gan = AcganConfig::default();
        let svm = SvmConfig::default();
        let forest = ForestConfig::default();
        let gb = GradientBoostingConfig::default();
        let mlp = MlpConfig::default();
        ExperimentConfig {
            dataset_path: PathBuf::from("data/wdbc.data"),
            header: false,
            zero_is_missing: true,
            seed: 1,
            mask_seed: 0,
            missing_attr_count: 15,
            missing_fraction: (1, 2),
            sparsity_threshold: 0.1,
            leakage_mode: LeakageMode::Paper,
            ae_val_fraction: ae.val_fraction,
            ae_patience: ae.patience,
            ae_max_epochs: ae.max_epochs,
            ae_batch: ae.batch_size,
            ae_lr: ae.learning_rate,
            ae_momentum: ae.momentum,
            ae_loss: ae.loss,
            ae_corruption: AeCorruption::Patterns,
            acgan_noise_dim: gan.noise_dim,
            acgan_batch: gan.batch_size,
            acgan_epochs: gan.epochs,
            acgan_alpha: gan.adam_alpha,
            acgan_beta1: gan.adam_beta1,
            acgan_d_steps: gan.d_steps_per_g_step,
            acgan_g_objective: gan.generator_objective,
            dt_max_depth: None,
            dt_min_leaf: 1,
            nb_var_smoothing: 1e-9,
            svm_c: svm.c,
            svm_gamma: svm.gamma,
            svm_tol: svm.tol,
            svm_max_iter: svm.max_iter,
            rf_trees: forest.n_trees,
            rf_attrs: forest.attrs_per_tree,
            rf_bootstrap: forest.bootstrap,
            rf_per_split: forest.per_split,
            ada_estimators: AdaBoostConfig::default().n_estimators,
            gb_estimators: gb.n_estimators,
            gb_lr: gb.learning_rate,
            gb_depth: gb.max_depth,
            mlp_hidden: mlp.hidden,
            mlp_epochs: mlp.epochs,
            mlp_batch: mlp.batch_size,
            mlp_lr: mlp.learning_rate,
            mlp_l2: mlp.l2,
            folds: 5,
            trials: 10,
            threshold: 0.5,
            classifiers: Classifier::ALL.to_vec(),
            arms: Arm::BOTH.to_vec(),
            tsne_perplexity: 30.0,
            tsne_iterations: 1000,
            tsne_seed: 0,
            tsne_arm: Arm::Ae,
            out_dir: PathBuf::from("out"),
            workers: 0,
        }
    }
}

/// `(key, source, description)`; source is `paper` when the paper states
/// the value and `decision` otherwise.
const KEY_DOCS: &[(&str, &str, &str)] = &[
    (
        "dataset_path",
        "decision",
        "WDBC file: id, diagnosis (M/B), 30 attributes",
    ),
    ("header", "decision", "input has a header row"),
    (
        "zero_is_missing",
        "paper",
        "raw zeros are the original missing values",
    ),
    ("seed", "decision", "master seed; trial t uses seed + t"),
    ("mask_seed", "decision", "seed of the simulated missingness"),
    (
        "missing_attr_count",
        "paper",
        "leading attributes that lose values",
    ),
    (
        "missing_fraction",
        "paper",
        "fraction of each class masked, as a/b",
    ),
    (
        "sparsity_threshold",
        "paper",
        "records below this sparsity train the autoencoder",
    ),
    (
        "leakage_mode",
        "decision",
        "paper = fit scaling/imputers once; strict = per training fold",
    ),
    (
        "ae_val_fraction",
        "decision",
        "autoencoder validation share",
    ),
    (
        "ae_patience",
        "decision",
        "early-stopping patience in epochs",
    ),
    ("ae_max_epochs", "decision", "autoencoder epoch limit"),
    ("ae_batch", "decision", "autoencoder minibatch size"),
    ("ae_lr", "decision", "autoencoder SGD learning rate"),
    ("ae_momentum", "decision", "autoencoder SGD momentum"),
    ("ae_loss", "decision", "full | observed_only"),
    ("ae_corruption", "decision", "none | patterns | dropout:<p>"),
    (
        "acgan_noise_dim",
        "decision",
        "generator noise width, uniform(-1, 1)",
    ),
    ("acgan_batch", "decision", "AC-GAN minibatch size"),
    ("acgan_epochs", "decision", "AC-GAN epochs"),
    ("acgan_alpha", "decision", "Adam step size for both players"),
    ("acgan_beta1", "decision", "Adam beta1 for both players"),
    (
        "acgan_d_steps",
        "decision",
        "discriminator steps per generator step",
    ),
    ("acgan_g_objective", "decision", "minimax | non_saturating"),
    (
        "dt_max_depth",
        "decision",
        "decision tree depth limit or none",
    ),
    ("dt_min_leaf", "decision", "minimum rows per tree leaf"),
    (
        "nb_var_smoothing",
        "decision",
        "naive Bayes variance floor factor",
    ),
    ("svm_c", "decision", "SVM box constraint"),
    (
        "svm_gamma",
        "decision",
        "auto (1/d) | scale (1/(d var)) | <value>",
    ),
    ("svm_tol", "decision", "SMO KKT tolerance"),
    ("svm_max_iter", "decision", "SMO iteration limit"),
    ("rf_trees", "paper", "random forest size"),
    ("rf_attrs", "paper", "random attributes per tree"),
    ("rf_bootstrap", "paper", "bootstrap rows per tree"),
    (
        "rf_per_split",
        "decision",
        "draw attributes per split instead of per tree",
    ),
    ("ada_estimators", "paper", "AdaBoost stumps"),
    ("gb_estimators", "paper", "gradient boosting rounds"),
    ("gb_lr", "decision", "gradient boosting shrinkage"),
    ("gb_depth", "decision", "gradient boosting tree depth"),
    (
        "mlp_hidden",
        "paper",
        "MLP hidden width (same as the discriminator)",
    ),
    ("mlp_epochs", "decision", "MLP epochs"),
    ("mlp_batch", "decision", "MLP minibatch size"),
    ("mlp_lr", "decision", "MLP Adam step size"),
    ("mlp_l2", "decision", "MLP L2 penalty"),
    ("folds", "paper", "cross-validation folds"),
    ("trials", "paper", "repeated cross-validation trials"),
    (
        "threshold",
        "paper",
        "score threshold for the confusion matrix",
    ),
    (
        "classifiers",
        "decision",
        "comma list of dt,nb,svm,ada,rf,mlp,gb,acgan",
    ),
    ("arms", "decision", "comma list of mean,ae"),
    ("tsne_perplexity", "decision", "t-SNE perplexity"),
    ("tsne_iterations", "decision", "t-SNE gradient steps"),
    ("tsne_seed", "decision", "t-SNE initialization seed"),
    (
        "tsne_arm",
        "decision",
        "arm used to train the generator for the generation map",
    ),
    ("out_dir", "decision", "output directory"),
    ("workers", "decision", "worker threads, 0 = all cores"),
];

/// Keys that never change results; excluded from the hash.
const UNHASHED: [&str; 2] = ["out_dir", "workers"];

fn bad(key: &str, value: &str) -> Error {
    Error::Config(format!("{key}: invalid value {value:?}"))
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

fn join<T>(items: &[T], f: impl Fn(&T) -> &str) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Every key with its canonical value string, in template order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let opt = |v: Option<usize>| v.map_or("none".to_string(), |d| d.to_string());
        vec![
            ("dataset_path", self.dataset_path.display().to_string()),
            ("header", self.header.to_string()),
            ("zero_is_missing", self.zero_is_missing.to_string()),
            ("seed", self.seed.to_string()),
            ("mask_seed", self.mask_seed.to_string()),
            ("missing_attr_count", self.missing_attr_count.to_string()),
            (
                "missing_fraction",
                format!("{}/{}", self.missing_fraction.0, self.missing_fraction.1),
            ),
            ("sparsity_threshold", self.sparsity_threshold.to_string()),
            (
                "leakage_mode",
                match self.leakage_mode {
                    LeakageMode::Paper => "paper",
                    LeakageMode::Strict => "strict",
                }
                .into(),
            ),
            ("ae_val_fraction", self.ae_val_fraction.to_string()),
            ("ae_patience", self.ae_patience.to_string()),
            ("ae_max_epochs", self.ae_max_epochs.to_string()),
            ("ae_batch", self.ae_batch.to_string()),
            ("ae_lr", self.ae_lr.to_string()),
            ("ae_momentum", self.ae_momentum.to_string()),
            (
                "ae_loss",
                match self.ae_loss {
                    AeLoss::Full => "full",
                    AeLoss::ObservedOnly => "observed_only",
                }
                .into(),
            ),
            (
                "ae_corruption",
                match self.ae_corruption {
                    AeCorruption::None => "none".into(),
                    AeCorruption::Patterns => "patterns".into(),
                    AeCorruption::Dropout(p) => format!("dropout:{p}"),
                },
            ),
            ("acgan_noise_dim", self.acgan_noise_dim.to_string()),
            ("acgan_batch", self.acgan_batch.to_string()),
            ("acgan_epochs", self.acgan_epochs.to_string()),
            ("acgan_alpha", self.acgan_alpha.to_string()),
            ("acgan_beta1", self.acgan_beta1.to_string()),
            ("acgan_d_steps", self.acgan_d_steps.to_string()),
            (
                "acgan_g_objective",
                match self.acgan_g_objective {
                    GeneratorObjective::Minimax => "minimax",
                    GeneratorObjective::NonSaturating => "non_saturating",
                }
                .into(),
            ),
            ("dt_max_depth", opt(self.dt_max_depth)),
            ("dt_min_leaf", self.dt_min_leaf.to_string()),
            ("nb_var_smoothing", self.nb_var_smoothing.to_string()),
            ("svm_c", self.svm_c.to_string()),
            (
                "svm_gamma",
                match self.svm_gamma {
                    Gamma::Auto => "auto".into(),
                    Gamma::Scale => "scale".into(),
                    Gamma::Value(g) => g.to_string(),
                },
            ),
            ("svm_tol", self.svm_tol.to_string()),
            ("svm_max_iter", self.svm_max_iter.to_string()),
            ("rf_trees", self.rf_trees.to_string()),
            ("rf_attrs", self.rf_attrs.to_string()),
            ("rf_bootstrap", self.rf_bootstrap.to_string()),
            ("rf_per_split", self.rf_per_split.to_string()),
            ("ada_estimators", self.ada_estimators.to_string()),
            ("gb_estimators", self.gb_estimators.to_string()),
            ("gb_lr", self.gb_lr.to_string()),
            ("gb_depth", self.gb_depth.to_string()),
            ("mlp_hidden", self.mlp_hidden.to_string()),
            ("mlp_epochs", self.mlp_epochs.to_string()),
            ("mlp_batch", self.mlp_batch.to_string()),
            ("mlp_lr", self.mlp_lr.to_string()),
            ("mlp_l2", self.mlp_l2.to_string()),
            ("folds", self.folds.to_string()),
            ("trials", self.trials.to_string()),
            ("threshold", self.threshold.to_string()),
            ("classifiers", join(&self.classifiers, |c| c.tag())),
            ("arms", join(&self.arms, |a| a.tag())),
            ("tsne_perplexity", self.tsne_perplexity.to_string()),
            ("tsne_iterations", self.tsne_iterations.to_string()),
            ("tsne_seed", self.tsne_seed.to_string()),
            ("tsne_arm", self.tsne_arm.tag().into()),
            ("out_dir", self.out_dir.display().to_string()),
            ("workers", self.workers.to_string()),
        ]
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "dataset_path" => self.dataset_path = PathBuf::from(v),
            "header" => self.header = parse_bool(key, v)?,
            "zero_is_missing" => self.zero_is_missing = parse_bool(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "mask_seed" => self.mask_seed = parse(key, v)?,
            "missing_attr_count" => self.missing_attr_count = parse(key, v)?,
            "missing_fraction" => {
                let (a, b) = v.split_once('/').ok_or_else(|| bad(key, v))?;
                let frac: (usize, usize) = (parse(key, a.trim())?, parse(key, b.trim())?);
                if frac.1 == 0 || frac.0 > frac.1 {
                    return Err(bad(key, v));
                }
                self.missing_fraction = frac;
            }
            "sparsity_threshold" => self.sparsity_threshold = parse(key, v)?,
            "leakage_mode" => {
                self.leakage_mode = match v {
                    "paper" => LeakageMode::Paper,
                    "strict" => LeakageMode::Strict,
                    _ => return Err(bad(key, v)),
                }
            }
            "ae_val_fraction" => self.ae_val_fraction = parse(key, v)?,
            "ae_patience" => self.ae_patience = parse(key, v)?,
            "ae_max_epochs" => self.ae_max_epochs = parse(key, v)?,
            "ae_batch" => self.ae_batch = parse(key, v)?,
            "ae_lr" => self.ae_lr = parse(key, v)?,
            "ae_momentum" => self.ae_momentum = parse(key, v)?,
            "ae_loss" => {
                self.ae_loss = match v {
                    "full" => AeLoss::Full,
                    "observed_only" => AeLoss::ObservedOnly,
                    _ => return Err(bad(key, v)),
                }
            }
            "ae_corruption" => {
                self.ae_corruption = match v {
                    "none" => AeCorruption::None,
                    "patterns" => AeCorruption::Patterns,
                    _ => match v.strip_prefix("dropout:").map(str::parse::<f64>) {
                        Some(Ok(p)) if (0.0..1.0).contains(&p) => AeCorruption::Dropout(p),
                        _ => return Err(bad(key, v)),
                    },
                }
            }
            "acgan_noise_dim" => self.acgan_noise_dim = parse(key, v)?,
            "acgan_batch" => self.acgan_batch = parse(key, v)?,
            "acgan_epochs" => self.acgan_epochs = parse(key, v)?,
            "acgan_alpha" => self.acgan_alpha = parse(key, v)?,
            "acgan_beta1" => self.acgan_beta1 = parse(key, v)?,
            "acgan_d_steps" => self.acgan_d_steps = parse(key, v)?,
            "acgan_g_objective" => {
                self.acgan_g_objective = match v {
                    "minimax" => GeneratorObjective::Minimax,
                    "non_saturating" => GeneratorObjective::NonSaturating,
                    _ => return Err(bad(key, v)),
                }
            }
            "dt_max_depth" => {
                self.dt_max_depth = if v == "none" {
                    None
                } else {
                    Some(parse(key, v)?)
                }
            }
            "dt_min_leaf" => self.dt_min_leaf = parse(key, v)?,
            "nb_var_smoothing" => self.nb_var_smoothing = parse(key, v)?,
            "svm_c" => self.svm_c = parse(key, v)?,
            "svm_gamma" => {
                self.svm_gamma = match v {
                    "auto" => Gamma::Auto,
                    "scale" => Gamma::Scale,
                    _ => Gamma::Value(parse(key, v)?),
                }
            }
            "svm_tol" => self.svm_tol = parse(key, v)?,
            "svm_max_iter" => self.svm_max_iter = parse(key, v)?,
            "rf_trees" => self.rf_trees = parse(key, v)?,
            "rf_attrs" => self.rf_attrs = parse(key, v)?,
            "rf_bootstrap" => self.rf_bootstrap = parse_bool(key, v)?,
            "rf_per_split" => self.rf_per_split = parse_bool(key, v)?,
            "ada_estimators" => self.ada_estimators = parse(key, v)?,
            "gb_estimators" => self.gb_estimators = parse(key, v)?,
            "gb_lr" => self.gb_lr = parse(key, v)?,
            "gb_depth" => self.gb_depth = parse(key, v)?,
            "mlp_hidden" => self.mlp_hidden = parse(key, v)?,
            "mlp_epochs" => self.mlp_epochs = parse(key, v)?,
            "mlp_batch" => self.mlp_batch = parse(key, v)?,
            "mlp_lr" => self.mlp_lr = parse(key, v)?,
            "mlp_l2" => self.mlp_l2 = parse(key, v)?,
            "folds" => self.folds = parse(key, v)?,
            "trials" => self.trials = parse(key, v)?,
            "threshold" => self.threshold = parse(key, v)?,
            "classifiers" => self.classifiers = parse_classifiers(v)?,
            "arms" => self.arms = parse_arms(v)?,
            "tsne_perplexity" => self.tsne_perplexity = parse(key, v)?,
            "tsne_iterations" => self.tsne_iterations = parse(key, v)?,
            "tsne_seed" => self.tsne_seed = parse(key, v)?,
            "tsne_arm" => self.tsne_arm = Arm::from_tag(v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "workers" => self.workers = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies `key = value` lines over the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: format!("expected key = value, got {raw:?}"),
            })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| Error::Parse {
                line: idx + 1,
                msg: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("folds", self.folds),
            ("trials", self.trials),
            ("ae_batch", self.ae_batch),
            ("ae_max_epochs", self.ae_max_epochs),
            ("acgan_noise_dim", self.acgan_noise_dim),
            ("acgan_batch", self.acgan_batch),
            ("acgan_epochs", self.acgan_epochs),
            ("acgan_d_steps", self.acgan_d_steps),
            ("rf_trees", self.rf_trees),
            ("rf_attrs", self.rf_attrs),
            ("mlp_hidden", self.mlp_hidden),
            ("mlp_batch", self.mlp_batch),
        ];
        for (k, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{k} must be positive")));
            }
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.sparsity_threshold)
            || !(0.0..=1.0).contains(&self.threshold)
            || !(0.0..1.0).contains(&self.ae_val_fraction)
        {
            return Err(Error::Config(
                "sparsity_threshold, threshold and ae_val_fraction must lie in [0, 1]".into(),
            ));
        }
        if self.classifiers.is_empty() || self.arms.is_empty() {
            return Err(Error::Config(
                "classifiers and arms must not be empty".into(),
            ));
        }
        Ok(())
    }

    /// Canonical `key=value` lines for every hashed key.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            if !UNHASHED.contains(&k) {
                let _ = writeln!(out, "{k}={v}");
            }
        }
        out
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        sha256_hex(self.canonical().as_bytes())
    }

    /// Hash of the keys that determine the prepared (masked) dataset.
    pub fn prepare_hash(&self) -> String {
        const KEYS: [&str; 6] = [
            "dataset_path",
            "header",
            "zero_is_missing",
            "mask_seed",
            "missing_attr_count",
            "missing_fraction",
        ];
        let mut text = String::new();
        for (k, v) in self.entries() {
            if KEYS.contains(&k) {
                let _ = writeln!(text, "{k}={v}");
            }
        }
        sha256_hex(text.as_bytes())
    }

    /// The full config with every key annotated by its source.
    pub fn template(&self) -> String {
        let mut out = String::from(
            "# Experiment configuration. Lines are key = value; # starts a comment.\n\
             # [paper] values are stated in the paper, [decision] values are choices of this\n\
             # implementation.\n\n",
        );
        for (k, v) in self.entries() {
            let (_, src, doc) = KEY_DOCS
                .iter()
                .find(|(key, _, _)| *key == k)
                .expect("every key is documented");
            let _ = writeln!(out, "# [{src}] {doc}\n{k} = {v}\n");
        }
        out
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            header: self.header,
            zero_is_missing: self.zero_is_missing,
        }
    }

    pub fn missingness(&self) -> MissingnessSpec {
        MissingnessSpec {
            attr_count: self.missing_attr_count,
            numerator: self.missing_fraction.0,
            denominator: self.missing_fraction.1,
        }
    }

    /// Autoencoder settings; pattern corruption draws from `patterns`' mask.
    pub fn autoencoder(&self, patterns: &MaskedMatrix, seed: u64) -> AutoencoderConfig {
        AutoencoderConfig {
            val_fraction: self.ae_val_fraction,
            patience: self.ae_patience,
            max_epochs: self.ae_max_epochs,
            batch_size: self.ae_batch,
            learning_rate: self.ae_lr,
            momentum: self.ae_momentum,
            loss: self.ae_loss,
            corruption: match self.ae_corruption {
                AeCorruption::None => Corruption::None,
                AeCorruption::Patterns => Corruption::Patterns(patterns.mask().to_owned()),
                AeCorruption::Dropout(p) => Corruption::Dropout(p),
            },
            seed,
        }
    }

    pub fn acgan(&self, seed: u64) -> AcganConfig {
        AcganConfig {
            noise_dim: self.acgan_noise_dim,
            batch_size: self.acgan_batch,
            epochs: self.acgan_epochs,
            adam_alpha: self.acgan_alpha,
            adam_beta1: self.acgan_beta1,
            d_steps_per_g_step: self.acgan_d_steps,
            generator_objective: self.acgan_g_objective,
            seed,
        }
    }

    pub fn baselines(&self) -> BaselineConfig {
        BaselineConfig {
            tree: TreeConfig {
                max_depth: self.dt_max_depth,
                min_leaf: self.dt_min_leaf,
            },
            nb_var_smoothing: self.nb_var_smoothing,
            svm: SvmConfig {
                c: self.svm_c,
                gamma: self.svm_gamma,
                tol: self.svm_tol,
                max_iter: self.svm_max_iter,
            },
            forest: ForestConfig {
                n_trees: self.rf_trees,
                attrs_per_tree: self.rf_attrs,
                bootstrap: self.rf_bootstrap,
                per_split: self.rf_per_split,
                seed: 0,
            },
            adaboost: AdaBoostConfig {
                n_estimators: self.ada_estimators,
            },
            gb: GradientBoostingConfig {
                n_estimators: self.gb_estimators,
                learning_rate: self.gb_lr,
                max_depth: self.gb_depth,
            },
            mlp: MlpConfig {
                hidden: self.mlp_hidden,
                epochs: self.mlp_epochs,
                batch_size: self.mlp_batch,
                learning_rate: self.mlp_lr,
                l2: self.mlp_l2,
                seed: 0,
            },
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn parse_classifiers(list: &str) -> Result<Vec<Classifier>> {
    let mut out: Vec<Classifier> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Classifier::from_tag)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn parse_arms(list: &str) -> Result<Vec<Arm>> {
    if list.trim() == "both" {
        return Ok(Arm::BOTH.to_vec());
    }
    let mut out: Vec<Arm> = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(Arm::from_tag)
        .collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    Ok(out)
}
