//! Repeated stratified cross-validation over imputation arms and classifiers.

use std::fmt::Write as _;

use ndarray::{Array2, Axis};
use rayon::prelude::*;

use super::metrics::{auc, average_curves, confusion, fpr_grid, metrics, roc_curve, Metrics};
use crate::acgan::train_acgan;
use crate::baselines::{fit_baseline, BaselineConfig, Classifier, ScorerModel};
use crate::config::{Arm, ExperimentConfig, LeakageMode};
use crate::data::{
    apply_minmax, fit_minmax, load_wdbc, simulate_missing, split_by_sparsity, stratified_kfold,
    MaskedMatrix, ScalingParams, TruthSidecar,
};
use crate::error::{Error, Result};
use crate::impute::{
    fit_mean_imputer, imputation_rmse, impute_autoencoder, impute_mean, train_autoencoder,
    AutoencoderModel, ImputerStats,
};
use crate::seed;

pub const METRIC_NAMES: [&str; 5] = ["accuracy", "sensitivity", "specificity", "auc", "f_score"];
pub const ROC_GRID_POINTS: usize = 1001;

/// Unscaled records with simulated missingness, plus the removed values.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub masked: MaskedMatrix,
    pub truth: TruthSidecar,
}

pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let raw = load_wdbc(&cfg.dataset_path, cfg.load_options())?;
    let (masked, truth) = simulate_missing(&raw.data, cfg.missingness(), cfg.mask_seed)?;
    Ok(PreparedData { masked, truth })
}

/// Scaling, mean imputer and autoencoder fitted on one set of records.
#[derive(Debug, Clone)]
pub struct Imputers {
    pub scaling: ScalingParams,
    pub means: ImputerStats,
    pub autoencoder: AutoencoderModel,
}

/// Fits every preprocessing artifact on `train` (unscaled) only.
pub fn fit_imputers(train: &MaskedMatrix, cfg: &ExperimentConfig, seed: u64) -> Result<Imputers> {
    let scaling = fit_minmax(train)?;
    let scaled = apply_minmax(train, &scaling)?;
    let means = fit_mean_imputer(&scaled)?;
    let low = split_by_sparsity(&scaled, cfg.sparsity_threshold)?.low;
    let autoencoder = train_autoencoder(&low, &cfg.autoencoder(&scaled, seed))?;
    Ok(Imputers {
        scaling,
        means,
        autoencoder,
    })
}

impl Imputers {
    pub fn scale(&self, data: &MaskedMatrix) -> Result<MaskedMatrix> {
        apply_minmax(data, &self.scaling)
    }

    /// Scales `data` and fills its missing cells for `arm`.
    pub fn complete(&self, arm: Arm, data: &MaskedMatrix) -> Result<Array2<f64>> {
        let scaled = self.scale(data)?;
        match arm {
            Arm::Mean => impute_mean(&self.means, &scaled),
            Arm::Ae => impute_autoencoder(&self.autoencoder, &scaled),
        }
    }

    /// RMSE over the simulated-missing cells, in scaled units.
    pub fn rmse(&self, arm: Arm, data: &PreparedData) -> Result<f64> {
        let completed = self.complete(arm, &data.masked)?;
        imputation_rmse(completed.view(), &data.truth.scaled(&self.scaling))
    }
}

fn imputer_seed(cfg: &ExperimentConfig) -> u64 {
    seed::derive(cfg.seed, &[0xae])
}

/// Imputers fitted on every record, as the default leakage mode does.
pub fn fit_full_imputers(data: &PreparedData, cfg: &ExperimentConfig) -> Result<Imputers> {
    fit_imputers(&data.masked, cfg, imputer_seed(cfg))
}

/// Fits `which` on `(x, y)`. The AC-GAN contributes its discriminator.
pub fn fit_classifier(
    which: Classifier,
    x: ndarray::ArrayView2<f64>,
    y: &[u8],
    cfg: &ExperimentConfig,
    baselines: &BaselineConfig,
    seed: u64,
) -> Result<Box<dyn ScorerModel>> {
    match which {
        Classifier::Acgan => {
            let (_, d, _) = train_acgan(x, y, &cfg.acgan(seed))?;
            Ok(Box::new(d))
        }
        other => fit_baseline(other, x, y, baselines, seed),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    pub metrics: Metrics,
    pub auc: f64,
}

impl CellMetrics {
    pub fn values(&self) -> [f64; 5] {
        let m = &self.metrics;
        [
            m.accuracy,
            m.sensitivity,
            m.specificity,
            self.auc,
            m.f_score,
        ]
    }
}

/// One classifier on one arm of one (trial, fold).
#[derive(Debug, Clone, PartialEq)]
pub struct CellRecord {
    pub trial: usize,
    pub fold: usize,
    pub arm: Arm,
    pub classifier: Classifier,
    pub outcome: std::result::Result<CellMetrics, String>,
    /// Held-out scores and labels, empty when the cell failed.
    pub scores: Vec<f64>,
    pub labels: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub arm: Arm,
    pub classifier: Classifier,
    /// Ordered as [`METRIC_NAMES`].
    pub mean: [f64; 5],
    /// Sample standard deviation over cells.
    pub std: [f64; 5],
    pub n_cells: usize,
}

impl SummaryRow {
    pub fn metric(&self, name: &str) -> f64 {
        let k = METRIC_NAMES
            .iter()
            .position(|&m| m == name)
            .expect("known metric name");
        self.mean[k]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RocSeries {
    pub arm: Arm,
    pub classifier: Classifier,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
    /// Per-trial pooled curves averaged on a fixed FPR grid.
    pub roc: Vec<RocSeries>,
    pub cells: Vec<CellRecord>,
    /// Imputation RMSE of the all-record imputers per arm.
    pub imputation_rmse: Vec<(Arm, f64)>,
    pub full_imputers: Imputers,
}

struct ArmData {
    arm: Arm,
    train: Array2<f64>,
    test: Array2<f64>,
}

fn score_cell(
    which: Classifier,
    arm: &ArmData,
    y_train: &[u8],
    y_test: &[u8],
    cfg: &ExperimentConfig,
    baselines: &BaselineConfig,
    seed: u64,
) -> Result<(CellMetrics, Vec<f64>)> {
    let model = fit_classifier(which, arm.train.view(), y_train, cfg, baselines, seed)?;
    let scores = model.score(arm.test.view())?.to_vec();
    let c = confusion(&scores, y_test, cfg.threshold)?;
    let a = auc(&roc_curve(&scores, y_test)?);
    Ok((
        CellMetrics {
            metrics: metrics(&c),
            auc: a,
        },
        scores,
    ))
}

fn arm_matrices(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    full: &[(Arm, Array2<f64>)],
    train_rows: &[usize],
    test_rows: &[usize],
    strict_seed: u64,
) -> Result<Vec<ArmData>> {
    match cfg.leakage_mode {
        LeakageMode::Paper => Ok(full
            .iter()
            .map(|(arm, x)| ArmData {
                arm: *arm,
                train: x.select(Axis(0), train_rows),
                test: x.select(Axis(0), test_rows),
            })
            .collect()),
        LeakageMode::Strict => {
            let train = data.masked.select_rows(train_rows);
            let test = data.masked.select_rows(test_rows);
            let imputers = fit_imputers(&train, cfg, strict_seed)?;
            cfg.arms
                .iter()
                .map(|&arm| {
                    Ok(ArmData {
                        arm,
                        train: imputers.complete(arm, &train)?,
                        test: imputers.complete(arm, &test)?,
                    })
                })
                .collect()
        }
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn summarize(cfg: &ExperimentConfig, cells: &[CellRecord]) -> (Vec<SummaryRow>, Vec<RocSeries>) {
    let grid = fpr_grid(ROC_GRID_POINTS);
    let mut rows = Vec::new();
    let mut roc = Vec::new();
    for &arm in &cfg.arms {
        for &classifier in &cfg.classifiers {
            let mine: Vec<&CellRecord> = cells
                .iter()
                .filter(|c| c.arm == arm && c.classifier == classifier)
                .collect();
            let ok: Vec<[f64; 5]> = mine
                .iter()
                .filter_map(|c| c.outcome.as_ref().ok().map(CellMetrics::values))
                .collect();
            let mut mean = [0.0; 5];
            let mut std = [0.0; 5];
            for k in 0..5 {
                let column: Vec<f64> = ok.iter().map(|v| v[k]).collect();
                (mean[k], std[k]) = mean_std(&column);
            }
            rows.push(SummaryRow {
                arm,
                classifier,
                mean,
                std,
                n_cells: ok.len(),
            });

            let mut curves = Vec::new();
            for trial in 0..cfg.trials {
                let (mut s, mut l) = (Vec::new(), Vec::new());
                for c in mine
                    .iter()
                    .filter(|c| c.trial == trial && c.outcome.is_ok())
                {
                    s.extend_from_slice(&c.scores);
                    l.extend_from_slice(&c.labels);
                }
                if let Ok(curve) = roc_curve(&s, &l) {
                    curves.push(curve);
                }
            }
            if !curves.is_empty() {
                roc.push(RocSeries {
                    arm,
                    classifier,
                    points: average_curves(&curves, &grid),
                });
            }
        }
    }
    (rows, roc)
}

/// Runs every (trial, fold) cell for the configured arms and classifiers.
/// Cells that fail are recorded and the run continues.
pub fn run_cv_experiment(cfg: &ExperimentConfig, data: &PreparedData) -> Result<ExperimentReport> {
    cfg.validate()?;
    let labels = data.masked.labels().to_vec();
    let full_imputers = fit_full_imputers(data, cfg)?;
    let imputation_rmse = Arm::BOTH
        .iter()
        .map(|&arm| Ok((arm, full_imputers.rmse(arm, data)?)))
        .collect::<Result<Vec<_>>>()?;
    let full: Vec<(Arm, Array2<f64>)> = match cfg.leakage_mode {
        LeakageMode::Paper => cfg
            .arms
            .iter()
            .map(|&arm| Ok((arm, full_imputers.complete(arm, &data.masked)?)))
            .collect::<Result<_>>()?,
        LeakageMode::Strict => Vec::new(),
    };
    let baselines = cfg.baselines();

    let plans = (0..cfg.trials)
        .map(|t| stratified_kfold(&labels, cfg.folds, cfg.seed + t as u64))
        .collect::<Result<Vec<_>>>()?;
    let units: Vec<(usize, usize)> = (0..cfg.trials)
        .flat_map(|t| (0..cfg.folds).map(move |f| (t, f)))
        .collect();

    let run_unit = |&(trial, fold): &(usize, usize)| -> Vec<CellRecord> {
        let trial_seed = cfg.seed + trial as u64;
        let train_rows = plans[trial].train_rows(fold);
        let test_rows = plans[trial].test_rows(fold);
        let y_train: Vec<u8> = train_rows.iter().map(|&i| labels[i]).collect();
        let y_test: Vec<u8> = test_rows.iter().map(|&i| labels[i]).collect();
        let strict_seed = seed::derive(trial_seed, &[fold as u64, 0xae]);
        let arms = arm_matrices(cfg, data, &full, &train_rows, &test_rows, strict_seed);
        let mut out = Vec::new();
        for &arm in &cfg.arms {
            for &classifier in &cfg.classifiers {
                let unit_seed = seed::derive(trial_seed, &[fold as u64, classifier as u64]);
                let result = match &arms {
                    Ok(arms) => {
                        let a = arms.iter().find(|a| a.arm == arm).expect("arm prepared");
                        score_cell(classifier, a, &y_train, &y_test, cfg, &baselines, unit_seed)
                    }
                    Err(e) => Err(Error::State(format!("imputer fitting failed: {e}"))),
                };
                let (outcome, scores, cell_labels) = match result {
                    Ok((m, s)) => (Ok(m), s, y_test.clone()),
                    Err(e) => {
                        log::warn!(
                            "trial {trial} fold {fold} {} {}: {e}",
                            arm.tag(),
                            classifier.tag()
                        );
                        (Err(e.to_string()), Vec::new(), Vec::new())
                    }
                };
                out.push(CellRecord {
                    trial,
                    fold,
                    arm,
                    classifier,
                    outcome,
                    scores,
                    labels: cell_labels,
                });
            }
        }
        log::info!("trial {trial} fold {fold} done");
        out
    };

    let mut builder = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        builder = builder.num_threads(cfg.workers);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let cells: Vec<CellRecord> = pool.install(|| {
        units
            .par_iter()
            .map(run_unit)
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });

    let (rows, roc) = summarize(cfg, &cells);
    Ok(ExperimentReport {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        rows,
        roc,
        cells,
        imputation_rmse,
        full_imputers,
    })
}

fn clean(msg: &str) -> String {
    msg.replace([',', '\n', '\r'], ";")
}

impl ExperimentReport {
    pub fn row(&self, arm: Arm, classifier: Classifier) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.arm == arm && r.classifier == classifier)
    }

    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.outcome.is_err()).count()
    }

    pub fn metrics_csv(&self) -> String {
        let mut out = String::from("arm,classifier,metric,mean,std,n_cells\n");
        for r in &self.rows {
            for (k, name) in METRIC_NAMES.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{name},{},{},{}",
                    r.arm.tag(),
                    r.classifier.tag(),
                    r.mean[k],
                    r.std[k],
                    r.n_cells
                );
            }
        }
        out
    }

    pub fn percell_csv(&self) -> String {
        let mut out = String::from(
            "trial,fold,arm,classifier,accuracy,sensitivity,specificity,auc,f_score,flags\n",
        );
        for c in &self.cells {
            let _ = write!(
                out,
                "{},{},{},{},",
                c.trial,
                c.fold,
                c.arm.tag(),
                c.classifier.tag()
            );
            match &c.outcome {
                Ok(m) => {
                    let v = m.values();
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        v[0],
                        v[1],
                        v[2],
                        v[3],
                        v[4],
                        m.metrics.flags.describe()
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, ",,,,,error: {}", clean(e));
                }
            }
        }
        out
    }

    /// Averaged ROC curves; every series shares the same FPR grid.
    pub fn roc_csv(&self) -> String {
        let mut out = String::from("arm,classifier,fpr,tpr\n");
        for s in &self.roc {
            for (f, t) in &s.points {
                let _ = writeln!(out, "{},{},{f},{t}", s.arm.tag(), s.classifier.tag());
            }
        }
        out
    }

    pub fn imputation_csv(&self) -> String {
        let mut out = String::from("arm,rmse\n");
        for (arm, rmse) in &self.imputation_rmse {
            let _ = writeln!(out, "{},{rmse}", arm.tag());
        }
        out
    }

    /// One block per arm: classifier rows, five metric columns.
    pub fn console_table(&self) -> String {
        let mut out = String::new();
        let arms: Vec<Arm> = Arm::BOTH
            .into_iter()
            .filter(|a| self.rows.iter().any(|r| r.arm == *a))
            .collect();
        for arm in arms {
            let title = match arm {
                Arm::Mean => "Mean-imputed data",
                Arm::Ae => "Autoencoder-imputed data",
            };
            let _ = writeln!(out, "{title}");
            let _ = writeln!(
                out,
                "{:<18} {:>8} {:>11} {:>11} {:>8} {:>8}",
                "Method", "Accuracy", "Sensitivity", "Specificity", "AUC", "F-score"
            );
            for r in self.rows.iter().filter(|r| r.arm == arm) {
                let m = r.mean;
                let _ = writeln!(
                    out,
                    "{:<18} {:>8.4} {:>11.4} {:>11.4} {:>8.4} {:>8.4}",
                    r.classifier.display_name(),
                    m[0],
                    m[1],
                    m[2],
                    m[3],
                    m[4]
                );
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;

    /// Two well separated Gaussian-ish classes with a block of missing cells.
    fn synthetic() -> PreparedData {
        let mut rng = seed::rng(5);
        let n = 60;
        let labels: Vec<u8> = (0..n).map(|i| u8::from(i % 3 == 0)).collect();
        let values = Array2::from_shape_fn((n, 30), |(i, j)| {
            use rand::Rng;
            let base = if labels[i] == 1 { 2.0 } else { 0.5 };
            base + 0.3 * rng.random::<f64>() + j as f64 * 0.01
        });
        let complete = MaskedMatrix::complete(values, labels).unwrap();
        let spec = crate::data::MissingnessSpec {
            attr_count: 3,
            numerator: 1,
            denominator: 4,
        };
        let (masked, truth) = simulate_missing(&complete, spec, 1).unwrap();
        PreparedData { masked, truth }
    }

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            trials: 2,
            folds: 3,
            classifiers: vec![Classifier::NaiveBayes, Classifier::DecisionTree],
            ae_max_epochs: 5,
            workers: 1,
            ..Default::default()
        }
    }

    #[test]
    fn report_shape_and_fold_coverage() {
        let data = synthetic();
        let cfg = small_config();
        let r = run_cv_experiment(&cfg, &data).unwrap();
        assert_eq!(r.rows.len(), 2 * 2);
        assert_eq!(r.cells.len(), 2 * 3 * 2 * 2);
        assert_eq!(r.failed_cells(), 0);
        for trial in 0..2 {
            let mut seen: Vec<usize> = Vec::new();
            for c in r.cells.iter().filter(|c| {
                c.trial == trial && c.arm == Arm::Mean && c.classifier == Classifier::NaiveBayes
            }) {
                seen.push(c.labels.len());
            }
            assert_eq!(seen.iter().sum::<usize>(), 60);
        }
        let nb = r.row(Arm::Ae, Classifier::NaiveBayes).unwrap();
        assert_eq!(nb.n_cells, 6);
        assert!(nb.metric("accuracy") > 0.9);
        assert_eq!(r.roc.len(), 4);
        assert!(r.roc.iter().all(|s| s.points.len() == ROC_GRID_POINTS));
        assert_eq!(r.metrics_csv().lines().count(), 1 + 4 * 5);
        assert!(r.console_table().contains("Naive Bayes"));
    }

    #[test]
    fn identical_configs_give_identical_outputs() {
        let data = synthetic();
        let cfg = small_config();
        let a = run_cv_experiment(&cfg, &data).unwrap();
        let b = run_cv_experiment(
            &ExperimentConfig {
                workers: 2,
                ..cfg.clone()
            },
            &data,
        )
        .unwrap();
        assert_eq!(a.metrics_csv(), b.metrics_csv());
        assert_eq!(a.percell_csv(), b.percell_csv());
        assert_eq!(a.roc_csv(), b.roc_csv());
    }

    #[test]
    fn failed_cells_are_recorded_not_fatal() {
        let data = synthetic();
        let cfg = ExperimentConfig {
            rf_attrs: 31,
            classifiers: vec![Classifier::NaiveBayes, Classifier::RandomForest],
            ..small_config()
        };
        let r = run_cv_experiment(&cfg, &data).unwrap();
        assert_eq!(r.failed_cells(), 2 * 3 * 2);
        assert_eq!(
            r.row(Arm::Mean, Classifier::RandomForest).unwrap().n_cells,
            0
        );
        assert!(r.percell_csv().contains(",error: config error"));
        assert_eq!(r.row(Arm::Mean, Classifier::NaiveBayes).unwrap().n_cells, 6);
    }

    #[test]
    fn strict_mode_fits_on_training_rows() {
        let data = synthetic();
        let cfg = ExperimentConfig {
            leakage_mode: LeakageMode::Strict,
            arms: vec![Arm::Ae],
            trials: 1,
            ..small_config()
        };
        let r = run_cv_experiment(&cfg, &data).unwrap();
        assert_eq!(r.failed_cells(), 0);
        assert_eq!(r.rows.len(), 2);
    }

    #[test]
    fn strict_imputers_never_see_test_rows() {
        let data = synthetic();
        let cfg = small_config();
        let train: Vec<usize> = (0..40).collect();
        let a = fit_imputers(&data.masked.select_rows(&train), &cfg, 3).unwrap();
        let mut altered = data.masked.clone();
        let (mut v, m, l) = altered.clone().into_parts();
        for i in 40..60 {
            for j in 0..30 {
                v[[i, j]] += 100.0;
            }
        }
        altered = MaskedMatrix::new(v, m, l).unwrap();
        let b = fit_imputers(&altered.select_rows(&train), &cfg, 3).unwrap();
        assert_eq!(a.scaling, b.scaling);
        assert_eq!(a.means, b.means);
        assert_eq!(a.autoencoder.net, b.autoencoder.net);
    }

    #[test]
    fn std_is_sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }
}
