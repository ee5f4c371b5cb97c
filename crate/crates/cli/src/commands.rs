use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{concatenate, Array2, Axis};

use ehrgan::acgan::{sample_generated, train_acgan, GeneratorModel};
use ehrgan::config::{sha256_hex, Arm, ExperimentConfig, LeakageMode};
use ehrgan::data::{
    fit_minmax, parse_wdbc, read_masked_csv, read_truth_csv, simulate_missing, write_masked_csv,
    write_truth_csv,
};
use ehrgan::eval::{run_cv_experiment, Imputers, PreparedData, ROC_GRID_POINTS};
use ehrgan::impute::{fit_mean_imputer, AutoencoderModel};
use ehrgan::viz::{
    embedding_csv, embedding_svg, roc_svg, tsne_embed, two_sample_probe_auc, PointTag, RocLine,
    TsneConfig,
};
use ehrgan::{seed, Error, Result};

use crate::{TsneMode, EXIT_PARTIAL};

pub const MASKED_CSV: &str = "masked.csv";
pub const TRUTH_CSV: &str = "truth.csv";
pub const PREPARE_MANIFEST: &str = "prepare_manifest.txt";
pub const AE_MODEL: &str = "ae.model";
pub const GENERATOR_MODEL: &str = "generator.model";
pub const DISCRIMINATOR_MODEL: &str = "discriminator.model";

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::file(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::file(path, e))
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::file(path, e))
}

/// `key=value` manifest with the config hash and seed first and a checksum
/// line per written file.
struct Manifest {
    text: String,
}

impl Manifest {
    fn new(title: &str, cfg: &ExperimentConfig) -> Self {
        let mut text = format!("# {title}\n");
        let _ = writeln!(text, "config_hash={}", cfg.hash());
        let _ = writeln!(text, "seed={}", cfg.seed);
        Manifest { text }
    }

    fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}={value}");
    }

    /// Writes `contents` to `dir/name` and records its checksum.
    fn output(&mut self, dir: &Path, name: &str, contents: &str) -> Result<()> {
        write_file(&dir.join(name), contents)?;
        self.field(&format!("sha256:{name}"), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    fn value(text: &str, key: &str) -> Option<String> {
        text.lines()
            .find_map(|l| l.strip_prefix(key)?.strip_prefix('=').map(str::to_string))
    }
}

fn read_input(cfg: &ExperimentConfig) -> Result<String> {
    read_file(&cfg.dataset_path)
}

/// Writes the masked dataset, its ground truth and a manifest.
pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let text = read_input(cfg)?;
    let raw = parse_wdbc(&text, cfg.load_options())?;
    let (masked, truth) = simulate_missing(&raw.data, cfg.missingness(), cfg.mask_seed)?;
    ensure_dir(&cfg.out_dir)?;
    let [benign, malignant] = masked.class_counts();
    let mut m = Manifest::new("prepared dataset", cfg);
    m.field("prepare_hash", cfg.prepare_hash());
    m.field("mask_seed", cfg.mask_seed);
    m.field("input_path", cfg.dataset_path.display());
    m.field("input_sha256", sha256_hex(text.as_bytes()));
    m.field("records", masked.rows());
    m.field("benign", benign);
    m.field("malignant", malignant);
    m.field("missing_cells", masked.missing_count());
    m.field("sidecar_cells", truth.len());
    m.output(&cfg.out_dir, MASKED_CSV, &write_masked_csv(&masked))?;
    m.output(&cfg.out_dir, TRUTH_CSV, &write_truth_csv(&truth))?;
    write_file(&cfg.out_dir.join(PREPARE_MANIFEST), &m.text)?;
    log::info!(
        "prepared {} records ({benign} benign / {malignant} malignant), {} simulated-missing cells",
        masked.rows(),
        truth.len()
    );
    Ok(PreparedData { masked, truth })
}

/// The prepared files in the output directory when they match the current
/// config and input, otherwise a fresh `prepare`.
fn load_prepared(cfg: &ExperimentConfig) -> Result<PreparedData> {
    let manifest = fs::read_to_string(cfg.out_dir.join(PREPARE_MANIFEST)).ok();
    let input_hash = sha256_hex(read_input(cfg)?.as_bytes());
    let current = manifest.as_deref().is_some_and(|t| {
        Manifest::value(t, "prepare_hash").as_deref() == Some(cfg.prepare_hash().as_str())
            && Manifest::value(t, "input_sha256").as_deref() == Some(input_hash.as_str())
    });
    if !current {
        log::info!(
            "no matching prepared dataset in {}; preparing",
            cfg.out_dir.display()
        );
        return prepare(cfg);
    }
    let masked = read_masked_csv(&read_file(&cfg.out_dir.join(MASKED_CSV))?)?;
    let truth = read_truth_csv(&read_file(&cfg.out_dir.join(TRUTH_CSV))?)?;
    Ok(PreparedData { masked, truth })
}

fn generator_seed(cfg: &ExperimentConfig) -> u64 {
    seed::derive(cfg.seed, &[0x9e1])
}

pub fn run(cfg: &ExperimentConfig) -> Result<u8> {
    let data = load_prepared(cfg)?;
    let started = std::time::Instant::now();
    let report = run_cv_experiment(cfg, &data)?;
    let dir = &cfg.out_dir;
    ensure_dir(dir)?;

    let mut m = Manifest::new("experiment run", cfg);
    m.field(
        "leakage_mode",
        match cfg.leakage_mode {
            LeakageMode::Paper => "paper",
            LeakageMode::Strict => "strict",
        },
    );
    m.field(
        "roc_method",
        format!(
            "per-trial pooled test scores, averaged over trials on a {ROC_GRID_POINTS}-point FPR grid"
        ),
    );
    m.field("cells", report.cells.len());
    m.field("failed_cells", report.failed_cells());
    for (arm, rmse) in &report.imputation_rmse {
        m.field(&format!("imputation_rmse:{}", arm.tag()), rmse);
    }
    m.output(dir, "metrics.csv", &report.metrics_csv())?;
    m.output(dir, "percell.csv", &report.percell_csv())?;
    m.output(dir, "roc_points.csv", &report.roc_csv())?;
    m.output(dir, "imputation.csv", &report.imputation_csv())?;
    let lines: Vec<RocLine> = report
        .roc
        .iter()
        .map(|s| RocLine {
            label: format!("{} ({})", s.classifier.display_name(), s.arm.tag()),
            points: s.points.clone(),
            dashed: s.arm == Arm::Mean,
        })
        .collect();
    let note = format!("config_hash={} seed={}", report.config_hash, report.seed);
    m.output(dir, "roc.svg", &roc_svg(&lines, &note))?;
    m.output(dir, "config.txt", &cfg.template())?;

    // Models for the t-SNE maps: the all-record autoencoder and an AC-GAN
    // trained on every record of the configured arm.
    report.full_imputers.autoencoder.save(&dir.join(AE_MODEL))?;
    let x = report.full_imputers.complete(cfg.tsne_arm, &data.masked)?;
    let (g, d, log) = train_acgan(
        x.view(),
        data.masked.labels(),
        &cfg.acgan(generator_seed(cfg)),
    )?;
    g.save(&dir.join(GENERATOR_MODEL))?;
    d.save(&dir.join(DISCRIMINATOR_MODEL), &log)?;
    for name in [AE_MODEL, GENERATOR_MODEL, DISCRIMINATOR_MODEL] {
        let bytes = fs::read(dir.join(name)).map_err(|e| Error::file(dir.join(name), e))?;
        m.field(&format!("sha256:{name}"), sha256_hex(&bytes));
    }
    write_file(&dir.join("run_manifest.txt"), &m.text)?;

    print!("{}", report.console_table());
    for (arm, rmse) in &report.imputation_rmse {
        println!("imputation RMSE ({}): {rmse:.4}", arm.tag());
    }
    log::info!("finished in {:.1}s", started.elapsed().as_secs_f64());
    if report.failed_cells() > 0 {
        log::warn!(
            "{} of {} cells failed; see percell.csv",
            report.failed_cells(),
            report.cells.len()
        );
        return Ok(EXIT_PARTIAL);
    }
    Ok(0)
}

/// Imputers rebuilt from the prepared data and the saved autoencoder.
fn saved_imputers(cfg: &ExperimentConfig, data: &PreparedData) -> Result<Imputers> {
    let autoencoder = AutoencoderModel::load(&cfg.out_dir.join(AE_MODEL))?;
    let scaling = fit_minmax(&data.masked)?;
    let scaled = ehrgan::data::apply_minmax(&data.masked, &scaling)?;
    let means = fit_mean_imputer(&scaled)?;
    Ok(Imputers {
        scaling,
        means,
        autoencoder,
    })
}

fn tags_for(labels: &[u8], benign: PointTag, malignant: PointTag) -> Vec<PointTag> {
    labels
        .iter()
        .map(|&l| PointTag::for_label(benign, malignant, l))
        .collect()
}

fn stack(parts: &[Array2<f64>]) -> Result<Array2<f64>> {
    let views: Vec<_> = parts.iter().map(|p| p.view()).collect();
    concatenate(Axis(0), &views).map_err(|e| Error::Shape(e.to_string()))
}

pub fn tsne(cfg: &ExperimentConfig, mode: TsneMode) -> Result<()> {
    let needed = match mode {
        TsneMode::Imputation => vec![AE_MODEL],
        TsneMode::Generation => vec![AE_MODEL, GENERATOR_MODEL],
    };
    for name in needed {
        let path = cfg.out_dir.join(name);
        if !path.is_file() {
            return Err(Error::file(
                &path,
                std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    "model missing; run `ehrgan run` first",
                ),
            ));
        }
    }
    let data = load_prepared(cfg)?;
    let imputers = saved_imputers(cfg, &data)?;
    let labels = data.masked.labels();
    let name = match mode {
        TsneMode::Imputation => "imputation",
        TsneMode::Generation => "generation",
    };
    let mut m = Manifest::new(&format!("t-SNE {name} map"), cfg);
    let (points, tags) = match mode {
        TsneMode::Imputation => {
            // records that lost values, shown complete, mean-filled and AE-filled
            let rows = data.truth.rows();
            let sub: Vec<u8> = rows.iter().map(|&i| labels[i]).collect();
            let real = imputers.complete(Arm::Mean, &data.truth.restore(&data.masked))?;
            let mean = imputers.complete(Arm::Mean, &data.masked)?;
            let ae = imputers.complete(Arm::Ae, &data.masked)?;
            let pick = |x: &Array2<f64>| x.select(Axis(0), &rows);
            let mut tags = tags_for(&sub, PointTag::RealBenign, PointTag::RealMalignant);
            tags.extend(tags_for(
                &sub,
                PointTag::MeanImputedBenign,
                PointTag::MeanImputedMalignant,
            ));
            tags.extend(tags_for(
                &sub,
                PointTag::AeImputedBenign,
                PointTag::AeImputedMalignant,
            ));
            m.field("records", rows.len());
            (stack(&[pick(&real), pick(&mean), pick(&ae)])?, tags)
        }
        TsneMode::Generation => {
            let g = GeneratorModel::load(&cfg.out_dir.join(GENERATOR_MODEL))?;
            let real = imputers.complete(cfg.tsne_arm, &data.masked)?;
            let counts = data.masked.class_counts();
            let (generated, classes) =
                sample_generated(&g, counts, seed::derive(cfg.tsne_seed, &[0x6e4]))?;
            let probe = two_sample_probe_auc(real.view(), generated.view(), cfg.tsne_seed)?;
            m.field("real_arm", cfg.tsne_arm.tag());
            m.field("probe_auc_real_vs_generated", probe);
            log::info!("real-vs-generated probe AUC {probe:.4}");
            let mut tags = tags_for(labels, PointTag::RealBenign, PointTag::RealMalignant);
            tags.extend(tags_for(
                &classes,
                PointTag::GeneratedBenign,
                PointTag::GeneratedMalignant,
            ));
            (stack(&[real, generated])?, tags)
        }
    };
    let tcfg = TsneConfig {
        perplexity: cfg.tsne_perplexity,
        iterations: cfg.tsne_iterations,
        seed: cfg.tsne_seed,
        ..Default::default()
    };
    let result = tsne_embed(points.view(), &tcfg)?;
    m.field("points", points.nrows());
    m.field("kl_final", result.kl_final);
    let dir: PathBuf = cfg.out_dir.join(format!("tsne-{name}"));
    ensure_dir(&dir)?;
    let note = format!("config_hash={} seed={}", cfg.hash(), cfg.seed);
    m.output(
        &dir,
        "tsne_coords.csv",
        &embedding_csv(result.coords.view(), &tags)?,
    )?;
    m.output(
        &dir,
        "tsne.svg",
        &embedding_svg(result.coords.view(), &tags, &note)?,
    )?;
    write_file(&dir.join("manifest.txt"), &m.text)?;
    println!("wrote {}", dir.join("tsne_coords.csv").display());
    Ok(())
}
