//! Stacked 30-20-10-20-30 autoencoder imputer with validation early stopping.

use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::MaskedMatrix;
use crate::error::{Error, Result};
use crate::nn::{masked_mse_loss, mse_loss, Activation, ModelFile, ModelKind, NetParams, Sgd};
use crate::seed;

pub const AE_WIDTHS: [usize; 5] = [30, 20, 10, 20, 30];
const AE_ACTIVATIONS: [Activation; 4] = [
    Activation::Relu,
    Activation::Relu,
    Activation::Relu,
    Activation::Sigmoid,
];

/// Which cells contribute to the reconstruction loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AeLoss {
    /// All outputs against the zero-filled input.
    Full,
    /// Only observed cells.
    ObservedOnly,
}

/// Input corruption applied to training rows (targets stay clean).
#[derive(Debug, Clone, PartialEq)]
pub enum Corruption {
    None,
    /// Each cell is zeroed independently with this probability.
    Dropout(f64),
    /// Each row receives the missing pattern of a uniformly drawn row of
    /// this mask matrix (`true` = observed).
    Patterns(Array2<bool>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderConfig {
    pub val_fraction: f64,
    pub patience: usize,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub loss: AeLoss,
    pub corruption: Corruption,
    pub seed: u64,
}

impl Default for AutoencoderConfig {
    fn default() -> Self {
        AutoencoderConfig {
            val_fraction: 0.2,
            patience: 20,
            max_epochs: 1000,
            batch_size: 16,
            learning_rate: 0.05,
            momentum: 0.0,
            loss: AeLoss::Full,
            corruption: Corruption::None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub train: f64,
    pub val: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderModel {
    pub net: NetParams,
    pub training_log: Vec<EpochLoss>,
    /// Index into `training_log` of the lowest validation loss; `net` holds
    /// the parameters from that epoch.
    pub best_epoch: usize,
}

impl AutoencoderModel {
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            kind: ModelKind::Autoencoder,
            net: self.net.clone(),
            noise_dim: 0,
            best_epoch: Some(self.best_epoch as u32),
            log: self
                .training_log
                .iter()
                .map(|e| vec![e.train, e.val])
                .collect(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let file = file.expect_kind(ModelKind::Autoencoder)?;
        if file.net.widths() != AE_WIDTHS {
            return Err(Error::Format(format!(
                "autoencoder widths {:?}",
                file.net.widths()
            )));
        }
        let training_log = file
            .log
            .iter()
            .map(|r| match r.as_slice() {
                [train, val] => Ok(EpochLoss {
                    train: *train,
                    val: *val,
                }),
                _ => Err(Error::Format("autoencoder log rows need 2 columns".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AutoencoderModel {
            net: file.net,
            training_log,
            best_epoch: file.best_epoch.unwrap_or(0) as usize,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_file().save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(ModelFile::load(path)?)
    }
}

/// Seeded stratified train/validation split of row indices.
fn split_rows(labels: &[u8], val_fraction: f64, rng: &mut seed::Rng) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut val = Vec::new();
    for class in 0..=1u8 {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        members.shuffle(rng);
        let mut n_val = (members.len() as f64 * val_fraction).round() as usize;
        if members.len() >= 2 {
            n_val = n_val.clamp(1, members.len() - 1);
        } else {
            n_val = 0;
        }
        val.extend_from_slice(&members[..n_val]);
        train.extend_from_slice(&members[n_val..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    (train, val)
}

fn corrupt(inputs: &Array2<f64>, corruption: &Corruption, rng: &mut seed::Rng) -> Array2<f64> {
    let mut out = inputs.clone();
    match corruption {
        Corruption::None => {}
        Corruption::Dropout(p) => {
            out.mapv_inplace(|v| if rng.random::<f64>() < *p { 0.0 } else { v });
        }
        Corruption::Patterns(masks) => {
            if masks.nrows() == 0 {
                return out;
            }
            for mut row in out.rows_mut() {
                let pick = rng.random_range(0..masks.nrows());
                for (v, &m) in row.iter_mut().zip(masks.row(pick)) {
                    if !m {
                        *v = 0.0;
                    }
                }
            }
        }
    }
    out
}

struct Objective {
    inputs: Array2<f64>,
    observed: Array2<bool>,
    loss: AeLoss,
}

impl Objective {
    fn new(data: &MaskedMatrix, rows: &[usize], loss: AeLoss) -> Self {
        let inputs = data.zero_filled().select(Axis(0), rows);
        let observed = data.mask().select(Axis(0), rows);
        Objective {
            inputs,
            observed,
            loss,
        }
    }

    fn batch(&self, rows: &[usize]) -> Objective {
        Objective {
            inputs: self.inputs.select(Axis(0), rows),
            observed: self.observed.select(Axis(0), rows),
            loss: self.loss,
        }
    }

    fn loss_and_grad(&self, output: &Array2<f64>) -> Result<(f64, Array2<f64>)> {
        match self.loss {
            AeLoss::Full => mse_loss(output.view(), self.inputs.view()),
            AeLoss::ObservedOnly => {
                masked_mse_loss(output.view(), self.inputs.view(), self.observed.view())
            }
        }
    }

    fn evaluate(&self, net: &NetParams, inputs: Option<&Array2<f64>>) -> Result<f64> {
        let out = net.predict(inputs.unwrap_or(&self.inputs).view())?;
        Ok(self.loss_and_grad(&out)?.0)
    }
}

/// Trains on zero-filled rows reconstructing themselves, minibatch SGD,
/// stopping once validation loss has not improved for `patience` epochs.
pub fn train_autoencoder(
    low: &MaskedMatrix,
    config: &AutoencoderConfig,
) -> Result<AutoencoderModel> {
    if low.rows() < 10 {
        return Err(Error::InsufficientData(format!(
            "autoencoder needs at least 10 records, got {}",
            low.rows()
        )));
    }
    if low.cols() != AE_WIDTHS[0] {
        return Err(Error::Shape(format!(
            "autoencoder expects {} attributes, got {}",
            AE_WIDTHS[0],
            low.cols()
        )));
    }
    if config.batch_size == 0 || config.max_epochs == 0 {
        return Err(Error::Config(
            "batch size and max epochs must be positive".into(),
        ));
    }
    let mut rng = seed::rng_for(config.seed, &[0xae]);
    let (train_rows, val_rows) = split_rows(low.labels(), config.val_fraction, &mut rng);
    let train = Objective::new(low, &train_rows, config.loss);
    let val = Objective::new(low, &val_rows, config.loss);

    let val_inputs = match config.corruption {
        Corruption::None => None,
        _ if val.inputs.nrows() == 0 => None,
        ref c => Some(corrupt(&val.inputs, c, &mut rng)),
    };
    let mut net = NetParams::glorot(&AE_WIDTHS, &AE_ACTIVATIONS, &mut rng)?;
    let mut sgd = Sgd::new(config.learning_rate, config.momentum);
    let mut order: Vec<usize> = (0..train_rows.len()).collect();

    let mut log = Vec::new();
    let mut best = (f64::INFINITY, 0usize, net.clone());
    let mut since_best = 0;
    for epoch in 0..config.max_epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch = train.batch(chunk);
            let corrupted = corrupt(&batch.inputs, &config.corruption, &mut rng);
            let (out, tape) = net.forward(corrupted.view())?;
            let (_, grad) = batch.loss_and_grad(&out)?;
            let (grads, _) = net.backward(&tape, grad.view())?;
            sgd.step(&mut net, &grads)?;
        }
        let train_loss = train.evaluate(&net, None)?;
        let val_loss = if val.inputs.nrows() > 0 {
            val.evaluate(&net, val_inputs.as_ref())?
        } else {
            train_loss
        };
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::Numeric(format!(
                "autoencoder loss diverged at epoch {epoch}"
            )));
        }
        log.push(EpochLoss {
            train: train_loss,
            val: val_loss,
        });
        if val_loss < best.0 {
            best = (val_loss, epoch, net.clone());
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > config.patience {
                break;
            }
        }
    }
    Ok(AutoencoderModel {
        net: best.2,
        training_log: log,
        best_epoch: best.1,
    })
}

/// One encode-decode pass over zero-filled rows; outputs are copied into
/// missing positions only.
pub fn impute_autoencoder(model: &AutoencoderModel, data: &MaskedMatrix) -> Result<Array2<f64>> {
    let filled = data.zero_filled();
    if data.rows() == 0 {
        return Ok(filled);
    }
    let recon = model.net.predict(filled.view())?;
    let mask = data.mask();
    let mut out = filled;
    for ((i, j), v) in out.indexed_iter_mut() {
        if !mask[[i, j]] {
            *v = recon[[i, j]];
        }
    }
    Ok(out)
}
