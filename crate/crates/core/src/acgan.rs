//! Auxiliary-classifier GAN. The generator synthesizes class-conditioned
//! records; the discriminator has a source head and a class head on a shared
//! trunk, and its class head is the disease classifier.
//!
//! Both discriminator heads emit logits and the sigmoid is applied outside the
//! network, so the class-head loss is computed in margin form. Together with a
//! zero-initialized class head and identical initial condition columns in the
//! generator, this makes training exactly symmetric under a label swap.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{
    adam_step, bce_logits, clamp_prob, sigmoid, Activation, AdamConfig, AdamState, ModelFile,
    ModelKind, NetParams,
};
use crate::seed;

pub const RECORD_WIDTH: usize = 30;
pub const HIDDEN_WIDTH: usize = 50;

/// How the generator treats the source term of its objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorObjective {
    /// Ascend `L_C - L_S` literally, i.e. descend `log(1 - D_s(fake))`.
    Minimax,
    /// Replace the source term by `-log D_s(fake)`.
    NonSaturating,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcganConfig {
    pub noise_dim: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub adam_alpha: f64,
    pub adam_beta1: f64,
    pub d_steps_per_g_step: usize,
    pub generator_objective: GeneratorObjective,
    pub seed: u64,
}

impl Default for AcganConfig {
    fn default() -> Self {
        AcganConfig {
            noise_dim: 32,
            batch_size: 32,
            epochs: 300,
            adam_alpha: 1e-3,
            adam_beta1: 0.5,
            d_steps_per_g_step: 1,
            generator_objective: GeneratorObjective::Minimax,
            seed: 0,
        }
    }
}

impl AcganConfig {
    fn validate(&self) -> Result<()> {
        if self.noise_dim == 0
            || self.batch_size == 0
            || self.epochs == 0
            || self.d_steps_per_g_step == 0
        {
            return Err(Error::Config(
                "acgan noise_dim, batch_size, epochs and d_steps must be positive".into(),
            ));
        }
        if self.adam_alpha.is_nan()
            || self.adam_alpha <= 0.0
            || !(0.0..1.0).contains(&self.adam_beta1)
        {
            return Err(Error::Config(format!(
                "acgan adam alpha {} / beta1 {} out of range",
                self.adam_alpha, self.adam_beta1
            )));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            alpha: self.adam_alpha,
            beta1: self.adam_beta1,
            ..AdamConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorModel {
    /// Input: `noise_dim` noise columns then a 2-wide one-hot class.
    pub net: NetParams,
    pub noise_dim: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminatorModel {
    /// Output column 0 is the source logit, column 1 the class logit.
    pub net: NetParams,
}

/// Per-epoch means of both players' objectives (log-likelihood sums, so
/// `d_ls` is never positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcganEpoch {
    pub d_ls: f64,
    pub d_lc: f64,
    pub g_ls: f64,
    pub g_lc: f64,
}

impl GeneratorModel {
    pub fn init(noise_dim: usize, rng: &mut seed::Rng) -> Result<Self> {
        let mut net = NetParams::glorot(
            &[noise_dim + 2, HIDDEN_WIDTH, RECORD_WIDTH],
            &[Activation::Relu, Activation::Sigmoid],
            rng,
        )?;
        let w = &mut net.layers_mut()[0].weights;
        let c0 = w.column(noise_dim).to_owned();
        w.column_mut(noise_dim + 1).assign(&c0);
        Ok(GeneratorModel { net, noise_dim })
    }

    fn inputs(&self, noise: ArrayView2<f64>, classes: &[u8]) -> Result<Array2<f64>> {
        if noise.ncols() != self.noise_dim || noise.nrows() != classes.len() {
            return Err(Error::Shape(format!(
                "generator expects noise {} x {}, got {:?}",
                classes.len(),
                self.noise_dim,
                noise.shape()
            )));
        }
        let mut x = Array2::zeros((noise.nrows(), self.noise_dim + 2));
        x.slice_mut(s![.., ..self.noise_dim]).assign(&noise);
        for (i, &c) in classes.iter().enumerate() {
            if c > 1 {
                return Err(Error::Domain(format!("class {c} is not 0 or 1")));
            }
            x[[i, self.noise_dim + c as usize]] = 1.0;
        }
        Ok(x)
    }

    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            kind: ModelKind::Generator,
            net: self.net.clone(),
            noise_dim: self.noise_dim as u32,
            best_epoch: None,
            log: Vec::new(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        let file = file.expect_kind(ModelKind::Generator)?;
        let noise_dim = file.noise_dim as usize;
        if file.net.input_width() != noise_dim + 2 || file.net.output_width() != RECORD_WIDTH {
            return Err(Error::Format(format!(
                "generator widths {:?} do not fit noise_dim {noise_dim}",
                file.net.widths()
            )));
        }
        Ok(GeneratorModel {
            net: file.net,
            noise_dim,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_file().save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_file(ModelFile::load(path)?)
    }
}

impl DiscriminatorModel {
    pub fn init(rng: &mut seed::Rng) -> Result<Self> {
        let mut net = NetParams::glorot(
            &[RECORD_WIDTH, HIDDEN_WIDTH, 2],
            &[Activation::Relu, Activation::Identity],
            rng,
        )?;
        net.layers_mut()[1].weights.row_mut(1).fill(0.0);
        Ok(DiscriminatorModel { net })
    }

    /// Source and class logits, one row per record.
    pub fn logits(&self, batch: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.check_width(batch)?;
        self.net.predict(batch)
    }

    fn check_width(&self, batch: ArrayView2<f64>) -> Result<()> {
        if batch.ncols() != self.net.input_width() {
            return Err(Error::Shape(format!(
                "discriminator expects {} attributes, got {}",
                self.net.input_width(),
                batch.ncols()
            )));
        }
        Ok(())
    }

    pub fn to_file(&self, log: &[AcganEpoch]) -> ModelFile {
        ModelFile {
            kind: ModelKind::Discriminator,
            net: self.net.clone(),
            noise_dim: 0,
            best_epoch: None,
            log: log
                .iter()
                .map(|e| vec![e.d_ls, e.d_lc, e.g_ls, e.g_lc])
                .collect(),
        }
    }

    pub fn from_file(file: ModelFile) -> Result<(Self, Vec<AcganEpoch>)> {
        let file = file.expect_kind(ModelKind::Discriminator)?;
        if file.net.output_width() != 2 {
            return Err(Error::Format("discriminator needs two output heads".into()));
        }
        let log = file
            .log
            .iter()
            .map(|r| match r.as_slice() {
                [d_ls, d_lc, g_ls, g_lc] => Ok(AcganEpoch {
                    d_ls: *d_ls,
                    d_lc: *d_lc,
                    g_ls: *g_ls,
                    g_lc: *g_lc,
                }),
                _ => Err(Error::Format("acgan log rows need 4 columns".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((DiscriminatorModel { net: file.net }, log))
    }

    pub fn save(&self, path: &Path, log: &[AcganEpoch]) -> Result<()> {
        self.to_file(log).save(path)
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<AcganEpoch>)> {
        Self::from_file(ModelFile::load(path)?)
    }
}

pub fn generate(g: &GeneratorModel, noise: ArrayView2<f64>, classes: &[u8]) -> Result<Array2<f64>> {
    g.net.predict(g.inputs(noise, classes)?.view())
}

/// `(P(S = real | x), P(C = 1 | x))` for every row.
pub fn discriminate(
    d: &DiscriminatorModel,
    batch: ArrayView2<f64>,
) -> Result<(Array1<f64>, Array1<f64>)> {
    let z = d.logits(batch)?;
    Ok((z.column(0).mapv(sigmoid), z.column(1).mapv(sigmoid)))
}

/// Class-head scores in [0, 1], unthresholded.
pub fn predict_proba(d: &DiscriminatorModel, batch: ArrayView2<f64>) -> Result<Array1<f64>> {
    Ok(discriminate(d, batch)?.1)
}

fn mean_log(p: impl Iterator<Item = f64>, n: usize) -> f64 {
    p.map(|v| clamp_prob(v).ln()).sum::<f64>() / n as f64
}

/// `(L_s, L_c)` from head probabilities; fakes count toward the class they
/// were generated for.
pub fn acgan_losses(
    p_real_on_real: ArrayView1<f64>,
    p_real_on_fake: ArrayView1<f64>,
    p_class_on_real: ArrayView1<f64>,
    p_class_on_fake: ArrayView1<f64>,
    real_labels: &[u8],
    fake_conditions: &[u8],
) -> Result<(f64, f64)> {
    let nr = p_real_on_real.len();
    let nf = p_real_on_fake.len();
    if p_class_on_real.len() != nr
        || real_labels.len() != nr
        || p_class_on_fake.len() != nf
        || fake_conditions.len() != nf
        || nr == 0
        || nf == 0
    {
        return Err(Error::Shape("acgan losses: length mismatch".into()));
    }
    let of_class = |p: f64, c: u8| if c == 1 { p } else { 1.0 - p };
    let ls = mean_log(p_real_on_real.iter().copied(), nr)
        + mean_log(p_real_on_fake.iter().map(|p| 1.0 - p), nf);
    let lc = mean_log(
        p_class_on_real
            .iter()
            .zip(real_labels)
            .map(|(&p, &c)| of_class(p, c)),
        nr,
    ) + mean_log(
        p_class_on_fake
            .iter()
            .zip(fake_conditions)
            .map(|(&p, &c)| of_class(p, c)),
        nf,
    );
    Ok((ls, lc))
}

fn as_targets(labels: &[u8]) -> Array1<f64> {
    labels.iter().map(|&l| f64::from(l)).collect()
}

/// Head losses for one batch: `(source BCE, class BCE, dLoss/dlogits)`, with
/// the source and class terms scaled by `source_sign` and 1 respectively.
fn head_terms(
    logits: &Array2<f64>,
    source_target: f64,
    class_targets: &Array1<f64>,
    source_sign: f64,
) -> Result<(f64, f64, Array2<f64>)> {
    let n = logits.nrows();
    let st = Array1::from_elem(n, source_target);
    let (ls, gs) = bce_logits(logits.column(0), st.view())?;
    let (lc, gc) = bce_logits(logits.column(1), class_targets.view())?;
    let mut grad = Array2::zeros((n, 2));
    grad.column_mut(0).assign(&(gs * source_sign));
    grad.column_mut(1).assign(&gc);
    Ok((ls, lc, grad))
}

struct Trainer<'a> {
    data: ArrayView2<'a, f64>,
    labels: &'a [u8],
    config: &'a AcganConfig,
    g: GeneratorModel,
    d: DiscriminatorModel,
    g_opt: AdamState,
    d_opt: AdamState,
    rng: seed::Rng,
}

impl Trainer<'_> {
    fn sample_fakes(&mut self, real_labels: &[u8]) -> Result<(Array2<f64>, Vec<u8>)> {
        let n = real_labels.len();
        let noise = Array2::from_shape_fn((n, self.config.noise_dim), |_| {
            self.rng.random_range(-1.0..1.0)
        });
        // uniform marginally; a coin flip relative to the real labels keeps
        // the draw mirrored when the labels are swapped
        let conditions: Vec<u8> = real_labels
            .iter()
            .map(|&l| l ^ u8::from(self.rng.random::<bool>()))
            .collect();
        Ok((self.g.inputs(noise.view(), &conditions)?, conditions))
    }

    /// One discriminator step; returns `(L_s, L_c)` before the update.
    fn d_step(&mut self, rows: &[usize]) -> Result<(f64, f64)> {
        let real = self.data.select(Axis(0), rows);
        let labels: Vec<u8> = rows.iter().map(|&i| self.labels[i]).collect();
        let (g_in, conditions) = self.sample_fakes(&labels)?;
        let fake = self.g.net.predict(g_in.view())?;

        let (zr, tr) = self.d.net.forward(real.view())?;
        let (lsr, lcr, gr) = head_terms(&zr, 1.0, &as_targets(&labels), 1.0)?;
        let (zf, tf) = self.d.net.forward(fake.view())?;
        let (lsf, lcf, gf) = head_terms(&zf, 0.0, &as_targets(&conditions), 1.0)?;

        let (mut grads, _) = self.d.net.backward(&tr, gr.view())?;
        let (gf_grads, _) = self.d.net.backward(&tf, gf.view())?;
        grads.add_assign(&gf_grads);
        adam_step(&mut self.d.net, &grads, &mut self.d_opt)?;
        Ok((-(lsr + lsf), -(lcr + lcf)))
    }

    /// One generator step through the frozen discriminator; returns the
    /// fake-sample terms `(log(1 - D_s), log P(C = c))` before the update.
    fn g_step(&mut self, rows: &[usize]) -> Result<(f64, f64)> {
        let labels: Vec<u8> = rows.iter().map(|&i| self.labels[i]).collect();
        let (g_in, conditions) = self.sample_fakes(&labels)?;
        let (fake, g_tape) = self.g.net.forward(g_in.view())?;
        let (z, d_tape) = self.d.net.forward(fake.view())?;
        let targets = as_targets(&conditions);
        let (src_target, sign) = match self.config.generator_objective {
            GeneratorObjective::Minimax => (0.0, -1.0),
            GeneratorObjective::NonSaturating => (1.0, 1.0),
        };
        let (ls, lc, grad) = head_terms(&z, src_target, &targets, sign)?;
        let (_, dx) = self.d.net.backward(&d_tape, grad.view())?;
        let (grads, _) = self.g.net.backward(&g_tape, dx.view())?;
        adam_step(&mut self.g.net, &grads, &mut self.g_opt)?;
        let fake_source = match self.config.generator_objective {
            GeneratorObjective::Minimax => -ls,
            GeneratorObjective::NonSaturating => {
                let p: f64 = z
                    .column(0)
                    .iter()
                    .map(|&v| clamp_prob(1.0 - sigmoid(v)).ln())
                    .sum();
                p / z.nrows() as f64
            }
        };
        Ok((fake_source, -lc))
    }
}

/// Alternating minibatch training: per batch, `d_steps_per_g_step`
/// discriminator updates ascending `L_C + L_S`, then one generator update
/// ascending `L_C - L_S`.
pub fn train_acgan(
    data: ArrayView2<f64>,
    labels: &[u8],
    config: &AcganConfig,
) -> Result<(GeneratorModel, DiscriminatorModel, Vec<AcganEpoch>)> {
    config.validate()?;
    if data.ncols() != RECORD_WIDTH || data.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "acgan expects {} labels and {RECORD_WIDTH} attributes, got {:?}",
            labels.len(),
            data.shape()
        )));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Domain("labels must be 0 or 1".into()));
    }
    if !labels.contains(&0) || !labels.contains(&1) {
        return Err(Error::Domain(
            "acgan needs both classes in the training data".into(),
        ));
    }
    let mut rng = seed::rng_for(config.seed, &[0xac6a]);
    let g = GeneratorModel::init(config.noise_dim, &mut rng)?;
    let d = DiscriminatorModel::init(&mut rng)?;
    let mut t = Trainer {
        data,
        labels,
        config,
        g_opt: AdamState::new(&g.net, config.adam()),
        d_opt: AdamState::new(&d.net, config.adam()),
        g,
        d,
        rng,
    };

    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        order.shuffle(&mut t.rng);
        let mut sums = [0.0; 4];
        let mut d_count = 0usize;
        let mut g_count = 0usize;
        for chunk in order.chunks(config.batch_size) {
            for _ in 0..config.d_steps_per_g_step {
                let (ls, lc) = t.d_step(chunk)?;
                sums[0] += ls;
                sums[1] += lc;
                d_count += 1;
            }
            let (ls, lc) = t.g_step(chunk)?;
            sums[2] += ls;
            sums[3] += lc;
            g_count += 1;
        }
        let entry = AcganEpoch {
            d_ls: sums[0] / d_count as f64,
            d_lc: sums[1] / d_count as f64,
            g_ls: sums[2] / g_count as f64,
            g_lc: sums[3] / g_count as f64,
        };
        if ![entry.d_ls, entry.d_lc, entry.g_ls, entry.g_lc]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::Numeric(format!(
                "acgan loss not finite at epoch {epoch}"
            )));
        }
        log.push(entry);
    }
    Ok((t.g, t.d, log))
}

/// Draws `per_class[c]` generated records for each class `c`.
pub fn sample_generated(
    g: &GeneratorModel,
    per_class: [usize; 2],
    seed: u64,
) -> Result<(Array2<f64>, Vec<u8>)> {
    let mut rng = seed::rng_for(seed, &[0x6e4]);
    let classes: Vec<u8> = (0..=1u8)
        .flat_map(|c| std::iter::repeat_n(c, per_class[c as usize]))
        .collect();
    let noise = Array2::from_shape_fn((classes.len(), g.noise_dim), |_| {
        rng.random_range(-1.0..1.0)
    });
    Ok((generate(g, noise.view(), &classes)?, classes))
}

/// CSV with header `class,f0..f29`.
pub fn write_generated_csv(rows: ArrayView2<f64>, classes: &[u8]) -> Result<String> {
    if rows.nrows() != classes.len() {
        return Err(Error::Shape(
            "generated rows and classes differ in length".into(),
        ));
    }
    let mut out = String::from("class");
    for j in 0..rows.ncols() {
        let _ = write!(out, ",f{j}");
    }
    out.push('\n');
    for (row, c) in rows.rows().into_iter().zip(classes) {
        let _ = write!(out, "{c}");
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{grad_check, Dense, LossKind};
    use ndarray::array;

    fn toy(n: usize, seed_: u64) -> (Array2<f64>, Vec<u8>) {
        let mut rng = seed::rng(seed_);
        let mut x = Array2::zeros((n, RECORD_WIDTH));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            let c = u8::from(i % 2 == 1);
            let centre = if c == 1 { 0.75 } else { 0.25 };
            x[[i, 0]] = centre + rng.random_range(-0.15..0.15);
            x[[i, 1]] = centre + rng.random_range(-0.15..0.15);
            y.push(c);
        }
        (x, y)
    }

    fn short(seed: u64) -> AcganConfig {
        AcganConfig {
            seed,
            ..AcganConfig::default()
        }
    }

    fn accuracy(d: &DiscriminatorModel, x: &Array2<f64>, y: &[u8]) -> f64 {
        let p = predict_proba(d, x.view()).unwrap();
        let hits = p
            .iter()
            .zip(y)
            .filter(|(&p, &c)| u8::from(p >= 0.5) == c)
            .count();
        hits as f64 / y.len() as f64
    }

    #[test]
    fn zero_discriminator_outputs_half() {
        let net = NetParams::new(vec![
            Dense::zeros(RECORD_WIDTH, HIDDEN_WIDTH, Activation::Relu),
            Dense::zeros(HIDDEN_WIDTH, 2, Activation::Identity),
        ])
        .unwrap();
        let d = DiscriminatorModel { net };
        let (pr, pc) = discriminate(&d, Array2::from_elem((4, 30), 0.3).view()).unwrap();
        assert_eq!(pr.len(), 4);
        assert!(pr.iter().chain(pc.iter()).all(|&p| p == 0.5));
        assert!(matches!(
            discriminate(&d, Array2::zeros((2, 29)).view()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn generator_output_range_and_determinism() {
        let mut rng = seed::rng(3);
        let g = GeneratorModel::init(32, &mut rng).unwrap();
        let noise = Array2::from_shape_fn((5, 32), |_| rng.random_range(-1.0..1.0));
        let a = generate(&g, noise.view(), &[0, 1, 0, 1, 1]).unwrap();
        assert_eq!(a.dim(), (5, 30));
        assert!(a.iter().all(|&v| v > 0.0 && v < 1.0));
        assert_eq!(a, generate(&g, noise.view(), &[0, 1, 0, 1, 1]).unwrap());
        assert!(matches!(
            generate(&g, noise.view(), &[0, 1, 2, 1, 1]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn losses_closed_forms() {
        let half = Array1::from_elem(3, 0.5);
        let (ls, _) = acgan_losses(
            half.view(),
            half.view(),
            half.view(),
            half.view(),
            &[0, 1, 1],
            &[1, 0, 0],
        )
        .unwrap();
        assert!((ls - 2.0 * 0.5f64.ln()).abs() < 1e-15);

        let real_p = array![0.0, 1.0];
        let fake_p = array![1.0, 0.0];
        let (_, lc) = acgan_losses(
            half.slice(s![..2]),
            half.slice(s![..2]),
            real_p.view(),
            fake_p.view(),
            &[0, 1],
            &[1, 0],
        )
        .unwrap();
        assert!(lc <= 0.0 && lc >= 2.0 * (1.0 - crate::nn::PROB_EPS).ln());
        assert!(acgan_losses(
            half.view(),
            half.view(),
            half.view(),
            half.view(),
            &[0],
            &[0]
        )
        .is_err());
    }

    #[test]
    fn losses_match_sum_of_logs_oracle() {
        let mut rng = seed::rng(11);
        for _ in 0..20 {
            let n = rng.random_range(1..12);
            let m = rng.random_range(1..12);
            let v = |rng: &mut seed::Rng, k: usize| -> Array1<f64> {
                (0..k).map(|_| rng.random_range(0.001..0.999)).collect()
            };
            let (a, b, c, d) = (
                v(&mut rng, n),
                v(&mut rng, m),
                v(&mut rng, n),
                v(&mut rng, m),
            );
            let yr: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
            let yf: Vec<u8> = (0..m).map(|_| rng.random_range(0..=1)).collect();
            let (ls, lc) = acgan_losses(a.view(), b.view(), c.view(), d.view(), &yr, &yf).unwrap();
            let mut s_real = 0.0;
            let mut c_real = 0.0;
            for i in 0..n {
                s_real += a[i].ln();
                c_real += if yr[i] == 1 {
                    c[i].ln()
                } else {
                    (1.0 - c[i]).ln()
                };
            }
            let mut s_fake = 0.0;
            let mut c_fake = 0.0;
            for i in 0..m {
                s_fake += (1.0 - b[i]).ln();
                c_fake += if yf[i] == 1 {
                    d[i].ln()
                } else {
                    (1.0 - d[i]).ln()
                };
            }
            let n = n as f64;
            let m = m as f64;
            assert!((ls - (s_real / n + s_fake / m)).abs() < 1e-12);
            assert!((lc - (c_real / n + c_fake / m)).abs() < 1e-12);
        }
    }

    #[test]
    fn discriminator_and_generator_pass_grad_check() {
        let mut rng = seed::rng(5);
        let g = GeneratorModel::init(8, &mut rng).unwrap();
        let mut d = DiscriminatorModel::init(&mut rng).unwrap();
        d.net.layers_mut()[1].weights.mapv_inplace(|w| w + 0.1);
        let x = Array2::from_shape_fn((6, 30), |_| rng.random_range(0.0..1.0));
        let t = Array2::from_shape_fn((6, 2), |(i, j)| ((i + j) % 2) as f64);
        assert!(grad_check(&d.net, x.view(), LossKind::BceLogitHeads(t.view())).unwrap() <= 1e-4);
        let noise = Array2::from_shape_fn((6, 8), |_| rng.random_range(-1.0..1.0));
        let gi = g.inputs(noise.view(), &[0, 1, 1, 0, 1, 0]).unwrap();
        assert!(grad_check(&g.net, gi.view(), LossKind::Mse(x.view())).unwrap() <= 1e-4);
    }

    #[test]
    fn toy_task_is_learned_and_conditioned() {
        let (x, y) = toy(200, 1);
        let (g, d, log) = train_acgan(x.view(), &y, &short(1)).unwrap();
        assert_eq!(log.len(), 300);
        assert!(log.iter().all(|e| e.d_ls <= 0.0 && e.d_lc <= 0.0));
        let acc = accuracy(&d, &x, &y);
        assert!(acc >= 0.95, "{acc}");

        let noise = Array2::from_elem((1, g.noise_dim), 0.2);
        let a = generate(&g, noise.view(), &[0]).unwrap();
        let b = generate(&g, noise.view(), &[1]).unwrap();
        assert_ne!(a, b);
        // the generated class means move the right way on the informative axes
        let (rows, classes) = sample_generated(&g, [100, 100], 9).unwrap();
        let mean = |c: u8| {
            let idx: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == c).collect();
            rows.select(Axis(0), &idx).column(0).mean().unwrap()
        };
        assert!(mean(1) > mean(0));
    }

    #[test]
    fn label_swap_complements_decisions_exactly() {
        let (x, y) = toy(120, 2);
        let cfg = AcganConfig {
            epochs: 25,
            seed: 4,
            ..AcganConfig::default()
        };
        let (_, d, _) = train_acgan(x.view(), &y, &cfg).unwrap();
        let swapped: Vec<u8> = y.iter().map(|&l| 1 - l).collect();
        let (_, ds, _) = train_acgan(x.view(), &swapped, &cfg).unwrap();
        let z = d.logits(x.view()).unwrap();
        let zs = ds.logits(x.view()).unwrap();
        for i in 0..x.nrows() {
            assert_eq!(z[[i, 0]].to_bits(), zs[[i, 0]].to_bits());
            assert_eq!(z[[i, 1]].to_bits(), (-zs[[i, 1]]).to_bits());
        }
        let p = predict_proba(&d, x.view()).unwrap();
        let ps = predict_proba(&ds, x.view()).unwrap();
        for i in 0..x.nrows() {
            assert_ne!(p[i] >= 0.5, ps[i] >= 0.5);
        }
    }

    #[test]
    fn training_is_reproducible_and_validates_input() {
        let (x, y) = toy(60, 3);
        let cfg = AcganConfig {
            epochs: 5,
            seed: 8,
            ..AcganConfig::default()
        };
        let a = train_acgan(x.view(), &y, &cfg).unwrap();
        let b = train_acgan(x.view(), &y, &cfg).unwrap();
        assert_eq!(a, b);
        let c = train_acgan(
            x.view(),
            &y,
            &AcganConfig {
                seed: 9,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert_ne!(a.1, c.1);

        assert!(matches!(
            train_acgan(x.view(), &[1; 60], &cfg),
            Err(Error::Domain(_))
        ));
        assert!(train_acgan(x.slice(s![.., ..29]), &y, &cfg).is_err());
        assert!(train_acgan(x.view(), &y, &AcganConfig { epochs: 0, ..cfg }).is_err());
    }

    #[test]
    fn models_and_samples_round_trip() {
        let (x, y) = toy(40, 6);
        let cfg = AcganConfig {
            epochs: 2,
            noise_dim: 7,
            ..AcganConfig::default()
        };
        let (g, d, log) = train_acgan(x.view(), &y, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        g.save(&dir.path().join("g.model")).unwrap();
        d.save(&dir.path().join("d.model"), &log).unwrap();
        assert_eq!(
            GeneratorModel::load(&dir.path().join("g.model")).unwrap(),
            g
        );
        assert_eq!(
            DiscriminatorModel::load(&dir.path().join("d.model")).unwrap(),
            (d, log)
        );
        assert!(GeneratorModel::load(&dir.path().join("d.model")).is_err());

        let (rows, classes) = sample_generated(&g, [2, 3], 1).unwrap();
        let text = write_generated_csv(rows.view(), &classes).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("class,f0,f1,"));
        assert_eq!(lines.count(), 5);
    }

    #[test]
    fn class_head_starts_at_zero() {
        let d = DiscriminatorModel::init(&mut seed::rng(0)).unwrap();
        assert!(d.net.layers()[1].weights.row(1).iter().all(|&w| w == 0.0));
    }
}
