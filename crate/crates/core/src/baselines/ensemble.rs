//! Decision tree, random forest, AdaBoost and gradient boosting.

use ndarray::ArrayView2;
use rand::seq::index::sample;
use rand::Rng;

use super::tree::{grow_classifier, grow_regressor, AttrPool, GrowLimits, TreeNode};
use crate::error::{Error, Result};
use crate::nn::sigmoid;
use crate::seed;

fn check_fit(x: ArrayView2<f64>, y: &[u8]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Shape(format!(
            "{} rows vs {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::InsufficientData("no training rows".into()));
    }
    if y.iter().any(|&l| l > 1) {
        return Err(Error::Domain("labels must be 0 or 1".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeConfig {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_depth: None,
            min_leaf: 1,
        }
    }
}

impl TreeConfig {
    fn limits(&self) -> GrowLimits {
        GrowLimits {
            max_depth: self.max_depth,
            min_leaf: self.min_leaf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub root: TreeNode,
}

pub fn fit_decision_tree(
    x: ArrayView2<f64>,
    y: &[u8],
    config: &TreeConfig,
) -> Result<DecisionTree> {
    check_fit(x, y)?;
    let root = grow_classifier(
        x,
        y,
        &vec![1.0; y.len()],
        (0..y.len()).collect(),
        AttrPool::Fixed((0..x.ncols()).collect()),
        config.limits(),
    );
    Ok(DecisionTree { root })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub attrs_per_tree: usize,
    pub bootstrap: bool,
    /// Draw the attribute subset at every split instead of once per tree.
    pub per_split: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 10,
            attrs_per_tree: 5,
            bootstrap: true,
            per_split: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    pub trees: Vec<TreeNode>,
    /// Attribute subset of each tree (all attributes when `per_split`).
    pub tree_attrs: Vec<Vec<usize>>,
}

pub fn fit_random_forest(
    x: ArrayView2<f64>,
    y: &[u8],
    config: &ForestConfig,
) -> Result<RandomForest> {
    check_fit(x, y)?;
    let d = x.ncols();
    if config.attrs_per_tree == 0 || config.attrs_per_tree > d || config.n_trees == 0 {
        return Err(Error::Config(format!(
            "forest needs 1..={d} attributes per tree and at least one tree"
        )));
    }
    let n = y.len();
    let ones = vec![1.0; n];
    let mut trees = Vec::with_capacity(config.n_trees);
    let mut tree_attrs = Vec::with_capacity(config.n_trees);
    for t in 0..config.n_trees {
        let mut rng = seed::rng_for(config.seed, &[0xf0e5, t as u64]);
        let rows: Vec<usize> = if config.bootstrap {
            (0..n).map(|_| rng.random_range(0..n)).collect()
        } else {
            (0..n).collect()
        };
        let (pool, attrs) = if config.per_split {
            let split_rng = seed::rng_for(config.seed, &[0xf0e5, t as u64, 1]);
            (
                AttrPool::PerSplit(config.attrs_per_tree, Box::new(split_rng)),
                (0..d).collect(),
            )
        } else {
            let mut attrs = sample(&mut rng, d, config.attrs_per_tree).into_vec();
            attrs.sort_unstable();
            (AttrPool::Fixed(attrs.clone()), attrs)
        };
        trees.push(grow_classifier(
            x,
            y,
            &ones,
            rows,
            pool,
            TreeConfig::default().limits(),
        ));
        tree_attrs.push(attrs);
    }
    Ok(RandomForest { trees, tree_attrs })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoostConfig {
    pub n_estimators: usize,
}

impl Default for AdaBoostConfig {
    fn default() -> Self {
        AdaBoostConfig { n_estimators: 10 }
    }
}

/// Estimator weight used when a stump classifies the weighted sample perfectly.
pub const ADABOOST_ALPHA_CAP: f64 = 27.631_021_115_928_547; // ln(1e12)

#[derive(Debug, Clone, PartialEq)]
pub struct AdaBoost {
    /// `(alpha, stump)`; each stump votes +1 when its leaf value is >= 0.5.
    pub stages: Vec<(f64, TreeNode)>,
    /// Weighted training error of each accepted stump.
    pub errors: Vec<f64>,
}

fn vote(stump: &TreeNode, row: ndarray::ArrayView1<f64>) -> f64 {
    if stump.predict(row) >= 0.5 {
        1.0
    } else {
        -1.0
    }
}

impl AdaBoost {
    pub fn decision(&self, row: ndarray::ArrayView1<f64>) -> f64 {
        self.stages.iter().map(|(a, s)| a * vote(s, row)).sum()
    }
}

pub fn fit_adaboost(x: ArrayView2<f64>, y: &[u8], config: &AdaBoostConfig) -> Result<AdaBoost> {
    adaboost_rounds(x, y, config, |_| {})
}

/// As [`fit_adaboost`], reporting the normalized sample weights after every
/// accepted round.
pub(crate) fn adaboost_rounds(
    x: ArrayView2<f64>,
    y: &[u8],
    config: &AdaBoostConfig,
    mut observe: impl FnMut(&[f64]),
) -> Result<AdaBoost> {
    check_fit(x, y)?;
    let n = y.len();
    let mut w = vec![1.0 / n as f64; n];
    let mut stages = Vec::new();
    let mut errors = Vec::new();
    let sign = |l: u8| if l == 1 { 1.0 } else { -1.0 };
    for _ in 0..config.n_estimators {
        let stump = grow_classifier(
            x,
            y,
            &w,
            (0..n).collect(),
            AttrPool::Fixed((0..x.ncols()).collect()),
            GrowLimits {
                max_depth: Some(1),
                min_leaf: 1,
            },
        );
        let preds: Vec<f64> = (0..n).map(|i| vote(&stump, x.row(i))).collect();
        let err: f64 = (0..n)
            .filter(|&i| preds[i] != sign(y[i]))
            .map(|i| w[i])
            .sum();
        if err >= 0.5 {
            break;
        }
        let perfect = err <= 0.0;
        let alpha = if perfect {
            ADABOOST_ALPHA_CAP
        } else {
            0.5 * ((1.0 - err) / err).ln()
        };
        stages.push((alpha, stump));
        errors.push(err);
        if perfect {
            break;
        }
        for i in 0..n {
            w[i] *= (-alpha * sign(y[i]) * preds[i]).exp();
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        observe(&w);
    }
    Ok(AdaBoost { stages, errors })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoostingConfig {
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
}

impl Default for GradientBoostingConfig {
    fn default() -> Self {
        GradientBoostingConfig {
            n_estimators: 10,
            learning_rate: 0.1,
            max_depth: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoosting {
    /// Log-odds of the training base rate.
    pub init: f64,
    pub learning_rate: f64,
    pub trees: Vec<TreeNode>,
}

impl GradientBoosting {
    pub fn decision(&self, row: ndarray::ArrayView1<f64>) -> f64 {
        self.init
            + self
                .trees
                .iter()
                .map(|t| self.learning_rate * t.predict(row))
                .sum::<f64>()
    }
}

pub fn fit_gradient_boosting(
    x: ArrayView2<f64>,
    y: &[u8],
    config: &GradientBoostingConfig,
) -> Result<GradientBoosting> {
    check_fit(x, y)?;
    let n = y.len();
    let pos = y.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == n {
        return Err(Error::Domain("gradient boosting needs both classes".into()));
    }
    let p0 = pos as f64 / n as f64;
    let mut model = GradientBoosting {
        init: (p0 / (1.0 - p0)).ln(),
        learning_rate: config.learning_rate,
        trees: Vec::with_capacity(config.n_estimators),
    };
    let mut f = vec![model.init; n];
    for _ in 0..config.n_estimators {
        let p: Vec<f64> = f.iter().map(|&v| sigmoid(v)).collect();
        let residual: Vec<f64> = (0..n).map(|i| f64::from(y[i]) - p[i]).collect();
        let tree = grow_regressor(
            x,
            &residual,
            |rows| {
                let num: f64 = rows.iter().map(|&i| residual[i]).sum();
                let den: f64 = rows.iter().map(|&i| p[i] * (1.0 - p[i])).sum();
                if den.abs() < 1e-150 {
                    0.0
                } else {
                    num / den
                }
            },
            GrowLimits {
                max_depth: Some(config.max_depth),
                min_leaf: 1,
            },
        );
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += config.learning_rate * tree.predict(x.row(i));
        }
        model.trees.push(tree);
    }
    Ok(model)
}
