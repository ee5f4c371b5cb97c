//! The seven comparison classifiers behind one scoring interface.

mod bayes;
mod ensemble;
mod mlp;
mod svm;
mod tree;

use ndarray::{Array1, ArrayView2};

use crate::acgan::{predict_proba, DiscriminatorModel};
use crate::error::{Error, Result};
use crate::nn::sigmoid;

pub use bayes::{fit_naive_bayes, NaiveBayes};
pub use ensemble::{
    fit_adaboost, fit_decision_tree, fit_gradient_boosting, fit_random_forest, AdaBoost,
    AdaBoostConfig, DecisionTree, ForestConfig, GradientBoosting, GradientBoostingConfig,
    RandomForest, TreeConfig, ADABOOST_ALPHA_CAP,
};
pub use mlp::{fit_mlp, mlp_net, Mlp, MlpConfig};
pub use svm::{fit_svm_rbf, Gamma, Svm, SvmConfig};
pub use tree::TreeNode;

/// A trained binary classifier scoring rows with P(malignant) in [0, 1].
pub trait ScorerModel: Send + Sync {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>>;
}

impl ScorerModel for DecisionTree {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        Ok(x.rows().into_iter().map(|r| self.root.predict(r)).collect())
    }
}

impl ScorerModel for RandomForest {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        let n = self.trees.len() as f64;
        Ok(x.rows()
            .into_iter()
            .map(|r| self.trees.iter().map(|t| t.predict(r)).sum::<f64>() / n)
            .collect())
    }
}

impl ScorerModel for AdaBoost {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        Ok(x.rows()
            .into_iter()
            .map(|r| sigmoid(self.decision(r)))
            .collect())
    }
}

impl ScorerModel for GradientBoosting {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        Ok(x.rows()
            .into_iter()
            .map(|r| sigmoid(self.decision(r)))
            .collect())
    }
}

impl ScorerModel for NaiveBayes {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        Ok(self.predict_proba(x))
    }
}

impl ScorerModel for Svm {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        Ok(self.predict_proba(x))
    }
}

impl ScorerModel for Mlp {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        self.predict_proba(x)
    }
}

impl ScorerModel for DiscriminatorModel {
    fn score(&self, x: ArrayView2<f64>) -> Result<Array1<f64>> {
        predict_proba(self, x)
    }
}

/// Classifier rows of the report, in table order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Classifier {
    DecisionTree,
    NaiveBayes,
    Svm,
    AdaBoost,
    RandomForest,
    Mlp,
    GradientBoosting,
    Acgan,
}

impl Classifier {
    pub const ALL: [Classifier; 8] = [
        Classifier::DecisionTree,
        Classifier::NaiveBayes,
        Classifier::Svm,
        Classifier::AdaBoost,
        Classifier::RandomForest,
        Classifier::Mlp,
        Classifier::GradientBoosting,
        Classifier::Acgan,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Classifier::DecisionTree => "dt",
            Classifier::NaiveBayes => "nb",
            Classifier::Svm => "svm",
            Classifier::AdaBoost => "ada",
            Classifier::RandomForest => "rf",
            Classifier::Mlp => "mlp",
            Classifier::GradientBoosting => "gb",
            Classifier::Acgan => "acgan",
        }
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Classifier::DecisionTree => "Decision Tree",
            Classifier::NaiveBayes => "Naive Bayes",
            Classifier::Svm => "SVM",
            Classifier::AdaBoost => "AdaBoost",
            Classifier::RandomForest => "Random Forest",
            Classifier::Mlp => "MLP",
            Classifier::GradientBoosting => "Gradient Boosting",
            Classifier::Acgan => "AC-GAN",
        }
    }

    pub fn from_tag(tag: &str) -> Result<Self> {
        Classifier::ALL
            .into_iter()
            .find(|c| c.tag() == tag)
            .ok_or_else(|| Error::Config(format!("unknown classifier {tag:?}")))
    }
}

/// Hyperparameters for every baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineConfig {
    pub tree: TreeConfig,
    pub nb_var_smoothing: f64,
    pub svm: SvmConfig,
    pub forest: ForestConfig,
    pub adaboost: AdaBoostConfig,
    pub gb: GradientBoostingConfig,
    pub mlp: MlpConfig,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            tree: TreeConfig::default(),
            nb_var_smoothing: 1e-9,
            svm: SvmConfig::default(),
            forest: ForestConfig::default(),
            adaboost: AdaBoostConfig::default(),
            gb: GradientBoostingConfig::default(),
            mlp: MlpConfig::default(),
        }
    }
}

/// Fits one of the seven baselines; `seed` overrides the config seeds of
/// the stochastic ones.
pub fn fit_baseline(
    which: Classifier,
    x: ArrayView2<f64>,
    y: &[u8],
    config: &BaselineConfig,
    seed: u64,
) -> Result<Box<dyn ScorerModel>> {
    Ok(match which {
        Classifier::DecisionTree => Box::new(fit_decision_tree(x, y, &config.tree)?),
        Classifier::NaiveBayes => Box::new(fit_naive_bayes(x, y, config.nb_var_smoothing)?),
        Classifier::Svm => Box::new(fit_svm_rbf(x, y, &config.svm)?),
        Classifier::AdaBoost => Box::new(fit_adaboost(x, y, &config.adaboost)?),
        Classifier::RandomForest => Box::new(fit_random_forest(
            x,
            y,
            &ForestConfig {
                seed,
                ..config.forest.clone()
            },
        )?),
        Classifier::Mlp => Box::new(fit_mlp(
            x,
            y,
            &MlpConfig {
                seed,
                ..config.mlp.clone()
            },
        )?),
        Classifier::GradientBoosting => Box::new(fit_gradient_boosting(x, y, &config.gb)?),
        Classifier::Acgan => {
            return Err(Error::Config(
                "AC-GAN is not a baseline; use acgan::train_acgan".into(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use ndarray::{array, Array2};
    use proptest::prelude::*;
    use rand::Rng;

    fn cloud(n: usize, d: usize, s: u64) -> (Array2<f64>, Vec<u8>) {
        let mut rng = seed::rng(s);
        let x = Array2::from_shape_fn((n, d), |_| rng.random_range(0.0..1.0));
        let y = (0..n)
            .map(|i| u8::from(x[[i, 0]] + x[[i, 1 % d]] + rng.random_range(-0.3..0.3) > 1.0))
            .collect();
        (x, y)
    }

    fn accuracy(m: &dyn ScorerModel, x: ArrayView2<f64>, y: &[u8]) -> f64 {
        let s = m.score(x).unwrap();
        (0..y.len())
            .filter(|&i| u8::from(s[i] >= 0.5) == y[i])
            .count() as f64
            / y.len() as f64
    }

    #[test]
    fn tree_splits_separable_line_once() {
        let x = array![[-2.0], [-1.0], [-0.5], [0.0], [0.5], [3.0]];
        let y = [0, 0, 0, 1, 1, 1];
        let t = fit_decision_tree(x.view(), &y, &TreeConfig::default()).unwrap();
        assert_eq!(t.root.leaf_count(), 2);
        assert_eq!(accuracy(&t, x.view(), &y), 1.0);
        match &t.root {
            TreeNode::Split { threshold, .. } => assert_eq!(*threshold, -0.25),
            _ => panic!("expected a split"),
        }
    }

    #[test]
    fn pure_data_gives_constant_leaf() {
        let x = array![[0.1, 0.2], [0.5, 0.9]];
        let t = fit_decision_tree(x.view(), &[1, 1], &TreeConfig::default()).unwrap();
        assert_eq!(t.root, TreeNode::Leaf(1.0));
    }

    #[test]
    fn forest_reduces_to_single_tree() {
        let (x, y) = cloud(150, 6, 1);
        let tree = fit_decision_tree(x.view(), &y, &TreeConfig::default()).unwrap();
        let forest = fit_random_forest(
            x.view(),
            &y,
            &ForestConfig {
                n_trees: 1,
                attrs_per_tree: 6,
                bootstrap: false,
                per_split: false,
                seed: 9,
            },
        )
        .unwrap();
        assert_eq!(forest.trees[0], tree.root);
        let (q, _) = cloud(50, 6, 2);
        assert_eq!(
            forest.score(q.view()).unwrap(),
            tree.score(q.view()).unwrap()
        );
    }

    #[test]
    fn forest_trees_use_only_their_attributes() {
        let (x, y) = cloud(120, 30, 3);
        let f = fit_random_forest(x.view(), &y, &ForestConfig::default()).unwrap();
        assert_eq!(f.trees.len(), 10);
        for (t, attrs) in f.trees.iter().zip(&f.tree_attrs) {
            assert_eq!(attrs.len(), 5);
            let mut used = Vec::new();
            t.split_attrs(&mut used);
            assert!(used.iter().all(|a| attrs.contains(a)));
        }
        let per_split = fit_random_forest(
            x.view(),
            &y,
            &ForestConfig {
                per_split: true,
                ..ForestConfig::default()
            },
        )
        .unwrap();
        assert!(accuracy(&per_split, x.view(), &y) > 0.9);
        assert!(fit_random_forest(
            x.view(),
            &y,
            &ForestConfig {
                attrs_per_tree: 31,
                ..ForestConfig::default()
            }
        )
        .is_err());
    }

    #[test]
    fn adaboost_weights_normalized_and_errors_below_half() {
        let (x, y) = cloud(100, 3, 4);
        let mut sums = Vec::new();
        let m = ensemble::adaboost_rounds(x.view(), &y, &AdaBoostConfig::default(), |w| {
            sums.push(w.iter().sum::<f64>())
        })
        .unwrap();
        assert!(!sums.is_empty());
        assert!(sums.iter().all(|s| (s - 1.0).abs() < 1e-12));
        assert!(m.errors.iter().all(|&e| e < 0.5));
    }

    #[test]
    fn adaboost_separable_is_perfect_quickly() {
        let x = array![[0.1], [0.2], [0.3], [0.7], [0.8], [0.9]];
        let y = [0, 0, 0, 1, 1, 1];
        let m = fit_adaboost(x.view(), &y, &AdaBoostConfig::default()).unwrap();
        assert!(m.stages.len() <= 3);
        assert_eq!(m.stages[0].0, ADABOOST_ALPHA_CAP);
        assert_eq!(ADABOOST_ALPHA_CAP, 1e12f64.ln());
        assert_eq!(accuracy(&m, x.view(), &y), 1.0);
    }

    #[test]
    fn adaboost_hand_simulated_round() {
        // one stump cannot separate 0 1 0; round one leaves a single mistake
        let x = array![[0.0], [1.0], [2.0]];
        let y = [0, 1, 0];
        let mut weights = Vec::new();
        let m = ensemble::adaboost_rounds(x.view(), &y, &AdaBoostConfig { n_estimators: 1 }, |w| {
            weights = w.to_vec()
        })
        .unwrap();
        let err = m.errors[0];
        assert!((err - 1.0 / 3.0).abs() < 1e-12);
        assert!((m.stages[0].0 - 0.5 * 2f64.ln()).abs() < 1e-12);
        // the misclassified row carries half the weight afterwards
        let mut sorted = weights.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[2] - 0.5).abs() < 1e-12);
        assert!((sorted[0] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn boosting_zero_rounds_is_base_rate() {
        let (x, y) = cloud(80, 4, 5);
        let m = fit_gradient_boosting(
            x.view(),
            &y,
            &GradientBoostingConfig {
                n_estimators: 0,
                ..GradientBoostingConfig::default()
            },
        )
        .unwrap();
        let rate = y.iter().filter(|&&l| l == 1).count() as f64 / y.len() as f64;
        for s in m.score(x.view()).unwrap() {
            assert!((s - rate).abs() < 1e-12);
        }
    }

    #[test]
    fn boosting_training_loss_non_increasing() {
        let (x, y) = cloud(120, 5, 6);
        let log_loss = |k: usize| {
            let m = fit_gradient_boosting(
                x.view(),
                &y,
                &GradientBoostingConfig {
                    n_estimators: k,
                    ..GradientBoostingConfig::default()
                },
            )
            .unwrap();
            let s = m.score(x.view()).unwrap();
            -(0..y.len())
                .map(|i| {
                    if y[i] == 1 {
                        s[i].ln()
                    } else {
                        (1.0 - s[i]).ln()
                    }
                })
                .sum::<f64>()
                / y.len() as f64
        };
        let losses: Vec<f64> = (0..=10).map(log_loss).collect();
        for w in losses.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "{losses:?}");
        }
    }

    #[test]
    fn every_baseline_scores_in_unit_interval_and_beats_chance() {
        let (x, y) = cloud(150, 30, 7);
        let cfg = BaselineConfig::default();
        for c in Classifier::ALL
            .into_iter()
            .filter(|&c| c != Classifier::Acgan)
        {
            let m = fit_baseline(c, x.view(), &y, &cfg, 3).unwrap();
            let s = m.score(x.view()).unwrap();
            assert!(s.iter().all(|v| (0.0..=1.0).contains(v)), "{c:?}");
            assert!(accuracy(m.as_ref(), x.view(), &y) > 0.75, "{c:?}");
            assert_eq!(s, m.score(x.view()).unwrap());
        }
        assert!(fit_baseline(Classifier::Acgan, x.view(), &y, &cfg, 0).is_err());
    }

    #[test]
    fn classifier_tags_round_trip() {
        for c in Classifier::ALL {
            assert_eq!(Classifier::from_tag(c.tag()).unwrap(), c);
        }
        assert!(Classifier::from_tag("knn").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn trees_invariant_to_monotone_transform(s in 0u64..1000) {
            let (x, y) = cloud(40, 3, s);
            let warped = x.mapv(|v| (3.0 * v).exp() + v * v * v);
            let a = fit_decision_tree(x.view(), &y, &TreeConfig::default()).unwrap();
            let b = fit_decision_tree(warped.view(), &y, &TreeConfig::default()).unwrap();
            prop_assert_eq!(a.score(x.view()).unwrap(), b.score(warped.view()).unwrap());
            let ga = fit_gradient_boosting(x.view(), &y, &GradientBoostingConfig::default()).unwrap();
            let gb = fit_gradient_boosting(warped.view(), &y, &GradientBoostingConfig::default()).unwrap();
            let (sa, sb) = (ga.score(x.view()).unwrap(), gb.score(warped.view()).unwrap());
            for i in 0..40 {
                prop_assert!((sa[i] - sb[i]).abs() < 1e-12);
            }
        }
    }
}
