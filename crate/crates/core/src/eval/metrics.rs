//! Threshold metrics, ROC curves and AUC.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn check_inputs(scores: &[f64], labels: &[u8]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.is_empty() {
        return Err(Error::Domain("no samples to evaluate".into()));
    }
    if labels.iter().any(|&l| l > 1) {
        return Err(Error::Domain("labels must be 0 or 1".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Numeric("NaN score".into()));
    }
    Ok(())
}

/// Counts with `score >= threshold` predicted positive.
pub fn confusion(scores: &[f64], labels: &[u8], threshold: f64) -> Result<ConfusionCounts> {
    check_inputs(scores, labels)?;
    let mut c = ConfusionCounts::default();
    for (&s, &l) in scores.iter().zip(labels) {
        match (s >= threshold, l == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Which ratios hit 0/0 and were set to 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MetricFlags {
    pub sensitivity: bool,
    pub specificity: bool,
    pub precision: bool,
    pub f_score: bool,
}

impl MetricFlags {
    pub fn any(&self) -> bool {
        self.sensitivity || self.specificity || self.precision || self.f_score
    }

    /// `;`-joined names of the flagged ratios, empty when none.
    pub fn describe(&self) -> String {
        [
            (self.sensitivity, "sensitivity_undefined"),
            (self.specificity, "specificity_undefined"),
            (self.precision, "precision_undefined"),
            (self.f_score, "f_score_undefined"),
        ]
        .iter()
        .filter(|(on, _)| *on)
        .map(|(_, name)| *name)
        .collect::<Vec<_>>()
        .join(";")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub f_score: f64,
    pub flags: MetricFlags,
}

fn ratio(num: f64, den: f64, flag: &mut bool) -> f64 {
    if den == 0.0 {
        *flag = true;
        0.0
    } else {
        num / den
    }
}

pub fn metrics(c: &ConfusionCounts) -> Metrics {
    let mut flags = MetricFlags::default();
    let [tp, fp, tn, fn_] = [c.tp, c.fp, c.tn, c.fn_].map(|v| v as f64);
    let mut unused = false;
    let accuracy = ratio(tp + tn, c.total() as f64, &mut unused);
    let sensitivity = ratio(tp, tp + fn_, &mut flags.sensitivity);
    let specificity = ratio(tn, tn + fp, &mut flags.specificity);
    let precision = ratio(tp, tp + fp, &mut flags.precision);
    let f_score = ratio(
        2.0 * precision * sensitivity,
        precision + sensitivity,
        &mut flags.f_score,
    );
    Metrics {
        accuracy,
        sensitivity,
        specificity,
        f_score,
        flags,
    }
}

/// ROC curve with one vertex per distinct score, swept from high to low.
#[derive(Debug, Clone, PartialEq)]
pub struct RocCurve {
    /// `(fpr, tpr)` from (0, 0) to (1, 1).
    pub points: Vec<(f64, f64)>,
    /// `(fp, tp)` counts behind each point.
    pub counts: Vec<(usize, usize)>,
    pub positives: usize,
    pub negatives: usize,
}

pub fn roc_curve(scores: &[f64], labels: &[u8]) -> Result<RocCurve> {
    check_inputs(scores, labels)?;
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Domain("ROC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut counts = vec![(0, 0)];
    let (mut fp, mut tp) = (0, 0);
    for (k, &i) in order.iter().enumerate() {
        if labels[i] == 1 {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = order
            .get(k + 1)
            .is_none_or(|&next| scores[next] != scores[i]);
        if last_of_tie {
            counts.push((fp, tp));
        }
    }
    let points = counts
        .iter()
        .map(|&(f, t)| (f as f64 / negatives as f64, t as f64 / positives as f64))
        .collect();
    Ok(RocCurve {
        points,
        counts,
        positives,
        negatives,
    })
}

/// Trapezoid area, accumulated in integer counts and divided once.
pub fn auc(curve: &RocCurve) -> f64 {
    let twice_area: u128 = curve
        .counts
        .windows(2)
        .map(|w| ((w[1].0 - w[0].0) * (w[0].1 + w[1].1)) as u128)
        .sum();
    twice_area as f64 / (2 * curve.positives * curve.negatives) as f64
}

/// Evaluates a piecewise-linear curve at `fpr`. Where the curve has a
/// vertical segment the highest tpr at that fpr is used.
pub fn tpr_at(points: &[(f64, f64)], fpr: f64) -> f64 {
    let mut lo = (0.0, 0.0);
    for &(f, t) in points {
        if f <= fpr {
            lo = (f, t);
        } else {
            if f == lo.0 {
                return t;
            }
            return lo.1 + (t - lo.1) * (fpr - lo.0) / (f - lo.0);
        }
    }
    lo.1
}

/// `n` evenly spaced FPR values on [0, 1].
pub fn fpr_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Mean tpr of several curves on a fixed FPR grid.
pub fn average_curves(curves: &[RocCurve], grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter()
        .map(|&f| {
            let t = curves.iter().map(|c| tpr_at(&c.points, f)).sum::<f64>() / curves.len() as f64;
            (f, t)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mann_whitney(scores: &[f64], labels: &[u8]) -> f64 {
        let (mut concordant, mut ties, mut pairs) = (0.0, 0.0, 0.0);
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] == 1 && labels[j] == 0 {
                    pairs += 1.0;
                    if scores[i] > scores[j] {
                        concordant += 1.0;
                    } else if scores[i] == scores[j] {
                        ties += 1.0;
                    }
                }
            }
        }
        (concordant + 0.5 * ties) / pairs
    }

    #[test]
    fn confusion_examples() {
        let c = confusion(&[0.9, 0.2, 0.6, 0.4], &[1, 0, 0, 1], 0.5).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fp: 1,
                tn: 1,
                fn_: 1
            }
        );
        let c = confusion(&[0.5; 3], &[1, 0, 0], 0.5).unwrap();
        assert_eq!((c.tp, c.fp), (1, 2));
        assert!(matches!(confusion(&[], &[], 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn metric_arithmetic() {
        let m = metrics(&ConfusionCounts {
            tp: 50,
            tn: 40,
            fp: 5,
            fn_: 5,
        });
        assert!((m.accuracy - 0.90).abs() < 1e-12);
        assert!((m.sensitivity - 50.0 / 55.0).abs() < 1e-12);
        assert!((m.specificity - 40.0 / 45.0).abs() < 1e-12);
        assert!((m.f_score - 100.0 / 110.0).abs() < 1e-12);
        assert!(!m.flags.any());
    }

    #[test]
    fn zero_cases_are_flagged() {
        let m = metrics(&ConfusionCounts {
            tp: 0,
            fp: 0,
            tn: 3,
            fn_: 2,
        });
        assert_eq!(m.f_score, 0.0);
        assert!(m.flags.precision && m.flags.f_score && !m.flags.specificity);
        assert_eq!(m.flags.describe(), "precision_undefined;f_score_undefined");
    }

    #[test]
    fn roc_examples() {
        let c = roc_curve(&[0.9, 0.8, 0.7, 0.1], &[1, 0, 1, 0]).unwrap();
        assert_eq!(auc(&c), 0.75);
        let c = roc_curve(&[0.3; 4], &[1, 0, 1, 0]).unwrap();
        assert_eq!(c.points, vec![(0.0, 0.0), (1.0, 1.0)]);
        assert_eq!(auc(&c), 0.5);
        assert_eq!(auc(&roc_curve(&[0.9, 0.8, 0.2], &[1, 1, 0]).unwrap()), 1.0);
        assert!(matches!(
            roc_curve(&[0.1, 0.2], &[1, 1]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn interpolation_takes_upper_corner_on_vertical_steps() {
        let pts = [(0.0, 0.0), (0.0, 0.5), (0.5, 0.5), (1.0, 1.0)];
        assert_eq!(tpr_at(&pts, 0.0), 0.5);
        assert_eq!(tpr_at(&pts, 0.25), 0.5);
        assert_eq!(tpr_at(&pts, 0.75), 0.75);
        assert_eq!(tpr_at(&pts, 1.0), 1.0);
        assert_eq!(fpr_grid(1001).len(), 1001);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<u8>)> {
        (2usize..=20).prop_flat_map(|n| {
            (
                proptest::collection::vec((0u8..6).prop_map(|v| f64::from(v) / 5.0), n),
                proptest::collection::vec(0u8..2, n),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn auc_equals_mann_whitney((scores, mut labels) in instance()) {
            labels[0] = 1;
            labels[1] = 0;
            let c = roc_curve(&scores, &labels).unwrap();
            prop_assert_eq!(auc(&c), mann_whitney(&scores, &labels));
            prop_assert_eq!(c.points[0], (0.0, 0.0));
            prop_assert_eq!(*c.points.last().unwrap(), (1.0, 1.0));
            prop_assert!(c.points.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
        }

        #[test]
        fn metrics_invariant_under_joint_permutation(
            (scores, labels) in instance(),
            perm_seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            let mut idx: Vec<usize> = (0..scores.len()).collect();
            idx.shuffle(&mut crate::seed::rng(perm_seed));
            let s2: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
            let l2: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
            prop_assert_eq!(confusion(&scores, &labels, 0.5).unwrap(), confusion(&s2, &l2, 0.5).unwrap());
            if let (Ok(a), Ok(b)) = (roc_curve(&scores, &labels), roc_curve(&s2, &l2)) {
                prop_assert_eq!(auc(&a), auc(&b));
            }
        }
    }
}
