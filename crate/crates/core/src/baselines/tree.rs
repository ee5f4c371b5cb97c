//! CART trees: weighted Gini classification trees and squared-error
//! regression trees. Thresholds are midpoints between adjacent distinct
//! values; rows with `x <= threshold` go left.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index::sample;

use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Split {
        attr: usize,
        threshold: f64,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
    },
    /// Leaf value: positive-class probability for classification trees, the
    /// fitted constant for regression trees.
    Leaf(f64),
}

impl TreeNode {
    pub fn predict(&self, row: ArrayView1<f64>) -> f64 {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf(v) => return *v,
                TreeNode::Split {
                    attr,
                    threshold,
                    left,
                    right,
                } => {
                    node = if row[*attr] <= *threshold {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 0,
            TreeNode::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            TreeNode::Leaf(_) => 1,
            TreeNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }

    /// Attributes used by any split.
    pub fn split_attrs(&self, out: &mut Vec<usize>) {
        if let TreeNode::Split {
            attr, left, right, ..
        } = self
        {
            out.push(*attr);
            left.split_attrs(out);
            right.split_attrs(out);
        }
    }
}

/// Which attributes a split may consider.
pub(crate) enum AttrPool {
    Fixed(Vec<usize>),
    /// A fresh random subset of this size at every split.
    PerSplit(usize, Box<seed::Rng>),
}

impl AttrPool {
    fn draw(&mut self, total: usize) -> Vec<usize> {
        match self {
            AttrPool::Fixed(attrs) => attrs.clone(),
            AttrPool::PerSplit(k, rng) => {
                let mut v = sample(rng, total, (*k).min(total)).into_vec();
                v.sort_unstable();
                v
            }
        }
    }
}

pub(crate) struct GrowLimits {
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
}

fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Node impurity criteria. Both are weighted sums that can be updated
/// incrementally while sweeping a sorted attribute.
trait Criterion {
    type Acc: Copy + Default;
    fn add(acc: &mut Self::Acc, row: usize, ctx: &Self);
    fn sub(a: Self::Acc, b: Self::Acc) -> Self::Acc;
    /// Weighted impurity of a node with this accumulator (lower is better).
    fn cost(acc: Self::Acc) -> f64;
    fn weight(acc: Self::Acc) -> f64;
    fn leaf(&self, rows: &[usize], acc: Self::Acc) -> f64;
}

struct Gini<'a> {
    y: &'a [u8],
    w: &'a [f64],
}

impl Criterion for Gini<'_> {
    /// (total weight, positive weight)
    type Acc = (f64, f64);

    fn add(acc: &mut (f64, f64), row: usize, ctx: &Self) {
        acc.0 += ctx.w[row];
        if ctx.y[row] == 1 {
            acc.1 += ctx.w[row];
        }
    }

    fn sub(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
        (a.0 - b.0, a.1 - b.1)
    }

    fn cost((w, p): (f64, f64)) -> f64 {
        if w <= 0.0 {
            return 0.0;
        }
        let q = p / w;
        // weight x gini impurity
        w * 2.0 * q * (1.0 - q)
    }

    fn weight(acc: (f64, f64)) -> f64 {
        acc.0
    }

    fn leaf(&self, _rows: &[usize], (w, p): (f64, f64)) -> f64 {
        if w > 0.0 {
            (p / w).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }
}

struct SquaredError<'a, F: Fn(&[usize]) -> f64> {
    target: &'a [f64],
    leaf_value: F,
}

impl<F: Fn(&[usize]) -> f64> Criterion for SquaredError<'_, F> {
    /// (count, sum, sum of squares)
    type Acc = (f64, f64, f64);

    fn add(acc: &mut (f64, f64, f64), row: usize, ctx: &Self) {
        let t = ctx.target[row];
        acc.0 += 1.0;
        acc.1 += t;
        acc.2 += t * t;
    }

    fn sub(a: (f64, f64, f64), b: (f64, f64, f64)) -> (f64, f64, f64) {
        (a.0 - b.0, a.1 - b.1, a.2 - b.2)
    }

    fn cost((n, s, ss): (f64, f64, f64)) -> f64 {
        if n <= 0.0 {
            return 0.0;
        }
        (ss - s * s / n).max(0.0)
    }

    fn weight(acc: (f64, f64, f64)) -> f64 {
        acc.0
    }

    fn leaf(&self, rows: &[usize], _acc: (f64, f64, f64)) -> f64 {
        (self.leaf_value)(rows)
    }
}

struct Builder<'a, C: Criterion> {
    x: ArrayView2<'a, f64>,
    crit: C,
    pool: AttrPool,
    limits: GrowLimits,
}

impl<C: Criterion> Builder<'_, C> {
    fn accumulate(&self, rows: &[usize]) -> C::Acc {
        let mut acc = C::Acc::default();
        for &r in rows {
            C::add(&mut acc, r, &self.crit);
        }
        acc
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> TreeNode {
        let total = self.accumulate(&rows);
        let parent_cost = C::cost(total);
        let at_limit = self.limits.max_depth.is_some_and(|d| depth >= d);
        if parent_cost <= 1e-12 * C::weight(total).max(1.0)
            || at_limit
            || rows.len() < 2 * self.limits.min_leaf
        {
            return TreeNode::Leaf(self.crit.leaf(&rows, total));
        }
        let Some((attr, threshold)) = self.best_split(&rows, total) else {
            return TreeNode::Leaf(self.crit.leaf(&rows, total));
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.x[[i, attr]] <= threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        TreeNode::Split {
            attr,
            threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn best_split(&mut self, rows: &[usize], total: C::Acc) -> Option<(usize, f64)> {
        let attrs = self.pool.draw(self.x.ncols());
        let min_leaf = self.limits.min_leaf.max(1);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for attr in attrs {
            let col = self.x.column(attr);
            sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
            let mut left = C::Acc::default();
            for k in 0..sorted.len() - 1 {
                C::add(&mut left, sorted[k], &self.crit);
                let (a, b) = (col[sorted[k]], col[sorted[k + 1]]);
                if a == b || k + 1 < min_leaf || sorted.len() - k - 1 < min_leaf {
                    continue;
                }
                let cost = C::cost(left) + C::cost(C::sub(total, left));
                if best.is_none_or(|(c, _, _)| cost < c - 1e-12) {
                    best = Some((cost, attr, midpoint(a, b)));
                }
            }
        }
        best.map(|(_, attr, thr)| (attr, thr))
    }
}

/// Weighted Gini classification tree over `rows`.
pub(crate) fn grow_classifier(
    x: ArrayView2<f64>,
    y: &[u8],
    weights: &[f64],
    rows: Vec<usize>,
    pool: AttrPool,
    limits: GrowLimits,
) -> TreeNode {
    let mut b = Builder {
        x,
        crit: Gini { y, w: weights },
        pool,
        limits,
    };
    b.grow(rows, 0)
}

/// Squared-error regression tree on `target`; leaves take `leaf_value(rows)`.
pub(crate) fn grow_regressor(
    x: ArrayView2<f64>,
    target: &[f64],
    leaf_value: impl Fn(&[usize]) -> f64,
    limits: GrowLimits,
) -> TreeNode {
    let mut b = Builder {
        x,
        crit: SquaredError { target, leaf_value },
        pool: AttrPool::Fixed((0..x.ncols()).collect()),
        limits,
    };
    b.grow((0..x.nrows()).collect(), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn unlimited() -> GrowLimits {
        GrowLimits {
            max_depth: None,
            min_leaf: 1,
        }
    }

    #[test]
    fn midpoint_stays_below_upper_value() {
        assert_eq!(midpoint(1.0, 3.0), 2.0);
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        assert_eq!(midpoint(a, b), a);
    }

    #[test]
    fn xor_is_split_despite_zero_first_gain() {
        let x = array![[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];
        let y = [0, 1, 1, 0];
        let t = grow_classifier(
            x.view(),
            &y,
            &[1.0; 4],
            (0..4).collect(),
            AttrPool::Fixed(vec![0, 1]),
            unlimited(),
        );
        for (row, &label) in x.rows().into_iter().zip(&y) {
            assert_eq!(t.predict(row), f64::from(label));
        }
        assert_eq!(t.depth(), 2);
    }

    #[test]
    fn regressor_fits_step() {
        let x = array![[0.0], [1.0], [2.0], [3.0]];
        let target = [1.0, 1.0, 5.0, 5.0];
        let t = grow_regressor(
            x.view(),
            &target,
            |rows| rows.iter().map(|&i| target[i]).sum::<f64>() / rows.len() as f64,
            GrowLimits {
                max_depth: Some(3),
                min_leaf: 1,
            },
        );
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.predict(array![1.4].view()), 1.0);
        assert_eq!(t.predict(array![1.6].view()), 5.0);
    }
}
