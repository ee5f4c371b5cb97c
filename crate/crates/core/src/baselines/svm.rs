//! RBF-kernel C-SVM trained by SMO with second-order working-set selection,
//! plus a Platt-style sigmoid on the decision value.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::nn::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `1 / d`.
    Auto,
    /// `1 / (d * variance of all entries)`.
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmConfig {
    pub c: f64,
    pub gamma: Gamma,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            gamma: Gamma::Auto,
            tol: 1e-3,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Svm {
    pub support: Array2<f64>,
    /// `alpha_i * y_i` for each support vector.
    pub coef: Array1<f64>,
    pub rho: f64,
    pub gamma: f64,
    /// Platt slope; score is `sigmoid(platt_a * f(x))`.
    pub platt_a: f64,
    pub converged: bool,
}

/// Solver output kept for inspection.
#[derive(Debug, Clone)]
pub(crate) struct SmoTrace {
    pub alpha: Vec<f64>,
    /// Dual objective `sum(alpha) - 1/2 alpha' Q alpha` after each iteration.
    #[cfg_attr(not(test), allow(dead_code))]
    pub objective: Vec<f64>,
    /// Maximal KKT violation `m(alpha) - M(alpha)` at exit.
    pub gap: f64,
}

fn rbf(a: ArrayView1<f64>, b: ArrayView1<f64>, gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum();
    (-gamma * d2).exp()
}

fn resolve_gamma(x: ArrayView2<f64>, gamma: Gamma) -> Result<f64> {
    match gamma {
        Gamma::Value(g) if g > 0.0 && g.is_finite() => Ok(g),
        Gamma::Value(g) => Err(Error::Config(format!("svm gamma {g} must be positive"))),
        Gamma::Auto => Ok(1.0 / x.ncols().max(1) as f64),
        Gamma::Scale => {
            let var = if x.is_empty() { 0.0 } else { x.var(0.0) };
            Ok(if var > 0.0 {
                1.0 / (x.ncols() as f64 * var)
            } else {
                1.0
            })
        }
    }
}

/// Solves `min 1/2 a'Qa - e'a` s.t. `0 <= a <= C`, `y'a = 0`.
pub(crate) fn smo(k: &Array2<f64>, y: &[f64], config: &SvmConfig) -> (SmoTrace, f64, bool) {
    let n = y.len();
    let c = config.c;
    let q = |i: usize, j: usize| y[i] * y[j] * k[[i, j]];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut objective = Vec::new();
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);
    let mut converged = false;
    let mut gap = f64::INFINITY;
    for _ in 0..config.max_iter {
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let b = gmax - v;
                let mut a = k[[i, i]] + k[[t, t]] - 2.0 * k[[i, t]];
                if a <= 0.0 {
                    a = 1e-12;
                }
                if -b * b / a < best {
                    best = -b * b / a;
                    j = t;
                }
            }
        }
        gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < config.tol {
            converged = true;
            break;
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let mut quad = k[[i, i]] + k[[j, j]] - 2.0 * k[[i, j]];
        if quad <= 0.0 {
            quad = 1e-12;
        }
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
        // with G = Qa - e the dual objective is -1/2 sum a_t (G_t - 1)
        let obj: f64 = alpha
            .iter()
            .zip(&grad)
            .map(|(a, g)| -0.5 * a * (g - 1.0))
            .sum();
        objective.push(obj);
    }

    // threshold: mean over free vectors, else midpoint of the feasible range
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            free_sum += yg;
            free_n += 1;
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (ub + lb) / 2.0
    };
    (
        SmoTrace {
            alpha,
            objective,
            gap,
        },
        rho,
        converged,
    )
}

/// Slope `a` maximizing the likelihood of `sigmoid(a f)` with Platt's
/// smoothed targets. No intercept, so `f = 0` stays at probability 0.5.
fn platt_slope(f: &[f64], y: &[u8]) -> f64 {
    let pos = y.iter().filter(|&&l| l == 1).count() as f64;
    let neg = y.len() as f64 - pos;
    let hi = (pos + 1.0) / (pos + 2.0);
    let lo = 1.0 / (neg + 2.0);
    let t: Vec<f64> = y.iter().map(|&l| if l == 1 { hi } else { lo }).collect();
    let mut a = 1.0;
    for _ in 0..100 {
        let mut g = 0.0;
        let mut h = 0.0;
        for (fi, ti) in f.iter().zip(&t) {
            let p = sigmoid(a * fi);
            g += (p - ti) * fi;
            h += p * (1.0 - p) * fi * fi;
        }
        if h <= 1e-300 {
            break;
        }
        let step = g / h;
        a -= step;
        if step.abs() < 1e-10 * a.abs().max(1.0) {
            break;
        }
    }
    if a.is_finite() && a > 0.0 {
        a
    } else {
        1.0
    }
}

pub fn fit_svm_rbf(x: ArrayView2<f64>, y: &[u8], config: &SvmConfig) -> Result<Svm> {
    if x.nrows() != y.len() || y.is_empty() {
        return Err(Error::Shape(format!(
            "{} rows vs {} labels",
            x.nrows(),
            y.len()
        )));
    }
    if config.c.is_nan() || config.c <= 0.0 {
        return Err(Error::Config("svm C must be positive".into()));
    }
    if !y.contains(&0) || !y.contains(&1) {
        return Err(Error::Domain("svm needs both classes".into()));
    }
    let gamma = resolve_gamma(x, config.gamma)?;
    let n = y.len();
    let k = Array2::from_shape_fn((n, n), |(i, j)| rbf(x.row(i), x.row(j), gamma));
    let ys: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
    let (trace, rho, converged) = smo(&k, &ys, config);
    if !converged {
        log::warn!(
            "svm: SMO stopped after {} iterations with KKT gap {:.3e}",
            config.max_iter,
            trace.gap
        );
    }
    let sv: Vec<usize> = (0..n).filter(|&i| trace.alpha[i] > 0.0).collect();
    let coef: Array1<f64> = sv.iter().map(|&i| trace.alpha[i] * ys[i]).collect();
    let f: Vec<f64> = (0..n)
        .map(|i| {
            sv.iter()
                .zip(&coef)
                .map(|(&s, c)| c * k[[s, i]])
                .sum::<f64>()
                - rho
        })
        .collect();
    Ok(Svm {
        support: x.select(Axis(0), &sv),
        coef,
        rho,
        gamma,
        platt_a: platt_slope(&f, y),
        converged,
    })
}

impl Svm {
    pub fn decision(&self, row: ArrayView1<f64>) -> f64 {
        self.support
            .rows()
            .into_iter()
            .zip(&self.coef)
            .map(|(s, c)| c * rbf(s, row, self.gamma))
            .sum::<f64>()
            - self.rho
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array1<f64> {
        x.rows()
            .into_iter()
            .map(|r| sigmoid(self.platt_a * self.decision(r)))
            .collect()
    }
}
