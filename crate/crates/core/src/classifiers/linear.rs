//! Linear classifiers: logistic regression (full-batch gradient descent with
//! backtracking), Pegasos-style linear SVM, an SGD classifier with a
//! constant-then-decaying schedule, and a ridge classifier solved directly
//! from the normal equations.
//!
//! Optimization runs in `f64`; the resulting weights are cast into the
//! caller's scalar type.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{TrainError, TrainingSet};
use crate::linalg::cholesky_solve;
use crate::scalar::{cast, sigmoid, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Hinge,
    Logistic,
    Squared,
}

/// Weight vector plus bias. `bias` stays zero for the SVM and ridge trainers,
/// which fit through the origin.
#[derive(Debug, Clone)]
pub struct LinearModel<S> {
    pub weights: Vec<S>,
    pub bias: S,
    pub loss_kind: LossKind,
    pub l2: f64,
    pub converged: bool,
}

impl<S: Real> LinearModel<S> {
    pub fn decision(&self, row: &[(usize, S)]) -> f64 {
        let mut z = self.bias.to_f64().unwrap_or(0.0);
        for &(col, x) in row {
            z += self.weights[col].to_f64().unwrap_or(0.0) * x.to_f64().unwrap_or(0.0);
        }
        z
    }

    pub fn all_finite(&self) -> bool {
        self.bias.is_finite() && self.weights.iter().all(|w| w.is_finite())
    }
}

fn to_f64_rows<S: Real>(ts: &TrainingSet<'_, S>) -> Vec<Vec<(usize, f64)>> {
    (0..ts.n_docs())
        .map(|d| {
            ts.matrix
                .row(d)
                .iter()
                .map(|&(c, x)| (c, x.to_f64().unwrap_or(0.0)))
                .collect()
        })
        .collect()
}

/// L2-regularized logistic loss:
/// `(l2/2)·‖w‖² + Σ_i ln(1 + exp(-y_i (w·x_i + b)))`. The bias is not
/// regularized.
pub fn logistic_objective(
    rows: &[Vec<(usize, f64)>],
    signs: &[f64],
    w: &[f64],
    b: f64,
    l2: f64,
) -> f64 {
    let mut obj = 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    for (row, &y) in rows.iter().zip(signs) {
        let z = b + row.iter().map(|&(c, x)| w[c] * x).sum::<f64>();
        let m = -y * z;
        // ln(1 + e^m), stable for either sign of m.
        obj += if m > 0.0 { m + (-m).exp().ln_1p() } else { m.exp().ln_1p() };
    }
    obj
}

/// Gradient of [`logistic_objective`] with respect to `(w, b)`.
pub fn logistic_gradient(
    rows: &[Vec<(usize, f64)>],
    signs: &[f64],
    w: &[f64],
    b: f64,
    l2: f64,
) -> (Vec<f64>, f64) {
    let mut gw: Vec<f64> = w.iter().map(|v| l2 * v).collect();
    let mut gb = 0.0f64;
    for (row, &y) in rows.iter().zip(signs) {
        let z = b + row.iter().map(|&(c, x)| w[c] * x).sum::<f64>();
        let g = -y * sigmoid(-y * z);
        gb += g;
        for &(c, x) in row {
            gw[c] += g * x;
        }
    }
    (gw, gb)
}

/// Full-batch gradient descent with Armijo backtracking. Stops when the
/// gradient ∞-norm drops below `tol`; otherwise returns after `max_iter`
/// iterations with `converged == false`.
pub fn train_logreg<S: Real>(
    ts: TrainingSet<'_, S>,
    l2: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LinearModel<S>, TrainError> {
    if l2 < 0.0 {
        return Err(TrainError::NonPositiveParameter { value: l2 });
    }
    let rows = to_f64_rows(&ts);
    let signs: Vec<f64> = ts.labels.iter().map(|l| l.sign()).collect();
    let d = ts.n_cols();
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut obj = logistic_objective(&rows, &signs, &w, b, l2);
    let mut step = 1.0f64;
    let mut converged = false;

    for _ in 0..max_iter {
        let (gw, gb) = logistic_gradient(&rows, &signs, &w, b, l2);
        let inf_norm = gw.iter().map(|v| v.abs()).fold(gb.abs(), f64::max);
        if inf_norm < tol {
            converged = true;
            break;
        }
        let g_sq = gw.iter().map(|v| v * v).sum::<f64>() + gb * gb;
        // Armijo backtracking with a slightly optimistic restart.
        step = (step * 2.0).min(1e3);
        let mut accepted = false;
        for _ in 0..64 {
            let w_new: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - step * gi).collect();
            let b_new = b - step * gb;
            let obj_new = logistic_objective(&rows, &signs, &w_new, b_new, l2);
            if obj_new <= obj - 1e-4 * step * g_sq {
                w = w_new;
                b = b_new;
                obj = obj_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // Step collapsed below float resolution: treat as converged.
            converged = true;
            break;
        }
    }

    Ok(LinearModel {
        weights: w.into_iter().map(cast).collect(),
        bias: cast(b),
        loss_kind: LossKind::Logistic,
        l2,
        converged,
    })
}

/// Mean hinge loss `(1/n) Σ max(0, 1 - y·(w·x))` of a model on a training
/// set (regularization excluded).
pub fn hinge_objective<S: Real>(ts: &TrainingSet<'_, S>, model: &LinearModel<S>) -> f64 {
    let mut sum = 0.0;
    for d in 0..ts.n_docs() {
        let z = model.decision(ts.matrix.row(d));
        sum += (1.0 - ts.labels[d].sign() * z).max(0.0);
    }
    sum / ts.n_docs() as f64
}

/// Pegasos-style linear SVM: stochastic subgradient descent on
/// `(λ/2)‖w‖² + (1/n) Σ hinge`, with `λ = 1/(C·n)` and step size
/// `η_t = 1/(λ·t)`. Fits through the origin (no intercept), which keeps the
/// iterates exactly scale-equivariant.
pub fn train_linear_svm<S: Real>(
    ts: TrainingSet<'_, S>,
    c: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearModel<S>, TrainError> {
    if c <= 0.0 {
        return Err(TrainError::NonPositiveParameter { value: c });
    }
    let rows = to_f64_rows(&ts);
    let signs: Vec<f64> = ts.labels.iter().map(|l| l.sign()).collect();
    let n = rows.len();
    let lambda = 1.0 / (c * n as f64);
    let d = ts.n_cols();
    let mut w = vec![0.0f64; d];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0u64;

    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let z: f64 = rows[i].iter().map(|&(col, x)| w[col] * x).sum();
            // Regularization shrink.
            let shrink = 1.0 - eta * lambda;
            for v in &mut w {
                *v *= shrink;
            }
            if signs[i] * z < 1.0 {
                let scale = eta * signs[i];
                for &(col, x) in &rows[i] {
                    w[col] += scale * x;
                }
            }
        }
    }

    Ok(LinearModel {
        weights: w.into_iter().map(cast).collect(),
        bias: S::zero(),
        loss_kind: LossKind::Hinge,
        l2: lambda,
        converged: true,
    })
}

/// SGD classifier hyperparameters: loss, L2 strength and the
/// constant-then-decaying learning-rate schedule (`eta0` held for
/// `warmup_epochs`, then decaying as `1/t`).
#[derive(Debug, Clone)]
pub struct SgdConfig {
    pub loss: LossKind,
    pub l2: f64,
    pub eta0: f64,
    pub warmup_epochs: usize,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig { loss: LossKind::Hinge, l2: 1e-4, eta0: 0.05, warmup_epochs: 1, epochs: 30, seed: 0 }
    }
}

/// Stochastic gradient descent on hinge or logistic loss with L2 shrinkage.
pub fn train_sgd<S: Real>(ts: TrainingSet<'_, S>, cfg: &SgdConfig) -> Result<LinearModel<S>, TrainError> {
    if cfg.l2 < 0.0 {
        return Err(TrainError::NonPositiveParameter { value: cfg.l2 });
    }
    if !matches!(cfg.loss, LossKind::Hinge | LossKind::Logistic) {
        return Err(TrainError::NonPositiveParameter { value: f64::NAN });
    }
    let rows = to_f64_rows(&ts);
    let signs: Vec<f64> = ts.labels.iter().map(|l| l.sign()).collect();
    let n = rows.len();
    let d = ts.n_cols();
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let warmup_steps = (cfg.warmup_epochs * n) as u64;
    let mut t = 0u64;

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = if t <= warmup_steps.max(1) {
                cfg.eta0
            } else {
                cfg.eta0 * warmup_steps.max(1) as f64 / t as f64
            };
            let z = b + rows[i].iter().map(|&(col, x)| w[col] * x).sum::<f64>();
            let y = signs[i];
            let g = match cfg.loss {
                LossKind::Hinge => {
                    if y * z < 1.0 {
                        y
                    } else {
                        0.0
                    }
                }
                LossKind::Logistic => y * sigmoid(-y * z),
                LossKind::Squared => unreachable!(),
            };
            let shrink = 1.0 - eta * cfg.l2;
            for v in &mut w {
                *v *= shrink;
            }
            if g != 0.0 {
                let scale = eta * g;
                for &(col, x) in &rows[i] {
                    w[col] += scale * x;
                }
                b += scale;
            }
        }
    }

    Ok(LinearModel {
        weights: w.into_iter().map(cast).collect(),
        bias: cast(b),
        loss_kind: cfg.loss,
        l2: cfg.l2,
        converged: true,
    })
}

/// Ridge classifier: solves `(XᵀX + αI) w = Xᵀy` exactly with targets ±1
/// and predicts by the sign of `w·x`. When the feature count exceeds the
/// document count, the equivalent dual system `(XXᵀ + αI) β = y`,
/// `w = Xᵀβ` is factored instead; both are direct solves of the same normal
/// equations.
pub fn train_ridge<S: Real>(ts: TrainingSet<'_, S>, alpha: f64) -> Result<LinearModel<S>, TrainError> {
    if alpha <= 0.0 {
        return Err(TrainError::NonPositiveParameter { value: alpha });
    }
    let rows = to_f64_rows(&ts);
    let signs: Vec<f64> = ts.labels.iter().map(|l| l.sign()).collect();
    let n = rows.len();
    let d = ts.n_cols();

    let w = if d <= n {
        // Primal: gram = XᵀX + αI (d×d), rhs = Xᵀy.
        let mut gram = vec![0.0f64; d * d];
        let mut rhs = vec![0.0f64; d];
        for (row, &y) in rows.iter().zip(&signs) {
            for &(ci, xi) in row {
                rhs[ci] += xi * y;
                for &(cj, xj) in row {
                    gram[ci * d + cj] += xi * xj;
                }
            }
        }
        for i in 0..d {
            gram[i * d + i] += alpha;
        }
        cholesky_solve(&mut gram, d, &rhs)
            .map_err(|_| TrainError::NonPositiveParameter { value: alpha })?
    } else {
        // Dual: (XXᵀ + αI) β = y (n×n), then w = Xᵀβ.
        let mut gram = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                // Sparse dot of rows i and j (columns are sorted).
                let (a, b) = (&rows[i], &rows[j]);
                let mut s = 0.0f64;
                let (mut ai, mut bi) = (0usize, 0usize);
                while ai < a.len() && bi < b.len() {
                    match a[ai].0.cmp(&b[bi].0) {
                        std::cmp::Ordering::Less => ai += 1,
                        std::cmp::Ordering::Greater => bi += 1,
                        std::cmp::Ordering::Equal => {
                            s += a[ai].1 * b[bi].1;
                            ai += 1;
                            bi += 1;
                        }
                    }
                }
                gram[i * n + j] = s;
                gram[j * n + i] = s;
            }
            gram[i * n + i] += alpha;
        }
        let beta = cholesky_solve(&mut gram, n, &signs)
            .map_err(|_| TrainError::NonPositiveParameter { value: alpha })?;
        let mut w = vec![0.0f64; d];
        for (row, &bi) in rows.iter().zip(&beta) {
            for &(col, x) in row {
                w[col] += x * bi;
            }
        }
        w
    };

    Ok(LinearModel {
        weights: w.into_iter().map(cast).collect(),
        bias: S::zero(),
        loss_kind: LossKind::Squared,
        l2: alpha,
        converged: true,
    })
}
