//! One-vs-rest linear SVM trained by stochastic gradient descent on the
//! L2-regularized hinge loss.
//!
//! Step size is `1 / (alpha * (t0 + t))` with `t0 = 1 / alpha`, so the first
//! step is exactly 1. Each class runs its own pass sequence seeded from
//! `seed`, every epoch visiting the rows in a fresh shuffled order.

use serde::{Deserialize, Serialize};

use super::{check_columns, check_fit_shape};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::sparse::CsrMatrix;
use crate::star::{argmax_star, Star, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub alpha: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            alpha: 1e-4,
            epochs: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: SvmParams,
    pub n_features: usize,
    /// Row-major `[class][feature]`.
    pub weights: Vec<f64>,
    pub bias: [f64; N_CLASSES],
    /// Sum over the binary problems of the full objective after each epoch.
    pub epoch_objective: Vec<f64>,
}

/// Weight vector stored as `scale * raw` so the L2 shrink is O(1).
struct ScaledVector {
    raw: Vec<f64>,
    scale: f64,
}

impl ScaledVector {
    fn dot(&self, row: crate::sparse::RowView<'_>) -> f64 {
        self.scale * row.dot(&self.raw)
    }

    fn shrink(&mut self, factor: f64) {
        self.scale *= factor;
        if self.scale < 1e-9 {
            self.materialize();
        }
    }

    fn add_row(&mut self, row: crate::sparse::RowView<'_>, coef: f64) {
        let c = coef / self.scale;
        for (j, v) in row.iter() {
            self.raw[j] += c * v;
        }
    }

    fn materialize(&mut self) {
        for w in &mut self.raw {
            *w *= self.scale;
        }
        self.scale = 1.0;
    }
}

fn binary_objective(x: &CsrMatrix, targets: &[f64], w: &ScaledVector, b: f64, alpha: f64) -> f64 {
    let norm_sq = w.scale * w.scale * w.raw.iter().map(|v| v * v).sum::<f64>();
    let hinge: f64 = x
        .rows()
        .zip(targets)
        .map(|(row, &t)| (1.0 - t * (w.dot(row) + b)).max(0.0))
        .sum();
    0.5 * alpha * norm_sq + hinge / x.n_rows() as f64
}

fn fit_binary(x: &CsrMatrix, targets: &[f64], params: &SvmParams, objective: &mut [f64]) -> (Vec<f64>, f64) {
    let n = x.n_rows();
    let alpha = params.alpha;
    let t0 = 1.0 / alpha;
    let mut w = ScaledVector {
        raw: vec![0.0; x.n_cols()],
        scale: 1.0,
    };
    let mut b = 0.0;
    let mut t = 0.0;
    let mut rng = SeededRng::new(params.seed);
    let mut order: Vec<usize> = (0..n).collect();
    for slot in objective.iter_mut() {
        rng.shuffle(&mut order);
        for &r in &order {
            let row = x.row(r);
            let eta = 1.0 / (alpha * (t0 + t));
            let margin = targets[r] * (w.dot(row) + b);
            w.shrink(1.0 - eta * alpha);
            if margin < 1.0 {
                w.add_row(row, eta * targets[r]);
                b += eta * targets[r];
            }
            t += 1.0;
        }
        *slot += binary_objective(x, targets, &w, b, alpha);
    }
    w.materialize();
    (w.raw, b)
}

impl SvmModel {
    /// `x` must already be scaled (see [`crate::vectorizer::apply_scaler`]).
    pub fn fit(x: &CsrMatrix, y: &[Star], params: &SvmParams) -> Result<Self> {
        check_fit_shape(x, y)?;
        if params.epochs == 0 {
            return Err(Error::InvalidParameter("epochs must be at least 1".into()));
        }
        if !(params.alpha > 0.0 && params.alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", params.alpha)));
        }
        let v = x.n_cols();
        let mut weights = Vec::with_capacity(N_CLASSES * v);
        let mut bias = [0.0; N_CLASSES];
        let mut epoch_objective = vec![0.0; params.epochs];
        for (k, b) in bias.iter_mut().enumerate() {
            let targets: Vec<f64> = y.iter().map(|s| if s.index() == k { 1.0 } else { -1.0 }).collect();
            let (w, bk) = fit_binary(x, &targets, params, &mut epoch_objective);
            if w.iter().any(|v| !v.is_finite()) || !bk.is_finite() {
                return Err(Error::Diverged {
                    iteration: params.epochs,
                    loss: f64::NAN,
                    grad_norm: f64::NAN,
                });
            }
            weights.extend(w);
            *b = bk;
        }
        Ok(Self {
            params: *params,
            n_features: v,
            weights,
            bias,
            epoch_objective,
        })
    }

    pub fn decision_function(&self, x: &CsrMatrix) -> Result<Vec<[f64; N_CLASSES]>> {
        check_columns(self.n_features, x)?;
        let v = self.n_features;
        Ok(x.rows()
            .map(|row| {
                let mut s = self.bias;
                for (k, score) in s.iter_mut().enumerate() {
                    *score += row.dot(&self.weights[k * v..(k + 1) * v]);
                }
                s
            })
            .collect())
    }

    pub fn predict(&self, x: &CsrMatrix) -> Result<Vec<Star>> {
        Ok(self.decision_function(x)?.iter().map(|s| argmax_star(s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorizer::{apply_scaler, ScalerParams};

    fn s(v: u8) -> Star {
        Star::new(v).unwrap()
    }

    fn two_class() -> (CsrMatrix, Vec<Star>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..20 {
            let jitter = (i % 4) as f64 * 0.1;
            if i % 2 == 0 {
                rows.push(vec![1.0 + jitter, 0.0, 0.2]);
                y.push(s(1));
            } else {
                rows.push(vec![0.0, 1.0 + jitter, 0.2]);
                y.push(s(4));
            }
        }
        (CsrMatrix::from_dense(&rows, 3).unwrap(), y)
    }

    #[test]
    fn separable_fixture_and_objective_decrease() {
        let (x, y) = two_class();
        let m = SvmModel::fit(&x, &y, &SvmParams { seed: 3, ..SvmParams::default() }).unwrap();
        assert_eq!(m.predict(&x).unwrap(), y);
        assert_eq!(m.epoch_objective.len(), 5);
        assert!(m.epoch_objective.last().unwrap() < &m.epoch_objective[0]);
    }

    #[test]
    fn identical_labels() {
        let (x, _) = two_class();
        let y = vec![s(2); x.n_rows()];
        let m = SvmModel::fit(&x, &y, &SvmParams::default()).unwrap();
        assert!(m.predict(&x).unwrap().iter().all(|&p| p == s(2)));
    }

    #[test]
    fn zero_model_ties_to_one_star() {
        let m = SvmModel {
            params: SvmParams::default(),
            n_features: 2,
            weights: vec![0.0; 10],
            bias: [0.0; 5],
            epoch_objective: vec![],
        };
        let x = CsrMatrix::from_dense(&[vec![1.0, 3.0]], 2).unwrap();
        assert_eq!(m.predict(&x).unwrap(), vec![s(1)]);
    }

    #[test]
    fn errors() {
        let (x, y) = two_class();
        assert!(SvmModel::fit(&x, &y, &SvmParams { epochs: 0, ..SvmParams::default() }).is_err());
        let m = SvmModel::fit(&x, &y, &SvmParams::default()).unwrap();
        assert!(m.predict(&CsrMatrix::from_dense(&[vec![1.0]], 1).unwrap()).is_err());
    }

    #[test]
    fn identity_scaling_is_bit_identical() {
        let (x, y) = two_class();
        let scaled = apply_scaler(&x, &ScalerParams::identity(3)).unwrap();
        let a = SvmModel::fit(&x, &y, &SvmParams::default()).unwrap();
        let b = SvmModel::fit(&scaled, &y, &SvmParams::default()).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
