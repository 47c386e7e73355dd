//! L2-regularized multinomial logistic regression fitted with L-BFGS.
//!
//! Objective: mean softmax cross-entropy plus `lambda / 2 * ||W||^2`; the
//! bias is not penalized. The gradient is summed over fixed row chunks whose
//! boundaries depend only on the row count, and the chunk partials are added
//! in chunk order, so the fit is bit-identical whatever the thread count.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_columns, check_fit_shape, softmax};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::star::{argmax_star, Star, N_CLASSES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LrParams {
    pub lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Number of correction pairs kept by L-BFGS.
    pub memory: usize,
}

impl Default for LrParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            tol: 1e-5,
            max_iter: 200,
            memory: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrModel {
    pub params: LrParams,
    pub n_features: usize,
    /// Row-major `[class][feature]`.
    pub weights: Vec<f64>,
    pub bias: [f64; N_CLASSES],
    pub converged: bool,
    pub n_iters: usize,
    pub final_loss: f64,
    pub final_grad_norm: f64,
}

/// The training objective over a fixed dataset. Parameters are laid out as
/// the `N_CLASSES x n_features` weights followed by the `N_CLASSES` biases.
pub struct LogisticObjective<'a> {
    x: &'a CsrMatrix,
    y: &'a [Star],
    lambda: f64,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(x: &'a CsrMatrix, y: &'a [Star], lambda: f64) -> Self {
        Self { x, y, lambda }
    }

    pub fn dim(&self) -> usize {
        N_CLASSES * self.x.n_cols() + N_CLASSES
    }

    fn chunk_len(&self) -> usize {
        let n = self.x.n_rows();
        (n.div_ceil(32)).max(2048)
    }

    pub fn value_and_gradient(&self, params: &[f64]) -> (f64, Vec<f64>) {
        let v = self.x.n_cols();
        let n = self.x.n_rows();
        let weights = &params[..N_CLASSES * v];
        let bias = &params[N_CLASSES * v..];
        let starts: Vec<usize> = (0..n).step_by(self.chunk_len()).collect();
        let chunk = self.chunk_len();

        let partials: Vec<(f64, Vec<f64>)> = starts
            .par_iter()
            .map(|&start| {
                let mut loss = 0.0;
                let mut grad = vec![0.0; self.dim()];
                for r in start..(start + chunk).min(n) {
                    let row = self.x.row(r);
                    let mut scores = [0.0; N_CLASSES];
                    for (k, s) in scores.iter_mut().enumerate() {
                        *s = row.dot(&weights[k * v..(k + 1) * v]) + bias[k];
                    }
                    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let sum_exp: f64 = scores.iter().map(|s| (s - max).exp()).sum();
                    let lse = max + sum_exp.ln();
                    let label = self.y[r].index();
                    loss += lse - scores[label];
                    for (k, &score) in scores.iter().enumerate() {
                        let residual = (score - lse).exp() - if k == label { 1.0 } else { 0.0 };
                        let g = &mut grad[k * v..(k + 1) * v];
                        for (c, value) in row.iter() {
                            g[c] += residual * value;
                        }
                        grad[N_CLASSES * v + k] += residual;
                    }
                }
                (loss, grad)
            })
            .collect();

        let mut loss = 0.0;
        let mut grad = vec![0.0; self.dim()];
        for (l, g) in partials {
            loss += l;
            for (a, b) in grad.iter_mut().zip(g) {
                *a += b;
            }
        }
        let inv_n = 1.0 / n as f64;
        loss *= inv_n;
        for g in &mut grad {
            *g *= inv_n;
        }
        let mut penalty = 0.0;
        for (g, w) in grad[..N_CLASSES * v].iter_mut().zip(weights) {
            penalty += w * w;
            *g += self.lambda * w;
        }
        (loss + 0.5 * self.lambda * penalty, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

impl LrModel {
    pub fn fit(x: &CsrMatrix, y: &[Star], params: &LrParams) -> Result<Self> {
        check_fit_shape(x, y)?;
        if !(params.lambda >= 0.0 && params.lambda.is_finite()) || params.tol <= 0.0 || params.memory == 0 {
            return Err(Error::InvalidParameter(format!("bad logistic regression parameters {params:?}")));
        }
        let objective = LogisticObjective::new(x, y, params.lambda);
        let dim = objective.dim();
        let mut w = vec![0.0; dim];
        let (mut loss, mut grad) = objective.value_and_gradient(&w);
        let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(params.memory);
        let mut converged = inf_norm(&grad) < params.tol;
        let mut iters = 0;

        while !converged && iters < params.max_iter {
            // Two-loop recursion for the search direction.
            let mut q: Vec<f64> = grad.iter().map(|g| -g).collect();
            let mut alphas = Vec::with_capacity(history.len());
            for (s, yv, rho) in history.iter().rev() {
                let a = rho * dot(s, &q);
                for (qi, yi) in q.iter_mut().zip(yv) {
                    *qi -= a * yi;
                }
                alphas.push(a);
            }
            let gamma = match history.back() {
                Some((s, yv, _)) => dot(s, yv) / dot(yv, yv),
                None => 1.0 / grad.iter().map(|g| g * g).sum::<f64>().sqrt().max(1.0),
            };
            for qi in &mut q {
                *qi *= gamma;
            }
            for ((s, yv, rho), a) in history.iter().zip(alphas.iter().rev()) {
                let b = rho * dot(yv, &q);
                for (qi, si) in q.iter_mut().zip(s) {
                    *qi += (a - b) * si;
                }
            }
            let mut direction = q;
            let mut slope = dot(&grad, &direction);
            if slope >= 0.0 {
                // Not a descent direction; restart from steepest descent.
                history.clear();
                direction = grad.iter().map(|g| -g).collect();
                slope = dot(&grad, &direction);
            }

            // Backtracking line search with the Armijo condition.
            let mut step = 1.0;
            let accepted = loop {
                let trial: Vec<f64> = w.iter().zip(&direction).map(|(wi, di)| wi + step * di).collect();
                let (trial_loss, trial_grad) = objective.value_and_gradient(&trial);
                if !trial_loss.is_finite() {
                    if step < 1e-20 {
                        return Err(Error::Diverged {
                            iteration: iters,
                            loss: trial_loss,
                            grad_norm: inf_norm(&grad),
                        });
                    }
                } else if trial_loss <= loss + 1e-4 * step * slope {
                    break Some((trial, trial_loss, trial_grad));
                }
                step *= 0.5;
                if step < 1e-20 {
                    break None;
                }
            };
            iters += 1;
            let Some((next, next_loss, next_grad)) = accepted else {
                log::warn!("line search failed at iteration {iters}; stopping");
                break;
            };

            let s: Vec<f64> = next.iter().zip(&w).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &yv);
            if sy > 1e-12 {
                if history.len() == params.memory {
                    history.pop_front();
                }
                history.push_back((s, yv, 1.0 / sy));
            }
            w = next;
            loss = next_loss;
            grad = next_grad;
            converged = inf_norm(&grad) < params.tol;
        }
        if !loss.is_finite() {
            return Err(Error::Diverged {
                iteration: iters,
                loss,
                grad_norm: inf_norm(&grad),
            });
        }

        let v = x.n_cols();
        let mut bias = [0.0; N_CLASSES];
        bias.copy_from_slice(&w[N_CLASSES * v..]);
        w.truncate(N_CLASSES * v);
        Ok(Self {
            params: *params,
            n_features: v,
            weights: w,
            bias,
            converged,
            n_iters: iters,
            final_loss: loss,
            final_grad_norm: inf_norm(&grad),
        })
    }

    /// Parameters in the objective's layout.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut p = self.weights.clone();
        p.extend_from_slice(&self.bias);
        p
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

    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Vec<[f64; N_CLASSES]>> {
        Ok(self.decision_function(x)?.iter().map(softmax).collect())
    }
}
