//! Multinomial Naive Bayes with additive smoothing.
//!
//! Features may be any non-negative reals, so tf-idf weights work as
//! fractional counts.

use serde::{Deserialize, Serialize};

use super::{check_columns, check_fit_shape, softmax};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::star::{argmax_star, Star, N_CLASSES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbModel {
    pub alpha: f64,
    pub n_features: usize,
    pub class_log_prior: [f64; N_CLASSES],
    /// `feature_log_prob[class][term]`.
    pub feature_log_prob: Vec<Vec<f64>>,
}

impl NbModel {
    pub fn fit(x: &CsrMatrix, y: &[Star], alpha: f64) -> Result<Self> {
        check_fit_shape(x, y)?;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        let v = x.n_cols();
        let mut class_rows = [0usize; N_CLASSES];
        let mut feature_count = vec![vec![0.0f64; v]; N_CLASSES];
        for (r, (row, label)) in x.rows().zip(y).enumerate() {
            class_rows[label.index()] += 1;
            let counts = &mut feature_count[label.index()];
            for (c, value) in row.iter() {
                if value < 0.0 {
                    return Err(Error::NegativeFeature { row: r, col: c, value });
                }
                counts[c] += value;
            }
        }
        if let Some(k) = class_rows.iter().position(|&n| n == 0) {
            return Err(Error::MissingClass(Star::from_index(k).value()));
        }

        let n = y.len() as f64;
        let class_log_prior = class_rows.map(|k| (k as f64 / n).ln());
        let feature_log_prob = feature_count
            .into_iter()
            .map(|counts| {
                let total: f64 = counts.iter().sum::<f64>() + alpha * v as f64;
                let log_total = total.ln();
                counts.into_iter().map(|c| (c + alpha).ln() - log_total).collect()
            })
            .collect();
        Ok(Self {
            alpha,
            n_features: v,
            class_log_prior,
            feature_log_prob,
        })
    }

    /// Unnormalized log posterior per class: log prior + Σ x·log P(t|c).
    pub fn joint_log_likelihood(&self, x: &CsrMatrix) -> Result<Vec<[f64; N_CLASSES]>> {
        check_columns(self.n_features, x)?;
        Ok(x.rows()
            .map(|row| {
                let mut s = self.class_log_prior;
                for (k, score) in s.iter_mut().enumerate() {
                    *score += row.dot(&self.feature_log_prob[k]);
                }
                s
            })
            .collect())
    }

    pub fn predict(&self, x: &CsrMatrix) -> Result<Vec<Star>> {
        Ok(self.joint_log_likelihood(x)?.iter().map(|s| argmax_star(s)).collect())
    }

    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Vec<[f64; N_CLASSES]>> {
        Ok(self.joint_log_likelihood(x)?.iter().map(softmax).collect())
    }
}
