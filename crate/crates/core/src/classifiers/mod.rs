//! Multiclass classifiers over sparse document-term features.
//!
//! Every model predicts one of the five stars. Ties between class scores are
//! broken toward the smaller star.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{read_to_string, write_string};
use crate::sparse::CsrMatrix;
use crate::star::{Star, N_CLASSES};
use crate::vectorizer::{apply_scaler, ScalerParams};

pub mod lr;
pub mod nb;
pub mod rf;
pub mod svm;

pub use lr::{LogisticObjective, LrModel, LrParams};
pub use nb::NbModel;
pub use rf::{MaxFeatures, RfModel, RfParams};
pub use svm::{SvmModel, SvmParams};

pub(crate) fn check_fit_shape(x: &CsrMatrix, y: &[Star]) -> Result<()> {
    if x.n_rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.n_rows(),
            actual: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput("no training rows".into()));
    }
    Ok(())
}

pub(crate) fn check_columns(expected: usize, x: &CsrMatrix) -> Result<()> {
    if x.n_cols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.n_cols(),
        });
    }
    Ok(())
}

pub(crate) fn softmax(scores: &[f64; N_CLASSES]) -> [f64; N_CLASSES] {
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exp = scores.map(|s| (s - max).exp());
    let total: f64 = exp.iter().sum();
    exp.map(|e| e / total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Nb,
    Lr,
    Svm,
    Rf,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Nb => "nb",
            ModelKind::Lr => "lr",
            ModelKind::Svm => "svm",
            ModelKind::Rf => "rf",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nb" => Ok(ModelKind::Nb),
            "lr" => Ok(ModelKind::Lr),
            "svm" => Ok(ModelKind::Svm),
            "rf" => Ok(ModelKind::Rf),
            other => Err(Error::InvalidParameter(format!("unknown model kind {other:?}"))),
        }
    }
}

/// A fitted classifier of any kind. SVM models carry the scaler their
/// training matrix went through and apply it before scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    Nb(NbModel),
    Lr(LrModel),
    Svm { model: SvmModel, scaler: ScalerParams },
    Rf(RfModel),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Nb(_) => ModelKind::Nb,
            Model::Lr(_) => ModelKind::Lr,
            Model::Svm { .. } => ModelKind::Svm,
            Model::Rf(_) => ModelKind::Rf,
        }
    }

    pub fn predict(&self, x: &CsrMatrix) -> Result<Vec<Star>> {
        match self {
            Model::Nb(m) => m.predict(x),
            Model::Lr(m) => m.predict(x),
            Model::Svm { model, scaler } => model.predict(&apply_scaler(x, scaler)?),
            Model::Rf(m) => m.predict(x),
        }
    }

    /// Per-class probabilities for the probabilistic models; `None` for SVM.
    pub fn predict_proba(&self, x: &CsrMatrix) -> Result<Option<Vec<[f64; N_CLASSES]>>> {
        Ok(match self {
            Model::Nb(m) => Some(m.predict_proba(x)?),
            Model::Lr(m) => Some(m.predict_proba(x)?),
            Model::Svm { .. } => None,
            Model::Rf(m) => Some(m.predict_proba(x)?),
        })
    }

    /// Raw per-class decision values (log-joint, logits, margins, or votes).
    pub fn decision_function(&self, x: &CsrMatrix) -> Result<Vec<[f64; N_CLASSES]>> {
        match self {
            Model::Nb(m) => m.joint_log_likelihood(x),
            Model::Lr(m) => m.decision_function(x),
            Model::Svm { model, scaler } => model.decision_function(&apply_scaler(x, scaler)?),
            Model::Rf(m) => m.predict_proba(x),
        }
    }
}

const MODEL_FORMAT: &str = "stargauge-model";
const MODEL_VERSION: u32 = 1;

/// Versioned on-disk container for a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub kind: ModelKind,
    pub config_digest: String,
    pub seed: u64,
    pub vocab_digest: String,
    pub scaler_digest: Option<String>,
    pub model: Model,
}

impl ModelFile {
    pub fn new(model: Model, config_digest: String, seed: u64, vocab_digest: String) -> Self {
        let scaler_digest = match &model {
            Model::Svm { scaler, .. } => Some(scaler.digest()),
            _ => None,
        };
        Self {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            kind: model.kind(),
            config_digest,
            seed,
            vocab_digest,
            scaler_digest,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_json())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(s)?;
        if file.format != MODEL_FORMAT || file.version != MODEL_VERSION {
            return Err(Error::Config(format!(
                "unsupported model file {} v{}",
                file.format, file.version
            )));
        }
        if file.kind != file.model.kind() {
            return Err(Error::Config("model kind tag does not match parameters".into()));
        }
        if let Model::Svm { scaler, .. } = &file.model {
            let found = scaler.digest();
            if file.scaler_digest.as_deref() != Some(found.as_str()) {
                return Err(Error::DigestMismatch {
                    what: "scaler",
                    expected: file.scaler_digest.clone().unwrap_or_default(),
                    found,
                });
            }
        }
        Ok(file)
    }

    /// Loads and checks that the model was trained against `vocab_digest`.
    pub fn load(path: &Path, vocab_digest: &str) -> Result<Self> {
        let file = Self::from_json(&read_to_string(path)?)?;
        if file.vocab_digest != vocab_digest {
            return Err(Error::DigestMismatch {
                what: "vocabulary",
                expected: file.vocab_digest,
                found: vocab_digest.to_string(),
            });
        }
        Ok(file)
    }
}
