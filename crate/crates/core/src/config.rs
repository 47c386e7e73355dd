//! TOML run configuration for the end-to-end pipeline.
//!
//! Relative paths are resolved against the directory holding the config
//! file. The digest covers every field that can change an artifact (seed,
//! split sizes, vectorizer, chosen model and its hyperparameters) and
//! leaves out file locations and the thread count.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classifiers::{LrParams, MaxFeatures, ModelKind, RfParams, SvmParams};
use crate::error::{Error, Result};
use crate::io::read_to_string;
use crate::vectorizer::{sha256_hex, VectorizerConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsConfig {
    /// Yelp `business.json`; with `reviews`, the pipeline starts at prepare.
    pub business: Option<PathBuf>,
    pub reviews: Option<PathBuf>,
    /// An already prepared corpus, used when the dump paths are absent.
    pub corpus: Option<PathBuf>,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    /// Draw this many rows from the prepared corpus before splitting.
    #[serde(default)]
    pub subsample: Option<usize>,
    pub val: usize,
    pub test: usize,
    pub train_per_class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbConfig {
    pub alpha: f64,
}

impl Default for NbConfig {
    fn default() -> Self {
        Self { alpha: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub alpha: f64,
    pub epochs: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        let p = SvmParams::default();
        Self {
            alpha: p.alpha,
            epochs: p.epochs,
        }
    }
}

impl SvmConfig {
    pub fn params(&self, seed: u64) -> SvmParams {
        SvmParams {
            alpha: self.alpha,
            epochs: self.epochs,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfConfig {
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
}

/// 50 trees keeps desk runs short; set `n_trees = 500` for the full forest.
impl Default for RfConfig {
    fn default() -> Self {
        let p = RfParams::default();
        Self {
            n_trees: 50,
            min_samples_leaf: p.min_samples_leaf,
            max_features: p.max_features,
            bootstrap: p.bootstrap,
        }
    }
}

impl RfConfig {
    pub fn params(&self, seed: u64) -> RfParams {
        RfParams {
            n_trees: self.n_trees,
            min_samples_leaf: self.min_samples_leaf,
            max_features: self.max_features,
            bootstrap: self.bootstrap,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    #[serde(default)]
    pub nb: NbConfig,
    #[serde(default)]
    pub lr: LrParams,
    #[serde(default)]
    pub svm: SvmConfig,
    #[serde(default)]
    pub rf: RfConfig,
}

impl ModelConfig {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            nb: NbConfig::default(),
            lr: LrParams::default(),
            svm: SvmConfig::default(),
            rf: RfConfig::default(),
        }
    }

    /// The hyperparameters of the selected kind only.
    pub fn selected(&self) -> serde_json::Value {
        let v = match self.kind {
            ModelKind::Nb => serde_json::to_value(self.nb),
            ModelKind::Lr => serde_json::to_value(self.lr),
            ModelKind::Svm => serde_json::to_value(self.svm),
            ModelKind::Rf => serde_json::to_value(self.rf),
        };
        serde_json::json!({ "kind": self.kind, "params": v.expect("params serialize") })
    }

    /// Digest of a training run outside the pipeline: model, seed, and the
    /// vectorizer that produced the features.
    pub fn train_digest(&self, seed: u64, vectorizer_digest: &str) -> String {
        let v = serde_json::json!({
            "model": self.selected(),
            "seed": seed,
            "vectorizer": vectorizer_digest,
        });
        sha256_hex(v.to_string().as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    pub paths: PathsConfig,
    pub split: SplitConfig,
    #[serde(default)]
    pub vectorizer: VectorizerConfig,
    pub model: ModelConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses the file and resolves its relative paths.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let paths = &mut self.paths;
        for p in [&mut paths.business, &mut paths.reviews, &mut paths.corpus].into_iter().flatten() {
            fix(p);
        }
        fix(&mut paths.out_dir);
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.paths;
        match (&p.business, &p.reviews, &p.corpus) {
            (Some(_), Some(_), None) | (None, None, Some(_)) => {}
            _ => {
                return Err(Error::Config(
                    "paths: give either business + reviews, or corpus".into(),
                ))
            }
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        self.vectorizer.validate()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn digest(&self) -> String {
        let v = serde_json::json!({
            "seed": self.seed,
            "split": self.split,
            "vectorizer": self.vectorizer.resolved(),
            "model": self.model.selected(),
        });
        sha256_hex(v.to_string().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorizer::Scheme;

    const SAMPLE: &str = r#"
seed = 3

[paths]
corpus = "data/corpus.tsv"
out_dir = "out"

[split]
val = 10
test = 10
train_per_class = 5

[vectorizer]
scheme = "count"
binary = true

[model]
kind = "rf"

[model.rf]
n_trees = 7
max_features = { fixed = 3 }
"#;

    #[test]
    fn parses_and_resolves() {
        let mut cfg = RunConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.vectorizer.scheme, Scheme::Count);
        assert_eq!(cfg.vectorizer.min_df, 5);
        assert_eq!(cfg.model.rf.n_trees, 7);
        assert_eq!(cfg.model.rf.max_features, MaxFeatures::Fixed(3));
        assert_eq!(cfg.model.rf.min_samples_leaf, 10);
        cfg.resolve_paths(Path::new("/etc/run"));
        assert_eq!(cfg.paths.corpus.as_deref(), Some(Path::new("/etc/run/data/corpus.tsv")));
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn digest_tracks_semantic_fields_only() {
        let base = RunConfig::from_toml(SAMPLE).unwrap();
        let d = base.digest();

        let mut moved = base.clone();
        moved.paths.out_dir = "elsewhere".into();
        moved.threads = Some(4);
        assert_eq!(moved.digest(), d);
        // Hyperparameters of a model kind that is not selected do not matter.
        moved.model.lr.lambda = 9.0;
        assert_eq!(moved.digest(), d);

        type Change = Box<dyn Fn(&mut RunConfig)>;
        let changes: Vec<Change> = vec![
            Box::new(|c| c.seed += 1),
            Box::new(|c| c.split.val += 1),
            Box::new(|c| c.split.subsample = Some(100)),
            Box::new(|c| c.vectorizer.min_df = 2),
            Box::new(|c| c.vectorizer.tokenizer.ngram_max = 1),
            Box::new(|c| c.model.rf.n_trees = 8),
            Box::new(|c| c.model.kind = ModelKind::Nb),
        ];
        for change in changes {
            let mut c = base.clone();
            change(&mut c);
            assert_ne!(c.digest(), d);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(RunConfig::from_toml(&SAMPLE.replace("seed = 3", "seed = 3\nbogus = 1")).is_err());
        let both = SAMPLE.replace("corpus = ", "business = \"b\"\ncorpus = ");
        assert!(RunConfig::from_toml(&both).is_err());
        assert!(RunConfig::from_toml(&SAMPLE.replace("seed = 3", "seed = 3\nthreads = 0")).is_err());
    }
}
