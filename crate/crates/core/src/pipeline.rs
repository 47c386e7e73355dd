//! Glue between the stages: labeled-text loading, model training by kind,
//! file-level evaluation, and the end-to-end run driven by a [`RunConfig`].

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classifiers::{LrModel, Model, ModelFile, ModelKind, NbModel, RfModel, SvmModel};
use crate::config::{ModelConfig, RunConfig};
use crate::corpus::{self, BalanceOutcome, ClassHistogram, SplitSpec};
use crate::error::{Error, Result};
use crate::eval::{build_report, EvalReport, Provenance};
use crate::ingest::{self, IngestStats};
use crate::io::write_string;
use crate::prepared::read_corpus;
use crate::sparse::CsrMatrix;
use crate::star::Star;
use crate::vectorizer::{fit_scaler, fit_vocabulary, transform, Vocabulary};

/// Texts and labels of a prepared-corpus file, in file order.
pub fn load_labeled(path: &Path) -> Result<(Vec<String>, Vec<Star>)> {
    Ok(read_corpus(path)?.into_iter().map(|r| (r.text, r.stars)).unzip())
}

pub fn train_model(cfg: &ModelConfig, seed: u64, x: &CsrMatrix, y: &[Star]) -> Result<Model> {
    Ok(match cfg.kind {
        ModelKind::Nb => Model::Nb(NbModel::fit(x, y, cfg.nb.alpha)?),
        ModelKind::Lr => {
            let m = LrModel::fit(x, y, &cfg.lr)?;
            if !m.converged {
                log::warn!(
                    "logistic regression stopped after {} iterations, gradient norm {:.3e}",
                    m.n_iters,
                    m.final_grad_norm
                );
            }
            Model::Lr(m)
        }
        ModelKind::Svm => {
            let scaler = fit_scaler(x)?;
            let scaled = crate::vectorizer::apply_scaler(x, &scaler)?;
            Model::Svm {
                model: SvmModel::fit(&scaled, y, &cfg.svm.params(seed))?,
                scaler,
            }
        }
        ModelKind::Rf => Model::Rf(RfModel::fit(x, y, &cfg.rf.params(seed))?),
    })
}

/// Vectorizes `data` with `vocab` and scores `model` on it.
pub fn evaluate_file(model: &ModelFile, vocab: &Vocabulary, data: &Path, split: &str) -> Result<EvalReport> {
    if model.vocab_digest != vocab.digest() {
        return Err(Error::DigestMismatch {
            what: "vocabulary",
            expected: model.vocab_digest.clone(),
            found: vocab.digest(),
        });
    }
    let (texts, labels) = load_labeled(data)?;
    let x = transform(&texts, vocab)?;
    let pred = model.model.predict(&x)?;
    build_report(
        model.kind.as_str(),
        split,
        &labels,
        &pred,
        &Provenance {
            config_digest: model.config_digest.clone(),
            seed: model.seed,
        },
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config_digest: String,
    pub ingest: Option<IngestStats>,
    pub corpus_distribution: ClassHistogram,
    pub subsampled_rows: Option<usize>,
    pub balance: BalanceOutcome,
    pub n_terms: usize,
    pub val_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutputs {
    pub out_dir: PathBuf,
    pub corpus: PathBuf,
    pub train: PathBuf,
    pub val: PathBuf,
    pub test: PathBuf,
    pub vocab: PathBuf,
    pub model: PathBuf,
    pub val_report: EvalReport,
    pub test_report: EvalReport,
    pub summary: RunSummary,
}

/// Runs prepare → split → balance → vectorize → train → evaluate.
///
/// Artifacts land in `out_dir`: `corpus.tsv` (unless a prepared corpus was
/// configured), `subsample.tsv`, `train_pool.tsv`, `val.tsv`, `test.tsv`,
/// `train.tsv`, `vocab.txt`, `model.json`, `report_val.json`,
/// `report_test.json` and `summary.json`.
pub fn run(cfg: &RunConfig) -> Result<RunOutputs> {
    cfg.validate()?;
    let out = &cfg.paths.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let digest = cfg.digest();

    let (corpus, ingest_stats) = match (&cfg.paths.business, &cfg.paths.reviews, &cfg.paths.corpus) {
        (Some(b), Some(r), _) => {
            let path = out.join("corpus.tsv");
            let stats = ingest::extract_corpus(b, r, &path)?;
            log::info!("prepared {} reviews", stats.reviews_kept);
            (path, Some(stats))
        }
        (_, _, Some(c)) => (c.clone(), None),
        _ => unreachable!("validated above"),
    };
    let corpus_distribution = corpus::class_distribution(&corpus)?;

    let (split_input, subsampled_rows) = match cfg.split.subsample {
        Some(n) => {
            let path = out.join("subsample.tsv");
            let taken = corpus::subsample(&corpus, n, cfg.seed, &path)?;
            if taken < n {
                log::warn!("corpus has only {taken} rows, fewer than the {n} requested");
            }
            (path, Some(taken))
        }
        None => (corpus.clone(), None),
    };
    let spec = SplitSpec {
        val_size: cfg.split.val,
        test_size: cfg.split.test,
        train_per_class: cfg.split.train_per_class,
        seed: cfg.seed,
    };
    let parts = corpus::split(&split_input, &spec, out)?;
    let train = out.join("train.tsv");
    let balance = corpus::balance(&parts.train_pool, cfg.split.train_per_class, cfg.seed, &train)?;

    let (texts, labels) = load_labeled(&train)?;
    let vocab = fit_vocabulary(&texts, &cfg.vectorizer)?;
    let vocab_path = out.join("vocab.txt");
    vocab.save(&vocab_path)?;
    let x = transform(&texts, &vocab)?;
    log::info!("vectorized {} training rows into {} columns", x.n_rows(), x.n_cols());

    let model = train_model(&cfg.model, cfg.seed, &x, &labels)?;
    let file = ModelFile::new(model, digest.clone(), cfg.seed, vocab.digest());
    let model_path = out.join("model.json");
    file.save(&model_path)?;

    let val_report = evaluate_file(&file, &vocab, &parts.val, "val")?;
    let test_report = evaluate_file(&file, &vocab, &parts.test, "test")?;
    val_report.save(&out.join("report_val.json"))?;
    test_report.save(&out.join("report_test.json"))?;

    let summary = RunSummary {
        config_digest: digest,
        ingest: ingest_stats,
        corpus_distribution,
        subsampled_rows,
        balance,
        n_terms: vocab.len(),
        val_accuracy: val_report.accuracy,
        test_accuracy: test_report.accuracy,
    };
    write_string(
        &out.join("summary.json"),
        &(serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n"),
    )?;
    Ok(RunOutputs {
        out_dir: out.clone(),
        corpus,
        train,
        val: parts.val,
        test: parts.test,
        vocab: vocab_path,
        model: model_path,
        val_report,
        test_report,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{PathsConfig, SplitConfig};
    use crate::synth::{write_dump, SynthConfig};
    use crate::vectorizer::VectorizerConfig;

    fn small_run(dir: &Path, kind: ModelKind) -> RunConfig {
        let synth = SynthConfig {
            n_reviews: 1_500,
            n_businesses: 50,
            ..SynthConfig::default()
        };
        write_dump(&synth, &dir.join("business.json"), &dir.join("review.json")).unwrap();
        RunConfig {
            seed: 5,
            threads: None,
            paths: PathsConfig {
                business: Some(dir.join("business.json")),
                reviews: Some(dir.join("review.json")),
                corpus: None,
                out_dir: dir.join("out"),
            },
            split: SplitConfig {
                subsample: None,
                val: 150,
                test: 150,
                train_per_class: 60,
            },
            vectorizer: VectorizerConfig::default().with_min_df(2),
            model: ModelConfig::new(kind),
        }
    }

    #[test]
    fn every_kind_runs_end_to_end() {
        for kind in [ModelKind::Nb, ModelKind::Lr, ModelKind::Svm, ModelKind::Rf] {
            let dir = tempfile::tempdir().unwrap();
            let mut cfg = small_run(dir.path(), kind);
            cfg.model.rf.n_trees = 5;
            let out = run(&cfg).unwrap();
            assert_eq!(out.test_report.n, 150);
            assert_eq!(out.summary.balance.rows, 300);
            assert_eq!(out.val_report.config_digest, cfg.digest());
            assert!(out.test_report.accuracy > 0.2, "{kind}: {}", out.test_report.accuracy);
            let vocab = Vocabulary::load(&out.vocab).unwrap();
            assert!(ModelFile::load(&out.model, &vocab.digest()).is_ok());
        }
    }

    #[test]
    fn evaluate_refuses_foreign_vocabulary() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_run(dir.path(), ModelKind::Nb);
        let out = run(&cfg).unwrap();
        let vocab = Vocabulary::load(&out.vocab).unwrap();
        let model = ModelFile::load(&out.model, &vocab.digest()).unwrap();
        let (texts, _) = load_labeled(&out.val).unwrap();
        let other = fit_vocabulary(&texts, &VectorizerConfig::default().with_min_df(2)).unwrap();
        assert!(matches!(
            evaluate_file(&model, &other, &out.val, "val"),
            Err(Error::DigestMismatch { .. })
        ));
    }
}
