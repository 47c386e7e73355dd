//! Cross-module invariants checked over generated inputs.

use std::collections::BTreeMap;
use std::path::Path;

use proptest::prelude::*;
use stargauge::classifiers::{MaxFeatures, Model, ModelFile, ModelKind, RfModel, RfParams};
use stargauge::config::ModelConfig;
use stargauge::corpus::{balance, split, SplitSpec};
use stargauge::pipeline::train_model;
use stargauge::prepared::{read_corpus, write_corpus, PreparedRow};
use stargauge::sparse::CsrMatrix;
use stargauge::vectorizer::{fit_vocabulary, transform, Scheme, VectorizerConfig, Vocabulary};
use stargauge::Star;

const WORDS: &[&str] = &[
    "great", "food", "slow", "service", "tasty", "cold", "fries", "rude", "lovely", "burger", "noodles", "awful",
];

fn star(i: usize) -> Star {
    Star::new((i % 5) as u8 + 1).unwrap()
}

fn doc() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 0..12).prop_map(|w| w.join(" "))
}

fn docs(max: usize) -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(doc(), 1..max)
}

/// Rows with unique texts so files can be compared as multisets of lines.
fn labeled_rows(n: usize, seed: u64) -> Vec<PreparedRow> {
    (0..n)
        .map(|i| PreparedRow::new(star(i.wrapping_mul(7).wrapping_add(seed as usize)), format!("row {i} {}", WORDS[i % WORDS.len()])))
        .collect()
}

fn line_counts(rows: &[PreparedRow]) -> BTreeMap<(u8, String), usize> {
    let mut m = BTreeMap::new();
    for r in rows {
        *m.entry((r.stars.value(), r.text.clone())).or_insert(0) += 1;
    }
    m
}

fn vectorizers() -> Vec<VectorizerConfig> {
    let mut out = Vec::new();
    for scheme in [Scheme::Count, Scheme::Tfidf] {
        for binary in [false, true] {
            out.push(VectorizerConfig::new(scheme).with_binary(binary).with_min_df(1));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn vectorized_rows_are_well_formed(corpus in docs(20), queries in docs(8)) {
        for cfg in vectorizers() {
            let vocab = match fit_vocabulary(&corpus, &cfg) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let x = transform(&queries, &vocab).unwrap();
            prop_assert_eq!(x.n_rows(), queries.len());
            prop_assert_eq!(x.n_cols(), vocab.len());
            for row in x.rows() {
                prop_assert!(row.indices.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(row.indices.iter().all(|&c| (c as usize) < vocab.len()));
                prop_assert!(row.values.iter().all(|v| v.is_finite() && *v != 0.0));
                if cfg.normalizes() && !row.is_empty() && row.norm_sq() > 0.0 {
                    prop_assert!((row.norm_sq().sqrt() - 1.0).abs() < 1e-12);
                }
                if cfg.binary && !cfg.normalizes() {
                    prop_assert!(row.values.iter().all(|&v| v == 1.0));
                }
            }
        }
    }

    #[test]
    fn vocabulary_survives_save_and_load(corpus in docs(20)) {
        let dir = tempfile::tempdir().unwrap();
        for cfg in vectorizers() {
            let Ok(vocab) = fit_vocabulary(&corpus, &cfg) else { continue };
            let path = dir.path().join("vocab.txt");
            vocab.save(&path).unwrap();
            let back = Vocabulary::load(&path).unwrap();
            prop_assert_eq!(back.digest(), vocab.digest());
            prop_assert_eq!(&back, &vocab);
            prop_assert_eq!(transform(&corpus, &back).unwrap(), transform(&corpus, &vocab).unwrap());
        }
    }

    #[test]
    fn split_partitions_the_corpus(n in 3usize..120, val_frac in 0.0f64..0.45, test_frac in 0.0f64..0.45, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let rows = labeled_rows(n, seed);
        let corpus = dir.path().join("corpus.tsv");
        write_corpus(&corpus, &rows).unwrap();
        let spec = SplitSpec {
            val_size: (n as f64 * val_frac) as usize,
            test_size: (n as f64 * test_frac) as usize,
            train_per_class: 1,
            seed,
        };
        let a = dir.path().join("a");
        std::fs::create_dir(&a).unwrap();
        let out = split(&corpus, &spec, &a).unwrap();

        let (train, val, test) = (read_corpus(&out.train_pool).unwrap(), read_corpus(&out.val).unwrap(), read_corpus(&out.test).unwrap());
        prop_assert_eq!(val.len(), spec.val_size);
        prop_assert_eq!(test.len(), spec.test_size);
        prop_assert_eq!(train.len() + val.len() + test.len(), n);
        let mut all: Vec<PreparedRow> = train.iter().chain(&val).chain(&test).cloned().collect();
        prop_assert_eq!(line_counts(&all), line_counts(&rows));
        all.sort_by(|p, q| p.text.cmp(&q.text));
        all.dedup();
        prop_assert_eq!(all.len(), n);

        let b = dir.path().join("b");
        std::fs::create_dir(&b).unwrap();
        split(&corpus, &spec, &b).unwrap();
        for name in ["train_pool.tsv", "val.tsv", "test.tsv"] {
            prop_assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
        }
    }

    #[test]
    fn balance_yields_exact_uniform_classes(n in 5usize..150, per_class in 1usize..40, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let rows = labeled_rows(n, seed);
        let pool = dir.path().join("pool.tsv");
        write_corpus(&pool, &rows).unwrap();
        let out = dir.path().join("train.tsv");
        let outcome = balance(&pool, per_class, seed, &out).unwrap();
        let drawn = read_corpus(&out).unwrap();
        prop_assert_eq!(drawn.len(), 5 * per_class);
        prop_assert_eq!(outcome.rows, 5 * per_class);
        for s in Star::ALL {
            prop_assert_eq!(drawn.iter().filter(|r| r.stars == s).count(), per_class);
        }
        // Every drawn row comes from the pool.
        let pool_lines = line_counts(&rows);
        prop_assert!(drawn.iter().all(|r| pool_lines.contains_key(&(r.stars.value(), r.text.clone()))));
        let again = dir.path().join("again.tsv");
        balance(&pool, per_class, seed, &again).unwrap();
        prop_assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn single_full_tree_fits_consistent_data(
        table in prop::collection::btree_map(prop::collection::vec(0u8..4, 3), 0usize..5, 1..60),
    ) {
        // Keys are distinct feature vectors, so the dataset is consistent.
        let rows: Vec<Vec<f64>> = table.keys().map(|k| k.iter().map(|&v| f64::from(v)).collect()).collect();
        let y: Vec<Star> = table.values().map(|&c| star(c)).collect();
        let x = CsrMatrix::from_dense(&rows, 3).unwrap();
        let params = RfParams {
            n_trees: 1,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: false,
            seed: rows.len() as u64,
        };
        let m = RfModel::fit(&x, &y, &params).unwrap();
        prop_assert_eq!(m.predict(&x).unwrap(), y);
    }
}

fn small_training_set(dir: &Path) -> (CsrMatrix, Vec<Star>, Vocabulary) {
    let rows: Vec<PreparedRow> = (0..150)
        .map(|i| {
            let s = star(i);
            let w = |k: usize| WORDS[(i * 3 + k * 5 + s.index() * 2) % WORDS.len()];
            PreparedRow::new(s, format!("{} {} {} {}", w(0), w(1), w(2), WORDS[s.index() * 2]))
        })
        .collect();
    write_corpus(&dir.join("train.tsv"), &rows).unwrap();
    let texts: Vec<&str> = rows.iter().map(|r| r.text.as_str()).collect();
    let vocab = fit_vocabulary(&texts, &VectorizerConfig::default().with_min_df(2)).unwrap();
    let x = transform(&texts, &vocab).unwrap();
    (x, rows.iter().map(|r| r.stars).collect(), vocab)
}

#[test]
fn refits_serialize_identically() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y, vocab) = small_training_set(dir.path());
    for kind in [ModelKind::Nb, ModelKind::Lr, ModelKind::Svm, ModelKind::Rf] {
        let mut cfg = ModelConfig::new(kind);
        cfg.rf.n_trees = 8;
        let fit = || {
            let model: Model = train_model(&cfg, 11, &x, &y).unwrap();
            ModelFile::new(model, cfg.train_digest(11, &vocab.config().digest()), 11, vocab.digest()).to_json()
        };
        let (a, b) = (fit(), fit());
        assert_eq!(a, b, "{kind} refit differs");
        let back = ModelFile::from_json(&a).unwrap();
        assert_eq!(back.to_json(), a, "{kind} does not round-trip");
        assert_eq!(back.model.predict(&x).unwrap(), ModelFile::from_json(&b).unwrap().model.predict(&x).unwrap());
    }
}

#[test]
fn refit_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let (x, y, _) = small_training_set(dir.path());
    let mut cfg = ModelConfig::new(ModelKind::Rf);
    cfg.rf.n_trees = 6;
    let fit_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| serde_json::to_string(&train_model(&cfg, 3, &x, &y).unwrap()).unwrap())
    };
    assert_eq!(fit_with(1), fit_with(4));
}
