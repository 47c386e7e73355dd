//! Random forest of Gini trees, with per-tree seeding.
//!
//! cargo run --release --example random_forest -- [n_trees]

use stargauge::classifiers::{RfModel, RfParams};
use stargauge::corpus::{balance, split, SplitSpec};
use stargauge::eval::accuracy;
use stargauge::pipeline::load_labeled;
use stargauge::synth::{prepared_corpus, SynthConfig};
use stargauge::vectorizer::{fit_vocabulary, transform, VectorizerConfig};

fn main() -> stargauge::Result<()> {
    let n_trees = std::env::args().nth(1).map_or(50, |s| s.parse().expect("n_trees"));
    let tmp = tempfile::tempdir().expect("temp dir");
    let corpus = prepared_corpus(&SynthConfig::default(), tmp.path())?;
    let spec = SplitSpec { val_size: 500, test_size: 500, train_per_class: 300, seed: 8 };
    let parts = split(&corpus, &spec, tmp.path())?;
    let train = tmp.path().join("train.tsv");
    balance(&parts.train_pool, spec.train_per_class, spec.seed, &train)?;

    let (texts, y) = load_labeled(&train)?;
    let vocab = fit_vocabulary(&texts, &VectorizerConfig::default())?;
    let params = RfParams { n_trees, seed: 8, ..RfParams::default() };
    let forest = RfModel::fit(&transform(&texts, &vocab)?, &y, &params)?;
    let depths: Vec<usize> = forest.trees.iter().map(|t| t.depth()).collect();
    println!(
        "{n_trees} trees, depth {}..{}, {} nodes in total",
        depths.iter().min().unwrap(),
        depths.iter().max().unwrap(),
        forest.trees.iter().map(|t| t.nodes.len()).sum::<usize>()
    );

    let (test_texts, test_y) = load_labeled(&parts.test)?;
    let pred = forest.predict(&transform(&test_texts, &vocab)?)?;
    println!("test accuracy {:.3}", accuracy(&test_y, &pred)?);
    Ok(())
}
