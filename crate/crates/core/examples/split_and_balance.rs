//! Hold out validation/test rows, then draw a balanced training set.
//!
//! cargo run --example split_and_balance

use stargauge::corpus::{balance, class_distribution, split, SplitSpec};
use stargauge::synth::{prepared_corpus, SynthConfig};

fn main() -> stargauge::Result<()> {
    let tmp = tempfile::tempdir().expect("temp dir");
    let corpus = prepared_corpus(&SynthConfig::default(), tmp.path())?;
    let spec = SplitSpec {
        val_size: 400,
        test_size: 400,
        train_per_class: 250,
        seed: 11,
    };
    let parts = split(&corpus, &spec, tmp.path())?;
    println!(
        "train pool {} / val {} / test {}",
        parts.train_pool_rows, parts.val_rows, parts.test_rows
    );
    println!("pool stars:     {:?}", class_distribution(&parts.train_pool)?.counts());

    let train = tmp.path().join("train.tsv");
    let outcome = balance(&parts.train_pool, spec.train_per_class, spec.seed, &train)?;
    println!("balanced stars: {:?}", class_distribution(&train)?.counts());
    if !outcome.resampled_with_replacement.is_empty() {
        println!("drawn with replacement: {:?}", outcome.resampled_with_replacement);
    }
    Ok(())
}
