//! Multinomial naive Bayes on a tiny hand-built matrix, then on tf-idf features.
//!
//! cargo run --example naive_bayes

use stargauge::classifiers::NbModel;
use stargauge::corpus::{balance, split, SplitSpec};
use stargauge::eval::accuracy;
use stargauge::pipeline::load_labeled;
use stargauge::sparse::CsrMatrix;
use stargauge::synth::{prepared_corpus, SynthConfig};
use stargauge::vectorizer::{fit_vocabulary, transform, VectorizerConfig};
use stargauge::Star;

fn main() -> stargauge::Result<()> {
    // One document per star; star 1 uses only term 0, star 2 only term 1.
    let x = CsrMatrix::from_dense(
        &[vec![2.0, 0.0], vec![0.0, 2.0], vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, 0.0]],
        2,
    )?;
    let nb = NbModel::fit(&x, &Star::ALL, 1.0)?;
    println!("P(term0 | 1 star) = {:.2}", nb.feature_log_prob[0][0].exp());
    println!("P(term1 | 1 star) = {:.2}", nb.feature_log_prob[0][1].exp());

    let tmp = tempfile::tempdir().expect("temp dir");
    let corpus = prepared_corpus(&SynthConfig::default(), tmp.path())?;
    let spec = SplitSpec { val_size: 500, test_size: 500, train_per_class: 200, seed: 1 };
    let parts = split(&corpus, &spec, tmp.path())?;
    let train = tmp.path().join("train.tsv");
    balance(&parts.train_pool, 200, 1, &train)?;

    let (texts, y) = load_labeled(&train)?;
    let vocab = fit_vocabulary(&texts, &VectorizerConfig::default())?;
    let nb = NbModel::fit(&transform(&texts, &vocab)?, &y, 1.0)?;
    let (test_texts, test_y) = load_labeled(&parts.test)?;
    let pred = nb.predict(&transform(&test_texts, &vocab)?)?;
    println!("test accuracy {:.3}", accuracy(&test_y, &pred)?);
    Ok(())
}
