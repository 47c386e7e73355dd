//! One-vs-rest linear SVM trained by SGD on variance-scaled tf-idf features.
//!
//! cargo run --release --example linear_svm

use stargauge::classifiers::{SvmModel, SvmParams};
use stargauge::corpus::{balance, split, SplitSpec};
use stargauge::eval::accuracy;
use stargauge::pipeline::load_labeled;
use stargauge::synth::{prepared_corpus, SynthConfig};
use stargauge::vectorizer::{apply_scaler, fit_scaler, fit_vocabulary, transform, VectorizerConfig};

fn main() -> stargauge::Result<()> {
    let tmp = tempfile::tempdir().expect("temp dir");
    let synth = SynthConfig { n_reviews: 20_000, n_businesses: 800, ..SynthConfig::default() };
    let corpus = prepared_corpus(&synth, tmp.path())?;
    let spec = SplitSpec { val_size: 2_000, test_size: 2_000, train_per_class: 1_000, seed: 3 };
    let parts = split(&corpus, &spec, tmp.path())?;
    let train = tmp.path().join("train.tsv");
    balance(&parts.train_pool, spec.train_per_class, spec.seed, &train)?;

    let (texts, y) = load_labeled(&train)?;
    let vocab = fit_vocabulary(&texts, &VectorizerConfig::default())?;
    let x = transform(&texts, &vocab)?;
    // Scale each column by its standard deviation; no centering keeps rows sparse.
    let scaler = fit_scaler(&x)?;
    let model = SvmModel::fit(&apply_scaler(&x, &scaler)?, &y, &SvmParams { seed: 3, ..SvmParams::default() })?;
    for (epoch, obj) in model.epoch_objective.iter().enumerate() {
        println!("epoch {}: summed objective {obj:.4}", epoch + 1);
    }

    let (test_texts, test_y) = load_labeled(&parts.test)?;
    let xt = apply_scaler(&transform(&test_texts, &vocab)?, &scaler)?;
    println!("test accuracy {:.3}", accuracy(&test_y, &model.predict(&xt)?)?);
    Ok(())
}
