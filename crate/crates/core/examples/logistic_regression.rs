//! Multinomial logistic regression with L-BFGS, on a synthetic corpus.
//!
//! cargo run --release --example logistic_regression -- [lambda]

use stargauge::classifiers::{LogisticObjective, LrModel, LrParams};
use stargauge::corpus::{balance, split, SplitSpec};
use stargauge::eval::{accuracy, weighted_f1, Weighting};
use stargauge::pipeline::load_labeled;
use stargauge::synth::{prepared_corpus, SynthConfig};
use stargauge::vectorizer::{fit_vocabulary, transform, VectorizerConfig};

fn main() -> stargauge::Result<()> {
    let lambda: f64 = std::env::args().nth(1).map_or(1.0, |s| s.parse().expect("lambda"));
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
    let params = LrParams { lambda, ..LrParams::default() };
    let model = LrModel::fit(&x, &y, &params)?;
    println!(
        "lambda {lambda}: {} iterations, converged {}, loss {:.4}, gradient inf-norm {:.2e}",
        model.n_iters, model.converged, model.final_loss, model.final_grad_norm
    );
    let (loss, _) = LogisticObjective::new(&x, &y, lambda).value_and_gradient(&model.flat_params());
    println!("objective at the returned weights: {loss:.4}");

    let (test_texts, test_y) = load_labeled(&parts.test)?;
    let xt = transform(&test_texts, &vocab)?;
    let pred = model.predict(&xt)?;
    println!(
        "test accuracy {:.3}, weighted F1 {:.3}",
        accuracy(&test_y, &pred)?,
        weighted_f1(&test_y, &pred, Weighting::Predicted)?
    );
    let proba = model.predict_proba(&xt)?;
    println!("first test review: true {} / probabilities {:.3?}", test_y[0], proba[0]);
    Ok(())
}
