//! Desk-scale comparison on a synthetic dump: tf-idf vs binary counts with
//! logistic regression, plus naive Bayes.
//!
//! cargo run --release --example desk_benchmark -- [n_reviews] [lambda]

use std::time::Instant;

use stargauge::classifiers::{LrModel, LrParams, NbModel};
use stargauge::corpus::{balance, split, subsample, SplitSpec};
use stargauge::eval::accuracy;
use stargauge::prepared::read_corpus;
use stargauge::synth::{write_dump, SynthConfig};
use stargauge::vectorizer::{fit_vocabulary, transform, Scheme, VectorizerConfig};
use stargauge::{ingest, Star};

fn load(path: &std::path::Path) -> (Vec<String>, Vec<Star>) {
    read_corpus(path).unwrap().into_iter().map(|r| (r.text, r.stars)).unzip()
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n_reviews: usize = args.get(1).map_or(150_000, |s| s.parse().unwrap());
    let lambda: Option<f64> = args.get(2).map(|s| s.parse().unwrap());
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let t = Instant::now();
    let cfg = SynthConfig {
        n_reviews,
        n_businesses: 2_000,
        seed: 7,
        ..SynthConfig::default()
    };
    write_dump(&cfg, &d.join("b.json"), &d.join("r.json")).unwrap();
    let stats = ingest::extract_corpus(&d.join("b.json"), &d.join("r.json"), &d.join("corpus.tsv")).unwrap();
    println!("prepared {} reviews in {:.1?}", stats.reviews_kept, t.elapsed());
    subsample(&d.join("corpus.tsv"), 100_000, 7, &d.join("sub.tsv")).unwrap();
    let spec = SplitSpec {
        val_size: 10_000,
        test_size: 10_000,
        train_per_class: 10_000,
        seed: 7,
    };
    let out = split(&d.join("sub.tsv"), &spec, d).unwrap();
    balance(&out.train_pool, 10_000, 7, &d.join("train.tsv")).unwrap();
    let (train_x, train_y) = load(&d.join("train.tsv"));
    let (val_x, val_y) = load(&out.val);
    let (test_x, test_y) = load(&out.test);

    for (name, vcfg) in [
        ("tfidf", VectorizerConfig::new(Scheme::Tfidf)),
        ("count-binary", VectorizerConfig::new(Scheme::Count).with_binary(true)),
    ] {
        let t = Instant::now();
        let vocab = fit_vocabulary(&train_x, &vcfg).unwrap();
        let xt = transform(&train_x, &vocab).unwrap();
        let xv = transform(&val_x, &vocab).unwrap();
        let xs = transform(&test_x, &vocab).unwrap();
        println!("{name}: {} terms, vectorized in {:.1?}", vocab.len(), t.elapsed());
        let params = LrParams {
            lambda: lambda.unwrap_or(LrParams::default().lambda),
            ..LrParams::default()
        };
        let t = Instant::now();
        let lr = LrModel::fit(&xt, &train_y, &params).unwrap();
        println!(
            "  lr(lambda={:.2e}) val {:.4} test {:.4} iters {} converged {} in {:.1?}",
            params.lambda,
            accuracy(&val_y, &lr.predict(&xv).unwrap()).unwrap(),
            accuracy(&test_y, &lr.predict(&xs).unwrap()).unwrap(),
            lr.n_iters,
            lr.converged,
            t.elapsed()
        );
        let nb = NbModel::fit(&xt, &train_y, 1.0).unwrap();
        println!(
            "  nb val {:.4} test {:.4}",
            accuracy(&val_y, &nb.predict(&xv).unwrap()).unwrap(),
            accuracy(&test_y, &nb.predict(&xs).unwrap()).unwrap()
        );
    }
}
