//! Fit count and tf-idf vocabularies, inspect idf values, and transform text.
//!
//! cargo run --example vectorize

use stargauge::textproc::{TextProcessor, TokenizerConfig};
use stargauge::vectorizer::{fit_vocabulary, transform, Scheme, VectorizerConfig};

fn main() -> stargauge::Result<()> {
    let docs = [
        "The tacos were amazing and the salsa was fresh.",
        "Amazing service, amazing tacos!",
        "Cold fries and a rude cashier. Not coming back.",
        "The fries were cold but the burger was fine.",
    ];
    let processor = TextProcessor::new(TokenizerConfig::default())?;
    println!("terms of doc 0: {:?}", processor.terms(docs[0]));

    let cfg = VectorizerConfig::new(Scheme::Tfidf).with_min_df(1);
    let vocab = fit_vocabulary(&docs, &cfg)?;
    println!("{} terms", vocab.len());
    for term in ["amazing", "tacos", "cold fries", "rude"] {
        let c = vocab.column(term).expect("term in vocabulary");
        println!("  {term:<12} df={} idf={:+.4}", vocab.document_frequency(c), vocab.idf(c));
    }

    let x = transform(&["amazing amazing tacos"], &vocab)?;
    for (c, v) in x.row(0).iter() {
        println!("  tf-idf[{}] = {v:.4}", vocab.terms()[c]);
    }

    let binary = fit_vocabulary(&docs, &VectorizerConfig::new(Scheme::Count).with_binary(true).with_min_df(1))?;
    let x = transform(&["amazing amazing tacos"], &binary)?;
    println!("binary counts: {:?}", x.row(0).values);
    Ok(())
}
