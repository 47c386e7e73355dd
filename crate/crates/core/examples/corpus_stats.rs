//! Star distribution and token-length profile of a prepared corpus.
//!
//! cargo run --example corpus_stats -- [corpus.tsv]

use std::path::PathBuf;

use stargauge::corpus::{class_distribution, token_length_stats};
use stargauge::synth::{prepared_corpus, SynthConfig};
use stargauge::textproc::TokenizerConfig;
use stargauge::Star;

fn main() -> stargauge::Result<()> {
    let tmp = tempfile::tempdir().expect("temp dir");
    let corpus = match std::env::args().nth(1) {
        Some(p) => PathBuf::from(p),
        None => prepared_corpus(&SynthConfig::default(), tmp.path())?,
    };

    let hist = class_distribution(&corpus)?;
    println!("{} reviews", hist.total());
    for star in Star::ALL {
        println!("  {star} stars: {:>7} ({:.2}%)", hist.count(star), 100.0 * hist.fraction(star));
    }

    let lengths = token_length_stats(&corpus, &[32, 64, 128, 256], &TokenizerConfig::default())?;
    for (t, f) in lengths.thresholds.iter().zip(&lengths.fractions) {
        println!("  <= {t:>3} tokens: {:.1}%", 100.0 * f);
    }
    Ok(())
}
