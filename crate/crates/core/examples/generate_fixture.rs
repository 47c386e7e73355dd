//! Writes a synthetic Yelp-style dump (`business.json`, `review.json`).
//!
//! cargo run --example generate_fixture -- <out_dir> [n_reviews] [seed]
//!
//! The bundled `fixtures/desk` dump is `generate_fixture fixtures/desk 5000 2024`.

use std::path::PathBuf;

use stargauge::synth::{write_dump, SynthConfig};

fn main() -> stargauge::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "fixtures/desk".into()));
    let n_reviews = args.next().map_or(5_000, |s| s.parse().expect("n_reviews"));
    let seed = args.next().map_or(2024, |s| s.parse().expect("seed"));
    std::fs::create_dir_all(&dir).map_err(|e| stargauge::Error::io(&dir, e))?;
    let cfg = SynthConfig {
        n_reviews,
        n_businesses: (n_reviews / 15).max(10),
        seed,
        ..SynthConfig::default()
    };
    let summary = write_dump(&cfg, &dir.join("business.json"), &dir.join("review.json"))?;
    println!(
        "{} businesses ({} restaurants), {} reviews ({} at restaurants) in {}",
        summary.businesses,
        summary.restaurants,
        summary.reviews,
        summary.restaurant_reviews,
        dir.display()
    );
    Ok(())
}
