//! Extract restaurant reviews from a Yelp-style dump into a prepared corpus.
//!
//! cargo run --example prepare_corpus -- [business.json review.json out.tsv]
//!
//! Without arguments it uses the bundled fixture.

use std::path::PathBuf;

use stargauge::ingest::extract_corpus;
use stargauge::prepared::CorpusReader;

fn main() -> stargauge::Result<()> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/desk");
    let tmp = tempfile::tempdir().expect("temp dir");
    let (business, reviews, out) = match args.as_slice() {
        [b, r, o] => (b.clone(), r.clone(), o.clone()),
        _ => (root.join("business.json"), root.join("review.json"), tmp.path().join("corpus.tsv")),
    };

    let stats = extract_corpus(&business, &reviews, &out)?;
    println!("{}", serde_json::to_string_pretty(&stats).unwrap());

    for row in CorpusReader::open(&out)?.take(3) {
        let row = row?;
        let preview: String = row.text.chars().take(60).collect();
        println!("{}\t{preview}...", row.stars);
    }
    Ok(())
}
