//! Train on the bundled fixture, save the artifacts, reload them and
//! score free text.
//!
//! cargo run --release --example predict_text -- ["review text"]

use std::path::PathBuf;

use stargauge::classifiers::ModelFile;
use stargauge::config::RunConfig;
use stargauge::pipeline;
use stargauge::vectorizer::{transform, Vocabulary};

fn main() -> stargauge::Result<()> {
    let text = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "This is definitely my favorite fast food sub shop, fresh bread and friendly staff.".into());
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    let mut cfg = RunConfig::load(&root.join("configs/desk.toml"))?;
    let tmp = tempfile::tempdir().expect("temp dir");
    cfg.paths.out_dir = tmp.path().to_path_buf();
    let out = pipeline::run(&cfg)?;

    let vocab = Vocabulary::load(&out.vocab)?;
    let model = ModelFile::load(&out.model, &vocab.digest())?;
    let x = transform(&[text.as_str()], &vocab)?;
    let label = model.model.predict(&x)?[0];
    println!("{text:?} -> {label} stars");
    if let Some(p) = model.model.predict_proba(&x)? {
        println!("distribution {:.3?}", p[0]);
    }
    Ok(())
}
