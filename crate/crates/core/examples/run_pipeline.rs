//! The whole pipeline from a TOML config, as `stargauge pipeline` runs it.
//!
//! cargo run --release --example run_pipeline -- [config.toml] [model kind]

use std::path::PathBuf;

use stargauge::config::RunConfig;
use stargauge::pipeline;

fn main() -> stargauge::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/desk.toml"));
    let mut cfg = RunConfig::load(&path)?;
    if let Some(kind) = args.next() {
        cfg.model.kind = kind.parse()?;
    }
    let tmp = tempfile::tempdir().expect("temp dir");
    cfg.paths.out_dir = tmp.path().to_path_buf();

    let out = pipeline::run(&cfg)?;
    println!("config digest {}", out.summary.config_digest);
    println!("vocabulary: {} terms", out.summary.n_terms);
    for r in [&out.val_report, &out.test_report] {
        println!("{} {}: accuracy {:.4}, weighted F1 {:.4}", r.model, r.split, r.accuracy, r.weighted_f1);
    }
    Ok(())
}
