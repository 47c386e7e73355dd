//! Regenerates `schema/metrics_golden.json`, the metric cases other
//! implementations check themselves against.
//!
//! cargo run --example export_metric_golden -- [out.json]

use std::path::PathBuf;

use stargauge::eval::golden_cases;

fn main() -> stargauge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/metrics_golden.json"));
    let golden = golden_cases(100, 200, 2024)?;
    stargauge::io::write_string(&out, &(serde_json::to_string_pretty(&golden).unwrap() + "\n"))?;
    println!("wrote {} cases to {}", golden.cases.len(), out.display());
    Ok(())
}
