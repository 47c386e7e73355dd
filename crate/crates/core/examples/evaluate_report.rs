//! Metrics and the report JSON for a fixed set of predictions.
//!
//! cargo run --example evaluate_report

use stargauge::eval::{build_report, labels_from_u8, per_class_f1, weighted_f1, Provenance, Weighting};
use stargauge::Star;

fn main() -> stargauge::Result<()> {
    let y_true = labels_from_u8(&[1, 1, 2, 3, 3, 4, 5, 5, 5, 5])?;
    let y_pred = labels_from_u8(&[1, 2, 2, 3, 4, 4, 5, 5, 4, 5])?;

    for label in Star::ALL {
        let s = per_class_f1(&y_true, &y_pred, label)?;
        println!("{label}: P={:.3} R={:.3} F1={:.3}", s.precision, s.recall, s.f1);
    }
    println!(
        "weighted F1: by predicted counts {:.4}, by true counts {:.4}",
        weighted_f1(&y_true, &y_pred, Weighting::Predicted)?,
        weighted_f1(&y_true, &y_pred, Weighting::TrueSupport)?
    );

    let report = build_report(
        "lr",
        "test",
        &y_true,
        &y_pred,
        &Provenance { config_digest: "example".into(), seed: 0 },
    )?;
    print!("{}", report.to_json());
    Ok(())
}
