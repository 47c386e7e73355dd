//! Multiclass metrics and the evaluation report.
//!
//! Weighted F1 defaults to weighting each label by how often it was
//! *predicted*; [`Weighting::TrueSupport`] gives the more common
//! true-count weighting. Reports always carry both.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::star::{Star, N_CLASSES};

fn check_lengths(y_true: &[Star], y_pred: &[Star]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    Ok(())
}

pub fn accuracy(y_true: &[Star], y_pred: &[Star]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    if y_true.is_empty() {
        return Err(Error::EmptyInput("accuracy of zero samples".into()));
    }
    let hits = y_true.iter().zip(y_pred).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / y_true.len() as f64)
}

/// `counts[true][pred]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionCounts {
    pub counts: [[u64; N_CLASSES]; N_CLASSES],
}

impl ConfusionCounts {
    pub fn tally(y_true: &[Star], y_pred: &[Star]) -> Result<Self> {
        check_lengths(y_true, y_pred)?;
        let mut c = Self::default();
        for (t, p) in y_true.iter().zip(y_pred) {
            c.counts[t.index()][p.index()] += 1;
        }
        Ok(c)
    }

    pub fn true_count(&self, label: Star) -> u64 {
        self.counts[label.index()].iter().sum()
    }

    pub fn predicted_count(&self, label: Star) -> u64 {
        self.counts.iter().map(|row| row[label.index()]).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn class_scores(&self, label: Star) -> ClassScores {
        let tp = self.counts[label.index()][label.index()];
        let true_count = self.true_count(label);
        let predicted_count = self.predicted_count(label);
        let ratio = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, predicted_count);
        let recall = ratio(tp, true_count);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassScores {
            label,
            precision,
            recall,
            f1,
            true_count,
            predicted_count,
            degenerate: predicted_count == 0 || true_count == 0,
        }
    }

    pub fn weighted_f1(&self, weighting: Weighting) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for label in Star::ALL {
            let s = self.class_scores(label);
            let w = match weighting {
                Weighting::Predicted => s.predicted_count,
                Weighting::TrueSupport => s.true_count,
            } as f64;
            num += w * s.f1;
            den += w;
        }
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    /// Row-normalized matrix plus a flag per row that had no true samples.
    pub fn normalized(&self) -> ([[f64; N_CLASSES]; N_CLASSES], [bool; N_CLASSES]) {
        let mut m = [[0.0; N_CLASSES]; N_CLASSES];
        let mut empty = [false; N_CLASSES];
        for i in 0..N_CLASSES {
            let total: u64 = self.counts[i].iter().sum();
            if total == 0 {
                empty[i] = true;
                continue;
            }
            for (cell, &count) in m[i].iter_mut().zip(&self.counts[i]) {
                *cell = count as f64 / total as f64;
            }
        }
        (m, empty)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    #[default]
    Predicted,
    TrueSupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: Star,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_count: u64,
    pub predicted_count: u64,
    /// Set when precision or recall hit 0/0 and were reported as 0.
    pub degenerate: bool,
}

pub fn per_class_f1(y_true: &[Star], y_pred: &[Star], label: Star) -> Result<ClassScores> {
    Ok(ConfusionCounts::tally(y_true, y_pred)?.class_scores(label))
}

pub fn weighted_f1(y_true: &[Star], y_pred: &[Star], weighting: Weighting) -> Result<f64> {
    Ok(ConfusionCounts::tally(y_true, y_pred)?.weighted_f1(weighting))
}

pub fn confusion_matrix(y_true: &[Star], y_pred: &[Star]) -> Result<([[f64; N_CLASSES]; N_CLASSES], [bool; N_CLASSES])> {
    Ok(ConfusionCounts::tally(y_true, y_pred)?.normalized())
}

/// Converts raw integer labels, rejecting anything outside 1..=5.
pub fn labels_from_u8(raw: &[u8]) -> Result<Vec<Star>> {
    raw.iter()
        .map(|&v| Star::new(v).ok_or_else(|| Error::InvalidParameter(format!("label {v} outside 1..=5"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_digest: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub split: String,
    pub n: u64,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub weighted_f1_true_support: f64,
    pub per_class: Vec<ClassScores>,
    pub confusion: Vec<Vec<f64>>,
    /// Labels whose confusion row is all zeros because no sample had them.
    pub empty_confusion_rows: Vec<Star>,
    pub config_digest: String,
    pub seed: u64,
    pub created_at: String,
}

pub fn build_report(model: &str, split: &str, y_true: &[Star], y_pred: &[Star], provenance: &Provenance) -> Result<EvalReport> {
    let acc = accuracy(y_true, y_pred)?;
    let counts = ConfusionCounts::tally(y_true, y_pred)?;
    let (matrix, empty) = counts.normalized();
    Ok(EvalReport {
        model: model.to_string(),
        split: split.to_string(),
        n: y_true.len() as u64,
        accuracy: acc,
        weighted_f1: counts.weighted_f1(Weighting::Predicted),
        weighted_f1_true_support: counts.weighted_f1(Weighting::TrueSupport),
        per_class: Star::ALL.iter().map(|&l| counts.class_scores(l)).collect(),
        confusion: matrix.iter().map(|r| r.to_vec()).collect(),
        empty_confusion_rows: Star::ALL.into_iter().filter(|l| empty[l.index()]).collect(),
        config_digest: provenance.config_digest.clone(),
        seed: provenance.seed,
        created_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        io::write_string(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&io::read_to_string(path)?)
    }

    /// Copy with the timestamp blanked, for comparing runs.
    pub fn without_timestamp(&self) -> Self {
        Self {
            created_at: String::new(),
            ..self.clone()
        }
    }
}

/// One metric case for cross-implementation checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenCase {
    pub y_true: Vec<Star>,
    pub y_pred: Vec<Star>,
    pub accuracy: f64,
    pub weighted_f1: f64,
    pub weighted_f1_true_support: f64,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub f1: Vec<f64>,
    pub confusion: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFile {
    pub seed: u64,
    pub cases: Vec<GoldenCase>,
}

impl GoldenCase {
    pub fn compute(y_true: Vec<Star>, y_pred: Vec<Star>) -> Result<Self> {
        let counts = ConfusionCounts::tally(&y_true, &y_pred)?;
        let scores: Vec<ClassScores> = Star::ALL.iter().map(|&l| counts.class_scores(l)).collect();
        Ok(Self {
            accuracy: accuracy(&y_true, &y_pred)?,
            weighted_f1: counts.weighted_f1(Weighting::Predicted),
            weighted_f1_true_support: counts.weighted_f1(Weighting::TrueSupport),
            precision: scores.iter().map(|s| s.precision).collect(),
            recall: scores.iter().map(|s| s.recall).collect(),
            f1: scores.iter().map(|s| s.f1).collect(),
            confusion: counts.normalized().0.iter().map(|r| r.to_vec()).collect(),
            y_true,
            y_pred,
        })
    }
}

/// Random prediction vectors with their metrics. Each case draws true and
/// predicted labels from its own random subsets of the stars, so some
/// classes go missing and the 0/0 conventions get exercised.
pub fn golden_cases(n_cases: usize, len: usize, seed: u64) -> Result<GoldenFile> {
    let mut rng = crate::rng::SeededRng::new(seed);
    let subset = |rng: &mut crate::rng::SeededRng| {
        let k = 1 + rng.index(N_CLASSES);
        let mut all = Star::ALL;
        rng.shuffle(&mut all);
        all[..k].to_vec()
    };
    let mut cases = Vec::with_capacity(n_cases);
    for _ in 0..n_cases {
        let true_labels = subset(&mut rng);
        let pred_labels = subset(&mut rng);
        let hit_rate = rng.unit();
        let y_true: Vec<Star> = (0..len).map(|_| true_labels[rng.index(true_labels.len())]).collect();
        let y_pred = y_true
            .iter()
            .map(|&t| if rng.unit() < hit_rate { t } else { pred_labels[rng.index(pred_labels.len())] })
            .collect();
        cases.push(GoldenCase::compute(y_true, y_pred)?);
    }
    Ok(GoldenFile { seed, cases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn l(v: &[u8]) -> Vec<Star> {
        labels_from_u8(v).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&l(&[1, 2, 3]), &l(&[1, 2, 3])).unwrap(), 1.0);
        assert!((accuracy(&l(&[1, 1, 2]), &l(&[1, 2, 2])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(accuracy(&l(&[1, 1]), &l(&[3, 4])).unwrap(), 0.0);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&l(&[1]), &l(&[1, 2])).is_err());
    }

    #[test]
    fn per_class_examples() {
        let s = per_class_f1(&l(&[1, 1, 2]), &l(&[1, 2, 2]), Star::new(1).unwrap()).unwrap();
        assert_eq!((s.precision, s.recall), (1.0, 0.5));
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(!s.degenerate);

        let s = per_class_f1(&l(&[1, 1, 2]), &l(&[1, 2, 2]), Star::new(4).unwrap()).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
        assert!(s.degenerate);

        let y = l(&[1, 2, 3, 4, 5, 5]);
        for label in Star::ALL {
            let s = per_class_f1(&y, &y, label).unwrap();
            assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        }
        assert!(per_class_f1(&l(&[1]), &[], Star::new(1).unwrap()).is_err());
    }

    #[test]
    fn weighted_examples() {
        let y = l(&[1, 2, 2, 5]);
        assert_eq!(weighted_f1(&y, &y, Weighting::Predicted).unwrap(), 1.0);
        let w = weighted_f1(&l(&[1, 1, 2]), &l(&[1, 2, 2]), Weighting::Predicted).unwrap();
        assert!((w - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(weighted_f1(&l(&[1, 2, 3]), &l(&[5, 5, 5]), Weighting::Predicted).unwrap(), 0.0);
    }

    #[test]
    fn weightings_agree_when_counts_match() {
        // Predicted counts equal true counts per class.
        let t = l(&[1, 1, 2, 2, 3, 4, 5, 5]);
        let p = l(&[1, 2, 1, 2, 3, 5, 4, 5]);
        let a = weighted_f1(&t, &p, Weighting::Predicted).unwrap();
        let b = weighted_f1(&t, &p, Weighting::TrueSupport).unwrap();
        assert!((a - b).abs() < 1e-15);
        let b = weighted_f1(&l(&[1, 1, 2]), &l(&[1, 2, 2]), Weighting::TrueSupport).unwrap();
        assert!((b - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn confusion_examples() {
        let y = l(&[1, 2, 3, 4, 5]);
        let (m, empty) = confusion_matrix(&y, &y).unwrap();
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(empty, [false; 5]);

        let (m, empty) = confusion_matrix(&l(&[1, 1]), &l(&[1, 2])).unwrap();
        assert_eq!(m[0], [0.5, 0.5, 0.0, 0.0, 0.0]);
        assert_eq!(m[2], [0.0; 5]);
        assert!(empty[2] && !empty[0]);
        assert!(labels_from_u8(&[0]).is_err());
        assert!(labels_from_u8(&[6]).is_err());
    }

    #[test]
    fn report_composes_and_round_trips() {
        let t = l(&[1, 2, 3, 3, 5, 4, 2]);
        let p = l(&[1, 3, 3, 3, 4, 4, 2]);
        let prov = Provenance {
            config_digest: "ab".into(),
            seed: 9,
        };
        let r = build_report("lr", "val", &t, &p, &prov).unwrap();
        assert_eq!(r.accuracy, accuracy(&t, &p).unwrap());
        assert_eq!(r.weighted_f1, weighted_f1(&t, &p, Weighting::Predicted).unwrap());
        assert_eq!(r.per_class.iter().map(|c| c.true_count).sum::<u64>(), r.n);
        assert_eq!(EvalReport::from_json(&r.to_json()).unwrap(), r);

        let again = build_report("lr", "val", &t, &p, &prov).unwrap();
        assert_eq!(again.without_timestamp().to_json(), r.without_timestamp().to_json());
    }

    proptest! {
        #[test]
        fn confusion_rows_sum_to_one(pairs in prop::collection::vec((1u8..=5, 1u8..=5), 1..200)) {
            let t: Vec<Star> = pairs.iter().map(|p| Star::new(p.0).unwrap()).collect();
            let p: Vec<Star> = pairs.iter().map(|p| Star::new(p.1).unwrap()).collect();
            let (m, empty) = confusion_matrix(&t, &p).unwrap();
            for i in 0..5 {
                let s: f64 = m[i].iter().sum();
                if empty[i] { prop_assert_eq!(s, 0.0); } else { prop_assert!((s - 1.0).abs() < 1e-12); }
            }
            let acc = accuracy(&t, &p).unwrap();
            prop_assert!((0.0..=1.0).contains(&acc));
        }
    }
}
