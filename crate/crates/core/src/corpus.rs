//! Corpus statistics, seeded train/validation/test splitting and balanced
//! resampling of the training pool.
//!
//! All randomness comes from [`SeededRng`]. `split` shuffles row indices once
//! and assigns the first `val_size` to validation and the next `test_size` to
//! test; every output keeps the rows in their original file order. `balance`
//! draws each class in star order from a single stream and then shuffles the
//! combined output with the same stream.

use std::collections::BTreeMap;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{open, AtomicFile};
use crate::prepared::{parse_line, CorpusReader, LineReader};
use crate::rng::SeededRng;
use crate::star::{Star, N_CLASSES};
use crate::textproc::{tokenize, TokenizerConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassHistogram {
    counts: [u64; N_CLASSES],
}

impl ClassHistogram {
    pub fn from_labels<I: IntoIterator<Item = Star>>(labels: I) -> Self {
        let mut h = Self::default();
        for s in labels {
            h.counts[s.index()] += 1;
        }
        h
    }

    pub fn count(&self, star: Star) -> u64 {
        self.counts[star.index()]
    }

    pub fn counts(&self) -> [u64; N_CLASSES] {
        self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn fraction(&self, star: Star) -> f64 {
        self.count(star) as f64 / self.total() as f64
    }

    pub fn fractions(&self) -> [f64; N_CLASSES] {
        let total = self.total() as f64;
        self.counts.map(|c| c as f64 / total)
    }

    pub fn merge(&mut self, other: &ClassHistogram) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }
}

#[derive(Serialize, Deserialize)]
struct HistogramJson {
    total: u64,
    counts: BTreeMap<String, u64>,
    percentages: BTreeMap<String, f64>,
}

impl Serialize for ClassHistogram {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let fractions = self.fractions();
        HistogramJson {
            total: self.total(),
            counts: Star::ALL.iter().map(|s| (s.to_string(), self.count(*s))).collect(),
            percentages: Star::ALL
                .iter()
                .map(|s| (s.to_string(), fractions[s.index()]))
                .collect(),
        }
        .serialize(serializer)
    }
}

pub fn class_distribution(corpus: &Path) -> Result<ClassHistogram> {
    let mut h = ClassHistogram::default();
    for row in CorpusReader::open(corpus)? {
        h.counts[row?.stars.index()] += 1;
    }
    if h.total() == 0 {
        return Err(Error::EmptyInput(format!("{} has no rows", corpus.display())));
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenLengthStats {
    pub n_docs: u64,
    pub thresholds: Vec<usize>,
    /// Fraction of documents with at most `thresholds[i]` tokens.
    pub fractions: Vec<f64>,
}

/// Token counts use the word tokenizer before stopword removal.
pub fn token_length_stats(corpus: &Path, thresholds: &[usize], cfg: &TokenizerConfig) -> Result<TokenLengthStats> {
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("thresholds must be strictly increasing".into()));
    }
    let mut at_most = vec![0u64; thresholds.len()];
    let mut n_docs = 0u64;
    for row in CorpusReader::open(corpus)? {
        let len = tokenize(&row?.text, cfg).len();
        n_docs += 1;
        for (slot, &t) in at_most.iter_mut().zip(thresholds) {
            if len <= t {
                *slot += 1;
            }
        }
    }
    if n_docs == 0 {
        return Err(Error::EmptyInput(format!("{} has no rows", corpus.display())));
    }
    Ok(TokenLengthStats {
        n_docs,
        thresholds: thresholds.to_vec(),
        fractions: at_most.iter().map(|&c| c as f64 / n_docs as f64).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub val_size: usize,
    pub test_size: usize,
    pub train_per_class: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if self.train_per_class == 0 {
            return Err(Error::InvalidParameter("train_per_class must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SplitOutputs {
    pub train_pool: PathBuf,
    pub val: PathBuf,
    pub test: PathBuf,
    pub train_pool_rows: usize,
    pub val_rows: usize,
    pub test_rows: usize,
}

/// Reads all lines, validating them, and returns each line's star label.
fn scan_labels(corpus: &Path) -> Result<Vec<Star>> {
    let mut lines = LineReader::new(BufReader::with_capacity(1 << 16, open(corpus)?));
    let mut labels = Vec::new();
    while let Some(next) = lines.next_line() {
        let (n, line) = next.map_err(|e| Error::io(corpus, e))?;
        let row = parse_line(line).map_err(|m| Error::format(corpus, n, m))?;
        labels.push(row.stars);
    }
    Ok(labels)
}

/// Streams `corpus` once, handing each raw line to `route` with its index.
fn for_each_line(corpus: &Path, mut route: impl FnMut(usize, &str) -> Result<()>) -> Result<()> {
    let mut lines = LineReader::new(BufReader::with_capacity(1 << 16, open(corpus)?));
    let mut i = 0;
    while let Some(next) = lines.next_line() {
        let (_, line) = next.map_err(|e| Error::io(corpus, e))?;
        route(i, line)?;
        i += 1;
    }
    Ok(())
}

fn write_line(out: &mut AtomicFile, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| Error::io(out.path().to_path_buf(), e))
}

pub fn split(corpus: &Path, spec: &SplitSpec, out_dir: &Path) -> Result<SplitOutputs> {
    spec.validate()?;
    let n = scan_labels(corpus)?.len();
    if spec.val_size + spec.test_size >= n {
        return Err(Error::InvalidParameter(format!(
            "corpus has {n} rows, fewer than val {} + test {} plus a training pool",
            spec.val_size, spec.test_size
        )));
    }

    const TRAIN: u8 = 0;
    const VAL: u8 = 1;
    const TEST: u8 = 2;
    let mut order: Vec<u32> = (0..n as u32).collect();
    SeededRng::new(spec.seed).shuffle(&mut order);
    let mut assignment = vec![TRAIN; n];
    for &i in &order[..spec.val_size] {
        assignment[i as usize] = VAL;
    }
    for &i in &order[spec.val_size..spec.val_size + spec.test_size] {
        assignment[i as usize] = TEST;
    }

    let outputs = SplitOutputs {
        train_pool: out_dir.join("train_pool.tsv"),
        val: out_dir.join("val.tsv"),
        test: out_dir.join("test.tsv"),
        train_pool_rows: n - spec.val_size - spec.test_size,
        val_rows: spec.val_size,
        test_rows: spec.test_size,
    };
    let mut files = [
        AtomicFile::create(&outputs.train_pool)?,
        AtomicFile::create(&outputs.val)?,
        AtomicFile::create(&outputs.test)?,
    ];
    for_each_line(corpus, |i, line| write_line(&mut files[assignment[i] as usize], line))?;
    for f in files {
        f.commit()?;
    }
    Ok(outputs)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BalanceOutcome {
    pub rows: usize,
    pub per_class: usize,
    /// Stars whose pool was smaller than `per_class` and drawn with replacement.
    pub resampled_with_replacement: Vec<Star>,
}

pub fn balance(train_pool: &Path, per_class: usize, seed: u64, out: &Path) -> Result<BalanceOutcome> {
    if per_class == 0 {
        return Err(Error::InvalidParameter("per_class must be at least 1".into()));
    }
    let labels = scan_labels(train_pool)?;
    let mut by_class: [Vec<usize>; N_CLASSES] = Default::default();
    for (i, s) in labels.iter().enumerate() {
        by_class[s.index()].push(i);
    }
    if let Some(missing) = Star::ALL.iter().find(|s| by_class[s.index()].is_empty()) {
        return Err(Error::MissingClass(missing.value()));
    }

    let mut rng = SeededRng::new(seed);
    let mut chosen = Vec::with_capacity(per_class * N_CLASSES);
    let mut with_replacement = Vec::new();
    for star in Star::ALL {
        let rows = &by_class[star.index()];
        if rows.len() >= per_class {
            chosen.extend(rng.sample_without_replacement(rows.len(), per_class).into_iter().map(|k| rows[k]));
        } else {
            log::warn!(
                "star {star}: only {} rows for {per_class} requested, sampling with replacement",
                rows.len()
            );
            with_replacement.push(star);
            chosen.extend((0..per_class).map(|_| rows[rng.index(rows.len())]));
        }
    }
    rng.shuffle(&mut chosen);

    let mut wanted = vec![false; labels.len()];
    for &i in &chosen {
        wanted[i] = true;
    }
    let mut text: BTreeMap<usize, String> = BTreeMap::new();
    for_each_line(train_pool, |i, line| {
        if wanted[i] {
            text.insert(i, line.to_string());
        }
        Ok(())
    })?;

    let mut file = AtomicFile::create(out)?;
    for i in &chosen {
        write_line(&mut file, &text[i])?;
    }
    file.commit()?;
    Ok(BalanceOutcome {
        rows: chosen.len(),
        per_class,
        resampled_with_replacement: with_replacement,
    })
}

/// Uniform sample of `n` rows without replacement, written in file order.
pub fn subsample(corpus: &Path, n: usize, seed: u64, out: &Path) -> Result<usize> {
    let total = scan_labels(corpus)?.len();
    let n = n.min(total);
    let mut keep = vec![false; total];
    for i in SeededRng::new(seed).sample_without_replacement(total, n) {
        keep[i] = true;
    }
    let mut file = AtomicFile::create(out)?;
    for_each_line(corpus, |i, line| if keep[i] { write_line(&mut file, line) } else { Ok(()) })?;
    file.commit()?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prepared::{read_corpus, write_corpus, PreparedRow};
    use std::collections::HashSet;

    fn star(v: u8) -> Star {
        Star::new(v).unwrap()
    }

    fn corpus_file(dir: &Path, rows: &[(u8, String)]) -> PathBuf {
        let path = dir.join("corpus.tsv");
        let rows: Vec<PreparedRow> = rows.iter().map(|(s, t)| PreparedRow::new(star(*s), t.clone())).collect();
        write_corpus(&path, &rows).unwrap();
        path
    }

    #[test]
    fn uniform_and_skewed_distributions() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_file(dir.path(), &(1..=5).map(|s| (s, format!("r{s}"))).collect::<Vec<_>>());
        let h = class_distribution(&path).unwrap();
        for s in Star::ALL {
            assert_eq!(h.count(s), 1);
            assert!((h.fraction(s) - 0.2).abs() < 1e-15);
        }

        let path = corpus_file(dir.path(), &[(5, "a".into()), (5, "b".into()), (1, "c".into())]);
        let h = class_distribution(&path).unwrap();
        assert_eq!(h.count(star(5)), 2);
        assert!((h.fraction(star(5)) - 2.0 / 3.0).abs() < 1e-15);
        assert!((h.fraction(star(1)) - 1.0 / 3.0).abs() < 1e-15);
        assert!((h.fractions().iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn empty_corpus_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_file(dir.path(), &[]);
        assert!(matches!(class_distribution(&path), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn token_length_thresholds() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = TokenizerConfig::default();
        let path = corpus_file(dir.path(), &[(3, "one two three".into())]);
        let s = token_length_stats(&path, &[128, 256], &cfg).unwrap();
        assert_eq!(s.fractions, vec![1.0, 1.0]);

        let long: Vec<String> = (0..200).map(|i| format!("w{i}")).collect();
        let path = corpus_file(dir.path(), &[(3, long.join(" "))]);
        let s = token_length_stats(&path, &[128, 256], &cfg).unwrap();
        assert_eq!(s.fractions, vec![0.0, 1.0]);

        assert!(token_length_stats(&path, &[256, 128], &cfg).is_err());
    }

    fn numbered(n: usize) -> Vec<(u8, String)> {
        (0..n).map(|i| ((i % 5) as u8 + 1, format!("review number {i}"))).collect()
    }

    fn texts(path: &Path) -> Vec<String> {
        read_corpus(path).unwrap().into_iter().map(|r| r.text).collect()
    }

    #[test]
    fn split_is_a_deterministic_partition() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_file(dir.path(), &numbered(10));
        let spec = SplitSpec {
            val_size: 2,
            test_size: 2,
            train_per_class: 1,
            seed: 11,
        };
        let a = split(&path, &spec, &dir.path().join("a")).unwrap();
        let b = split(&path, &spec, &dir.path().join("b")).unwrap();
        let (train, val, test) = (texts(&a.train_pool), texts(&a.val), texts(&a.test));
        assert_eq!((train.len(), val.len(), test.len()), (6, 2, 2));
        let mut all: Vec<String> = train.iter().chain(&val).chain(&test).cloned().collect();
        all.sort();
        let mut expected: Vec<String> = numbered(10).into_iter().map(|(_, t)| t).collect();
        expected.sort();
        assert_eq!(all, expected);

        for (x, y) in [(&a.train_pool, &b.train_pool), (&a.val, &b.val), (&a.test, &b.test)] {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }

    #[test]
    fn split_rejects_small_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_file(dir.path(), &numbered(4));
        let spec = SplitSpec {
            val_size: 2,
            test_size: 2,
            train_per_class: 1,
            seed: 1,
        };
        assert!(split(&path, &spec, dir.path()).is_err());
        assert!(!dir.path().join("val.tsv").exists());
    }

    #[test]
    fn balance_without_replacement() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_file(dir.path(), &numbered(15));
        let out = dir.path().join("bal.tsv");
        let outcome = balance(&path, 2, 5, &out).unwrap();
        assert!(outcome.resampled_with_replacement.is_empty());
        let rows = read_corpus(&out).unwrap();
        assert_eq!(rows.len(), 10);
        let h = ClassHistogram::from_labels(rows.iter().map(|r| r.stars));
        assert_eq!(h.counts(), [2; 5]);
        let unique: HashSet<&str> = rows.iter().map(|r| r.text.as_str()).collect();
        assert_eq!(unique.len(), 10);
    }

    #[test]
    fn balance_falls_back_to_replacement() {
        let dir = tempfile::tempdir().unwrap();
        let mut rows = numbered(15);
        rows.retain(|(s, _)| *s != 2);
        rows.push((2, "the only two".into()));
        let path = corpus_file(dir.path(), &rows);
        let out = dir.path().join("bal.tsv");
        let outcome = balance(&path, 3, 5, &out).unwrap();
        assert_eq!(outcome.resampled_with_replacement, vec![star(2)]);
        let rows = read_corpus(&out).unwrap();
        let twos: Vec<&PreparedRow> = rows.iter().filter(|r| r.stars == star(2)).collect();
        assert_eq!(twos.len(), 3);
        assert!(twos.iter().all(|r| r.text == "the only two"));
    }

    #[test]
    fn balance_errors() {
        let dir = tempfile::tempdir().unwrap();
        let mut rows = numbered(15);
        rows.retain(|(s, _)| *s != 4);
        let path = corpus_file(dir.path(), &rows);
        let out = dir.path().join("bal.tsv");
        assert!(matches!(balance(&path, 1, 0, &out), Err(Error::MissingClass(4))));
        assert!(balance(&path, 0, 0, &out).is_err());
        assert!(!out.exists());
    }

    #[test]
    fn subsample_keeps_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = corpus_file(dir.path(), &numbered(20));
        let out = dir.path().join("sub.tsv");
        assert_eq!(subsample(&path, 7, 3, &out).unwrap(), 7);
        let got = texts(&out);
        let order: Vec<usize> = got.iter().map(|t| t.rsplit(' ').next().unwrap().parse().unwrap()).collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
    }
}
