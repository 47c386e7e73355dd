//! Vocabulary fitting and count / tf-idf document-term matrices.
//!
//! The inverse document frequency is `ln(n / (1 + df(t)))` with no smoothing
//! beyond the `+1` and no clamping, so a term found in every training
//! document gets a negative weight. Columns are assigned in lexicographic
//! term order, which makes a fitted vocabulary canonical.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::io::{read_to_string, write_string};
use crate::sparse::CsrMatrix;
use crate::textproc::{TextProcessor, TokenizerConfig};

const VOCAB_MAGIC: &str = "stargauge-vocabulary";
const VOCAB_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Count,
    Tfidf,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(Scheme::Count),
            "tfidf" => Ok(Scheme::Tfidf),
            other => Err(Error::InvalidParameter(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VectorizerConfig {
    pub scheme: Scheme,
    #[serde(default)]
    pub binary: bool,
    #[serde(default = "default_min_df")]
    pub min_df: u64,
    #[serde(default)]
    pub tokenizer: TokenizerConfig,
    /// Row L2 normalization; `None` means on for tf-idf and off for counts.
    #[serde(default)]
    pub l2_normalize: Option<bool>,
}

fn default_min_df() -> u64 {
    5
}

impl Default for VectorizerConfig {
    fn default() -> Self {
        Self::new(Scheme::Tfidf)
    }
}

impl VectorizerConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            binary: false,
            min_df: default_min_df(),
            tokenizer: TokenizerConfig::default(),
            l2_normalize: None,
        }
    }

    pub fn with_binary(mut self, binary: bool) -> Self {
        self.binary = binary;
        self
    }

    pub fn with_min_df(mut self, min_df: u64) -> Self {
        self.min_df = min_df;
        self
    }

    pub fn with_l2_normalize(mut self, on: bool) -> Self {
        self.l2_normalize = Some(on);
        self
    }

    pub fn normalizes(&self) -> bool {
        self.l2_normalize.unwrap_or(self.scheme == Scheme::Tfidf)
    }

    /// Same config with defaults resolved, which is what gets hashed and stored.
    pub fn resolved(&self) -> Self {
        Self {
            l2_normalize: Some(self.normalizes()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_df == 0 {
            return Err(Error::InvalidParameter("min_df must be at least 1".into()));
        }
        self.tokenizer.validate()
    }

    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(&self.resolved()).expect("config serializes").as_bytes())
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn idf(n_docs: u64, df: u64) -> f64 {
    (n_docs as f64 / (1.0 + df as f64)).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    config: VectorizerConfig,
    n_docs: u64,
    terms: Vec<String>,
    df: Vec<u64>,
    idf: Vec<f64>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    fn from_terms(config: VectorizerConfig, n_docs: u64, terms: Vec<(String, u64)>) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.clone(), i as u32))
            .collect();
        let df: Vec<u64> = terms.iter().map(|(_, d)| *d).collect();
        let idf = df.iter().map(|&d| idf(n_docs, d)).collect();
        Self {
            config: config.resolved(),
            n_docs,
            terms: terms.into_iter().map(|(t, _)| t).collect(),
            df,
            idf,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn config(&self) -> &VectorizerConfig {
        &self.config
    }

    pub fn n_docs(&self) -> u64 {
        self.n_docs
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&c| c as usize)
    }

    pub fn document_frequency(&self, column: usize) -> u64 {
        self.df[column]
    }

    pub fn idf(&self, column: usize) -> f64 {
        self.idf[column]
    }

    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        let cfg = serde_json::to_string(&self.config).expect("config serializes");
        writeln!(s, "{VOCAB_MAGIC}\t{VOCAB_VERSION}").unwrap();
        writeln!(s, "config_digest\t{}", self.config.digest()).unwrap();
        writeln!(s, "config\t{cfg}").unwrap();
        writeln!(s, "n_docs\t{}", self.n_docs).unwrap();
        writeln!(s, "n_terms\t{}", self.terms.len()).unwrap();
        writeln!(s, "term\tdf\tidf\tcolumn").unwrap();
        for (i, t) in self.terms.iter().enumerate() {
            writeln!(s, "{t}\t{}\t{}\t{i}", self.df[i], self.idf[i]).unwrap();
        }
        s
    }

    /// Content hash of the serialized vocabulary.
    pub fn digest(&self) -> String {
        sha256_hex(self.to_file_string().as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_file_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&read_to_string(path)?, path)
    }

    pub fn parse(contents: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::format(path, line, msg);
        let mut lines = contents.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut header = |key: &str| -> Result<(usize, String)> {
            let (n, line) = lines.next().ok_or_else(|| err(0, format!("missing {key} header")))?;
            match line.split_once('\t') {
                Some((k, v)) if k == key => Ok((n, v.to_string())),
                _ => Err(err(n, format!("expected {key} header"))),
            }
        };
        let (n, version) = header(VOCAB_MAGIC)?;
        if version != VOCAB_VERSION.to_string() {
            return Err(err(n, format!("unsupported vocabulary version {version}")));
        }
        let (_, digest) = header("config_digest")?;
        let (n, cfg) = header("config")?;
        let config: VectorizerConfig = serde_json::from_str(&cfg).map_err(|e| err(n, e.to_string()))?;
        if config.digest() != digest {
            return Err(err(n, "config digest does not match config".into()));
        }
        let (n, n_docs) = header("n_docs")?;
        let n_docs: u64 = n_docs.parse().map_err(|_| err(n, "bad n_docs".into()))?;
        let (n, n_terms) = header("n_terms")?;
        let n_terms: usize = n_terms.parse().map_err(|_| err(n, "bad n_terms".into()))?;
        let (n, cols) = header("term")?;
        if cols != "df\tidf\tcolumn" {
            return Err(err(n, "unexpected column header".into()));
        }

        let mut terms = Vec::with_capacity(n_terms);
        for (n, line) in lines {
            let fields: Vec<&str> = line.split('\t').collect();
            let [term, df, idf_field, col] = fields[..] else {
                return Err(err(n, "expected term, df, idf, column".into()));
            };
            let df: u64 = df.parse().map_err(|_| err(n, "bad df".into()))?;
            let col: usize = col.parse().map_err(|_| err(n, "bad column".into()))?;
            let stored: f64 = idf_field.parse().map_err(|_| err(n, "bad idf".into()))?;
            if col != terms.len() {
                return Err(err(n, format!("column {col} out of sequence")));
            }
            if stored.to_bits() != idf(n_docs, df).to_bits() {
                return Err(err(n, format!("idf {stored} disagrees with df {df} and n_docs {n_docs}")));
            }
            terms.push((term.to_string(), df));
        }
        if terms.len() != n_terms {
            return Err(err(0, format!("header says {n_terms} terms, found {}", terms.len())));
        }
        if terms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(err(0, "terms are not in lexicographic order".into()));
        }
        Ok(Self::from_terms(config, n_docs, terms))
    }
}

pub fn fit_vocabulary<S: AsRef<str> + Sync>(docs: &[S], cfg: &VectorizerConfig) -> Result<Vocabulary> {
    cfg.validate()?;
    if docs.is_empty() {
        return Err(Error::EmptyInput("no training documents".into()));
    }
    let processor = TextProcessor::new(cfg.tokenizer.clone())?;
    let df: HashMap<String, u64> = docs
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<String, u64>, doc| {
            let mut terms = processor.terms(doc.as_ref());
            terms.sort_unstable();
            terms.dedup();
            for t in terms {
                *acc.entry(t).or_insert(0) += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, std::mem::take(&mut a)) };
            for (t, c) in small {
                *big.entry(t).or_insert(0) += c;
            }
            big
        });
    let mut kept: Vec<(String, u64)> = df.into_iter().filter(|(_, d)| *d >= cfg.min_df).collect();
    if kept.is_empty() {
        return Err(Error::EmptyInput(format!("no term reaches min_df = {}", cfg.min_df)));
    }
    kept.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    Ok(Vocabulary::from_terms(cfg.clone(), docs.len() as u64, kept))
}

/// One document's feature row, using the vocabulary's own config.
fn document_row(processor: &TextProcessor, vocab: &Vocabulary, text: &str) -> Vec<(u32, f64)> {
    let cfg = vocab.config();
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for term in processor.terms(text) {
        if let Some(&c) = vocab.index.get(&term) {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    let mut row: Vec<(u32, f64)> = counts
        .into_iter()
        .map(|(c, n)| {
            let tf = if cfg.binary { 1.0 } else { f64::from(n) };
            let v = match cfg.scheme {
                Scheme::Count => tf,
                Scheme::Tfidf => tf * vocab.idf[c as usize],
            };
            (c, v)
        })
        .filter(|&(_, v)| v != 0.0)
        .collect();
    row.sort_unstable_by_key(|&(c, _)| c);
    if cfg.normalizes() {
        let norm = row.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut row {
                *v /= norm;
            }
        }
    }
    row
}

pub fn transform<S: AsRef<str> + Sync>(docs: &[S], vocab: &Vocabulary) -> Result<CsrMatrix> {
    let processor = TextProcessor::new(vocab.config().tokenizer.clone())?;
    let rows: Vec<Vec<(u32, f64)>> = docs
        .par_iter()
        .map(|d| document_row(&processor, vocab, d.as_ref()))
        .collect();
    CsrMatrix::from_rows(vocab.len(), rows)
}

/// Per-column divisor: population standard deviation, or 1 for constant columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub scales: Vec<f64>,
}

impl ScalerParams {
    pub fn identity(n_cols: usize) -> Self {
        Self {
            scales: vec![1.0; n_cols],
        }
    }

    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("scaler serializes").as_bytes())
    }
}

/// Variance-only scaling: unstored entries count as zeros and nothing is
/// centered, so the sparsity pattern survives.
pub fn fit_scaler(x: &CsrMatrix) -> Result<ScalerParams> {
    let n = x.n_rows();
    if n == 0 {
        return Err(Error::EmptyInput("cannot fit a scaler on zero rows".into()));
    }
    let columns = x.to_columns();
    let scales = columns
        .iter()
        .map(|col| {
            let constant = match col.first() {
                None => true,
                Some(&(_, first)) => col.len() == n && col.iter().all(|&(_, v)| v == first),
            };
            if constant {
                return 1.0;
            }
            let mean = col.iter().map(|&(_, v)| v).sum::<f64>() / n as f64;
            let stored: f64 = col.iter().map(|&(_, v)| (v - mean) * (v - mean)).sum();
            let implicit = (n - col.len()) as f64 * mean * mean;
            let std = ((stored + implicit) / n as f64).sqrt();
            if std > 0.0 {
                std
            } else {
                1.0
            }
        })
        .collect();
    Ok(ScalerParams { scales })
}

pub fn apply_scaler(x: &CsrMatrix, params: &ScalerParams) -> Result<CsrMatrix> {
    if params.scales.len() != x.n_cols() {
        return Err(Error::DimensionMismatch {
            expected: params.scales.len(),
            actual: x.n_cols(),
        });
    }
    let mut out = x.clone();
    out.map_values_in_place(|c, v| v / params.scales[c]);
    Ok(out)
}
