//! Command-line front end. Every subcommand prints a JSON result on stdout;
//! failures print one JSON line `{"error": kind, "message": ...}` on stderr
//! and exit nonzero.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::classifiers::{MaxFeatures, ModelFile, ModelKind};
use crate::config::{ModelConfig, RunConfig};
use crate::corpus::{self, SplitSpec};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::ingest;
use crate::pipeline::{self, load_labeled};
use crate::textproc::TokenizerConfig;
use crate::vectorizer::{fit_vocabulary, transform, Scheme, VectorizerConfig, Vocabulary};

#[derive(Debug, Parser)]
#[command(name = "stargauge", version, about = "Predict 1-5 star ratings from review text")]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract restaurant reviews from Yelp business/review JSON-lines dumps.
    Prepare {
        #[arg(long)]
        business: PathBuf,
        #[arg(long)]
        reviews: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Class distribution and token-length fractions of a prepared corpus.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "128,256")]
        thresholds: Vec<usize>,
    },
    /// Hold out validation and test rows; the rest becomes the train pool.
    Split {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        val: usize,
        #[arg(long)]
        test: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also balance the train pool into `train.tsv` with this many rows per star.
        #[arg(long)]
        train_per_class: Option<usize>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Draw an equal number of rows per star from a train pool.
    Balance {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a vocabulary on a training corpus.
    Vectorize {
        #[arg(long)]
        train: PathBuf,
        #[command(flatten)]
        vec: VectorizerArgs,
        #[arg(long)]
        out_vocab: PathBuf,
    },
    /// Fit a classifier on a training corpus with a fitted vocabulary.
    Train {
        #[arg(long, value_parser = parse_kind)]
        model: ModelKind,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        /// Fails unless the vocabulary was fitted with this scheme.
        #[arg(long, value_parser = parse_scheme)]
        scheme: Option<Scheme>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model on a labeled corpus and write a report.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "test")]
        split: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict stars for one text or for every line of a file.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        text: Option<String>,
        /// Raw text, one review per line.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Run prepare → split → balance → vectorize → train → evaluate.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = parse_kind)]
        model: Option<ModelKind>,
        #[command(flatten)]
        hyper: HyperArgs,
    },
}

#[derive(Debug, Args)]
pub struct VectorizerArgs {
    #[arg(long, value_parser = parse_scheme, default_value = "tfidf")]
    pub scheme: Scheme,
    /// Presence indicators instead of raw counts.
    #[arg(long)]
    pub binary: bool,
    #[arg(long, default_value_t = 5)]
    pub min_df: u64,
    /// Row L2 normalization; defaults to on for tf-idf, off for counts.
    #[arg(long)]
    pub l2: Option<bool>,
    #[arg(long, default_value_t = 2)]
    pub ngram_max: usize,
}

impl VectorizerArgs {
    fn config(&self) -> VectorizerConfig {
        VectorizerConfig {
            scheme: self.scheme,
            binary: self.binary,
            min_df: self.min_df,
            tokenizer: TokenizerConfig {
                ngram_max: self.ngram_max,
                ..TokenizerConfig::default()
            },
            l2_normalize: self.l2,
        }
    }
}

#[derive(Debug, Args, Default)]
pub struct HyperArgs {
    /// NB smoothing or SVM regularization, whichever model is chosen.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub n_trees: Option<usize>,
    #[arg(long)]
    pub min_samples_leaf: Option<usize>,
    /// `sqrt`, `all`, or a count.
    #[arg(long, value_parser = parse_max_features)]
    pub max_features: Option<MaxFeatures>,
    #[arg(long)]
    pub no_bootstrap: bool,
}

impl HyperArgs {
    fn apply(&self, m: &mut ModelConfig) {
        if let Some(a) = self.alpha {
            match m.kind {
                ModelKind::Svm => m.svm.alpha = a,
                _ => m.nb.alpha = a,
            }
        }
        if let Some(v) = self.lambda {
            m.lr.lambda = v;
        }
        if let Some(v) = self.tol {
            m.lr.tol = v;
        }
        if let Some(v) = self.max_iter {
            m.lr.max_iter = v;
        }
        if let Some(v) = self.epochs {
            m.svm.epochs = v;
        }
        if let Some(v) = self.n_trees {
            m.rf.n_trees = v;
        }
        if let Some(v) = self.min_samples_leaf {
            m.rf.min_samples_leaf = v;
        }
        if let Some(v) = self.max_features {
            m.rf.max_features = v;
        }
        if self.no_bootstrap {
            m.rf.bootstrap = false;
        }
    }
}

fn parse_kind(s: &str) -> std::result::Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_max_features(s: &str) -> std::result::Result<MaxFeatures, String> {
    match s {
        "sqrt" => Ok(MaxFeatures::Sqrt),
        "all" => Ok(MaxFeatures::All),
        n => n
            .parse()
            .map(MaxFeatures::Fixed)
            .map_err(|_| format!("expected sqrt, all or a count, got {n:?}")),
    }
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string(v).expect("output serializes"));
}

fn report_summary(r: &EvalReport, path: &std::path::Path) -> serde_json::Value {
    json!({
        "report": path,
        "model": r.model,
        "split": r.split,
        "n": r.n,
        "accuracy": r.accuracy,
        "weighted_f1": r.weighted_f1,
    })
}

fn init_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::InvalidParameter("--threads must be at least 1".into()));
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Prepare { business, reviews, out } => {
            print_json(&ingest::extract_corpus(&business, &reviews, &out)?);
        }
        Command::Stats { input, thresholds } => {
            let dist = corpus::class_distribution(&input)?;
            let lengths = corpus::token_length_stats(&input, &thresholds, &TokenizerConfig::default())?;
            print_json(&json!({ "distribution": dist, "token_lengths": lengths }));
        }
        Command::Split {
            input,
            val,
            test,
            seed,
            train_per_class,
            out_dir,
        } => {
            let spec = SplitSpec {
                val_size: val,
                test_size: test,
                train_per_class: train_per_class.unwrap_or(1),
                seed,
            };
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let parts = corpus::split(&input, &spec, &out_dir)?;
            let balanced = match train_per_class {
                Some(k) => Some(corpus::balance(&parts.train_pool, k, seed, &out_dir.join("train.tsv"))?),
                None => None,
            };
            let mut v = serde_json::to_value(&parts).expect("outputs serialize");
            v["balance"] = serde_json::to_value(&balanced).expect("outcome serializes");
            print_json(&v);
        }
        Command::Balance {
            input,
            per_class,
            seed,
            out,
        } => {
            print_json(&corpus::balance(&input, per_class, seed, &out)?);
        }
        Command::Vectorize { train, vec, out_vocab } => {
            let (texts, _) = load_labeled(&train)?;
            let vocab = fit_vocabulary(&texts, &vec.config())?;
            vocab.save(&out_vocab)?;
            print_json(&json!({
                "vocab": out_vocab,
                "n_terms": vocab.len(),
                "n_docs": vocab.n_docs(),
                "digest": vocab.digest(),
            }));
        }
        Command::Train {
            model,
            train,
            vocab,
            scheme,
            seed,
            hyper,
            out,
        } => {
            let vocab = Vocabulary::load(&vocab)?;
            if let Some(s) = scheme {
                if s != vocab.config().scheme {
                    return Err(Error::Config(format!(
                        "--scheme {s:?} does not match the vocabulary's {:?}",
                        vocab.config().scheme
                    )));
                }
            }
            let mut cfg = ModelConfig::new(model);
            hyper.apply(&mut cfg);
            let (texts, labels) = load_labeled(&train)?;
            let x = transform(&texts, &vocab)?;
            let fitted = pipeline::train_model(&cfg, seed, &x, &labels)?;
            let digest = cfg.train_digest(seed, &vocab.config().digest());
            ModelFile::new(fitted, digest.clone(), seed, vocab.digest()).save(&out)?;
            print_json(&json!({ "model": out, "kind": model, "config_digest": digest }));
        }
        Command::Evaluate {
            model,
            vocab,
            data,
            split,
            out,
        } => {
            let vocab = Vocabulary::load(&vocab)?;
            let model = ModelFile::load(&model, &vocab.digest())?;
            let report = pipeline::evaluate_file(&model, &vocab, &data, &split)?;
            report.save(&out)?;
            print_json(&report_summary(&report, &out));
        }
        Command::Predict {
            model,
            vocab,
            text,
            input,
        } => {
            let vocab = Vocabulary::load(&vocab)?;
            let model = ModelFile::load(&model, &vocab.digest())?;
            let texts: Vec<String> = match (text, input) {
                (Some(t), _) => vec![t],
                (None, Some(p)) => crate::io::read_to_string(&p)?.lines().map(str::to_string).collect(),
                (None, None) => unreachable!("clap requires one of them"),
            };
            let x = transform(&texts, &vocab)?;
            let labels = model.model.predict(&x)?;
            let proba = model.model.predict_proba(&x)?;
            for (i, label) in labels.iter().enumerate() {
                let distribution = proba.as_ref().map(|p| p[i].to_vec());
                print_json(&json!({ "label": label, "distribution": distribution }));
            }
        }
        Command::Pipeline {
            config,
            out_dir,
            seed,
            model,
            hyper,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if cli.threads.is_none() {
                init_threads(cfg.threads)?;
            }
            if let Some(d) = out_dir {
                cfg.paths.out_dir = d;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(k) = model {
                cfg.model.kind = k;
            }
            hyper.apply(&mut cfg.model);
            let out = pipeline::run(&cfg)?;
            print_json(&json!({
                "out_dir": out.out_dir,
                "config_digest": out.summary.config_digest,
                "val": report_summary(&out.val_report, &out.out_dir.join("report_val.json")),
                "test": report_summary(&out.test_report, &out.out_dir.join("report_test.json")),
            }));
        }
    }
    Ok(())
}

fn error_line(kind: &str, message: &str) -> String {
    json!({ "error": kind, "message": message }).to_string()
}

/// Parses `argv`, runs the command, and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return 0;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", error_line("usage", first));
            return 2;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", error_line(e.kind(), &e.to_string()));
            1
        }
    }
}
