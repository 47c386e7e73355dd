//! Star-rating prediction from review text.
//!
//! The stages mirror the command-line tool: [`ingest`] turns Yelp JSON-lines
//! dumps into a prepared `stars<TAB>text` corpus, [`corpus`] splits and
//! balances it, [`vectorizer`] builds count or tf-idf features, the
//! [`classifiers`] fit naive Bayes, logistic regression, a linear SVM or a
//! random forest, and [`eval`] scores predictions. [`pipeline`] chains them
//! from a [`config::RunConfig`].

pub mod classifiers;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ingest;
pub mod io;
pub mod pipeline;
pub mod prepared;
pub mod rng;
pub mod sparse;
pub mod star;
pub mod synth;
pub mod textproc;
pub mod vectorizer;

pub use error::{Error, Result};
pub use star::Star;
