//! Corpus diagnostics and debiasing for natural-language-inference datasets.
//!
//! NLI corpora collected by crowdsourcing tend to carry annotation artifacts:
//! surface features of the hypothesis alone (label-informative bigrams such as
//! "nobody is") that predict the gold label without any premise. This crate
//! measures that effect and rebalances training sets:
//!
//! - [`corpus`] — SNLI-style JSONL ingestion, tokenization, bigram extraction,
//!   and the premise-shuffling transform.
//! - [`stats`] — per-class bigram counts, Laplace-smoothed label
//!   distributions, entropy ranking, odds ratios, and train/test comparison
//!   reports.
//! - [`nbayes`] — a bag-of-bigrams Naive Bayes classifier over hypotheses
//!   with exact O(|h|) incremental addition/removal of instances.
//! - [`prune`] — greedy removal of the most hypothesis-predictable instances
//!   (retraining by count subtraction after every removal) plus a uniform
//!   random-removal control.
//! - [`eval`] — the hypothesis-only evaluation harness and method-comparison
//!   deltas.
//! - [`report`] — CSV / JSON / SVG emitters for the above.
//!
//! The `nlibias` binary wires these together; see the README for usage.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod nbayes;
pub mod prune;
pub mod report;
pub mod stats;

pub use error::{Error, Result};
