//! Bag-of-bigrams Naive Bayes over hypotheses.
//!
//! The model supports exact incremental addition and removal of instances by
//! adding or subtracting their counts, so retraining after a removal costs
//! O(|h|) instead of a full pass. Removal is the exact inverse of training on
//! the instance, with one documented exception: the vocabulary size (count of
//! distinct bigrams ever observed) is a high-water mark and never shrinks.
//! Keeping the smoothing denominator's vocabulary fixed during pruning avoids
//! score discontinuities when a bigram's last occurrence disappears.
//!
//! Scoring is canonical: a hypothesis' bigrams are aggregated in sorted order
//! before the log-likelihood sum, so instances with equal bigram multisets
//! produce bit-identical scores regardless of token order, run, or thread
//! count.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{extract_bigrams, Bigram, Corpus, Instance, Label};
use crate::error::{Error, Result};
use crate::stats::ClassDistribution;

/// A hypothesis' bigram multiset in canonical (sorted) order.
#[derive(Clone, Debug)]
pub struct BigramFeatures {
    pairs: Vec<(Bigram, u64)>,
    total: u64,
}

impl BigramFeatures {
    pub fn from_tokens(tokens: &[String]) -> Self {
        let mut agg: BTreeMap<Bigram, u64> = BTreeMap::new();
        for w in extract_bigrams(tokens) {
            *agg.entry(w).or_insert(0) += 1;
        }
        let pairs: Vec<(Bigram, u64)> = agg.into_iter().collect();
        let total = pairs.iter().map(|(_, m)| m).sum();
        BigramFeatures { pairs, total }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn pairs(&self) -> &[(Bigram, u64)] {
        &self.pairs
    }
}

/// Class priors plus per-class bigram counts with Laplace-smoothed
/// likelihoods `p(w|c) = (count[w][c] + α) / (mass[c] + α·V)`.
#[derive(Clone, Debug)]
pub struct NaiveBayesModel {
    alpha: f64,
    class_instances: [u64; 3],
    class_mass: [u64; 3],
    // Zero rows are kept: the key set doubles as the ever-observed vocabulary.
    counts: HashMap<Bigram, [u64; 3]>,
    vocab: u64,
}

impl NaiveBayesModel {
    /// Trains on the corpus' hypotheses, with multiplicity.
    ///
    /// Every label class must be represented at least once, otherwise the
    /// maximum-likelihood priors would be degenerate.
    pub fn train(corpus: &Corpus, alpha: f64) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParam(format!(
                "alpha must be a finite number > 0, got {alpha}"
            )));
        }
        let label_counts = corpus.label_counts();
        for label in Label::ALL {
            if label_counts[label.index()] == 0 {
                return Err(Error::MissingClass(label));
            }
        }

        let mut model = corpus
            .instances
            .par_iter()
            .fold(
                || NaiveBayesModel {
                    alpha,
                    class_instances: [0; 3],
                    class_mass: [0; 3],
                    counts: HashMap::new(),
                    vocab: 0,
                },
                |mut m, inst| {
                    m.add(inst);
                    m
                },
            )
            .reduce_with(|a, b| a.merged(b))
            .expect("corpus is non-empty");
        model.vocab = model.counts.len() as u64;
        Ok(model)
    }

    /// As [`train`](Self::train), then raises the vocabulary size to at least
    /// `floor`. Used to compare models across corpora under one smoothing
    /// denominator.
    pub fn train_with_vocab_floor(corpus: &Corpus, alpha: f64, floor: u64) -> Result<Self> {
        let mut model = Self::train(corpus, alpha)?;
        model.vocab = model.vocab.max(floor);
        Ok(model)
    }

    fn merged(mut self, other: NaiveBayesModel) -> NaiveBayesModel {
        for (a, b) in self.class_instances.iter_mut().zip(other.class_instances) {
            *a += b;
        }
        for (a, b) in self.class_mass.iter_mut().zip(other.class_mass) {
            *a += b;
        }
        for (bigram, counts) in other.counts {
            let entry = self.counts.entry(bigram).or_insert([0; 3]);
            for (a, b) in entry.iter_mut().zip(counts) {
                *a += b;
            }
        }
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Distinct bigrams ever observed; never decreases.
    pub fn vocab(&self) -> u64 {
        self.vocab
    }

    pub fn class_instances(&self) -> [u64; 3] {
        self.class_instances
    }

    pub fn class_mass(&self) -> [u64; 3] {
        self.class_mass
    }

    pub fn total_instances(&self) -> u64 {
        self.class_instances.iter().sum()
    }

    pub fn bigram_counts(&self, w: &Bigram) -> [u64; 3] {
        self.counts.get(w).copied().unwrap_or([0; 3])
    }

    pub fn priors(&self) -> [f64; 3] {
        let n = self.total_instances() as f64;
        if n == 0.0 {
            return [0.0; 3];
        }
        [
            self.class_instances[0] as f64 / n,
            self.class_instances[1] as f64 / n,
            self.class_instances[2] as f64 / n,
        ]
    }

    /// `p̂(c|h)` over the three classes, computed in log space.
    ///
    /// Hypotheses with fewer than two tokens carry no bigrams and fall back
    /// to the prior distribution.
    pub fn posterior(&self, hypothesis_tokens: &[String]) -> ClassDistribution {
        self.posterior_features(&BigramFeatures::from_tokens(hypothesis_tokens))
    }

    pub fn posterior_features(&self, features: &BigramFeatures) -> ClassDistribution {
        let n = self.total_instances();
        if n == 0 {
            return ClassDistribution::uniform();
        }
        let priors = self.priors();
        if features.total == 0 || self.vocab == 0 {
            return ClassDistribution { p: priors };
        }
        let v = self.vocab as f64;
        let mut log_weights = [f64::NEG_INFINITY; 3];
        for c in 0..3 {
            if self.class_instances[c] == 0 {
                continue; // prior zero: the class stays at probability zero
            }
            let denom = (self.class_mass[c] as f64 + self.alpha * v).ln();
            let mut acc = priors[c].ln() - features.total as f64 * denom;
            for (w, multiplicity) in &features.pairs {
                let count = self.counts.get(w).map_or(0, |t| t[c]);
                acc += *multiplicity as f64 * (count as f64 + self.alpha).ln();
            }
            log_weights[c] = acc;
        }
        ClassDistribution::from_log_weights(log_weights)
    }

    /// `-log p̂(label | hypothesis)`; lower means the gold label is predicted
    /// more confidently from the hypothesis alone.
    pub fn score(&self, instance: &Instance) -> f64 {
        self.score_features(
            &BigramFeatures::from_tokens(&instance.hypothesis_tokens),
            instance.label,
        )
    }

    pub fn score_features(&self, features: &BigramFeatures, label: Label) -> f64 {
        -self.posterior_features(features).get(label).ln()
    }

    /// Adds one instance's counts; the exact inverse of
    /// [`remove`](Self::remove).
    pub fn add(&mut self, instance: &Instance) {
        self.add_features(
            &BigramFeatures::from_tokens(&instance.hypothesis_tokens),
            instance.label,
        );
    }

    pub fn add_features(&mut self, features: &BigramFeatures, label: Label) {
        let idx = label.index();
        self.class_instances[idx] += 1;
        self.class_mass[idx] += features.total;
        for (w, multiplicity) in &features.pairs {
            let entry = match self.counts.get_mut(w) {
                Some(entry) => entry,
                None => {
                    self.vocab += 1;
                    self.counts.entry(w.clone()).or_insert([0; 3])
                }
            };
            entry[idx] += multiplicity;
        }
    }

    /// Subtracts one instance's counts. Errors (leaving the model untouched)
    /// if the instance's counts are not fully present, which signals a
    /// double removal.
    pub fn remove(&mut self, instance: &Instance) -> Result<()> {
        self.remove_features(
            &BigramFeatures::from_tokens(&instance.hypothesis_tokens),
            instance.label,
            &instance.id,
        )
    }

    pub fn remove_features(
        &mut self,
        features: &BigramFeatures,
        label: Label,
        id: &str,
    ) -> Result<()> {
        let idx = label.index();
        let underflow = self.class_instances[idx] == 0
            || self.class_mass[idx] < features.total
            || features.pairs.iter().any(|(w, multiplicity)| {
                self.counts.get(w).map_or(0, |t| t[idx]) < *multiplicity
            });
        if underflow {
            return Err(Error::DoubleRemoval { id: id.to_string() });
        }
        self.class_instances[idx] -= 1;
        self.class_mass[idx] -= features.total;
        for (w, multiplicity) in &features.pairs {
            self.counts.get_mut(w).expect("checked above")[idx] -= multiplicity;
        }
        Ok(())
    }

    /// Full recount check of the internal totals; used by tests and audits.
    pub fn totals_consistent(&self) -> bool {
        let mut sums = [0u64; 3];
        for counts in self.counts.values() {
            for (s, c) in sums.iter_mut().zip(counts) {
                *s += c;
            }
        }
        sums == self.class_mass && self.vocab >= self.counts.len() as u64
    }

    /// Writes a versioned text snapshot: a header with alpha, vocabulary
    /// size, instance counts, and mass, then one `first second c e n` line
    /// per bigram in sorted order.
    pub fn write_snapshot<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "nlibias-nb-snapshot v1")?;
        writeln!(out, "alpha {}", self.alpha)?;
        writeln!(out, "vocab {}", self.vocab)?;
        writeln!(
            out,
            "instances {} {} {}",
            self.class_instances[0], self.class_instances[1], self.class_instances[2]
        )?;
        writeln!(
            out,
            "mass {} {} {}",
            self.class_mass[0], self.class_mass[1], self.class_mass[2]
        )?;
        writeln!(out, "bigrams {}", self.counts.len())?;
        let mut sorted: Vec<(&Bigram, &[u64; 3])> = self.counts.iter().collect();
        sorted.sort_unstable_by(|a, b| a.0.cmp(b.0));
        for (w, c) in sorted {
            writeln!(out, "{} {} {} {} {}", w.first, w.second, c[0], c[1], c[2])?;
        }
        Ok(())
    }

    pub fn save_snapshot(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        self.write_snapshot(&mut out)
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_snapshot<R: BufRead>(reader: R) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Snapshot {
            line,
            msg: msg.to_string(),
        };
        let mut lines = reader.lines().enumerate();
        let mut next_line = |expecting: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((idx, Ok(line))) => Ok((idx + 1, line)),
                Some((idx, Err(e))) => Err(bad(idx + 1, &e.to_string())),
                None => Err(bad(0, &format!("unexpected end of file, expected {expecting}"))),
            }
        };

        let (n, header) = next_line("header")?;
        if header != "nlibias-nb-snapshot v1" {
            return Err(bad(n, "unrecognized snapshot header"));
        }
        let parse_prefixed = |line: &str, no: usize, prefix: &str| -> Result<Vec<String>> {
            let mut parts = line.split_whitespace();
            if parts.next() != Some(prefix) {
                return Err(bad(no, &format!("expected \"{prefix}\" line")));
            }
            Ok(parts.map(str::to_string).collect())
        };

        let (n, line) = next_line("alpha")?;
        let alpha: f64 = parse_prefixed(&line, n, "alpha")?
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(n, "bad alpha"))?;
        let (n, line) = next_line("vocab")?;
        let vocab: u64 = parse_prefixed(&line, n, "vocab")?
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(n, "bad vocab"))?;
        let parse_triple = |fields: Vec<String>, no: usize| -> Result<[u64; 3]> {
            if fields.len() != 3 {
                return Err(bad(no, "expected three counts"));
            }
            let mut out = [0u64; 3];
            for (slot, field) in out.iter_mut().zip(fields) {
                *slot = field.parse().map_err(|_| bad(no, "bad count"))?;
            }
            Ok(out)
        };
        let (n, line) = next_line("instances")?;
        let class_instances = parse_triple(parse_prefixed(&line, n, "instances")?, n)?;
        let (n, line) = next_line("mass")?;
        let class_mass = parse_triple(parse_prefixed(&line, n, "mass")?, n)?;
        let (n, line) = next_line("bigrams")?;
        let expected: usize = parse_prefixed(&line, n, "bigrams")?
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(n, "bad bigram count"))?;

        let mut counts = HashMap::with_capacity(expected);
        for _ in 0..expected {
            let (n, line) = next_line("bigram line")?;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(bad(n, "expected: first second c e n"));
            }
            let triple = [
                fields[2].parse().map_err(|_| bad(n, "bad count"))?,
                fields[3].parse().map_err(|_| bad(n, "bad count"))?,
                fields[4].parse().map_err(|_| bad(n, "bad count"))?,
            ];
            if counts
                .insert(Bigram::new(fields[0], fields[1]), triple)
                .is_some()
            {
                return Err(bad(n, "duplicate bigram"));
            }
        }

        let model = NaiveBayesModel {
            alpha,
            class_instances,
            class_mass,
            counts,
            vocab,
        };
        if !(model.alpha > 0.0) {
            return Err(bad(2, "alpha must be > 0"));
        }
        if !model.totals_consistent() {
            return Err(bad(0, "mass/vocab header disagrees with bigram lines"));
        }
        Ok(model)
    }

    pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_snapshot(BufReader::new(file))
    }
}
