//! Corpus ingestion and normalization for SNLI-style JSONL records.
//!
//! A [`Corpus`] is an ordered collection of [`Instance`]s. Every instance
//! keeps the original record line verbatim so that writing a corpus back out
//! reproduces the surviving input records byte-identically.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::{Serialize, Serializer};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The three NLI labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Contradiction,
    Entailment,
    Neutral,
}

impl Label {
    /// All labels in canonical (tie-break) order.
    pub const ALL: [Label; 3] = [Label::Contradiction, Label::Entailment, Label::Neutral];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Contradiction => "contradiction",
            Label::Entailment => "entailment",
            Label::Neutral => "neutral",
        }
    }

    /// Maps a `gold_label` field to a label. `"-"` (no annotator consensus)
    /// and anything unrecognized map to `None`.
    pub fn from_gold(s: &str) -> Option<Label> {
        match s {
            "contradiction" => Some(Label::Contradiction),
            "entailment" => Some(Label::Entailment),
            "neutral" => Some(Label::Neutral),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// An ordered pair of adjacent tokens.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bigram {
    pub first: String,
    pub second: String,
}

impl Bigram {
    pub fn new(first: impl Into<String>, second: impl Into<String>) -> Self {
        Bigram {
            first: first.into(),
            second: second.into(),
        }
    }
}

impl fmt::Display for Bigram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.first, self.second)
    }
}

impl Serialize for Bigram {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{} {}", self.first, self.second))
    }
}

/// One labeled premise/hypothesis pair.
#[derive(Clone, Debug)]
pub struct Instance {
    /// Stable identifier, unique within its corpus (`pairID` when present,
    /// otherwise the 1-based input line number).
    pub id: String,
    pub premise_tokens: Vec<String>,
    pub hypothesis_tokens: Vec<String>,
    pub label: Label,
    /// The original JSONL line, preserved verbatim for round-tripping.
    pub raw_record: String,
}

/// Ordered collection of instances plus provenance.
#[derive(Clone, Debug)]
pub struct Corpus {
    /// Instances in load order; every iterating operation uses this order.
    pub instances: Vec<Instance>,
    pub source_path: String,
    pub side_note: String,
}

/// Counts of records dropped during loading.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub loaded: usize,
    /// Records with `gold_label == "-"`.
    pub skipped_no_consensus: usize,
    /// Records whose hypothesis tokenizes to nothing.
    pub skipped_empty_hypothesis: usize,
}

/// Supported input record formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    SnliJsonl,
}

/// Sentence side selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Hypothesis,
    Premise,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Hypothesis => "hypothesis",
            Side::Premise => "premise",
        }
    }
}

impl Serialize for Side {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// Instance count plus a content hash, used to pin corpora in reports and
/// manifests.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CorpusFingerprint {
    pub instances: usize,
    pub sha256: String,
}

impl Instance {
    pub fn tokens(&self, side: Side) -> &[String] {
        match side {
            Side::Hypothesis => &self.hypothesis_tokens,
            Side::Premise => &self.premise_tokens,
        }
    }
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Per-label instance counts, indexed by [`Label::index`].
    pub fn label_counts(&self) -> [u64; 3] {
        let mut counts = [0u64; 3];
        for inst in &self.instances {
            counts[inst.label.index()] += 1;
        }
        counts
    }

    /// Content hash over the raw records, in order.
    pub fn fingerprint(&self) -> CorpusFingerprint {
        let mut hasher = Sha256::new();
        for inst in &self.instances {
            hasher.update(inst.raw_record.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        CorpusFingerprint {
            instances: self.instances.len(),
            sha256: hex,
        }
    }

    /// Writes the corpus in its input record format, one raw record per line.
    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for inst in &self.instances {
            out.write_all(inst.raw_record.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

/// Lowercases and splits `text` into maximal alphanumeric runs.
///
/// Unicode letters and digits form tokens; everything else separates them.
/// Characters introduced by lowercasing that are not alphanumeric (e.g. the
/// combining dot from `İ`) are dropped so the output re-tokenizes to itself.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase().filter(|c| c.is_alphanumeric()));
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Adjacent token pairs with multiplicity; length is `max(0, |tokens| - 1)`.
pub fn extract_bigrams(tokens: &[String]) -> Vec<Bigram> {
    tokens
        .windows(2)
        .map(|w| Bigram::new(w[0].clone(), w[1].clone()))
        .collect()
}

#[derive(Deserialize)]
struct RawRecord {
    gold_label: String,
    sentence1: String,
    sentence2: String,
    #[serde(rename = "pairID")]
    pair_id: Option<String>,
}

enum ParsedLine {
    Instance(Box<Instance>, usize),
    SkipNoConsensus,
    SkipEmptyHypothesis,
    Blank,
}

/// Loads a line-delimited NLI corpus.
///
/// Records with `gold_label == "-"` are skipped and counted, as are records
/// whose hypothesis tokenizes to nothing. Any other unparseable record is an
/// error naming its line number.
pub fn load_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
) -> Result<(Corpus, LoadReport)> {
    let CorpusFormat::SnliJsonl = format;
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let lines: Vec<String> = reader
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;

    let parsed: Vec<Result<ParsedLine>> = lines
        .into_par_iter()
        .enumerate()
        .map(|(idx, line)| parse_line(path, idx + 1, line))
        .collect();

    let mut instances = Vec::new();
    let mut report = LoadReport::default();
    let mut line_of: Vec<usize> = Vec::new();
    for item in parsed {
        match item? {
            ParsedLine::Instance(inst, line) => {
                instances.push(*inst);
                line_of.push(line);
            }
            ParsedLine::SkipNoConsensus => report.skipped_no_consensus += 1,
            ParsedLine::SkipEmptyHypothesis => report.skipped_empty_hypothesis += 1,
            ParsedLine::Blank => {}
        }
    }

    let mut seen = HashSet::with_capacity(instances.len());
    for (inst, line) in instances.iter().zip(&line_of) {
        if !seen.insert(inst.id.as_str()) {
            return Err(Error::MalformedRecord {
                path: path.to_path_buf(),
                line: *line,
                msg: format!("duplicate instance id \"{}\"", inst.id),
            });
        }
    }

    if instances.is_empty() {
        return Err(Error::NoValidInstances {
            path: path.to_path_buf(),
        });
    }
    report.loaded = instances.len();

    Ok((
        Corpus {
            instances,
            source_path: path.display().to_string(),
            side_note: String::new(),
        },
        report,
    ))
}

fn parse_line(path: &Path, line_no: usize, line: String) -> Result<ParsedLine> {
    if line.trim().is_empty() {
        return Ok(ParsedLine::Blank);
    }
    let record: RawRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
        path: path.to_path_buf(),
        line: line_no,
        msg: e.to_string(),
    })?;
    if record.gold_label == "-" {
        return Ok(ParsedLine::SkipNoConsensus);
    }
    let label = Label::from_gold(&record.gold_label).ok_or_else(|| Error::MalformedRecord {
        path: path.to_path_buf(),
        line: line_no,
        msg: format!("unrecognized gold_label \"{}\"", record.gold_label),
    })?;
    let hypothesis_tokens = tokenize(&record.sentence2);
    if hypothesis_tokens.is_empty() {
        return Ok(ParsedLine::SkipEmptyHypothesis);
    }
    let id = record
        .pair_id
        .unwrap_or_else(|| line_no.to_string());
    Ok(ParsedLine::Instance(
        Box::new(Instance {
            id,
            premise_tokens: tokenize(&record.sentence1),
            hypothesis_tokens,
            label,
            raw_record: line,
        }),
        line_no,
    ))
}

/// Permutes premises across instances with a seeded derangement-attempting
/// shuffle; hypothesis/label pairs stay put.
///
/// The multiset of premises is preserved. A Fisher-Yates pass is followed by
/// a fix-up that cycles any fixed points, so for `n >= 2` no instance keeps
/// its own premise. Returns the shuffled corpus and the residual fixed-point
/// count.
pub fn shuffle_premises(corpus: &Corpus, seed: u64) -> Result<(Corpus, usize)> {
    let n = corpus.len();
    if n < 2 {
        return Err(Error::CorpusTooSmall { need: 2, got: n });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }

    let fixed: Vec<usize> = (0..n).filter(|&i| perm[i] == i).collect();
    match fixed.len() {
        0 => {}
        1 => {
            let i = fixed[0];
            let j = (i + 1) % n;
            perm.swap(i, j);
        }
        _ => {
            // Cycle the fixed points among themselves.
            for k in 0..fixed.len() {
                perm[fixed[k]] = fixed[(k + 1) % fixed.len()];
            }
        }
    }
    let fixed_points = (0..n).filter(|&i| perm[i] == i).count();

    let mut instances = Vec::with_capacity(n);
    for i in 0..n {
        let donor = &corpus.instances[perm[i]];
        let base = &corpus.instances[i];
        let raw_record = graft_premise_fields(&base.raw_record, &donor.raw_record)?;
        instances.push(Instance {
            id: base.id.clone(),
            premise_tokens: donor.premise_tokens.clone(),
            hypothesis_tokens: base.hypothesis_tokens.clone(),
            label: base.label,
            raw_record,
        });
    }

    Ok((
        Corpus {
            instances,
            source_path: corpus.source_path.clone(),
            side_note: format!("premises shuffled (seed {seed}, {fixed_points} fixed points)"),
        },
        fixed_points,
    ))
}

/// Replaces every `sentence1*` field of `base` with the donor's, keeping the
/// remaining fields untouched.
fn graft_premise_fields(base: &str, donor: &str) -> Result<String> {
    let mut rec: serde_json::Value =
        serde_json::from_str(base).map_err(|e| Error::InvalidParam(e.to_string()))?;
    let donor_rec: serde_json::Value =
        serde_json::from_str(donor).map_err(|e| Error::InvalidParam(e.to_string()))?;
    if let (Some(obj), Some(donor_obj)) = (rec.as_object_mut(), donor_rec.as_object()) {
        for (key, value) in donor_obj {
            if key.starts_with("sentence1") {
                obj.insert(key.clone(), value.clone());
            }
        }
    }
    serde_json::to_string(&rec).map_err(|e| Error::InvalidParam(e.to_string()))
}
