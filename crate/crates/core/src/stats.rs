//! Per-class bigram statistics over a corpus side.
//!
//! Counts bigrams per label, derives Laplace-smoothed conditional label
//! distributions `p(c|w) = (count[w][c] + α) / (Σ count[w] + 3α)`, ranks
//! bigrams by ascending label entropy (low entropy = label-informative), and
//! builds train/test comparison reports.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::corpus::{extract_bigrams, Bigram, Corpus, Label, Side};
use crate::error::{Error, Result};

/// `ln 3`, the entropy of the uniform three-class distribution.
pub const MAX_ENTROPY: f64 = 1.0986122886681098;

/// How bigram occurrences are counted per instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// Every occurrence counts.
    Multiplicity,
    /// At most one count per instance.
    Presence,
}

impl CountMode {
    pub fn as_str(self) -> &'static str {
        match self {
            CountMode::Multiplicity => "multiplicity",
            CountMode::Presence => "presence",
        }
    }
}

impl Serialize for CountMode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

/// A probability distribution over the three labels, indexed by
/// [`Label::index`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassDistribution {
    pub p: [f64; 3],
}

impl ClassDistribution {
    pub fn uniform() -> Self {
        ClassDistribution {
            p: [1.0 / 3.0; 3],
        }
    }

    /// Laplace-smoothed distribution from raw per-class counts.
    pub fn from_counts(counts: [u64; 3], alpha: f64) -> Self {
        let total: u64 = counts.iter().sum();
        let denom = total as f64 + 3.0 * alpha;
        ClassDistribution {
            p: [
                (counts[0] as f64 + alpha) / denom,
                (counts[1] as f64 + alpha) / denom,
                (counts[2] as f64 + alpha) / denom,
            ],
        }
    }

    /// Normalizes log-space weights; `-inf` entries become zero probability.
    pub fn from_log_weights(lw: [f64; 3]) -> Self {
        let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return ClassDistribution::uniform();
        }
        let mut p = [0.0; 3];
        let mut sum = 0.0;
        for (out, w) in p.iter_mut().zip(lw) {
            *out = (w - max).exp();
            sum += *out;
        }
        for out in &mut p {
            *out /= sum;
        }
        ClassDistribution { p }
    }

    pub fn get(&self, label: Label) -> f64 {
        self.p[label.index()]
    }

    /// Natural-log entropy, with `0 · ln 0` taken as zero.
    pub fn entropy(&self) -> f64 {
        -self
            .p
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// Most probable label; ties break toward the smaller label in
    /// [`Label::ALL`] order.
    pub fn argmax(&self) -> Label {
        let mut best = Label::Contradiction;
        for &label in &Label::ALL[1..] {
            if self.p[label.index()] > self.p[best.index()] {
                best = label;
            }
        }
        best
    }

    pub fn max_prob(&self) -> f64 {
        self.p.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

impl Serialize for ClassDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(3))?;
        for label in Label::ALL {
            map.serialize_entry(label.as_str(), &self.p[label.index()])?;
        }
        map.end()
    }
}

/// Per-class bigram counts for one sentence side of a corpus.
#[derive(Clone, Debug)]
pub struct BigramTable {
    counts: HashMap<Bigram, [u64; 3]>,
    class_totals: [u64; 3],
    instance_totals: [u64; 3],
    side: Side,
    mode: CountMode,
    alpha: f64,
}

impl BigramTable {
    fn empty(side: Side, mode: CountMode, alpha: f64) -> Self {
        BigramTable {
            counts: HashMap::new(),
            class_totals: [0; 3],
            instance_totals: [0; 3],
            side,
            mode,
            alpha,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn mode(&self) -> CountMode {
        self.mode
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn class_totals(&self) -> [u64; 3] {
        self.class_totals
    }

    pub fn instance_totals(&self) -> [u64; 3] {
        self.instance_totals
    }

    pub fn distinct_bigrams(&self) -> usize {
        self.counts.len()
    }

    pub fn counts_for(&self, w: &Bigram) -> Option<[u64; 3]> {
        self.counts.get(w).copied()
    }

    pub fn total_count(&self, w: &Bigram) -> u64 {
        self.counts.get(w).map_or(0, |c| c.iter().sum())
    }

    /// Merges two tables built with identical side, mode, and alpha.
    pub fn merge(mut self, other: BigramTable) -> Result<BigramTable> {
        if self.side != other.side || self.mode != other.mode || self.alpha != other.alpha {
            return Err(Error::TableMismatch(format!(
                "cannot merge ({}, {}, alpha {}) with ({}, {}, alpha {})",
                self.side.as_str(),
                self.mode.as_str(),
                self.alpha,
                other.side.as_str(),
                other.mode.as_str(),
                other.alpha,
            )));
        }
        for (bigram, counts) in other.counts {
            let entry = self.counts.entry(bigram).or_insert([0; 3]);
            for (a, b) in entry.iter_mut().zip(counts) {
                *a += b;
            }
        }
        for (a, b) in self.class_totals.iter_mut().zip(other.class_totals) {
            *a += b;
        }
        for (a, b) in self.instance_totals.iter_mut().zip(other.instance_totals) {
            *a += b;
        }
        Ok(self)
    }

    fn accumulate(&mut self, tokens: &[String], label: Label) {
        let idx = label.index();
        self.instance_totals[idx] += 1;
        let bigrams = extract_bigrams(tokens);
        match self.mode {
            CountMode::Multiplicity => {
                for w in bigrams {
                    self.counts.entry(w).or_insert([0; 3])[idx] += 1;
                    self.class_totals[idx] += 1;
                }
            }
            CountMode::Presence => {
                let distinct: HashSet<Bigram> = bigrams.into_iter().collect();
                for w in distinct {
                    self.counts.entry(w).or_insert([0; 3])[idx] += 1;
                    self.class_totals[idx] += 1;
                }
            }
        }
    }
}

/// Counts bigrams on one side of the corpus, per label.
pub fn count_bigrams(
    corpus: &Corpus,
    side: Side,
    alpha: f64,
    mode: CountMode,
) -> Result<BigramTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParam(format!(
            "alpha must be a finite number >= 0, got {alpha}"
        )));
    }
    corpus
        .instances
        .par_iter()
        .fold(
            || BigramTable::empty(side, mode, alpha),
            |mut table, inst| {
                table.accumulate(inst.tokens(side), inst.label);
                table
            },
        )
        .reduce_with(|a, b| a.merge(b).expect("partial tables share parameters"))
        .ok_or(Error::EmptyCorpus)
}

/// Smoothed `p(c|w)`; a bigram absent from the table yields the uniform
/// distribution.
pub fn conditional_dist(table: &BigramTable, w: &Bigram) -> Result<ClassDistribution> {
    if !(table.alpha > 0.0) {
        return Err(Error::InvalidParam(format!(
            "alpha must be > 0 to form a distribution, got {}",
            table.alpha
        )));
    }
    let counts = table.counts_for(w).unwrap_or([0; 3]);
    Ok(ClassDistribution::from_counts(counts, table.alpha))
}

/// A bigram with its smoothed label distribution and entropy.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RankedBigram {
    pub bigram: Bigram,
    pub dist: ClassDistribution,
    pub entropy: f64,
    pub total_count: u64,
    pub per_class_counts: [u64; 3],
}

/// Bigrams whose raw total count strictly exceeds `min_count`, sorted by
/// ascending entropy (ties: descending total count, then bigram order),
/// truncated to `top_k`.
pub fn rank_bigrams(
    table: &BigramTable,
    min_count: u64,
    top_k: usize,
) -> Result<Vec<RankedBigram>> {
    if top_k == 0 {
        return Err(Error::InvalidParam("top_k must be >= 1".into()));
    }
    let mut ranked = Vec::new();
    for (bigram, &counts) in &table.counts {
        let total: u64 = counts.iter().sum();
        if total <= min_count {
            continue;
        }
        let dist = conditional_dist(table, bigram)?;
        ranked.push(RankedBigram {
            bigram: bigram.clone(),
            dist,
            entropy: dist.entropy(),
            total_count: total,
            per_class_counts: counts,
        });
    }
    ranked.sort_unstable_by(|a, b| {
        a.entropy
            .total_cmp(&b.entropy)
            .then_with(|| b.total_count.cmp(&a.total_count))
            .then_with(|| a.bigram.cmp(&b.bigram))
    });
    ranked.truncate(top_k);
    Ok(ranked)
}

/// Raw-count odds of `target` versus all other classes combined.
///
/// `f64::INFINITY` when no other class has seen the bigram.
pub fn odds_ratio(table: &BigramTable, w: &Bigram, target: Label) -> Result<f64> {
    let counts = table
        .counts_for(w)
        .ok_or_else(|| Error::AbsentBigram(w.to_string()))?;
    let favored = counts[target.index()] as f64;
    let rest: u64 = Label::ALL
        .iter()
        .filter(|&&c| c != target)
        .map(|&c| counts[c.index()])
        .sum();
    if rest == 0 {
        Ok(f64::INFINITY)
    } else {
        Ok(favored / rest as f64)
    }
}

/// Statistics for one bigram within one split.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SplitStats {
    pub count: u64,
    pub per_class_counts: [u64; 3],
    pub dist: ClassDistribution,
    pub entropy: f64,
    /// The bigram's share of its split's total bigram mass.
    pub share: f64,
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct ComparisonRow {
    pub bigram: Bigram,
    pub train: SplitStats,
    pub test: Option<SplitStats>,
}

/// Train/test comparison over a ranked bigram list.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ComparisonReport {
    pub side: Side,
    pub mode: CountMode,
    pub alpha: f64,
    pub rows: Vec<ComparisonRow>,
}

fn split_stats(table: &BigramTable, w: &Bigram) -> Result<SplitStats> {
    let counts = table.counts_for(w).unwrap_or([0; 3]);
    let count: u64 = counts.iter().sum();
    let dist = conditional_dist(table, w)?;
    let mass: u64 = table.class_totals.iter().sum();
    Ok(SplitStats {
        count,
        per_class_counts: counts,
        dist,
        entropy: dist.entropy(),
        share: if mass == 0 {
            0.0
        } else {
            count as f64 / mass as f64
        },
    })
}

/// Per-bigram train vs. test distributions for the ranked list.
///
/// Both tables must have been built with the same side and counting mode.
pub fn compare_splits(
    train: &BigramTable,
    test: &BigramTable,
    ranked: &[RankedBigram],
) -> Result<ComparisonReport> {
    if train.side != test.side || train.mode != test.mode {
        return Err(Error::TableMismatch(format!(
            "train is ({}, {}), test is ({}, {})",
            train.side.as_str(),
            train.mode.as_str(),
            test.side.as_str(),
            test.mode.as_str(),
        )));
    }
    let rows = ranked
        .iter()
        .map(|r| {
            Ok(ComparisonRow {
                bigram: r.bigram.clone(),
                train: split_stats(train, &r.bigram)?,
                test: Some(split_stats(test, &r.bigram)?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        side: train.side,
        mode: train.mode,
        alpha: train.alpha,
        rows,
    })
}

/// Train-only variant of [`compare_splits`] for runs without a test split.
pub fn summarize_split(train: &BigramTable, ranked: &[RankedBigram]) -> Result<ComparisonReport> {
    let rows = ranked
        .iter()
        .map(|r| {
            Ok(ComparisonRow {
                bigram: r.bigram.clone(),
                train: split_stats(train, &r.bigram)?,
                test: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ComparisonReport {
        side: train.side,
        mode: train.mode,
        alpha: train.alpha,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{tokenize, Instance};
    use proptest::prelude::*;

    fn instance(id: &str, hypothesis: &str, label: Label) -> Instance {
        Instance {
            id: id.to_string(),
            premise_tokens: tokenize("a premise here"),
            hypothesis_tokens: tokenize(hypothesis),
            label,
            raw_record: String::new(),
        }
    }

    fn corpus_of(instances: Vec<Instance>) -> Corpus {
        Corpus {
            instances,
            source_path: "<test>".into(),
            side_note: String::new(),
        }
    }

    #[test]
    fn count_single_instance() {
        let corpus = corpus_of(vec![instance("1", "nobody is singing", Label::Contradiction)]);
        let table = count_bigrams(&corpus, Side::Hypothesis, 1.0, CountMode::Multiplicity).unwrap();
        let counts = table.counts_for(&Bigram::new("nobody", "is")).unwrap();
        assert_eq!(counts[Label::Contradiction.index()], 1);
        assert_eq!(counts[Label::Neutral.index()], 0);
        assert_eq!(counts[Label::Entailment.index()], 0);
        assert_eq!(table.class_totals()[Label::Contradiction.index()], 2);
    }

    #[test]
    fn count_symmetric_labels() {
        let corpus = corpus_of(vec![
            instance("1", "nobody is singing", Label::Contradiction),
            instance("2", "nobody is singing", Label::Neutral),
            instance("3", "nobody is singing", Label::Entailment),
        ]);
        let table = count_bigrams(&corpus, Side::Hypothesis, 1.0, CountMode::Multiplicity).unwrap();
        assert_eq!(
            table.counts_for(&Bigram::new("nobody", "is")).unwrap(),
            [1, 1, 1]
        );
    }

    #[test]
    fn count_presence_vs_multiplicity() {
        let corpus = corpus_of(vec![instance("1", "a b a b", Label::Neutral)]);
        let multi = count_bigrams(&corpus, Side::Hypothesis, 1.0, CountMode::Multiplicity).unwrap();
        assert_eq!(
            multi.counts_for(&Bigram::new("a", "b")).unwrap()[Label::Neutral.index()],
            2
        );
        let pres = count_bigrams(&corpus, Side::Hypothesis, 1.0, CountMode::Presence).unwrap();
        assert_eq!(
            pres.counts_for(&Bigram::new("a", "b")).unwrap()[Label::Neutral.index()],
            1
        );
    }

    #[test]
    fn count_empty_corpus_errors() {
        let corpus = corpus_of(vec![]);
        assert!(matches!(
            count_bigrams(&corpus, Side::Hypothesis, 1.0, CountMode::Multiplicity),
            Err(Error::EmptyCorpus)
        ));
    }

    fn table_with(counts: [u64; 3]) -> BigramTable {
        let mut table = BigramTable::empty(Side::Hypothesis, CountMode::Multiplicity, 1.0);
        table.counts.insert(Bigram::new("w", "w"), counts);
        table.class_totals = counts;
        table
    }

    #[test]
    fn dist_symmetric_counts() {
        let table = table_with([5, 5, 5]);
        let dist = conditional_dist(&table, &Bigram::new("w", "w")).unwrap();
        for p in dist.p {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dist_hand_computed() {
        // counts (8, 1, 0), alpha 1 -> (9/12, 2/12, 1/12)
        let table = table_with([8, 1, 0]);
        let dist = conditional_dist(&table, &Bigram::new("w", "w")).unwrap();
        assert!((dist.p[0] - 0.75).abs() < 1e-12);
        assert!((dist.p[1] - 2.0 / 12.0).abs() < 1e-12);
        assert!((dist.p[2] - 1.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn dist_unseen_is_uniform() {
        let table = table_with([8, 1, 0]);
        let dist = conditional_dist(&table, &Bigram::new("never", "seen")).unwrap();
        for p in dist.p {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dist_requires_positive_alpha() {
        let mut table = table_with([1, 1, 1]);
        table.alpha = 0.0;
        assert!(conditional_dist(&table, &Bigram::new("w", "w")).is_err());
    }

    #[test]
    fn entropy_values() {
        assert!((ClassDistribution::uniform().entropy() - MAX_ENTROPY).abs() < 1e-12);
        let degenerate = ClassDistribution { p: [1.0, 0.0, 0.0] };
        assert_eq!(degenerate.entropy(), 0.0);
        // (0.75, 1/6, 1/12), frozen from hand arithmetic
        let dist = ClassDistribution::from_counts([8, 1, 0], 1.0);
        assert!((dist.entropy() - 0.7214636862).abs() < 1e-9);
        // cross-check against a direct summation
        let direct: f64 = -dist.p.iter().map(|p| p * p.ln()).sum::<f64>();
        assert!((dist.entropy() - direct).abs() < 1e-12);
    }

    fn ranked_table() -> BigramTable {
        let mut table = BigramTable::empty(Side::Hypothesis, CountMode::Multiplicity, 1.0);
        table.counts.insert(Bigram::new("nobody", "is"), [40, 2, 1]); // low entropy
        table.counts.insert(Bigram::new("a", "man"), [15, 14, 14]); // high entropy
        table.counts.insert(Bigram::new("tall", "human"), [2, 40, 1]); // low entropy
        table.counts.insert(Bigram::new("rare", "pair"), [3, 0, 0]); // below threshold
        table.class_totals = [60, 56, 16];
        table
    }

    #[test]
    fn rank_orders_by_entropy_and_filters() {
        let table = ranked_table();
        let ranked = rank_bigrams(&table, 10, 10).unwrap();
        assert_eq!(ranked.len(), 3);
        assert!(ranked[0].entropy <= ranked[1].entropy);
        assert!(ranked[1].entropy <= ranked[2].entropy);
        assert_eq!(ranked[2].bigram, Bigram::new("a", "man"));
        let top = rank_bigrams(&table, 10, 1).unwrap();
        assert_eq!(top.len(), 1);
    }

    #[test]
    fn rank_threshold_is_strict() {
        let table = ranked_table();
        // "rare pair" totals 3: excluded at min_count 3, included at 2
        let at3 = rank_bigrams(&table, 3, 10).unwrap();
        assert!(at3.iter().all(|r| r.bigram != Bigram::new("rare", "pair")));
        let at2 = rank_bigrams(&table, 2, 10).unwrap();
        assert!(at2.iter().any(|r| r.bigram == Bigram::new("rare", "pair")));
    }

    #[test]
    fn rank_single_qualifier_and_empty() {
        let table = ranked_table();
        let ranked = rank_bigrams(&table, 42, 10).unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].bigram, Bigram::new("a", "man"));
        let none = rank_bigrams(&table, 1000, 10).unwrap();
        assert!(none.is_empty());
        assert!(rank_bigrams(&table, 0, 0).is_err());
    }

    #[test]
    fn rank_tie_break_is_deterministic() {
        let mut table = BigramTable::empty(Side::Hypothesis, CountMode::Multiplicity, 1.0);
        // identical distributions and totals: lexicographic bigram order decides
        table.counts.insert(Bigram::new("b", "x"), [4, 4, 4]);
        table.counts.insert(Bigram::new("a", "x"), [4, 4, 4]);
        table.counts.insert(Bigram::new("c", "x"), [8, 8, 8]); // larger total wins first
        table.class_totals = [16, 16, 16];
        let ranked = rank_bigrams(&table, 0, 10).unwrap();
        assert_eq!(ranked[0].bigram, Bigram::new("c", "x"));
        assert_eq!(ranked[1].bigram, Bigram::new("a", "x"));
        assert_eq!(ranked[2].bigram, Bigram::new("b", "x"));
    }

    #[test]
    fn odds_cases() {
        let table = table_with([222, 1, 0]);
        let w = Bigram::new("w", "w");
        assert!((odds_ratio(&table, &w, Label::Contradiction).unwrap() - 222.0).abs() < 1e-12);
        let even = table_with([4, 2, 2]);
        assert!((odds_ratio(&even, &w, Label::Contradiction).unwrap() - 1.0).abs() < 1e-12);
        let solo = table_with([5, 0, 0]);
        assert!(odds_ratio(&solo, &w, Label::Contradiction)
            .unwrap()
            .is_infinite());
        assert!(matches!(
            odds_ratio(&table, &Bigram::new("no", "pair"), Label::Neutral),
            Err(Error::AbsentBigram(_))
        ));
    }

    #[test]
    fn compare_handles_absent_and_identity() {
        let train = ranked_table();
        let ranked = rank_bigrams(&train, 10, 10).unwrap();
        let mut test = BigramTable::empty(Side::Hypothesis, CountMode::Multiplicity, 1.0);
        test.counts.insert(Bigram::new("nobody", "is"), [4, 0, 0]);
        test.class_totals = [4, 0, 0];
        let report = compare_splits(&train, &test, &ranked).unwrap();
        let absent = report
            .rows
            .iter()
            .find(|r| r.bigram == Bigram::new("a", "man"))
            .unwrap();
        let test_stats = absent.test.as_ref().unwrap();
        assert_eq!(test_stats.count, 0);
        for p in test_stats.dist.p {
            assert!((p - 1.0 / 3.0).abs() < 1e-12);
        }

        let identical = compare_splits(&train, &train.clone(), &ranked).unwrap();
        for row in identical.rows {
            let t = row.test.unwrap();
            assert_eq!(row.train.per_class_counts, t.per_class_counts);
            assert_eq!(row.train.dist, t.dist);
        }
    }

    #[test]
    fn compare_rejects_mismatched_tables() {
        let train = ranked_table();
        let ranked = rank_bigrams(&train, 10, 10).unwrap();
        let premise = BigramTable::empty(Side::Premise, CountMode::Multiplicity, 1.0);
        assert!(matches!(
            compare_splits(&train, &premise, &ranked),
            Err(Error::TableMismatch(_))
        ));
        let presence = BigramTable::empty(Side::Hypothesis, CountMode::Presence, 1.0);
        assert!(matches!(
            compare_splits(&train, &presence, &ranked),
            Err(Error::TableMismatch(_))
        ));
    }

    #[test]
    fn merge_rejects_mismatched_parameters() {
        let a = BigramTable::empty(Side::Hypothesis, CountMode::Multiplicity, 1.0);
        let b = BigramTable::empty(Side::Premise, CountMode::Multiplicity, 1.0);
        assert!(a.merge(b).is_err());
    }

    fn arb_counts() -> impl Strategy<Value = [u64; 3]> {
        (0u64..500, 0u64..500, 0u64..500).prop_map(|(a, b, c)| [a, b, c])
    }

    fn arb_corpus() -> impl Strategy<Value = Corpus> {
        proptest::collection::vec(
            (
                proptest::collection::vec("[a-d]{1,2}", 1..8),
                0usize..3,
            ),
            1..40,
        )
        .prop_map(|items| {
            let instances = items
                .into_iter()
                .enumerate()
                .map(|(i, (tokens, label))| Instance {
                    id: format!("i{i:03}"),
                    premise_tokens: vec!["p".into()],
                    hypothesis_tokens: tokens,
                    label: Label::ALL[label],
                    raw_record: String::new(),
                })
                .collect();
            Corpus {
                instances,
                source_path: "<prop>".into(),
                side_note: String::new(),
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn dist_sums_to_one_and_entropy_bounded(counts in arb_counts(), alpha in 0.01f64..10.0) {
            let dist = ClassDistribution::from_counts(counts, alpha);
            let sum: f64 = dist.p.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
            let h = dist.entropy();
            prop_assert!(h >= 0.0 && h <= MAX_ENTROPY + 1e-9);
        }

        #[test]
        fn alpha_monotone_toward_uniform(counts in arb_counts(), alpha in 0.01f64..10.0, factor in 1.5f64..20.0) {
            let lo = ClassDistribution::from_counts(counts, alpha).entropy();
            let hi = ClassDistribution::from_counts(counts, alpha * factor).entropy();
            prop_assert!(hi >= lo - 1e-12, "entropy decreased: {lo} -> {hi}");
            let uniform = counts[0] == counts[1] && counts[1] == counts[2];
            if !uniform && counts.iter().sum::<u64>() > 0 {
                prop_assert!(hi > lo, "expected strict increase for skewed counts");
            }
        }

        #[test]
        fn count_merge_is_associative(corpus in arb_corpus(), split in 0usize..40) {
            let n = corpus.len();
            let cut = split % n.max(1);
            if cut == 0 || cut == n {
                return Ok(());
            }
            let left = Corpus {
                instances: corpus.instances[..cut].to_vec(),
                source_path: String::new(),
                side_note: String::new(),
            };
            let right = Corpus {
                instances: corpus.instances[cut..].to_vec(),
                source_path: String::new(),
                side_note: String::new(),
            };
            let whole = count_bigrams(&corpus, Side::Hypothesis, 1.0, CountMode::Multiplicity).unwrap();
            let merged = count_bigrams(&left, Side::Hypothesis, 1.0, CountMode::Multiplicity)
                .unwrap()
                .merge(count_bigrams(&right, Side::Hypothesis, 1.0, CountMode::Multiplicity).unwrap())
                .unwrap();
            prop_assert_eq!(whole.class_totals(), merged.class_totals());
            prop_assert_eq!(whole.instance_totals(), merged.instance_totals());
            prop_assert_eq!(&whole.counts, &merged.counts);
        }

        #[test]
        fn class_totals_match_column_sums(corpus in arb_corpus()) {
            let table = count_bigrams(&corpus, Side::Hypothesis, 1.0, CountMode::Multiplicity).unwrap();
            let mut sums = [0u64; 3];
            for counts in table.counts.values() {
                for (s, c) in sums.iter_mut().zip(counts) {
                    *s += c;
                }
            }
            prop_assert_eq!(sums, table.class_totals());
        }
    }
}
