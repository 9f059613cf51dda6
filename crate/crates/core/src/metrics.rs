//! Topic-quality metrics: topic uniqueness (TU), document-level NPMI,
//! permutation-aligned recovery precision and a linear classification probe.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::BowDocument;
use crate::nn::{AdamConfig, AdamState, Matrix, Parameters};
use crate::{Error, Result};

/// Up to this many topics recovery precision enumerates every permutation.
pub const EXHAUSTIVE_ALIGNMENT_MAX_TOPICS: usize = 8;

/// `K` ranked lists of `L` distinct word ids each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicSet {
    topics: Vec<Vec<usize>>,
}

impl TopicSet {
    pub fn new(topics: Vec<Vec<usize>>) -> Result<Self> {
        let l = topics.first().map(Vec::len).unwrap_or(0);
        if l == 0 {
            return Err(Error::invalid("a topic set needs at least one non-empty topic"));
        }
        for (k, t) in topics.iter().enumerate() {
            if t.len() != l {
                return Err(Error::dim(format!("topic {k} has {} words, topic 0 has {l}", t.len())));
            }
            let distinct: HashSet<_> = t.iter().collect();
            if distinct.len() != l {
                return Err(Error::invalid(format!("topic {k} repeats a word")));
            }
        }
        Ok(Self { topics })
    }

    pub fn topics(&self) -> &[Vec<usize>] {
        &self.topics
    }

    pub fn num_topics(&self) -> usize {
        self.topics.len()
    }

    /// Words per topic, `L`.
    pub fn words_per_topic(&self) -> usize {
        self.topics[0].len()
    }

    /// Every distinct word id across topics, ascending.
    pub fn distinct_words(&self) -> Vec<usize> {
        let mut words: Vec<usize> = self.topics.iter().flatten().copied().collect();
        words.sort_unstable();
        words.dedup();
        words
    }

    /// One line per topic, ids separated by single spaces.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.topics {
            let line: Vec<String> = t.iter().map(usize::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let topics = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, line)| {
                line.split_whitespace()
                    .map(|w| {
                        w.parse::<usize>()
                            .map_err(|_| Error::parse(i + 1, format!("bad word id `{w}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(topics)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicScores {
    pub per_topic: Vec<f64>,
    pub mean: f64,
}

impl TopicScores {
    fn from_per_topic(per_topic: Vec<f64>) -> Self {
        let mean = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
        Self { per_topic, mean }
    }
}

/// `TU(k) = (1/L) Σ_l 1/cnt(l, k)` where `cnt` counts how many topics list
/// the word; ranges over `[1/K, 1]`.
pub fn topic_uniqueness(topics: &TopicSet) -> TopicScores {
    let mut cnt: HashMap<usize, usize> = HashMap::new();
    for t in topics.topics() {
        for &w in t {
            *cnt.entry(w).or_default() += 1;
        }
    }
    let l = topics.words_per_topic() as f64;
    TopicScores::from_per_topic(
        topics
            .topics()
            .iter()
            .map(|t| t.iter().map(|w| 1.0 / cnt[w] as f64).sum::<f64>() / l)
            .collect(),
    )
}

/// Document frequencies and pairwise joint document frequencies for a fixed
/// set of words.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceIndex {
    position: HashMap<usize, usize>,
    df: Vec<u64>,
    /// Row-major `n × n`, symmetric.
    joint: Vec<u64>,
    num_docs: u64,
}

impl CooccurrenceIndex {
    pub fn num_docs(&self) -> u64 {
        self.num_docs
    }

    /// Documents containing `w`, or `None` when `w` was not indexed.
    pub fn df(&self, w: usize) -> Option<u64> {
        self.position.get(&w).map(|&i| self.df[i])
    }

    /// Documents containing both words, or `None` when either was not indexed.
    pub fn joint(&self, a: usize, b: usize) -> Option<u64> {
        let n = self.df.len();
        let i = *self.position.get(&a)?;
        let j = *self.position.get(&b)?;
        Some(self.joint[i * n + j])
    }

    pub fn contains(&self, w: usize) -> bool {
        self.position.contains_key(&w)
    }
}

/// Binary document-level co-occurrence counts restricted to `words`.
pub fn build_cooccurrence_index(docs: &[BowDocument], words: &[usize]) -> CooccurrenceIndex {
    let mut sorted = words.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let position: HashMap<usize, usize> = sorted.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let n = sorted.len();
    let mut df = vec![0u64; n];
    let mut joint = vec![0u64; n * n];
    let mut present = Vec::new();
    for doc in docs {
        present.clear();
        present.extend(doc.entries().iter().filter_map(|(id, _)| position.get(id).copied()));
        for (a, &i) in present.iter().enumerate() {
            df[i] += 1;
            joint[i * n + i] += 1;
            for &j in &present[a + 1..] {
                joint[i * n + j] += 1;
                joint[j * n + i] += 1;
            }
        }
    }
    CooccurrenceIndex {
        position,
        df,
        joint,
        num_docs: docs.len() as u64,
    }
}

/// NPMI of one word pair from document frequencies.
///
/// `ln(P(a,b)/(P(a)P(b))) / −ln P(a,b)`; a zero joint count scores −1 and a
/// pair present in every document scores 1.
pub fn npmi_from_counts(df_a: u64, df_b: u64, joint: u64, num_docs: u64) -> f64 {
    if joint == 0 || df_a == 0 || df_b == 0 {
        return -1.0;
    }
    if joint >= num_docs {
        return 1.0;
    }
    let d = num_docs as f64;
    let p_ab = joint as f64 / d;
    let p_a = df_a as f64 / d;
    let p_b = df_b as f64 / d;
    ((p_ab / (p_a * p_b)).ln() / -p_ab.ln()).clamp(-1.0, 1.0)
}

/// Mean pairwise NPMI within each topic.
///
/// Words the index does not know are treated as never occurring.
pub fn npmi(topics: &TopicSet, index: &CooccurrenceIndex) -> Result<TopicScores> {
    if index.num_docs == 0 {
        return Err(Error::invalid("NPMI needs at least one reference document"));
    }
    let missing: Vec<usize> = topics
        .distinct_words()
        .into_iter()
        .filter(|w| !index.contains(*w))
        .collect();
    if !missing.is_empty() {
        log::warn!("{} topic words are absent from the co-occurrence index: {missing:?}", missing.len());
    }
    let per_topic = topics
        .topics()
        .iter()
        .map(|t| {
            let mut sum = 0.0;
            let mut pairs = 0usize;
            for i in 0..t.len() {
                for j in (i + 1)..t.len() {
                    let (a, b) = (t[i], t[j]);
                    sum += match (index.df(a), index.df(b), index.joint(a, b)) {
                        (Some(da), Some(db), Some(j)) => npmi_from_counts(da, db, j, index.num_docs),
                        _ => -1.0,
                    };
                    pairs += 1;
                }
            }
            // A single-word topic has no pairs.
            if pairs == 0 {
                0.0
            } else {
                sum / pairs as f64
            }
        })
        .collect();
    Ok(TopicScores::from_per_topic(per_topic))
}

/// `overlap[i][j] = |predicted_i ∩ truth_j|`.
pub fn overlap_matrix(predicted: &TopicSet, truth: &TopicSet) -> Vec<Vec<usize>> {
    let truth_sets: Vec<HashSet<usize>> = truth
        .topics()
        .iter()
        .map(|t| t.iter().copied().collect())
        .collect();
    predicted
        .topics()
        .iter()
        .map(|p| {
            truth_sets
                .iter()
                .map(|s| p.iter().filter(|w| s.contains(w)).count())
                .collect()
        })
        .collect()
}

/// Maximum total overlap over all permutations by enumeration. Returns the
/// total and `assignment[i]` = truth topic matched to predicted topic `i`.
pub fn best_alignment_exhaustive(overlap: &[Vec<usize>]) -> (usize, Vec<usize>) {
    fn search(
        row: usize,
        overlap: &[Vec<usize>],
        used: &mut [bool],
        current: &mut Vec<usize>,
        score: usize,
        best: &mut (usize, Vec<usize>),
    ) {
        let n = overlap.len();
        if row == n {
            if score > best.0 || best.1.is_empty() {
                *best = (score, current.clone());
            }
            return;
        }
        for col in 0..n {
            if !used[col] {
                used[col] = true;
                current.push(col);
                search(row + 1, overlap, used, current, score + overlap[row][col], best);
                current.pop();
                used[col] = false;
            }
        }
    }
    let n = overlap.len();
    let mut best = (0, Vec::new());
    search(0, overlap, &mut vec![false; n], &mut Vec::with_capacity(n), 0, &mut best);
    best
}

/// Maximum total overlap via the Hungarian algorithm, `O(n³)`.
pub fn best_alignment_hungarian(overlap: &[Vec<usize>]) -> (usize, Vec<usize>) {
    let n = overlap.len();
    if n == 0 {
        return (0, Vec::new());
    }
    let max = overlap.iter().flatten().copied().max().unwrap_or(0) as i64;
    // Minimize cost = max − overlap. 1-based arrays with a virtual column 0.
    let cost = |i: usize, j: usize| max - overlap[i - 1][j - 1] as i64;
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[matched_row[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| overlap[i][j]).sum();
    (total, assignment)
}

/// Best mean precision `|pred_k ∩ truth_σ(k)| / L` over topic permutations σ.
pub fn recovery_precision(predicted: &TopicSet, truth: &TopicSet) -> Result<f64> {
    if predicted.num_topics() != truth.num_topics()
        || predicted.words_per_topic() != truth.words_per_topic()
    {
        return Err(Error::dim(format!(
            "predicted topics are {}x{}, truth is {}x{}",
            predicted.num_topics(),
            predicted.words_per_topic(),
            truth.num_topics(),
            truth.words_per_topic()
        )));
    }
    let overlap = overlap_matrix(predicted, truth);
    let (total, _) = if overlap.len() <= EXHAUSTIVE_ALIGNMENT_MAX_TOPICS {
        best_alignment_exhaustive(&overlap)
    } else {
        best_alignment_hungarian(&overlap)
    };
    Ok(total as f64 / (predicted.num_topics() * predicted.words_per_topic()) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeConfig {
    pub lr: f64,
    pub iters: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { lr: 0.01, iters: 100 }
    }
}

struct LinearClassifier {
    weight: Matrix,
    bias: Vec<f64>,
}

impl Parameters for LinearClassifier {
    fn tensors(&self) -> Vec<&[f64]> {
        vec![self.weight.as_slice(), &self.bias]
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        vec![self.weight.as_mut_slice(), &mut self.bias]
    }
}

impl LinearClassifier {
    fn predict(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for c in 0..self.bias.len() {
            let s: f64 = self.weight.row(c).iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias[c];
            if s > best_score {
                best_score = s;
                best = c;
            }
        }
        best
    }
}

/// Trains a multiclass linear softmax classifier on `train` by full-batch
/// Adam (from zero weights) and returns its accuracy on `test`.
pub fn classification_probe(
    train: &[(Vec<f64>, usize)],
    test: &[(Vec<f64>, usize)],
    num_classes: usize,
    config: ProbeConfig,
) -> Result<f64> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid("classification probe needs non-empty splits"));
    }
    let dim = train[0].0.len();
    for (x, y) in train.iter().chain(test) {
        if x.len() != dim {
            return Err(Error::dim(format!("feature of length {} (expected {dim})", x.len())));
        }
        if *y >= num_classes {
            return Err(Error::invalid(format!("label {y} outside 0..{num_classes}")));
        }
    }
    let mut model = LinearClassifier {
        weight: Matrix::zeros(num_classes, dim),
        bias: vec![0.0; num_classes],
    };
    let adam_config = AdamConfig {
        lr: config.lr,
        beta1: 0.9,
        beta2: 0.999,
        epsilon: 1e-8,
    };
    let mut adam = AdamState::new(adam_config, &model);
    let n = train.len() as f64;
    for _ in 0..config.iters {
        let mut grad = LinearClassifier {
            weight: Matrix::zeros(num_classes, dim),
            bias: vec![0.0; num_classes],
        };
        for (x, y) in train {
            let logits: Vec<f64> = (0..num_classes)
                .map(|c| {
                    model.weight.row(c).iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + model.bias[c]
                })
                .collect();
            let mut delta = crate::nn::softmax_unchecked(&logits);
            delta[*y] -= 1.0;
            for d in &mut delta {
                *d /= n;
            }
            grad.weight.add_outer(1.0, &delta, x)?;
            for (g, d) in grad.bias.iter_mut().zip(&delta) {
                *g += d;
            }
        }
        adam.step(&mut model, &grad)?;
    }
    let correct = test.iter().filter(|(x, y)| model.predict(x) == *y).count();
    Ok(correct as f64 / test.len() as f64)
}

/// All metrics for one set of topics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tu: TopicScores,
    pub npmi: TopicScores,
    pub recovery_precision: Option<f64>,
    pub classifier_accuracy: Option<f64>,
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn joined(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

impl MetricsReport {
    pub const CSV_HEADER: &'static str =
        "tu_mean,npmi_mean,recovery_precision,classifier_accuracy,tu_per_topic,npmi_per_topic";

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))
    }

    /// One CSV row matching [`Self::CSV_HEADER`]; per-topic values are
    /// `;`-separated inside their cell.
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.tu.mean,
            self.npmi.mean,
            opt(self.recovery_precision),
            opt(self.classifier_accuracy),
            joined(&self.tu.per_topic),
            joined(&self.npmi.per_topic)
        )
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "TU mean: {}", self.tu.mean);
        let _ = writeln!(out, "NPMI mean: {}", self.npmi.mean);
        if let Some(p) = self.recovery_precision {
            let _ = writeln!(out, "recovery precision: {p}");
        }
        if let Some(a) = self.classifier_accuracy {
            let _ = writeln!(out, "classifier accuracy: {a}");
        }
        for (k, (tu, npmi)) in self.tu.per_topic.iter().zip(&self.npmi.per_topic).enumerate() {
            let _ = writeln!(out, "topic {k}: TU {tu} NPMI {npmi}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn ts(topics: &[&[usize]]) -> TopicSet {
        TopicSet::new(topics.iter().map(|t| t.to_vec()).collect()).unwrap()
    }

    #[test]
    fn topic_set_validation() {
        assert!(TopicSet::new(vec![]).is_err());
        assert!(TopicSet::new(vec![vec![1, 2], vec![3]]).is_err());
        assert!(TopicSet::new(vec![vec![1, 1]]).is_err());
        let t = ts(&[&[4, 2], &[2, 9]]);
        assert_eq!(TopicSet::parse(&t.to_text()).unwrap(), t);
        assert!(TopicSet::parse("1 x\n").is_err());
    }

    #[test]
    fn tu_cases() {
        let distinct = topic_uniqueness(&ts(&[&[0, 1], &[2, 3], &[4, 5]]));
        assert_eq!(distinct.per_topic, vec![1.0; 3]);
        assert_eq!(distinct.mean, 1.0);

        let same = topic_uniqueness(&ts(&[&[0, 1, 2], &[0, 1, 2], &[0, 1, 2], &[0, 1, 2]]));
        assert!(same.per_topic.iter().all(|&t| (t - 0.25).abs() < 1e-15));

        let toy = topic_uniqueness(&ts(&[&[0, 1], &[1, 2]]));
        assert_eq!(toy.per_topic, vec![0.75, 0.75]);
        assert_eq!(toy.mean, 0.75);
    }

    #[test]
    fn cooccurrence_basics() {
        let docs = vec![BowDocument::from_tokens(&[3, 5, 5])];
        let idx = build_cooccurrence_index(&docs, &[3, 5]);
        assert_eq!(idx.num_docs(), 1);
        assert_eq!(idx.joint(3, 5), Some(1));
        assert_eq!(idx.df(5), Some(1));
        assert_eq!(idx.joint(5, 3), idx.joint(3, 5));
        assert_eq!(idx.df(4), None);
    }

    #[test]
    fn npmi_conventions() {
        // Words always together, but not in every document.
        let docs = vec![
            BowDocument::from_tokens(&[0, 1]),
            BowDocument::from_tokens(&[2]),
            BowDocument::from_tokens(&[0, 1, 2]),
        ];
        let idx = build_cooccurrence_index(&docs, &[0, 1, 2, 3]);
        let s = npmi(&ts(&[&[0, 1]]), &idx).unwrap();
        assert!((s.mean - 1.0).abs() < 1e-12);
        // Word 3 never occurs, so its pairs score −1.
        let s = npmi(&ts(&[&[0, 3]]), &idx).unwrap();
        assert_eq!(s.mean, -1.0);
        // Word 7 was never indexed.
        let s = npmi(&ts(&[&[0, 7]]), &idx).unwrap();
        assert_eq!(s.mean, -1.0);
        assert!(npmi(&ts(&[&[0, 1]]), &build_cooccurrence_index(&[], &[0, 1])).is_err());
    }

    #[test]
    fn npmi_hand_counted_toy() {
        // docs: {0,1}, {0,2}, {1,2}, {0,1,2}
        let docs = vec![
            BowDocument::from_tokens(&[0, 1]),
            BowDocument::from_tokens(&[0, 2]),
            BowDocument::from_tokens(&[1, 2]),
            BowDocument::from_tokens(&[0, 1, 2]),
        ];
        let idx = build_cooccurrence_index(&docs, &[0, 1, 2]);
        // P(w) = 3/4, P(w,w') = 2/4 for every pair.
        let expected = ((0.5f64) / (0.75 * 0.75)).ln() / -(0.5f64).ln();
        let s = npmi(&ts(&[&[0, 1, 2]]), &idx).unwrap();
        assert!((s.mean - expected).abs() < 1e-15);
    }

    #[test]
    fn precision_cases() {
        let truth = ts(&[&[0, 1, 2], &[3, 4, 5]]);
        assert_eq!(recovery_precision(&truth, &truth).unwrap(), 1.0);
        let swapped = ts(&[&[3, 4, 5], &[2, 1, 0]]);
        assert_eq!(recovery_precision(&swapped, &truth).unwrap(), 1.0);
        let partial = ts(&[&[3, 4, 9], &[0, 1, 2]]);
        assert!((recovery_precision(&partial, &truth).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert!(recovery_precision(&ts(&[&[0, 1]]), &truth).is_err());
    }

    #[test]
    fn hungarian_agrees_with_enumeration_on_random_instances() {
        let mut rng = seeded_rng(42);
        for _ in 0..100 {
            let overlap: Vec<Vec<usize>> = (0..5)
                .map(|_| (0..5).map(|_| rng.random_range(0..=10)).collect())
                .collect();
            let (a, perm_a) = best_alignment_exhaustive(&overlap);
            let (b, perm_b) = best_alignment_hungarian(&overlap);
            assert_eq!(a, b);
            for perm in [perm_a, perm_b] {
                let mut sorted = perm.clone();
                sorted.sort_unstable();
                assert_eq!(sorted, (0..5).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn hungarian_handles_large_k() {
        // Shifted identity: topic i matches truth (i + 3) % 12 perfectly.
        let truth: Vec<Vec<usize>> = (0..12).map(|k| (0..4).map(|l| k * 4 + l).collect()).collect();
        let pred: Vec<Vec<usize>> = (0..12).map(|k| truth[(k + 3) % 12].clone()).collect();
        let p = recovery_precision(&TopicSet::new(pred).unwrap(), &TopicSet::new(truth).unwrap()).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn probe_separable_and_degenerate() {
        let one_hot = |c: usize| {
            let mut v = vec![0.0; 3];
            v[c] = 1.0;
            v
        };
        let data: Vec<(Vec<f64>, usize)> = (0..30).map(|i| (one_hot(i % 3), i % 3)).collect();
        let acc = classification_probe(&data, &data, 3, ProbeConfig::default()).unwrap();
        assert_eq!(acc, 1.0);

        let single: Vec<(Vec<f64>, usize)> = (0..5).map(|i| (vec![i as f64], 0)).collect();
        assert_eq!(classification_probe(&single, &single, 1, ProbeConfig::default()).unwrap(), 1.0);

        assert!(classification_probe(&data, &data, 2, ProbeConfig::default()).is_err());
        assert!(classification_probe(&[], &data, 3, ProbeConfig::default()).is_err());
    }

    #[test]
    fn probe_on_shuffled_labels_is_at_chance() {
        let mut rng = seeded_rng(8);
        let mut make = |n: usize| -> Vec<(Vec<f64>, usize)> {
            let mut labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
            labels.shuffle(&mut rng);
            labels
                .into_iter()
                .map(|y| ((0..4).map(|_| rng.random::<f64>()).collect(), y))
                .collect()
        };
        let train = make(1000);
        let test = make(1000);
        let acc = classification_probe(&train, &test, 2, ProbeConfig::default()).unwrap();
        assert!((acc - 0.5).abs() <= 0.05, "{acc}");
    }

    #[test]
    fn report_formats_carry_the_same_numbers() {
        let report = MetricsReport {
            tu: TopicScores { per_topic: vec![0.75, 0.75], mean: 0.75 },
            npmi: TopicScores { per_topic: vec![0.125, -0.5], mean: -0.1875 },
            recovery_precision: Some(0.94),
            classifier_accuracy: None,
        };
        assert_eq!(MetricsReport::from_json(&report.to_json()).unwrap(), report);
        assert_eq!(report.to_csv_row(), "0.75,-0.1875,0.94,,0.75;0.75,0.125;-0.5");
        assert!(report.to_text().contains("recovery precision: 0.94"));
    }

    proptest! {
        #[test]
        fn tu_bounds_and_invariance(seed in any::<u64>()) {
            let mut rng = seeded_rng(seed);
            let k = rng.random_range(1..6);
            let l = rng.random_range(1..6);
            let mut topics: Vec<Vec<usize>> = (0..k).map(|_| {
                let mut pool: Vec<usize> = (0..12).collect();
                pool.shuffle(&mut rng);
                pool.truncate(l);
                pool
            }).collect();
            let base = topic_uniqueness(&TopicSet::new(topics.clone()).unwrap());
            for &t in &base.per_topic {
                prop_assert!(t >= 1.0 / k as f64 - 1e-12 && t <= 1.0 + 1e-12);
            }
            topics.reverse();
            for t in &mut topics {
                t.reverse();
            }
            let permuted = topic_uniqueness(&TopicSet::new(topics).unwrap());
            prop_assert!((permuted.mean - base.mean).abs() < 1e-12);
        }

        #[test]
        fn npmi_pair_is_bounded_and_symmetric(da in 0u64..20, db in 0u64..20, j in 0u64..20, extra in 0u64..20) {
            let joint = j.min(da).min(db);
            let d = da.max(db) + extra;
            prop_assume!(d > 0);
            let ab = npmi_from_counts(da, db, joint, d);
            prop_assert!((-1.0..=1.0).contains(&ab));
            prop_assert_eq!(ab, npmi_from_counts(db, da, joint, d));
        }

        #[test]
        fn precision_self_is_one_and_permutation_invariant(seed in any::<u64>()) {
            let mut rng = seeded_rng(seed);
            let topics: Vec<Vec<usize>> = (0..5).map(|_| {
                let mut pool: Vec<usize> = (0..30).collect();
                pool.shuffle(&mut rng);
                pool.truncate(6);
                pool
            }).collect();
            let truth: Vec<Vec<usize>> = (0..5).map(|_| {
                let mut pool: Vec<usize> = (0..30).collect();
                pool.shuffle(&mut rng);
                pool.truncate(6);
                pool
            }).collect();
            let a = TopicSet::new(topics.clone()).unwrap();
            let b = TopicSet::new(truth.clone()).unwrap();
            prop_assert_eq!(recovery_precision(&a, &a).unwrap(), 1.0);
            let base = recovery_precision(&a, &b).unwrap();
            let mut shuffled = topics;
            shuffled.shuffle(&mut rng);
            let mut truth_shuffled = truth;
            truth_shuffled.shuffle(&mut rng);
            let again = recovery_precision(
                &TopicSet::new(shuffled).unwrap(),
                &TopicSet::new(truth_shuffled).unwrap(),
            ).unwrap();
            prop_assert_eq!(base, again);
        }
    }
}
