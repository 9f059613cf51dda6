//! Bag-of-words corpora: vocabularies, sparse documents, synthetic LDA
//! corpora with retained ground truth, plain-text ingestion and the corpus
//! file format.
//!
//! # Corpus file format
//!
//! Line-oriented UTF-8 text:
//!
//! ```text
//! wlda-corpus 1
//! vocab_size <V>
//! num_docs <D>
//! num_topics <K>          # 0 when no ground truth is stored
//! vocab
//! <word 0>
//! ...                     # V lines
//! docs
//! <id>:<count> <id>:<count> ...   # D lines, ids ascending; empty for an empty doc
//! truth_topics            # only when K > 0
//! <V hex floats>          # K lines
//! truth_thetas
//! <K hex floats>          # D lines
//! end
//! ```
//!
//! Real numbers are C99 hex floats so that a round trip is bit-exact.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::hexfloat;
use crate::metrics::TopicSet;
use crate::simplex::{sample_dirichlet, DirichletParams, SimplexVector};
use crate::{Error, Result};

pub const CORPUS_FORMAT_VERSION: u32 = 1;
const CORPUS_MAGIC: &str = "wlda-corpus";

/// Bijection between words and ids `0..V`, in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_words(words: Vec<String>) -> Result<Self> {
        let mut vocab = Self::new();
        for w in words {
            if vocab.index.contains_key(&w) {
                return Err(Error::invalid(format!("duplicate vocabulary word `{w}`")));
            }
            vocab.insert(w);
        }
        Ok(vocab)
    }

    /// Words `w0`, `w1`, ... used for synthetic corpora.
    pub fn numbered(size: usize) -> Self {
        let mut vocab = Self::new();
        for i in 0..size {
            vocab.insert(format!("w{i}"));
        }
        vocab
    }

    /// Returns the id of `word`, adding it if unseen.
    pub fn insert(&mut self, word: String) -> usize {
        if let Some(&id) = self.index.get(&word) {
            return id;
        }
        let id = self.words.len();
        self.index.insert(word.clone(), id);
        self.words.push(word);
        id
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: usize) -> Option<&str> {
        self.words.get(id).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Sparse word counts of one document, sorted by word id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BowDocument {
    entries: Vec<(usize, u32)>,
    total: u64,
}

impl BowDocument {
    /// Builds a document from `(word id, count)` pairs. Repeated ids are
    /// summed and zero counts dropped.
    pub fn from_counts(counts: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut merged: Vec<(usize, u32)> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        merged.sort_unstable_by_key(|&(id, _)| id);
        let mut entries: Vec<(usize, u32)> = Vec::with_capacity(merged.len());
        for (id, c) in merged {
            match entries.last_mut() {
                Some(last) if last.0 == id => last.1 += c,
                _ => entries.push((id, c)),
            }
        }
        let total = entries.iter().map(|&(_, c)| u64::from(c)).sum();
        Self { entries, total }
    }

    /// Counts the word ids of a token sequence.
    pub fn from_tokens(tokens: &[usize]) -> Self {
        Self::from_counts(tokens.iter().map(|&t| (t, 1)))
    }

    pub fn entries(&self) -> &[(usize, u32)] {
        &self.entries
    }

    /// Total token count `s`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, word: usize) -> u32 {
        self.entries
            .binary_search_by_key(&word, |&(id, _)| id)
            .map(|i| self.entries[i].1)
            .unwrap_or(0)
    }

    /// Largest word id present, if any.
    pub fn max_id(&self) -> Option<usize> {
        self.entries.last().map(|&(id, _)| id)
    }

    /// Dense count vector of length `vocab_size`.
    pub fn dense(&self, vocab_size: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; vocab_size];
        for &(id, c) in &self.entries {
            *out.get_mut(id).ok_or_else(|| {
                Error::invalid(format!("word id {id} outside a vocabulary of {vocab_size}"))
            })? = f64::from(c);
        }
        Ok(out)
    }

    /// The document as a token sequence, ids ascending.
    pub fn tokens(&self) -> Vec<usize> {
        self.entries
            .iter()
            .flat_map(|&(id, c)| std::iter::repeat_n(id, c as usize))
            .collect()
    }
}

/// Topic-word distributions and per-document topic proportions that
/// generated a synthetic corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGroundTruth {
    /// `K` distributions over the vocabulary.
    pub topics: Vec<SimplexVector>,
    /// One `K`-dimensional proportion vector per document.
    pub thetas: Vec<SimplexVector>,
}

impl SyntheticGroundTruth {
    pub fn num_topics(&self) -> usize {
        self.topics.len()
    }

    /// Top-`l` words per true topic, by probability, ties to the lower id.
    pub fn top_words(&self, l: usize) -> Result<TopicSet> {
        TopicSet::new(
            self.topics
                .iter()
                .map(|t| top_indices(t.as_slice(), l))
                .collect::<Result<_>>()?,
        )
    }

    /// Per-document label: the dominant true topic.
    pub fn dominant_topics(&self) -> Vec<usize> {
        self.thetas.iter().map(SimplexVector::argmax).collect()
    }
}

/// Indices of the `l` largest entries, descending, ties to the lower index.
pub fn top_indices(values: &[f64], l: usize) -> Result<Vec<usize>> {
    if l == 0 || l > values.len() {
        return Err(Error::invalid(format!(
            "cannot take the top {l} of {} entries",
            values.len()
        )));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order.truncate(l);
    Ok(order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    vocab: Vocabulary,
    docs: Vec<BowDocument>,
    truth: Option<SyntheticGroundTruth>,
}

impl Corpus {
    pub fn new(vocab: Vocabulary, docs: Vec<BowDocument>) -> Result<Self> {
        let v = vocab.len();
        if let Some((d, id)) = docs
            .iter()
            .enumerate()
            .find_map(|(d, doc)| doc.max_id().filter(|&id| id >= v).map(|id| (d, id)))
        {
            return Err(Error::invalid(format!(
                "document {d} uses word id {id} but the vocabulary has {v} words"
            )));
        }
        Ok(Self {
            vocab,
            docs,
            truth: None,
        })
    }

    pub fn with_truth(mut self, truth: SyntheticGroundTruth) -> Result<Self> {
        if truth.thetas.len() != self.docs.len() {
            return Err(Error::dim(format!(
                "{} ground-truth thetas for {} documents",
                truth.thetas.len(),
                self.docs.len()
            )));
        }
        let k = truth.topics.len();
        if truth.topics.iter().any(|t| t.dim() != self.vocab.len())
            || truth.thetas.iter().any(|t| t.dim() != k)
        {
            return Err(Error::dim("ground truth does not match the corpus shape"));
        }
        self.truth = Some(truth);
        Ok(self)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn docs(&self) -> &[BowDocument] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn truth(&self) -> Option<&SyntheticGroundTruth> {
        self.truth.as_ref()
    }

    pub fn total_tokens(&self) -> u64 {
        self.docs.iter().map(BowDocument::total).sum()
    }

    /// Corpus-wide relative word frequencies.
    pub fn word_frequencies(&self) -> Vec<f64> {
        let mut freq = vec![0.0; self.vocab_size()];
        for doc in &self.docs {
            for &(id, c) in doc.entries() {
                freq[id] += f64::from(c);
            }
        }
        let total = self.total_tokens() as f64;
        if total > 0.0 {
            for f in &mut freq {
                *f /= total;
            }
        }
        freq
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DocLength {
    /// `max(1, Poisson(mean))`.
    Poisson { mean: f64 },
    Fixed(usize),
}

/// Parameters of the LDA generative process used for synthetic corpora.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub vocab_size: usize,
    pub num_topics: usize,
    /// Symmetric Dirichlet concentration of each document's topic mix.
    pub alpha: f64,
    /// Symmetric Dirichlet concentration the true topics are drawn from.
    pub topic_eta: f64,
    pub num_docs: usize,
    pub doc_length: DocLength,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            vocab_size: 100,
            num_topics: 5,
            alpha: 0.1,
            topic_eta: 0.05,
            num_docs: 10_000,
            doc_length: DocLength::Poisson { mean: 30.0 },
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_topics < 2 || self.vocab_size < self.num_topics {
            return Err(Error::invalid(format!(
                "need vocab_size >= num_topics >= 2, got V={} K={}",
                self.vocab_size, self.num_topics
            )));
        }
        if self.num_docs == 0 {
            return Err(Error::invalid("num_docs must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.topic_eta > 0.0) {
            return Err(Error::invalid("Dirichlet parameters must be positive"));
        }
        match self.doc_length {
            DocLength::Poisson { mean } if !(mean >= 1.0 && mean.is_finite()) => {
                Err(Error::invalid(format!("mean document length {mean} is below 1")))
            }
            DocLength::Fixed(0) => Err(Error::invalid("fixed document length must be at least 1")),
            _ => Ok(()),
        }
    }
}

/// Samples a corpus from the LDA generative process and keeps the ground truth.
pub fn generate_synthetic<R: Rng + ?Sized>(spec: &SyntheticSpec, rng: &mut R) -> Result<Corpus> {
    spec.validate()?;
    let topic_prior = DirichletParams::symmetric(spec.vocab_size, spec.topic_eta)?;
    let doc_prior = DirichletParams::symmetric(spec.num_topics, spec.alpha)?;
    let topics: Vec<SimplexVector> = (0..spec.num_topics)
        .map(|_| sample_dirichlet(&topic_prior, rng))
        .collect();
    let poisson = match spec.doc_length {
        DocLength::Poisson { mean } => {
            Some(Poisson::new(mean).map_err(|e| Error::invalid(e.to_string()))?)
        }
        DocLength::Fixed(_) => None,
    };

    let mut docs = Vec::with_capacity(spec.num_docs);
    let mut thetas = Vec::with_capacity(spec.num_docs);
    let mut tokens = Vec::new();
    for _ in 0..spec.num_docs {
        let theta = sample_dirichlet(&doc_prior, rng);
        let len = match (spec.doc_length, &poisson) {
            (DocLength::Fixed(n), _) => n,
            (_, Some(p)) => (p.sample(rng) as usize).max(1),
            (_, None) => unreachable!(),
        };
        tokens.clear();
        for _ in 0..len {
            let z = sample_categorical(theta.as_slice(), rng);
            tokens.push(sample_categorical(topics[z].as_slice(), rng));
        }
        docs.push(BowDocument::from_tokens(&tokens));
        thetas.push(theta);
    }
    Corpus::new(Vocabulary::numbered(spec.vocab_size), docs)?
        .with_truth(SyntheticGroundTruth { topics, thetas })
}

/// Inverse-CDF draw from (possibly unnormalized) non-negative weights.
pub(crate) fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    // Rounding can leave `target` at the very top; fall back to the last
    // index with positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Mean number of shared words between the top-`l` lists of every pair of
/// true topics.
pub fn mean_topic_overlap(truth: &SyntheticGroundTruth, l: usize) -> Result<f64> {
    let tops = truth.top_words(l)?;
    let sets: Vec<HashSet<usize>> = tops
        .topics()
        .iter()
        .map(|t| t.iter().copied().collect())
        .collect();
    let k = sets.len();
    let mut total = 0usize;
    let mut pairs = 0usize;
    for i in 0..k {
        for j in (i + 1)..k {
            total += sets[i].intersection(&sets[j]).count();
            pairs += 1;
        }
    }
    Ok(if pairs == 0 { 0.0 } else { total as f64 / pairs as f64 })
}

/// Options for [`load_text`].
#[derive(Debug, Clone, Default)]
pub struct TextOptions {
    pub stopwords: HashSet<String>,
    /// Words occurring fewer times than this across the corpus are dropped.
    pub min_count: u64,
}

impl TextOptions {
    /// Reads a stopword file with one word per line.
    pub fn with_stopword_file(mut self, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        self.stopwords.extend(
            text.lines()
                .map(|l| l.trim().to_lowercase())
                .filter(|l| !l.is_empty()),
        );
        Ok(self)
    }
}

/// Reads one document per line: lowercased, split on whitespace.
pub fn load_text(path: &Path, options: &TextOptions) -> Result<Corpus> {
    corpus_from_text(&fs::read_to_string(path)?, options)
}

/// [`load_text`] on an in-memory string.
pub fn corpus_from_text(text: &str, options: &TextOptions) -> Result<Corpus> {
    let tokenized: Vec<Vec<String>> = text
        .lines()
        .map(|line| {
            line.to_lowercase()
                .split_whitespace()
                .filter(|t| !options.stopwords.contains(*t))
                .map(str::to_owned)
                .collect()
        })
        .collect();

    let mut counts: HashMap<&str, u64> = HashMap::new();
    for tok in tokenized.iter().flatten() {
        *counts.entry(tok.as_str()).or_default() += 1;
    }

    let mut vocab = Vocabulary::new();
    let mut docs = Vec::with_capacity(tokenized.len());
    for tokens in &tokenized {
        let ids: Vec<usize> = tokens
            .iter()
            .filter(|t| counts[t.as_str()] >= options.min_count)
            .map(|t| vocab.insert(t.clone()))
            .collect();
        docs.push(BowDocument::from_tokens(&ids));
    }
    if vocab.is_empty() {
        return Err(Error::invalid("corpus is empty after tokenization and pruning"));
    }
    Corpus::new(vocab, docs)
}

/// Serializes a corpus in the text format described in the module docs.
pub fn corpus_to_string(corpus: &Corpus) -> String {
    let mut out = String::new();
    let k = corpus.truth().map_or(0, SyntheticGroundTruth::num_topics);
    let _ = writeln!(out, "{CORPUS_MAGIC} {CORPUS_FORMAT_VERSION}");
    let _ = writeln!(out, "vocab_size {}", corpus.vocab_size());
    let _ = writeln!(out, "num_docs {}", corpus.len());
    let _ = writeln!(out, "num_topics {k}");
    out.push_str("vocab\n");
    for w in corpus.vocab().words() {
        out.push_str(w);
        out.push('\n');
    }
    out.push_str("docs\n");
    for doc in corpus.docs() {
        let line: Vec<String> = doc.entries().iter().map(|(id, c)| format!("{id}:{c}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    if let Some(truth) = corpus.truth() {
        out.push_str("truth_topics\n");
        write_hex_rows(&mut out, &truth.topics);
        out.push_str("truth_thetas\n");
        write_hex_rows(&mut out, &truth.thetas);
    }
    out.push_str("end\n");
    out
}

fn write_hex_rows(out: &mut String, rows: &[SimplexVector]) {
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| hexfloat::format(x)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
}

pub fn save_corpus(corpus: &Corpus, path: &Path) -> Result<()> {
    fs::write(path, corpus_to_string(corpus))?;
    Ok(())
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    parse_corpus(&fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, line)) => {
                self.last = i + 1;
                Ok(line)
            }
            None => Err(Error::parse(self.last + 1, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn expect(&mut self, keyword: &str) -> Result<()> {
        let line = self.next(keyword)?;
        if line.trim() != keyword {
            return Err(Error::parse(self.last, format!("expected `{keyword}`, found `{line}`")));
        }
        Ok(())
    }

    fn header(&mut self, key: &str) -> Result<usize> {
        let line = self.next(key)?;
        let value = line
            .strip_prefix(key)
            .map(str::trim)
            .ok_or_else(|| Error::parse(self.last, format!("expected `{key} <n>`")))?;
        value
            .parse()
            .map_err(|_| Error::parse(self.last, format!("bad value for {key}: `{value}`")))
    }

    fn hex_row(&mut self, len: usize, what: &str) -> Result<SimplexVector> {
        let line = self.next(what)?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|cell| {
                hexfloat::parse(cell)
                    .ok_or_else(|| Error::parse(self.last, format!("bad hex float `{cell}`")))
            })
            .collect::<Result<_>>()?;
        if values.len() != len {
            return Err(Error::parse(
                self.last,
                format!("{what} row has {} values, expected {len}", values.len()),
            ));
        }
        SimplexVector::new(values).map_err(|e| Error::parse(self.last, e.to_string()))
    }
}

/// Parses the corpus text format.
pub fn parse_corpus(text: &str) -> Result<Corpus> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let magic = lines.next("header")?;
    let version = magic
        .strip_prefix(CORPUS_MAGIC)
        .map(str::trim)
        .ok_or_else(|| Error::parse(1, "not a wlda corpus file"))?;
    let version: u32 = version
        .parse()
        .map_err(|_| Error::parse(1, format!("bad version `{version}`")))?;
    if version != CORPUS_FORMAT_VERSION {
        return Err(Error::Version {
            what: "corpus format",
            found: version,
            expected: CORPUS_FORMAT_VERSION,
        });
    }
    let v = lines.header("vocab_size")?;
    let d = lines.header("num_docs")?;
    let k = lines.header("num_topics")?;

    lines.expect("vocab")?;
    let mut words = Vec::with_capacity(v);
    for _ in 0..v {
        words.push(lines.next("vocabulary word")?.to_owned());
    }
    let vocab = Vocabulary::from_words(words).map_err(|e| Error::parse(lines.last, e.to_string()))?;

    lines.expect("docs")?;
    let mut docs = Vec::with_capacity(d);
    for _ in 0..d {
        let line = lines.next("document")?;
        let mut counts = Vec::new();
        for cell in line.split_whitespace() {
            let parsed = cell
                .split_once(':')
                .and_then(|(id, c)| Some((id.parse::<usize>().ok()?, c.parse::<u32>().ok()?)));
            match parsed {
                Some((id, c)) if id < v && c > 0 => counts.push((id, c)),
                _ => return Err(Error::parse(lines.last, format!("bad entry `{cell}`"))),
            }
        }
        docs.push(BowDocument::from_counts(counts));
    }
    let mut corpus = Corpus::new(vocab, docs)?;

    if k > 0 {
        lines.expect("truth_topics")?;
        let topics = (0..k)
            .map(|_| lines.hex_row(v, "topic"))
            .collect::<Result<Vec<_>>>()?;
        lines.expect("truth_thetas")?;
        let thetas = (0..d)
            .map(|_| lines.hex_row(k, "theta"))
            .collect::<Result<Vec<_>>>()?;
        corpus = corpus.with_truth(SyntheticGroundTruth { topics, thetas })?;
    }
    lines.expect("end")?;
    Ok(corpus)
}

/// Reads one non-negative integer label per line.
pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad label `{l}`")))
        })
        .collect()
}

pub fn save_labels(labels: &[usize], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 2);
    for l in labels {
        let _ = writeln!(out, "{l}");
    }
    fs::write(path, out)?;
    Ok(())
}
