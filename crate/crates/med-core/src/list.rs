//! Ranked lists, graded relevance scales, and judgment sets.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num::rational::Rational64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::MedError;

/// A document identifier. Non-empty and free of whitespace, so it can pass
/// through whitespace-separated text formats unharmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DocId(String);

impl DocId {
    pub fn new(id: impl Into<String>) -> Result<Self, MedError> {
        let id = id.into();
        if id.is_empty() {
            return Err(MedError::InvalidArgument("empty document id".into()));
        }
        if id.chars().any(char::is_whitespace) {
            return Err(MedError::InvalidArgument(format!(
                "document id {id:?} contains whitespace"
            )));
        }
        Ok(DocId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for DocId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A ranking of distinct documents for one topic, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedList {
    topic: String,
    docs: Vec<DocId>,
}

impl RankedList {
    /// Builds a list, rejecting repeated documents.
    pub fn new(topic: impl Into<String>, docs: Vec<DocId>) -> Result<Self, MedError> {
        let topic = topic.into();
        let mut seen = HashSet::with_capacity(docs.len());
        for doc in &docs {
            if !seen.insert(doc) {
                return Err(MedError::MalformedRun(format!(
                    "document {doc} appears twice in topic {topic}"
                )));
            }
        }
        Ok(RankedList { topic, docs })
    }

    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn docs(&self) -> &[DocId] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// The document at 1-based `rank`, if the list is that deep.
    pub fn at_rank(&self, rank: usize) -> Option<&DocId> {
        if rank == 0 {
            return None;
        }
        self.docs.get(rank - 1)
    }
}

/// A graded relevance scale: grade values for judgment indexes `0..=levels`.
///
/// The standard scale places grade `j` at `(2^j - 1) / 2^levels`, so with two
/// levels the grades are 0, 1/4 and 3/4. Binary relevance uses the plain
/// `{0, 1}` scale instead. Grade values are exact rationals; every value on
/// either scale is a dyadic and converts to `f64` without rounding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradeScale {
    grades: Vec<Rational64>,
}

impl GradeScale {
    /// The standard scale with `levels >= 1` relevance levels above zero.
    pub fn new(levels: u32) -> Result<Self, MedError> {
        if levels == 0 {
            return Err(MedError::InvalidArgument(
                "a grade scale needs at least one level above zero".into(),
            ));
        }
        if levels > 32 {
            return Err(MedError::InvalidArgument(format!(
                "grade scale with {levels} levels is too fine"
            )));
        }
        let denom = 1i64 << levels;
        let grades = (0..=levels)
            .map(|j| Rational64::new((1i64 << j) - 1, denom))
            .collect();
        Ok(GradeScale { grades })
    }

    /// The `{0, 1}` scale used by binary measures.
    pub fn binary() -> Self {
        GradeScale {
            grades: vec![Rational64::from_integer(0), Rational64::from_integer(1)],
        }
    }

    /// Number of levels above zero (the highest judgment index).
    pub fn levels(&self) -> u32 {
        (self.grades.len() - 1) as u32
    }

    /// The grade value for judgment index `index`, clamped to the top level.
    pub fn grade(&self, index: u32) -> Rational64 {
        let i = (index as usize).min(self.grades.len() - 1);
        self.grades[i]
    }

    pub fn grade_f64(&self, index: u32) -> f64 {
        ratio_to_f64(self.grade(index))
    }

    /// The top grade value.
    pub fn top(&self) -> Rational64 {
        *self.grades.last().expect("scale is never empty")
    }

    pub fn top_f64(&self) -> f64 {
        ratio_to_f64(self.top())
    }

    /// All grade values, ascending.
    pub fn grades(&self) -> &[Rational64] {
        &self.grades
    }

    pub fn grades_f64(&self) -> Vec<f64> {
        self.grades.iter().copied().map(ratio_to_f64).collect()
    }
}

pub(crate) fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Relevance judgments: topic and document to a judgment index on some scale.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JudgmentSet {
    by_topic: BTreeMap<String, HashMap<DocId, u32>>,
}

impl JudgmentSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a judgment, returning the previous index if one existed
    /// (later entries win).
    pub fn insert(&mut self, topic: impl Into<String>, doc: DocId, index: u32) -> Option<u32> {
        self.by_topic.entry(topic.into()).or_default().insert(doc, index)
    }

    pub fn get(&self, topic: &str, doc: &DocId) -> Option<u32> {
        self.by_topic.get(topic)?.get(doc).copied()
    }

    pub fn len(&self) -> usize {
        self.by_topic.values().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_topic.is_empty()
    }

    pub fn topics(&self) -> impl Iterator<Item = &str> {
        self.by_topic.keys().map(String::as_str)
    }

    /// All judgments in a stable (topic, document) order.
    pub fn entries(&self) -> Vec<(&str, &DocId, u32)> {
        let mut out = Vec::with_capacity(self.len());
        for (topic, docs) in &self.by_topic {
            let mut per_topic: Vec<_> = docs.iter().collect();
            per_topic.sort_by(|a, b| a.0.cmp(b.0));
            out.extend(per_topic.into_iter().map(|(d, &g)| (topic.as_str(), d, g)));
        }
        out
    }

    /// Nested random subsets, one per requested fraction: the subset for a
    /// smaller fraction is always contained in the subset for a larger one,
    /// and fraction 1.0 returns every judgment. Sampling is uniform and
    /// fully determined by `seed`.
    pub fn nested_samples(&self, fractions: &[f64], seed: u64) -> Vec<JudgmentSet> {
        let mut entries: Vec<(String, DocId, u32)> = self
            .entries()
            .into_iter()
            .map(|(t, d, g)| (t.to_owned(), d.clone(), g))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        entries.shuffle(&mut rng);
        let n = entries.len();
        fractions
            .iter()
            .map(|&f| {
                let take = ((f.clamp(0.0, 1.0) * n as f64).round() as usize).min(n);
                let mut sample = JudgmentSet::new();
                for (topic, doc, grade) in &entries[..take] {
                    sample.insert(topic.clone(), doc.clone(), *grade);
                }
                sample
            })
            .collect()
    }
}
