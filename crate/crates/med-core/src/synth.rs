//! Seeded synthetic retrieval corpora: a pool of graded documents per topic
//! and a ladder of runs that rank them under increasing score noise, so that
//! better-separated runs are genuinely farther apart.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::MedError;
use crate::io::RunFile;
use crate::list::{DocId, GradeScale, JudgmentSet, RankedList};

/// Shape of a generated corpus. Every document is judged, so the corpus can
/// be degraded to any judgment fraction afterwards.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub topics: usize,
    pub docs_per_topic: usize,
    pub runs: usize,
    pub list_len: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            topics: 20,
            docs_per_topic: 80,
            runs: 9,
            list_len: 30,
            seed: 17,
        }
    }
}

/// A generated corpus: runs in tag order, complete judgments, and the grade
/// scale the judgments index into.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub runs: Vec<RunFile>,
    pub judgments: JudgmentSet,
    pub scale: GradeScale,
}

/// Generates a corpus deterministically from the seed. Grades are drawn per
/// document (15% top grade, 25% partially relevant); each run scores a
/// document as its grade value plus a shared per-document Gaussian draw
/// scaled by the run's spread, then keeps the `list_len` best scores.
/// Sharing the draw across runs makes two runs disagree in proportion to the
/// gap between their spreads rather than to the sum, so the ladder orders
/// pairs of runs by how far apart they really are.
pub fn synth_corpus(config: &SynthConfig) -> Result<SynthCorpus, MedError> {
    if config.topics == 0 || config.runs < 2 {
        return Err(MedError::InvalidArgument(
            "a synthetic corpus needs at least one topic and two runs".into(),
        ));
    }
    if config.list_len == 0 || config.docs_per_topic < config.list_len {
        return Err(MedError::InvalidArgument(format!(
            "docs_per_topic ({}) must be at least list_len ({}) and both positive",
            config.docs_per_topic, config.list_len
        )));
    }
    let scale = GradeScale::new(2).expect("two levels is a valid scale");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let topic_name = |t: usize| format!("t{:03}", t + 1);
    let doc_name = |t: usize, d: usize| format!("t{:03}d{:03}", t + 1, d + 1);

    let mut judgments = JudgmentSet::new();
    let mut grades = vec![vec![0u32; config.docs_per_topic]; config.topics];
    for (t, topic_grades) in grades.iter_mut().enumerate() {
        for (d, grade) in topic_grades.iter_mut().enumerate() {
            let u: f64 = rand::Rng::random(&mut rng);
            *grade = if u < 0.15 {
                2
            } else if u < 0.40 {
                1
            } else {
                0
            };
            judgments.insert(topic_name(t), DocId::new(doc_name(t, d))?, *grade);
        }
    }

    let unit = Normal::new(0.0, 1.0).expect("the unit spread is valid");
    let mut noise = vec![vec![0.0f64; config.docs_per_topic]; config.topics];
    for topic_noise in noise.iter_mut() {
        for draw in topic_noise.iter_mut() {
            *draw = unit.sample(&mut rng);
        }
    }

    let mut runs = Vec::with_capacity(config.runs);
    for r in 0..config.runs {
        let sigma = 0.05 + 0.35 * r as f64 / (config.runs - 1) as f64;
        let mut lists = Vec::with_capacity(config.topics);
        for (t, topic_grades) in grades.iter().enumerate() {
            let mut scored: Vec<(f64, usize)> = topic_grades
                .iter()
                .enumerate()
                .map(|(d, &g)| (scale.grade_f64(g) + sigma * noise[t][d], d))
                .collect();
            scored.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("noise is finite").then(a.1.cmp(&b.1)));
            let docs = scored
                .iter()
                .take(config.list_len)
                .map(|&(_, d)| DocId::new(doc_name(t, d)))
                .collect::<Result<Vec<_>, _>>()?;
            lists.push(RankedList::new(topic_name(t), docs)?);
        }
        runs.push(RunFile::new(format!("run{:02}", r + 1), lists)?);
    }
    Ok(SynthCorpus {
        runs,
        judgments,
        scale,
    })
}
