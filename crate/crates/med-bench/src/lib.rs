//! Seeded instance builders shared by the solver benchmarks.

use med_core::{align, AlignedPair, DocId, GradeScale, JudgmentSet, Passage, RankedList, Trailtext};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn doc(i: usize) -> DocId {
    DocId::new(format!("d{i:04}")).unwrap()
}

fn random_list(rng: &mut ChaCha8Rng, universe: usize, len: usize) -> RankedList {
    let mut ids: Vec<usize> = (0..universe).collect();
    ids.shuffle(rng);
    RankedList::new("t", ids.into_iter().take(len).map(doc).collect()).unwrap()
}

fn random_judgments(
    rng: &mut ChaCha8Rng,
    universe: usize,
    fraction: f64,
    scale: &GradeScale,
) -> JudgmentSet {
    let mut judged = JudgmentSet::new();
    for i in 0..universe {
        if rng.random::<f64>() < fraction {
            judged.insert("t", doc(i), rng.random_range(0..=scale.levels()));
        }
    }
    judged
}

/// Two full-depth lists drawn from a pool twice the depth, aligned with the
/// given judged fraction.
pub fn ranked_pair(seed: u64, depth: usize, judged: f64, scale: &GradeScale) -> AlignedPair {
    let mut rng = rng(seed);
    let universe = depth * 2;
    let a = random_list(&mut rng, universe, depth);
    let b = random_list(&mut rng, universe, depth);
    let judgments = random_judgments(&mut rng, universe, judged, scale);
    align(&a, &b, depth, &judgments, scale).unwrap()
}

/// Two permutations of the same documents, so every unjudged document
/// becomes one shared decision variable.
pub fn shared_docs_pair(seed: u64, depth: usize, judged: f64, scale: &GradeScale) -> AlignedPair {
    let mut rng = rng(seed);
    let a = random_list(&mut rng, depth, depth);
    let mut docs: Vec<DocId> = a.docs().to_vec();
    docs.shuffle(&mut rng);
    let b = RankedList::new("t", docs).unwrap();
    let judgments = random_judgments(&mut rng, depth, judged, scale);
    align(&a, &b, depth, &judgments, scale).unwrap()
}

/// A trailtext of `passages` passages over a small document pool, with
/// overlapping offsets so some characters repeat across trailtexts.
pub fn trailtext(seed: u64, passages: usize) -> Trailtext {
    let mut rng = rng(seed);
    let built = (0..passages)
        .map(|_| {
            let d = doc(rng.random_range(0..passages.div_ceil(2).max(1)));
            let offset = rng.random_range(0..50);
            let length = rng.random_range(10..=60);
            Passage::new(d, offset, length).unwrap()
        })
        .collect();
    Trailtext::new("t", built).unwrap()
}
