//! Helpers shared by the integration suites: seeded random lists, judgments,
//! and aligned pairs over a small document universe.
#![allow(dead_code)]

use med_core::{align, AlignedPair, DocId, GradeScale, JudgmentSet, RankedList};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn doc(i: usize) -> DocId {
    DocId::new(format!("d{i:02}")).unwrap()
}

/// A ranked list of `len` documents drawn without replacement from
/// `0..universe`.
pub fn random_list(rng: &mut ChaCha8Rng, topic: &str, universe: usize, len: usize) -> RankedList {
    let mut ids: Vec<usize> = (0..universe).collect();
    ids.shuffle(rng);
    RankedList::new(topic, ids.into_iter().take(len).map(doc).collect()).unwrap()
}

/// Judges each document of `0..universe` with probability `fraction`,
/// drawing grade indices uniformly from the scale.
pub fn random_judgments(
    rng: &mut ChaCha8Rng,
    topic: &str,
    universe: usize,
    fraction: f64,
    scale: &GradeScale,
) -> JudgmentSet {
    let mut judged = JudgmentSet::new();
    for i in 0..universe {
        if rng.random::<f64>() < fraction {
            let index = rng.random_range(0..=scale.levels());
            judged.insert(topic, doc(i), index);
        }
    }
    judged
}

/// A random aligned pair at `depth` with partial judgments; list lengths
/// vary between half the depth and the depth itself so padding occurs.
pub fn random_pair(
    rng: &mut ChaCha8Rng,
    universe: usize,
    depth: usize,
    judged_fraction: f64,
    scale: &GradeScale,
) -> AlignedPair {
    let min_len = depth.div_ceil(2).max(1);
    let len_a = rng.random_range(min_len..=depth.min(universe));
    let len_b = rng.random_range(min_len..=depth.min(universe));
    let a = random_list(rng, "t", universe, len_a);
    let b = random_list(rng, "t", universe, len_b);
    let judged = random_judgments(rng, "t", universe, judged_fraction, scale);
    align(&a, &b, depth, &judged, scale).unwrap()
}

/// A pair whose lists are permutations of the same `depth` documents, so
/// every variable is bound (or predetermined under `judged_fraction`).
pub fn permutation_pair(
    rng: &mut ChaCha8Rng,
    depth: usize,
    judged_fraction: f64,
    scale: &GradeScale,
) -> AlignedPair {
    let a = random_list(rng, "t", depth, depth);
    let mut docs: Vec<DocId> = a.docs().to_vec();
    docs.shuffle(rng);
    let b = RankedList::new("t", docs).unwrap();
    let judged = random_judgments(rng, "t", depth, judged_fraction, scale);
    align(&a, &b, depth, &judged, scale).unwrap()
}
