//! MED for expected reciprocal rank under the cascade user model.
//!
//! ERR is not a dot product: each rank's gain is damped by the relevance of
//! everything above it, so maximizing a score difference needs search. Two
//! facts keep that search small. Free variables still take the top grade on
//! the favored side and zero on the other, and at a maximum each shared
//! document is either at the top grade or irrelevant. The search therefore
//! enumerates which shared documents to raise, and because every raised
//! document multiplies the tail by `(1 - top_grade)`, assignments raising
//! more than a handful of them can move the score by a provably tiny
//! amount. Raising caps at [`ErrParams::max_relevant`] documents and the
//! result carries that residual as an explicit error bound.

use crate::align::{AlignedPair, Slot, VariableKind};
use crate::error::MedError;
use crate::list::ratio_to_f64;
use crate::med::{Direction, MedOutcome};

/// Parameters for the truncated ERR maximization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrParams {
    top_grade: f64,
    depth: usize,
    max_relevant: usize,
}

impl Default for ErrParams {
    fn default() -> Self {
        ErrParams {
            top_grade: 0.75,
            depth: 30,
            max_relevant: 5,
        }
    }
}

impl ErrParams {
    pub fn new(top_grade: f64, depth: usize, max_relevant: usize) -> Result<Self, MedError> {
        if !(top_grade > 0.0 && top_grade <= 1.0) {
            return Err(MedError::InvalidArgument(format!(
                "top grade must lie in (0, 1], got {top_grade}"
            )));
        }
        if depth == 0 {
            return Err(MedError::InvalidArgument("ERR depth must be >= 1".into()));
        }
        Ok(ErrParams {
            top_grade,
            depth,
            max_relevant,
        })
    }

    pub fn top_grade(&self) -> f64 {
        self.top_grade
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn max_relevant(&self) -> usize {
        self.max_relevant
    }
}

fn check_relevance(relevance: &[f64]) -> Result<(), MedError> {
    for (i, c) in relevance.iter().enumerate() {
        if !(0.0..=1.0).contains(c) {
            return Err(MedError::InvalidArgument(format!(
                "relevance {c} at rank {} is outside [0, 1]",
                i + 1
            )));
        }
    }
    Ok(())
}

fn err_score_unchecked(relevance: &[f64], depth: usize) -> f64 {
    let mut reach = 1.0;
    let mut total = 0.0;
    for (i, &c) in relevance.iter().take(depth).enumerate() {
        total += reach * c / (i + 1) as f64;
        reach *= 1.0 - c;
    }
    total
}

/// Expected reciprocal rank of a relevance vector down to `depth`: the
/// expectation of `1 / stopping rank` where a user scans downward and stops
/// at rank `i` with probability `c_i`, having been unsatisfied above.
pub fn err_score(relevance: &[f64], depth: usize) -> Result<f64, MedError> {
    check_relevance(relevance)?;
    Ok(err_score_unchecked(relevance, depth))
}

/// Probability that the scanning user reaches `rank` (1-based), i.e. was
/// not satisfied by anything above it.
pub fn reach_probability(relevance: &[f64], rank: usize) -> Result<f64, MedError> {
    check_relevance(relevance)?;
    Ok(relevance
        .iter()
        .take(rank.saturating_sub(1))
        .map(|c| 1.0 - c)
        .product())
}

/// Upper bound on everything ERR can still earn after `relevant_seen`
/// documents of grade `top_grade` have been passed: each one multiplies the
/// remaining reach by `(1 - top_grade)`, and the reciprocal rank below the
/// last of them is at most `1 / (relevant_seen + 1)`.
pub fn epsilon_bound(relevant_seen: usize, top_grade: f64) -> f64 {
    (1.0 - top_grade).powi(relevant_seen as i32) / (relevant_seen + 1) as f64
}

struct DirectionalErr {
    value: f64,
    witness_a: Vec<f64>,
    witness_b: Vec<f64>,
    epsilon: f64,
}

/// Number of subsets of size at most `cap` from `n` items, saturating.
fn subset_count(n: usize, cap: usize) -> u128 {
    let mut total: u128 = 0;
    let mut choose: u128 = 1;
    for s in 0..=cap.min(n) {
        if s > 0 {
            choose = choose.saturating_mul((n - s + 1) as u128) / s as u128;
        }
        total = total.saturating_add(choose);
    }
    total
}

const SUBSET_BUDGET: u128 = 1 << 22;

/// Advances `combo` to the next lexicographic combination of its size over
/// `0..n`, returning false after the last one.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let s = combo.len();
    let mut i = s;
    while i > 0 {
        i -= 1;
        if combo[i] < n - s + i {
            combo[i] += 1;
            for j in (i + 1)..s {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn maximize_direction(pair: &AlignedPair, params: &ErrParams) -> Result<DirectionalErr, MedError> {
    let depth = params.depth;
    let g = params.top_grade;
    let base = |side: &[Slot], favored: bool| -> Vec<f64> {
        side.iter()
            .map(|slot| match &slot.kind {
                VariableKind::Free => {
                    if favored {
                        g
                    } else {
                        0.0
                    }
                }
                VariableKind::Predetermined { grade } => ratio_to_f64(*grade),
                VariableKind::Bound { .. } => 0.0,
            })
            .collect()
    };
    let mut a = base(pair.side_a(), true);
    let mut b = base(pair.side_b(), false);
    let bound = pair.bound_pairs();
    let cap = params.max_relevant.min(bound.len());
    if subset_count(bound.len(), cap) > SUBSET_BUDGET {
        return Err(MedError::TooLarge(format!(
            "{} shared documents with up to {cap} raised exceeds the subset budget",
            bound.len()
        )));
    }

    // Judged top-grade documents also attenuate the cascade, but only the
    // ones ranked above every subset the search might have missed can be
    // counted: an unexplored raise always has at least `cap` shared
    // documents before it, so it sits no higher than the (cap + 1)-th
    // shared slot.
    let pinned_top = if cap < bound.len() {
        pair.side_a()
            .iter()
            .take(bound[cap].0 - 1)
            .filter(|slot| {
                matches!(&slot.kind, VariableKind::Predetermined { grade } if ratio_to_f64(*grade) == g)
            })
            .count()
    } else {
        0
    };

    let mut best_value = f64::NEG_INFINITY;
    let mut best: Option<(Vec<f64>, Vec<f64>)> = None;

    // Subsets of shared documents to raise to the top grade, by size and
    // then lexicographically; the first maximum encountered is kept.
    for size in 0..=cap {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            for &v in &combo {
                let (ra, rb) = bound[v];
                a[ra - 1] = g;
                b[rb - 1] = g;
            }
            let diff = err_score_unchecked(&a, depth) - err_score_unchecked(&b, depth);
            if diff > best_value {
                best_value = diff;
                best = Some((a.clone(), b.clone()));
            }
            for &v in &combo {
                let (ra, rb) = bound[v];
                a[ra - 1] = 0.0;
                b[rb - 1] = 0.0;
            }
            if !next_combination(&mut combo, bound.len()) {
                break;
            }
        }
    }

    let (witness_a, witness_b) = best.expect("the empty subset is always evaluated");
    // When the subset search is cut off, bound what the unexplored subsets
    // could add: every one of them walks past `cap` raised shared documents
    // plus the judged top-grade documents above the horizon. When the
    // search is exhaustive, the only mass not accounted for lies below the
    // evaluation depth, behind every relevant document of the winning
    // assignment.
    let p_count = if cap < bound.len() {
        cap + pinned_top
    } else {
        witness_a.iter().filter(|&&c| c == g).count()
    };
    Ok(DirectionalErr {
        value: best_value,
        witness_a,
        witness_b,
        epsilon: epsilon_bound(p_count, g),
    })
}

/// MED for ERR over a pair aligned at exactly `params.depth()`. The value
/// is a lower bound on the unbounded maximization; adding the outcome's
/// `epsilon` gives an upper bound.
pub fn med_err(pair: &AlignedPair, params: &ErrParams) -> Result<MedOutcome, MedError> {
    if pair.depth() != params.depth {
        return Err(MedError::InvalidArgument(format!(
            "pair depth {} must equal the ERR depth {}",
            pair.depth(),
            params.depth
        )));
    }
    let forward = maximize_direction(pair, params)?;
    let backward = maximize_direction(&pair.swapped(), params)?;
    let epsilon = forward.epsilon.max(backward.epsilon);
    Ok(if backward.value > forward.value {
        MedOutcome {
            value: backward.value,
            direction: Direction::B,
            witness_a: backward.witness_b,
            witness_b: backward.witness_a,
            epsilon: Some(epsilon),
        }
    } else {
        MedOutcome {
            value: forward.value,
            direction: Direction::A,
            witness_a: forward.witness_a,
            witness_b: forward.witness_b,
            epsilon: Some(epsilon),
        }
    })
}
