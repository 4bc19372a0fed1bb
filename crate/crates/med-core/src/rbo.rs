//! Rank-biased overlap, the similarity baseline MED distances are compared
//! against.

use std::collections::HashSet;

use crate::error::MedError;
use crate::list::{DocId, RankedList};

/// Parameters for truncated rank-biased overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RboParams {
    persistence: f64,
    depth: usize,
}

impl RboParams {
    pub fn new(persistence: f64, depth: usize) -> Result<Self, MedError> {
        if !(persistence > 0.0 && persistence < 1.0) {
            return Err(MedError::InvalidArgument(format!(
                "persistence must lie in (0, 1), got {persistence}"
            )));
        }
        if depth == 0 {
            return Err(MedError::InvalidArgument("RBO depth must be >= 1".into()));
        }
        Ok(RboParams { persistence, depth })
    }

    pub fn persistence(&self) -> f64 {
        self.persistence
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Truncated rank-biased overlap: the weighted average of prefix agreements
/// `|A_{1..d} ∩ B_{1..d}| / d` with geometrically decaying weights, summed
/// down to the truncation depth with no extrapolation. Always in `[0, 1)`.
pub fn rbo(a: &RankedList, b: &RankedList, params: &RboParams) -> f64 {
    let mut seen_a: HashSet<&DocId> = HashSet::new();
    let mut seen_b: HashSet<&DocId> = HashSet::new();
    let mut overlap = 0usize;
    let mut weight = 1.0 - params.persistence;
    let mut sum = 0.0;
    for d in 1..=params.depth {
        if let Some(doc) = a.at_rank(d) {
            if seen_b.contains(doc) {
                overlap += 1;
            }
            seen_a.insert(doc);
        }
        if let Some(doc) = b.at_rank(d) {
            if seen_a.contains(doc) {
                overlap += 1;
            }
            seen_b.insert(doc);
        }
        sum += weight * overlap as f64 / d as f64;
        weight *= params.persistence;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::list::DocId;
    use approx::assert_abs_diff_eq;

    fn list(ids: &[&str]) -> RankedList {
        RankedList::new("t1", ids.iter().map(|s| DocId::new(*s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn identical_lists_approach_one() {
        let a = list(&["x", "y", "z"]);
        let params = RboParams::new(0.9, 3).unwrap();
        // (1 - p) * (1 + p + p^2) = 1 - p^3
        assert_abs_diff_eq!(rbo(&a, &a, &params), 1.0 - 0.9f64.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn disjoint_lists_score_zero() {
        let a = list(&["x", "y"]);
        let b = list(&["u", "v"]);
        let params = RboParams::new(0.9, 2).unwrap();
        assert_eq!(rbo(&a, &b, &params), 0.0);
    }

    #[test]
    fn swapped_pair_at_depth_two() {
        let a = list(&["x", "y"]);
        let b = list(&["y", "x"]);
        let params = RboParams::new(0.9, 2).unwrap();
        // Agreement is 0 at depth 1 and 1 at depth 2: 0.1 * (0 + 0.9) = 0.09.
        assert_abs_diff_eq!(rbo(&a, &b, &params), 0.09, epsilon = 1e-12);
    }

    #[test]
    fn symmetric_and_bounded() {
        let a = list(&["a", "b", "c", "d"]);
        let b = list(&["c", "a", "x"]);
        let params = RboParams::new(0.8, 6).unwrap();
        let forward = rbo(&a, &b, &params);
        let backward = rbo(&b, &a, &params);
        assert_eq!(forward, backward);
        assert!((0.0..1.0).contains(&forward));
    }

    #[test]
    fn truncation_keeps_shorter_lists_partial() {
        // Depth runs past both lists; prefixes stop growing but the
        // per-depth agreement still divides by the full depth.
        let a = list(&["x"]);
        let b = list(&["x"]);
        let params = RboParams::new(0.5, 3).unwrap();
        let expected = 0.5 * (1.0 / 1.0) + 0.25 * (1.0 / 2.0) + 0.125 * (1.0 / 3.0);
        assert_abs_diff_eq!(rbo(&a, &b, &params), expected, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(RboParams::new(1.0, 5).is_err());
        assert!(RboParams::new(0.0, 5).is_err());
        assert!(RboParams::new(0.9, 0).is_err());
    }
}
