//! Measures expressible as a discounted dot product, and their MED closed
//! forms: precision@k, nDCG@k, and rank-biased precision.
//!
//! A measure here scores a relevance vector as the dot product with a
//! non-increasing discount vector, divided by a fixed normalization. For
//! such measures the maximizing assignment needs no search: a free variable
//! takes the top grade on the side being favored and zero on the other, and
//! a variable shared between the lists takes the top grade exactly when its
//! occurrence on the favored side carries the larger discount.

use crate::align::{AlignedPair, Slot, VariableKind};
use crate::error::MedError;
use crate::list::{ratio_to_f64, GradeScale};
use crate::med::{Direction, MedOutcome};

/// A rank-discounted measure: `score(c) = (sum_i c_i * d_i) / normalization`
/// with `d` non-negative and non-increasing.
#[derive(Debug, Clone)]
pub struct DotProductMeasure {
    discounts: Vec<f64>,
    normalization: f64,
    top_grade: f64,
    tail_persistence: Option<f64>,
}

/// The best achievable score difference in one fixed direction, together
/// with the relevance assignment that achieves it.
#[derive(Debug, Clone)]
pub struct DirectionalMax {
    pub value: f64,
    pub witness_a: Vec<f64>,
    pub witness_b: Vec<f64>,
}

impl DotProductMeasure {
    /// Builds a measure from an explicit discount vector.
    pub fn new(
        discounts: Vec<f64>,
        normalization: f64,
        top_grade: f64,
    ) -> Result<Self, MedError> {
        if discounts.is_empty() {
            return Err(MedError::InvalidMeasure("empty discount vector".into()));
        }
        for (i, w) in discounts.windows(2).enumerate() {
            if w[1] > w[0] {
                return Err(MedError::InvalidMeasure(format!(
                    "discount increases from rank {} to {}",
                    i + 1,
                    i + 2
                )));
            }
        }
        if discounts.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(MedError::InvalidMeasure("negative discount".into()));
        }
        if !normalization.is_finite() || normalization <= 0.0 {
            return Err(MedError::InvalidMeasure(format!(
                "normalization must be positive, got {normalization}"
            )));
        }
        if !(top_grade > 0.0 && top_grade <= 1.0) {
            return Err(MedError::InvalidMeasure(format!(
                "top grade must lie in (0, 1], got {top_grade}"
            )));
        }
        Ok(DotProductMeasure {
            discounts,
            normalization,
            top_grade,
            tail_persistence: None,
        })
    }

    /// Precision at cutoff `k`: unit discounts, normalized by `k`.
    pub fn precision(k: usize) -> Result<Self, MedError> {
        if k == 0 {
            return Err(MedError::InvalidArgument("precision cutoff must be >= 1".into()));
        }
        Self::new(vec![1.0; k], k as f64, 1.0)
    }

    /// nDCG at cutoff `k` over `scale`, with the `1 / log2(rank + 1)` gain
    /// discount and an ideal ranking of top-grade documents as normalizer.
    pub fn ndcg(k: usize, scale: &GradeScale) -> Result<Self, MedError> {
        if k == 0 {
            return Err(MedError::InvalidArgument("nDCG cutoff must be >= 1".into()));
        }
        let discounts: Vec<f64> = (1..=k).map(|i| 1.0 / ((i + 1) as f64).log2()).collect();
        let top = scale.top_f64();
        let normalization = discounts.iter().map(|d| top * d).sum();
        Self::new(discounts, normalization, top)
    }

    /// Rank-biased precision with the given persistence, materialized down
    /// to `depth` ranks. The geometric weight that remains past `depth` is
    /// accounted for analytically by [`DotProductMeasure::tail_term`].
    pub fn rbp(persistence: f64, depth: usize) -> Result<Self, MedError> {
        if !(persistence > 0.0 && persistence < 1.0) {
            return Err(MedError::InvalidMeasure(format!(
                "persistence must lie in (0, 1), got {persistence}"
            )));
        }
        if depth == 0 {
            return Err(MedError::InvalidArgument("RBP depth must be >= 1".into()));
        }
        let discounts = (0..depth)
            .map(|i| (1.0 - persistence) * persistence.powi(i as i32))
            .collect();
        let mut measure = Self::new(discounts, 1.0, 1.0)?;
        measure.tail_persistence = Some(persistence);
        Ok(measure)
    }

    pub fn discounts(&self) -> &[f64] {
        &self.discounts
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn top_grade(&self) -> f64 {
        self.top_grade
    }

    /// Scores a relevance vector. Entries past the discount vector weigh
    /// nothing; missing entries count as zero.
    pub fn score(&self, relevance: &[f64]) -> f64 {
        let dot: f64 = relevance
            .iter()
            .zip(&self.discounts)
            .map(|(c, d)| c * d)
            .sum();
        dot / self.normalization
    }

    /// What the ranks past the discount vector can still contribute to a
    /// score difference when both tails are unconstrained: the remaining
    /// geometric mass for RBP, zero for truncated measures.
    pub fn tail_term(&self) -> f64 {
        match self.tail_persistence {
            Some(p) => p.powi(self.discounts.len() as i32),
            None => 0.0,
        }
    }

    /// Maximizes `score(A) - score(B)` over all assignments consistent with
    /// the pair's constraints. Free slots take the top grade on side A and
    /// zero on side B; a shared document takes the top grade exactly when
    /// its rank in A precedes its rank in B, and zero otherwise (including
    /// equal ranks, where its value cancels anyway).
    pub fn maximize_direction(&self, pair: &AlignedPair) -> DirectionalMax {
        let favored = |slot: &Slot, rank: usize| -> f64 {
            match &slot.kind {
                VariableKind::Free => self.top_grade,
                VariableKind::Predetermined { grade } => ratio_to_f64(*grade),
                VariableKind::Bound { partner_rank } => {
                    if rank < *partner_rank {
                        self.top_grade
                    } else {
                        0.0
                    }
                }
            }
        };
        let unfavored = |slot: &Slot, rank: usize| -> f64 {
            match &slot.kind {
                VariableKind::Free => 0.0,
                VariableKind::Predetermined { grade } => ratio_to_f64(*grade),
                VariableKind::Bound { partner_rank } => {
                    if *partner_rank < rank {
                        self.top_grade
                    } else {
                        0.0
                    }
                }
            }
        };
        let witness_a: Vec<f64> = pair
            .side_a()
            .iter()
            .enumerate()
            .map(|(i, s)| favored(s, i + 1))
            .collect();
        let witness_b: Vec<f64> = pair
            .side_b()
            .iter()
            .enumerate()
            .map(|(i, s)| unfavored(s, i + 1))
            .collect();
        // Subtracting the dot products before the one division keeps the
        // value exact whenever the dots are: for precision the result is
        // then the correctly rounded (favored - unfavored) / k.
        let dot = |rel: &[f64]| -> f64 {
            rel.iter().zip(&self.discounts).map(|(c, d)| c * d).sum()
        };
        let value = (dot(&witness_a) - dot(&witness_b)) / self.normalization + self.tail_term();
        DirectionalMax {
            value,
            witness_a,
            witness_b,
        }
    }
}

/// Runs [`DotProductMeasure::maximize_direction`] both ways and keeps the
/// larger difference. Ties report direction A.
pub fn med_dotprod(measure: &DotProductMeasure, pair: &AlignedPair) -> MedOutcome {
    let forward = measure.maximize_direction(pair);
    let backward = measure.maximize_direction(&pair.swapped());
    if backward.value > forward.value {
        MedOutcome {
            value: backward.value,
            direction: Direction::B,
            witness_a: backward.witness_b,
            witness_b: backward.witness_a,
            epsilon: None,
        }
    } else {
        MedOutcome {
            value: forward.value,
            direction: Direction::A,
            witness_a: forward.witness_a,
            witness_b: forward.witness_b,
            epsilon: None,
        }
    }
}

fn require_depth(pair: &AlignedPair, k: usize) -> Result<(), MedError> {
    if pair.depth() < k {
        return Err(MedError::InvalidArgument(format!(
            "pair depth {} is shallower than cutoff {k}; align deeper (padding is free)",
            pair.depth()
        )));
    }
    Ok(())
}

/// MED for precision@k under binary relevance.
pub fn med_precision(pair: &AlignedPair, k: usize) -> Result<MedOutcome, MedError> {
    let measure = DotProductMeasure::precision(k)?;
    require_depth(pair, k)?;
    Ok(med_dotprod(&measure, pair))
}

/// MED for nDCG@k over a graded scale.
pub fn med_ndcg(pair: &AlignedPair, k: usize, scale: &GradeScale) -> Result<MedOutcome, MedError> {
    let measure = DotProductMeasure::ndcg(k, scale)?;
    require_depth(pair, k)?;
    Ok(med_dotprod(&measure, pair))
}

/// MED for rank-biased precision, evaluated over the pair's full depth with
/// the remaining geometric tail added analytically.
pub fn med_rbp(pair: &AlignedPair, persistence: f64) -> Result<MedOutcome, MedError> {
    let measure = DotProductMeasure::rbp(persistence, pair.depth())?;
    Ok(med_dotprod(&measure, pair))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::align;
    use crate::list::{DocId, JudgmentSet, RankedList};

    fn list(topic: &str, ids: &[&str]) -> RankedList {
        RankedList::new(topic, ids.iter().map(|s| DocId::new(*s).unwrap()).collect()).unwrap()
    }

    fn pair(a: &[&str], b: &[&str], depth: usize) -> AlignedPair {
        align(
            &list("t", a),
            &list("t", b),
            depth,
            &JudgmentSet::new(),
            &GradeScale::binary(),
        )
        .unwrap()
    }

    #[test]
    fn precision_is_one_minus_overlap() {
        let p = pair(&["x", "y", "z"], &["x", "u", "v"], 3);
        let outcome = med_precision(&p, 3).unwrap();
        assert_eq!(outcome.value, 2.0 / 3.0);
        let disjoint = med_precision(&pair(&["x", "y"], &["u", "v"], 2), 2).unwrap();
        assert_eq!(disjoint.value, 1.0);
        let identical = med_precision(&pair(&["x", "y"], &["x", "y"], 2), 2).unwrap();
        assert_eq!(identical.value, 0.0);
    }

    #[test]
    fn precision_counts_padding_as_unknown() {
        let p = pair(&["x"], &["x"], 3);
        let outcome = med_precision(&p, 3).unwrap();
        assert_eq!(outcome.value, 2.0 / 3.0);
    }

    #[test]
    fn ndcg_of_a_swapped_pair() {
        let p = pair(&["x", "y"], &["y", "x"], 2);
        let outcome = med_ndcg(&p, 2, &GradeScale::binary()).unwrap();
        let d2 = 1.0 / 3.0f64.log2();
        assert!((outcome.value - (1.0 - d2) / (1.0 + d2)).abs() < 1e-15);
        assert!((outcome.value - 0.226_294_385_530_596_8).abs() < 1e-12);
        assert_eq!(outcome.witness_a, vec![1.0, 0.0]);
        assert_eq!(outcome.witness_b, vec![0.0, 1.0]);
    }

    #[test]
    fn ndcg_is_invariant_to_the_discount_log_base() {
        let p = pair(&["x", "y", "z"], &["z", "q", "x"], 3);
        let base2 = med_ndcg(&p, 3, &GradeScale::binary()).unwrap();
        let nat: Vec<f64> = (1..=3).map(|i| 1.0 / ((i + 1) as f64).ln()).collect();
        let norm: f64 = nat.iter().sum();
        let renormed = DotProductMeasure::new(nat, norm, 1.0).unwrap();
        let same = med_dotprod(&renormed, &p);
        assert!((base2.value - same.value).abs() < 1e-12);
    }

    #[test]
    fn graded_judgments_flow_through_ndcg() {
        let scale = GradeScale::new(2).unwrap();
        let mut judged = JudgmentSet::new();
        judged.insert("t", DocId::new("x").unwrap(), 2);
        judged.insert("t", DocId::new("y").unwrap(), 2);
        let p = align(
            &list("t", &["x", "y"]),
            &list("t", &["y", "x"]),
            2,
            &judged,
            &scale,
        )
        .unwrap();
        let outcome = med_ndcg(&p, 2, &scale).unwrap();
        assert_eq!(outcome.value, 0.0);
    }

    #[test]
    fn rbp_of_a_swapped_pair_includes_the_tail() {
        let p = pair(&["x", "y"], &["y", "x"], 2);
        let outcome = med_rbp(&p, 0.9).unwrap();
        assert!((outcome.value - 0.82).abs() < 1e-12);
    }

    #[test]
    fn rbp_distance_between_identical_lists_is_the_tail_mass() {
        let p = pair(&["x", "y", "z"], &["x", "y", "z"], 3);
        let outcome = med_rbp(&p, 0.9).unwrap();
        assert_eq!(outcome.value, DotProductMeasure::rbp(0.9, 3).unwrap().tail_term());
        assert!((outcome.value - 0.729).abs() < 1e-12);
    }

    #[test]
    fn deeper_alignment_cannot_increase_rbp_distance() {
        let a = ["a", "b", "c", "d", "e", "f", "g", "h"];
        let b = ["c", "a", "x", "d", "h", "y", "g", "b"];
        let shallow = med_rbp(&pair(&a[..4], &b[..4], 4), 0.9).unwrap();
        let deep = med_rbp(&pair(&a, &b, 8), 0.9).unwrap();
        assert!(deep.value <= shallow.value + 1e-15);
        assert!(shallow.value - deep.value <= 2.0 * 0.9f64.powi(4) + 1e-15);
    }

    #[test]
    fn tail_terms_vanish_for_truncated_measures() {
        assert_eq!(DotProductMeasure::precision(5).unwrap().tail_term(), 0.0);
        assert_eq!(
            DotProductMeasure::ndcg(5, &GradeScale::binary())
                .unwrap()
                .tail_term(),
            0.0
        );
        let rbp_tail = DotProductMeasure::rbp(0.9, 5).unwrap().tail_term();
        assert!((rbp_tail - 0.59049).abs() < 1e-12);
    }

    #[test]
    fn shallow_pairs_are_rejected() {
        let p = pair(&["x", "y"], &["y", "x"], 2);
        assert!(matches!(
            med_precision(&p, 3),
            Err(MedError::InvalidArgument(_))
        ));
        assert!(matches!(
            med_ndcg(&p, 3, &GradeScale::binary()),
            Err(MedError::InvalidArgument(_))
        ));
    }

    #[test]
    fn malformed_measures_are_rejected() {
        assert!(matches!(
            DotProductMeasure::new(vec![0.5, 0.9], 1.0, 1.0),
            Err(MedError::InvalidMeasure(_))
        ));
        assert!(matches!(
            DotProductMeasure::new(vec![1.0, -0.1], 1.0, 1.0),
            Err(MedError::InvalidMeasure(_))
        ));
        assert!(matches!(
            DotProductMeasure::new(vec![1.0], 0.0, 1.0),
            Err(MedError::InvalidMeasure(_))
        ));
        assert!(matches!(
            DotProductMeasure::new(vec![1.0], 1.0, 1.5),
            Err(MedError::InvalidMeasure(_))
        ));
        assert!(matches!(
            DotProductMeasure::rbp(1.0, 5),
            Err(MedError::InvalidMeasure(_))
        ));
        assert!(matches!(
            DotProductMeasure::precision(0),
            Err(MedError::InvalidArgument(_))
        ));
    }

    #[test]
    fn direction_reports_the_better_side() {
        let mut judged = JudgmentSet::new();
        judged.insert("t", DocId::new("u").unwrap(), 1);
        judged.insert("t", DocId::new("v").unwrap(), 1);
        let scale = GradeScale::binary();
        let p = align(
            &list("t", &["x", "y"]),
            &list("t", &["u", "v"]),
            2,
            &judged,
            &scale,
        )
        .unwrap();
        // Favoring A, the judged relevant documents on B cancel whatever
        // the free side gains; favoring B nothing cancels, so B wins.
        let outcome = med_precision(&p, 2).unwrap();
        assert_eq!(outcome.direction, Direction::B);
        assert_eq!(outcome.value, 1.0);
        let tied = med_precision(&pair(&["x", "y"], &["u", "v"], 2), 2).unwrap();
        assert_eq!(tied.direction, Direction::A);
        let mut harsher = JudgmentSet::new();
        harsher.insert("t", DocId::new("x").unwrap(), 0);
        harsher.insert("t", DocId::new("y").unwrap(), 0);
        harsher.insert("t", DocId::new("u").unwrap(), 1);
        harsher.insert("t", DocId::new("v").unwrap(), 1);
        let p = align(
            &list("t", &["x", "y"]),
            &list("t", &["u", "v"]),
            2,
            &harsher,
            &scale,
        )
        .unwrap();
        let outcome = med_precision(&p, 2).unwrap();
        assert_eq!(outcome.direction, Direction::B);
        assert_eq!(outcome.value, 1.0);
    }
}
