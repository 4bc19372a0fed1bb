//! Pairing two rankings into one constrained set of relevance variables.
//!
//! Each rank down to the alignment depth holds one relevance variable per
//! side. A judged document's variable is pinned to its grade. An unjudged
//! document appearing in both prefixes yields two variables constrained to
//! be equal, recorded as a `Bound` slot on each side pointing at the
//! partner's rank. Everything else, including padding ranks past the end of
//! a short list, is free to take any value when a measure is maximized.

use std::collections::HashMap;

use num::rational::Rational64;
use num::Zero;

use crate::error::MedError;
use crate::list::{DocId, GradeScale, JudgmentSet, RankedList};

/// How a rank's relevance variable is constrained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VariableKind {
    /// Unconstrained; takes whatever value maximizes the objective.
    Free,
    /// Equal to the variable at `partner_rank` (1-based) on the other side.
    Bound { partner_rank: usize },
    /// Fixed by a judgment.
    Predetermined { grade: Rational64 },
}

/// One rank on one side: the document occupying it (none for padding past
/// the end of the list) and its variable's constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub doc: Option<DocId>,
    pub kind: VariableKind,
}

/// Two sides of aligned relevance variables down to a common depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPair {
    side_a: Vec<Slot>,
    side_b: Vec<Slot>,
}

impl AlignedPair {
    /// Assembles a pair from explicit slots, checking structural rules:
    /// equal depths, symmetric bound references joining occurrences of the
    /// same document, and grades within `[0, 1]`.
    pub fn new(side_a: Vec<Slot>, side_b: Vec<Slot>) -> Result<Self, MedError> {
        if side_a.len() != side_b.len() {
            return Err(MedError::InvalidPair(format!(
                "sides have different depths ({} vs {})",
                side_a.len(),
                side_b.len()
            )));
        }
        if side_a.is_empty() {
            return Err(MedError::InvalidPair("alignment depth is zero".into()));
        }
        let pair = AlignedPair { side_a, side_b };
        for (mine, other, label) in [
            (&pair.side_a, &pair.side_b, "A"),
            (&pair.side_b, &pair.side_a, "B"),
        ] {
            for (i, slot) in mine.iter().enumerate() {
                let rank = i + 1;
                match &slot.kind {
                    VariableKind::Free => {}
                    VariableKind::Predetermined { grade } => {
                        if grade < &Rational64::zero() || grade > &Rational64::from_integer(1) {
                            return Err(MedError::InvalidPair(format!(
                                "grade {grade} at {label}:{rank} is outside [0, 1]"
                            )));
                        }
                    }
                    VariableKind::Bound { partner_rank } => {
                        let partner = partner_rank
                            .checked_sub(1)
                            .and_then(|p| other.get(p))
                            .ok_or_else(|| {
                                MedError::InvalidPair(format!(
                                    "bound slot {label}:{rank} points past the other side"
                                ))
                            })?;
                        let symmetric = matches!(
                            partner.kind,
                            VariableKind::Bound { partner_rank: back } if back == rank
                        );
                        if !symmetric {
                            return Err(MedError::InvalidPair(format!(
                                "bound slot {label}:{rank} is not mirrored at rank {partner_rank}"
                            )));
                        }
                        if slot.doc.is_none() || slot.doc != partner.doc {
                            return Err(MedError::InvalidPair(format!(
                                "bound slots {label}:{rank} and {partner_rank} hold different documents"
                            )));
                        }
                    }
                }
            }
        }
        Ok(pair)
    }

    pub fn depth(&self) -> usize {
        self.side_a.len()
    }

    pub fn side_a(&self) -> &[Slot] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[Slot] {
        &self.side_b
    }

    /// The same pair viewed from the other direction.
    pub fn swapped(&self) -> AlignedPair {
        AlignedPair {
            side_a: self.side_b.clone(),
            side_b: self.side_a.clone(),
        }
    }

    /// Ranks of equality constraints as `(rank in A, rank in B)`, in rank
    /// order on the A side.
    pub fn bound_pairs(&self) -> Vec<(usize, usize)> {
        self.side_a
            .iter()
            .enumerate()
            .filter_map(|(i, slot)| match slot.kind {
                VariableKind::Bound { partner_rank } => Some((i + 1, partner_rank)),
                _ => None,
            })
            .collect()
    }
}

/// Aligns two rankings for the same topic down to `depth`, pinning judged
/// documents to their grades on `scale`.
pub fn align(
    a: &RankedList,
    b: &RankedList,
    depth: usize,
    judgments: &JudgmentSet,
    scale: &GradeScale,
) -> Result<AlignedPair, MedError> {
    if a.topic() != b.topic() {
        return Err(MedError::InvalidPair(format!(
            "topics differ: {} vs {}",
            a.topic(),
            b.topic()
        )));
    }
    if depth == 0 {
        return Err(MedError::InvalidArgument("alignment depth must be >= 1".into()));
    }
    let rank_in = |list: &RankedList| -> HashMap<DocId, usize> {
        list.docs()
            .iter()
            .take(depth)
            .enumerate()
            .map(|(i, d)| (d.clone(), i + 1))
            .collect()
    };
    let in_a = rank_in(a);
    let in_b = rank_in(b);
    let topic = a.topic();

    let classify = |list: &RankedList, other: &HashMap<DocId, usize>| -> Vec<Slot> {
        (1..=depth)
            .map(|rank| match list.at_rank(rank) {
                None => Slot {
                    doc: None,
                    kind: VariableKind::Free,
                },
                Some(doc) => {
                    let kind = if let Some(index) = judgments.get(topic, doc) {
                        VariableKind::Predetermined {
                            grade: scale.grade(index),
                        }
                    } else if let Some(&partner_rank) = other.get(doc) {
                        VariableKind::Bound { partner_rank }
                    } else {
                        VariableKind::Free
                    };
                    Slot {
                        doc: Some(doc.clone()),
                        kind,
                    }
                }
            })
            .collect()
    };

    Ok(AlignedPair {
        side_a: classify(a, &in_b),
        side_b: classify(b, &in_a),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(s: &str) -> DocId {
        DocId::new(s).unwrap()
    }

    fn list(topic: &str, ids: &[&str]) -> RankedList {
        RankedList::new(topic, ids.iter().map(|s| doc(s)).collect()).unwrap()
    }

    #[test]
    fn swapped_lists_bind_all_ranks() {
        let a = list("t1", &["x", "y"]);
        let b = list("t1", &["y", "x"]);
        let pair = align(&a, &b, 2, &JudgmentSet::new(), &GradeScale::binary()).unwrap();
        let partners = |side: &[Slot]| -> Vec<usize> {
            side.iter()
                .map(|s| match s.kind {
                    VariableKind::Bound { partner_rank } => partner_rank,
                    _ => panic!("expected bound slot"),
                })
                .collect()
        };
        assert_eq!(partners(pair.side_a()), vec![2, 1]);
        assert_eq!(partners(pair.side_b()), vec![2, 1]);
        assert_eq!(pair.bound_pairs(), vec![(1, 2), (2, 1)]);
    }

    #[test]
    fn judged_document_is_pinned_on_both_sides() {
        let a = list("t1", &["x", "y"]);
        let b = list("t1", &["x", "z"]);
        let scale = GradeScale::new(2).unwrap();
        let mut judgments = JudgmentSet::new();
        judgments.insert("t1", doc("x"), 2);
        let pair = align(&a, &b, 2, &judgments, &scale).unwrap();
        let pinned = VariableKind::Predetermined {
            grade: Rational64::new(3, 4),
        };
        assert_eq!(pair.side_a()[0].kind, pinned);
        assert_eq!(pair.side_b()[0].kind, pinned);
        assert_eq!(pair.side_a()[1].kind, VariableKind::Free);
        assert_eq!(pair.side_b()[1].kind, VariableKind::Free);
    }

    #[test]
    fn short_disjoint_lists_are_all_free() {
        let a = list("t1", &["x"]);
        let b = list("t1", &["z"]);
        let pair = align(&a, &b, 3, &JudgmentSet::new(), &GradeScale::binary()).unwrap();
        for side in [pair.side_a(), pair.side_b()] {
            assert!(side.iter().all(|s| s.kind == VariableKind::Free));
        }
        assert_eq!(pair.side_a()[1].doc, None);
        assert_eq!(pair.side_b()[2].doc, None);
    }

    #[test]
    fn topic_mismatch_is_rejected() {
        let a = list("t1", &["x"]);
        let b = list("t2", &["x"]);
        let err = align(&a, &b, 1, &JudgmentSet::new(), &GradeScale::binary()).unwrap_err();
        assert!(matches!(err, MedError::InvalidPair(_)));
    }

    #[test]
    fn occurrence_beyond_depth_does_not_bind() {
        let a = list("t1", &["x", "y"]);
        let b = list("t1", &["u", "v", "w", "x"]);
        let pair = align(&a, &b, 3, &JudgmentSet::new(), &GradeScale::binary()).unwrap();
        assert_eq!(pair.side_a()[0].kind, VariableKind::Free);
    }

    #[test]
    fn validation_rejects_asymmetric_bounds() {
        let bound = |doc_name: &str, partner_rank: usize| Slot {
            doc: Some(doc(doc_name)),
            kind: VariableKind::Bound { partner_rank },
        };
        let free = Slot {
            doc: None,
            kind: VariableKind::Free,
        };
        let err = AlignedPair::new(vec![bound("x", 1), free.clone()], vec![free.clone(), free])
            .unwrap_err();
        assert!(matches!(err, MedError::InvalidPair(_)));
    }

    #[test]
    fn swapping_twice_is_identity() {
        let a = list("t1", &["x", "y", "q"]);
        let b = list("t1", &["y", "z", "x"]);
        let pair = align(&a, &b, 4, &JudgmentSet::new(), &GradeScale::binary()).unwrap();
        assert_eq!(pair.swapped().swapped(), pair);
        assert_eq!(pair.swapped().bound_pairs(), vec![(1, 2), (3, 1)]);
    }
}
