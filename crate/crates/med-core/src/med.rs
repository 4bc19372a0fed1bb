//! Measure selection and the dispatching entry point.

use crate::align::AlignedPair;
use crate::dotprod;
use crate::error::MedError;
use crate::list::GradeScale;
use crate::mederr::{self, ErrParams};
use crate::medmap::{self, TabuParams};

/// Which side of a comparison achieved the higher score at the maximum.
/// Ties report `A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    A,
    B,
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::A => "A",
            Direction::B => "B",
        })
    }
}

/// The result of maximizing a score difference: the distance itself, the
/// winning direction, the relevance assignments that achieve it (index 0 is
/// rank 1), and, for measures computed by truncated search, an upper bound
/// on how much better an untruncated maximization could have done.
#[derive(Debug, Clone)]
pub struct MedOutcome {
    pub value: f64,
    pub direction: Direction,
    pub witness_a: Vec<f64>,
    pub witness_b: Vec<f64>,
    pub epsilon: Option<f64>,
}

/// An effectiveness measure together with its parameters.
#[derive(Debug, Clone)]
pub enum MeasureSpec {
    /// precision@k with binary relevance.
    Precision { k: usize },
    /// nDCG@k over a graded scale.
    Ndcg { k: usize, scale: GradeScale },
    /// Rank-biased precision with the given persistence.
    Rbp { persistence: f64 },
    /// Average precision at cutoff `k`, maximized through a QUBO.
    Map { k: usize, tabu: TabuParams },
    /// Expected reciprocal rank under the cascade model.
    Err(ErrParams),
    /// Position-discounted U-measure over passage trailtexts; compared with
    /// [`crate::medu::med_u`], not through document pairs.
    U { length: usize, top_grade: f64 },
}

impl MeasureSpec {
    /// Short name for display and output files.
    pub fn name(&self) -> &'static str {
        match self {
            MeasureSpec::Precision { .. } => "precision",
            MeasureSpec::Ndcg { .. } => "ndcg",
            MeasureSpec::Rbp { .. } => "rbp",
            MeasureSpec::Map { .. } => "map",
            MeasureSpec::Err(_) => "err",
            MeasureSpec::U { .. } => "u",
        }
    }
}

/// Computes MED for an aligned pair of rankings under `measure`.
pub fn med(pair: &AlignedPair, measure: &MeasureSpec) -> Result<MedOutcome, MedError> {
    match measure {
        MeasureSpec::Precision { k } => dotprod::med_precision(pair, *k),
        MeasureSpec::Ndcg { k, scale } => dotprod::med_ndcg(pair, *k, scale),
        MeasureSpec::Rbp { persistence } => dotprod::med_rbp(pair, *persistence),
        MeasureSpec::Map { k, tabu } => medmap::med_map(pair, *k, tabu),
        MeasureSpec::Err(params) => mederr::med_err(pair, params),
        MeasureSpec::U { .. } => Err(MedError::UnsupportedMeasure(
            "the U-measure compares passage trailtexts, not document rankings; use medu::med_u"
                .into(),
        )),
    }
}

/// Mean of per-topic values.
pub fn aggregate(values: &[f64]) -> Result<f64, MedError> {
    if values.is_empty() {
        return Err(MedError::InvalidArgument(
            "cannot aggregate an empty set of values".into(),
        ));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}
