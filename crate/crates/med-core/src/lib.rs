//! Maximized effectiveness difference (MED) between ranked result lists.
//!
//! Given two rankings for the same topic and (optionally) partial relevance
//! judgments, MED asks: how large could the difference in an effectiveness
//! measure be, across every relevance assignment consistent with what is
//! known? The answer is a distance between the rankings, one distance per
//! measure. A judged document pins its variable; a document that appears in
//! both lists ties its two variables together; everything else is free.
//!
//! Supported measures: precision@k, nDCG@k, rank-biased precision, average
//! precision (via an exact or tabu-searched QUBO), ERR (cascade model, with
//! a reported truncation bound), and the position-discounted U-measure over
//! passage trailtexts. Rank-biased overlap is included as a similarity
//! baseline.
//!
//! Entry points: [`align`] to build an [`AlignedPair`] from two lists plus
//! judgments, then [`med`] with a [`MeasureSpec`], or the per-measure
//! functions in the individual modules. [`oracle::brute_force_med`] is a
//! slow exhaustive reference against which the closed forms are tested.

pub mod align;
pub mod dotprod;
pub mod error;
pub mod io;
pub mod list;
pub mod med;
pub mod mederr;
pub mod medmap;
pub mod medu;
pub mod oracle;
pub mod rbo;
pub mod synth;

pub use align::{align, AlignedPair, Slot, VariableKind};
pub use error::MedError;
pub use list::{DocId, GradeScale, JudgmentSet, RankedList};
pub use med::{aggregate, med, Direction, MeasureSpec, MedOutcome};
pub use medu::{med_u, Passage, Trailtext};
pub use oracle::{brute_force_med, brute_force_med_u, OracleBudget};
