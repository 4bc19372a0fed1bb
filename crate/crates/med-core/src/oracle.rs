//! Exhaustive maximization of the score difference, used as ground truth for
//! the closed-form and search-based solvers.
//!
//! The enumerator walks every assignment of a candidate grade set to the free
//! and bound variables of an aligned pair, honoring equality constraints and
//! predetermined grades, and keeps the first assignment (in lexicographic
//! order over ascending grades) that attains the largest absolute score
//! difference. It is deliberately simple and slow; a budget guards against
//! runaway enumeration.

use std::collections::HashMap;

use crate::align::{AlignedPair, VariableKind};
use crate::dotprod::DotProductMeasure;
use crate::error::MedError;
use crate::list::DocId;
use crate::med::{Direction, MeasureSpec, MedOutcome};
use crate::medmap;
use crate::mederr;
use crate::medu::Trailtext;

/// Cap on the number of assignments a single brute-force call may visit.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    max_enumerations: u128,
}

impl OracleBudget {
    pub fn new(max_enumerations: u128) -> Result<Self, MedError> {
        if max_enumerations == 0 {
            return Err(MedError::InvalidArgument(
                "enumeration budget must be positive".into(),
            ));
        }
        Ok(OracleBudget { max_enumerations })
    }

    pub fn max_enumerations(&self) -> u128 {
        self.max_enumerations
    }
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_enumerations: 1 << 20,
        }
    }
}

/// Positions a single variable writes to: `(on side A, 0-based rank index)`.
type VarTargets = Vec<(bool, usize)>;

fn collect_variables(pair: &AlignedPair) -> (Vec<f64>, Vec<f64>, Vec<VarTargets>) {
    let depth = pair.depth();
    let mut base_a = vec![0.0; depth];
    let mut base_b = vec![0.0; depth];
    let mut vars: Vec<VarTargets> = Vec::new();
    for (i, slot) in pair.side_a().iter().enumerate() {
        match &slot.kind {
            VariableKind::Free => vars.push(vec![(true, i)]),
            VariableKind::Bound { partner_rank } => {
                vars.push(vec![(true, i), (false, partner_rank - 1)])
            }
            VariableKind::Predetermined { grade } => {
                base_a[i] = crate::list::ratio_to_f64(*grade)
            }
        }
    }
    for (i, slot) in pair.side_b().iter().enumerate() {
        match &slot.kind {
            VariableKind::Free => vars.push(vec![(false, i)]),
            VariableKind::Bound { .. } => {}
            VariableKind::Predetermined { grade } => {
                base_b[i] = crate::list::ratio_to_f64(*grade)
            }
        }
    }
    (base_a, base_b, vars)
}

/// Scores one side's relevance vector under the chosen measure.
type SideScorer = Box<dyn Fn(&[f64]) -> f64>;

fn scorer(pair: &AlignedPair, measure: &MeasureSpec) -> Result<(SideScorer, f64), MedError> {
    let depth = pair.depth();
    let require = |k: usize, what: &str| -> Result<(), MedError> {
        if depth < k {
            return Err(MedError::InvalidArgument(format!(
                "{what} needs alignment depth {k}, pair has {depth}"
            )));
        }
        Ok(())
    };
    match measure {
        MeasureSpec::Precision { k } => {
            require(*k, "precision")?;
            let m = DotProductMeasure::precision(*k)?;
            Ok((Box::new(move |rel| m.score(rel)), 0.0))
        }
        MeasureSpec::Ndcg { k, scale } => {
            require(*k, "ndcg")?;
            let m = DotProductMeasure::ndcg(*k, scale)?;
            Ok((Box::new(move |rel| m.score(rel)), 0.0))
        }
        MeasureSpec::Rbp { persistence } => {
            let m = DotProductMeasure::rbp(*persistence, depth)?;
            let tail = m.tail_term();
            Ok((Box::new(move |rel| m.score(rel)), tail))
        }
        MeasureSpec::Map { k, .. } => {
            require(*k, "average precision")?;
            let k = *k;
            Ok((Box::new(move |rel| medmap::map_score(rel, k)), 0.0))
        }
        MeasureSpec::Err(params) => {
            let d = params.depth();
            if depth != d {
                return Err(MedError::InvalidArgument(format!(
                    "err oracle needs alignment depth {d}, pair has {depth}"
                )));
            }
            Ok((
                Box::new(move |rel| {
                    mederr::err_score(rel, d).expect("grades were validated before enumeration")
                }),
                0.0,
            ))
        }
        MeasureSpec::U { .. } => Err(MedError::UnsupportedMeasure(
            "the U-measure oracle works on trailtexts; use brute_force_med_u".into(),
        )),
    }
}

/// Maximizes `|S(A) - S(B)|` by trying every assignment of `grades` to the
/// unconstrained variables. The witness is the lexicographically first
/// maximizer under ascending grade order, with variables ordered side A by
/// rank, then side B's own frees by rank; its sign fixes the direction.
pub fn brute_force_med(
    pair: &AlignedPair,
    measure: &MeasureSpec,
    grades: &[f64],
    budget: &OracleBudget,
) -> Result<MedOutcome, MedError> {
    if grades.is_empty() {
        return Err(MedError::InvalidArgument(
            "the oracle needs at least one candidate grade".into(),
        ));
    }
    let mut grades = grades.to_vec();
    grades.sort_by(|a, b| a.partial_cmp(b).expect("grades must be comparable"));
    grades.dedup();
    for &g in &grades {
        if !(0.0..=1.0).contains(&g) || !g.is_finite() {
            return Err(MedError::InvalidArgument(format!(
                "candidate grade {g} is outside [0, 1]"
            )));
        }
    }
    let (score, tail) = scorer(pair, measure)?;
    let (base_a, base_b, vars) = collect_variables(pair);
    (grades.len() as u128)
        .checked_pow(vars.len() as u32)
        .filter(|n| *n <= budget.max_enumerations)
        .ok_or_else(|| {
            MedError::TooLarge(format!(
                "{}^{} assignments exceed the oracle budget of {}",
                grades.len(),
                vars.len(),
                budget.max_enumerations
            ))
        })?;

    let mut rel_a = base_a;
    let mut rel_b = base_b;
    let mut indices = vec![0usize; vars.len()];
    let mut best = f64::NEG_INFINITY;
    let mut best_direction = Direction::A;
    let mut best_a = Vec::new();
    let mut best_b = Vec::new();
    loop {
        for (var, &gi) in vars.iter().zip(&indices) {
            for &(on_a, i) in var {
                if on_a {
                    rel_a[i] = grades[gi];
                } else {
                    rel_b[i] = grades[gi];
                }
            }
        }
        let diff = score(&rel_a) - score(&rel_b);
        if diff.abs() > best {
            best = diff.abs();
            best_direction = if diff >= 0.0 { Direction::A } else { Direction::B };
            best_a = rel_a.clone();
            best_b = rel_b.clone();
        }
        let mut pos = indices.len();
        loop {
            if pos == 0 {
                return Ok(MedOutcome {
                    value: best + tail,
                    direction: best_direction,
                    witness_a: best_a,
                    witness_b: best_b,
                    epsilon: None,
                });
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < grades.len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}

/// Per-character reference for MED over trailtexts: materializes both
/// character streams, walks them position by position, and applies the
/// earlier-position rule to every shared character. Serves as an independent
/// check on the interval arithmetic in [`crate::medu`].
pub fn brute_force_med_u(
    a: &Trailtext,
    b: &Trailtext,
    l: usize,
    top_grade: f64,
) -> Result<MedOutcome, MedError> {
    if a.topic() != b.topic() {
        return Err(MedError::InvalidPair(format!(
            "cannot compare trailtexts for topics {} and {}",
            a.topic(),
            b.topic()
        )));
    }
    if l == 0 {
        return Err(MedError::InvalidArgument(
            "evaluation length must be at least 1".into(),
        ));
    }
    if !(top_grade > 0.0 && top_grade <= 1.0) {
        return Err(MedError::InvalidMeasure(format!(
            "top grade must lie in (0, 1], got {top_grade}"
        )));
    }
    let first_a = first_occurrences(a, l);
    let first_b = first_occurrences(b, l);
    let len_a = stream_len(a, l);
    let len_b = stream_len(b, l);

    let evaluate = |favored: &HashMap<(DocId, usize), usize>,
                    favored_len: usize,
                    other: &HashMap<(DocId, usize), usize>|
     -> (Vec<f64>, Vec<f64>) {
        let mut rel_f = vec![0.0; l];
        let mut rel_o = vec![0.0; l];
        for (ch, &n) in favored {
            match other.get(ch) {
                Some(&m) if n < m => {
                    rel_f[n - 1] = top_grade;
                    rel_o[m - 1] = top_grade;
                }
                Some(_) => {}
                None => rel_f[n - 1] = top_grade,
            }
        }
        for slot in rel_f.iter_mut().skip(favored_len) {
            *slot = top_grade;
        }
        (rel_f, rel_o)
    };
    let discounted = |rel: &[f64]| -> f64 {
        rel.iter()
            .enumerate()
            .map(|(i, g)| g * (1.0 - (i + 1) as f64 / l as f64))
            .sum()
    };

    let (fwd_a, fwd_b) = evaluate(&first_a, len_a, &first_b);
    let forward = discounted(&fwd_a) - discounted(&fwd_b);
    let (bwd_b, bwd_a) = evaluate(&first_b, len_b, &first_a);
    let backward = discounted(&bwd_b) - discounted(&bwd_a);
    let (value, direction, witness_a, witness_b) = if backward > forward {
        (backward, Direction::B, bwd_a, bwd_b)
    } else {
        (forward, Direction::A, fwd_a, fwd_b)
    };
    Ok(MedOutcome {
        value,
        direction,
        witness_a,
        witness_b,
        epsilon: None,
    })
}

/// First trailtext position (1-based) of every distinct character within `l`.
fn first_occurrences(trail: &Trailtext, l: usize) -> HashMap<(DocId, usize), usize> {
    let mut first = HashMap::new();
    let mut pos = 1usize;
    'passages: for passage in trail.passages() {
        for offset in passage.offset()..passage.offset() + passage.length() {
            if pos > l {
                break 'passages;
            }
            first
                .entry((passage.doc().clone(), offset))
                .or_insert(pos);
            pos += 1;
        }
    }
    first
}

/// Characters actually presented within `l` (duplicates included).
fn stream_len(trail: &Trailtext, l: usize) -> usize {
    trail.text_len().min(l)
}
