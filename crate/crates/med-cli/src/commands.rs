//! The three commands: per-topic tables, all-pairs matrices, and
//! judgment-fraction sweeps.
//!
//! Work is split into (pair, topic) units, evaluated in parallel, and merged
//! back in job order, so output bytes do not depend on the worker count.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use anyhow::{bail, Result};
use med_core::dotprod::DotProductMeasure;
use med_core::io::{format_value, write_matrix, RunFile};
use med_core::mederr::err_score;
use med_core::medmap::{map_score, TabuParams};
use med_core::rbo::{rbo, RboParams};
use med_core::{
    aggregate, align, med, med_u, AlignedPair, Direction, GradeScale, JudgmentSet, MeasureSpec,
    MedError, MedOutcome, RankedList, Trailtext, VariableKind,
};
use rayon::prelude::*;

use crate::config::ResolvedMeasure;

/// One parsed input: a document run, or a passage run read as one trailtext
/// per topic for the u measure.
pub enum RunInput {
    Docs(RunFile),
    Passages { label: String, trails: Vec<Trailtext> },
}

impl RunInput {
    pub fn label(&self) -> &str {
        match self {
            RunInput::Docs(run) => run.tag(),
            RunInput::Passages { label, .. } => label,
        }
    }

    /// Topics in ascending order.
    fn topics(&self) -> Vec<&str> {
        match self {
            RunInput::Docs(run) => run.lists().iter().map(|l| l.topic()).collect(),
            RunInput::Passages { trails, .. } => trails.iter().map(|t| t.topic()).collect(),
        }
    }

    fn doc_list(&self, topic: &str) -> Option<&RankedList> {
        match self {
            RunInput::Docs(run) => run.list_for(topic),
            RunInput::Passages { .. } => None,
        }
    }

    fn trail_for(&self, topic: &str) -> Option<&Trailtext> {
        match self {
            RunInput::Passages { trails, .. } => trails
                .binary_search_by(|t| t.topic().cmp(topic))
                .ok()
                .map(|i| &trails[i]),
            RunInput::Docs(_) => None,
        }
    }
}

fn common_topics<'a>(a: &'a RunInput, b: &'a RunInput) -> Vec<&'a str> {
    let (ta, tb) = (a.topics(), b.topics());
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < ta.len() && j < tb.len() {
        match ta[i].cmp(tb[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                out.push(ta[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

fn ensure_unique_labels(inputs: &[RunInput]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for input in inputs {
        if !seen.insert(input.label()) {
            bail!("run label {} appears more than once", input.label());
        }
    }
    Ok(())
}

/// One evaluated (pair, topic) unit.
struct TopicOutcome {
    value: f64,
    direction: Option<Direction>,
    epsilon: Option<f64>,
    /// Signed score difference magnitude, available only when alignment left
    /// no unknowns.
    actual: Option<f64>,
}

/// The fully judged score difference. Once every slot is predetermined the
/// winning witnesses hold exactly the judged grades, so scoring them gives
/// the plain effectiveness gap.
fn actual_difference(
    measure: &ResolvedMeasure,
    pair: &AlignedPair,
    outcome: &MedOutcome,
) -> Option<f64> {
    let pinned = pair
        .side_a()
        .iter()
        .chain(pair.side_b())
        .all(|slot| matches!(slot.kind, VariableKind::Predetermined { .. }));
    if !pinned {
        return None;
    }
    let (wa, wb) = (&outcome.witness_a, &outcome.witness_b);
    let diff = match measure {
        ResolvedMeasure::Precision { k } => {
            let m = DotProductMeasure::precision(*k).ok()?;
            m.score(wa) - m.score(wb)
        }
        ResolvedMeasure::Ndcg { k, scale } => {
            let m = DotProductMeasure::ndcg(*k, scale).ok()?;
            m.score(wa) - m.score(wb)
        }
        ResolvedMeasure::Rbp { persistence, .. } => {
            let m = DotProductMeasure::rbp(*persistence, pair.depth()).ok()?;
            m.score(wa) - m.score(wb)
        }
        ResolvedMeasure::Map { k } => map_score(wa, *k) - map_score(wb, *k),
        ResolvedMeasure::Err { params, .. } => {
            err_score(wa, params.depth()).ok()? - err_score(wb, params.depth()).ok()?
        }
        ResolvedMeasure::U { .. } | ResolvedMeasure::Rbo { .. } => return None,
    };
    Some(diff.abs())
}

fn eval_lists(
    measure: &ResolvedMeasure,
    a: &RankedList,
    b: &RankedList,
    judgments: &JudgmentSet,
    tabu_seed: u64,
    want_actual: bool,
) -> Result<TopicOutcome, MedError> {
    let full_depth = a.len().max(b.len()).max(1);
    let (depth, scale, spec) = match measure {
        ResolvedMeasure::Precision { k } => (
            *k,
            GradeScale::binary(),
            MeasureSpec::Precision { k: *k },
        ),
        ResolvedMeasure::Ndcg { k, scale } => (
            *k,
            scale.clone(),
            MeasureSpec::Ndcg {
                k: *k,
                scale: scale.clone(),
            },
        ),
        ResolvedMeasure::Rbp { persistence, scale } => (
            full_depth,
            scale.clone(),
            MeasureSpec::Rbp {
                persistence: *persistence,
            },
        ),
        ResolvedMeasure::Map { k } => (
            *k,
            GradeScale::binary(),
            MeasureSpec::Map {
                k: *k,
                tabu: TabuParams::new(tabu_seed),
            },
        ),
        ResolvedMeasure::Err { params, scale } => {
            (params.depth(), scale.clone(), MeasureSpec::Err(*params))
        }
        ResolvedMeasure::Rbo { persistence, depth } => {
            let params = RboParams::new(*persistence, depth.unwrap_or(full_depth))?;
            return Ok(TopicOutcome {
                value: rbo(a, b, &params),
                direction: None,
                epsilon: None,
                actual: None,
            });
        }
        ResolvedMeasure::U { .. } => {
            return Err(MedError::UnsupportedMeasure(
                "u compares passage runs, not document runs".into(),
            ))
        }
    };
    let pair = align(a, b, depth, judgments, &scale)?;
    let outcome = med(&pair, &spec)?;
    let actual = if want_actual {
        actual_difference(measure, &pair, &outcome)
    } else {
        None
    };
    Ok(TopicOutcome {
        value: outcome.value,
        direction: Some(outcome.direction),
        epsilon: outcome.epsilon,
        actual,
    })
}

fn eval_trails(
    measure: &ResolvedMeasure,
    a: &Trailtext,
    b: &Trailtext,
) -> Result<TopicOutcome, MedError> {
    match measure {
        ResolvedMeasure::U { length, top_grade } => {
            let outcome = med_u(a, b, *length, *top_grade)?;
            Ok(TopicOutcome {
                value: outcome.value,
                direction: Some(outcome.direction),
                epsilon: outcome.epsilon,
                actual: None,
            })
        }
        other => Err(MedError::UnsupportedMeasure(format!(
            "measure {} compares document runs, not passage runs",
            other.name()
        ))),
    }
}

fn eval_topic(
    measure: &ResolvedMeasure,
    a: &RunInput,
    b: &RunInput,
    topic: &str,
    judgments: &JudgmentSet,
    tabu_seed: u64,
    want_actual: bool,
) -> Result<TopicOutcome, MedError> {
    match (a.doc_list(topic), b.doc_list(topic)) {
        (Some(la), Some(lb)) => eval_lists(measure, la, lb, judgments, tabu_seed, want_actual),
        _ => match (a.trail_for(topic), b.trail_for(topic)) {
            (Some(ta), Some(tb)) => eval_trails(measure, ta, tb),
            _ => Err(MedError::InvalidPair(format!(
                "topic {topic} is missing from one side"
            ))),
        },
    }
}

fn render_compare(
    measure: &ResolvedMeasure,
    topics: &[&str],
    rows: &[TopicOutcome],
) -> Result<String, MedError> {
    let with_epsilon = measure.has_epsilon();
    let mut out = String::from("topic,value,direction");
    if with_epsilon {
        out.push_str(",epsilon");
    }
    out.push('\n');
    for (topic, row) in topics.iter().zip(rows) {
        let _ = write!(out, "{topic},{},", format_value(row.value));
        if let Some(direction) = row.direction {
            let _ = write!(out, "{direction}");
        }
        if with_epsilon {
            let _ = write!(out, ",{}", format_value(row.epsilon.unwrap_or(0.0)));
        }
        out.push('\n');
    }
    let values: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let _ = write!(out, "mean,{},", format_value(aggregate(&values)?));
    if with_epsilon {
        let eps: Vec<f64> = rows.iter().map(|r| r.epsilon.unwrap_or(0.0)).collect();
        let _ = write!(out, ",{}", format_value(aggregate(&eps)?));
    }
    out.push('\n');
    Ok(out)
}

/// Per-topic rows plus a mean row for two runs, or `None` when they share no
/// topic.
pub fn compare(
    measure: &ResolvedMeasure,
    a: &RunInput,
    b: &RunInput,
    judgments: &JudgmentSet,
    tabu_seed: u64,
) -> Result<Option<String>> {
    let topics = common_topics(a, b);
    if topics.is_empty() {
        return Ok(None);
    }
    let results: Vec<Result<TopicOutcome, MedError>> = topics
        .par_iter()
        .map(|&topic| eval_topic(measure, a, b, topic, judgments, tabu_seed, false))
        .collect();
    let rows = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(Some(render_compare(measure, &topics, &rows)?))
}

/// Mean distance between every pair of runs as a square CSV. Diagonal cells
/// are written as zero without being computed.
pub fn matrix(
    measure: &ResolvedMeasure,
    inputs: &[RunInput],
    judgments: &JudgmentSet,
    tabu_seed: u64,
) -> Result<String> {
    ensure_unique_labels(inputs)?;
    let n = inputs.len();
    let mut jobs: Vec<(usize, usize, &str)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let topics = common_topics(&inputs[i], &inputs[j]);
            if topics.is_empty() {
                bail!(
                    "runs {} and {} share no topics",
                    inputs[i].label(),
                    inputs[j].label()
                );
            }
            jobs.extend(topics.into_iter().map(|t| (i, j, t)));
        }
    }
    let results: Vec<Result<TopicOutcome, MedError>> = jobs
        .par_iter()
        .map(|&(i, j, topic)| {
            eval_topic(measure, &inputs[i], &inputs[j], topic, judgments, tabu_seed, false)
        })
        .collect();
    let mut sums = vec![vec![0.0f64; n]; n];
    let mut counts = vec![vec![0usize; n]; n];
    for (&(i, j, _), result) in jobs.iter().zip(results) {
        sums[i][j] += result?.value;
        counts[i][j] += 1;
    }
    let mut values = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mean = sums[i][j] / counts[i][j] as f64;
            values[i][j] = mean;
            values[j][i] = mean;
        }
    }
    let labels: Vec<String> = inputs.iter().map(|r| r.label().to_string()).collect();
    Ok(write_matrix(&labels, &values)?)
}

/// Distances for every run pair at each judgment fraction. Samples are
/// nested, so each pair's column is non-increasing down the ladder, and at
/// fraction 1 the fully judged score difference is emitted alongside
/// whenever the judgments cover every ranked document.
pub fn sweep(
    measure: &ResolvedMeasure,
    inputs: &[RunInput],
    qrels: &JudgmentSet,
    fractions: &[f64],
    sample_seed: u64,
    tabu_seed: u64,
) -> Result<String> {
    ensure_unique_labels(inputs)?;
    if inputs.len() < 2 {
        bail!("sweep needs at least two runs");
    }
    let samples = qrels.nested_samples(fractions, sample_seed);
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for i in 0..inputs.len() {
        for j in (i + 1)..inputs.len() {
            pairs.push((i, j));
        }
    }
    let mut pair_topics: Vec<Vec<&str>> = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let topics = common_topics(&inputs[i], &inputs[j]);
        if topics.is_empty() {
            bail!(
                "runs {} and {} share no topics",
                inputs[i].label(),
                inputs[j].label()
            );
        }
        pair_topics.push(topics);
    }
    let mut jobs: Vec<(usize, usize, &str)> = Vec::new();
    for f in 0..fractions.len() {
        for (p, topics) in pair_topics.iter().enumerate() {
            jobs.extend(topics.iter().map(|&t| (f, p, t)));
        }
    }
    let results: Vec<Result<TopicOutcome, MedError>> = jobs
        .par_iter()
        .map(|&(f, p, topic)| {
            let (i, j) = pairs[p];
            let want_actual = fractions[f] >= 1.0;
            eval_topic(
                measure,
                &inputs[i],
                &inputs[j],
                topic,
                &samples[f],
                tabu_seed,
                want_actual,
            )
        })
        .collect();

    struct Cell {
        sum: f64,
        count: usize,
        actual: Option<f64>,
    }
    let mut cells: Vec<Vec<Cell>> = (0..fractions.len())
        .map(|_| {
            (0..pairs.len())
                .map(|_| Cell {
                    sum: 0.0,
                    count: 0,
                    actual: Some(0.0),
                })
                .collect()
        })
        .collect();
    for (&(f, p, _), result) in jobs.iter().zip(results) {
        let row = result?;
        let cell = &mut cells[f][p];
        cell.sum += row.value;
        cell.count += 1;
        cell.actual = match (cell.actual, row.actual) {
            (Some(acc), Some(v)) => Some(acc + v),
            _ => None,
        };
    }

    let mut out = String::from("fraction,pair,med,actual\n");
    for (f, fraction) in fractions.iter().enumerate() {
        for (p, &(i, j)) in pairs.iter().enumerate() {
            let cell = &cells[f][p];
            let _ = write!(
                out,
                "{},{}:{},{},",
                format_value(*fraction),
                inputs[i].label(),
                inputs[j].label(),
                format_value(cell.sum / cell.count as f64)
            );
            if let Some(total) = cell.actual {
                out.push_str(&format_value(total / cell.count as f64));
            }
            out.push('\n');
        }
    }
    Ok(out)
}
