//! MED for the U-measure: a character-level score difference over passage
//! trailtexts, maximized with interval arithmetic instead of per-character
//! loops.
//!
//! A trailtext is the text a user reads while walking down a passage ranking:
//! the concatenation of the returned passages, truncated at an evaluation
//! length `l`. Each character position `i` (1-based) carries the linear
//! discount `1 - i/l`, and the U-measure is the discounted sum of per-character
//! relevance. Characters are identified by `(document, offset)`, so two
//! trailtexts share a character exactly when they present the same byte of the
//! same document. Offsets are byte offsets into single-byte text, so character
//! and byte are interchangeable here.

use std::collections::HashMap;

use crate::error::MedError;
use crate::list::DocId;
use crate::med::{Direction, MedOutcome};

/// A contiguous slice of one document, shown as part of a trailtext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Passage {
    doc: DocId,
    offset: usize,
    length: usize,
}

impl Passage {
    /// Creates a passage covering `length` characters of `doc` starting at
    /// the 0-based `offset`. Zero-length passages are rejected.
    pub fn new(doc: DocId, offset: usize, length: usize) -> Result<Self, MedError> {
        if length == 0 {
            return Err(MedError::InvalidArgument(format!(
                "passage of {} at offset {offset} has zero length",
                doc.as_str()
            )));
        }
        Ok(Passage {
            doc,
            offset,
            length,
        })
    }

    pub fn doc(&self) -> &DocId {
        &self.doc
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn length(&self) -> usize {
        self.length
    }
}

/// An ordered passage ranking for one topic, read as a single text.
#[derive(Debug, Clone)]
pub struct Trailtext {
    topic: String,
    passages: Vec<Passage>,
}

impl Trailtext {
    /// Creates a trailtext from passages in presentation order. An empty
    /// passage list is allowed; it reads as no text at all.
    pub fn new(topic: impl Into<String>, passages: Vec<Passage>) -> Result<Self, MedError> {
        let topic = topic.into();
        if topic.trim().is_empty() {
            return Err(MedError::InvalidArgument(
                "trailtext topic must be non-empty".into(),
            ));
        }
        Ok(Trailtext { topic, passages })
    }

    pub fn topic(&self) -> &str {
        &self.topic
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    /// Total characters presented before truncation.
    pub fn text_len(&self) -> usize {
        self.passages.iter().map(|p| p.length).sum()
    }
}

/// How a run of trailtext positions relates to the other trailtext.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpanKind {
    /// Characters this side alone presents (including padding past the end of
    /// the text); their relevance is unconstrained.
    Free,
    /// Characters both trailtexts present. The run starting here appears at
    /// `other_start` on the other side, advancing in lockstep.
    Bound { other_start: usize },
    /// Repeated characters this trailtext has already shown; they never
    /// contribute gain again.
    Duplicate,
}

/// A maximal run of equally classified positions, `start..=end`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CharSpan {
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
}

#[allow(clippy::len_without_is_empty)]
impl CharSpan {
    /// Number of positions covered; spans are never empty.
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }
}

/// Both trailtexts cut into classified position runs covering `1..=l`.
#[derive(Debug, Clone)]
pub struct CharAlignment {
    length: usize,
    side_a: Vec<CharSpan>,
    side_b: Vec<CharSpan>,
}

impl CharAlignment {
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn side_a(&self) -> &[CharSpan] {
        &self.side_a
    }

    pub fn side_b(&self) -> &[CharSpan] {
        &self.side_b
    }
}

/// A run of characters from one document, fresh (first occurrence) or
/// repeated, pinned to trailtext positions.
#[derive(Debug, Clone)]
struct TextRun {
    doc: DocId,
    doc_start: usize,
    pos_start: usize,
    len: usize,
    fresh: bool,
}

/// Splits a trailtext into fresh and duplicate runs, truncated at `l`.
fn text_runs(trail: &Trailtext, l: usize) -> Vec<TextRun> {
    let mut covered: HashMap<&DocId, Vec<(usize, usize)>> = HashMap::new();
    let mut runs = Vec::new();
    let mut pos = 1usize;
    for passage in &trail.passages {
        if pos > l {
            break;
        }
        let take = passage.length.min(l - pos + 1);
        let (start, end) = (passage.offset, passage.offset + take);
        let ranges = covered.entry(&passage.doc).or_default();
        let mut cursor = start;
        for &(cs, ce) in ranges.iter() {
            if ce <= cursor || cs >= end {
                continue;
            }
            if cs > cursor {
                runs.push(TextRun {
                    doc: passage.doc.clone(),
                    doc_start: cursor,
                    pos_start: pos + (cursor - start),
                    len: cs - cursor,
                    fresh: true,
                });
                cursor = cs;
            }
            let dup_end = ce.min(end);
            runs.push(TextRun {
                doc: passage.doc.clone(),
                doc_start: cursor,
                pos_start: pos + (cursor - start),
                len: dup_end - cursor,
                fresh: false,
            });
            cursor = dup_end;
            if cursor >= end {
                break;
            }
        }
        if cursor < end {
            runs.push(TextRun {
                doc: passage.doc.clone(),
                doc_start: cursor,
                pos_start: pos + (cursor - start),
                len: end - cursor,
                fresh: true,
            });
        }
        insert_range(ranges, start, end);
        pos += take;
    }
    runs
}

/// Inserts `[start, end)` into a sorted list of disjoint half-open ranges,
/// merging overlaps.
fn insert_range(ranges: &mut Vec<(usize, usize)>, mut start: usize, mut end: usize) {
    let mut merged = Vec::with_capacity(ranges.len() + 1);
    let mut placed = false;
    for &(cs, ce) in ranges.iter() {
        if ce < start || cs > end {
            if cs > end && !placed {
                merged.push((start, end));
                placed = true;
            }
            merged.push((cs, ce));
        } else {
            start = start.min(cs);
            end = end.max(ce);
        }
    }
    if !placed {
        merged.push((start, end));
    }
    merged.sort_unstable();
    *ranges = merged;
}

/// Classifies one side's runs against the other side's fresh coverage.
fn classify_side(
    mine: &[TextRun],
    other_fresh: &HashMap<&DocId, Vec<(usize, usize, usize)>>,
    l: usize,
) -> Vec<CharSpan> {
    let mut spans = Vec::new();
    let mut next_pos = 1usize;
    for run in mine {
        next_pos = run.pos_start + run.len;
        if !run.fresh {
            spans.push(CharSpan {
                start: run.pos_start,
                end: run.pos_start + run.len - 1,
                kind: SpanKind::Duplicate,
            });
            continue;
        }
        let (rs, re) = (run.doc_start, run.doc_start + run.len);
        let mut cursor = rs;
        if let Some(theirs) = other_fresh.get(&run.doc) {
            for &(os, oe, opos) in theirs {
                if oe <= cursor || os >= re {
                    continue;
                }
                if os > cursor {
                    spans.push(free_span(run, cursor, os));
                    cursor = os;
                }
                let seg_end = oe.min(re);
                spans.push(CharSpan {
                    start: run.pos_start + (cursor - rs),
                    end: run.pos_start + (seg_end - rs) - 1,
                    kind: SpanKind::Bound {
                        other_start: opos + (cursor - os),
                    },
                });
                cursor = seg_end;
                if cursor >= re {
                    break;
                }
            }
        }
        if cursor < re {
            spans.push(free_span(run, cursor, re));
        }
    }
    if next_pos <= l {
        spans.push(CharSpan {
            start: next_pos,
            end: l,
            kind: SpanKind::Free,
        });
    }
    coalesce(spans)
}

fn free_span(run: &TextRun, from: usize, to: usize) -> CharSpan {
    CharSpan {
        start: run.pos_start + (from - run.doc_start),
        end: run.pos_start + (to - run.doc_start) - 1,
        kind: SpanKind::Free,
    }
}

/// Merges adjacent spans whose classification continues unbroken.
fn coalesce(spans: Vec<CharSpan>) -> Vec<CharSpan> {
    let mut out: Vec<CharSpan> = Vec::with_capacity(spans.len());
    for span in spans {
        if let Some(last) = out.last_mut() {
            if last.end + 1 == span.start {
                let joins = match (last.kind, span.kind) {
                    (SpanKind::Free, SpanKind::Free) => true,
                    (SpanKind::Duplicate, SpanKind::Duplicate) => true,
                    (
                        SpanKind::Bound { other_start: a },
                        SpanKind::Bound { other_start: b },
                    ) => a + last.len() == b,
                    _ => false,
                };
                if joins {
                    last.end = span.end;
                    continue;
                }
            }
        }
        out.push(span);
    }
    out
}

/// Aligns two trailtexts over positions `1..=l`, classifying every position
/// on each side as free, bound to a position on the other side, or a
/// duplicate. Bound runs pair the first occurrence of shared characters;
/// repeats on either side stay duplicates and never bind.
pub fn align_chars(a: &Trailtext, b: &Trailtext, l: usize) -> Result<CharAlignment, MedError> {
    if a.topic != b.topic {
        return Err(MedError::InvalidPair(format!(
            "cannot align trailtexts for topics {} and {}",
            a.topic, b.topic
        )));
    }
    if l == 0 {
        return Err(MedError::InvalidArgument(
            "evaluation length must be at least 1".into(),
        ));
    }
    let runs_a = text_runs(a, l);
    let runs_b = text_runs(b, l);
    let fresh_a = fresh_index(&runs_a);
    let fresh_b = fresh_index(&runs_b);
    Ok(CharAlignment {
        length: l,
        side_a: classify_side(&runs_a, &fresh_b, l),
        side_b: classify_side(&runs_b, &fresh_a, l),
    })
}

/// Indexes fresh runs by document as `(doc_start, doc_end, pos_start)`.
fn fresh_index(runs: &[TextRun]) -> HashMap<&DocId, Vec<(usize, usize, usize)>> {
    let mut index: HashMap<&DocId, Vec<(usize, usize, usize)>> = HashMap::new();
    for run in runs.iter().filter(|r| r.fresh) {
        index
            .entry(&run.doc)
            .or_default()
            .push((run.doc_start, run.doc_start + run.len, run.pos_start));
    }
    for list in index.values_mut() {
        list.sort_unstable();
    }
    index
}

/// U-measure score of a set of relevant position intervals: the sum of
/// `1 - i/l` over every covered position, evaluated per interval in closed
/// form. Intervals are inclusive, 1-based, and must lie within `[1, l]`.
pub fn u_score(intervals: &[(usize, usize)], l: usize) -> Result<f64, MedError> {
    if l == 0 {
        return Err(MedError::InvalidArgument(
            "evaluation length must be at least 1".into(),
        ));
    }
    let mut total = 0.0;
    for &(a, b) in intervals {
        if a == 0 || a > b || b > l {
            return Err(MedError::InvalidArgument(format!(
                "interval [{a}, {b}] does not lie within [1, {l}]"
            )));
        }
        let count = (b - a + 1) as f64;
        total += count - (a + b) as f64 * count / (2.0 * l as f64);
    }
    Ok(total)
}

/// Inclusive character intervals, as consumed by [`u_score`].
type Intervals = Vec<(usize, usize)>;

/// The relevant intervals on the favored and unfavored sides when every
/// choice is made to widen `S(favored) - S(unfavored)`: favored-only
/// characters become relevant, unfavored-only characters stay non-relevant,
/// and a shared character is relevant exactly when the favored side shows it
/// strictly earlier.
fn favoring_intervals(spans: &[CharSpan]) -> (Intervals, Intervals) {
    let mut favored = Vec::new();
    let mut unfavored = Vec::new();
    for span in spans {
        match span.kind {
            SpanKind::Free => favored.push((span.start, span.end)),
            SpanKind::Bound { other_start } if span.start < other_start => {
                favored.push((span.start, span.end));
                unfavored.push((other_start, other_start + span.len() - 1));
            }
            _ => {}
        }
    }
    (favored, unfavored)
}

fn witness(intervals: &[(usize, usize)], l: usize, grade: f64) -> Vec<f64> {
    let mut rel = vec![0.0; l];
    for &(a, b) in intervals {
        for slot in rel.iter_mut().take(b).skip(a - 1) {
            *slot = grade;
        }
    }
    rel
}

/// MED for the U-measure: the largest achievable gap in discounted reading
/// gain between two trailtexts, over all relevance assignments consistent
/// with the shared characters. `top_grade` is the gain a relevant character
/// is allowed to reach; the default reading of the measure uses 1.0.
pub fn med_u(
    a: &Trailtext,
    b: &Trailtext,
    l: usize,
    top_grade: f64,
) -> Result<MedOutcome, MedError> {
    if !(top_grade > 0.0 && top_grade <= 1.0) {
        return Err(MedError::InvalidMeasure(format!(
            "top grade must lie in (0, 1], got {top_grade}"
        )));
    }
    let alignment = align_chars(a, b, l)?;
    let (rel_a_fwd, rel_b_fwd) = favoring_intervals(alignment.side_a());
    let forward = u_score(&rel_a_fwd, l)? - u_score(&rel_b_fwd, l)?;
    let (rel_b_bwd, rel_a_bwd) = favoring_intervals(alignment.side_b());
    let backward = u_score(&rel_b_bwd, l)? - u_score(&rel_a_bwd, l)?;
    let (direction, rel_a, rel_b) = if backward > forward {
        (Direction::B, rel_a_bwd, rel_b_bwd)
    } else {
        (Direction::A, rel_a_fwd, rel_b_fwd)
    };
    Ok(MedOutcome {
        value: forward.max(backward) * top_grade,
        direction,
        witness_a: witness(&rel_a, l, top_grade),
        witness_b: witness(&rel_b, l, top_grade),
        epsilon: None,
    })
}
