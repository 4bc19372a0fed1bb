//! Text formats: retrieval run files, relevance judgments, passage runs, and
//! CSV emission.
//!
//! All parsers take UTF-8 text, ignore blank lines and `#`-prefixed comment
//! lines, and split fields on any run of whitespace. Line numbers in errors
//! are 1-based and count every line of the input, including ignored ones.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::error::MedError;
use crate::list::{DocId, GradeScale, JudgmentSet, RankedList};
use crate::medu::{Passage, Trailtext};

/// A parsed retrieval run: one ranked list per topic, in canonical order,
/// under a single run tag.
#[derive(Debug, Clone)]
pub struct RunFile {
    tag: String,
    lists: Vec<RankedList>,
    rank_warnings: usize,
}

impl RunFile {
    /// Builds a run file from already-ordered lists. Topics must be unique.
    pub fn new(tag: impl Into<String>, mut lists: Vec<RankedList>) -> Result<Self, MedError> {
        let tag = tag.into();
        if tag.trim().is_empty() {
            return Err(MedError::MalformedRun("run tag must be non-empty".into()));
        }
        lists.sort_by(|a, b| a.topic().cmp(b.topic()));
        for pair in lists.windows(2) {
            if pair[0].topic() == pair[1].topic() {
                return Err(MedError::MalformedRun(format!(
                    "run {} lists topic {} twice",
                    tag,
                    pair[0].topic()
                )));
            }
        }
        Ok(RunFile {
            tag,
            lists,
            rank_warnings: 0,
        })
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    /// Ranked lists sorted by topic.
    pub fn lists(&self) -> &[RankedList] {
        &self.lists
    }

    pub fn list_for(&self, topic: &str) -> Option<&RankedList> {
        self.lists
            .binary_search_by(|l| l.topic().cmp(topic))
            .ok()
            .map(|i| &self.lists[i])
    }

    /// How many lines carried a rank field disagreeing with the canonical
    /// (score, docid) order.
    pub fn rank_warnings(&self) -> usize {
        self.rank_warnings
    }
}

/// Lines that carry data: `(line number, fields)`.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((i + 1, trimmed.split_whitespace().collect()))
        }
    })
}

fn expect_fields(
    line: usize,
    fields: &[&str],
    expected: usize,
    format: &str,
) -> Result<(), MedError> {
    if fields.len() != expected {
        return Err(MedError::Parse {
            line,
            msg: format!(
                "expected {expected} whitespace-separated fields ({format}), got {}",
                fields.len()
            ),
        });
    }
    Ok(())
}

fn parse_field<T: std::str::FromStr>(line: usize, value: &str, what: &str) -> Result<T, MedError> {
    value.parse::<T>().map_err(|_| MedError::Parse {
        line,
        msg: format!("cannot parse {what} from {value:?}"),
    })
}

/// Parses a run in the six-field format `topic Q0 docid rank score tag`.
///
/// Documents are ordered by descending score with ascending docid as the
/// tiebreak; the rank field does not influence the order but is checked
/// against it, and disagreements are tallied in
/// [`RunFile::rank_warnings`]. The run tag is taken from the first data
/// line. A document listed twice for one topic is an error.
pub fn parse_run(text: &str) -> Result<RunFile, MedError> {
    struct Entry {
        doc: DocId,
        rank: i64,
        score: f64,
    }
    let mut tag: Option<String> = None;
    let mut topics: BTreeMap<String, Vec<Entry>> = BTreeMap::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();
    for (line, fields) in data_lines(text) {
        expect_fields(line, &fields, 6, "topic Q0 docid rank score tag")?;
        let rank: i64 = parse_field(line, fields[3], "rank")?;
        let score: f64 = parse_field(line, fields[4], "score")?;
        if !score.is_finite() {
            return Err(MedError::Parse {
                line,
                msg: format!("score {score} is not finite"),
            });
        }
        let doc = DocId::new(fields[2])
            .map_err(|e| MedError::Parse {
                line,
                msg: e.to_string(),
            })?;
        if !seen.insert((fields[0].to_string(), fields[2].to_string())) {
            return Err(MedError::MalformedRun(format!(
                "document {} appears twice for topic {} (line {line})",
                fields[2], fields[0]
            )));
        }
        tag.get_or_insert_with(|| fields[5].to_string());
        topics
            .entry(fields[0].to_string())
            .or_default()
            .push(Entry { doc, rank, score });
    }
    let tag = tag.ok_or_else(|| MedError::MalformedRun("run file has no data lines".into()))?;
    let mut lists = Vec::with_capacity(topics.len());
    let mut rank_warnings = 0;
    for (topic, mut entries) in topics {
        entries.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .expect("scores were checked finite")
                .then_with(|| a.doc.as_str().cmp(b.doc.as_str()))
        });
        rank_warnings += entries
            .iter()
            .enumerate()
            .filter(|(i, e)| e.rank != (i + 1) as i64)
            .count();
        lists.push(RankedList::new(
            topic,
            entries.into_iter().map(|e| e.doc).collect(),
        )?);
    }
    Ok(RunFile {
        tag,
        lists,
        rank_warnings,
    })
}

/// Renders a run file back to the six-field text format in canonical order,
/// with ranks `1..` and synthetic strictly descending integer scores, so
/// that parsing the output reproduces the same lists.
pub fn render_run(run: &RunFile) -> String {
    let mut out = String::new();
    for list in run.lists() {
        let n = list.len();
        for (i, doc) in list.docs().iter().enumerate() {
            let _ = writeln!(
                out,
                "{} Q0 {} {} {} {}",
                list.topic(),
                doc.as_str(),
                i + 1,
                n - i,
                run.tag()
            );
        }
    }
    out
}

/// Judgments plus counts of the oddities tolerated while reading them.
#[derive(Debug, Clone)]
pub struct ParsedQrels {
    pub judgments: JudgmentSet,
    /// `(topic, doc)` pairs judged more than once; the last line won.
    pub duplicates: usize,
    /// Grade indices outside `[0, G]`, clamped to the nearest end.
    pub clamped: usize,
}

/// Parses judgments in the format `topic 0 docid grade-index`, clamping each
/// grade index to the scale's range. A repeated `(topic, doc)` keeps the
/// last value; both clamps and duplicates are counted rather than rejected.
pub fn parse_qrels(text: &str, scale: &GradeScale) -> Result<ParsedQrels, MedError> {
    let top = scale.levels() as i64;
    let mut judgments = JudgmentSet::new();
    let mut duplicates = 0;
    let mut clamped = 0;
    for (line, fields) in data_lines(text) {
        expect_fields(line, &fields, 4, "topic 0 docid grade-index")?;
        let raw: i64 = parse_field(line, fields[3], "grade index")?;
        let index = raw.clamp(0, top);
        if index != raw {
            clamped += 1;
        }
        let doc = DocId::new(fields[2]).map_err(|e| MedError::Parse {
            line,
            msg: e.to_string(),
        })?;
        if judgments
            .insert(fields[0].to_string(), doc, index as u32)
            .is_some()
        {
            duplicates += 1;
        }
    }
    Ok(ParsedQrels {
        judgments,
        duplicates,
        clamped,
    })
}

/// Parses a passage run in the format `topic docid offset length rank` into
/// one trailtext per topic (sorted by topic), with passages ordered by rank
/// and ties kept in input order. Lengths must be positive.
pub fn parse_passage_run(text: &str) -> Result<Vec<Trailtext>, MedError> {
    let mut topics: BTreeMap<String, Vec<(i64, Passage)>> = BTreeMap::new();
    for (line, fields) in data_lines(text) {
        expect_fields(line, &fields, 5, "topic docid offset length rank")?;
        let offset: usize = parse_field(line, fields[2], "offset")?;
        let length: i64 = parse_field(line, fields[3], "length")?;
        if length <= 0 {
            return Err(MedError::Parse {
                line,
                msg: format!("passage length must be positive, got {length}"),
            });
        }
        let rank: i64 = parse_field(line, fields[4], "rank")?;
        let doc = DocId::new(fields[1]).map_err(|e| MedError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let passage = Passage::new(doc, offset, length as usize).map_err(|e| MedError::Parse {
            line,
            msg: e.to_string(),
        })?;
        topics
            .entry(fields[0].to_string())
            .or_default()
            .push((rank, passage));
    }
    let mut trails = Vec::with_capacity(topics.len());
    for (topic, mut passages) in topics {
        passages.sort_by_key(|(rank, _)| *rank);
        trails.push(Trailtext::new(
            topic,
            passages.into_iter().map(|(_, p)| p).collect(),
        )?);
    }
    Ok(trails)
}

/// Renders judgments in the four-field qrels format, sorted by topic and
/// document.
pub fn render_qrels(judgments: &JudgmentSet) -> String {
    let mut out = String::new();
    for (topic, doc, index) in judgments.entries() {
        let _ = writeln!(out, "{topic} 0 {} {index}", doc.as_str());
    }
    out
}

/// Formats a value the way every CSV emitted here does.
pub fn format_value(value: f64) -> String {
    format!("{value:.6}")
}

/// Renders a labeled square table as CSV: a header row, then one row per
/// label, cells with six decimal places. Rows and columns are emitted in
/// sorted label order regardless of input order. An empty table renders as
/// the bare header.
pub fn write_matrix(labels: &[String], values: &[Vec<f64>]) -> Result<String, MedError> {
    if values.len() != labels.len() || values.iter().any(|row| row.len() != labels.len()) {
        return Err(MedError::InvalidArgument(format!(
            "matrix must be square over {} labels",
            labels.len()
        )));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&i, &j| labels[i].cmp(&labels[j]));
    let mut out = String::new();
    let header: Vec<&str> = order.iter().map(|&i| labels[i].as_str()).collect();
    let _ = writeln!(out, ",{}", header.join(","));
    for &r in &order {
        let cells: Vec<String> = order
            .iter()
            .map(|&c| format_value(values[r][c]))
            .collect();
        let _ = writeln!(out, "{},{}", labels[r], cells.join(","));
    }
    Ok(out)
}
