//! Flag definitions and their resolution into concrete measure parameters.
//!
//! Every subcommand shares one option set. Flags that do not apply to the
//! selected measure are rejected rather than ignored, so a typo like
//! `--measure err --k 20` fails loudly instead of silently computing
//! something else.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use med_core::mederr::ErrParams;
use med_core::GradeScale;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureChoice {
    Precision,
    Ndcg,
    Rbp,
    Map,
    Err,
    U,
    Rbo,
}

/// Options shared by every subcommand. Parameter defaults: ψ 0.9, ndcg k 20,
/// map k 100, err depth 30 with pmax 5, u length 12000. Precision has no
/// conventional cutoff and requires an explicit `--k`.
#[derive(Debug, Clone, Args)]
pub struct CommonOpts {
    /// Distance to compute (rbo is the similarity baseline)
    #[arg(long, value_enum)]
    pub measure: MeasureChoice,

    /// Rank cutoff for precision, ndcg, and map
    #[arg(long, value_name = "K")]
    pub k: Option<usize>,

    /// Persistence in (0,1) for rbp and rbo [default: 0.9]
    #[arg(long, value_name = "PSI")]
    pub psi: Option<f64>,

    /// Top grade: sets the judgment scale for ndcg, rbp, and err
    /// [default: 0.75] and the per-character gain for u [default: 1]
    #[arg(long, value_name = "G")]
    pub rg: Option<f64>,

    /// Evaluation depth for err [default: 30] and truncation depth for rbo
    /// [default: the longer list]
    #[arg(long, value_name = "D")]
    pub depth: Option<usize>,

    /// Most shared documents the err search raises to the top grade
    /// [default: 5]
    #[arg(long, value_name = "P")]
    pub pmax: Option<usize>,

    /// Trailtext evaluation length in characters for u [default: 12000]
    #[arg(long, value_name = "L")]
    pub l: Option<usize>,

    /// Relevance judgments to pin as predetermined grades
    #[arg(long, value_name = "PATH")]
    pub qrels: Option<PathBuf>,

    /// Fraction of the judgments to keep, in [0,1]; repeatable for sweep
    #[arg(long, value_name = "F")]
    pub fraction: Vec<f64>,

    /// Seed for judgment sampling and the map solver; mandatory when any
    /// fraction is below 1
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,

    /// Worker threads [default: one per core]
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,

    /// Write the table here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// A measure with every parameter pinned down.
#[derive(Debug, Clone)]
pub enum ResolvedMeasure {
    Precision { k: usize },
    Ndcg { k: usize, scale: GradeScale },
    Rbp { persistence: f64, scale: GradeScale },
    Map { k: usize },
    Err { params: ErrParams, scale: GradeScale },
    U { length: usize, top_grade: f64 },
    Rbo { persistence: f64, depth: Option<usize> },
}

impl ResolvedMeasure {
    pub fn name(&self) -> &'static str {
        match self {
            ResolvedMeasure::Precision { .. } => "precision",
            ResolvedMeasure::Ndcg { .. } => "ndcg",
            ResolvedMeasure::Rbp { .. } => "rbp",
            ResolvedMeasure::Map { .. } => "map",
            ResolvedMeasure::Err { .. } => "err",
            ResolvedMeasure::U { .. } => "u",
            ResolvedMeasure::Rbo { .. } => "rbo",
        }
    }

    /// The scale judgments are read on, or `None` for measures that take no
    /// judgments at all.
    pub fn qrels_scale(&self) -> Option<GradeScale> {
        match self {
            ResolvedMeasure::Precision { .. } | ResolvedMeasure::Map { .. } => {
                Some(GradeScale::binary())
            }
            ResolvedMeasure::Ndcg { scale, .. }
            | ResolvedMeasure::Rbp { scale, .. }
            | ResolvedMeasure::Err { scale, .. } => Some(scale.clone()),
            ResolvedMeasure::U { .. } | ResolvedMeasure::Rbo { .. } => None,
        }
    }

    /// Whether run files hold passage rankings instead of document rankings.
    pub fn reads_passages(&self) -> bool {
        matches!(self, ResolvedMeasure::U { .. })
    }

    /// Whether per-topic rows carry a search-slack column.
    pub fn has_epsilon(&self) -> bool {
        matches!(self, ResolvedMeasure::Err { .. })
    }
}

/// Finds the standard scale whose top grade is `rg`.
fn scale_from_top(rg: f64) -> Result<GradeScale> {
    for levels in 1..=16 {
        let scale = GradeScale::new(levels).expect("small level counts are valid");
        if (scale.top_f64() - rg).abs() <= 1e-9 {
            return Ok(scale);
        }
    }
    bail!(
        "--rg {rg} is not the top of a standard scale; use (2^G - 1) / 2^G \
         for a whole number of levels G, e.g. 0.5, 0.75, or 0.875"
    );
}

fn forbid<T>(value: &Option<T>, flag: &str, measure: &str) -> Result<()> {
    if value.is_some() {
        bail!("--{flag} does not apply to measure {measure}");
    }
    Ok(())
}

fn positive(value: usize, flag: &str) -> Result<usize> {
    if value == 0 {
        bail!("--{flag} must be at least 1");
    }
    Ok(value)
}

fn persistence_of(opts: &CommonOpts) -> Result<f64> {
    let psi = opts.psi.unwrap_or(0.9);
    if !(psi > 0.0 && psi < 1.0) {
        bail!("--psi must lie strictly between 0 and 1, got {psi}");
    }
    Ok(psi)
}

/// Checks flag applicability and fills in defaults for the chosen measure.
pub fn resolve_measure(opts: &CommonOpts) -> Result<ResolvedMeasure> {
    match opts.measure {
        MeasureChoice::Precision => {
            forbid(&opts.psi, "psi", "precision")?;
            forbid(&opts.rg, "rg", "precision")?;
            forbid(&opts.depth, "depth", "precision")?;
            forbid(&opts.pmax, "pmax", "precision")?;
            forbid(&opts.l, "l", "precision")?;
            let Some(k) = opts.k else {
                bail!("measure precision needs an explicit --k");
            };
            Ok(ResolvedMeasure::Precision {
                k: positive(k, "k")?,
            })
        }
        MeasureChoice::Ndcg => {
            forbid(&opts.psi, "psi", "ndcg")?;
            forbid(&opts.depth, "depth", "ndcg")?;
            forbid(&opts.pmax, "pmax", "ndcg")?;
            forbid(&opts.l, "l", "ndcg")?;
            Ok(ResolvedMeasure::Ndcg {
                k: positive(opts.k.unwrap_or(20), "k")?,
                scale: scale_from_top(opts.rg.unwrap_or(0.75))?,
            })
        }
        MeasureChoice::Rbp => {
            forbid(&opts.k, "k", "rbp")?;
            forbid(&opts.depth, "depth", "rbp")?;
            forbid(&opts.pmax, "pmax", "rbp")?;
            forbid(&opts.l, "l", "rbp")?;
            Ok(ResolvedMeasure::Rbp {
                persistence: persistence_of(opts)?,
                scale: scale_from_top(opts.rg.unwrap_or(0.75))?,
            })
        }
        MeasureChoice::Map => {
            forbid(&opts.psi, "psi", "map")?;
            forbid(&opts.rg, "rg", "map")?;
            forbid(&opts.depth, "depth", "map")?;
            forbid(&opts.pmax, "pmax", "map")?;
            forbid(&opts.l, "l", "map")?;
            Ok(ResolvedMeasure::Map {
                k: positive(opts.k.unwrap_or(100), "k")?,
            })
        }
        MeasureChoice::Err => {
            forbid(&opts.k, "k", "err")?;
            forbid(&opts.psi, "psi", "err")?;
            forbid(&opts.l, "l", "err")?;
            let scale = scale_from_top(opts.rg.unwrap_or(0.75))?;
            let depth = positive(opts.depth.unwrap_or(30), "depth")?;
            let pmax = positive(opts.pmax.unwrap_or(5), "pmax")?;
            let params = ErrParams::new(scale.top_f64(), depth, pmax)?;
            Ok(ResolvedMeasure::Err { params, scale })
        }
        MeasureChoice::U => {
            forbid(&opts.k, "k", "u")?;
            forbid(&opts.psi, "psi", "u")?;
            forbid(&opts.depth, "depth", "u")?;
            forbid(&opts.pmax, "pmax", "u")?;
            let top_grade = opts.rg.unwrap_or(1.0);
            if !(top_grade > 0.0 && top_grade <= 1.0) {
                bail!("--rg for measure u must lie in (0, 1], got {top_grade}");
            }
            Ok(ResolvedMeasure::U {
                length: positive(opts.l.unwrap_or(12000), "l")?,
                top_grade,
            })
        }
        MeasureChoice::Rbo => {
            forbid(&opts.k, "k", "rbo")?;
            forbid(&opts.rg, "rg", "rbo")?;
            forbid(&opts.pmax, "pmax", "rbo")?;
            forbid(&opts.l, "l", "rbo")?;
            let depth = match opts.depth {
                Some(d) => Some(positive(d, "depth")?),
                None => None,
            };
            Ok(ResolvedMeasure::Rbo {
                persistence: persistence_of(opts)?,
                depth,
            })
        }
    }
}

fn check_fraction(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        bail!("--fraction must lie in [0, 1], got {f}");
    }
    Ok(f)
}

/// The single judgment fraction used by compare and matrix; defaults to 1.
pub fn single_fraction(opts: &CommonOpts) -> Result<f64> {
    match opts.fraction.as_slice() {
        [] => Ok(1.0),
        [f] => check_fraction(*f),
        more => bail!(
            "this command takes at most one --fraction, got {}",
            more.len()
        ),
    }
}

/// The fraction sequence for sweep, in the order given.
pub fn sweep_fractions(opts: &CommonOpts) -> Result<Vec<f64>> {
    if opts.fraction.is_empty() {
        bail!("sweep needs at least one --fraction");
    }
    opts.fraction.iter().map(|&f| check_fraction(f)).collect()
}

/// Enforces the sampling rule: partial fractions need a seed. Returns the
/// seed to sample with (immaterial when nothing is left out).
pub fn sampling_seed(fractions: &[f64], seed: Option<u64>) -> Result<u64> {
    if fractions.iter().any(|&f| f < 1.0) && seed.is_none() {
        bail!("--seed is mandatory when a judgment fraction is below 1");
    }
    Ok(seed.unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(measure: MeasureChoice) -> CommonOpts {
        CommonOpts {
            measure,
            k: None,
            psi: None,
            rg: None,
            depth: None,
            pmax: None,
            l: None,
            qrels: None,
            fraction: vec![],
            seed: None,
            jobs: None,
            out: None,
        }
    }

    #[test]
    fn defaults_follow_the_conventional_settings() {
        let ndcg = resolve_measure(&opts(MeasureChoice::Ndcg)).unwrap();
        match ndcg {
            ResolvedMeasure::Ndcg { k, scale } => {
                assert_eq!(k, 20);
                assert_eq!(scale.levels(), 2);
            }
            other => panic!("expected ndcg, got {other:?}"),
        }
        match resolve_measure(&opts(MeasureChoice::Map)).unwrap() {
            ResolvedMeasure::Map { k } => assert_eq!(k, 100),
            other => panic!("expected map, got {other:?}"),
        }
        match resolve_measure(&opts(MeasureChoice::Err)).unwrap() {
            ResolvedMeasure::Err { params, .. } => {
                assert_eq!(params.depth(), 30);
                assert_eq!(params.max_relevant(), 5);
                assert_eq!(params.top_grade(), 0.75);
            }
            other => panic!("expected err, got {other:?}"),
        }
        match resolve_measure(&opts(MeasureChoice::U)).unwrap() {
            ResolvedMeasure::U { length, top_grade } => {
                assert_eq!(length, 12000);
                assert_eq!(top_grade, 1.0);
            }
            other => panic!("expected u, got {other:?}"),
        }
        match resolve_measure(&opts(MeasureChoice::Rbp)).unwrap() {
            ResolvedMeasure::Rbp { persistence, scale } => {
                assert_eq!(persistence, 0.9);
                assert_eq!(scale.levels(), 2);
            }
            other => panic!("expected rbp, got {other:?}"),
        }
    }

    #[test]
    fn precision_demands_a_cutoff() {
        assert!(resolve_measure(&opts(MeasureChoice::Precision))
            .unwrap_err()
            .to_string()
            .contains("--k"));
        let mut with_k = opts(MeasureChoice::Precision);
        with_k.k = Some(10);
        assert!(matches!(
            resolve_measure(&with_k).unwrap(),
            ResolvedMeasure::Precision { k: 10 }
        ));
    }

    #[test]
    fn inapplicable_flags_are_rejected() {
        let mut o = opts(MeasureChoice::Err);
        o.k = Some(20);
        assert!(resolve_measure(&o).is_err());

        let mut o = opts(MeasureChoice::Precision);
        o.k = Some(5);
        o.psi = Some(0.9);
        assert!(resolve_measure(&o).is_err());

        let mut o = opts(MeasureChoice::Map);
        o.rg = Some(0.75);
        assert!(resolve_measure(&o).is_err());

        let mut o = opts(MeasureChoice::Rbo);
        o.l = Some(100);
        assert!(resolve_measure(&o).is_err());
    }

    #[test]
    fn top_grades_map_to_scales() {
        let mut o = opts(MeasureChoice::Ndcg);
        o.rg = Some(0.875);
        match resolve_measure(&o).unwrap() {
            ResolvedMeasure::Ndcg { scale, .. } => assert_eq!(scale.levels(), 3),
            other => panic!("expected ndcg, got {other:?}"),
        }
        o.rg = Some(0.8);
        assert!(resolve_measure(&o).is_err());
    }

    #[test]
    fn u_accepts_any_gain_in_the_unit_interval() {
        let mut o = opts(MeasureChoice::U);
        o.rg = Some(0.5);
        assert!(matches!(
            resolve_measure(&o).unwrap(),
            ResolvedMeasure::U { top_grade, .. } if top_grade == 0.5
        ));
        o.rg = Some(0.0);
        assert!(resolve_measure(&o).is_err());
    }

    #[test]
    fn fractions_are_range_checked_and_counted() {
        let mut o = opts(MeasureChoice::Precision);
        assert_eq!(single_fraction(&o).unwrap(), 1.0);
        o.fraction = vec![0.25];
        assert_eq!(single_fraction(&o).unwrap(), 0.25);
        o.fraction = vec![0.25, 0.5];
        assert!(single_fraction(&o).is_err());
        assert_eq!(sweep_fractions(&o).unwrap(), vec![0.25, 0.5]);
        o.fraction = vec![1.5];
        assert!(single_fraction(&o).is_err());
        o.fraction = vec![];
        assert!(sweep_fractions(&o).is_err());
    }

    #[test]
    fn partial_fractions_require_a_seed() {
        assert!(sampling_seed(&[0.5], None).is_err());
        assert_eq!(sampling_seed(&[0.5], Some(7)).unwrap(), 7);
        assert_eq!(sampling_seed(&[1.0], None).unwrap(), 0);
    }
}
