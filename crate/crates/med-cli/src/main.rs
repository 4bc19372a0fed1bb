//! `med`: how far apart two ranked retrieval runs can be.
//!
//! Given two runs and (optionally) partial relevance judgments, every
//! unjudged document's relevance is an unknown; the reported value is the
//! largest score difference any consistent assignment of those unknowns can
//! produce. A small distance certifies that no future judgments can make the
//! runs differ by more than that under the chosen measure.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use med_core::io::{parse_passage_run, parse_qrels, parse_run};
use med_core::JudgmentSet;

use crate::commands::RunInput;
use crate::config::{
    resolve_measure, sampling_seed, single_fraction, sweep_fractions, CommonOpts, ResolvedMeasure,
};

#[derive(Parser)]
#[command(
    name = "med",
    version,
    about = "Maximized effectiveness difference between ranked retrieval runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare two runs topic by topic
    Compare {
        /// First run file
        run_a: PathBuf,
        /// Second run file
        run_b: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Distance matrix over every pair of runs in a directory
    Matrix {
        /// Directory holding one run file per run
        dir: PathBuf,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Distances for every run pair at each judgment fraction
    Sweep {
        /// Run files (at least two)
        #[arg(num_args = 2.., required = true)]
        runs: Vec<PathBuf>,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("med: error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

type CmdResult = Result<ExitCode>;

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Compare { run_a, run_b, opts } => {
            with_pool(&opts, |o| cmd_compare(&run_a, &run_b, o))
        }
        Command::Matrix { dir, opts } => with_pool(&opts, |o| cmd_matrix(&dir, o)),
        Command::Sweep { runs, opts } => with_pool(&opts, |o| cmd_sweep(&runs, o)),
    }
}

/// Runs `body` on a worker pool sized by `--jobs`, or on the default pool.
fn with_pool<F>(opts: &CommonOpts, body: F) -> CmdResult
where
    F: FnOnce(&CommonOpts) -> CmdResult + Send,
{
    match opts.jobs {
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot build the worker pool")?
            .install(|| body(opts)),
        None => body(opts),
    }
}

fn cmd_compare(run_a: &Path, run_b: &Path, opts: &CommonOpts) -> CmdResult {
    let measure = resolve_measure(opts)?;
    let judgments = load_judgments(opts, &measure)?;
    let a = load_input(run_a, &measure)?;
    let b = load_input(run_b, &measure)?;
    match commands::compare(&measure, &a, &b, &judgments, opts.seed.unwrap_or(0))? {
        Some(table) => {
            emit(opts, &table)?;
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!("med: runs {} and {} share no topics", a.label(), b.label());
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_matrix(dir: &Path, opts: &CommonOpts) -> CmdResult {
    let measure = resolve_measure(opts)?;
    let judgments = load_judgments(opts, &measure)?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("cannot list {}", dir.display()))?
        .filter_map(|entry| entry.ok())
        .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
        .map(|e| e.path())
        .collect();
    paths.sort();
    let mut inputs = Vec::new();
    for path in &paths {
        match load_input(path, &measure) {
            Ok(input) => inputs.push(input),
            Err(err) => eprintln!("med: warning: skipping {}: {err:#}", path.display()),
        }
    }
    if inputs.len() < 2 {
        bail!("fewer than two usable runs in {}", dir.display());
    }
    let table = commands::matrix(&measure, &inputs, &judgments, opts.seed.unwrap_or(0))?;
    emit(opts, &table)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(runs: &[PathBuf], opts: &CommonOpts) -> CmdResult {
    let measure = resolve_measure(opts)?;
    if measure.qrels_scale().is_none() {
        bail!("sweep does not support measure {}", measure.name());
    }
    if opts.qrels.is_none() {
        bail!("sweep needs --qrels");
    }
    let fractions = sweep_fractions(opts)?;
    let seed = sampling_seed(&fractions, opts.seed)?;
    let qrels = read_qrels(opts, &measure)?;
    let mut inputs = runs
        .iter()
        .map(|path| load_input(path, &measure))
        .collect::<Result<Vec<_>>>()?;
    inputs.sort_by(|x, y| x.label().cmp(y.label()));
    let table = commands::sweep(
        &measure,
        &inputs,
        &qrels,
        &fractions,
        seed,
        opts.seed.unwrap_or(0),
    )?;
    emit(opts, &table)?;
    Ok(ExitCode::SUCCESS)
}

/// Reads the qrels file, if any, on the measure's scale.
fn read_qrels(opts: &CommonOpts, measure: &ResolvedMeasure) -> Result<JudgmentSet> {
    let Some(path) = &opts.qrels else {
        if !opts.fraction.is_empty() {
            bail!("--fraction requires --qrels");
        }
        return Ok(JudgmentSet::new());
    };
    let Some(scale) = measure.qrels_scale() else {
        bail!("--qrels does not apply to measure {}", measure.name());
    };
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read qrels {}", path.display()))?;
    let parsed =
        parse_qrels(&text, &scale).with_context(|| format!("cannot parse {}", path.display()))?;
    if parsed.clamped > 0 {
        eprintln!(
            "med: warning: {}: {} grade indices clamped to the scale",
            path.display(),
            parsed.clamped
        );
    }
    if parsed.duplicates > 0 {
        eprintln!(
            "med: warning: {}: {} repeated judgments (last kept)",
            path.display(),
            parsed.duplicates
        );
    }
    Ok(parsed.judgments)
}

/// The judgments compare and matrix run with: the qrels, thinned to the
/// requested fraction by a seeded nested sample.
fn load_judgments(opts: &CommonOpts, measure: &ResolvedMeasure) -> Result<JudgmentSet> {
    let fraction = single_fraction(opts)?;
    let full = read_qrels(opts, measure)?;
    if fraction < 1.0 {
        let seed = sampling_seed(&[fraction], opts.seed)?;
        Ok(full
            .nested_samples(&[fraction], seed)
            .pop()
            .expect("one fraction in, one sample out"))
    } else {
        Ok(full)
    }
}

fn load_input(path: &Path, measure: &ResolvedMeasure) -> Result<RunInput> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read run {}", path.display()))?;
    if measure.reads_passages() {
        let trails = parse_passage_run(&text)
            .with_context(|| format!("cannot parse passage run {}", path.display()))?;
        Ok(RunInput::Passages {
            label: file_label(path),
            trails,
        })
    } else {
        let run =
            parse_run(&text).with_context(|| format!("cannot parse run {}", path.display()))?;
        if run.rank_warnings() > 0 {
            eprintln!(
                "med: warning: {}: {} rank fields disagree with the canonical order",
                path.display(),
                run.rank_warnings()
            );
        }
        Ok(RunInput::Docs(run))
    }
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|name| name.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn emit(opts: &CommonOpts, table: &str) -> Result<()> {
    match &opts.out {
        Some(path) => fs::write(path, table)
            .with_context(|| format!("cannot write {}", path.display())),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}
