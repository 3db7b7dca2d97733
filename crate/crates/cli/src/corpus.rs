//! Corpus regression: every entry of `manifest.json` is run through the
//! descent and compared with its recorded verdict.

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use gauge_lab::descent::{descent_run, RefutationTrace, DEFAULT_MAX_STEPS, DEFAULT_TOL};

use crate::{check_replay, descent_options, emit, read_pair, Status};

pub const MANIFEST: &str = "manifest.json";

#[derive(Args)]
pub struct CorpusArgs {
    #[arg(long, default_value = "corpus")]
    dir: PathBuf,
    /// Overwrite the recorded verdicts with the observed ones.
    #[arg(long)]
    record: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Entry {
    pub name: String,
    pub file: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<usize>,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    pub expect: Expected,
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fact: Option<String>,
}

impl Expected {
    fn observed(trace: &RefutationTrace) -> Self {
        Expected {
            verdict: trace.verdict.label().into(),
            reason: trace.verdict.reason().map(str::to_owned),
            fact: trace.verdict.fact().map(|f| f.label().to_owned()),
        }
    }
}

#[derive(Serialize)]
struct EntryReport {
    name: String,
    expected: Expected,
    observed: Expected,
    rounds: usize,
    deflations: usize,
    replayed: bool,
    pass: bool,
}

pub fn run(args: CorpusArgs) -> Result<Status> {
    let manifest_path = args.dir.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path).with_context(|| format!("reading {}", manifest_path.display()))?;
    let mut manifest: Manifest =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", manifest_path.display()))?;

    let mut reports = Vec::with_capacity(manifest.entries.len());
    for entry in &mut manifest.entries {
        let pair = read_pair(&args.dir.join(&entry.file))?;
        let options = descent_options(&pair, entry.max_steps, entry.tol, entry.phases)?;
        let trace = descent_run(&pair, &options)?;
        let observed = Expected::observed(&trace);
        let replayed = matches!(check_replay(&trace)?, Status::Pass);
        if args.record {
            entry.expect = observed.clone();
        }
        reports.push(EntryReport {
            name: entry.name.clone(),
            pass: replayed && observed == entry.expect,
            expected: entry.expect.clone(),
            observed,
            rounds: trace.rounds(),
            deflations: trace.deflations(),
            replayed,
        });
    }
    if args.record {
        emit(&manifest, Some(&manifest_path))?;
    }
    emit(&reports, None)?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    Ok(if failed.is_empty() {
        Status::Pass
    } else {
        Status::CheckFailed(format!("corpus entries differ from the record: {}", failed.join(", ")))
    })
}
