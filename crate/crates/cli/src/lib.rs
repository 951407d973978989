//! Manifest-driven batch runs of the fracmhd laboratory.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod manifest;
pub mod output;

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value as Json};

pub use manifest::{parse_manifest, Command, Manifest, ManifestError};

/// Exit status for a run whose checks all hold.
pub const EXIT_OK: i32 = 0;
/// Exit status when an invariant check fails or the computation breaks down.
pub const EXIT_INVARIANT: i32 = 1;
/// Exit status for an unreadable or invalid manifest.
pub const EXIT_MANIFEST: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Manifest(ManifestError),
    Run(fracmhd::Error),
    Io(io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Manifest(_) => EXIT_MANIFEST,
            _ => EXIT_INVARIANT,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Manifest(e) => write!(f, "manifest error:\n{e}"),
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        CliError::Manifest(e)
    }
}

impl From<fracmhd::Error> for CliError {
    fn from(e: fracmhd::Error) -> Self {
        CliError::Run(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

/// A finished run: the summary that was written and the files beside it.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Json,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            EXIT_OK
        } else {
            EXIT_INVARIANT
        }
    }
}

fn write_summary(dir: &Path, summary: &Json) -> io::Result<PathBuf> {
    output::write_atomic(dir, "summary.json", |w| {
        serde_json::to_writer_pretty(&mut *w, summary)?;
        w.write_all(b"\n")
    })
}

/// Runs a manifest and writes `summary.json` into `out`.
///
/// A computation that breaks down (for instance a diverging iteration) still
/// produces a summary, with `passed: false` and the error message.
pub fn execute(m: &Manifest, out: &Path) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let (report, error) = match commands::dispatch(m, out) {
        Ok(r) => (Some(r), None),
        Err(CliError::Run(e)) => (None, Some(e)),
        Err(e) => return Err(e),
    };
    let mut summary = Map::new();
    summary.insert("command".into(), json!(m.command.name()));
    summary.insert("seed".into(), json!(m.seed));
    let passed;
    match (report, error) {
        (Some(r), _) => {
            let checks: Map<String, Json> = r
                .checks
                .iter()
                .map(|(k, v)| ((*k).into(), json!(v)))
                .collect();
            passed = r.checks.iter().all(|(_, ok)| *ok);
            summary.insert("config".into(), Json::Object(r.config));
            summary.insert("checks".into(), Json::Object(checks));
            summary.insert("passed".into(), json!(passed));
            summary.insert("results".into(), r.results);
            let names: Vec<String> = r
                .files
                .iter()
                .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
                .collect();
            summary.insert("outputs".into(), json!(names));
            summary.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
            let summary = Json::Object(summary);
            let mut files = r.files;
            files.push(write_summary(out, &summary)?);
            return Ok(Outcome {
                passed,
                summary,
                files,
            });
        }
        (None, e) => {
            passed = false;
            summary.insert("config".into(), Json::Object(commands::config_json(m)));
            summary.insert("checks".into(), json!({}));
            summary.insert("passed".into(), json!(passed));
            summary.insert("error".into(), json!(e.map(|e| e.to_string())));
        }
    }
    summary.insert("wall_time_s".into(), json!(start.elapsed().as_secs_f64()));
    let summary = Json::Object(summary);
    let files = vec![write_summary(out, &summary)?];
    Ok(Outcome {
        passed,
        summary,
        files,
    })
}

/// Reads, validates and runs a manifest file; returns the process exit code.
pub fn run_manifest_file(
    command: Command,
    path: &Path,
    output: Option<&Path>,
    threads: Option<usize>,
) -> i32 {
    match try_run(command, path, output, threads) {
        Ok(outcome) => {
            let verdict = if outcome.passed { "PASS" } else { "FAIL" };
            eprintln!("{command}: {verdict}");
            if let Some(e) = outcome.summary.get("error") {
                eprintln!("{}", e.as_str().unwrap_or_default());
            }
            for f in &outcome.files {
                eprintln!("  wrote {}", f.display());
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn try_run(
    command: Command,
    path: &Path,
    output: Option<&Path>,
    threads: Option<usize>,
) -> Result<Outcome, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| manifest::runtime_issue(format!("cannot read {}: {e}", path.display())))?;
    let m = parse_manifest(&text)?;
    if m.command != command {
        return Err(manifest::runtime_issue(format!(
            "{} declares command {}, not {command}",
            path.display(),
            m.command
        ))
        .into());
    }
    let out = output
        .map(Path::to_path_buf)
        .unwrap_or_else(|| m.output_dir.clone());
    match threads.or(m.threads) {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| manifest::runtime_issue(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| execute(&m, &out))
        }
        None => execute(&m, &out),
    }
}
