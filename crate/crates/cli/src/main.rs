use std::path::PathBuf;
use std::process::exit;

use clap::Parser;
use fracmhd_cli::{run_manifest_file, Command, EXIT_MANIFEST};

/// Fractional MHD laboratory: batch runs driven by a manifest.
#[derive(Parser, Debug)]
#[command(name = "fracmhd", version)]
struct Args {
    /// run-scheme, check-inequalities, verify-uniqueness or norms
    command: String,
    #[arg(long)]
    manifest: PathBuf,
    /// Directory for reports; overrides `output_dir` in the manifest.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; overrides `threads` in the manifest.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() {
    let args = Args::parse();
    let command: Command = match args.command.parse() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            exit(EXIT_MANIFEST);
        }
    };
    exit(run_manifest_file(
        command,
        &args.manifest,
        args.output.as_deref(),
        args.threads,
    ));
}
