//! Report files. Every file is written to a temporary sibling and renamed
//! into place, so readers never see a partial report.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

pub fn write_atomic<F>(dir: &Path, name: &str, fill: F) -> io::Result<PathBuf>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}

/// Adapter for writers that report the library error type.
pub fn lib_io(e: fracmhd::Error) -> io::Error {
    match e {
        fracmhd::Error::Io(e) => e,
        other => io::Error::other(other.to_string()),
    }
}
