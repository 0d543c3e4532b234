//! Deterministic CSV emission.
//!
//! Every file starts with `#`-prefixed provenance comments embedding the
//! fully resolved configuration, then a header row, then data rows.  All
//! floating-point values are serialized with 12 significant digits in
//! scientific notation; nothing in the output depends on wall time, host,
//! or iteration order, so identical configurations produce byte-identical
//! files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// 12-significant-digit scientific form, the fixed interchange format.
pub fn sig12(x: f64) -> String {
    format!("{:.11e}", x)
}

/// A CSV file under construction.
pub struct Csv {
    path: PathBuf,
    w: BufWriter<File>,
}

impl Csv {
    /// Creates the file and writes provenance comments plus the header row.
    pub fn create(
        dir: &Path,
        name: &str,
        command: &str,
        resolved: &[(String, String)],
        columns: &[&str],
    ) -> std::io::Result<Csv> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "# feshlab {command}")?;
        for (k, v) in resolved {
            writeln!(w, "# config {k} = {v}")?;
        }
        writeln!(w, "{}", columns.join(","))?;
        Ok(Csv { path, w })
    }

    /// Writes one data row; fields are pre-serialized.
    pub fn row(&mut self, fields: &[String]) -> std::io::Result<()> {
        writeln!(self.w, "{}", fields.join(","))
    }

    /// Flushes and closes, reporting the path written.
    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        self.w.flush()?;
        Ok(self.path)
    }
}

/// A deterministic plain-text report file with the same provenance block.
pub struct Report {
    path: PathBuf,
    w: BufWriter<File>,
}

impl Report {
    pub fn create(
        dir: &Path,
        name: &str,
        command: &str,
        resolved: &[(String, String)],
    ) -> std::io::Result<Report> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "# feshlab {command}")?;
        for (k, v) in resolved {
            writeln!(w, "# config {k} = {v}")?;
        }
        Ok(Report { path, w })
    }

    pub fn line(&mut self, text: &str) -> std::io::Result<()> {
        writeln!(self.w, "{text}")
    }

    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        self.w.flush()?;
        Ok(self.path)
    }
}
