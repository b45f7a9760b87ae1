//! Staged output files: nothing touches disk until every artifact is ready,
//! and a failed commit removes whatever it already wrote.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use elm_pi::{Error, Result};

pub struct Outputs {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Self {
        Self { dir: dir.to_path_buf(), files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(&self.dir).map_err(|source| Error::Io { path: self.dir.clone(), source })?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            if let Err(source) = std::fs::write(&path, bytes) {
                for p in written.iter().chain(std::iter::once(&path)) {
                    let _ = std::fs::remove_file(p);
                }
                return Err(Error::Io { path, source });
            }
            written.push(path);
        }
        Ok(written)
    }
}

/// Line-oriented `key=value` record.
#[derive(Default)]
pub struct Record(String);

impl Record {
    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.0, "{key}={value}");
        self
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

/// CSV with a header row; floats use the shortest round-tripping form.
pub struct Csv(String);

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self(format!("{}\n", header.join(",")))
    }

    pub fn row<I, T>(&mut self, cells: I)
    where
        I: IntoIterator<Item = T>,
        T: std::fmt::Display,
    {
        let line: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
        self.0.push_str(&line.join(","));
        self.0.push('\n');
    }

    pub fn into_string(self) -> String {
        self.0
    }
}
