// SPDX-License-Identifier: Apache-2.0

//! Staged output: files are collected in memory and committed only after
//! the command has finished computing, each through a temp file and rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::CliError;

const LOCK_NAME: &str = ".urbanmesh.lock";

#[derive(Debug, Default)]
pub struct Staged {
    files: Vec<(String, Vec<u8>)>,
}

impl Staged {
    pub fn add(&mut self, name: impl Into<String>, contents: impl Into<Vec<u8>>) {
        self.files.push((name.into(), contents.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every staged file into `dir` under an advisory lock.
    pub fn commit(self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: cannot create output directory: {e}", dir.display())))?;
        let _lock = DirLock::acquire(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in self.files {
            let target = dir.join(&name);
            let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", target.display()));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(&contents).map_err(io)?;
            tmp.as_file().sync_all().map_err(io)?;
            tmp.persist(&target).map_err(|e| io(e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}

/// Lock file created exclusively and removed on drop.
struct DirLock(PathBuf);

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self, CliError> {
        let path = dir.join(LOCK_NAME);
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock(path))
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(CliError::Input(format!(
                "{}: output directory is locked by another run (remove {LOCK_NAME} if stale)",
                dir.display()
            ))),
            Err(e) => Err(CliError::Input(format!("{}: {e}", path.display()))),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}
