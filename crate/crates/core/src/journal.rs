//! Resume journal for a sweep writing to a piece file.
//!
//! After every step the runner appends the step's lines and then replaces
//! the journal atomically. On resume the piece file is cut back to the
//! journaled length, which discards any torn or unjournaled tail.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::SweepState;

pub const JOURNAL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum JournalError {
    #[error("journal i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed journal {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("journal version {0} is not supported")]
    Version(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Journal {
    pub version: u32,
    /// Fingerprint of the sweep configuration that produced the file.
    pub config_hash: String,
    /// Length of the piece file covered by `state`.
    pub bytes: u64,
    pub state: SweepState,
}

impl Journal {
    pub fn new(config_hash: String, bytes: u64, state: SweepState) -> Self {
        Journal {
            version: JOURNAL_VERSION,
            config_hash,
            bytes,
            state,
        }
    }

    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, JournalError> {
        let text = fs::read_to_string(path).map_err(|source| JournalError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let j = Self::parse(&text).map_err(|source| JournalError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if j.version != JOURNAL_VERSION {
            return Err(JournalError::Version(j.version));
        }
        Ok(j)
    }

    /// Writes to a sibling temporary file, syncs it, then renames it over
    /// `path`.
    pub fn store(&self, path: &Path) -> Result<(), JournalError> {
        let io_err = |source| JournalError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut tmp_name = path.file_name().unwrap_or_default().to_os_string();
        tmp_name.push(".tmp");
        let tmp = path.with_file_name(tmp_name);
        let mut f = fs::File::create(&tmp).map_err(io_err)?;
        let mut text = serde_json::to_string_pretty(self).expect("journal serializes");
        text.push('\n');
        f.write_all(text.as_bytes()).map_err(io_err)?;
        f.sync_all().map_err(io_err)?;
        drop(f);
        fs::rename(&tmp, path).map_err(io_err)
    }
}

/// Default journal location for a piece file: `<out>.journal`.
pub fn journal_path_for(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".journal");
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::AffineForm;
    use crate::rational::q;

    fn sample() -> Journal {
        Journal::new(
            "ab".repeat(32),
            1234,
            SweepState {
                frontier: q("1897/3762"),
                eps: q("1/100000"),
                atoms: 1,
                pieces: 2,
                segments: 1,
                last_form: Some(AffineForm::new(q("333/8"), q("-325/16"))),
                frontier_closed: Some(true),
            },
        )
    }

    #[test]
    fn store_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.jsonl.journal");
        let j = sample();
        j.store(&path).unwrap();
        assert_eq!(Journal::load(&path).unwrap(), j);
        // overwrite in place
        let mut k = j.clone();
        k.bytes = 99;
        k.store(&path).unwrap();
        assert_eq!(Journal::load(&path).unwrap().bytes, 99);
        assert!(!dir.path().join("run.jsonl.journal.tmp").exists());
    }

    #[test]
    fn rejects_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j");
        fs::write(&path, "{\"version\":1}").unwrap();
        assert!(matches!(
            Journal::load(&path),
            Err(JournalError::Json { .. })
        ));
        let mut j = sample();
        j.version = 7;
        fs::write(&path, serde_json::to_string(&j).unwrap()).unwrap();
        assert!(matches!(
            Journal::load(&path),
            Err(JournalError::Version(7))
        ));
        assert!(matches!(
            Journal::load(&dir.path().join("none")),
            Err(JournalError::Io { .. })
        ));
    }

    #[test]
    fn journal_path() {
        assert_eq!(
            journal_path_for(Path::new("/tmp/a.jsonl")),
            Path::new("/tmp/a.jsonl.journal")
        );
    }
}
