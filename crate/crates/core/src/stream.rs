//! File-backed sweeps: piece stream, resume journal and summaries.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::affine::AffineForm;
use crate::certify::{
    aggregate, AggregateError, PieceLike, Side, StopReason, SweepConfig, SweepError, SweepState,
    Sweeper,
};
use crate::interval::RInterval;
use crate::journal::{journal_path_for, Journal, JournalError};
use crate::perm::{sigma_sequence, PermError, SigmaRow};
use crate::rational::Rational;
use crate::record::{parse_stream, PieceKind, PieceRecord, RecordError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("journal was written by a different configuration ({found}, expected {expected})")]
    JournalMismatch { expected: String, found: String },
    #[error("piece file holds {found} bytes but the journal covers {expected}")]
    TruncatedOutput { expected: u64, found: u64 },
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Include each atom's full driving list in its record.
    pub with_driving: bool,
    /// Continue from the journal instead of starting over.
    pub resume: bool,
    /// Journal location; defaults to `<out>.journal`.
    pub journal: Option<PathBuf>,
    /// Return early once this many pieces are on disk, as if interrupted.
    pub stop_after_pieces: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunEnd {
    Stopped(StopReason),
    Interrupted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub end: RunEnd,
    pub state: SweepState,
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Runs `cfg`, appending one line per piece to `out` and journaling after
/// every step. A resumed run produces the same bytes as an uninterrupted one.
pub fn run_sweep_to_file(
    cfg: &SweepConfig,
    out: &Path,
    opts: &RunOptions,
) -> Result<RunOutcome, RunError> {
    let journal_path = opts
        .journal
        .clone()
        .unwrap_or_else(|| journal_path_for(out));
    let hash = cfg.fingerprint();
    let io_err = io_at(out);

    let (mut sweeper, file, mut bytes) = if opts.resume {
        let j = Journal::load(&journal_path)?;
        if j.config_hash != hash {
            return Err(RunError::JournalMismatch {
                expected: hash,
                found: j.config_hash,
            });
        }
        let file = OpenOptions::new().write(true).open(out).map_err(&io_err)?;
        let found = file.metadata().map_err(&io_err)?.len();
        if found < j.bytes {
            return Err(RunError::TruncatedOutput {
                expected: j.bytes,
                found,
            });
        }
        file.set_len(j.bytes).map_err(&io_err)?;
        (Sweeper::resume(cfg.clone(), j.state)?, file, j.bytes)
    } else {
        let sweeper = Sweeper::new(cfg.clone())?;
        let file = File::create(out).map_err(&io_err)?;
        Journal::new(hash.clone(), 0, sweeper.state().clone()).store(&journal_path)?;
        (sweeper, file, 0)
    };

    let mut file = file;
    file.seek(SeekFrom::Start(bytes)).map_err(&io_err)?;
    let mut writer = BufWriter::new(file);
    loop {
        if opts
            .stop_after_pieces
            .is_some_and(|k| sweeper.state().pieces >= k)
        {
            return Ok(RunOutcome {
                end: RunEnd::Interrupted,
                state: sweeper.state().clone(),
            });
        }
        let Some(pieces) = sweeper.step()? else {
            break;
        };
        for p in &pieces {
            let mut line = PieceRecord::from_piece(p, opts.with_driving).to_line();
            line.push('\n');
            writer.write_all(line.as_bytes()).map_err(&io_err)?;
            bytes += line.len() as u64;
        }
        writer.flush().map_err(&io_err)?;
        writer.get_ref().sync_data().map_err(&io_err)?;
        Journal::new(hash.clone(), bytes, sweeper.state().clone()).store(&journal_path)?;
    }
    let reason = sweeper.stop_reason().expect("sweep stopped");
    Ok(RunOutcome {
        end: RunEnd::Stopped(reason),
        state: sweeper.state().clone(),
    })
}

pub fn read_records(path: &Path) -> Result<Vec<PieceRecord>, RunError> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    Ok(parse_stream(&text)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubintervalSummary {
    /// Endpoint where the sweep entered the subinterval.
    pub start: Rational,
    pub interval: RInterval,
    #[serde(rename = "L")]
    pub len: usize,
    pub atoms: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SegmentSummary {
    pub interval: RInterval,
    pub m: AffineForm,
    pub subintervals: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepSummary {
    pub direction: Side,
    pub atoms: usize,
    pub pieces: usize,
    pub subintervals: Vec<SubintervalSummary>,
    pub segments: Vec<SegmentSummary>,
    pub corners: Vec<Rational>,
    /// How often `L` changes by each amount from one subinterval to the
    /// next, in sweep order.
    pub len_changes: BTreeMap<i64, usize>,
}

impl SweepSummary {
    pub fn subinterval_starts(&self) -> Vec<(Rational, usize)> {
        self.subintervals
            .iter()
            .map(|s| (s.start.clone(), s.len))
            .collect()
    }
}

/// Groups a piece stream and reports its subintervals, segments and
/// validated corners.
pub fn summarize(records: &[PieceRecord], direction: Side) -> Result<SweepSummary, AggregateError> {
    let agg = aggregate(records, direction)?;
    let atoms = |s: &crate::certify::Subinterval<PieceRecord>| {
        s.pieces
            .iter()
            .filter(|p| p.kind() == PieceKind::Atom)
            .count()
    };
    let mut len_changes = BTreeMap::new();
    let lens: Vec<i64> = agg.subintervals().map(|s| s.len as i64).collect();
    for w in lens.windows(2) {
        *len_changes.entry(w[1] - w[0]).or_insert(0) += 1;
    }
    Ok(SweepSummary {
        direction,
        atoms: records
            .iter()
            .filter(|r| r.kind() == PieceKind::Atom)
            .count(),
        pieces: records.len(),
        subintervals: agg
            .subintervals()
            .map(|s| SubintervalSummary {
                start: agg.start_of(&s.interval).clone(),
                interval: s.interval.clone(),
                len: s.len,
                atoms: atoms(s),
            })
            .collect(),
        segments: agg
            .segments
            .iter()
            .map(|s| SegmentSummary {
                interval: s.interval.clone(),
                m: s.m_form.clone(),
                subintervals: s.subintervals.len(),
            })
            .collect(),
        corners: agg.corners.clone(),
        len_changes,
    })
}

/// Joins a left and a right sweep from the same seed into one stream in
/// increasing order. The seed is kept by exactly one piece: the left
/// stream's claim wins.
pub fn merge_sides(left: &[PieceRecord], right: &[PieceRecord]) -> Vec<PieceRecord> {
    let mut out: Vec<PieceRecord> = left.iter().rev().cloned().collect();
    let left_has_seed = out.last().is_some_and(|p| p.interval().hi_closed());
    for (k, p) in right.iter().enumerate() {
        if k == 0 && left_has_seed {
            if p.kind() == PieceKind::Singleton {
                continue;
            }
            if p.interval().lo_closed() {
                let opened = p
                    .with_closure(false, p.interval().hi_closed())
                    .expect("an atom is wider than a point");
                out.push(opened);
                continue;
            }
        }
        out.push(p.clone());
    }
    out
}

/// Direction a stream was written in, judged from its first two pieces.
/// A stream of one piece reads as rightward.
pub fn infer_direction(records: &[PieceRecord]) -> Side {
    match records {
        [a, b, ..] if b.interval().lo() < a.interval().lo() => Side::Left,
        _ => Side::Right,
    }
}

#[derive(Debug, Error)]
pub enum SigmaTableError {
    #[error("subinterval {index} does not exist; the stream has {count}")]
    NoSuchSubinterval { index: usize, count: usize },
    #[error("the stream carries no driving lists; rerun the sweep with driving lists enabled")]
    MissingDriving,
    #[error(transparent)]
    Aggregate(#[from] AggregateError),
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// σ transitions between consecutive atoms of the `index`-th subinterval
/// (1-based, in stream order). Row `j` maps the driving list of atom `j`
/// to that of atom `j + 1`.
pub fn sigma_table(
    records: &[PieceRecord],
    index: usize,
) -> Result<Vec<SigmaRow>, SigmaTableError> {
    let agg = aggregate(records, infer_direction(records))?;
    let count = agg.subintervals().count();
    let sub = index
        .checked_sub(1)
        .and_then(|k| agg.subintervals().nth(k))
        .ok_or(SigmaTableError::NoSuchSubinterval { index, count })?;
    let mut atoms = Vec::new();
    for p in sub.pieces.iter().filter(|p| p.kind() == PieceKind::Atom) {
        if p.driving().is_none() {
            return Err(SigmaTableError::MissingDriving);
        }
        match p.clone().into_piece()? {
            crate::certify::Piece::Atom(a) => atoms.push(a),
            crate::certify::Piece::Singleton(_) => unreachable!("filtered to atoms"),
        }
    }
    let refs: Vec<_> = atoms.iter().collect();
    Ok(sigma_sequence(&refs)?
        .into_iter()
        .enumerate()
        .map(|(k, cycles)| SigmaRow { j: k + 1, cycles })
        .collect())
}
