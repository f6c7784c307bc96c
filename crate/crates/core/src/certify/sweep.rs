use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{certify_atom_fast, Atom, CertifyError, Piece, Side, SingletonPiece};
use crate::affine::AffineForm;
use crate::rational::Rational;
use crate::trajectory::RunLimit;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),
    #[error("probe step fell below the floor at frontier {frontier} (last eps {eps})")]
    EpsUnderflow { frontier: Rational, eps: Rational },
    #[error("trajectory of {x} did not terminate within {threshold} steps")]
    NotTerminated { x: Rational, threshold: usize },
    #[error("internal inconsistency at frontier {frontier}: {detail}")]
    Internal { frontier: Rational, detail: String },
}

/// When a sweep stops. Any condition that is met ends it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StopCondition {
    pub max_atoms: Option<u64>,
    /// Stop once the frontier reaches or passes this point.
    pub target: Option<Rational>,
    /// Stop right after the first atom of this many distinct `m` forms.
    pub max_segments: Option<u64>,
}

impl StopCondition {
    pub fn is_unbounded(&self) -> bool {
        self.max_atoms.is_none() && self.target.is_none() && self.max_segments.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxAtoms,
    Target,
    MaxSegments,
    DomainEdge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepConfig {
    pub seed: Rational,
    pub direction: Side,
    pub eps0: Rational,
    pub eps_shrink: u32,
    pub eps_floor: Rational,
    pub limit: RunLimit,
    pub stop: StopCondition,
}

impl SweepConfig {
    pub fn new(seed: Rational, direction: Side) -> Self {
        SweepConfig {
            seed,
            direction,
            eps0: Rational::frac(1, 100_000),
            eps_shrink: 10,
            eps_floor: Rational::pow10_neg(60),
            limit: RunLimit::default(),
            stop: StopCondition::default(),
        }
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: &str| Err(SweepError::InvalidConfig(m.to_string()));
        if !self.seed.is_positive() || self.seed >= 1 {
            return bad("seed must lie in (0, 1)");
        }
        if !self.eps_floor.is_positive() {
            return bad("eps floor must be positive");
        }
        if self.eps0 <= self.eps_floor {
            return bad("eps0 must exceed the eps floor");
        }
        if self.eps_shrink < 2 {
            return bad("eps shrink factor must be at least 2");
        }
        if self.stop.is_unbounded() {
            return bad("no stop condition given");
        }
        Ok(())
    }

    /// Digest of every setting that shapes the piece stream. Stop conditions
    /// are excluded so a finished run can be extended by resuming it.
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "seed={};direction={};eps0={};shrink={};floor={};threshold={}",
            self.seed,
            self.direction,
            self.eps0,
            self.eps_shrink,
            self.eps_floor,
            self.limit.threshold()
        );
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

/// Everything needed to continue a sweep exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepState {
    pub frontier: Rational,
    pub eps: Rational,
    pub atoms: u64,
    pub pieces: u64,
    pub segments: u64,
    pub last_form: Option<AffineForm>,
    /// Closure of the previous atom at the frontier; `None` before the first atom.
    pub frontier_closed: Option<bool>,
}

impl SweepState {
    fn initial(cfg: &SweepConfig) -> Self {
        SweepState {
            frontier: cfg.seed.clone(),
            eps: cfg.eps0.clone(),
            atoms: 0,
            pieces: 0,
            segments: 0,
            last_form: None,
            frontier_closed: None,
        }
    }
}

/// Walks atoms away from the seed one at a time.
///
/// Each [`Sweeper::step`] certifies the next atom, shrinking the probe step
/// on failure, and returns it together with any singleton that must precede
/// it so the emitted pieces tile the covered range without gaps or overlaps.
#[derive(Debug, Clone)]
pub struct Sweeper {
    cfg: SweepConfig,
    state: SweepState,
}

impl Sweeper {
    pub fn new(cfg: SweepConfig) -> Result<Self, SweepError> {
        cfg.validate()?;
        let state = SweepState::initial(&cfg);
        Ok(Sweeper { cfg, state })
    }

    pub fn resume(cfg: SweepConfig, state: SweepState) -> Result<Self, SweepError> {
        cfg.validate()?;
        Ok(Sweeper { cfg, state })
    }

    pub fn config(&self) -> &SweepConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SweepState {
        &self.state
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        let st = &self.state;
        let stop = &self.cfg.stop;
        if stop.max_atoms.is_some_and(|n| st.atoms >= n) {
            return Some(StopReason::MaxAtoms);
        }
        if stop.max_segments.is_some_and(|n| st.segments >= n) {
            return Some(StopReason::MaxSegments);
        }
        if let Some(target) = &stop.target {
            let reached = match self.cfg.direction {
                Side::Right => st.frontier >= *target,
                Side::Left => st.frontier <= *target,
            };
            if reached {
                return Some(StopReason::Target);
            }
        }
        let at_edge = match self.cfg.direction {
            Side::Right => st.frontier >= 1,
            Side::Left => !st.frontier.is_positive(),
        };
        at_edge.then_some(StopReason::DomainEdge)
    }

    fn internal(&self, detail: impl Into<String>) -> SweepError {
        SweepError::Internal {
            frontier: self.state.frontier.clone(),
            detail: detail.into(),
        }
    }

    fn lift(&self, e: CertifyError) -> SweepError {
        match e {
            CertifyError::NotTerminated { x, threshold } => {
                SweepError::NotTerminated { x, threshold }
            }
            other => self.internal(other.to_string()),
        }
    }

    fn next_atom(&mut self) -> Result<Atom, SweepError> {
        let shrink = Rational::from(i64::from(self.cfg.eps_shrink));
        loop {
            match certify_atom_fast(
                &self.state.frontier,
                &self.state.eps,
                self.cfg.limit,
                self.cfg.direction,
            ) {
                Ok(atom) => return Ok(atom),
                // A probe on an atom boundary or a degenerate point yields a
                // contradictory or non-terminating chain; stepping closer
                // moves it off that point.
                Err(CertifyError::EpsTooLarge { .. })
                | Err(CertifyError::DegenerateProbe(_))
                | Err(CertifyError::Chain(crate::chain::ChainError::EmptyInterval)) => {
                    let eps = &self.state.eps / &shrink;
                    if eps < self.cfg.eps_floor {
                        return Err(SweepError::EpsUnderflow {
                            frontier: self.state.frontier.clone(),
                            eps: self.state.eps.clone(),
                        });
                    }
                    self.state.eps = eps;
                }
                Err(e) => return Err(self.lift(e)),
            }
        }
    }

    /// Certifies the next atom. Returns `None` once a stop condition holds.
    pub fn step(&mut self) -> Result<Option<Vec<Piece>>, SweepError> {
        if self.stop_reason().is_some() {
            return Ok(None);
        }
        let mut atom = self.next_atom()?;
        let dir = self.cfg.direction;
        let (near, near_closed, far, far_closed) = match dir {
            Side::Right => (
                atom.interval.lo().clone(),
                atom.interval.lo_closed(),
                atom.interval.hi().clone(),
                atom.interval.hi_closed(),
            ),
            Side::Left => (
                atom.interval.hi().clone(),
                atom.interval.hi_closed(),
                atom.interval.lo().clone(),
                atom.interval.lo_closed(),
            ),
        };

        let mut pieces = Vec::with_capacity(2);
        match self.state.frontier_closed {
            None => {
                if near == self.cfg.seed && !near_closed {
                    pieces.push(Piece::Singleton(self.singleton(&near)?));
                }
            }
            Some(prev_closed) => {
                if near != self.state.frontier {
                    return Err(self.internal(format!(
                        "atom {} does not start at the frontier",
                        atom.interval
                    )));
                }
                if prev_closed && near_closed {
                    // The shared endpoint already belongs to the previous atom.
                    let (lo_c, hi_c) = match dir {
                        Side::Right => (false, atom.interval.hi_closed()),
                        Side::Left => (atom.interval.lo_closed(), false),
                    };
                    atom.interval = atom
                        .interval
                        .with_closure(lo_c, hi_c)
                        .map_err(|e| self.internal(e.to_string()))?;
                } else if !prev_closed && !near_closed {
                    pieces.push(Piece::Singleton(self.singleton(&near)?));
                }
            }
        }

        if self.state.last_form.as_ref() != Some(&atom.m_form) {
            self.state.segments += 1;
            self.state.last_form = Some(atom.m_form.clone());
        }
        pieces.push(Piece::Atom(atom));

        self.state.frontier = far;
        self.state.frontier_closed = Some(far_closed);
        self.state.eps = self.cfg.eps0.clone();
        self.state.atoms += 1;
        self.state.pieces += pieces.len() as u64;
        Ok(Some(pieces))
    }

    fn singleton(&self, point: &Rational) -> Result<SingletonPiece, SweepError> {
        SingletonPiece::at(point, self.cfg.limit).map_err(|e| self.lift(e))
    }

    /// Runs to completion, collecting every piece.
    pub fn run_to_end(mut self) -> Result<(Vec<Piece>, StopReason), SweepError> {
        let mut out = Vec::new();
        while let Some(pieces) = self.step()? {
            out.extend(pieces);
        }
        let reason = self
            .stop_reason()
            .expect("step only returns None when stopped");
        Ok((out, reason))
    }
}
