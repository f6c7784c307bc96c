//! Exact mean-median sequences and certified pieces of their limit map.
//!
//! Everything is computed over arbitrary-precision rationals; no step uses
//! floating point.

#![allow(clippy::result_large_err, clippy::large_enum_variant)]

pub mod affine;
pub mod certify;
pub mod chain;
pub mod fixtures;
pub mod interval;
pub mod journal;
mod kernel;
pub mod perm;
pub mod rational;
pub mod record;
pub mod stream;
pub mod trajectory;
pub mod verify;

pub use affine::{affine_eval, affine_intersection, AffineForm};
pub use certify::{
    certify_atom, certify_containing, Atom, CertifyError, Piece, Side, SingletonPiece,
};
pub use chain::{Chain, ChainError, DrivingList};
pub use interval::{IntervalError, RInterval};
pub use perm::{apply_sigmas, sigma_sequence, CycleForm, PermError, Permutation};
pub use rational::{ParseRationalError, Rational};
pub use trajectory::{median_of, run_trajectory, RunLimit, Trajectory, TrajectoryError};
