//! Win-ratio analysis and trial-design workbench.
//!
//! The crate is organised around the life cycle of a win-ratio trial:
//!
//! - [`outcome`], [`compare`], [`tally`] and [`inference`]: hierarchical pairwise
//!   comparisons over mixed-type composite endpoints, win/loss/tie tallies and
//!   the estimators and tests built on them.
//! - [`stats`]: comparator tests (t, Fisher exact, chi-square, log-rank) and the
//!   distribution kernels everything else relies on.
//! - [`datagen`]: calibrated generators for binary, normal, Weibull and
//!   mixture data-generating mechanisms.
//! - [`design`]: closed-form power, sample-size and precision calculators.
//! - [`ranksim`]: rank-based power simulation.
//! - [`sim`]: Monte Carlo power studies over full-factorial scenario grids.
//!
//! Data-parallel loops go through [`par`]; with the default `parallel` feature
//! they run on rayon, otherwise sequentially. Numerical output never depends on
//! which one is used.

pub mod compare;
pub mod csv_io;
pub mod datagen;
pub mod design;
pub mod error;
pub mod format;
pub mod inference;
pub mod outcome;
pub mod par;
pub mod ranksim;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod tally;

pub use compare::{compare_at_level, compare_pair, ComparisonResult, Verdict};
pub use error::{Error, Result};
pub use inference::{InferenceMethod, InferenceResult};
pub use outcome::{Arm, Dataset, Direction, Hierarchy, OutcomeKind, OutcomeSpec, PatientRecord, Value};
pub use tally::{tally_matched, tally_unmatched, Pairing, WinStats};
