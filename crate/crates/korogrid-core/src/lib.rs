//! Sparse-grid interpolation of functions with bounded second mixed
//! derivatives on the unit cube, and compilation of the resulting
//! interpolants into explicit feed-forward networks that need no training.
//!
//! The crate is organized around six modules:
//!
//! * [`hierarchy`]: hierarchical hat bases, sparse index sets, the
//!   hierarchization transform, interpolant evaluation, and a-priori error
//!   bounds with level selection.
//! * [`interpolet`]: a smoother interpolating refinable mother function on
//!   dyadic grids, with the five-point coefficient stencil it induces.
//! * [`univariate`]: piecewise-affine approximation of one-dimensional
//!   functions together with exact translation of piecewise-affine data into
//!   single-layer rectifier fragments, and step-function analogues.
//! * [`network`]: explicit network descriptions (weights, biases,
//!   activations), evaluation, JSON serialization, activation rescaling, and
//!   pairwise product gadgets with their binary trees.
//! * [`synthesis`]: assembly of complete networks that realize either a
//!   product function or a sparse-grid interpolant, in shallow rectifier,
//!   shallow general-activation, and deep binary-tree form.
//! * [`harness`]: reference targets, deterministic sup-norm measurement,
//!   scaling experiments, count tables, and row serialization for the CLI.

// Negated comparisons are used deliberately in validation so that NaN
// arguments fail the check and are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod hierarchy;
pub mod interpolet;
pub mod network;
pub mod synthesis;
pub mod univariate;

pub use error::{Error, Result};
pub use harness::{ExperimentRow, KorobovTarget, SynthesizerKind};
pub use interpolet::DyadicValueTable;
pub use hierarchy::{ErrorBudget, LevelIndex, SparseGridInterpolant};
pub use network::{ActivationKind, NetSpec};
pub use synthesis::{ActivationFamily, SynthesisReport};
pub use univariate::PiecewiseAffine;
