//! Numerical laboratory for the thermodynamic formalism of countable
//! topological Markov chains.
//!
//! The crate computes topological/Gurevich pressure with error brackets,
//! builds cylinder approximations of (local weak) Gibbs measures, solves the
//! generalized Bowen equation for shrinking-target sets, constructs pattern
//! (Cantor) scaffolds with their Frostman measures, and cross-validates the
//! resulting dimensions against closed forms and Monte-Carlo box counting on
//! concrete interval maps (N-ary, Gauss, modified Gauss, Lüroth,
//! Manneville–Pomeau).
//!
//! Depth conventions: a [`symbolic::Word`] of length `n` (symbol count) is the
//! cylinder fixing coordinates `0..n`. Target depth rules and Good-set indices
//! use the cylinder index `j` (coordinates `0..=j`), so the word realizing
//! index `j` has length `j + 1`. Every function states which convention its
//! arguments use.

pub mod dimension;
pub mod error;
pub mod gibbs;
pub mod maps;
pub mod mc;
pub mod pattern;
pub mod potentials;
pub mod pressure;
pub mod symbolic;

pub use error::{Error, Result};
