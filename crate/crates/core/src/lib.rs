//! Finite-scale laboratory for ideal convergence and (I, J)-regular
//! summability matrices.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constructions;
pub mod density;
pub mod error;
pub mod ideal;
pub mod matrix;
pub mod multiplier;
pub mod parse;
pub mod permutation;
pub mod report;
pub mod sequence;
pub mod set;
pub mod suite;
pub mod sum;
pub mod verdict;
pub mod weight;
mod witness;

pub use density::{upper_density, uniform_density_zero_test, CheckpointPlan, DensityEstimate, EstimateMode};
pub use error::{Error, Result};
pub use ideal::{in_ideal, IdealSpec, DEFAULT_ZERO_TOL};
pub use sequence::{propose_ideal_limit, verify_ideal_limit, IdealLimitReport, LazySequence, SeqGen};
pub use set::{Finiteness, SetGen};
pub use verdict::{Verdict, Witness};
pub use weight::Weight;
pub use matrix::RowMatrix;
pub use permutation::Permutation;
