//! Numerical toolkit for interpolation in Paley-Wiener spaces, weighted
//! (McPhail) interpolation in half-planes, and moment-problem control of
//! diagonal semigroup systems.

// `!(x > 0.0)` is used on purpose throughout: it rejects NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod biortho;
pub mod control;
pub mod dd;
pub mod error;
pub mod interp;
pub mod io;
pub mod mcphail;
pub mod multiplier;
pub mod pwcore;
pub mod quad;
pub mod seqlab;

pub use error::{Error, Result};
