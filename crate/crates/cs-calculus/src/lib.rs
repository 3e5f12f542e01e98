//! Exact-arithmetic calculus for Cappell-Shaneson matrices.
//!
//! A Cappell-Shaneson (CS) matrix is an `A` in `SL(3,Z)` with `det(A - I) = 1`.
//! This crate provides the matrix-level machinery around them:
//!
//! * exact 3x3 integer/rational linear algebra and Sturm-chain root
//!   isolation ([`mat`], [`poly`]),
//! * CS predicates, sign normalization, standard forms and the `A_m`
//!   family ([`cs`]),
//! * the fishtail twist moves as replayable derivation certificates
//!   ([`moves`]),
//! * bounded enumeration, the survivor filter and triviality
//!   certification ([`reduce`]),
//! * linear-straightenability, GL+ segment checks and the mod-2 winding
//!   number of projected matrix loops ([`straighten`]).
//!
//! All arithmetic is exact: matrices use overflow-checked 128-bit
//! integers, polynomials use arbitrary-precision rationals. Nothing in
//! this crate touches floating point.

pub mod cs;
pub mod mat;
pub mod moves;
pub mod poly;
pub mod reduce;
pub mod straighten;

pub use cs::{CsMatrix, StdForm};
pub use mat::{IntMat3, IntVec3};
pub use moves::{Derivation, Move};
pub use poly::CubicPoly;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("integer overflow in exact matrix arithmetic")]
    Overflow,
    #[error("entry magnitude exceeds CSLAB_MAX_INT cap {0}")]
    IntCapExceeded(i128),
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(i128),
    #[error("no unimodular completion: cross product {0:?} is not primitive")]
    NotCompletable(IntVec3),
    #[error("not a Cappell-Shaneson matrix: {0}")]
    NotCappellShaneson(String),
    #[error("primitive-vector search exhausted at max-norm bound {0}")]
    SearchExhausted(i128),
    #[error("move {0} requires a matrix shape the current matrix lacks")]
    InvalidMoveShape(String),
    #[error("conjugator is not unimodular (det = {0})")]
    NotUnimodularConjugator(i128),
    #[error("target trace {target} unreachable: not congruent to {trace} mod d = {d}")]
    TraceUnreachable { trace: i128, target: i128, d: i128 },
    #[error("operation requires standard form with e = 0 (e = {0})")]
    PreconditionE0(i128),
    #[error("residue {0} violates the precondition")]
    BadResidue(i128),
    #[error("projected loop is degenerate: origin lies on the polygon")]
    DegenerateProjection,
    #[error("loop edge {0} leaves GL+(3,R)")]
    SegmentLeavesGLPlus(usize),
    #[error("loop vertex {0} has non-positive determinant")]
    VertexNotGlPlus(usize),
    #[error("chain endpoints do not match the conjugation pair")]
    LoopNotClosed,
    #[error("matrix is not in standard form (first column must be e3)")]
    NotStandardShape,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
}

pub type Result<T> = std::result::Result<T, Error>;
