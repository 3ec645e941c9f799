//! Two-block alternating minimization for composite convex problems
//!
//! The objective is `H(x1, x2) = f(x1, x2) + g1(x1) + g2(x2)` with `f` smooth
//! convex and `g1`, `g2` proper convex (possibly `+inf` outside their domain).
//! The crate provides:
//!
//! * [`problem`]: the problem interface, norms and convexity certificates,
//! * [`engine`]: the alternating minimization itself with full traces,
//! * [`bounds`]: closed-form linear and sublinear rate bounds and checkers
//!   that verify observed traces against them,
//! * [`instances`]: block quadratic problem families (smooth, box-constrained,
//!   l1-regularized, singular) along with the dense kernels they need,
//! * [`linalg`]: small dense Cholesky and extremal eigenvalue routines.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod engine;
pub mod ext;
pub mod instances;
pub mod linalg;
pub mod problem;

pub use ext::Extended;
