//! The two-block composite problem `H = f + g1 + g2`.
//!
//! Finite-dimensional blocks are plain `f64` slices and the duality pairing
//! between a partial gradient and a direction is the Euclidean dot product.
//! The block norms themselves may be arbitrary (see [`Norm`]); only the
//! pairing is fixed.

mod certificate;
mod norms;

pub use certificate::{
    sample_verify_certificate, CertificateError, CertificateReport, CheckFamily,
    ConvexityCertificate, FamilyReport, Regime, VIOLATION_TOLERANCE,
};
pub use norms::{Norm, NormContext};

use crate::ext::Extended;
use crate::linalg::LinalgError;
use rand::RngCore;
use thiserror::Error;

/// Failure of a per-block minimization oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("inner solver did not converge after {iterations} sweeps (KKT residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("block problem is unbounded below along coordinate {coordinate}")]
    Unbounded { coordinate: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("block {block} has length {got}, expected {expected}")]
    DimensionMismatch {
        block: usize,
        expected: usize,
        got: usize,
    },
}

/// A composite objective over two blocks together with exact (or
/// tolerance-controlled) block minimization oracles.
///
/// Implementations must be deterministic: the same input gives the same
/// output bit for bit, including the choice among multiple minimizers.
pub trait TwoBlockProblem {
    fn dim1(&self) -> usize;
    fn dim2(&self) -> usize;

    /// Smooth part `f(x1, x2)`.
    fn f(&self, x1: &[f64], x2: &[f64]) -> f64;
    fn grad1(&self, x1: &[f64], x2: &[f64]) -> Vec<f64>;
    fn grad2(&self, x1: &[f64], x2: &[f64]) -> Vec<f64>;

    /// Non-smooth parts; `Extended::Infinite` outside the domain.
    fn g1(&self, x1: &[f64]) -> Extended;
    fn g2(&self, x2: &[f64]) -> Extended;

    /// A minimizer of `x1 ↦ H(x1, x2)`. Closed-form oracles may ignore `tol`.
    fn argmin_block1(&self, x2: &[f64], tol: f64) -> Result<Vec<f64>, OracleError>;
    /// A minimizer of `x2 ↦ H(x1, x2)`.
    fn argmin_block2(&self, x1: &[f64], tol: f64) -> Result<Vec<f64>, OracleError>;

    /// A point of `dom g1 × dom g2`, used by randomized certificate checks.
    fn sample_point(&self, rng: &mut dyn RngCore) -> (Vec<f64>, Vec<f64>);

    /// Projection of `x` onto the optimal set with respect to `norm`, where
    /// the projection exists in closed form and is unique.
    fn project_onto_optimal_set(
        &self,
        _x1: &[f64],
        _x2: &[f64],
        _norm: &Norm,
    ) -> Option<(Vec<f64>, Vec<f64>)> {
        None
    }
}

pub(crate) fn check_dims<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    x1: &[f64],
    x2: &[f64],
) -> Result<(), ProblemError> {
    if x1.len() != problem.dim1() {
        return Err(ProblemError::DimensionMismatch {
            block: 1,
            expected: problem.dim1(),
            got: x1.len(),
        });
    }
    if x2.len() != problem.dim2() {
        return Err(ProblemError::DimensionMismatch {
            block: 2,
            expected: problem.dim2(),
            got: x2.len(),
        });
    }
    Ok(())
}

/// `H(x1, x2) = f(x1, x2) + g1(x1) + g2(x2)`, infinite iff either
/// non-smooth term is.
pub fn evaluate_objective<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    x1: &[f64],
    x2: &[f64],
) -> Result<Extended, ProblemError> {
    check_dims(problem, x1, x2)?;
    let g = problem.g1(x1) + problem.g2(x2);
    Ok(match g {
        Extended::Infinite => Extended::Infinite,
        Extended::Finite(v) => Extended::Finite(problem.f(x1, x2) + v),
    })
}
