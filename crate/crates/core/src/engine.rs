//! Alternating minimization with recorded full and half-step iterates.
//!
//! Given `x1⁰`, the initialization takes `x2⁰ ∈ argmin H(x1⁰, ·)`; every
//! general step then updates block 1 with block 2 frozen (producing the
//! half-step `x^{k+1/2} = (x1^{k+1}, x2^k)`) and block 2 with the new block 1.

use crate::ext::Extended;
use crate::linalg::{dot, sub};
use crate::problem::{check_dims, evaluate_objective, OracleError, ProblemError, TwoBlockProblem};
use serde::Serialize;
use thiserror::Error;

/// Default relative tolerance handed to iterative block solvers.
pub const DEFAULT_INNER_TOL: f64 = 1e-12;

/// Slack of the monotonicity check on the interleaved objective sequence.
pub const MONOTONICITY_SLACK: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("invalid initialization: {0}")]
    InvalidInitialization(String),
    #[error(transparent)]
    Dimension(#[from] ProblemError),
    #[error("block {block} oracle failed{}: {source}", iteration.map(|k| format!(" at iteration {k}")).unwrap_or_default())]
    Oracle {
        iteration: Option<usize>,
        block: usize,
        source: OracleError,
    },
    #[error("block {block} oracle returned a point outside the domain{}", iteration.map(|k| format!(" at iteration {k}")).unwrap_or_default())]
    OutsideDomain {
        iteration: Option<usize>,
        block: usize,
    },
}

impl EngineError {
    fn at(self, k: usize) -> Self {
        match self {
            EngineError::Oracle { block, source, .. } => EngineError::Oracle {
                iteration: Some(k),
                block,
                source,
            },
            EngineError::OutsideDomain { block, .. } => EngineError::OutsideDomain {
                iteration: Some(k),
                block,
            },
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Iterate {
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl Iterate {
    pub fn new(x1: Vec<f64>, x2: Vec<f64>) -> Self {
        Iterate { x1, x2 }
    }
}

/// One general iterate `x^k` together with the half-step leaving it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub k: usize,
    pub x_full: Iterate,
    /// `x^{k+1/2}`; absent for the last recorded iterate.
    pub x_half: Option<Iterate>,
    pub h_full: f64,
    pub h_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateTrace {
    pub entries: Vec<TraceEntry>,
    pub h_star: Option<f64>,
    pub inner_tolerance: f64,
}

impl IterateTrace {
    /// Number of general steps recorded (entries minus the initialization).
    pub fn iterations(&self) -> usize {
        self.entries.len().saturating_sub(1)
    }

    pub fn last(&self) -> &TraceEntry {
        self.entries.last().expect("trace always holds x^0")
    }

    /// `H^0, H^{1/2}, H^1, …`.
    pub fn interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for e in &self.entries {
            out.push(e.h_full);
            if let Some(h) = e.h_half {
                out.push(h);
            }
        }
        out
    }

    pub fn full_values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.h_full).collect()
    }

    /// `H^k − H*` for every entry, if `H*` is known.
    pub fn gaps_full(&self) -> Option<Vec<f64>> {
        let h = self.h_star?;
        Some(self.entries.iter().map(|e| e.h_full - h).collect())
    }

    pub fn with_h_star(mut self, h_star: f64) -> Self {
        self.h_star = Some(h_star);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub max_iters: usize,
    /// Stop once `H^k − H^{k+1} ≤ gap_tol`.
    pub gap_tol: Option<f64>,
    pub inner_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            max_iters: 100,
            gap_tol: None,
            inner_tol: DEFAULT_INNER_TOL,
        }
    }
}

impl RunOptions {
    pub fn iterations(max_iters: usize) -> Self {
        RunOptions {
            max_iters,
            ..Default::default()
        }
    }
}

fn finite_objective<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    x1: &[f64],
    x2: &[f64],
    block: usize,
) -> Result<f64, EngineError> {
    match evaluate_objective(problem, x1, x2)? {
        Extended::Finite(v) => Ok(v),
        Extended::Infinite => Err(EngineError::OutsideDomain {
            iteration: None,
            block,
        }),
    }
}

/// `x^0 = (x1⁰, argmin H(x1⁰, ·))`.
pub fn init_half_step<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    x1_initial: &[f64],
    inner_tol: f64,
) -> Result<Iterate, EngineError> {
    if x1_initial.len() != problem.dim1() {
        return Err(ProblemError::DimensionMismatch {
            block: 1,
            expected: problem.dim1(),
            got: x1_initial.len(),
        }
        .into());
    }
    if !problem.g1(x1_initial).is_finite() {
        return Err(EngineError::InvalidInitialization(
            "initial block 1 lies outside dom g1".into(),
        ));
    }
    let x2 = problem
        .argmin_block2(x1_initial, inner_tol)
        .map_err(|source| EngineError::Oracle {
            iteration: None,
            block: 2,
            source,
        })?;
    check_dims(problem, x1_initial, &x2)?;
    if !problem.g2(&x2).is_finite() {
        return Err(EngineError::OutsideDomain {
            iteration: None,
            block: 2,
        });
    }
    Ok(Iterate::new(x1_initial.to_vec(), x2))
}

/// One general step from `x^k`, returning `(x^{k+1/2}, x^{k+1})`.
pub fn am_step<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    x_k: &Iterate,
    inner_tol: f64,
) -> Result<(Iterate, Iterate), EngineError> {
    check_dims(problem, &x_k.x1, &x_k.x2)?;
    let x1_next = problem
        .argmin_block1(&x_k.x2, inner_tol)
        .map_err(|source| EngineError::Oracle {
            iteration: None,
            block: 1,
            source,
        })?;
    if !problem.g1(&x1_next).is_finite() {
        return Err(EngineError::OutsideDomain {
            iteration: None,
            block: 1,
        });
    }
    let x2_next = problem
        .argmin_block2(&x1_next, inner_tol)
        .map_err(|source| EngineError::Oracle {
            iteration: None,
            block: 2,
            source,
        })?;
    if !problem.g2(&x2_next).is_finite() {
        return Err(EngineError::OutsideDomain {
            iteration: None,
            block: 2,
        });
    }
    let half = Iterate::new(x1_next.clone(), x_k.x2.clone());
    let next = Iterate::new(x1_next, x2_next);
    Ok((half, next))
}

/// Runs the initialization and up to `opts.max_iters` general steps.
pub fn run<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    x1_initial: &[f64],
    opts: &RunOptions,
) -> Result<IterateTrace, EngineError> {
    let x0 = init_half_step(problem, x1_initial, opts.inner_tol)?;
    let h0 = finite_objective(problem, &x0.x1, &x0.x2, 2)?;
    let mut entries = vec![TraceEntry {
        k: 0,
        x_full: x0,
        x_half: None,
        h_full: h0,
        h_half: None,
    }];
    for k in 0..opts.max_iters {
        let current = entries.last().expect("non-empty");
        let (half, next) =
            am_step(problem, &current.x_full, opts.inner_tol).map_err(|e| e.at(k))?;
        let h_half = finite_objective(problem, &half.x1, &half.x2, 1).map_err(|e| e.at(k))?;
        let h_next = finite_objective(problem, &next.x1, &next.x2, 2).map_err(|e| e.at(k))?;
        let h_prev = current.h_full;
        let last = entries.last_mut().expect("non-empty");
        last.x_half = Some(half);
        last.h_half = Some(h_half);
        entries.push(TraceEntry {
            k: k + 1,
            x_full: next,
            x_half: None,
            h_full: h_next,
            h_half: None,
        });
        if let Some(tol) = opts.gap_tol {
            if h_prev - h_next <= tol {
                break;
            }
        }
    }
    Ok(IterateTrace {
        entries,
        h_star: None,
        inner_tolerance: opts.inner_tol,
    })
}

/// Gap tolerance of reference runs.
pub const REFERENCE_GAP_TOL: f64 = 1e-14;

/// Estimate of `H*` from a long run, with the last observed decrease as its
/// accuracy indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceValue {
    pub h_star: f64,
    pub iterations: usize,
    pub last_decrease: f64,
}

/// Runs up to `max_iters` steps with gap tolerance [`REFERENCE_GAP_TOL`] and
/// returns the smallest objective value seen.
pub fn reference_value<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    x1_initial: &[f64],
    max_iters: usize,
    inner_tol: f64,
) -> Result<ReferenceValue, EngineError> {
    let trace = run(
        problem,
        x1_initial,
        &RunOptions {
            max_iters,
            gap_tol: Some(REFERENCE_GAP_TOL),
            inner_tol,
        },
    )?;
    let values = trace.interleaved();
    let h_star = values.iter().copied().fold(f64::INFINITY, f64::min);
    let last_decrease = match values.len() {
        0 | 1 => 0.0,
        n => values[n - 3.min(n)] - values[n - 1],
    };
    Ok(ReferenceValue {
        h_star,
        iterations: trace.iterations(),
        last_decrease,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterateResidual {
    pub k: usize,
    /// Largest positive part of the block 1 optimality residual at
    /// `x1^{k+1}` over all probes; `None` for the last entry.
    pub block1: Option<f64>,
    /// Same for block 2 at `x2^k`.
    pub block2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub per_iterate: Vec<IterateResidual>,
    /// Probes discarded because they lie outside the respective domain.
    pub skipped_probes: usize,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.per_iterate
            .iter()
            .map(|r| r.block2.max(r.block1.unwrap_or(0.0)))
            .fold(0.0, f64::max)
    }
}

/// Subgradient optimality residuals of every iterate:
///
/// `g1(x1^{k+1}) − g1(p) + ⟨∇1 f(x1^{k+1}, x2^k), x1^{k+1} − p⟩` for probes `p`
/// of block 1, and `g2(x2^k) − g2(q) + ⟨∇2 f(x1^k, x2^k), x2^k − q⟩` for probes
/// `q` of block 2. Nonpositive values mean the condition holds.
pub fn optimality_residuals<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    trace: &IterateTrace,
    probes1: &[Vec<f64>],
    probes2: &[Vec<f64>],
) -> Result<ResidualReport, ProblemError> {
    let mut skipped = 0usize;
    let probes1: Vec<(&Vec<f64>, f64)> = probes1
        .iter()
        .filter_map(|p| {
            let g = problem.g1(p).finite();
            if g.is_none() {
                skipped += 1;
            }
            g.map(|g| (p, g))
        })
        .collect();
    let probes2: Vec<(&Vec<f64>, f64)> = probes2
        .iter()
        .filter_map(|q| {
            let g = problem.g2(q).finite();
            if g.is_none() {
                skipped += 1;
            }
            g.map(|g| (q, g))
        })
        .collect();

    let mut per_iterate = Vec::with_capacity(trace.entries.len());
    for e in &trace.entries {
        let x = &e.x_full;
        check_dims(problem, &x.x1, &x.x2)?;
        let grad2 = problem.grad2(&x.x1, &x.x2);
        let g2x = problem.g2(&x.x2).to_f64();
        let mut r2 = 0.0f64;
        for (q, gq) in &probes2 {
            if q.len() != x.x2.len() {
                return Err(ProblemError::DimensionMismatch {
                    block: 2,
                    expected: x.x2.len(),
                    got: q.len(),
                });
            }
            r2 = r2.max(g2x - gq + dot(&grad2, &sub(&x.x2, q)));
        }
        let r1 = match &e.x_half {
            None => None,
            Some(h) => {
                let grad1 = problem.grad1(&h.x1, &h.x2);
                let g1x = problem.g1(&h.x1).to_f64();
                let mut r1 = 0.0f64;
                for (p, gp) in &probes1 {
                    if p.len() != h.x1.len() {
                        return Err(ProblemError::DimensionMismatch {
                            block: 1,
                            expected: h.x1.len(),
                            got: p.len(),
                        });
                    }
                    r1 = r1.max(g1x - gp + dot(&grad1, &sub(&h.x1, p)));
                }
                Some(r1)
            }
        };
        per_iterate.push(IterateResidual {
            k: e.k,
            block1: r1,
            block2: r2,
        });
    }
    Ok(ResidualReport {
        per_iterate,
        skipped_probes: skipped,
    })
}

/// Probe sets made of every iterate block and its `±delta` coordinate
/// perturbations.
pub fn coordinate_probes(trace: &IterateTrace, delta: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    fn around(points: impl Iterator<Item = Vec<f64>>, delta: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for p in points {
            for i in 0..p.len() {
                for s in [-delta, delta] {
                    let mut q = p.clone();
                    q[i] += s;
                    out.push(q);
                }
            }
            out.push(p);
        }
        out
    }
    let b1 = trace.entries.iter().flat_map(|e| {
        std::iter::once(e.x_full.x1.clone()).chain(e.x_half.iter().map(|h| h.x1.clone()))
    });
    let b2 = trace.entries.iter().map(|e| e.x_full.x2.clone());
    (around(b1, delta), around(b2, delta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Monotonicity {
    pub holds: bool,
    /// Position in the interleaved sequence `H^0, H^{1/2}, H^1, …` of the
    /// first value exceeding its predecessor by more than the slack.
    pub first_violation: Option<usize>,
}

pub fn check_monotonicity(trace: &IterateTrace) -> Monotonicity {
    let seq = trace.interleaved();
    for (i, w) in seq.windows(2).enumerate() {
        if w[1] > w[0] + MONOTONICITY_SLACK {
            return Monotonicity {
                holds: false,
                first_violation: Some(i + 1),
            };
        }
    }
    Monotonicity {
        holds: true,
        first_violation: None,
    }
}
