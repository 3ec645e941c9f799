use super::quadratic::{
    make_box_instance, make_l1_instance, make_smooth_instance, OptimalSet, QuadraticProblem,
};
use super::{BlockQuadratic, InstanceError};
use crate::linalg::{dot, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A Haar-like random orthogonal matrix: Gram–Schmidt (applied twice) on
/// the rows of a Gaussian matrix.
pub fn random_orthogonal(dim: usize, rng: &mut impl Rng) -> Matrix {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(dim);
    while rows.len() < dim {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            for u in &rows {
                let c = dot(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= c * ui;
                }
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-8 {
            rows.push(v.iter().map(|x| x / nv).collect());
        }
    }
    Matrix::from_rows(&rows, dim).expect("square by construction")
}

/// `d_0 = 1`, `d_last = cond`, the rest log-uniform in between.
fn log_uniform_spectrum(len: usize, cond: f64, rng: &mut impl Rng) -> Vec<f64> {
    let lc = cond.max(1.0).ln();
    (0..len)
        .map(|i| {
            if i == 0 {
                1.0
            } else if i + 1 == len {
                cond.max(1.0)
            } else {
                (rng.random::<f64>() * lc).exp()
            }
        })
        .collect()
}

/// `Qᵀ D Q`, symmetrized.
fn conjugate(q: &Matrix, d: &[f64]) -> Matrix {
    let dim = d.len();
    Matrix::from_fn(dim, dim, |i, j| {
        (0..dim).map(|k| q[(k, i)] * d[k] * q[(k, j)]).sum()
    })
    .symmetrized()
}

fn gaussian(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// Block quadratic with `M = Qᵀ D Q`, spectrum log-uniform on
/// `[1, condition_target]`, and Gaussian right-hand side. Deterministic per
/// seed; `condition_target ≤ 1` gives `M = I` exactly.
pub fn random_spd_instance(
    n: usize,
    m: usize,
    condition_target: f64,
    rng_seed: u64,
) -> BlockQuadratic {
    assert!(n >= 1 && m >= 1, "blocks must be non-empty");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let dim = n + m;
    let full = if condition_target <= 1.0 {
        Matrix::identity(dim)
    } else {
        let q = random_orthogonal(dim, &mut rng);
        let d = log_uniform_spectrum(dim, condition_target, &mut rng);
        conjugate(&q, &d)
    };
    let rhs = gaussian(dim, &mut rng);
    BlockQuadratic::from_full(&full, n, &rhs).expect("valid by construction")
}

/// A rank-deficient block quadratic whose optimal set is known.
#[derive(Debug, Clone)]
pub struct SingularInstance {
    pub quadratic: BlockQuadratic,
    /// A minimizer; `b = M x0`.
    pub x0: Vec<f64>,
    /// Orthonormal basis of `ker M`.
    pub null_basis: Vec<Vec<f64>>,
    /// Smallest nonzero eigenvalue of `M`, exact by construction.
    pub kappa: f64,
    /// `H* = −½ x0ᵀ M x0`.
    pub h_star: f64,
}

impl SingularInstance {
    /// The optimal set `x0 + ker M`.
    pub fn optimal_set(&self) -> OptimalSet {
        OptimalSet::Affine {
            point: self.x0.clone(),
            basis: self.null_basis.clone(),
        }
    }

    /// Smooth problem with the optimal set attached.
    pub fn smooth_problem(&self) -> Result<QuadraticProblem, InstanceError> {
        Ok(make_smooth_instance(self.quadratic.clone())?.with_optimal_set(self.optimal_set()))
    }
}

/// `M = Qᵀ D Q` with `nullity` zero eigenvalues and the rest log-uniform on
/// `[1, cond]`; `b = M x0` for Gaussian `x0`. With `nullity ≤ min(n, m)` the
/// diagonal blocks are almost surely definite.
pub fn random_singular_instance(
    n: usize,
    m: usize,
    nullity: usize,
    cond: f64,
    rng_seed: u64,
) -> SingularInstance {
    assert!(n >= 1 && m >= 1, "blocks must be non-empty");
    assert!(
        nullity >= 1 && nullity <= n.min(m),
        "nullity must lie in 1..=min(n, m)"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let dim = n + m;
    let q = random_orthogonal(dim, &mut rng);
    let mut d = vec![0.0; nullity];
    d.extend(log_uniform_spectrum(dim - nullity, cond, &mut rng));
    let full = conjugate(&q, &d);
    let x0 = gaussian(dim, &mut rng);
    let rhs = full.matvec(&x0);
    let quadratic = BlockQuadratic::from_full(&full, n, &rhs).expect("valid by construction");
    SingularInstance {
        h_star: -0.5 * dot(&x0, &rhs),
        quadratic,
        x0,
        null_basis: (0..nullity).map(|i| q.row(i).to_vec()).collect(),
        kappa: 1.0,
    }
}

/// Singular instance with ℓ1 terms on both blocks.
#[derive(Debug, Clone)]
pub struct L1SingularInstance {
    pub base: SingularInstance,
    pub weight1: f64,
    pub weight2: f64,
    pub problem: QuadraticProblem,
}

impl L1SingularInstance {
    /// `min ½ xᵀ M x − bᵀ x`, a lower bound for the smooth part.
    pub fn smooth_lower_bound(&self) -> f64 {
        self.base.h_star
    }
}

/// Weights drawn uniformly from `[0.05, 0.5]`.
pub fn random_l1_singular_instance(
    n: usize,
    m: usize,
    nullity: usize,
    cond: f64,
    rng_seed: u64,
) -> Result<L1SingularInstance, InstanceError> {
    let base = random_singular_instance(n, m, nullity, cond, rng_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x9e37_79b9_7f4a_7c15);
    let weight1 = rng.random_range(0.05..0.5);
    let weight2 = rng.random_range(0.05..0.5);
    let problem = make_l1_instance(base.quadratic.clone(), weight1, weight2)?;
    Ok(L1SingularInstance {
        base,
        weight1,
        weight2,
        problem,
    })
}

/// Random SPD instance with boxes `[−w, w]` around the origin (so `x = 0` is
/// feasible), half-widths in `[0.05, 0.5]`; about one bound in five is
/// infinite.
pub fn random_box_instance(
    n: usize,
    m: usize,
    cond: f64,
    rng_seed: u64,
) -> Result<QuadraticProblem, InstanceError> {
    let q = random_spd_instance(n, m, cond, rng_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed ^ 0x2545_f491_4f6c_dd1d);
    let mut bounds = |len: usize| {
        let mut lo = Vec::with_capacity(len);
        let mut hi = Vec::with_capacity(len);
        for _ in 0..len {
            let w: f64 = rng.random_range(0.05..0.5);
            lo.push(if rng.random_bool(0.2) {
                f64::NEG_INFINITY
            } else {
                -w
            });
            hi.push(if rng.random_bool(0.2) {
                f64::INFINITY
            } else {
                w
            });
        }
        (lo, hi)
    };
    let b1 = bounds(n);
    let b2 = bounds(m);
    make_box_instance(q, b1, b2)
}

/// Radius of the level set `{H ≤ H⁰}` around the optimal set for a smooth
/// quadratic with growth modulus `kappa`: `½ κ dist² ≤ H − H*` gives
/// `sqrt(2 (H⁰ − H*) / κ)`.
pub fn level_set_radius_smooth(h0_gap: f64, kappa: f64) -> f64 {
    (2.0 * h0_gap.max(0.0) / kappa).sqrt()
}

/// Euclidean radius for ℓ1-regularized problems whose smooth part is bounded
/// below by `q_lower`: on the level set `w_min ‖x‖₁ ≤ H⁰ − q_lower`, and the
/// optimal set lies in it, so `dist(x, X) ≤ 2 (H⁰ − q_lower) / w_min`.
pub fn level_set_radius_l1(h0: f64, q_lower: f64, w_min: f64) -> f64 {
    2.0 * (h0 - q_lower).max(0.0) / w_min
}
