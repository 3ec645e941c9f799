use super::{BlockQuadratic, InstanceError};
use crate::ext::Extended;
use crate::linalg::{dot, norm_inf, Cholesky, Matrix};
use crate::problem::{Norm, OracleError, TwoBlockProblem};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

/// Cap on coordinate sweeps per block solve.
pub const INNER_MAX_SWEEPS: usize = 1_000_000;

/// Sweeps between attempts to polish the iterate by a direct solve on the
/// current active face.
const POLISH_EVERY: usize = 4;

/// Block-separable non-smooth term of one block.
#[derive(Debug, Clone, PartialEq)]
pub enum Regularizer {
    Zero,
    /// Indicator of `{lower ≤ x ≤ upper}`; bounds may be infinite.
    Box {
        lower: Vec<f64>,
        upper: Vec<f64>,
    },
    /// `weight · ‖x‖₁`.
    L1 {
        weight: f64,
    },
}

impl Regularizer {
    fn validate(&self, block: usize, dim: usize) -> Result<(), InstanceError> {
        let err = |reason: String| Err(InstanceError::Regularizer { block, reason });
        match self {
            Regularizer::Zero => Ok(()),
            Regularizer::Box { lower, upper } => {
                if lower.len() != dim || upper.len() != dim {
                    return err(format!(
                        "bounds have lengths {} and {}, expected {dim}",
                        lower.len(),
                        upper.len()
                    ));
                }
                for i in 0..dim {
                    if lower[i].is_nan() || upper[i].is_nan() {
                        return err(format!("NaN bound at coordinate {i}"));
                    }
                    if lower[i] > upper[i]
                        || lower[i] == f64::INFINITY
                        || upper[i] == f64::NEG_INFINITY
                    {
                        return err(format!("empty interval at coordinate {i}"));
                    }
                }
                Ok(())
            }
            Regularizer::L1 { weight } => {
                if !(weight.is_finite() && *weight >= 0.0) {
                    return err(format!("weight {weight} is not a nonnegative real"));
                }
                Ok(())
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> Extended {
        match self {
            Regularizer::Zero => Extended::Finite(0.0),
            Regularizer::Box { lower, upper } => {
                let inside = x
                    .iter()
                    .zip(lower.iter().zip(upper))
                    .all(|(v, (l, u))| *l <= *v && *v <= *u);
                if inside {
                    Extended::Finite(0.0)
                } else {
                    Extended::Infinite
                }
            }
            Regularizer::L1 { weight } => {
                Extended::Finite(weight * x.iter().map(|v| v.abs()).sum::<f64>())
            }
        }
    }

    /// Proximal map with unit step, coordinate `i`.
    fn prox(&self, i: usize, v: f64) -> f64 {
        match self {
            Regularizer::Zero => v,
            Regularizer::Box { lower, upper } => v.clamp(lower[i], upper[i]),
            Regularizer::L1 { weight } => soft_threshold(v, *weight),
        }
    }

    /// Minimizer of `½ a t² − r t + g_i(t)`; `None` if unbounded below.
    fn coordinate_min(&self, i: usize, a: f64, r: f64, current: f64) -> Option<f64> {
        if a > 0.0 {
            return Some(match self {
                Regularizer::Zero => r / a,
                Regularizer::Box { lower, upper } => (r / a).clamp(lower[i], upper[i]),
                Regularizer::L1 { weight } => soft_threshold(r, *weight) / a,
            });
        }
        match self {
            Regularizer::Zero => (r == 0.0).then_some(current),
            Regularizer::Box { lower, upper } => {
                let t = if r > 0.0 {
                    upper[i]
                } else if r < 0.0 {
                    lower[i]
                } else {
                    current
                };
                t.is_finite().then_some(t)
            }
            Regularizer::L1 { weight } => (r.abs() <= *weight).then_some(0.0),
        }
    }

    fn sample(&self, dim: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        (0..dim)
            .map(|i| {
                let z: f64 = StandardNormal.sample(rng);
                match self {
                    Regularizer::Box { lower, upper } => {
                        let (l, u) = (lower[i], upper[i]);
                        match (l.is_finite(), u.is_finite()) {
                            (true, true) => l + (u - l) * (0.5 + 0.5 * (z / 3.0).tanh()),
                            (true, false) => l + 2.0 * z.abs(),
                            (false, true) => u - 2.0 * z.abs(),
                            (false, false) => 2.0 * z,
                        }
                    }
                    _ => 2.0 * z,
                }
            })
            .collect()
    }
}

fn soft_threshold(v: f64, w: f64) -> f64 {
    if v > w {
        v - w
    } else if v < -w {
        v + w
    } else {
        0.0
    }
}

/// Solver for `min ½ xᵀ K x − cᵀ x + g(x)` over one block.
#[derive(Debug, Clone)]
struct BlockSolver {
    k: Matrix,
    chol: Option<Cholesky>,
    reg: Regularizer,
}

impl BlockSolver {
    fn new(k: Matrix, reg: Regularizer, block: usize) -> Result<Self, InstanceError> {
        reg.validate(block, k.rows())?;
        let chol = Cholesky::factor(&k).ok();
        if chol.is_none() && reg == Regularizer::Zero {
            // the smooth block problem has no unique minimizer
            Cholesky::factor(&k)?;
        }
        Ok(BlockSolver { k, chol, reg })
    }

    /// Prox-gradient fixed-point residual `‖x − prox(x − (Kx − c))‖∞` and the
    /// scale it is compared against.
    fn residual(&self, x: &[f64], c: &[f64]) -> (f64, f64) {
        let kx = self.k.matvec(x);
        let mut r = 0.0f64;
        for i in 0..x.len() {
            let g = kx[i] - c[i];
            r = r.max((x[i] - self.reg.prox(i, x[i] - g)).abs());
        }
        let scale = 1f64.max(norm_inf(c)).max(self.k.norm_inf() * norm_inf(x));
        (r, scale)
    }

    fn solve(&self, c: &[f64], tol: f64) -> Result<Vec<f64>, OracleError> {
        let n = c.len();
        if self.reg == Regularizer::Zero {
            return Ok(self
                .chol
                .as_ref()
                .expect("checked at construction")
                .solve(c));
        }
        let mut x = match (&self.chol, &self.reg) {
            (Some(chol), Regularizer::Box { .. }) => {
                let free = chol.solve(c);
                (0..n).map(|i| self.reg.prox(i, free[i])).collect()
            }
            (_, Regularizer::Box { lower, upper }) => {
                (0..n).map(|i| 0f64.clamp(lower[i], upper[i])).collect()
            }
            _ => vec![0.0; n],
        };
        let mut residual = f64::INFINITY;
        for sweep in 0..INNER_MAX_SWEEPS {
            let (r, scale) = self.residual(&x, c);
            residual = r;
            if r <= tol * scale {
                return Ok(x);
            }
            if sweep % POLISH_EVERY == POLISH_EVERY - 1 {
                if let Some(p) = self.polish(&x, c) {
                    let (rp, sp) = self.residual(&p, c);
                    if rp < r {
                        x = p;
                        if rp <= tol * sp {
                            return Ok(x);
                        }
                    }
                }
            }
            for i in 0..n {
                let row = self.k.row(i);
                let a = row[i];
                let off: f64 = dot(row, &x) - a * x[i];
                let r = c[i] - off;
                x[i] = self
                    .reg
                    .coordinate_min(i, a, r, x[i])
                    .ok_or(OracleError::Unbounded { coordinate: i })?;
            }
        }
        Err(OracleError::NoConvergence {
            iterations: INNER_MAX_SWEEPS,
            residual,
        })
    }

    /// Exact minimizer on the face of `x` (active bounds, or zero pattern and
    /// signs for ℓ1), if it stays on that face.
    fn polish(&self, x: &[f64], c: &[f64]) -> Option<Vec<f64>> {
        let n = x.len();
        let free: Vec<usize> = (0..n)
            .filter(|&i| match &self.reg {
                Regularizer::Box { lower, upper } => lower[i] < x[i] && x[i] < upper[i],
                Regularizer::L1 { .. } => x[i] != 0.0,
                Regularizer::Zero => true,
            })
            .collect();
        if free.is_empty() {
            return None;
        }
        let mut rhs: Vec<f64> = free
            .iter()
            .map(|&i| {
                let row = self.k.row(i);
                let fixed: f64 = (0..n)
                    .filter(|j| !free.contains(j))
                    .map(|j| row[j] * x[j])
                    .sum();
                c[i] - fixed
            })
            .collect();
        if let Regularizer::L1 { weight } = self.reg {
            for (r, &i) in rhs.iter_mut().zip(&free) {
                *r -= weight * x[i].signum();
            }
        }
        let sub = Cholesky::factor(&self.k.principal(&free)).ok()?;
        let y = sub.solve(&rhs);
        let mut out = x.to_vec();
        for (&i, &v) in free.iter().zip(&y) {
            let ok = match &self.reg {
                Regularizer::Box { lower, upper } => lower[i] <= v && v <= upper[i],
                Regularizer::L1 { .. } => v == 0.0 || v.signum() == x[i].signum(),
                Regularizer::Zero => true,
            };
            if !ok {
                return None;
            }
            out[i] = v;
        }
        Some(out)
    }
}

/// What is known in closed form about the optimal set.
#[derive(Debug, Clone, PartialEq)]
pub enum OptimalSet {
    Unknown,
    /// A unique minimizer, stored as the concatenation `(x1, x2)`.
    Point(Vec<f64>),
    /// `point + span(basis)` with orthonormal basis vectors of length `n + m`.
    Affine {
        point: Vec<f64>,
        basis: Vec<Vec<f64>>,
    },
}

/// A block quadratic with block-separable regularizers.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    q: BlockQuadratic,
    block1: BlockSolver,
    block2: BlockSolver,
    optimal_set: OptimalSet,
}

impl QuadraticProblem {
    pub fn new(q: BlockQuadratic, g1: Regularizer, g2: Regularizer) -> Result<Self, InstanceError> {
        let block1 = BlockSolver::new(q.a.clone(), g1, 1)?;
        let block2 = BlockSolver::new(q.c.clone(), g2, 2)?;
        let optimal_set = if block1.reg == Regularizer::Zero && block2.reg == Regularizer::Zero {
            q.direct_solution()
                .map(|(mut x1, x2)| {
                    x1.extend(x2);
                    OptimalSet::Point(x1)
                })
                .unwrap_or(OptimalSet::Unknown)
        } else {
            OptimalSet::Unknown
        };
        Ok(QuadraticProblem {
            q,
            block1,
            block2,
            optimal_set,
        })
    }

    pub fn with_optimal_set(mut self, set: OptimalSet) -> Self {
        self.optimal_set = set;
        self
    }

    pub fn quadratic(&self) -> &BlockQuadratic {
        &self.q
    }

    pub fn regularizer1(&self) -> &Regularizer {
        &self.block1.reg
    }

    pub fn regularizer2(&self) -> &Regularizer {
        &self.block2.reg
    }

    pub fn optimal_set(&self) -> &OptimalSet {
        &self.optimal_set
    }

    /// True iff both regularizers vanish.
    pub fn is_smooth(&self) -> bool {
        self.block1.reg == Regularizer::Zero && self.block2.reg == Regularizer::Zero
    }

    fn split(&self, x: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
        let n = self.q.n();
        let x2 = x[n..].to_vec();
        let mut x1 = x;
        x1.truncate(n);
        (x1, x2)
    }
}

impl TwoBlockProblem for QuadraticProblem {
    fn dim1(&self) -> usize {
        self.q.n()
    }

    fn dim2(&self) -> usize {
        self.q.m()
    }

    fn f(&self, x1: &[f64], x2: &[f64]) -> f64 {
        self.q.smooth_value(x1, x2)
    }

    fn grad1(&self, x1: &[f64], x2: &[f64]) -> Vec<f64> {
        self.q.grad1(x1, x2)
    }

    fn grad2(&self, x1: &[f64], x2: &[f64]) -> Vec<f64> {
        self.q.grad2(x1, x2)
    }

    fn g1(&self, x1: &[f64]) -> Extended {
        self.block1.reg.value(x1)
    }

    fn g2(&self, x2: &[f64]) -> Extended {
        self.block2.reg.value(x2)
    }

    fn argmin_block1(&self, x2: &[f64], tol: f64) -> Result<Vec<f64>, OracleError> {
        let btx = self.q.b.tr_matvec(x2);
        let c: Vec<f64> = self.q.b1.iter().zip(&btx).map(|(b, v)| b - v).collect();
        self.block1.solve(&c, tol)
    }

    fn argmin_block2(&self, x1: &[f64], tol: f64) -> Result<Vec<f64>, OracleError> {
        let bx = self.q.b.matvec(x1);
        let c: Vec<f64> = self.q.b2.iter().zip(&bx).map(|(b, v)| b - v).collect();
        self.block2.solve(&c, tol)
    }

    fn sample_point(&self, rng: &mut dyn RngCore) -> (Vec<f64>, Vec<f64>) {
        let x1 = self.block1.reg.sample(self.q.n(), rng);
        let x2 = self.block2.reg.sample(self.q.m(), rng);
        (x1, x2)
    }

    fn project_onto_optimal_set(
        &self,
        x1: &[f64],
        x2: &[f64],
        norm: &Norm,
    ) -> Option<(Vec<f64>, Vec<f64>)> {
        match &self.optimal_set {
            OptimalSet::Unknown => None,
            OptimalSet::Point(p) => Some(self.split(p.clone())),
            OptimalSet::Affine { point, basis } => {
                let mut d = x1.to_vec();
                d.extend_from_slice(x2);
                for (v, p) in d.iter_mut().zip(point) {
                    *v -= p;
                }
                let coeffs = match norm {
                    Norm::Euclidean => basis.iter().map(|v| dot(v, &d)).collect::<Vec<_>>(),
                    Norm::Energy(k) => {
                        // (N K Nᵀ) c = N K d
                        let kd = k.matvec(&d);
                        let kn: Vec<Vec<f64>> = basis.iter().map(|v| k.matvec(v)).collect();
                        let gram = Matrix::from_fn(basis.len(), basis.len(), |i, j| {
                            dot(&basis[i], &kn[j])
                        });
                        let rhs: Vec<f64> = basis.iter().map(|v| dot(v, &kd)).collect();
                        Cholesky::factor(&gram.symmetrized()).ok()?.solve(&rhs)
                    }
                };
                let mut y = point.clone();
                for (c, v) in coeffs.iter().zip(basis) {
                    for (yi, vi) in y.iter_mut().zip(v) {
                        *yi += c * vi;
                    }
                }
                Some(self.split(y))
            }
        }
    }
}

/// `g ≡ 0`; block minimizers by Cholesky solves with `A` and `C`.
pub fn make_smooth_instance(q: BlockQuadratic) -> Result<QuadraticProblem, InstanceError> {
    QuadraticProblem::new(q, Regularizer::Zero, Regularizer::Zero)
}

/// Box indicators on both blocks, given as `(lower, upper)` pairs.
pub fn make_box_instance(
    q: BlockQuadratic,
    box1: (Vec<f64>, Vec<f64>),
    box2: (Vec<f64>, Vec<f64>),
) -> Result<QuadraticProblem, InstanceError> {
    QuadraticProblem::new(
        q,
        Regularizer::Box {
            lower: box1.0,
            upper: box1.1,
        },
        Regularizer::Box {
            lower: box2.0,
            upper: box2.1,
        },
    )
}

/// `g1 = w1 ‖·‖₁`, `g2 = w2 ‖·‖₁`.
pub fn make_l1_instance(
    q: BlockQuadratic,
    weight1: f64,
    weight2: f64,
) -> Result<QuadraticProblem, InstanceError> {
    QuadraticProblem::new(
        q,
        Regularizer::L1 { weight: weight1 },
        Regularizer::L1 { weight: weight2 },
    )
}
