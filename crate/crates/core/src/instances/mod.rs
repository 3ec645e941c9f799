//! Block quadratic instances `H(x) = ½ xᵀ M x − bᵀ x + g1(x1) + g2(x2)` with
//! `M = [[A, Bᵀ], [B, C]]`, their convexity certificates, and factories
//! turning them into [`TwoBlockProblem`](crate::problem::TwoBlockProblem)s.

mod file;
mod quadratic;
mod random;

pub use file::{parse_problem_file, ProblemFile, RegularizerSpec};
pub use quadratic::{
    make_box_instance, make_l1_instance, make_smooth_instance, OptimalSet, QuadraticProblem,
    Regularizer, INNER_MAX_SWEEPS,
};
pub use random::{
    level_set_radius_l1, level_set_radius_smooth, random_box_instance, random_l1_singular_instance,
    random_orthogonal, random_singular_instance, random_spd_instance, L1SingularInstance,
    SingularInstance,
};

use crate::ext::Extended;
use crate::linalg::{
    dot, max_eigenvalue_upper_bound, min_eigenvalue_lower_bound, Cholesky, LinalgError, Matrix,
};
use crate::problem::{ConvexityCertificate, Norm, NormContext};
use serde::Serialize;
use thiserror::Error;

/// Largest asymmetry accepted for `A` and `C`.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{name} has shape {got}, expected {expected}")]
    Shape {
        name: &'static str,
        expected: String,
        got: String,
    },
    #[error("{name} is not symmetric (max asymmetry {asymmetry:e})")]
    Asymmetric { name: &'static str, asymmetry: f64 },
    #[error("{0} contains a non-finite value")]
    NonFinite(&'static str),
    #[error("invalid regularizer for block {block}: {reason}")]
    Regularizer { block: usize, reason: String },
    #[error("malformed problem file: {0}")]
    Parse(String),
}

/// Data of a block quadratic. `a` is `n × n`, `b` is `m × n`, `c` is `m × m`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockQuadratic {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
}

impl BlockQuadratic {
    /// Checks shapes, finiteness and symmetry of `A` and `C`.
    pub fn new(
        a: Matrix,
        b: Matrix,
        c: Matrix,
        b1: Vec<f64>,
        b2: Vec<f64>,
    ) -> Result<Self, InstanceError> {
        let n = a.rows();
        let m = c.rows();
        let shape = |name, mat: &Matrix, r: usize, c: usize| {
            if mat.rows() != r || mat.cols() != c {
                Err(InstanceError::Shape {
                    name,
                    expected: format!("{r}x{c}"),
                    got: format!("{}x{}", mat.rows(), mat.cols()),
                })
            } else {
                Ok(())
            }
        };
        if n == 0 || m == 0 {
            return Err(InstanceError::Shape {
                name: "A/C",
                expected: "non-empty blocks".into(),
                got: format!("n = {n}, m = {m}"),
            });
        }
        shape("A", &a, n, n)?;
        shape("C", &c, m, m)?;
        shape("B", &b, m, n)?;
        for (name, len, want) in [("b1", b1.len(), n), ("b2", b2.len(), m)] {
            if len != want {
                return Err(InstanceError::Shape {
                    name,
                    expected: want.to_string(),
                    got: len.to_string(),
                });
            }
        }
        for (name, ok) in [
            ("A", a.is_finite()),
            ("B", b.is_finite()),
            ("C", c.is_finite()),
            ("b1", b1.iter().all(|v| v.is_finite())),
            ("b2", b2.iter().all(|v| v.is_finite())),
        ] {
            if !ok {
                return Err(InstanceError::NonFinite(name));
            }
        }
        for (name, mat) in [("A", &a), ("C", &c)] {
            let asym = mat.max_asymmetry();
            if asym > SYMMETRY_TOL {
                return Err(InstanceError::Asymmetric {
                    name,
                    asymmetry: asym,
                });
            }
        }
        Ok(BlockQuadratic { a, b, c, b1, b2 })
    }

    /// Splits a symmetric `(n + m) × (n + m)` matrix after row `n`.
    pub fn from_full(m_full: &Matrix, n: usize, rhs: &[f64]) -> Result<Self, InstanceError> {
        let total = m_full.rows();
        if !m_full.is_square() || n == 0 || n >= total || rhs.len() != total {
            return Err(InstanceError::Shape {
                name: "M",
                expected: format!("square with n = {n} < size and rhs of matching length"),
                got: format!("{}x{}, rhs {}", m_full.rows(), m_full.cols(), rhs.len()),
            });
        }
        let m = total - n;
        BlockQuadratic::new(
            m_full.block(0, 0, n, n),
            m_full.block(n, 0, m, n),
            m_full.block(n, n, m, m),
            rhs[..n].to_vec(),
            rhs[n..].to_vec(),
        )
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.c.rows()
    }

    /// `M = [[A, Bᵀ], [B, C]]`.
    pub fn assemble(&self) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n + self.m(), n + self.m(), |i, j| match (i < n, j < n) {
            (true, true) => self.a[(i, j)],
            (false, true) => self.b[(i - n, j)],
            (true, false) => self.b[(j - n, i)],
            (false, false) => self.c[(i - n, j - n)],
        })
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut r = self.b1.clone();
        r.extend_from_slice(&self.b2);
        r
    }

    /// `½ xᵀ M x − bᵀ x`.
    pub fn smooth_value(&self, x1: &[f64], x2: &[f64]) -> f64 {
        let bx1 = self.b.matvec(x1);
        0.5 * self.a.quadratic_form(x1) + dot(x2, &bx1) + 0.5 * self.c.quadratic_form(x2)
            - dot(&self.b1, x1)
            - dot(&self.b2, x2)
    }

    /// `∇1 f = A x1 + Bᵀ x2 − b1`.
    pub fn grad1(&self, x1: &[f64], x2: &[f64]) -> Vec<f64> {
        let ax = self.a.matvec(x1);
        let btx = self.b.tr_matvec(x2);
        (0..self.n()).map(|i| ax[i] + btx[i] - self.b1[i]).collect()
    }

    /// `∇2 f = B x1 + C x2 − b2`.
    pub fn grad2(&self, x1: &[f64], x2: &[f64]) -> Vec<f64> {
        let bx = self.b.matvec(x1);
        let cx = self.c.matvec(x2);
        (0..self.m()).map(|i| bx[i] + cx[i] - self.b2[i]).collect()
    }

    /// The unique minimizer of the smooth part, by a Cholesky solve with `M`.
    pub fn direct_solution(&self) -> Result<(Vec<f64>, Vec<f64>), InstanceError> {
        let x = Cholesky::factor(&self.assemble())?.solve(&self.rhs());
        let n = self.n();
        Ok((x[..n].to_vec(), x[n..].to_vec()))
    }

    /// `min ½ xᵀ M x − bᵀ x = −½ bᵀ M⁻¹ b` for positive definite `M`.
    pub fn direct_optimal_value(&self) -> Result<f64, InstanceError> {
        let (x1, x2) = self.direct_solution()?;
        Ok(self.smooth_value(&x1, &x2))
    }
}

/// The two-by-two block example with `n = 3`, `m = 2`.
pub fn assemble_paper_example() -> BlockQuadratic {
    let rows = |r: &[&[f64]]| r.iter().map(|v| v.to_vec()).collect::<Vec<_>>();
    let a = Matrix::from_rows(
        &rows(&[&[5.0, -1.0, -2.0], &[-1.0, 6.0, -2.0], &[-2.0, -2.0, 6.0]]),
        3,
    )
    .expect("static shape");
    let b =
        Matrix::from_rows(&rows(&[&[1.0, 0.5, 0.2], &[-1.0, 2.0, 1.0]]), 3).expect("static shape");
    let c = Matrix::from_rows(&rows(&[&[2.0, 0.4], &[0.4, 1.4]]), 2).expect("static shape");
    BlockQuadratic::new(a, b, c, vec![1.0; 3], vec![1.0; 2]).expect("static data is valid")
}

/// `S_A = A − Bᵀ C⁻¹ B` and `S_C = C − B A⁻¹ Bᵀ`, symmetrized.
pub fn schur_complements(q: &BlockQuadratic) -> Result<(Matrix, Matrix), InstanceError> {
    let ca = Cholesky::factor(&q.a)?;
    let cc = Cholesky::factor(&q.c)?;
    let bt = q.b.transpose();
    // C⁻¹ B is m×n, A⁻¹ Bᵀ is n×m
    let s_a = q.a.sub(&bt.matmul(&cc.solve_matrix(&q.b))).symmetrized();
    let s_c = q.c.sub(&q.b.matmul(&ca.solve_matrix(&bt))).symmetrized();
    Ok((s_a, s_c))
}

/// `λmax(K)` rounded up, so that it is a valid Lipschitz constant.
pub fn lipschitz_upper(k: &Matrix) -> Result<f64, InstanceError> {
    Ok(max_eigenvalue_upper_bound(k)?)
}

/// A certificate with the norms it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedNorms {
    pub certificate: ConvexityCertificate,
    pub norms: NormContext,
}

/// Euclidean constants: `σ = λmin(M)`, `L1 = λmax(A)`, `L2 = λmax(C)`,
/// `β1 = β2 = 1`. Eigenvalues are bracketed and rounded toward the safe side.
pub fn certificate_l2(q: &BlockQuadratic) -> Result<CertifiedNorms, InstanceError> {
    let m = q.assemble();
    let sigma = min_eigenvalue_lower_bound(&m)?;
    if !(sigma > 0.0) {
        return Err(LinalgError::NotPositiveDefinite {
            pivot: 0,
            value: sigma,
        }
        .into());
    }
    let l1 = lipschitz_upper(&q.a)?;
    let l2 = lipschitz_upper(&q.c)?;
    Ok(CertifiedNorms {
        certificate: ConvexityCertificate::quasi_strong(
            sigma,
            Extended::Finite(l1),
            Extended::Finite(l2),
            1.0,
            1.0,
        ),
        norms: NormContext::euclidean(),
    })
}

/// Energy-norm constants: `‖x1‖_A`, `‖x2‖_C`, `‖x‖_M`, `σ = L1 = L2 = 1`,
/// `β1 = λmin(A⁻¹ S_A)`, `β2 = λmin(C⁻¹ S_C)`.
pub fn certificate_mnorm(q: &BlockQuadratic) -> Result<CertifiedNorms, InstanceError> {
    let m = q.assemble();
    Cholesky::factor(&m)?;
    let (s_a, s_c) = schur_complements(q)?;
    // λmin(A⁻¹ S_A) = λmin(L⁻¹ S_A L⁻ᵀ) with A = L Lᵀ
    let reduced_a = Cholesky::factor(&q.a)?.congruence(&s_a);
    let reduced_c = Cholesky::factor(&q.c)?.congruence(&s_c);
    let beta1 = min_eigenvalue_lower_bound(&reduced_a)?.clamp(0.0, 1.0);
    let beta2 = min_eigenvalue_lower_bound(&reduced_c)?.clamp(0.0, 1.0);
    let one = Extended::Finite(1.0);
    Ok(CertifiedNorms {
        certificate: ConvexityCertificate::quasi_strong(1.0, one, one, beta1, beta2),
        norms: NormContext {
            block1: Norm::Energy(q.a.clone()),
            block2: Norm::Energy(q.c.clone()),
            product: Norm::Energy(m),
            beta1,
            beta2,
        },
    })
}

/// Safe-side extremal eigenvalues for reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    pub lambda_min_m: f64,
    pub lambda_max_m: f64,
    pub lambda_max_a: f64,
    pub lambda_max_c: f64,
}

pub fn spectral_summary(q: &BlockQuadratic) -> Result<SpectralSummary, InstanceError> {
    let m = q.assemble();
    Ok(SpectralSummary {
        lambda_min_m: min_eigenvalue_lower_bound(&m)?,
        lambda_max_m: max_eigenvalue_upper_bound(&m)?,
        lambda_max_a: max_eigenvalue_upper_bound(&q.a)?,
        lambda_max_c: max_eigenvalue_upper_bound(&q.c)?,
    })
}
