use crate::linalg::{dot, Matrix};

/// A norm on a finite-dimensional block.
#[derive(Debug, Clone, PartialEq)]
pub enum Norm {
    /// The l2 norm.
    Euclidean,
    /// `‖x‖_K = sqrt(xᵀ K x)` for a symmetric positive definite `K`.
    Energy(Matrix),
}

impl Norm {
    pub fn squared(&self, x: &[f64]) -> f64 {
        match self {
            Norm::Euclidean => dot(x, x),
            Norm::Energy(k) => k.quadratic_form(x).max(0.0),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.squared(x).sqrt()
    }
}

/// Block norms, the product-space norm and the constants `β1, β2` with
/// `‖(x1, x2)‖² ≥ βi ‖xi‖i²`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormContext {
    pub block1: Norm,
    pub block2: Norm,
    pub product: Norm,
    pub beta1: f64,
    pub beta2: f64,
}

impl NormContext {
    /// l2 norms everywhere, `β1 = β2 = 1`.
    pub fn euclidean() -> Self {
        NormContext {
            block1: Norm::Euclidean,
            block2: Norm::Euclidean,
            product: Norm::Euclidean,
            beta1: 1.0,
            beta2: 1.0,
        }
    }

    pub fn block1_norm(&self, x1: &[f64]) -> f64 {
        self.block1.eval(x1)
    }

    pub fn block2_norm(&self, x2: &[f64]) -> f64 {
        self.block2.eval(x2)
    }

    pub fn product_norm_squared(&self, x1: &[f64], x2: &[f64]) -> f64 {
        match &self.product {
            Norm::Euclidean => dot(x1, x1) + dot(x2, x2),
            norm => {
                let mut x = x1.to_vec();
                x.extend_from_slice(x2);
                norm.squared(&x)
            }
        }
    }

    pub fn product_norm(&self, x1: &[f64], x2: &[f64]) -> f64 {
        self.product_norm_squared(x1, x2).sqrt()
    }
}
