//! Convexity/smoothness certificates and their randomized verification.

use super::norms::NormContext;
use super::TwoBlockProblem;
use crate::ext::Extended;
use crate::linalg::{dot, sub};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

/// Largest accepted (normalized) violation of a sampled inequality.
pub const VIOLATION_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `f` quasi-strongly convex with modulus `σ`.
    QuasiStrong,
    /// `H` has quadratic functional growth with modulus `κ`.
    QuadraticGrowth,
    /// Plain convexity with a bounded initial level set of diameter `R`.
    PlainConvex,
    /// `g1 = g2 = 0`, l2 norms, bounded initial level set.
    SmoothEuclidean,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("regime {0:?} requires its modulus")]
    MissingModulus(Regime),
    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(f64),
    #[error("at least one block Lipschitz constant must be finite")]
    BothLipschitzInfinite,
    #[error("Lipschitz constant of block {block} must be positive, got {value}")]
    NonPositiveLipschitz { block: usize, value: f64 },
    #[error("beta{block} must be nonnegative, got {value}")]
    NegativeBeta { block: usize, value: f64 },
    #[error("factor for block {block} is {value}, outside the admissible interval")]
    FactorOutOfRange { block: usize, value: f64 },
    #[error("both block ratios L/beta are infinite")]
    BothRatiosInfinite,
    #[error("regime {0:?} requires the level-set diameter R")]
    MissingRadius(Regime),
    #[error("level-set diameter must be positive, got {0}")]
    NonPositiveRadius(f64),
}

/// Constants that place a problem into one of the convergence regimes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityCertificate {
    pub regime: Regime,
    pub sigma: Option<f64>,
    pub kappa: Option<f64>,
    pub l1: Extended,
    pub l2: Extended,
    pub beta1: f64,
    pub beta2: f64,
    pub radius: Option<f64>,
}

impl ConvexityCertificate {
    pub fn quasi_strong(sigma: f64, l1: Extended, l2: Extended, beta1: f64, beta2: f64) -> Self {
        ConvexityCertificate {
            regime: Regime::QuasiStrong,
            sigma: Some(sigma),
            kappa: None,
            l1,
            l2,
            beta1,
            beta2,
            radius: None,
        }
    }

    pub fn quadratic_growth(
        kappa: f64,
        l1: Extended,
        l2: Extended,
        beta1: f64,
        beta2: f64,
    ) -> Self {
        ConvexityCertificate {
            regime: Regime::QuadraticGrowth,
            sigma: None,
            kappa: Some(kappa),
            l1,
            l2,
            beta1,
            beta2,
            radius: None,
        }
    }

    pub fn plain_convex(l1: Extended, l2: Extended, beta1: f64, beta2: f64, radius: f64) -> Self {
        ConvexityCertificate {
            regime: Regime::PlainConvex,
            sigma: None,
            kappa: None,
            l1,
            l2,
            beta1,
            beta2,
            radius: Some(radius),
        }
    }

    pub fn smooth_euclidean(l1: Extended, l2: Extended, radius: f64) -> Self {
        ConvexityCertificate {
            regime: Regime::SmoothEuclidean,
            sigma: None,
            kappa: None,
            l1,
            l2,
            beta1: 1.0,
            beta2: 1.0,
            radius: Some(radius),
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = Some(radius);
        self
    }

    /// Same constants reinterpreted under another regime.
    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    /// `L1 / β1`.
    pub fn ratio1(&self) -> Extended {
        self.l1.over(self.beta1)
    }

    /// `L2 / β2`.
    pub fn ratio2(&self) -> Extended {
        self.l2.over(self.beta2)
    }

    pub fn min_ratio(&self) -> Extended {
        self.ratio1().min(self.ratio2())
    }

    pub fn max_ratio(&self) -> Extended {
        self.ratio1().max(self.ratio2())
    }

    /// `β1/L1 + β2/L2` with `x/∞ = 0`.
    pub fn harmonic_sum(&self) -> f64 {
        self.ratio1().recip() + self.ratio2().recip()
    }

    /// Checks the structural invariants of the certificate.
    pub fn validate(&self) -> Result<(), CertificateError> {
        if !self.l1.is_finite() && !self.l2.is_finite() {
            return Err(CertificateError::BothLipschitzInfinite);
        }
        for (block, l) in [(1, self.l1), (2, self.l2)] {
            if let Extended::Finite(v) = l {
                if !(v > 0.0) {
                    return Err(CertificateError::NonPositiveLipschitz { block, value: v });
                }
            }
        }
        for (block, b) in [(1, self.beta1), (2, self.beta2)] {
            if !(b >= 0.0) {
                return Err(CertificateError::NegativeBeta { block, value: b });
            }
        }
        match self.regime {
            Regime::QuasiStrong => {
                let sigma = self
                    .sigma
                    .ok_or(CertificateError::MissingModulus(self.regime))?;
                if !(sigma > 0.0) {
                    return Err(CertificateError::NonPositiveModulus(sigma));
                }
                for (block, ratio) in [(1, self.ratio1()), (2, self.ratio2())] {
                    let factor = Extended::divide(sigma, ratio);
                    if factor > 1.0 {
                        return Err(CertificateError::FactorOutOfRange {
                            block,
                            value: factor,
                        });
                    }
                }
            }
            Regime::QuadraticGrowth => {
                let kappa = self
                    .kappa
                    .ok_or(CertificateError::MissingModulus(self.regime))?;
                if !(kappa > 0.0) {
                    return Err(CertificateError::NonPositiveModulus(kappa));
                }
                for (block, ratio) in [(1, self.ratio1()), (2, self.ratio2())] {
                    let factor = Extended::divide(kappa, ratio) / 8.0;
                    if factor >= 1.0 {
                        return Err(CertificateError::FactorOutOfRange {
                            block,
                            value: factor,
                        });
                    }
                }
            }
            Regime::PlainConvex | Regime::SmoothEuclidean => {
                let r = self
                    .radius
                    .ok_or(CertificateError::MissingRadius(self.regime))?;
                if !(r > 0.0) {
                    return Err(CertificateError::NonPositiveRadius(r));
                }
            }
        }
        if !self.min_ratio().is_finite() {
            return Err(CertificateError::BothRatiosInfinite);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckFamily {
    /// `‖(x1, x2)‖² ≥ β1 ‖x1‖1²`.
    BetaBlock1,
    /// `‖(x1, x2)‖² ≥ β2 ‖x2‖2²`.
    BetaBlock2,
    /// Block descent lemma with `L1`.
    DescentBlock1,
    /// Block descent lemma with `L2`.
    DescentBlock2,
    /// Quasi-strong convexity toward the projection onto the optimal set.
    QuasiStrongConvexity,
    /// Quadratic functional growth toward the projection onto the optimal set.
    QuadraticGrowth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    pub family: CheckFamily,
    pub samples: usize,
    /// Largest normalized violation `max(0, lhs − rhs) / max(1, |scale|)`.
    pub worst_violation: f64,
    pub passed: bool,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub families: Vec<FamilyReport>,
}

impl CertificateReport {
    /// True iff every non-skipped family passed.
    pub fn passed(&self) -> bool {
        self.families
            .iter()
            .all(|f| f.skipped.is_some() || f.passed)
    }

    pub fn family(&self, family: CheckFamily) -> Option<&FamilyReport> {
        self.families.iter().find(|f| f.family == family)
    }
}

struct Tally {
    family: CheckFamily,
    samples: usize,
    worst: f64,
    skipped: Option<String>,
}

impl Tally {
    fn new(family: CheckFamily) -> Self {
        Tally {
            family,
            samples: 0,
            worst: 0.0,
            skipped: None,
        }
    }

    fn record(&mut self, lhs: f64, rhs: f64, scale: f64) {
        self.samples += 1;
        let v = (lhs - rhs).max(0.0) / scale.abs().max(1.0);
        if v > self.worst || v.is_nan() {
            self.worst = v;
        }
    }

    fn finish(self) -> FamilyReport {
        FamilyReport {
            family: self.family,
            samples: self.samples,
            worst_violation: self.worst,
            passed: self.skipped.is_none() && self.worst <= VIOLATION_TOLERANCE,
            skipped: self.skipped,
        }
    }
}

/// Samples `sample_count` domain points (and as many secondary points) and
/// checks the defining inequalities of the certificate.
///
/// Violations are normalized by the magnitude of the larger side so that the
/// fixed tolerance [`VIOLATION_TOLERANCE`] is meaningful across scales.
pub fn sample_verify_certificate<P: TwoBlockProblem + ?Sized>(
    problem: &P,
    norms: &NormContext,
    cert: &ConvexityCertificate,
    sample_count: usize,
    rng_seed: u64,
) -> CertificateReport {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut beta1 = Tally::new(CheckFamily::BetaBlock1);
    let mut beta2 = Tally::new(CheckFamily::BetaBlock2);
    let mut desc1 = Tally::new(CheckFamily::DescentBlock1);
    let mut desc2 = Tally::new(CheckFamily::DescentBlock2);
    let mut growth = match cert.regime {
        Regime::QuasiStrong => Some(Tally::new(CheckFamily::QuasiStrongConvexity)),
        Regime::QuadraticGrowth => Some(Tally::new(CheckFamily::QuadraticGrowth)),
        _ => None,
    };
    let l1 = cert.l1.finite();
    let l2 = cert.l2.finite();
    if l1.is_none() {
        desc1.skipped = Some("L1 is infinite".into());
    }
    if l2.is_none() {
        desc2.skipped = Some("L2 is infinite".into());
    }

    for _ in 0..sample_count.max(1) {
        let (x1, x2) = problem.sample_point(&mut rng);
        let (y1, y2) = problem.sample_point(&mut rng);

        let prod = norms.product_norm_squared(&x1, &x2);
        let b1 = cert.beta1 * norms.block1.squared(&x1);
        let b2 = cert.beta2 * norms.block2.squared(&x2);
        beta1.record(b1, prod, prod.max(b1));
        beta2.record(b2, prod, prod.max(b2));

        let fx = problem.f(&x1, &x2);
        if let Some(l1) = l1 {
            let h1 = sub(&y1, &x1);
            let lhs = problem.f(&y1, &x2);
            let rhs =
                fx + dot(&problem.grad1(&x1, &x2), &h1) + 0.5 * l1 * norms.block1.squared(&h1);
            desc1.record(lhs, rhs, lhs.abs().max(rhs.abs()));
        }
        if let Some(l2) = l2 {
            let h2 = sub(&y2, &x2);
            let lhs = problem.f(&x1, &y2);
            let rhs =
                fx + dot(&problem.grad2(&x1, &x2), &h2) + 0.5 * l2 * norms.block2.squared(&h2);
            desc2.record(lhs, rhs, lhs.abs().max(rhs.abs()));
        }

        if let Some(tally) = growth.as_mut() {
            if tally.skipped.is_some() {
                continue;
            }
            let Some((p1, p2)) = problem.project_onto_optimal_set(&x1, &x2, &norms.product) else {
                tally.skipped = Some("instance provides no projection onto the optimal set".into());
                continue;
            };
            let d1 = sub(&x1, &p1);
            let d2 = sub(&x2, &p2);
            let dist2 = norms.product_norm_squared(&d1, &d2);
            match cert.regime {
                Regime::QuasiStrong => {
                    let sigma = cert.sigma.unwrap_or(0.0);
                    // f(x̄) ≥ f(x) + ⟨∇f(x), x̄ − x⟩ + σ/2 ‖x − x̄‖²
                    let fp = problem.f(&p1, &p2);
                    let lin =
                        -dot(&problem.grad1(&x1, &x2), &d1) - dot(&problem.grad2(&x1, &x2), &d2);
                    let rhs = fx + lin + 0.5 * sigma * dist2;
                    tally.record(rhs, fp, fp.abs().max(rhs.abs()));
                }
                Regime::QuadraticGrowth => {
                    let kappa = cert.kappa.unwrap_or(0.0);
                    // H(x) − H(x̄) ≥ κ/2 ‖x − x̄‖²
                    let hx = fx + (problem.g1(&x1) + problem.g2(&x2)).to_f64();
                    let hp = problem.f(&p1, &p2) + (problem.g1(&p1) + problem.g2(&p2)).to_f64();
                    let lhs = 0.5 * kappa * dist2;
                    tally.record(lhs, hx - hp, hx.abs().max(hp.abs()));
                }
                _ => unreachable!(),
            }
        }
    }

    let mut families = vec![
        beta1.finish(),
        beta2.finish(),
        desc1.finish(),
        desc2.finish(),
    ];
    if let Some(t) = growth {
        families.push(t.finish());
    }
    CertificateReport { families }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(x: f64) -> Extended {
        Extended::Finite(x)
    }

    #[test]
    fn validate_rejects_both_infinite() {
        let c = ConvexityCertificate::quasi_strong(
            1.0,
            Extended::Infinite,
            Extended::Infinite,
            1.0,
            1.0,
        );
        assert_eq!(c.validate(), Err(CertificateError::BothLipschitzInfinite));
    }

    #[test]
    fn validate_quasi_strong_factor_range() {
        let ok = ConvexityCertificate::quasi_strong(1.0, fin(2.0), Extended::Infinite, 1.0, 1.0);
        assert!(ok.validate().is_ok());
        let bad = ConvexityCertificate::quasi_strong(2.0, fin(1.0), fin(4.0), 1.0, 1.0);
        assert!(matches!(
            bad.validate(),
            Err(CertificateError::FactorOutOfRange { block: 1, .. })
        ));
    }

    #[test]
    fn validate_requires_radius_for_sublinear() {
        let mut c = ConvexityCertificate::plain_convex(fin(1.0), fin(1.0), 1.0, 1.0, 1.0);
        assert!(c.validate().is_ok());
        c.radius = None;
        assert_eq!(
            c.validate(),
            Err(CertificateError::MissingRadius(Regime::PlainConvex))
        );
    }

    #[test]
    fn ratios_use_infinity_conventions() {
        let c = ConvexityCertificate::plain_convex(fin(2.0), Extended::Infinite, 0.5, 1.0, 1.0);
        assert_eq!(c.ratio1(), fin(4.0));
        assert_eq!(c.ratio2(), Extended::Infinite);
        assert_eq!(c.min_ratio(), fin(4.0));
        assert_eq!(c.harmonic_sum(), 0.25);
        // beta = 0 turns a finite L into an infinite ratio
        let c = ConvexityCertificate::plain_convex(fin(2.0), fin(3.0), 0.0, 1.0, 1.0);
        assert_eq!(c.ratio1(), Extended::Infinite);
    }
}
