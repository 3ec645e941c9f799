//! Closed-form convergence bounds and checkers for observed traces.
//!
//! Linear rates (quasi-strong convexity and quadratic functional growth),
//! the two-stage sublinear bound for the plain convex case, the improved
//! smooth Euclidean bound, literature rates for comparison, and executable
//! versions of the descent inequalities and the auxiliary sequence lemma
//! that the sublinear results rest on.

use crate::engine::IterateTrace;
use crate::ext::Extended;
use crate::problem::{CertificateError, ConvexityCertificate, Regime};
use serde::Serialize;
use thiserror::Error;

/// Absolute slack on objective gaps in every domination check.
pub const DOMINATION_SLACK: f64 = 1e-10;
/// Absolute slack of the descent-lemma checks.
pub const DESCENT_SLACK: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error(transparent)]
    InvalidCertificate(#[from] CertificateError),
    #[error("certificate regime is {got:?}, expected {expected:?}")]
    WrongRegime { expected: Regime, got: Regime },
    #[error("certificate lacks the level-set diameter R")]
    MissingDiameter,
    #[error("trace has no reference optimal value H*")]
    MissingReference,
    #[error("bound has {bound} values but the trace has {trace} iterates")]
    BoundTooShort { bound: usize, trace: usize },
    #[error("not applicable: {0}")]
    NotApplicable(String),
}

fn expect_regime(cert: &ConvexityCertificate, expected: Regime) -> Result<(), BoundError> {
    if cert.regime != expected {
        return Err(BoundError::WrongRegime {
            expected,
            got: cert.regime,
        });
    }
    Ok(())
}

/// Linear rate under quasi-strong convexity:
/// `(1 − σβ1/L1)(1 − σβ2/L2)`, or `1 − σ / min{L1/β1, L2/β2}` when one
/// ratio `L/β` is infinite.
pub fn rate_quasi_strong(cert: &ConvexityCertificate) -> Result<f64, BoundError> {
    expect_regime(cert, Regime::QuasiStrong)?;
    cert.validate()?;
    let sigma = cert.sigma.expect("validated");
    Ok(linear_rate(sigma, cert))
}

/// Linear rate under quadratic functional growth:
/// `(1 − κβ1/(8L1))(1 − κβ2/(8L2))` with the analogous infinite case.
pub fn rate_quadratic_growth(cert: &ConvexityCertificate) -> Result<f64, BoundError> {
    expect_regime(cert, Regime::QuadraticGrowth)?;
    cert.validate()?;
    let kappa = cert.kappa.expect("validated");
    Ok(linear_rate(kappa / 8.0, cert))
}

fn linear_rate(modulus: f64, cert: &ConvexityCertificate) -> f64 {
    let (r1, r2) = (cert.ratio1(), cert.ratio2());
    if r1.is_finite() && r2.is_finite() {
        (1.0 - Extended::divide(modulus, r1)) * (1.0 - Extended::divide(modulus, r2))
    } else {
        1.0 - Extended::divide(modulus, r1.min(r2))
    }
}

/// Shift and offset of the two-stage sublinear bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SublinearParams {
    pub m_star: usize,
    pub p_star: f64,
    /// `4R²(β1/L1 + β2/L2)⁻¹`.
    pub numerator: f64,
}

/// `m* = [−1 + ⌈log2((H⁰ − H*) / (min{L1/β1, L2/β2} R²))⌉]₊` and
/// `p* = 2(β1/L1 + β2/L2)⁻¹ / min{L1/β1, L2/β2}`.
pub fn sublinear_params(
    h0_gap: f64,
    cert: &ConvexityCertificate,
) -> Result<SublinearParams, BoundError> {
    let r = cert.radius.ok_or(BoundError::MissingDiameter)?;
    let min_ratio = cert
        .min_ratio()
        .finite()
        .ok_or(BoundError::InvalidCertificate(
            CertificateError::BothRatiosInfinite,
        ))?;
    let arg = h0_gap / (min_ratio * r * r);
    let m_star = if arg > 0.0 {
        let c = arg.log2().ceil() - 1.0;
        if c > 0.0 {
            c as usize
        } else {
            0
        }
    } else {
        0
    };
    let harmonic_inv = 1.0 / cert.harmonic_sum();
    Ok(SublinearParams {
        m_star,
        p_star: 2.0 * harmonic_inv / min_ratio,
        numerator: 4.0 * r * r * harmonic_inv,
    })
}

pub fn sublinear_bound_from_params(k: usize, h0_gap: f64, params: &SublinearParams) -> f64 {
    let halving = 0.5f64.powi(k.min(i32::MAX as usize) as i32) * h0_gap;
    let shifted = k.saturating_sub(params.m_star) as f64;
    halving.max(params.numerator / (shifted + params.p_star))
}

/// `max{(1/2)^k (H⁰ − H*), 4R²(β1/L1 + β2/L2)⁻¹ / ([k − m*]₊ + p*)}`.
pub fn sublinear_bound_nonsmooth(
    k: usize,
    h0_gap: f64,
    cert: &ConvexityCertificate,
) -> Result<f64, BoundError> {
    expect_regime(cert, Regime::PlainConvex)?;
    cert.validate()?;
    let params = sublinear_params(h0_gap, cert)?;
    Ok(sublinear_bound_from_params(k, h0_gap, &params))
}

/// Improved smooth Euclidean bound
/// `2hR² / (k + 2hR²/(H⁰ − H*))` with `h = (1/L1 + 1/L2)⁻¹`.
pub fn sublinear_bound_smooth(k: usize, h0_gap: f64, l1: Extended, l2: Extended, r: f64) -> f64 {
    if !(h0_gap > 0.0) {
        return 0.0;
    }
    if k == 0 {
        return h0_gap;
    }
    let h = 1.0 / (l1.recip() + l2.recip());
    let c = 2.0 * h * r * r;
    c / (k as f64 + c / h0_gap)
}

/// Earlier smooth bound `2 min{L1, L2} R² / (k − 1)`, valid for `k ≥ 2`.
pub fn prior_smooth_bound(k: usize, l1: Extended, l2: Extended, r: f64) -> Option<f64> {
    if k < 2 {
        return None;
    }
    let l = l1.min(l2).finite()?;
    Some(2.0 * l * r * r / (k as f64 - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiteratureRates {
    /// Feasible descent rate for N-block coordinate descent.
    pub luo_wang: f64,
    /// Rate under quadratic functional growth for N-block descent.
    pub necoara: f64,
    /// Asymptotic rate of the multiplicative Schwarz method.
    pub tai_asymptotic: f64,
}

/// Literature rates in terms of `σ`, the global Lipschitz constant `L` of
/// `∇f` and the number of blocks `N`.
pub fn literature_rates(sigma: f64, l_global: f64, n_blocks: usize) -> LiteratureRates {
    let s2 = sigma * sigma;
    let l = l_global;
    let sqrt_n = (n_blocks as f64).sqrt();
    let luo_wang = 1.0
        - s2 / (s2 + 2.0 * (l * (1.0 + sqrt_n) + 2.0) * (sigma + (l + 1.0) * (l * sqrt_n + 2.0)));
    let necoara = 1.0 - s2 / (s2 + 4.0 * (3.0 + sqrt_n).powi(2) * l * l);
    let tai_asymptotic = 1.0 - s2 / (s2 + 8.0 * l * l);
    LiteratureRates {
        luo_wang,
        necoara,
        tai_asymptotic,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundKind {
    LinearQSC,
    LinearQFG,
    SublinearNonsmooth,
    SublinearSmooth,
    LiteratureLuoWang,
    LiteratureNecoara,
    LiteratureTaiAsymptotic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BoundParameters {
    pub h0_gap: f64,
    pub rate: Option<f64>,
    pub m_star: Option<usize>,
    pub p_star: Option<f64>,
    pub radius: Option<f64>,
}

/// Upper bounds on `H^k − H*` for `k = 0, …, len − 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSequence {
    pub kind: BoundKind,
    pub values: Vec<f64>,
    pub parameters: BoundParameters,
}

impl BoundSequence {
    /// `rate^k (H⁰ − H*)`.
    pub fn linear(kind: BoundKind, rate: f64, h0_gap: f64, len: usize) -> Self {
        let mut values = Vec::with_capacity(len);
        let mut v = h0_gap;
        for _ in 0..len {
            values.push(v);
            v *= rate;
        }
        BoundSequence {
            kind,
            values,
            parameters: BoundParameters {
                h0_gap,
                rate: Some(rate),
                ..Default::default()
            },
        }
    }

    pub fn quasi_strong(
        cert: &ConvexityCertificate,
        h0_gap: f64,
        len: usize,
    ) -> Result<Self, BoundError> {
        Ok(Self::linear(
            BoundKind::LinearQSC,
            rate_quasi_strong(cert)?,
            h0_gap,
            len,
        ))
    }

    pub fn quadratic_growth(
        cert: &ConvexityCertificate,
        h0_gap: f64,
        len: usize,
    ) -> Result<Self, BoundError> {
        Ok(Self::linear(
            BoundKind::LinearQFG,
            rate_quadratic_growth(cert)?,
            h0_gap,
            len,
        ))
    }

    pub fn sublinear_nonsmooth(
        cert: &ConvexityCertificate,
        h0_gap: f64,
        len: usize,
    ) -> Result<Self, BoundError> {
        expect_regime(cert, Regime::PlainConvex)?;
        cert.validate()?;
        let params = sublinear_params(h0_gap, cert)?;
        Ok(BoundSequence {
            kind: BoundKind::SublinearNonsmooth,
            values: (0..len)
                .map(|k| sublinear_bound_from_params(k, h0_gap, &params))
                .collect(),
            parameters: BoundParameters {
                h0_gap,
                rate: None,
                m_star: Some(params.m_star),
                p_star: Some(params.p_star),
                radius: cert.radius,
            },
        })
    }

    pub fn sublinear_smooth(
        cert: &ConvexityCertificate,
        h0_gap: f64,
        len: usize,
    ) -> Result<Self, BoundError> {
        expect_regime(cert, Regime::SmoothEuclidean)?;
        cert.validate()?;
        let r = cert.radius.ok_or(BoundError::MissingDiameter)?;
        Ok(BoundSequence {
            kind: BoundKind::SublinearSmooth,
            values: (0..len)
                .map(|k| sublinear_bound_smooth(k, h0_gap, cert.l1, cert.l2, r))
                .collect(),
            parameters: BoundParameters {
                h0_gap,
                radius: Some(r),
                ..Default::default()
            },
        })
    }

    /// The bound matching the certificate's regime.
    pub fn for_certificate(
        cert: &ConvexityCertificate,
        h0_gap: f64,
        len: usize,
    ) -> Result<Self, BoundError> {
        match cert.regime {
            Regime::QuasiStrong => Self::quasi_strong(cert, h0_gap, len),
            Regime::QuadraticGrowth => Self::quadratic_growth(cert, h0_gap, len),
            Regime::PlainConvex => Self::sublinear_nonsmooth(cert, h0_gap, len),
            Regime::SmoothEuclidean => Self::sublinear_smooth(cert, h0_gap, len),
        }
    }
}

/// Gaps below `100 ε |H*|` are dominated by cancellation and are left out of
/// domination checks and rate estimates.
pub fn truncation_floor(h_star: f64) -> f64 {
    1e2 * f64::EPSILON * h_star.abs()
}

/// Geometric mean of the consecutive ratios `gap_{k+1}/gap_k` over the last
/// quartile of iterations whose gaps lie above `floor`.
pub fn empirical_asymptotic_rate(gaps: &[f64], floor: f64) -> Option<f64> {
    let ratios: Vec<f64> = gaps
        .windows(2)
        .take_while(|w| w[0] > floor && w[1] > floor)
        .map(|w| w[1] / w[0])
        .collect();
    if ratios.is_empty() {
        return None;
    }
    let q = ratios.len().div_ceil(4);
    let tail = &ratios[ratios.len() - q..];
    Some((tail.iter().map(|r| r.ln()).sum::<f64>() / q as f64).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CheckStatus {
    Dominated,
    Violated,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationPoint {
    pub k: usize,
    pub gap: f64,
    pub bound: f64,
    pub status: CheckStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub kind: BoundKind,
    pub dominated: bool,
    pub first_failure: Option<usize>,
    /// `min_k (bound_k − gap_k)` over checked iterates.
    pub worst_margin: f64,
    /// `max_k gap_k / bound_k` over checked iterates.
    pub max_ratio: f64,
    pub empirical_rate: Option<f64>,
    pub truncated: usize,
    pub points: Vec<DominationPoint>,
}

/// Checks `H^k − H* ≤ bound_k + 1e−10` for every recorded iterate.
pub fn verify_trace_bound(
    trace: &IterateTrace,
    bound: &BoundSequence,
) -> Result<DominationReport, BoundError> {
    let h_star = trace.h_star.ok_or(BoundError::MissingReference)?;
    let gaps = trace.gaps_full().expect("h_star present");
    if bound.values.len() < gaps.len() {
        return Err(BoundError::BoundTooShort {
            bound: bound.values.len(),
            trace: gaps.len(),
        });
    }
    let floor = truncation_floor(h_star);
    let mut points = Vec::with_capacity(gaps.len());
    let mut first_failure = None;
    let mut worst_margin = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    let mut truncated = 0;
    for (k, (&gap, &b)) in gaps.iter().zip(&bound.values).enumerate() {
        let status = if gap <= floor {
            truncated += 1;
            CheckStatus::Truncated
        } else {
            worst_margin = worst_margin.min(b - gap);
            let ratio = if b > 0.0 { gap / b } else { f64::INFINITY };
            max_ratio = max_ratio.max(ratio);
            if gap <= b + DOMINATION_SLACK {
                CheckStatus::Dominated
            } else {
                first_failure.get_or_insert(k);
                CheckStatus::Violated
            }
        };
        points.push(DominationPoint {
            k,
            gap,
            bound: b,
            status,
        });
    }
    Ok(DominationReport {
        kind: bound.kind,
        dominated: first_failure.is_none(),
        first_failure,
        worst_margin,
        max_ratio,
        empirical_rate: empirical_asymptotic_rate(&gaps, floor),
        truncated,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DescentCase {
    /// Gap above the threshold; at least half of it is removed.
    Halving,
    /// Gap below the threshold; quadratic decrease.
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentStep {
    pub k: usize,
    /// `(H^k − H^{k+1/2}) − required`.
    pub first_margin: f64,
    pub first_case: DescentCase,
    /// `(H^{k+1/2} − H^{k+1}) − required`.
    pub second_margin: f64,
    pub second_case: DescentCase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescentReport {
    pub steps: Vec<DescentStep>,
    pub worst_margin: f64,
    pub holds: bool,
}

impl DescentReport {
    fn from_steps(steps: Vec<DescentStep>) -> Self {
        let worst_margin = steps
            .iter()
            .map(|s| s.first_margin.min(s.second_margin))
            .fold(f64::INFINITY, f64::min);
        DescentReport {
            holds: steps
                .iter()
                .all(|s| s.first_margin >= -DESCENT_SLACK && s.second_margin >= -DESCENT_SLACK),
            worst_margin,
            steps,
        }
    }
}

/// Half-step triples `(k, H^k, H^{k+1/2}, H^{k+1})`.
fn half_steps(trace: &IterateTrace) -> impl Iterator<Item = (usize, f64, f64, f64)> + '_ {
    trace.entries.windows(2).filter_map(|w| {
        w[0].h_half
            .map(|half| (w[0].k, w[0].h_full, half, w[1].h_full))
    })
}

fn general_descent_requirement(gap: f64, l: Extended, beta: f64, r: f64) -> (f64, DescentCase) {
    let gap = gap.max(0.0);
    let ratio = l.over(beta);
    // threshold 2 L R² / β and coefficient β / (4 L R²), with x/∞ = 0
    let threshold = match ratio {
        Extended::Finite(q) => 2.0 * q * r * r,
        Extended::Infinite => f64::INFINITY,
    };
    if gap > threshold {
        (0.5 * gap, DescentCase::Halving)
    } else {
        (
            ratio.recip() / (4.0 * r * r) * gap * gap,
            DescentCase::Quadratic,
        )
    }
}

/// Casewise descent of each half-step in the plain convex setting.
pub fn descent_check_nonsmooth(
    trace: &IterateTrace,
    cert: &ConvexityCertificate,
) -> Result<DescentReport, BoundError> {
    let h_star = trace.h_star.ok_or(BoundError::MissingReference)?;
    let r = cert.radius.ok_or(BoundError::MissingDiameter)?;
    let steps = half_steps(trace)
        .map(|(k, h, h_half, h_next)| {
            let (req1, case1) = general_descent_requirement(h - h_star, cert.l1, cert.beta1, r);
            let (req2, case2) =
                general_descent_requirement(h_half - h_star, cert.l2, cert.beta2, r);
            DescentStep {
                k,
                first_margin: (h - h_half) - req1,
                first_case: case1,
                second_margin: (h_half - h_next) - req2,
                second_case: case2,
            }
        })
        .collect();
    Ok(DescentReport::from_steps(steps))
}

/// `H^k − H^{k+1/2} ≥ (H^k − H*)²/(2L1R²)` and
/// `H^{k+1/2} − H^{k+1} ≥ (H^{k+1/2} − H*)²/(2L2R²)` for smooth Euclidean
/// problems.
pub fn descent_check_smooth(
    trace: &IterateTrace,
    l1: Extended,
    l2: Extended,
    r: f64,
) -> Result<DescentReport, BoundError> {
    let h_star = trace.h_star.ok_or(BoundError::MissingReference)?;
    let steps = half_steps(trace)
        .map(|(k, h, h_half, h_next)| {
            let g1 = (h - h_star).max(0.0);
            let g2 = (h_half - h_star).max(0.0);
            DescentStep {
                k,
                first_margin: (h - h_half) - l1.recip() * g1 * g1 / (2.0 * r * r),
                first_case: DescentCase::Quadratic,
                second_margin: (h_half - h_next) - l2.recip() * g2 * g2 / (2.0 * r * r),
                second_case: DescentCase::Quadratic,
            }
        })
        .collect();
    Ok(DescentReport::from_steps(steps))
}

/// Constants of the auxiliary sequence lemma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SequenceBoundParams {
    pub gamma1: f64,
    pub gamma2: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SequenceVerdict {
    /// Hypotheses hold and so does `A_k ≤ 1/((k + p)(γ1 + γ2))` everywhere.
    Holds,
    /// A hypothesis fails at the given interleaved position; the lemma says
    /// nothing about such a sequence.
    NotApplicable { position: usize },
    /// Hypotheses hold but the conclusion fails at integer index `k`.
    ConclusionFails { k: usize },
}

impl SequenceVerdict {
    pub fn holds(self) -> bool {
        matches!(self, SequenceVerdict::Holds)
    }
}

const SEQUENCE_REL_SLACK: f64 = 1e-12;

/// Executable form of the sequence lemma. `sequence` is interleaved:
/// `[A_0, A_{1/2}, A_1, A_{3/2}, …]`.
///
/// Hypotheses: `A_k − A_{k+1/2} ≥ γ1 A_k²`, `A_{k+1/2} − A_{k+1} ≥ γ2 A_{k+1/2}²`,
/// `A_0 ≤ 1/(p(γ1 + γ2))`, all terms positive. Comparisons carry a relative
/// slack of `1e−12` to absorb rounding in generated sequences.
pub fn sequence_bound_check(params: &SequenceBoundParams, sequence: &[f64]) -> SequenceVerdict {
    let SequenceBoundParams { gamma1, gamma2, p } = *params;
    let gsum = gamma1 + gamma2;
    for (i, &a) in sequence.iter().enumerate() {
        if !(a > 0.0) {
            return SequenceVerdict::NotApplicable { position: i };
        }
    }
    if !(gsum > 0.0) || !(p >= 0.0) {
        return SequenceVerdict::NotApplicable { position: 0 };
    }
    if let Some(&a0) = sequence.first() {
        if p > 0.0 && a0 > (1.0 + SEQUENCE_REL_SLACK) / (p * gsum) {
            return SequenceVerdict::NotApplicable { position: 0 };
        }
    }
    for (i, w) in sequence.windows(2).enumerate() {
        let gamma = if i % 2 == 0 { gamma1 } else { gamma2 };
        let need = gamma * w[0] * w[0];
        if w[0] - w[1] < need - SEQUENCE_REL_SLACK * w[0] {
            return SequenceVerdict::NotApplicable { position: i + 1 };
        }
    }
    for (k, &a) in sequence.iter().step_by(2).enumerate() {
        let denom = (k as f64 + p) * gsum;
        if denom > 0.0 && a > (1.0 + SEQUENCE_REL_SLACK) / denom {
            return SequenceVerdict::ConclusionFails { k };
        }
    }
    SequenceVerdict::Holds
}

/// Informational lower shift when `H⁰ − H* > 2 max{L1/β1, L2/β2} R²`:
/// `⌈log4((H⁰ − H*)/(2 max R²))⌉ + ⌈log2(max/min)⌉`, with `max`/`min` the
/// extreme block ratios `L/β`.
pub fn remark_lower_mstar(
    h0_gap: f64,
    l1: Extended,
    l2: Extended,
    beta1: f64,
    beta2: f64,
    r: f64,
) -> Result<usize, BoundError> {
    let (q1, q2) = (l1.over(beta1), l2.over(beta2));
    let max = q1
        .max(q2)
        .finite()
        .ok_or_else(|| BoundError::NotApplicable("max{L1/beta1, L2/beta2} is infinite".into()))?;
    let min = q1.min(q2).finite().expect("min <= max finite");
    let threshold = 2.0 * max * r * r;
    if !(h0_gap > threshold) {
        return Err(BoundError::NotApplicable(format!(
            "initial gap {h0_gap:e} does not exceed 2 max ratio R^2 = {threshold:e}"
        )));
    }
    let first = ((h0_gap / threshold).log2() / 2.0).ceil();
    let second = (max / min).log2().ceil();
    Ok((first.max(0.0) + second.max(0.0)) as usize)
}
