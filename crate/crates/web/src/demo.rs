//! Computations behind the browser demo, kept free of JS types so they can
//! be tested natively.

use altmin::bounds::{
    empirical_asymptotic_rate, prior_smooth_bound, rate_quasi_strong, sublinear_bound_nonsmooth,
    sublinear_bound_smooth, sublinear_params, truncation_floor, BoundSequence,
};
use altmin::engine::{run, RunOptions};
use altmin::instances::{
    assemble_paper_example, certificate_l2, certificate_mnorm, make_smooth_instance, BlockQuadratic,
};
use altmin::problem::ConvexityCertificate;
use altmin::Extended;

pub const MAX_ITERS: usize = 500;
pub const MAX_SAMPLES: usize = 400;
pub const MAX_K: usize = 100_000;
/// Fraction of the definiteness limit covered by the landscape.
pub const LANDSCAPE_SPAN: f64 = 0.98;
const LANDSCAPE_ITERS: usize = 60;

/// The 3+2 example with the coupling block scaled by `t`.
pub fn scaled_example(t: f64) -> Result<BlockQuadratic, String> {
    let q = assemble_paper_example();
    BlockQuadratic::new(
        q.a.clone(),
        q.b.scaled(t),
        q.c.clone(),
        q.b1.clone(),
        q.b2.clone(),
    )
    .map_err(|e| e.to_string())
}

/// Largest `t` keeping `M(t)` positive definite. `β(t) = 1 − t² (1 − β(1))`,
/// so definiteness is lost at `t = (1 − β(1))^{−1/2}`.
pub fn max_coupling() -> f64 {
    let beta = certificate_mnorm(&assemble_paper_example())
        .expect("the example is definite")
        .certificate
        .beta1;
    (1.0 - beta).sqrt().recip()
}

fn coupling_in_range(t: f64) -> Result<(), String> {
    let limit = max_coupling();
    if !(t.is_finite() && t.abs() < limit) {
        return Err(format!("coupling must satisfy |t| < {limit:.4}, got {t}"));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceData {
    /// `H^k − H*` for `k = 0..=iters`.
    pub gaps: Vec<f64>,
    pub bound_mnorm: Vec<f64>,
    pub bound_l2: Vec<f64>,
    pub rate_mnorm: f64,
    pub rate_l2: f64,
    pub empirical_rate: Option<f64>,
}

/// AM from `x1 = 0` on the scaled example, with both linear bounds.
pub fn convergence(t: f64, iters: usize) -> Result<ConvergenceData, String> {
    coupling_in_range(t)?;
    let iters = iters.min(MAX_ITERS);
    let q = scaled_example(t)?;
    let h_star = q.direct_optimal_value().map_err(|e| e.to_string())?;
    let problem = make_smooth_instance(q.clone()).map_err(|e| e.to_string())?;
    let trace = run(&problem, &[0.0; 3], &RunOptions::iterations(iters))
        .map_err(|e| e.to_string())?
        .with_h_star(h_star);
    let gaps = trace.gaps_full().expect("H* attached");
    let mn = certificate_mnorm(&q)
        .map_err(|e| e.to_string())?
        .certificate;
    let l2 = certificate_l2(&q).map_err(|e| e.to_string())?.certificate;
    let bound = |c: &ConvexityCertificate| {
        BoundSequence::quasi_strong(c, gaps[0], gaps.len()).map_err(|e| e.to_string())
    };
    Ok(ConvergenceData {
        bound_mnorm: bound(&mn)?.values,
        bound_l2: bound(&l2)?.values,
        rate_mnorm: rate_quasi_strong(&mn).map_err(|e| e.to_string())?,
        rate_l2: rate_quasi_strong(&l2).map_err(|e| e.to_string())?,
        empirical_rate: empirical_asymptotic_rate(&gaps, truncation_floor(h_star)),
        gaps,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub couplings: Vec<f64>,
    pub rate_mnorm: Vec<f64>,
    pub rate_l2: Vec<f64>,
    /// `NaN` where the gaps vanish before a rate can be measured.
    pub empirical: Vec<f64>,
}

/// Rates on `samples` evenly spaced couplings in `[0, 0.98 t_max]`.
pub fn rate_landscape(samples: usize) -> Result<Landscape, String> {
    let samples = samples.clamp(2, MAX_SAMPLES);
    let top = LANDSCAPE_SPAN * max_coupling();
    let mut out = Landscape {
        couplings: Vec::with_capacity(samples),
        rate_mnorm: Vec::with_capacity(samples),
        rate_l2: Vec::with_capacity(samples),
        empirical: Vec::with_capacity(samples),
    };
    for i in 0..samples {
        let t = top * i as f64 / (samples - 1) as f64;
        let c = convergence(t, LANDSCAPE_ITERS)?;
        out.couplings.push(t);
        out.rate_mnorm.push(c.rate_mnorm);
        out.rate_l2.push(c.rate_l2);
        out.empirical.push(c.empirical_rate.unwrap_or(f64::NAN));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublinearCurves {
    /// Smooth Euclidean bound, `k = 0..=k_max`.
    pub improved: Vec<f64>,
    /// `2 min{L1, L2} R² / (k − 1)`; `NaN` for `k < 2`.
    pub prior: Vec<f64>,
    /// Casewise bound with `β1 = β2 = 1`.
    pub nonsmooth: Vec<f64>,
    pub m_star: usize,
    pub p_star: f64,
}

pub fn sublinear_curves(
    l1: f64,
    l2: f64,
    r: f64,
    gap0: f64,
    k_max: usize,
) -> Result<SublinearCurves, String> {
    for (name, v) in [("L1", l1), ("L2", l2), ("R", r), ("initial gap", gap0)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("{name} must be positive and finite, got {v}"));
        }
    }
    let k_max = k_max.min(MAX_K);
    let (e1, e2) = (Extended::Finite(l1), Extended::Finite(l2));
    let cert = ConvexityCertificate::plain_convex(e1, e2, 1.0, 1.0, r);
    let params = sublinear_params(gap0, &cert).map_err(|e| e.to_string())?;
    let ks = 0..=k_max;
    Ok(SublinearCurves {
        improved: ks
            .clone()
            .map(|k| sublinear_bound_smooth(k, gap0, e1, e2, r))
            .collect(),
        prior: ks
            .clone()
            .map(|k| prior_smooth_bound(k, e1, e2, r).unwrap_or(f64::NAN))
            .collect(),
        nonsmooth: ks
            .map(|k| sublinear_bound_nonsmooth(k, gap0, &cert).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?,
        m_star: params.m_star,
        p_star: params.p_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_coupling_is_the_example() {
        let c = convergence(1.0, 30).unwrap();
        assert_eq!(c.gaps.len(), 31);
        assert!((c.rate_mnorm - 0.7222).abs() < 1e-3);
        assert!(c.rate_l2 > c.rate_mnorm);
        assert!((c.empirical_rate.unwrap() - c.rate_mnorm).abs() < 1e-2);
        for (g, b) in c.gaps.iter().zip(&c.bound_mnorm) {
            assert!(*g <= b + 1e-10);
        }
    }

    #[test]
    fn decoupled_blocks_converge_at_once() {
        let c = convergence(0.0, 3).unwrap();
        assert!(c.rate_mnorm.abs() < 1e-12);
        assert!(c.gaps[1..].iter().all(|g| g.abs() < 1e-14));
    }

    #[test]
    fn coupling_limit_is_sharp() {
        let t = max_coupling();
        assert!(
            altmin::linalg::Cholesky::factor(&scaled_example(0.999 * t).unwrap().assemble())
                .is_ok()
        );
        assert!(
            altmin::linalg::Cholesky::factor(&scaled_example(1.001 * t).unwrap().assemble())
                .is_err()
        );
        assert!(convergence(1.001 * t, 5).is_err());
    }

    #[test]
    fn landscape_rates_increase_with_coupling() {
        let l = rate_landscape(12).unwrap();
        assert_eq!(l.couplings.len(), 12);
        for w in l.rate_mnorm.windows(2) {
            assert!(w[1] >= w[0]);
        }
        // ratios just above the truncation floor carry rounding noise; below rate 0.1 they dominate
        for (i, e) in l
            .empirical
            .iter()
            .enumerate()
            .filter(|&(i, e)| e.is_finite() && l.rate_mnorm[i] >= 0.1)
        {
            assert!(*e <= (1.0 + 1e-2) * l.rate_mnorm[i], "sample {i}");
            assert!(l.rate_l2[i] >= l.rate_mnorm[i]);
        }
    }

    #[test]
    fn improved_bound_beats_prior() {
        let s = sublinear_curves(2.0, 5.0, 1.5, 40.0, 200).unwrap();
        assert_eq!(s.improved.len(), 201);
        assert!(s.prior[..2].iter().all(|p| p.is_nan()));
        for k in 2..=200 {
            assert!(s.improved[k] <= s.prior[k]);
        }
        assert!((1.0..=2.0).contains(&s.p_star));
        assert!(sublinear_curves(-1.0, 1.0, 1.0, 1.0, 5).is_err());
    }
}
