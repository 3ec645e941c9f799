mod common;

use altmin::bounds::{
    descent_check_smooth, literature_rates, rate_quasi_strong, sublinear_bound_smooth,
    verify_trace_bound, BoundSequence,
};
use altmin::engine::{check_monotonicity, coordinate_probes, optimality_residuals};
use altmin::instances::{
    assemble_paper_example, certificate_l2, certificate_mnorm, level_set_radius_smooth,
    make_smooth_instance, spectral_summary,
};
use altmin::linalg::{extremal_eigenvalues, Cholesky};
use altmin::problem::sample_verify_certificate;
use common::{example_trace, jacobi_eigenvalues, FIGURE_ANCHORS};

#[test]
fn mnorm_rate_matches_reported_value() {
    let cert = certificate_mnorm(&assemble_paper_example())
        .unwrap()
        .certificate;
    let eta = rate_quasi_strong(&cert).unwrap();
    assert!((eta - 0.7222).abs() < 1e-3, "eta = {eta}");
    // the two generalized eigenvalues coincide for this structure
    assert!((cert.beta1 - cert.beta2).abs() < 1e-9);
}

#[test]
fn l2_rate_is_worse_than_mnorm_rate() {
    let q = assemble_paper_example();
    let rho = rate_quasi_strong(&certificate_l2(&q).unwrap().certificate).unwrap();
    let eta = rate_quasi_strong(&certificate_mnorm(&q).unwrap().certificate).unwrap();
    assert!(rho >= eta);
    assert!(rho > 0.9 && rho < 0.92, "rho = {rho}");
}

#[test]
fn literature_rates_are_no_better() {
    let q = assemble_paper_example();
    let cert = certificate_l2(&q).unwrap().certificate;
    let rho = rate_quasi_strong(&cert).unwrap();
    let spec = spectral_summary(&q).unwrap();
    let lit = literature_rates(cert.sigma.unwrap(), spec.lambda_max_m, 2);
    for r in [lit.luo_wang, lit.necoara, lit.tai_asymptotic] {
        assert!(r >= rho, "{r} < {rho}");
    }
}

#[test]
fn eigenvalues_match_jacobi_oracle() {
    let m = assemble_paper_example().assemble();
    let oracle = jacobi_eigenvalues(&m);
    let (min, max) = extremal_eigenvalues(&m, 1e-12).unwrap();
    assert!((min.value - oracle[0]).abs() < 1e-9);
    assert!((max.value - oracle[4]).abs() < 1e-9);
}

#[test]
fn figure_anchors() {
    let trace = example_trace(30);
    let gaps = trace.gaps_full().unwrap();
    assert_eq!(gaps.len(), 31);
    for (abscissa, value) in FIGURE_ANCHORS {
        let g = gaps[abscissa - 1];
        assert!(
            ((g - value) / value).abs() < 1e-2,
            "abscissa {abscissa}: {g} vs {value}"
        );
    }
}

#[test]
fn trace_dominated_by_mnorm_bound_with_matching_tail() {
    let q = assemble_paper_example();
    let cert = certificate_mnorm(&q).unwrap().certificate;
    let eta = rate_quasi_strong(&cert).unwrap();
    let trace = example_trace(40);
    let gaps = trace.gaps_full().unwrap();
    let bound = BoundSequence::quasi_strong(&cert, gaps[0], gaps.len()).unwrap();
    let report = verify_trace_bound(&trace, &bound).unwrap();
    assert!(report.dominated);
    assert!(report.max_ratio <= 1.0 + 1e-12);
    let rate = report.empirical_rate.unwrap();
    assert!((rate - eta).abs() < 1e-2, "empirical {rate} vs {eta}");
}

#[test]
fn halved_rate_is_not_dominating() {
    let cert = certificate_mnorm(&assemble_paper_example())
        .unwrap()
        .certificate;
    let eta = rate_quasi_strong(&cert).unwrap();
    let trace = example_trace(31);
    let gaps = trace.gaps_full().unwrap();
    let bound = BoundSequence::linear(
        altmin::bounds::BoundKind::LinearQSC,
        eta / 2.0,
        gaps[0],
        gaps.len(),
    );
    let report = verify_trace_bound(&trace, &bound).unwrap();
    assert!(!report.dominated);
    assert!(report.first_failure.is_some());
}

#[test]
fn smooth_sublinear_bound_and_descent() {
    let q = assemble_paper_example();
    let cert = certificate_l2(&q).unwrap().certificate;
    let trace = example_trace(31);
    let gaps = trace.gaps_full().unwrap();
    let r = level_set_radius_smooth(gaps[0], cert.sigma.unwrap());
    for (k, g) in gaps.iter().enumerate() {
        assert!(*g <= sublinear_bound_smooth(k, gaps[0], cert.l1, cert.l2, r) + 1e-10);
    }
    for scale in [1.0, 10.0] {
        let rep = descent_check_smooth(&trace, cert.l1, cert.l2, scale * r).unwrap();
        assert!(rep.holds, "worst margin {}", rep.worst_margin);
    }
}

#[test]
fn certificates_pass_sampling() {
    let q = assemble_paper_example();
    let p = make_smooth_instance(q.clone()).unwrap();
    for c in [certificate_l2(&q).unwrap(), certificate_mnorm(&q).unwrap()] {
        let rep = sample_verify_certificate(&p, &c.norms, &c.certificate, 1000, 17);
        assert!(rep.passed(), "{rep:?}");
    }
}

#[test]
fn beta_chain_on_random_vectors() {
    use altmin::linalg::dot;
    use rand::{Rng, SeedableRng};
    let q = assemble_paper_example();
    let c = certificate_mnorm(&q).unwrap();
    let (s_a, s_c) = altmin::instances::schur_complements(&q).unwrap();
    let m = q.assemble();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
        let (x1, x2) = x.split_at(3);
        let mx = dot(&x, &m.matvec(&x));
        let sa = s_a.quadratic_form(x1);
        let sc = s_c.quadratic_form(x2);
        let tol = 1e-12 * mx.abs().max(1.0);
        assert!(mx >= sa - tol && sa >= c.certificate.beta1 * q.a.quadratic_form(x1) - tol);
        assert!(mx >= sc - tol && sc >= c.certificate.beta2 * q.c.quadratic_form(x2) - tol);
    }
}

#[test]
fn trace_is_monotone_and_stationary() {
    let q = assemble_paper_example();
    let p = make_smooth_instance(q).unwrap();
    let trace = example_trace(31);
    assert!(check_monotonicity(&trace).holds);
    let (p1, p2) = coordinate_probes(&trace, 0.5);
    let rep = optimality_residuals(&p, &trace, &p1, &p2).unwrap();
    assert!(rep.max_residual() <= 1e-8);
}

#[test]
fn limit_matches_direct_solve() {
    let q = assemble_paper_example();
    let x = common::gauss_solve(&q.assemble(), &q.rhs());
    let trace = example_trace(300);
    let last = trace.last();
    let mut got = last.x_full.x1.clone();
    got.extend_from_slice(&last.x_full.x2);
    for (a, b) in got.iter().zip(&x) {
        assert!((a - b).abs() < 1e-10);
    }
    assert!(Cholesky::factor(&q.assemble()).is_ok());
}
