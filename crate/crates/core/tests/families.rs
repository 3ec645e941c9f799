mod common;

use altmin::bounds::{
    descent_check_nonsmooth, descent_check_smooth, rate_quadratic_growth, sublinear_params,
    verify_trace_bound, BoundSequence,
};
use altmin::engine::{
    check_monotonicity, coordinate_probes, optimality_residuals, reference_value, run, RunOptions,
};
use altmin::instances::{
    certificate_l2, certificate_mnorm, level_set_radius_l1, level_set_radius_smooth,
    lipschitz_upper, make_smooth_instance, random_box_instance, random_l1_singular_instance,
    random_singular_instance, random_spd_instance,
};
use altmin::linalg::{norm2, sub, Cholesky};
use altmin::problem::{sample_verify_certificate, ConvexityCertificate, TwoBlockProblem};
use altmin::Extended;
use common::{gauss_solve, jacobi_eigenvalues, quadratic_min_value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

#[test]
fn random_spd_linear_bounds_dominate() {
    for seed in 0..25 {
        let q = random_spd_instance(5, 5, 1e3, seed);
        let h_star = quadratic_min_value(&q.assemble(), &q.rhs());
        let p = make_smooth_instance(q.clone()).unwrap();
        let trace = run(&p, &[0.0; 5], &RunOptions::iterations(100))
            .unwrap()
            .with_h_star(h_star);
        let gap0 = trace.gaps_full().unwrap()[0];
        for c in [certificate_l2(&q).unwrap(), certificate_mnorm(&q).unwrap()] {
            let bound = BoundSequence::quasi_strong(&c.certificate, gap0, 101).unwrap();
            let rep = verify_trace_bound(&trace, &bound).unwrap();
            assert!(
                rep.dominated,
                "seed {seed}: first failure {:?}",
                rep.first_failure
            );
        }
        assert!(check_monotonicity(&trace).holds);
    }
}

#[test]
fn random_spd_unit_condition_converges_in_one_step() {
    let q = random_spd_instance(3, 4, 1.0, 2);
    let c = certificate_mnorm(&q).unwrap().certificate;
    assert!(altmin::bounds::rate_quasi_strong(&c).unwrap() < 1e-12);
    let p = make_smooth_instance(q.clone()).unwrap();
    let trace = run(&p, &[1.0, -2.0, 0.5], &RunOptions::iterations(1)).unwrap();
    let h_star = q.direct_optimal_value().unwrap();
    assert!((trace.last().h_full - h_star).abs() < 1e-14);
}

#[test]
fn eigen_kernel_agrees_with_jacobi_on_random_instances() {
    for seed in 0..10 {
        let m = random_spd_instance(4, 3, 1e4, seed).assemble();
        let ev = jacobi_eigenvalues(&m);
        let (lo, hi) = altmin::linalg::extremal_eigenvalues(&m, 1e-10 * ev[6]).unwrap();
        assert!((lo.value - ev[0]).abs() < 1e-8 * ev[6], "seed {seed}");
        assert!((hi.value - ev[6]).abs() < 1e-8 * ev[6], "seed {seed}");
    }
}

#[test]
fn cholesky_residual_up_to_condition_1e6() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (seed, (n, m)) in [(2, 3), (10, 10), (60, 40), (120, 80)]
        .into_iter()
        .enumerate()
    {
        let q = random_spd_instance(n, m, 1e6, seed as u64);
        let k = q.assemble();
        let chol = Cholesky::factor(&k).unwrap();
        let r = gaussian(n + m, &mut rng);
        let x = chol.solve(&r);
        assert!(norm2(&sub(&k.matvec(&x), &r)) <= 1e-10 * norm2(&r));
    }
}

#[test]
fn gradients_match_central_differences() {
    let q = random_spd_instance(3, 4, 50.0, 8);
    let p = make_smooth_instance(q).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let x1 = gaussian(3, &mut rng);
        let x2 = gaussian(4, &mut rng);
        let g1 = p.grad1(&x1, &x2);
        let g2 = p.grad2(&x1, &x2);
        let h = 1e-5;
        for i in 0..3 {
            let (mut a, mut b) = (x1.clone(), x1.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (p.f(&a, &x2) - p.f(&b, &x2)) / (2.0 * h);
            assert!((fd - g1[i]).abs() <= 1e-6 * g1[i].abs().max(1.0));
        }
        for i in 0..4 {
            let (mut a, mut b) = (x2.clone(), x2.clone());
            a[i] += h;
            b[i] -= h;
            let fd = (p.f(&x1, &a) - p.f(&x1, &b)) / (2.0 * h);
            assert!((fd - g2[i]).abs() <= 1e-6 * g2[i].abs().max(1.0));
        }
    }
}

#[test]
fn smooth_fixed_point_matches_kkt_solve() {
    for seed in 0..5 {
        let q = random_spd_instance(4, 4, 100.0, seed);
        let x = gauss_solve(&q.assemble(), &q.rhs());
        let p = make_smooth_instance(q.clone()).unwrap();
        let opts = RunOptions {
            max_iters: 100_000,
            gap_tol: Some(1e-14),
            ..Default::default()
        };
        let trace = run(&p, &[0.0; 4], &opts).unwrap();
        let last = trace.last();
        let (x1, x2) = x.split_at(4);
        let h_direct = q.smooth_value(x1, x2);
        assert!((last.h_full - h_direct).abs() < 1e-10, "seed {seed}");
    }
}

#[test]
fn box_instances_are_stationary_and_monotone() {
    for seed in 0..20 {
        let p = random_box_instance(4, 3, 1e2, seed).unwrap();
        let trace = run(&p, &[0.0; 4], &RunOptions::iterations(60)).unwrap();
        assert!(check_monotonicity(&trace).holds, "seed {seed}");
        let (p1, p2) = coordinate_probes(&trace, 0.05);
        let rep = optimality_residuals(&p, &trace, &p1, &p2).unwrap();
        assert!(
            rep.max_residual() <= 1e-8,
            "seed {seed}: {}",
            rep.max_residual()
        );
    }
}

#[test]
fn singular_quadratic_growth_bound_dominates() {
    for seed in 0..10 {
        let s = random_singular_instance(5, 5, 2, 1e2, seed);
        let p = s.smooth_problem().unwrap();
        let l1 = lipschitz_upper(&s.quadratic.a).unwrap();
        let l2 = lipschitz_upper(&s.quadratic.c).unwrap();
        let cert = ConvexityCertificate::quadratic_growth(
            s.kappa,
            Extended::Finite(l1),
            Extended::Finite(l2),
            1.0,
            1.0,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace = run(&p, &gaussian(5, &mut rng), &RunOptions::iterations(200))
            .unwrap()
            .with_h_star(s.h_star);
        let gaps = trace.gaps_full().unwrap();
        let bound = BoundSequence::quadratic_growth(&cert, gaps[0], gaps.len()).unwrap();
        let rep = verify_trace_bound(&trace, &bound).unwrap();
        assert!(rep.dominated, "seed {seed}");
        let rate = rate_quadratic_growth(&cert).unwrap();
        for w in gaps.windows(2).filter(|w| w[1] > 1e-12) {
            assert!(
                w[1] / w[0] <= rate + 1e-9,
                "seed {seed}: ratio {} > {rate}",
                w[1] / w[0]
            );
        }
        let r = level_set_radius_smooth(gaps[0], s.kappa);
        assert!(
            descent_check_smooth(&trace, cert.l1, cert.l2, r)
                .unwrap()
                .holds
        );
        let norms = altmin::problem::NormContext::euclidean();
        let report = sample_verify_certificate(&p, &norms, &cert, 500, seed);
        assert!(report.passed(), "{report:?}");
    }
}

#[test]
fn l1_singular_sublinear_bound_dominates() {
    for seed in 0..6 {
        let inst = random_l1_singular_instance(4, 4, 2, 50.0, seed).unwrap();
        let q = &inst.base.quadratic;
        let l1 = lipschitz_upper(&q.a).unwrap();
        let l2 = lipschitz_upper(&q.c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let x1 = gaussian(4, &mut rng);
        let trace = run(&inst.problem, &x1, &RunOptions::iterations(200)).unwrap();
        let reference = reference_value(&inst.problem, &x1, 2000, 1e-12).unwrap();
        let trace = trace.with_h_star(reference.h_star);
        let h0 = trace.entries[0].h_full;
        let r = level_set_radius_l1(
            h0,
            inst.smooth_lower_bound(),
            inst.weight1.min(inst.weight2),
        );
        let cert = ConvexityCertificate::plain_convex(
            Extended::Finite(l1),
            Extended::Finite(l2),
            1.0,
            1.0,
            r,
        );
        let gaps = trace.gaps_full().unwrap();
        let params = sublinear_params(gaps[0], &cert).unwrap();
        assert!((1.0..=2.0).contains(&params.p_star));
        let bound = BoundSequence::sublinear_nonsmooth(&cert, gaps[0], gaps.len()).unwrap();
        assert!(
            verify_trace_bound(&trace, &bound).unwrap().dominated,
            "seed {seed}"
        );
        assert!(
            descent_check_nonsmooth(&trace, &cert).unwrap().holds,
            "seed {seed}"
        );
        assert!(check_monotonicity(&trace).holds);
        let (p1, p2) = coordinate_probes(&trace, 0.1);
        let rep = optimality_residuals(&inst.problem, &trace, &p1, &p2).unwrap();
        assert!(
            rep.max_residual() <= 1e-8,
            "seed {seed}: {}",
            rep.max_residual()
        );
    }
}

#[test]
fn traces_are_deterministic() {
    let p = random_box_instance(5, 5, 1e3, 77).unwrap();
    let a = run(&p, &[0.0; 5], &RunOptions::iterations(30)).unwrap();
    let b = run(&p, &[0.0; 5], &RunOptions::iterations(30)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn projection_onto_affine_optimal_set() {
    let s = random_singular_instance(3, 3, 1, 10.0, 3);
    let p = s.smooth_problem().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (x1, x2) = (gaussian(3, &mut rng), gaussian(3, &mut rng));
    let (y1, y2) = p
        .project_onto_optimal_set(&x1, &x2, &altmin::problem::Norm::Euclidean)
        .unwrap();
    // the projection is optimal and the residual is orthogonal to ker M
    assert!((p.f(&y1, &y2) - s.h_star).abs() < 1e-10);
    let mut d = sub(&x1, &y1);
    d.extend(sub(&x2, &y2));
    assert!(altmin::linalg::dot(&d, &s.null_basis[0]).abs() < 1e-12);
}
