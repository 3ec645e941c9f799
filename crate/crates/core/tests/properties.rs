use altmin::bounds::{
    prior_smooth_bound, rate_quasi_strong, remark_lower_mstar, sequence_bound_check,
    sublinear_bound_nonsmooth, sublinear_bound_smooth, sublinear_params, BoundError,
    SequenceBoundParams, SequenceVerdict,
};
use altmin::engine::{am_step, check_monotonicity, run, Iterate, RunOptions, DEFAULT_INNER_TOL};
use altmin::instances::{
    certificate_mnorm, make_smooth_instance, random_box_instance, random_spd_instance,
};
use altmin::problem::{evaluate_objective, ConvexityCertificate, TwoBlockProblem};
use altmin::Extended;
use proptest::prelude::*;
use rand::SeedableRng;

fn fin(x: f64) -> Extended {
    Extended::Finite(x)
}

fn qsc(sigma: f64, l1: f64, l2: f64, b1: f64, b2: f64) -> ConvexityCertificate {
    ConvexityCertificate::quasi_strong(sigma, fin(l1), fin(l2), b1, b2)
}

proptest! {
    #[test]
    fn qsc_rate_monotone(
        sigma in 0.01f64..1.0, l1 in 1.0f64..10.0, l2 in 1.0f64..10.0,
        b1 in 0.01f64..1.0, b2 in 0.01f64..1.0, t in 1.0f64..2.0,
    ) {
        let base = rate_quasi_strong(&qsc(sigma, l1, l2, b1, b2)).unwrap();
        prop_assert!((0.0..1.0).contains(&base));
        // larger σ and β can only help, larger L can only hurt
        if let Ok(r) = rate_quasi_strong(&qsc(sigma * t, l1, l2, b1, b2)) { prop_assert!(r <= base); }
        if let Ok(r) = rate_quasi_strong(&qsc(sigma, l1, l2, (b1 * t).min(1.0), b2)) { prop_assert!(r <= base); }
        if let Ok(r) = rate_quasi_strong(&qsc(sigma, l1, l2, b1, (b2 * t).min(1.0))) { prop_assert!(r <= base); }
        prop_assert!(rate_quasi_strong(&qsc(sigma, l1 * t, l2, b1, b2)).unwrap() >= base);
        prop_assert!(rate_quasi_strong(&qsc(sigma, l1, l2 * t, b1, b2)).unwrap() >= base);
    }

    #[test]
    fn infinite_lipschitz_case_is_consistent(sigma in 0.01f64..1.0, l1 in 1.0f64..10.0, b1 in 0.01f64..1.0) {
        let c = ConvexityCertificate::quasi_strong(sigma, fin(l1), Extended::Infinite, b1, 1.0);
        let got = rate_quasi_strong(&c).unwrap();
        let product = (1.0 - Extended::divide(sigma, c.ratio1())) * (1.0 - Extended::divide(sigma, c.ratio2()));
        prop_assert_eq!(got, product);
        prop_assert_eq!(got, 1.0 - Extended::divide(sigma, c.ratio1().min(c.ratio2())));
    }

    #[test]
    fn p_star_in_unit_range(
        l1 in 0.1f64..100.0, l2 in prop::option::of(0.1f64..100.0),
        b1 in 0.01f64..1.0, b2 in 0.01f64..1.0, r in 0.1f64..10.0, gap in 1e-6f64..1e6,
    ) {
        let l2 = l2.map_or(Extended::Infinite, Extended::Finite);
        let c = ConvexityCertificate::plain_convex(fin(l1), l2, b1, b2, r);
        let p = sublinear_params(gap, &c).unwrap();
        prop_assert!(p.p_star >= 1.0 - 1e-12 && p.p_star <= 2.0 + 1e-12, "p* = {}", p.p_star);
    }

    #[test]
    fn nonsmooth_bound_is_non_increasing(
        l1 in 0.1f64..10.0, l2 in 0.1f64..10.0, r in 0.1f64..3.0, gap in 1e-3f64..1e4,
    ) {
        let c = ConvexityCertificate::plain_convex(fin(l1), fin(l2), 1.0, 1.0, r);
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let b = sublinear_bound_nonsmooth(k, gap, &c).unwrap();
            prop_assert!(b <= prev);
            prop_assert!(k > 0 || b >= gap);
            prev = b;
        }
    }

    #[test]
    fn smooth_bound_improves_prior(
        l1 in 1e-3f64..1e3, l2 in 1e-3f64..1e3, r in 1e-2f64..1e2, gap in 1e-6f64..1e6, k in 2usize..10_000,
    ) {
        let improved = sublinear_bound_smooth(k, gap, fin(l1), fin(l2), r);
        let prior = prior_smooth_bound(k, fin(l1), fin(l2), r).unwrap();
        prop_assert!(improved <= prior);
    }

    #[test]
    fn sequence_lemma_never_fails(
        g1 in 0.0f64..2.0, g2 in 0.0f64..2.0, p in 0.0f64..3.0,
        a0_frac in 0.01f64..1.0, slack in prop::collection::vec(0.0f64..1.0, 60),
    ) {
        prop_assume!(g1 + g2 > 1e-3);
        let gmax = g1.max(g2);
        let cap = if p > 0.0 { 1.0 / (p * (g1 + g2)) } else { f64::INFINITY };
        let a0 = a0_frac * cap.min(0.99 / gmax);
        let mut seq = vec![a0];
        for (i, s) in slack.iter().enumerate() {
            let a = *seq.last().unwrap();
            let g = if i % 2 == 0 { g1 } else { g2 };
            // anywhere between the equality recursion and 1% of it
            let eq = a - g * a * a;
            seq.push(eq * (0.01 + 0.99 * (1.0 - s)));
        }
        let params = SequenceBoundParams { gamma1: g1, gamma2: g2, p };
        prop_assert_eq!(sequence_bound_check(&params, &seq), SequenceVerdict::Holds);
    }

    #[test]
    fn traces_are_monotone(seed in 0u64..1000, cond in 1.0f64..1e3) {
        let q = random_spd_instance(3, 4, cond, seed);
        let p = make_smooth_instance(q).unwrap();
        let t = run(&p, &[0.5, -0.5, 1.0], &RunOptions::iterations(25)).unwrap();
        prop_assert!(check_monotonicity(&t).holds);
        let b = random_box_instance(3, 4, cond, seed).unwrap();
        let t = run(&b, &[0.0; 3], &RunOptions::iterations(10)).unwrap();
        prop_assert!(check_monotonicity(&t).holds);
    }

    #[test]
    fn objective_difference_splits(seed in 0u64..1000) {
        let p = random_box_instance(3, 2, 10.0, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (x1, x2) = p.sample_point(&mut rng);
        let (y1, y2) = p.sample_point(&mut rng);
        let hx = evaluate_objective(&p, &x1, &x2).unwrap().to_f64();
        let hy = evaluate_objective(&p, &y1, &y2).unwrap().to_f64();
        let split = (p.f(&x1, &x2) - p.f(&y1, &y2))
            + (p.g1(&x1).to_f64() - p.g1(&y1).to_f64())
            + (p.g2(&x2).to_f64() - p.g2(&y2).to_f64());
        prop_assert!(((hx - hy) - split).abs() <= 1e-12 * hx.abs().max(hy.abs()).max(1.0));
    }
}

#[test]
fn sequence_lemma_examples() {
    let eq = |g1: f64, g2: f64, a0: f64, len: usize| {
        let mut seq = vec![a0];
        for i in 0..len {
            let a = *seq.last().unwrap();
            seq.push(a - if i % 2 == 0 { g1 } else { g2 } * a * a);
        }
        seq
    };
    let single = SequenceBoundParams {
        gamma1: 0.5,
        gamma2: 0.0,
        p: 1.0,
    };
    assert!(sequence_bound_check(&single, &eq(0.5, 0.0, 1.0, 200)).holds());
    let halving: Vec<f64> = (0..40).map(|i| 0.1 * 0.5f64.powi(i)).collect();
    let params = SequenceBoundParams {
        gamma1: 0.5,
        gamma2: 0.5,
        p: 1.0,
    };
    assert!(sequence_bound_check(&params, &halving).holds());
}

#[test]
fn remark_boundary_is_not_applicable() {
    let r = remark_lower_mstar(2.0 * 3.0 * 4.0, fin(3.0), fin(1.0), 1.0, 1.0, 2.0);
    assert!(matches!(r, Err(BoundError::NotApplicable(_))));
}

#[test]
fn fixed_point_is_preserved() {
    let q = random_spd_instance(4, 3, 100.0, 21);
    let (x1, x2) = q.direct_solution().unwrap();
    let p = make_smooth_instance(q).unwrap();
    let h = p.f(&x1, &x2);
    let (half, next) = am_step(&p, &Iterate::new(x1, x2), DEFAULT_INNER_TOL).unwrap();
    assert!((p.f(&half.x1, &half.x2) - h).abs() <= 1e-12 * h.abs().max(1.0));
    assert!((p.f(&next.x1, &next.x2) - h).abs() <= 1e-12 * h.abs().max(1.0));
}

#[test]
fn mnorm_beta_inequalities_on_random_instances() {
    use rand::Rng;
    for seed in 0..5 {
        let q = random_spd_instance(4, 3, 1e3, seed);
        let c = certificate_mnorm(&q).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10_000 {
            let x1: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x2: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let prod = c.norms.product_norm_squared(&x1, &x2);
            assert!(prod >= c.norms.beta1 * c.norms.block1.squared(&x1) - 1e-12 * prod.max(1.0));
            assert!(prod >= c.norms.beta2 * c.norms.block2.squared(&x2) - 1e-12 * prod.max(1.0));
        }
    }
}
