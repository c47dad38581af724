//! Property tests for invariants that span several modules.

mod common;

use proptest::prelude::*;
use rand::Rng;
use sharpbound::harness::{gen_concordance_targets, gen_moment_instance, gen_pod_instance, DEFAULT_ALPHA};
use sharpbound::oracle::exponential_lp_bound_fn;
use sharpbound::{
    check_membership, choquet_expectation, comonotone_coupling, evaluate_objective, exponential_lp_bound, expand_rank_objective,
    hunter_worsley, independent_coupling, sharp_bound_generic, solve_boolean_higher_order, solve_moment, solve_pod_bivariate,
    validate_spec, AmbiguitySpec, BooleanHigherOrder, GenericSubmodular, PodBivariate, Sense,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn objective_evaluation_matches_pieces(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.random_range(1..=4);
        let obj = common::objective(&mut r, n, 5);
        let support = sharpbound::ProductSupport::new(common::marginals(&mut r, n, 4).into_iter().map(|m| m.values).collect()).unwrap();
        for p in support.points() {
            let x = support.values(&p);
            let (v, k) = evaluate_objective(&obj, &x).unwrap();
            let pieces: Vec<f64> = (0..obj.k()).map(|k| obj.piece(k, &x)).collect();
            let best = pieces.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(v, best);
            prop_assert_eq!(k, pieces.iter().position(|&c| c == best).unwrap() + 1);
            prop_assert_eq!(evaluate_objective(&obj, &x).unwrap(), (v, k));
        }
    }

    #[test]
    fn generated_specs_validate(seed in 0u64..1000) {
        let pod = gen_pod_instance(seed, 6, 0.5).unwrap();
        let q = gen_concordance_targets(&pod.p, 6, &DEFAULT_ALPHA).unwrap();
        let spec = AmbiguitySpec::BooleanHigherOrder(BooleanHigherOrder { p: pod.p.clone(), m: 6, q });
        prop_assert!(validate_spec(&spec).is_valid());
        let moment = gen_moment_instance(seed, 5).unwrap();
        for l in [1, 4, 10] {
            prop_assert!(validate_spec(&AmbiguitySpec::Moment(moment.spec(l))).is_valid());
        }
        let mut r = common::rng(seed);
        prop_assert!(validate_spec(&AmbiguitySpec::PodBivariate(common::pod_spec(&mut r, 3, 3))).is_valid());
        prop_assert!(validate_spec(&AmbiguitySpec::GenericSubmodular(common::generic_spec(&mut r, 3, 3, 5))).is_valid());
    }

    #[test]
    fn couplings_lie_in_the_pod_set_and_below_the_bound(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.random_range(2..=4);
        let ms = common::marginals(&mut r, n, 3);
        let obj = common::objective(&mut r, n, 4);
        let spec = PodBivariate::pod(ms.clone());
        let (bound, _) = solve_pod_bivariate(&spec, &obj).unwrap();
        let family = AmbiguitySpec::PodBivariate(spec);
        for joint in [comonotone_coupling(&ms).unwrap(), independent_coupling(&ms).unwrap()] {
            let report = check_membership(&joint, &family);
            prop_assert!(report.passes(), "{:?}", report.violations);
            prop_assert!(joint.expectation(|x| obj.value(x)) <= bound.value + 1e-9);
        }
    }

    #[test]
    fn submodular_minimum_over_frechet_is_comonotone(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.random_range(2..=3);
        let ms = common::marginals(&mut r, n, 4);
        let w: Vec<f64> = (0..n).map(|_| r.random_range(0.0..1.0)).collect();
        // concave of a nonnegative combination: submodular
        let f = move |x: &[f64]| -w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().powi(2);
        let spec = AmbiguitySpec::GenericSubmodular(GenericSubmodular::frechet(&ms));
        let lp = exponential_lp_bound_fn(&spec, &f, Sense::Minimize, 10_000).unwrap();
        prop_assert!((lp.value - choquet_expectation(&f, &ms).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn generic_bound_is_dual_feasible_and_matches_the_full_lp(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.random_range(2..=3);
        let spec = common::generic_spec(&mut r, n, 3, 5);
        let obj = common::objective(&mut r, n, 4);
        let res = sharp_bound_generic(&spec, &obj).unwrap();
        let dual = res.dual.clone().expect("dual multipliers");
        let oracles = spec.oracles();
        for p in spec.support.points() {
            let x = spec.support.values(&p);
            let surface = dual.y0 + dual.y.iter().zip(&oracles).map(|(y, f)| y * f(&x)).sum::<f64>();
            prop_assert!(surface >= obj.value(&x) - 1e-7, "dual row at {:?} violated", x);
        }
        let full = exponential_lp_bound(&AmbiguitySpec::GenericSubmodular(spec.clone()), &obj, Sense::Maximize).unwrap();
        prop_assert!((res.value - full.value).abs() < 1e-6);
        let joint = full.extremal.expect("optimal distribution");
        prop_assert!(check_membership(&joint, &AmbiguitySpec::GenericSubmodular(spec)).passes());
    }

    #[test]
    fn hunter_worsley_with_product_targets(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.random_range(2..=8);
        let p: Vec<f64> = (0..n).map(|_| r.random_range(0.01..0.9)).collect();
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| ((i, j), p[i] * p[j])).collect();
        let (lp, _) = solve_boolean_higher_order(&BooleanHigherOrder::new(p.clone(), 2), &expand_rank_objective(n, 1).unwrap()).unwrap();
        prop_assert!((lp.value - hunter_worsley(&p, &pairs)).abs() < 1e-7);
    }

    #[test]
    fn moment_bounds_tighten_with_degree(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let n = r.random_range(2..=3);
        let spec = common::moment_spec(&mut r, n, 3, 3);
        let obj = common::objective(&mut r, n, 3);
        let mut prev = f64::INFINITY;
        for l in 1..=3 {
            let mut sub = spec.clone();
            sub.moments.iter_mut().for_each(|m| m.truncate(l));
            let (b, _) = solve_moment(&sub, &obj).unwrap();
            prop_assert!(b.value <= prev + 1e-8);
            prev = b.value;
        }
    }
}
