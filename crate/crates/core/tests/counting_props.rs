use num_rational::Rational64;
use proptest::prelude::*;
use weyl_core::counting::{
    nhat, nhat1, nhat2, nhat3, nhat_annulus_diff, product_count_tensor, sphere_product_count, zoll_product_count,
    ProductSpec,
};
use weyl_core::lattice::{annulus_sum, weighted_count, WeightSpec};
use weyl_core::spectra::{torus_spectrum_count, FactorSpec, PlacementRule, ZollModel};

fn factor(code: u8) -> FactorSpec {
    match code {
        0 => FactorSpec::Circle,
        c => FactorSpec::Sphere { dim: u32::from(c) + 1 },
    }
}

fn spec_strategy() -> impl Strategy<Value = ProductSpec> {
    prop::collection::vec(0u8..4, 1..4).prop_filter_map("needs a sphere or two factors", |codes| {
        ProductSpec::new(codes.into_iter().map(factor).collect()).ok()
    })
}

fn zoll(dim: u32, seed: u64, placement: PlacementRule) -> FactorSpec {
    FactorSpec::Zoll(ZollModel {
        dim,
        alpha: Rational64::from_integer(2 * (dim as i64 - 1)),
        leading: 2.0,
        c_width: 0.3,
        correction: 0.5,
        placement,
        seed,
        low_lying: vec![],
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_and_lattice_routes_agree(spec in spec_strategy(), tenths in 0u32..400) {
        let l = f64::from(tenths) / 10.0;
        prop_assert_eq!(product_count_tensor(&spec, l).unwrap(), sphere_product_count(&spec, l, true).unwrap());
    }

    #[test]
    fn counts_nondecreasing(spec in spec_strategy(), a in 0.0f64..30.0, step in 0.0f64..5.0) {
        prop_assert!(product_count_tensor(&spec, a).unwrap() <= product_count_tensor(&spec, a + step).unwrap());
        prop_assert!(sphere_product_count(&spec, a, false).unwrap() <= sphere_product_count(&spec, a + step, false).unwrap());
        prop_assert!(torus_spectrum_count(2, a) <= torus_spectrum_count(2, a + step));
    }

    #[test]
    fn weighted_count_nondecreasing(q in 0i64..4, a in 1.0f64..60.0, step in 0.0f64..3.0) {
        let w = WeightSpec::new(vec![2, 1], 1, vec![Rational64::new(q, 4), Rational64::from_integer(0)]).unwrap();
        prop_assert!(weighted_count(&w, a).unwrap().value <= weighted_count(&w, a + step).unwrap().value);
        prop_assert!(annulus_sum(&w, a, 1.0).unwrap() >= 0.0);
    }

    #[test]
    fn reduction_chain_ordering(l in 5.0f64..80.0) {
        let spec = ProductSpec::new(vec![FactorSpec::Sphere { dim: 2 }, FactorSpec::Circle]).unwrap();
        let full = nhat(&spec, l).unwrap();
        let diff = nhat_annulus_diff(&spec, l, 1.0).unwrap();
        prop_assert!(diff >= 0.0 && diff <= full);
        prop_assert!(nhat1(&spec, l, 10).unwrap() <= full);
        prop_assert!(nhat2(&spec, l, 10).unwrap().is_finite());
        prop_assert!(nhat3(&spec, l).unwrap().is_finite());
    }

    #[test]
    fn zoll_containment(seed in any::<u64>(), l in 0.0f64..25.0, rule in 0u8..3) {
        let placement = [PlacementRule::AtCenter, PlacementRule::Equispaced, PlacementRule::SeededUniform][rule as usize];
        let spec = ProductSpec::new(vec![zoll(2, seed, placement), FactorSpec::Circle]).unwrap();
        let b = zoll_product_count(&spec, l).unwrap();
        prop_assert!(b.interior <= b.total);
        prop_assert!(b.total <= b.interior + b.boundary_upper);
        prop_assert!(b.boundary <= b.boundary_upper);
    }
}

#[test]
fn parallel_matches_serial() {
    let spec = ProductSpec::new(vec![FactorSpec::Sphere { dim: 2 }, FactorSpec::Sphere { dim: 3 }]).unwrap();
    let w = WeightSpec::new(vec![2, 1], 1, vec![Rational64::new(1, 4), Rational64::from_integer(0)]).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let counts: Vec<u128> = (1..40).map(|i| product_count_tensor(&spec, f64::from(i) * 1.7).unwrap()).collect();
            let weights: Vec<u64> =
                (1..40).map(|i| weighted_count(&w, f64::from(i) * 9.3).unwrap().value.to_bits()).collect();
            (counts, weights)
        })
    };
    assert_eq!(run(1), run(6));
}

#[test]
fn zoll_generation_is_seed_determined() {
    let spec = |seed| {
        ProductSpec::new(vec![zoll(2, seed, PlacementRule::SeededUniform), zoll(3, seed, PlacementRule::SeededUniform)])
            .unwrap()
    };
    let a: Vec<_> = (0..20).map(|i| zoll_product_count(&spec(7), f64::from(i)).unwrap()).collect();
    let b: Vec<_> = (0..20).map(|i| zoll_product_count(&spec(7), f64::from(i)).unwrap()).collect();
    assert_eq!(a, b);
}
