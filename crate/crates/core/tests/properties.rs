use hilb_core::brackets::coadjoint_action;
use hilb_core::charts::{es_to_haiman, haiman_to_es, hilbert_burch_ideal, RationalChart};
use hilb_core::exactalg::{int, Poly, QMat, Rational, VarContext};
use hilb_core::holonomy::{
    interval_matrix, is_cyclically_monotone, realize_intervals, vector_in_rowspan, IntervalTuple,
};
use hilb_core::orbits::{orbit_datum_smooth, torsion_jordan_type};
use hilb_core::random;
use hilb_core::toric::{decompose_weight, smoothable_basis, weight_of_decomposition, Decomposition, WeightMatrix};
use hilb_core::young::{dominance_le, hc, hc_inverse, is_horizontally_convex, transpose, YoungDiagram};
use proptest::prelude::*;

fn diagram() -> impl Strategy<Value = YoungDiagram> {
    proptest::collection::vec(1u32..7, 0..6).prop_map(YoungDiagram::from_unsorted)
}

fn xy_poly() -> impl Strategy<Value = Poly> {
    proptest::collection::vec((0u16..3, 0u16..3, -4i64..5), 0..4).prop_map(|terms| {
        let ctx = VarContext::xy();
        let mut p = Poly::zero(&ctx);
        for (a, b, c) in terms {
            p += &Poly::monomial(&ctx, &[(0, a), (1, b)], int(c));
        }
        p
    })
}

fn chart(seed: u64, k: usize) -> RationalChart {
    let mut rng = random::rng(seed);
    RationalChart::from_qmat(&random::chart_matrix(&mut rng, k)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transpose_is_involution(mu in diagram()) {
        prop_assert_eq!(transpose(&transpose(&mu)), mu.clone());
        prop_assert_eq!(transpose(&mu).size(), mu.size());
    }

    #[test]
    fn hc_is_convex_and_invertible(mu in diagram()) {
        let h = hc(&mu);
        prop_assert!(is_horizontally_convex(&h));
        prop_assert_eq!(hc_inverse(&h).unwrap(), mu.clone());
        prop_assert!(dominance_le(&mu, &mu));
    }

    #[test]
    fn product_rule(p in xy_poly(), q in xy_poly(), r in xy_poly()) {
        prop_assert_eq!(&(&p * &q) * &r, &p * &(&q * &r));
        for v in 0..2 {
            let lhs = (&p * &q).derivative(v);
            let rhs = &(&p.derivative(v) * &q) + &(&p * &q.derivative(v));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn coordinate_change_round_trip(seed in any::<u64>(), k in 1usize..5) {
        let e = chart(seed, k);
        prop_assert_eq!(haiman_to_es(&es_to_haiman(&e)), e.clone());
        let twice = es_to_haiman(&haiman_to_es(&e));
        prop_assert_eq!(twice.rows(), e.rows());
    }

    #[test]
    fn inverse_matrix(seed in any::<u64>(), n in 1usize..5) {
        let mut rng = random::rng(seed);
        let g = random::invertible_matrix(&mut rng, n, 4);
        let inv = g.inverse().unwrap();
        prop_assert_eq!(&g * &inv, QMat::identity(n));
    }

    #[test]
    fn smoothable_sums_decompose_uniquely(k in 1usize..4, coeffs in proptest::collection::vec(0u64..3, 12)) {
        let basis = smoothable_basis(k);
        let d: Decomposition = basis.iter().zip(coeffs.iter()).filter(|(_, &c)| c > 0).map(|(s, &c)| (*s, c)).collect();
        let w = weight_of_decomposition(k, &d);
        prop_assume!(!w.is_zero());
        prop_assert_eq!(decompose_weight(&w).unwrap(), d);
    }

    #[test]
    fn rotation_is_involution(k in 1usize..4, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = random::rng(seed);
        let entries: Vec<Vec<i64>> = (0..=k).map(|_| (0..k).map(|_| rng.gen_range(-3..4)).collect()).collect();
        let w = WeightMatrix::new(k, entries).unwrap();
        prop_assert_eq!(w.rotated().rotated(), w);
    }

    #[test]
    fn interval_lengths_and_realization(ends in (1usize..6).prop_flat_map(|n| Just((0..2 * n as i64).collect::<Vec<_>>()).prop_shuffle())) {
        let mut ivs: Vec<(Rational, Rational)> =
            ends.chunks(2).map(|p| (int(p[0].min(p[1])), int(p[0].max(p[1])))).collect();
        ivs.sort();
        let j = IntervalTuple::new(ivs).unwrap();
        let b = interval_matrix(&j);
        if j.len() % 2 == 1 {
            prop_assert!(!vector_in_rowspan(&b, &j.lengths()));
        }
        if is_cyclically_monotone(&b) {
            let back = realize_intervals(&b).unwrap();
            prop_assert_eq!(interval_matrix(&back), b);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn orbit_datum_routes_agree(seed in any::<u64>(), k in 1usize..4) {
        let e = chart(seed, k);
        let a = orbit_datum_smooth(&e).unwrap().diagram;
        prop_assert_eq!(a.clone(), torsion_jordan_type(&hilbert_burch_ideal(&e)).unwrap());
        prop_assert!(a.size() as usize <= k);
    }

    #[test]
    fn orbit_datum_is_invariant(seed in any::<u64>(), k in 1usize..4) {
        let mut rng = random::rng(seed ^ 1);
        let e = chart(seed, k);
        let g = random::invertible_matrix(&mut rng, k, 3);
        let v: Vec<Rational> = (0..k).map(|_| random::small_rational(&mut rng, 3)).collect();
        let moved = coadjoint_action(&g, &v, &e).unwrap();
        prop_assert_eq!(orbit_datum_smooth(&e).unwrap(), orbit_datum_smooth(&moved).unwrap());
    }
}
