use proptest::prelude::*;
use slhnet::operator::{
    annihilator_matrix, c64, image_inclusion, is_strictly_hurwitz, kernel_inclusion, max_abs, max_abs_diff,
    moore_penrose, CMat, HilbertSpace, Operator, SpaceFactor, HURWITZ_MARGIN,
};
use slhnet::random;

fn scale(m: &CMat) -> f64 {
    1.0 + max_abs(m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn penrose_identities(seed in any::<u64>(), r in 1usize..7, c in 1usize..7, rank in 0usize..7) {
        let mut rng = random::rng(seed);
        let m = random::low_rank(&mut rng, r, c, rank.min(r).min(c));
        let p = moore_penrose(&m, None);
        let tol = 1e-10 * scale(&m) * (1.0 + max_abs(&p));
        prop_assert!(max_abs_diff(&(&m * &p * &m), &m) <= tol);
        prop_assert!(max_abs_diff(&(&p * &m * &p), &p) <= tol * (1.0 + max_abs(&p)));
        let mp = &m * &p;
        let pm = &p * &m;
        prop_assert!(max_abs_diff(&mp, &mp.adjoint()) <= tol);
        prop_assert!(max_abs_diff(&pm, &pm.adjoint()) <= tol);
    }

    #[test]
    fn any_generalized_inverse_gives_the_same_product(seed in any::<u64>(), k in 2usize..6, rank in 1usize..5) {
        let mut rng = random::rng(seed);
        let a = random::low_rank(&mut rng, k, k, rank.min(k - 1));
        let b = &a * random::gaussian(&mut rng, k, 3);
        let c = random::gaussian(&mut rng, 2, k) * &a;
        let d = random::gaussian(&mut rng, 2, 3);
        prop_assert!(image_inclusion(&b, &a).unwrap());
        prop_assert!(kernel_inclusion(&a, &c).unwrap());
        let ap = moore_penrose(&a, None);
        let id = CMat::identity(k, k);
        let other = &ap
            + (&id - &ap * &a) * random::gaussian(&mut rng, k, k)
            + random::gaussian(&mut rng, k, k) * (&id - &a * &ap);
        let with_mp = &d - &c * &ap * &b;
        let with_other = &d - &c * &other * &b;
        prop_assert!(max_abs_diff(&with_mp, &with_other) <= 1e-9 * scale(&with_mp) * scale(&other));
    }

    #[test]
    fn embedding_is_multiplicative(seed in any::<u64>(), da in 1usize..3, db in 1usize..4, dc in 1usize..3) {
        let mut rng = random::rng(seed);
        let target = HilbertSpace::new(vec![
            SpaceFactor::new("a", da),
            SpaceFactor::new("b", db),
            SpaceFactor::new("c", dc),
        ])
        .unwrap();
        let local = HilbertSpace::single("b", db).unwrap();
        let x = Operator::new(local.clone(), random::gaussian(&mut rng, db, db)).unwrap();
        let y = Operator::new(local, random::gaussian(&mut rng, db, db)).unwrap();
        let xy = x.compose(&y).unwrap().tensor_embed(&target).unwrap();
        let ex = x.tensor_embed(&target).unwrap();
        let ey = y.tensor_embed(&target).unwrap();
        let prod = ex.compose(&ey).unwrap();
        prop_assert!(max_abs_diff(xy.matrix(), prod.matrix()) <= 1e-12 * scale(xy.matrix()));
    }

    #[test]
    fn number_operator_commutes_with_diagonal_operators(seed in any::<u64>(), cutoff in 1usize..10) {
        let mut rng = random::rng(seed);
        let a = annihilator_matrix(cutoff);
        let n = a.adjoint() * &a;
        let g = random::gaussian(&mut rng, n.nrows(), 1);
        let diag = CMat::from_fn(n.nrows(), n.ncols(), |i, j| if i == j { g[(i, 0)] } else { c64(0.0, 0.0) });
        prop_assert_eq!(&n * &diag, &diag * &n);
    }

    #[test]
    fn damped_generators_are_strictly_hurwitz(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = random::rng(seed);
        let c = random::gaussian(&mut rng, m + 1, m);
        let a = (c.adjoint() * &c) * c64(-0.5, 0.0) - random::hermitian(&mut rng, m) * c64(0.0, 1.0);
        prop_assert!(is_strictly_hurwitz(&a, HURWITZ_MARGIN).unwrap());
        prop_assert!(!is_strictly_hurwitz(&(random::hermitian(&mut rng, m) * c64(0.0, 1.0)), HURWITZ_MARGIN).unwrap());
    }
}
