use proptest::prelude::*;
use rand::Rng;
use slhnet::operator::{max_abs, max_abs_diff, moore_penrose, CMat};
use slhnet::random;
use slhnet::schur::{banachiewicz_pinv, schur_pinv, BlockMatrix, Partition};

fn scale(m: &CMat) -> f64 {
    1.0 + max_abs(m)
}

/// `L W W* R` with block-diagonal invertible `L`, `R`. The PSD middle factor
/// satisfies every inclusion, and block-diagonal congruence preserves them.
fn three_block<R: Rng>(rng: &mut R, sizes: [usize; 3], rank: usize) -> BlockMatrix {
    let n: usize = sizes.iter().sum();
    let w = random::gaussian(rng, n, rank);
    let mut left = CMat::zeros(n, n);
    let mut right = CMat::zeros(n, n);
    let mut off = 0;
    for &s in &sizes {
        left.view_mut((off, off), (s, s)).copy_from(&random::gaussian(rng, s, s));
        right.view_mut((off, off), (s, s)).copy_from(&random::gaussian(rng, s, s));
        off += s;
    }
    let part = Partition::new([("a", sizes[0]), ("b", sizes[1]), ("c", sizes[2])]).unwrap();
    BlockMatrix::square(part, left * (&w * w.adjoint()) * right).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn banachiewicz_is_a_generalized_inverse(seed in any::<u64>(), k1 in 2usize..5, k2 in 1usize..4, rank in 1usize..4) {
        let mut rng = random::rng(seed);
        let p = random::low_rank(&mut rng, k1, k1, rank.min(k1 - 1));
        let b = &p * random::gaussian(&mut rng, k1, k2);
        let c = random::gaussian(&mut rng, k2, k1) * &p;
        let d = random::gaussian(&mut rng, k2, k2);
        let m = BlockMatrix::from_blocks(&["a", "b"], &[vec![p, b], vec![c, d]]).unwrap();
        let g = banachiewicz_pinv(&m, &["a"], &["a"]).unwrap();
        let mm = m.entries();
        prop_assert!(max_abs_diff(&(mm * g.entries() * mm), mm) <= 1e-10 * scale(mm) * scale(g.entries()));
    }

    #[test]
    fn quotient_rule(seed in any::<u64>(), s0 in 1usize..4, s1 in 1usize..4, s2 in 1usize..4, rank in 1usize..9) {
        let mut rng = random::rng(seed);
        let n = s0 + s1 + s2;
        let m = three_block(&mut rng, [s0, s1, s2], rank.min(n));
        prop_assert!(m.check_lemma_new(&["a"], &["b"], &["c"]).unwrap().all());
        let sc = m.successive_complement(&["b"], &["c"]).unwrap();
        prop_assert!(sc.max_discrepancy() <= 1e-9 * scale(m.entries()));
    }

    #[test]
    fn complement_does_not_depend_on_the_inverse(seed in any::<u64>(), s0 in 1usize..4, s1 in 1usize..4, s2 in 1usize..4, rank in 1usize..9) {
        let mut rng = random::rng(seed);
        let n = s0 + s1 + s2;
        let m = three_block(&mut rng, [s0, s1, s2], rank.min(n));
        let pivot = m.block(&["b", "c"], &["b", "c"]).unwrap();
        let mp = moore_penrose(&pivot, None);
        let k = pivot.nrows();
        let id = CMat::identity(k, k);
        let other = &mp
            + (&id - &mp * &pivot) * random::gaussian(&mut rng, k, k)
            + random::gaussian(&mut rng, k, k) * (&id - &pivot * &mp);
        let labels = ["a", "b", "c"];
        let set = ["b", "c"];
        let with_mp = m.generalized_schur_with(&labels, &labels, &set, &set, &schur_pinv).unwrap();
        let with_other = m.generalized_schur_with(&labels, &labels, &set, &set, &|_| other.clone()).unwrap();
        prop_assert!(max_abs_diff(with_mp.entries(), with_other.entries()) <= 1e-8 * scale(m.entries()) * scale(&other));
    }

    #[test]
    fn invertible_case_is_the_classical_complement(seed in any::<u64>(), k1 in 1usize..4, k2 in 1usize..4) {
        let mut rng = random::rng(seed);
        let a = random::gaussian(&mut rng, k1, k1);
        let b = random::gaussian(&mut rng, k1, k2);
        let c = random::gaussian(&mut rng, k2, k1);
        let d = random::gaussian(&mut rng, k2, k2);
        let ainv = a.clone().try_inverse().unwrap();
        let expected = &d - &c * &ainv * &b;
        let m = BlockMatrix::from_blocks(&["a", "d"], &[vec![a, b], vec![c, d]]).unwrap();
        let got = m.complement(&["a"]).unwrap();
        prop_assert!(max_abs_diff(got.entries(), &expected) <= 1e-10 * scale(&expected) * scale(&ainv));
    }
}
