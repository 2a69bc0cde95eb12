use ncdomain::charcurv::{char_point, curvature, trace_chain};
use ncdomain::fock::{build_fock, defect_residual, Side};
use ncdomain::kernel::kernel_value;
use ncdomain::linalg::{self, min_eigenvalue, trace_re};
use ncdomain::symbol::{compute_b, submultiplicativity_excess, suffix_residual, Coeffs, FreeSymbol};
use ncdomain::tuples::{random_commuting_tuple, random_tuple, scale_to_gauge, PhiMap};
use ncdomain::words::{enumerate_words, level_offset, Word};
use ncdomain::{CMat, C64};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn symbol() -> impl Strategy<Value = FreeSymbol> {
    (1usize..=3)
        .prop_flat_map(|n| {
            (
                Just(n),
                prop::collection::vec(0.1f64..2.0, n),
                prop::collection::vec((prop::collection::vec(0..n, 2..=3), 0.0f64..1.0), 0..3),
            )
        })
        .prop_map(|(n, lin, higher)| {
            let mut a: std::collections::BTreeMap<Word, f64> =
                lin.iter().enumerate().map(|(i, &x)| (Word::letter(i), x)).collect();
            for (w, x) in higher {
                a.insert(Word::new(w), x);
            }
            FreeSymbol::new(n, a).unwrap()
        })
}

fn psd(rng: &mut ChaCha8Rng, d: usize) -> CMat {
    let g = ncdomain::tuples::random_matrix(rng, d);
    &g * g.adjoint()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graded_index_roundtrip(n in 1usize..4, letters in prop::collection::vec(0usize..3, 0..6)) {
        let w = Word::new(letters.into_iter().map(|x| x % n).collect::<Vec<_>>());
        let idx = w.graded_index(n);
        prop_assert_eq!(Word::from_graded_index(idx, n), w.clone());
        prop_assert!(idx >= level_offset(n, w.len()) && idx < level_offset(n, w.len() + 1));
    }

    #[test]
    fn enumeration_is_sorted(n in 1usize..4, m in 0usize..5) {
        let words = enumerate_words(n, m);
        prop_assert!(words.windows(2).all(|p| p[0] < p[1]));
        for (i, w) in words.iter().enumerate() {
            prop_assert_eq!(w.graded_index(n), i);
        }
    }

    #[test]
    fn b_table_identities(f in symbol()) {
        let b = compute_b(&f, 5);
        prop_assert!(suffix_residual(&f, &b) <= 1e-12);
        prop_assert!(submultiplicativity_excess(&b) <= 1e-12);
        prop_assert!(b.values().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn defect_identity_on_interior(f in symbol()) {
        let m = if f.n() == 3 { 4 } else { 6 };
        let r = defect_residual(&build_fock(&f, m).unwrap());
        prop_assert!(r.residual <= 1e-12, "{}", r.residual);
    }

    #[test]
    fn vacuum_norm_identity(f in symbol(), seed in any::<u64>()) {
        let fock = build_fock(&f, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Coeffs = enumerate_words(f.n(), 3)
            .into_iter()
            .map(|w| (w, C64::new(rand::Rng::random_range(&mut rng, -1.0..1.0), 0.3)))
            .collect();
        let v = fock.eval_poly(Side::Left, &c).unwrap() * fock.vacuum();
        let expect: f64 = c.iter().map(|(w, z)| z.norm_sqr() / fock.b().get(w)).sum();
        prop_assert!((v.norm_squared() - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn phi_is_positive(f in symbol(), seed in any::<u64>(), d in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tuple(&mut rng, f.n(), d);
        let x = psd(&mut rng, d);
        let phi = PhiMap::new(&f, &t).unwrap();
        let y = phi.apply(&x);
        prop_assert!(min_eigenvalue(&y) >= -1e-10 * (1.0 + linalg::spectral_norm(&y)));
        let ys = phi.apply_adjoint(&x);
        prop_assert!(min_eigenvalue(&ys) >= -1e-10 * (1.0 + linalg::spectral_norm(&ys)));
        // ⟨Φ(X), Y⟩ = ⟨X, Φ*(Y)⟩
        let z = psd(&mut rng, d);
        let lhs = (phi.apply(&x).adjoint() * &z).trace();
        let rhs = (x.adjoint() * phi.apply_adjoint(&z)).trace();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
    }

    #[test]
    fn kernel_gram_is_psd(f in symbol(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<C64>> = (0..6)
            .map(|_| {
                let v: Vec<C64> = (0..f.n())
                    .map(|_| C64::new(rand::Rng::random_range(&mut rng, -1.0..1.0), rand::Rng::random_range(&mut rng, -1.0..1.0)))
                    .collect();
                let g = f.pairing(&v, &v).re;
                let r = rand::Rng::random_range(&mut rng, 0.0..0.9);
                // scaling by s multiplies each degree-k term by s^{2k} ≤ s², so s² = r/g keeps the gauge below r
                let s = (r / g.max(1e-300)).sqrt().min(1.0);
                v.into_iter().map(|z| z * s).collect()
            })
            .collect();
        let gram = CMat::from_fn(6, 6, |i, j| kernel_value(&f, &pts[i], &pts[j]).unwrap());
        let gram = linalg::hermitian_part(&gram);
        prop_assert!(min_eigenvalue(&gram) >= -1e-10 * trace_re(&gram));
    }

    #[test]
    fn trace_chain_holds(f in symbol(), seed in any::<u64>(), d in 1usize..5, g in 0.05f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = scale_to_gauge(&f, &random_tuple(&mut rng, f.n(), d), g).unwrap();
        let x = psd(&mut rng, d);
        let (a, b, c) = trace_chain(&f, &t, &x).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-10) + 1e-12);
        prop_assert!(b <= c * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn curvature_numerators_monotone_and_additive(seed in any::<u64>(), g1 in 0.1f64..1.0, g2 in 0.1f64..1.0) {
        let p = FreeSymbol::ball(2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = scale_to_gauge(&p, &random_tuple(&mut rng, 2, 2), g1).unwrap();
        let b = scale_to_gauge(&p, &random_tuple(&mut rng, 2, 3), g2).unwrap();
        let ca = curvature(&p, &a, 25).unwrap();
        let cb = curvature(&p, &b, 25).unwrap();
        let cs = curvature(&p, &a.direct_sum(&b).unwrap(), 25).unwrap();
        prop_assert!(cs.numerators.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        for k in 0..25 {
            let sum = ca.primary.ratios[k] + cb.primary.ratios[k];
            prop_assert!((cs.primary.ratios[k] - sum).abs() <= 1e-10 * (1.0 + sum));
        }
    }

    #[test]
    fn characteristic_function_is_contractive(seed in any::<u64>(), g in 0.1f64..0.95, zr in -0.5f64..0.5, zi in -0.5f64..0.5) {
        let f = FreeSymbol::new(2, [(Word::new([0]), 1.0), (Word::new([1]), 1.0), (Word::new([0, 1]), 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = scale_to_gauge(&f, &random_commuting_tuple(&mut rng, 2, 3), g).unwrap();
        let z = [C64::new(zr, zi), C64::new(zi, -zr) * 0.5];
        prop_assume!(f.pairing(&z, &z).re < 0.99);
        let p = char_point(&f, &t, &z).unwrap();
        prop_assert!(p.norm <= 1.0 + 1e-10);
        prop_assert!(p.factor_residual <= 1e-9);
    }
}
