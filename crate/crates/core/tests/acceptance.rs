//! Acceptance suite: one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use ncdomain::charcurv::{char_point, curvature, factorization_residual, mobius, star_curvature};
use ncdomain::fock::{bohr_margin, build_fock, defect_residual, reversal_residual, wiener_check, Side};
use ncdomain::kernel::{kernel_check, kernel_value, pick_feasible, z_vector, PickProblem};
use ncdomain::linalg::{self, min_eigenvalue, spectral_norm, trace_re};
use ncdomain::poisson::verify;
use ncdomain::symbol::{compute_b, Coeffs, FreeSymbol};
use ncdomain::tuples::{
    classify, random_commuting_tuple, random_tuple, scale_to_gauge, series_calculus, OperatorTuple,
};
use ncdomain::words::{enumerate_words, Word};
use ncdomain::{CMat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let took = start.elapsed();
    let pass = out.pass && took < budget;
    println!(
        "criterion {id:>2} {:<4} {name}: {} [{:.2?} of {:?}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        took,
        budget
    );
    pass
}

fn w(v: &[usize]) -> Word {
    Word::new(v.to_vec())
}

fn mixed() -> FreeSymbol {
    FreeSymbol::new(2, [(w(&[0]), 1.0), (w(&[1]), 1.0), (w(&[0, 1]), 1.0)]).unwrap()
}

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// `(1 − f)^{-1} = Σ_k f^k` by repeated multiplication in the free algebra.
fn inverse_series(f: &FreeSymbol, deg: usize) -> BTreeMap<Word, f64> {
    let mut total: BTreeMap<Word, f64> = [(Word::empty(), 1.0)].into_iter().collect();
    let mut power = total.clone();
    for _ in 0..deg {
        let mut next: BTreeMap<Word, f64> = BTreeMap::new();
        for (u, x) in &power {
            for (v, a) in f.support() {
                if u.len() + v.len() <= deg {
                    *next.entry(u.concat(v)).or_default() += x * a;
                }
            }
        }
        for (k, v) in &next {
            *total.entry(k.clone()).or_default() += v;
        }
        power = next;
    }
    total
}

fn random_interior(rng: &mut ChaCha8Rng, f: &FreeSymbol, max_gauge: f64) -> Vec<C64> {
    let dir: Vec<C64> =
        (0..f.n()).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let target = rng.random_range(0.05..max_gauge);
    let (mut lo, mut hi) = (0.0, 1.0);
    let g = |r: f64| {
        let p: Vec<C64> = dir.iter().map(|z| z * r).collect();
        f.pairing(&p, &p).re
    };
    while g(hi) < target {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    dir.iter().map(|z| z * lo).collect()
}

fn c1() -> Outcome {
    let mut ok = true;
    for n in [2, 3] {
        let b = compute_b(&FreeSymbol::ball(n), 8);
        ok &= b.values().iter().all(|&x| x == 1.0);
    }
    let f = mixed();
    let b = compute_b(&f, 6);
    let oracle = inverse_series(&f, 6);
    let mut worst: f64 = 0.0;
    for word in enumerate_words(2, 6) {
        let o = oracle.get(&word).copied().unwrap_or(0.0);
        worst = worst.max((b.get(&word) - o).abs() / o.abs().max(1.0));
    }
    Outcome { pass: ok && worst <= 1e-12, detail: format!("ball b ≡ 1: {ok}, mixed max rel err {worst:.1e}") }
}

fn c2() -> Outcome {
    let cases = [(FreeSymbol::ball(2), 8), (FreeSymbol::ball(3), 5), (mixed(), 8)];
    let mut worst: f64 = 0.0;
    for (f, m) in cases {
        worst = worst.max(defect_residual(&build_fock(&f, m).unwrap()).residual);
    }
    Outcome { pass: worst <= 1e-12, detail: format!("max residual {worst:.1e}") }
}

fn c3() -> Outcome {
    let r = reversal_residual(&mixed(), 6).unwrap();
    Outcome { pass: r <= 1e-12, detail: format!("max entry {r:.1e}") }
}

fn c4() -> Outcome {
    let f = mixed();
    let fock = build_fock(&f, 10).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let points: Vec<Vec<C64>> = (0..20).map(|_| random_interior(&mut rng, &f, 0.6)).collect();
    let mut eig_ok = 0;
    let mut ker_ok = 0;
    for (j, p) in points.iter().enumerate() {
        let z = z_vector(&fock, p).unwrap();
        eig_ok += (z.eigen_residual <= z.eigen_bound) as usize;
        let q = &points[(j + 1) % points.len()];
        let k = kernel_check(&fock, q, p).unwrap();
        ker_ok += (k.difference <= k.bound) as usize;
    }
    let gram = CMat::from_fn(8, 8, |i, j| kernel_value(&f, &points[i], &points[j]).unwrap());
    let gram = linalg::hermitian_part(&gram);
    let min = min_eigenvalue(&gram);
    let tol = -1e-10 * trace_re(&gram);
    Outcome {
        pass: eig_ok == 20 && ker_ok == 20 && min >= tol,
        detail: format!("eigen {eig_ok}/20, kernel {ker_ok}/20, Gram λ_min {min:.3e}"),
    }
}

fn c5() -> Outcome {
    let f = mixed();
    let m = 10;
    let fock = build_fock(&f, m).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bound = 10.0 * 0.8_f64.powi(m as i32 + 1);
    let (mut kk, mut inter, mut tr) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut pure = 0;
    for _ in 0..10 {
        let t = scale_to_gauge(&f, &random_tuple(&mut rng, 2, 4), 0.8).unwrap();
        pure += classify(&f, &t, 400).unwrap().pure as usize;
        let r = verify(&f, &t, &fock, 2).unwrap();
        kk = kk.max(r.kk_residual);
        inter = inter.max(r.intertwine_residual);
        tr = tr.max(r.transform_residual);
    }
    Outcome {
        pass: pure == 10 && kk <= bound && inter <= 1e-9 && tr <= 1e-8,
        detail: format!(
            "pure {pure}/10, ‖K*K − I‖ {kk:.3e} ≤ {bound:.3e}, intertwining {inter:.1e}, transform {tr:.1e}"
        ),
    }
}

fn c6() -> Outcome {
    let f = mixed();
    let m = 6;
    let fock = build_fock(&f, m).unwrap();
    let d = 2;
    let model = OperatorTuple::model(&fock, d);
    let low = fock.dim_upto(3);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..50 {
        // co-invariant span of W_β*-images of two random vectors of degree ≤ 3
        let mut span: Vec<CMat> = Vec::new();
        for _ in 0..2 {
            let mut x = CMat::zeros(fock.dim() * d, 1);
            for r in 0..low * d {
                x[(r, 0)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
            for beta in enumerate_words(2, 3) {
                span.push(fock.word_op(Side::Left, &beta).kron_apply_adjoint(&x, d));
            }
        }
        let cols = CMat::from_columns(&span.iter().map(|c| c.column(0).into_owned()).collect::<Vec<_>>());
        let svd = cols.svd(true, false);
        let u = svd.u.unwrap();
        let smax = svd.singular_values.max();
        let keep: Vec<usize> =
            (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-10 * smax).collect();
        let q = CMat::from_columns(&keep.iter().map(|&i| u.column(i).into_owned()).collect::<Vec<_>>());
        let t = model.compress(&q).unwrap();
        let mut c = Coeffs::new();
        for word in enumerate_words(2, 3) {
            if rng.random_bool(0.6) || word.is_empty() {
                c.insert(word, C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        let qt = series_calculus(&f, &t, &c, 3).unwrap().value;
        let lhs = spectral_norm(&qt);
        let rhs = fock.interior_norm(&fock.eval_poly(Side::Left, &c).unwrap(), m).unwrap();
        worst = worst.max(lhs - rhs);
        if lhs > rhs + 1e-10 {
            violations += 1;
            eprintln!("trial {trial}: ‖q(T)‖ = {lhs}, ‖q(W)‖ = {rhs}");
        }
    }
    Outcome {
        pass: violations == 0, detail: format!("{violations} violations, max ‖q(T)‖ − ‖q(W)‖ = {worst:.3e}")
    }
}

fn c7() -> Outcome {
    let ball = FreeSymbol::ball(1);
    let t = OperatorTuple::scalar(&[cr(0.7)]);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mob: f64 = 0.0;
    for _ in 0..20 {
        let z = random_interior(&mut rng, &ball, 0.95)[0];
        let p = char_point(&ball, &t, &[z]).unwrap();
        mob = mob.max((p.theta[(0, 0)] - mobius(0.7, z)).norm());
    }
    let fr1 = factorization_residual(&ball, &t, &build_fock(&ball, 20).unwrap()).unwrap().residual;

    let f = mixed();
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let pair = scale_to_gauge(&f, &random_commuting_tuple(&mut rng, 2, 3), 0.8).unwrap();
    let pure = classify(&f, &pair, 400).unwrap().pure;
    let mut norm: f64 = 0.0;
    for _ in 0..10 {
        let z = random_interior(&mut rng, &f, 0.95);
        norm = norm.max(char_point(&f, &pair, &z).unwrap().norm);
    }
    let fr2 = factorization_residual(&f, &pair, &build_fock(&f, 8).unwrap()).unwrap().residual;
    Outcome {
        pass: mob <= 1e-12 && fr1 <= 1e-10 && pure && norm <= 1.0 + 1e-10 && fr2 <= 1e-7,
        detail: format!(
            "Möbius err {mob:.1e}, scalar factorization {fr1:.1e}, pair pure {pure}, max ‖Θ(z)‖ {norm:.6}, pair factorization {fr2:.1e}"
        ),
    }
}

fn c8() -> Outcome {
    let f = FreeSymbol::ball(1);
    let problem = |b: f64| PickProblem {
        nodes: vec![vec![cr(0.0)], vec![cr(0.5)]],
        targets: vec![CMat::from_element(1, 1, cr(0.0)), CMat::from_element(1, 1, cr(b))],
    };
    let (yes, _) = pick_feasible(&f, &problem(0.5)).unwrap();
    let (no, _) = pick_feasible(&f, &problem(0.9)).unwrap();
    Outcome {
        pass: yes.feasible && yes.min_eig.abs() <= 1e-12 && !no.feasible && no.min_eig < -0.1,
        detail: format!(
            "{{0,½}}: feasible {} min_eig {:.1e}; {{0,0.9}}: feasible {} min_eig {:.4}",
            yes.feasible, yes.min_eig, no.feasible, no.min_eig
        ),
    }
}

fn c9() -> Outcome {
    let p = FreeSymbol::ball(2);
    let m = 6;
    let fock = build_fock(&p, m).unwrap();
    let mut exact = true;
    for c in 1..=3 {
        let cv = curvature(&p, &OperatorTuple::model(&fock, c), m - 1).unwrap();
        exact &= cv.primary.ratios.len() == m - 1 && cv.primary.ratios.iter().all(|&r| r == c as f64);
    }
    let one = FreeSymbol::ball(1);
    let mut star_err: f64 = 0.0;
    let mut star_conv = true;
    for t in [0.3, 0.7] {
        let s = star_curvature(&one, &OperatorTuple::scalar(&[cr(t)]), 200).unwrap();
        star_conv &= s.primary.converged;
        star_err = star_err.max((s.value() - (1.0 - t * t)).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bound = 0;
    for _ in 0..20 {
        let g = rng.random_range(0.1..0.99);
        let d = rng.random_range(1..=4);
        let t = scale_to_gauge(&p, &random_tuple(&mut rng, 2, d), g).unwrap();
        bound += curvature(&p, &t, 60).unwrap().bound_ok as usize;
    }
    Outcome {
        pass: exact && star_conv && star_err <= 1e-6 && bound == 20,
        detail: format!("model ratios exact {exact}, *-curvature err {star_err:.1e}, bound {bound}/20"),
    }
}

fn c10() -> Outcome {
    let coeffs = |items: &[(&[usize], f64)]| -> Coeffs { items.iter().map(|(k, v)| (w(k), cr(*v))).collect() };
    let one = build_fock(&FreeSymbol::ball(1), 8).unwrap();
    let wr = wiener_check(&one, &coeffs(&[(&[], 0.5), (&[0], 0.5)]), 1.0).unwrap();
    let wiener = (wr.levels[0].lhs - 0.5).abs() <= 1e-12 && (wr.levels[0].margin - 0.25).abs() <= 1e-12 && wr.holds;
    let b1 = bohr_margin(&one, &coeffs(&[(&[0], 1.0)]), &[cr(1.0 / 3.0)], 1.0).unwrap();
    let b2 = bohr_margin(&one, &coeffs(&[(&[], 1.0)]), &[cr(0.0)], 1.0).unwrap();
    let two = build_fock(&FreeSymbol::ball(2), 4).unwrap();
    let b3 = bohr_margin(&two, &coeffs(&[(&[0, 1], 1.0)]), &[cr(0.25), cr(0.25)], 1.0).unwrap();
    let bohr =
        (b1.margin - 2.0 / 3.0).abs() <= 1e-12 && b2.margin.abs() <= 1e-12 && (b3.margin - 15.0 / 16.0).abs() <= 1e-12;
    Outcome {
        pass: wiener && bohr,
        detail: format!(
            "Wiener margin {:.15}, Bohr margins {:.15} / {:.1e} / {:.15} (3λ gauge {:.4} for the last)",
            wr.levels[0].margin, b1.margin, b2.margin, b3.margin, b3.gauge_of_3lambda
        ),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run(1, "coefficient recursion", secs(1), c1),
        run(2, "defect identity", secs(5), c2),
        run(3, "reversal conjugation", secs(2), c3),
        run(4, "eigenvectors and kernel", secs(10), c4),
        run(5, "Poisson identities", secs(30), c5),
        run(6, "von Neumann inequality", secs(30), c6),
        run(7, "characteristic function", secs(60), c7),
        run(8, "Pick criterion", secs(1), c8),
        run(9, "curvature", secs(30), c9),
        run(10, "Wiener and Bohr", secs(1), c10),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
