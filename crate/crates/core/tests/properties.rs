use std::collections::{BTreeMap, BTreeSet};

use feynman_core::associativity::{classify, is_associative, reconstruct_gamma, twelve_equations, Classification};
use feynman_core::born_solver::{admissible, admissible_by_perturbation, h_eval, multiplicativity_residual, HFunction};
use feynman_core::pair_algebra::{
    bilinear_mul, commutator, complex_mul, pair_add, scalar_mul, GammaVector, Pair, StandardForm,
};
use feynman_core::reciprocity::{brute_force_grid, rev_pair, solve_reciprocity, ReciprocityOp};
use feynman_core::regrading::{apply_to_pair, mu_of, reduce_to_standard, transform_gamma, Regrading, ReductionResult};
use feynman_core::sequence_lab::{amplitude, parallel, probability, AmplitudeAssignment, Outcome, Sequence};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(r: f64) -> impl Strategy<Value = Pair> {
    (-r..r, -r..r).prop_map(|(a, b)| Pair::new(a, b).unwrap())
}

/// Integer-valued pairs: sums and products of these are exact in f64.
fn int_pair() -> impl Strategy<Value = Pair> {
    (-1000i32..1000, -1000i32..1000).prop_map(|(a, b)| Pair::new(a as f64, b as f64).unwrap())
}

fn int_gamma() -> impl Strategy<Value = GammaVector> {
    prop::array::uniform8(-10i32..10).prop_map(|g| GammaVector::new(g.map(|x| x as f64)).unwrap())
}

fn gamma(r: f64) -> impl Strategy<Value = GammaVector> {
    prop::array::uniform8(-r..r).prop_map(|g| GammaVector::new(g).unwrap())
}

fn family_a(t: f64, f: f64, p: f64, e: f64) -> GammaVector {
    GammaVector::new([t - p * e, f * e, f * e, f, t * e, t, t, p + f * e]).unwrap()
}

fn rel(x: Pair, y: Pair) -> f64 {
    (x - y).max_abs() / x.max_abs().max(y.max_abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pair_add_commutes(a in pair(1e6), b in pair(1e6)) {
        prop_assert_eq!(pair_add(a, b), pair_add(b, a));
    }

    #[test]
    fn pair_add_associates_on_exact_inputs(a in int_pair(), b in int_pair(), c in int_pair()) {
        prop_assert_eq!(pair_add(pair_add(a, b), c), pair_add(a, pair_add(b, c)));
    }

    #[test]
    fn bilinear_distributes(g in int_gamma(), a in int_pair(), b in int_pair(), c in int_pair()) {
        prop_assert_eq!(bilinear_mul(&g, pair_add(a, b), c), pair_add(bilinear_mul(&g, a, c), bilinear_mul(&g, b, c)));
        prop_assert_eq!(bilinear_mul(&g, c, pair_add(a, b)), pair_add(bilinear_mul(&g, c, a), bilinear_mul(&g, c, b)));
    }

    #[test]
    fn bilinear_scales(g in int_gamma(), a in int_pair(), b in int_pair(), r in -100i32..100, s in -100i32..100) {
        let (r, s) = (r as f64, s as f64);
        prop_assert_eq!(bilinear_mul(&g, scalar_mul(r, a), scalar_mul(s, b)), scalar_mul(r * s, bilinear_mul(&g, a, b)));
    }

    #[test]
    fn commutative_family_commutes(t in -2.0..2.0, f in -2.0..2.0, p in -2.0..2.0, e in -2.0..2.0,
                                   a in pair(2.0), b in pair(2.0)) {
        let g = family_a(t, f, p, e);
        prop_assert!(commutator(&g, a, b).max_abs() < 1e-12 * (1.0 + g.max_abs() * a.max_abs() * b.max_abs()));
    }

    #[test]
    fn complex_mul_is_c1_bitwise(a in pair(1e3), b in pair(1e3)) {
        let x = complex_mul(a, b);
        let y = bilinear_mul(&StandardForm::C1.gamma(), a, b);
        prop_assert_eq!(x.c1().to_bits(), y.c1().to_bits());
        prop_assert_eq!(x.c2().to_bits(), y.c2().to_bits());
    }

    #[test]
    fn twelve_equations_agree_with_triples(g in gamma(2.0), a in pair(2.0), b in pair(2.0), c in pair(2.0)) {
        let assoc = is_associative(&g, 1e-9).unwrap();
        let left = bilinear_mul(&g, bilinear_mul(&g, a, b), c);
        let right = bilinear_mul(&g, a, bilinear_mul(&g, b, c));
        let bound = 1e-9 * (1.0 + left.max_abs().max(right.max_abs()));
        if assoc {
            prop_assert!((left - right).max_abs() < bound);
        } else {
            prop_assert!(twelve_equations(&g).max_abs() > 1e-9);
        }
    }

    #[test]
    fn family_round_trip(t in 0.2..2.0f64, f in 0.2..2.0f64, p in 0.2..2.0, e in 0.2..2.0,
                         st in any::<bool>(), sf in any::<bool>()) {
        let t = if st { t } else { -t };
        let f = if sf { f } else { -f };
        let c = Classification::CommutativeA { theta: t, phi: f, psi: p, epsilon: e };
        let back = classify(&reconstruct_gamma(&c).unwrap(), 1e-9).unwrap();
        prop_assert_eq!(back.family_name(), "CommutativeA");
        for (x, y) in back.params().iter().zip(c.params()) {
            prop_assert!((x - y).abs() < 1e-9, "{:?} vs {:?}", back, c);
        }
    }

    #[test]
    fn non_commutative_families_have_witnesses(g1 in 0.1..2.0f64, g2 in 0.1..2.0f64, s in any::<bool>()) {
        let g2 = if s { g2 } else { -g2 };
        for c in [
            Classification::NonCommutativeB { gamma1: g1, gamma2: g2 },
            Classification::NonCommutativeC { gamma1: g1, gamma3: g2 },
        ] {
            let g = reconstruct_gamma(&c).unwrap();
            let basis = [Pair::ONE, Pair::I];
            let witness = basis.iter().any(|&a| basis.iter().any(|&b| commutator(&g, a, b).max_abs() > 1e-12));
            prop_assert!(witness, "{}", c);
        }
    }

    #[test]
    fn regrading_homomorphism(m in prop::array::uniform4(-2.0..2.0f64), g in gamma(2.0), a in pair(2.0), b in pair(2.0)) {
        let m = Regrading::new(m[0], m[1], m[2], m[3]);
        prop_assume!(m.as_ref().is_ok_and(|m| m.det().abs() > 0.1));
        let m = m.unwrap();
        let gp = transform_gamma(&m, &g);
        let lhs = apply_to_pair(&m, bilinear_mul(&g, a, b));
        let rhs = bilinear_mul(&gp, apply_to_pair(&m, a), apply_to_pair(&m, b));
        prop_assert!(rel(lhs, rhs) < 1e-9);
    }

    #[test]
    fn regrading_preserves_sums(m in prop::array::uniform4(-100i32..100), a in int_pair(), b in int_pair()) {
        let m = Regrading::with_tol(m[0] as f64, m[1] as f64, m[2] as f64, m[3] as f64, 1e-300);
        prop_assume!(m.is_ok());
        let m = m.unwrap();
        prop_assert_eq!(apply_to_pair(&m, pair_add(a, b)), pair_add(apply_to_pair(&m, a), apply_to_pair(&m, b)));
    }

    #[test]
    fn mu_is_invariant(t in -2.0..2.0f64, f in -2.0..2.0f64, p in -2.0..2.0f64, e in -2.0..2.0f64,
                       m in prop::array::uniform4(-2.0..2.0f64)) {
        prop_assume!((t - (p + f * e) * e).abs() > 0.1);
        prop_assume!((4.0 * t * f + p * p).abs() > 0.1);
        let m = Regrading::new(m[0], m[1], m[2], m[3]);
        prop_assume!(m.as_ref().is_ok_and(|m| m.det().abs() > 0.1));
        let g = family_a(t, f, p, e);
        let gp = transform_gamma(&m.unwrap(), &g);
        let before = classify(&g, 1e-9).unwrap();
        let after = classify(&gp, 1e-9).unwrap();
        prop_assume!(after.is_associative());
        prop_assert_eq!(mu_of(&before).unwrap(), mu_of(&after).unwrap());
    }

    #[test]
    fn reduction_lands_on_standard(t in -2.0..2.0f64, f in -2.0..2.0f64, p in -2.0..2.0f64, e in -2.0..2.0f64) {
        prop_assume!((t - (p + f * e) * e).abs() > 0.1);
        let g = family_a(t, f, p, e);
        let c = classify(&g, 1e-9).unwrap();
        let r = reduce_to_standard(&c).unwrap();
        let ReductionResult::Reduced { form, map, .. } = r else {
            return Err(TestCaseError::fail(format!("{c} reported inadmissible")));
        };
        prop_assert!(transform_gamma(&map, &g).max_abs_diff(&form.gamma()) < 1e-8);
    }

    #[test]
    fn h_is_multiplicative(fi in 0usize..5, alpha in -2.0..2.0, beta in -2.0..2.0,
                           m in prop::array::uniform4(0.1..2.0f64), s in prop::array::uniform4(any::<bool>())) {
        let form = StandardForm::ALL[fi];
        let v: Vec<f64> = m.iter().zip(s).map(|(x, neg)| if neg { -x } else { *x }).collect();
        let (a, b) = (Pair::new(v[0], v[1]).unwrap(), Pair::new(v[2], v[3]).unwrap());
        let h = HFunction::new(form, alpha, beta);
        if let Ok(r) = multiplicativity_residual(&h, a, b) {
            let prod = h_eval(&h, a).unwrap() * h_eval(&h, b).unwrap();
            prop_assert!(r < 1e-9 * (1.0 + prod.abs()));
        }
    }

    #[test]
    fn born_family_is_rotation_invariant(alpha in -4.0..4.0, theta in 0.0..std::f64::consts::TAU) {
        let h = HFunction::new(StandardForm::C1, alpha, 0.0);
        prop_assert!((h_eval(&h, Pair::new(theta.cos(), theta.sin()).unwrap()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn admissibility_by_perturbation_agrees(fi in 0usize..5,
                                            alpha in prop_oneof![Just(0.0), -2.0..2.0],
                                            beta in prop_oneof![Just(0.0), -2.0..2.0],
                                            base in (0.3..2.0, 0.3..2.0)) {
        let h = HFunction::new(StandardForm::ALL[fi], alpha, beta);
        let base = Pair::new(base.0, base.1).unwrap();
        prop_assert_eq!(admissible_by_perturbation(&h, base, 0.25).unwrap(), admissible(&h));
    }

    #[test]
    fn h_is_nonnegative(fi in 0usize..5, alpha in -3.0..3.0, beta in -3.0..3.0, a in pair(3.0)) {
        if let Ok(v) = h_eval(&HFunction::new(StandardForm::ALL[fi], alpha, beta), a) {
            prop_assert!(v >= 0.0);
        }
    }

    #[test]
    fn rev_pair_is_linear(r in prop::array::uniform4(-100i32..100), a in int_pair(), b in int_pair()) {
        let op = ReciprocityOp::new(r[0] as f64, r[1] as f64, r[2] as f64, r[3] as f64).unwrap();
        prop_assert_eq!(rev_pair(&op, pair_add(a, b)), pair_add(rev_pair(&op, a), rev_pair(&op, b)));
    }
}

/// Table entries uniform in the unit square, complete over `labels`.
fn random_tables(seed: u64, labels: &[u32], intervals: usize) -> AmplitudeAssignment {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables = (0..intervals)
        .map(|_| {
            let mut t = BTreeMap::new();
            for &i in labels {
                for &j in labels {
                    t.insert((i, j), Pair::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)).unwrap());
                }
            }
            t
        })
        .collect();
    AmplitudeAssignment::new(tables)
}

fn refinements(outcomes: &[BTreeSet<u32>]) -> Vec<Vec<u32>> {
    outcomes.iter().fold(vec![Vec::new()], |acc, o| {
        acc.into_iter()
            .flat_map(|p| {
                o.iter().map(move |&l| {
                    let mut q = p.clone();
                    q.push(l);
                    q
                })
            })
            .collect()
    })
}

fn coarse_sequence() -> impl Strategy<Value = (Vec<BTreeSet<u32>>, u64)> {
    (3usize..=6).prop_flat_map(|len| {
        let interior = prop::collection::btree_set(1u32..=4, 1..=4);
        (
            (1u32..=4, prop::collection::vec(interior, len - 2), 1u32..=4).prop_map(|(f, mid, l)| {
                let mut v = vec![BTreeSet::from([f])];
                v.extend(mid);
                v.push(BTreeSet::from([l]));
                v
            }),
            any::<u64>(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn expansion_order_does_not_matter((outcomes, seed) in coarse_sequence(), shuffle in any::<u64>()) {
        use rand::seq::SliceRandom;
        let asg = random_tables(seed, &[1, 2, 3, 4], outcomes.len() - 1);
        let s = Sequence::new("p", 0, outcomes.iter().map(|o| Outcome::new(o.iter().copied()).unwrap()).collect()).unwrap();
        let amp = amplitude(&s, &asg).unwrap();
        let mut paths = refinements(&outcomes);
        paths.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let mut sum = Pair::ZERO;
        for p in &paths {
            let atomic = Sequence::from_labels("p", 0, p).unwrap();
            sum = pair_add(sum, amplitude(&atomic, &asg).unwrap());
        }
        prop_assert!(rel(amp, sum) < 1e-12);
        prop_assert!(probability(&s, &asg).unwrap() >= 0.0);
    }

    #[test]
    fn parallel_is_a_homomorphism((outcomes, seed) in coarse_sequence(), k in 1usize..5, split in any::<u64>()) {
        use rand::Rng;
        let k = 1 + k % (outcomes.len() - 2);
        let all: Vec<u32> = outcomes[k].iter().copied().collect();
        prop_assume!(all.len() >= 2);
        let cut = ChaCha8Rng::seed_from_u64(split).gen_range(1..all.len());
        let asg = random_tables(seed, &[1, 2, 3, 4], outcomes.len() - 1);
        let build = |labels: &[u32]| {
            let mut o: Vec<Outcome> = outcomes.iter().map(|x| Outcome::new(x.iter().copied()).unwrap()).collect();
            o[k] = Outcome::new(labels.iter().copied()).unwrap();
            Sequence::new("p", 0, o).unwrap()
        };
        let (a, b) = (build(&all[..cut]), build(&all[cut..]));
        let ab = parallel(&a, &b).unwrap();
        prop_assert_eq!(&ab, &build(&all));
        let lhs = amplitude(&ab, &asg).unwrap();
        let rhs = pair_add(amplitude(&a, &asg).unwrap(), amplitude(&b, &asg).unwrap());
        prop_assert!(rel(lhs, rhs) < 1e-12);
    }
}

#[test]
fn reciprocity_grid_hits_lie_on_solutions() {
    for form in [StandardForm::C1, StandardForm::C2, StandardForm::C3] {
        let sol = solve_reciprocity(form);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hits = brute_force_grid(form, -2.0, 2.0, 0.25, 100, 1e-6, &mut rng);
        assert!(!hits.is_empty());
        for r in hits {
            assert!(sol.distance(r) <= 0.125, "{form}: {r:?} is {} from every solution", sol.distance(r));
        }
    }
}

#[test]
fn singular_family_draws_are_inadmissible() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let (f, p, e): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let g = family_a((p + f * e) * e, f, p, e);
        let c = classify(&g, 1e-9).unwrap();
        assert!(c.is_associative());
        assert!(matches!(reduce_to_standard(&c).unwrap(), ReductionResult::Inadmissible { .. }), "{c}");
    }
}
