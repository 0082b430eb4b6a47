use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use theta_core::localfield::truncated::{TruncField, TruncatedElement};
use theta_core::localfield::{
    lt_mul, lt_neg, relative_conjugate, square_class, LeadingTerm, QuadStep, Sym, TameField,
    TameFieldDescriptor,
};
use theta_core::quadform::{hilbert_brute_force, hilbert_symbol, invariants_gram, invariants_transfer};
use theta_core::sample;
use theta_core::theta::{lift, TauChoice};
use theta_core::torusdata::{
    block_decompose, datum_equivalent, is_general_position, residue_reduction, weyl_orbit,
    EquivalenceMode, FiniteTorusDatum,
};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sym() -> impl Strategy<Value = Sym> {
    prop_oneof![Just(Sym::Fixed), Just(Sym::Anti), Just(Sym::None)]
}

fn step() -> impl Strategy<Value = QuadStep> {
    prop_oneof![
        Just(QuadStep::Unramified),
        Just(QuadStep::Ramified),
        Just(QuadStep::RamifiedTwisted)
    ]
}

fn tower() -> impl Strategy<Value = TameFieldDescriptor> {
    (prop_oneof![Just(3u64), Just(5), Just(7)], 1u32..=2, step())
        .prop_map(|(p, m, s)| TameFieldDescriptor::new(p, 1, m, s))
}

fn term(t: TameFieldDescriptor, val: i64, idx: u64) -> LeadingTerm {
    let field = TameField::get(t).unwrap();
    let res = field.residue();
    let r = res.element(1 + idx % (res.order() - 1));
    LeadingTerm::new(&field, val, r, Sym::None).unwrap()
}

fn base_term(p: u64, val: i64, idx: u64) -> LeadingTerm {
    let field = TameField::get(TameFieldDescriptor::base(p, 1)).unwrap();
    LeadingTerm::new(&field, val, field.residue().element(1 + idx % (p - 1)), Sym::None).unwrap()
}

fn random_truncated(field: &std::sync::Arc<TruncField>, coeffs: &[i64], shift: i64) -> TruncatedElement {
    let d = field.circ_degree();
    let mut x = TruncatedElement::from_int(field, 0);
    for (j, &c) in coeffs.iter().enumerate() {
        let mut term = TruncatedElement::from_int(field, c).mul(&TruncatedElement::xi_power(field, j % d));
        if j >= d {
            term = term.mul(&TruncatedElement::t(field).unwrap());
        }
        x = x.add(&term);
    }
    x.mul_p_power(shift)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flag_algebra(a in sym(), b in sym(), c in sym()) {
        prop_assert_eq!(a.compose(b), b.compose(a));
        prop_assert_eq!(a.compose(b).compose(c), a.compose(b.compose(c)));
        if a != Sym::None {
            prop_assert_eq!(Sym::Fixed.compose(a), a);
            prop_assert_eq!(a.compose(a), Sym::Fixed);
        }
    }

    #[test]
    fn flags_multiply(t in tower(), v in -3i64..3, w in -3i64..3, i in any::<u64>(), j in any::<u64>(), a in sym(), b in sym()) {
        let x = term(t, v, i).with_sym(a);
        let y = term(t, w, j).with_sym(b);
        prop_assert_eq!(lt_mul(&x, &y).unwrap().sym(), a.compose(b));
    }

    #[test]
    fn square_class_is_a_homomorphism(t in tower(), v in -4i64..4, w in -4i64..4, i in any::<u64>(), j in any::<u64>()) {
        let x = term(t, v, i);
        let y = term(t, w, j);
        prop_assert_eq!(square_class(&lt_mul(&x, &y).unwrap()), square_class(&x).mul(square_class(&y)));
    }

    #[test]
    fn relative_conjugation_is_an_involution(t in tower(), v in -4i64..4, i in any::<u64>(), w in -4i64..4, j in any::<u64>()) {
        let x = term(t, v, i);
        let y = term(t, w, j);
        let xbar = relative_conjugate(&x).unwrap();
        prop_assert_eq!(relative_conjugate(&xbar).unwrap(), x.clone());
        prop_assert_eq!(
            relative_conjugate(&lt_mul(&x, &y).unwrap()).unwrap(),
            lt_mul(&xbar, &relative_conjugate(&y).unwrap()).unwrap()
        );
    }

    #[test]
    fn leading_terms_are_multiplicative(
        t in tower(),
        a in proptest::collection::vec(-40i64..40, 4),
        b in proptest::collection::vec(-40i64..40, 4),
        s1 in 0i64..2,
        s2 in 0i64..2,
    ) {
        let field = TruncField::new(t, 5).unwrap();
        let x = random_truncated(&field, &a, s1);
        let y = random_truncated(&field, &b, s2);
        prop_assume!(!x.is_zero_at_precision() && !y.is_zero_at_precision());
        let (Ok(lx), Ok(ly)) = (x.leading_term(Sym::None), y.leading_term(Sym::None)) else {
            return Err(TestCaseError::reject("leading term beyond precision"));
        };
        let lxy = x.mul(&y).leading_term(Sym::None).unwrap();
        prop_assert_eq!(lxy, lt_mul(&lx, &ly).unwrap());
    }

    #[test]
    fn hilbert_symbol_laws(p in prop_oneof![Just(3u64), Just(5), Just(7)], va in -2i64..3, vb in -2i64..3, vc in -2i64..3, i in any::<u64>(), j in any::<u64>(), k in any::<u64>()) {
        let a = base_term(p, va, i);
        let b = base_term(p, vb, j);
        let c = base_term(p, vc, k);
        let ab = hilbert_symbol(&a, &b).unwrap();
        prop_assert_eq!(ab, hilbert_symbol(&b, &a).unwrap());
        prop_assert_eq!(
            hilbert_symbol(&a, &lt_mul(&b, &c).unwrap()).unwrap(),
            ab * hilbert_symbol(&a, &c).unwrap()
        );
        prop_assert_eq!(hilbert_symbol(&a, &lt_neg(&a)).unwrap(), 1);
        prop_assert_eq!(ab, hilbert_brute_force(&a, &b).unwrap());
    }

    #[test]
    fn orbit_laws(q in prop_oneof![Just(3u64), Just(5)], ms in proptest::collection::vec(1u32..=2, 1..=3), seeds in proptest::collection::vec(any::<i64>(), 3)) {
        let chi: Vec<i64> = ms.iter().zip(&seeds).map(|(&m, &s)| s.rem_euclid(q.pow(m) as i64 + 1)).collect();
        let fd = FiniteTorusDatum { q, ms: ms.clone(), exponents: chi.clone(), source: (0..ms.len()).collect() };
        let orbit = weyl_orbit(&fd, &chi);
        prop_assert_eq!(fd.weyl_order() % orbit.len() as u64, 0);
        let gp = is_general_position(&fd, &chi);
        for other in &orbit {
            prop_assert_eq!(is_general_position(&fd, other), gp);
            prop_assert_eq!(&weyl_orbit(&fd, other), &orbit);
        }
    }

    #[test]
    fn residue_dimensions_add_up(seed in any::<u64>(), p in prop_oneof![Just(5u64), Just(7)]) {
        let d = sample::depth_zero_datum(&mut rng(seed), p, 4);
        let (w1, w2) = residue_reduction(&d).unwrap();
        prop_assert_eq!(w1.dim() + w2.dim(), 2 * d.n());
    }

    #[test]
    fn blocks_recombine(seed in any::<u64>(), p in prop_oneof![Just(5u64), Just(7)]) {
        let d = sample::mixed_datum(&mut rng(seed), p, 4);
        let blocks = block_decompose(&d);
        let mut seen: Vec<usize> = blocks.levels.iter().flat_map(|(_, idx)| idx.clone()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..d.factors.len()).collect::<Vec<_>>());
        let parts = blocks.blocks(&d);
        prop_assert_eq!(blocks.recombine(&parts).unwrap(), d);
    }

    #[test]
    fn equivalence_is_reflexive_and_symmetric(seed in any::<u64>(), p in prop_oneof![Just(5u64), Just(7)]) {
        let mut r = rng(seed);
        let a = sample::mixed_datum(&mut r, p, 3);
        let b = lift(&a, TauChoice::Seeded(seed)).unwrap().lifted;
        let c = lift(&a, TauChoice::Canonical).unwrap().lifted;
        for mode in [EquivalenceMode::Strict, EquivalenceMode::UpToWeyl] {
            prop_assert!(datum_equivalent(&a, &a, mode).unwrap());
            prop_assert_eq!(datum_equivalent(&b, &c, mode).unwrap(), datum_equivalent(&c, &b, mode).unwrap());
        }
    }

    #[test]
    fn invariant_paths_agree(seed in any::<u64>(), p in prop_oneof![Just(3u64), Just(5), Just(7)]) {
        let cs = sample::orthogonal_cs(&mut rng(seed), p, 4);
        prop_assert_eq!(invariants_transfer(&cs).unwrap(), invariants_gram(&cs, None).unwrap());
    }
}

#[test]
fn equivalence_relation_on_random_data() {
    let mut r = rng(11);
    let mut pool = Vec::new();
    for i in 0..200u64 {
        let p = if i % 2 == 0 { 5 } else { 7 };
        let d = sample::mixed_datum(&mut r, p, 3);
        let chain: Vec<_> = (0..3).map(|s| lift(&d, TauChoice::Seeded(10 * i + s)).unwrap().lifted).collect();
        for mode in [EquivalenceMode::Strict, EquivalenceMode::UpToWeyl] {
            assert!(datum_equivalent(&d, &d, mode).unwrap());
            let e01 = datum_equivalent(&chain[0], &chain[1], mode).unwrap();
            let e12 = datum_equivalent(&chain[1], &chain[2], mode).unwrap();
            if e01 && e12 {
                assert!(datum_equivalent(&chain[0], &chain[2], mode).unwrap());
            }
        }
        pool.push(chain.into_iter().next().unwrap());
    }
    for w in pool.windows(3) {
        let mode = EquivalenceMode::UpToWeyl;
        let ab = datum_equivalent(&w[0], &w[1], mode).unwrap();
        assert_eq!(ab, datum_equivalent(&w[1], &w[0], mode).unwrap());
        if ab && datum_equivalent(&w[1], &w[2], mode).unwrap() {
            assert!(datum_equivalent(&w[0], &w[2], mode).unwrap());
        }
    }
}
