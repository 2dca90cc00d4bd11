use std::sync::{Arc, OnceLock};

use hypersplit::dualring::{DualPoly, DualRing};
use hypersplit::hyperalg::{Side, MAX_ROOTS};
use hypersplit::splitring::{GradedSection, SplitRing, Truncation};
use hypersplit::{Atom, GenWord, HyperElt, Hyperalgebra, Kind, PbwKey, RootSystem, Weight};
use proptest::prelude::*;

fn a2() -> &'static Arc<Hyperalgebra> {
    static ALG: OnceLock<Arc<Hyperalgebra>> = OnceLock::new();
    ALG.get_or_init(|| Arc::new(Hyperalgebra::with_cap(Arc::new(RootSystem::build(Kind::A2)), 3, 24).unwrap()))
}

fn a2_dual() -> &'static DualRing {
    static DR: OnceLock<DualRing> = OnceLock::new();
    DR.get_or_init(|| DualRing::new(a2().clone(), 12).unwrap())
}

fn a1_ring() -> &'static SplitRing {
    static R: OnceLock<SplitRing> = OnceLock::new();
    R.get_or_init(|| SplitRing::new(Arc::new(RootSystem::build(Kind::A1)), 3, Truncation { dx: 12, dn: 12 }).unwrap())
}

fn key(e: [u16; 3], h: [u16; 2], f: [u16; 3]) -> PbwKey {
    let mut k = PbwKey::ONE;
    k.e[..3].copy_from_slice(&e);
    k.h.copy_from_slice(&h);
    k.f[..3].copy_from_slice(&f);
    k
}

fn small_key() -> impl Strategy<Value = PbwKey> {
    ([0u16..3, 0..3, 0..3], [0u16..2, 0..2], [0u16..3, 0..3, 0..3]).prop_map(|(e, h, f)| key(e, h, f))
}

fn e_word() -> impl Strategy<Value = GenWord> {
    prop::collection::vec((0usize..2, 0u32..3), 0..4).prop_map(|v| GenWord::new(v.into_iter().map(|(i, n)| Atom::E(i, n)).collect()))
}

fn exps3(max: u16) -> impl Strategy<Value = [u16; MAX_ROOTS]> {
    [0..=max, 0..=max, 0..=max].prop_map(|v| {
        let mut e = [0; MAX_ROOTS];
        e[..3].copy_from_slice(&v);
        e
    })
}

/// Binomial coefficient mod p by Lucas' theorem.
fn lucas(mut n: u32, mut k: u32, p: u32) -> u32 {
    let mut out = 1u64;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        let c = (0..b).fold(1u64, |acc, j| acc * (a - j) as u64 / (j + 1) as u64);
        out = out * (c % p as u64) % p as u64;
        n /= p;
        k /= p;
    }
    out as u32
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_are_associative(a in small_key(), b in small_key(), c in small_key()) {
        let alg = a2();
        let (ea, eb, ec) = (HyperElt::from_key(a), HyperElt::from_key(b), HyperElt::from_key(c));
        let lhs = alg.mul(&alg.mul(&ea, &eb).unwrap(), &ec).unwrap();
        let rhs = alg.mul(&ea, &alg.mul(&eb, &ec).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn divided_powers_multiply_by_binomials(i in 0usize..2, a in 0u32..12, b in 0u32..12) {
        let alg = a2();
        let lhs = alg.mul(&alg.e(i, a), &alg.e(i, b)).unwrap();
        let rhs = alg.scale(&alg.e(i, a + b), lucas(a + b, a, 3));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn frobenius_undoes_stretch(w in e_word()) {
        let alg = a2();
        prop_assert_eq!(alg.frobenius(&alg.fr_prime_word(&w).unwrap()), alg.normalize(&w).unwrap());
    }

    #[test]
    fn frobenius_is_multiplicative(a in small_key(), b in small_key()) {
        let alg = a2();
        let (ea, eb) = (HyperElt::from_key(a), HyperElt::from_key(b));
        let lhs = alg.frobenius(&alg.mul(&ea, &eb).unwrap());
        let rhs = alg.mul(&alg.frobenius(&ea), &alg.frobenius(&eb)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn mu0_character_detects_p_divisibility(a in -9i64..9, b in -9i64..9) {
        let alg = a2();
        let v = alg.character(&Weight::new(vec![a, b]), &alg.mu0()).unwrap();
        prop_assert_eq!(v, (a % 3 == 0 && b % 3 == 0) as u32);
    }

    #[test]
    fn trace_is_frobenius_linear(g in exps3(1), h in exps3(5)) {
        let dr = a2_dual();
        let (gm, hm) = (DualPoly::monomial(Side::Minus, g), DualPoly::monomial(Side::Minus, h));
        let lhs = dr.trace_minus(&dr.mul(&dr.fr_star(&gm), &hm).unwrap()).unwrap();
        let rhs = dr.mul(&gm, &dr.trace_minus(&hm).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn fr_star_is_pth_power(e in exps3(2)) {
        let dr = a2_dual();
        let f = DualPoly::monomial(Side::Plus, e);
        let cube = dr.mul(&dr.mul(&f, &f).unwrap(), &f).unwrap();
        prop_assert_eq!(dr.fr_star(&f), cube);
    }

    #[test]
    fn splitting_inverts_pth_power(x in 0u16..4, y in 0u16..4, c in 1u32..3) {
        let r = a1_ring();
        let mut ex = [0; MAX_ROOTS];
        let mut ey = [0; MAX_ROOTS];
        ex[0] = x;
        ey[0] = y;
        let f = GradedSection::monomial(Weight::zero(1), ex, ey, c);
        prop_assert_eq!(r.sigma_tot(&r.frt_star(&f).unwrap()).unwrap(), f);
    }

    #[test]
    fn section_text_round_trips(x in 0u16..9, y in 0u16..9, c in 1u32..3, lam in -3i64..3) {
        let r = a1_ring();
        let mut ex = [0; MAX_ROOTS];
        let mut ey = [0; MAX_ROOTS];
        ex[0] = x;
        ey[0] = y;
        let f = GradedSection::monomial(Weight::new(vec![lam]), ex, ey, c);
        let back = GradedSection::parse_text(&f.to_text(1), 1, 1, r.field()).unwrap();
        prop_assert_eq!(back, f);
    }
}
