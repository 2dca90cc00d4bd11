use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::Rat;
use crate::rootdata::Kind;

type QMat = Vec<Vec<Rat>>;

fn q(n: i128) -> Rat {
    Rat::from_integer(n)
}

fn identity(d: usize) -> QMat {
    (0..d).map(|i| (0..d).map(|j| q((i == j) as i128)).collect()).collect()
}

fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    let d = a.len();
    let mut out = vec![vec![q(0); d]; d];
    for i in 0..d {
        for k in 0..d {
            if a[i][k] != q(0) {
                for j in 0..d {
                    out[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    out
}

fn divided_power(x: &QMat, n: u16) -> QMat {
    let mut acc = identity(x.len());
    for k in 1..=n {
        acc = mat_mul(&acc, x);
        acc = acc.iter().map(|r| r.iter().map(|v| v / q(k as i128)).collect()).collect();
    }
    acc
}

fn binom_diag(h: &QMat, n: u16) -> QMat {
    let d = h.len();
    let mut out = identity(d);
    for i in 0..d {
        assert!(h[i][i].is_integer());
        let v = *h[i][i].numer();
        out[i][i] = q(crate::field::binom_i128(v, n as u32).unwrap());
    }
    out
}

/// Image of a PBW monomial on a module with Chevalley matrices `mats`.
fn rep_of_key(rs: &RootSystem, mats: &[QMat], key: &PbwKey) -> QMat {
    let d = mats[0].len();
    let mut acc = identity(d);
    for k in 0..rs.num_pos() {
        acc = mat_mul(&acc, &divided_power(&mats[k], key.e[k]));
    }
    for i in 0..rs.rank {
        acc = mat_mul(&acc, &binom_diag(&mats[rs.h_index(i)], key.h[i]));
    }
    for k in 0..rs.num_pos() {
        acc = mat_mul(&acc, &divided_power(&mats[rs.f_index(k)], key.f[k]));
    }
    acc
}

fn random_key(rng: &mut ChaCha8Rng, rs: &RootSystem, max: u16) -> PbwKey {
    let mut k = PbwKey::ONE;
    let mut budget = rng.gen_range(0..=max);
    while budget > 0 {
        let slot = rng.gen_range(0..2 * rs.num_pos() + rs.rank);
        if slot < rs.num_pos() {
            k.e[slot] += 1;
        } else if slot < rs.num_pos() + rs.rank {
            k.h[slot - rs.num_pos()] += 1;
        } else {
            k.f[slot - rs.num_pos() - rs.rank] += 1;
        }
        budget -= 1;
    }
    k
}

#[test]
fn products_match_module_oracle() {
    let cases: Vec<(Kind, Vec<Vec<i64>>)> = vec![
        (Kind::A1, vec![vec![1], vec![2], vec![3], vec![5]]),
        (Kind::A2, vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1]]),
        (Kind::B2, vec![vec![1, 0], vec![0, 1], vec![1, 1]]),
        (Kind::G2, vec![vec![1, 0], vec![0, 1]]),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (kind, weights) in cases {
        let rs = Arc::new(RootSystem::build(kind));
        let eng = zform::Engine::new(rs.clone(), 200);
        let mods: Vec<Vec<QMat>> = weights.iter().map(|w| rs.module_matrices(&Weight::new(w.clone()))).collect();
        for _ in 0..60 {
            let a = random_key(&mut rng, &rs, 4);
            let b = random_key(&mut rng, &rs, 4);
            let prod = eng.mul_keys(a, b).unwrap();
            for mats in &mods {
                let lhs = mat_mul(&rep_of_key(&rs, mats, &a), &rep_of_key(&rs, mats, &b));
                let d = lhs.len();
                let mut rhs = vec![vec![q(0); d]; d];
                for (k, c) in prod.iter() {
                    let m = rep_of_key(&rs, mats, k);
                    for i in 0..d {
                        for j in 0..d {
                            rhs[i][j] += m[i][j] * q(*c);
                        }
                    }
                }
                assert_eq!(lhs, rhs, "{kind}: {a:?} * {b:?}");
            }
        }
    }
}

fn alg(kind: Kind, p: u32) -> Hyperalgebra {
    Hyperalgebra::new(Arc::new(RootSystem::build(kind)), p).unwrap()
}

#[test]
fn sl2_basic_products() {
    let h = alg(Kind::A1, 7);
    let e1 = h.e(0, 1);
    assert_eq!(h.mul(&e1, &e1).unwrap(), h.scale(&h.e(0, 2), 2));
    for (a, b) in [(1, 2), (2, 3), (3, 3)] {
        let lhs = h.mul(&h.e(0, a), &h.e(0, b)).unwrap();
        let c = h.field().binom((a + b) as i64, a as u64);
        assert_eq!(lhs, h.scale(&h.e(0, a + b), c));
    }
    // E F is already in normal order; F E = E F - H
    let mut k = PbwKey::ONE;
    k.e[0] = 1;
    k.f[0] = 1;
    assert_eq!(h.mul(&e1, &h.f(0, 1)).unwrap(), HyperElt::from_key(k));
    let fe = h.mul(&h.f(0, 1), &e1).unwrap();
    let mut expect = HyperElt::from_key(k);
    h.add_term(&mut expect, PbwKey { h: [1, 0], ..PbwKey::ONE }, 6);
    assert_eq!(fe, expect);
}

#[test]
fn text_round_trip() {
    let h = alg(Kind::A2, 5);
    let x = h.mul(&h.f(0, 2), &h.e(1, 3)).unwrap();
    let x = h.add(&x, &h.mu0());
    let text = h.to_text(&x);
    assert_eq!(h.parse_text(&text).unwrap(), x);
    assert!(h.parse_text("E[1] H[0,0] F[0,0,0] : 1").is_err());
}

#[test]
fn hopf_identities_small() {
    let h = alg(Kind::A2, 3);
    let one = h.one();
    assert_eq!(h.antipode(&one).unwrap(), one);
    assert_eq!(h.counit(&one), 1);
    assert_eq!(h.antipode(&h.e(0, 1)).unwrap(), h.neg(&h.e(0, 1)));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let k = random_key(&mut rng, h.rs(), 4);
        // sum sigma(a_1) a_2 = eps(a)
        let mut acc = HyperElt::zero();
        for (k1, k2) in h.comult_key(&k) {
            let s = h.antipode_key(&k1).unwrap();
            h.add_assign(&mut acc, &h.mul(&s, &HyperElt::from_key(k2)).unwrap(), 1);
        }
        let expect = if k.is_one() { h.one() } else { HyperElt::zero() };
        assert_eq!(acc, expect, "{k:?}");
    }
}

#[test]
fn mu0_and_characters() {
    for (kind, p) in [(Kind::A1, 3), (Kind::A2, 5), (Kind::B2, 3)] {
        let h = alg(kind, p);
        let mu = h.mu0();
        assert_eq!(h.mul(&mu, &mu).unwrap(), mu);
        assert_eq!(h.frobenius(&mu), h.one());
        let rho = h.rs().rho();
        assert_eq!(h.character(&rho, &mu).unwrap(), 0);
        assert_eq!(h.character(&Weight::zero(h.rank()), &mu).unwrap(), 1);
        assert_eq!(h.character(&rho.scale(p as i64), &mu).unwrap(), 1);
        assert!(h.character(&rho, &h.e(0, 1)).is_err());
    }
}

#[test]
fn frobenius_and_fr_prime() {
    let h = alg(Kind::A2, 3);
    assert_eq!(h.frobenius(&h.e(0, 3)), h.e(0, 1));
    assert!(h.frobenius(&h.e(0, 1)).is_zero());
    let w = GenWord::new(vec![Atom::E(0, 1)]);
    assert_eq!(h.fr_prime_word(&w).unwrap(), h.e(0, 3));
    assert_eq!(h.fr_prime_word(&GenWord::default()).unwrap(), h.one());
    assert!(h.fr_prime_word(&GenWord::new(vec![Atom::F(0, 1)])).is_err());
    let w = GenWord::new(vec![Atom::E(1, 1), Atom::E(0, 1)]);
    let x = h.normalize(&w).unwrap();
    assert_eq!(h.frobenius(&h.fr_prime_word(&w).unwrap()), x);
    let phi = h.phi_word(&GenWord::new(vec![Atom::F(0, 1), Atom::E(1, 2), Atom::H(0, 1)])).unwrap();
    assert_eq!(
        h.frobenius(&phi),
        h.normalize(&GenWord::new(vec![Atom::F(0, 1), Atom::E(1, 2), Atom::H(0, 1)])).unwrap()
    );
    assert_eq!(h.phi_word(&GenWord::default()).unwrap(), h.mu0());
    assert!(h.fr_prime_pbw(&h.f0(), Side::Plus).is_err());
    assert_eq!(h.fr_prime_pbw(&h.f0(), Side::Minus).unwrap(), HyperElt::from_key(h.f0_key().map_components(|x| 3 * x)));
}

#[test]
fn e0_central_a1() {
    let h = alg(Kind::A1, 3);
    assert_eq!(h.e0(), h.e(0, 2));
    assert_eq!(h.weight_of(&h.e0_key()), h.rs().rho().scale(4));
    let e1 = h.e(0, 1);
    assert_eq!(h.mul(&h.e0(), &e1).unwrap(), h.mul(&e1, &h.e0()).unwrap());
    for m in 1..3 {
        assert!(h.adjoint(&h.e(0, m), &h.e0()).unwrap().is_zero());
    }
}

#[test]
fn adjoint_bracket_a2() {
    let h = alg(Kind::A2, 5);
    let x = h.adjoint(&h.e(0, 1), &h.e(1, 1)).unwrap();
    // [e_1, e_2] = e_theta with the chosen signs
    assert_eq!(x, h.e_root(1, 1));
    assert_eq!(h.adjoint(&h.one(), &h.e(1, 1)).unwrap(), h.e(1, 1));
}

#[test]
fn fr_prime_on_non_simple_root() {
    let rs = Arc::new(RootSystem::build(Kind::A2));
    for p in [3u32, 5] {
        let h = Hyperalgebra::with_cap(rs.clone(), p, (p * p + p) as u16).unwrap();
        // E_theta = E_1 E_2 - E_2 E_1 in this Chevalley basis
        let w12 = GenWord::new(vec![Atom::E(0, 1), Atom::E(1, 1)]);
        let w21 = GenWord::new(vec![Atom::E(1, 1), Atom::E(0, 1)]);
        assert_eq!(h.sub(&h.normalize(&w12).unwrap(), &h.normalize(&w21).unwrap()), h.e_root(1, 1));
        let by_words = h.sub(&h.fr_prime_word(&w12).unwrap(), &h.fr_prime_word(&w21).unwrap());
        let stretched = h.fr_prime_pbw(&h.e_root(1, 1), Side::Plus).unwrap();
        // the stretch is not the algebra morphism on non-simple roots ...
        assert_ne!(by_words, stretched);
        // ... but the two agree after left multiplication by E_0
        let e0 = h.e0();
        assert_eq!(h.mul(&e0, &by_words).unwrap(), h.mul(&e0, &stretched).unwrap());
    }
}

#[test]
fn e0_fr_prime_matches_stretch_on_words() {
    let rs = Arc::new(RootSystem::build(Kind::A2));
    let p = 3u32;
    let h = Hyperalgebra::with_cap(rs, p, 20).unwrap();
    let e0 = h.e0();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..60 {
        let len = rng.gen_range(1..=3);
        let atoms: Vec<Atom> = (0..len).map(|_| Atom::E(rng.gen_range(0..2), rng.gen_range(1..=2))).collect();
        let w = GenWord::new(atoms);
        let exact = h.mul(&e0, &h.fr_prime_word(&w).unwrap()).unwrap();
        let stretched = h.mul(&e0, &h.fr_prime_pbw(&h.normalize(&w).unwrap(), Side::Plus).unwrap()).unwrap();
        assert_eq!(exact, stretched, "{w:?}");
    }
}
