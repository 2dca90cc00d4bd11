use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::rootdata::Kind;

fn ring(kind: Kind, p: u32, d: u32) -> SplitRing {
    SplitRing::new(Arc::new(RootSystem::build(kind)), p, Truncation { dx: d, dn: d }).unwrap()
}

fn zero_weight(r: &SplitRing) -> Weight {
    Weight::zero(r.rank())
}

fn exps(v: &[u16]) -> Exps {
    let mut e = [0; MAX_ROOTS];
    e[..v.len()].copy_from_slice(v);
    e
}

fn mono(r: &SplitRing, x: &[u16], y: &[u16]) -> GradedSection {
    GradedSection::monomial(zero_weight(r), exps(x), exps(y), 1)
}

/// All zero-weight monomials `x^a y^b` with `|b| = grade` and `|a| <= dx`.
fn zero_weight_monomials(r: &SplitRing, grade: u32, dx: u32) -> Vec<SecKey> {
    let rs = r.alg().rs();
    let mut out = Vec::new();
    for b in monomials_of_degree(r.n(), grade) {
        for a in monomials_of_root_weight(rs, exps_root(rs, &b)) {
            if degree(&a) <= dx {
                out.push((a, b));
            }
        }
    }
    out
}

fn random_section(r: &SplitRing, rng: &mut ChaCha8Rng, keys: &[SecKey], shift: u32) -> GradedSection {
    let p = r.p();
    let mut terms = BTreeMap::new();
    for k in keys {
        if rng.gen_bool(0.5) {
            terms.insert(*k, rng.gen_range(1..p));
        }
    }
    GradedSection { lambda: zero_weight(r), shift, terms }
}

#[test]
fn products_and_text() {
    let r = ring(Kind::A2, 3, 12);
    let e = GradedSection::unit(zero_weight(&r));
    let f = mono(&r, &[1, 0, 2], &[0, 1, 0]);
    assert_eq!(r.ring_mult(&e, &f).unwrap(), f);
    let xb = mono(&r, &[0, 1, 0], &[0, 0, 0]);
    let yb = mono(&r, &[0, 0, 0], &[0, 1, 0]);
    let prod = r.ring_mult(&xb, &yb).unwrap();
    assert_eq!(prod, mono(&r, &[0, 1, 0], &[0, 1, 0]));
    assert_eq!(prod.grades(), BTreeSet::from([1]));
    let text = prod.to_text(r.n());
    assert_eq!(GradedSection::parse_text(&text, r.rank(), r.n(), r.field()).unwrap(), prod);
    assert!(GradedSection::parse_text("lambda=0 shift=0", 2, 3, r.field()).is_err());
    assert!(GradedSection::parse_text("lambda=0,0\nx=1,0 y=0,0,0 c=1", 2, 3, r.field()).is_err());
    let big = mono(&r, &[0, 0, 0], &[7, 0, 0]);
    assert!(matches!(r.ring_mult(&big, &big), Err(Error::TruncationExceeded(_))));
    let twisted = GradedSection::unit(r.alg().rs().rho());
    assert!(matches!(r.ring_mult(&twisted, &e), Err(Error::LambdaMismatch(_))));
}

#[test]
fn evaluation_basics() {
    let r = ring(Kind::A2, 3, 12);
    let alg = r.alg();
    let fld = r.field();
    let e = GradedSection::unit(zero_weight(&r));
    let xs = [alg.one(), alg.f(0, 1), alg.e(1, 2), alg.hbin(0, 1), alg.mul(&alg.e(0, 1), &alg.f(1, 1)).unwrap(), alg.mu0()];
    let ys = [alg.one(), alg.e(0, 1), alg.add(&alg.one(), &alg.e_root(1, 2))];
    for x in &xs {
        for y in &ys {
            assert_eq!(r.evaluate(&e, x, y, 0).unwrap(), fld.mul(alg.counit(x), alg.counit(y)));
        }
    }
    // f(1 (x) (y^b)^*) recovers the coefficients
    let f = GradedSection {
        lambda: zero_weight(&r),
        shift: 0,
        terms: BTreeMap::from([((exps(&[0, 0, 0]), exps(&[1, 1, 0])), 2), ((exps(&[0, 0, 0]), exps(&[0, 0, 2])), 1)]),
    };
    for (k, c) in &f.terms {
        let y = r.dual_ring().dual_basis_plus(&k.1).unwrap();
        assert_eq!(r.evaluate(&f, &alg.one(), &y, 2).unwrap(), *c);
    }
    // Borel reduction: H_i acts on Y (x) v through minus its weight
    let lambda = alg.rs().rho();
    for twist in 0..3u32 {
        let g = GradedSection { lambda: lambda.clone(), shift: 2 - twist.min(2), terms: BTreeMap::from([((exps(&[1, 0, 0]), exps(&[1, 1, 0])), 1)]) };
        let y = r.dual_ring().dual_basis_plus(&exps(&[1, 1, 0])).unwrap();
        let x = alg.f(0, 1);
        let base = r.evaluate(&g, &x, &y, 2).unwrap();
        assert_eq!(base, 1);
        for i in 0..2 {
            let hx = alg.mul(&alg.hbin(i, 1), &x).unwrap();
            let w = alg.rs().root_weight([1, 2]).add(&lambda.scale(g.twist(2)));
            assert_eq!(r.evaluate(&g, &hx, &y, 2).unwrap(), fld.from_i64(-w.coords[i]));
        }
    }
}

#[test]
fn product_matches_sweedler_formula() {
    let r = ring(Kind::A2, 3, 12);
    let alg = r.alg();
    let fld = r.field();
    let dr = r.dual_ring();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    for _ in 0..200 {
        let rand_exps = |rng: &mut ChaCha8Rng| exps(&[rng.gen_range(0..3), rng.gen_range(0..2), rng.gen_range(0..3)]);
        let (fa, fb, ga, gb) = (rand_exps(&mut rng), rand_exps(&mut rng), rand_exps(&mut rng), rand_exps(&mut rng));
        let f = GradedSection::monomial(zero_weight(&r), fa, fb, 1);
        let g = GradedSection::monomial(zero_weight(&r), ga, gb, 1);
        let fg = r.ring_mult(&f, &g).unwrap();
        let (nf, ng) = (degree(&fb), degree(&gb));
        let c = add_exps(&fa, &ga);
        let b = add_exps(&fb, &gb);
        let x = dr.dual_basis_minus(&c);
        let y = dr.dual_basis_plus(&b).unwrap();
        let lhs = r.evaluate(&fg, &x, &y, nf + ng).unwrap();
        let mut rhs = 0;
        for ((x1, x2), cx) in alg.comult(&x) {
            for ((y1, y2), cy) in alg.comult(&y) {
                let v1 = r.evaluate(&f, &HyperElt::from_key(x1), &HyperElt::from_key(y1), nf).unwrap();
                if v1 == 0 {
                    continue;
                }
                let v2 = r.evaluate(&g, &HyperElt::from_key(x2), &HyperElt::from_key(y2), ng).unwrap();
                rhs = fld.add(rhs, fld.mul(fld.mul(cx, cy), fld.mul(v1, v2)));
            }
        }
        assert_eq!(lhs, rhs, "{fa:?} {fb:?} {ga:?} {gb:?}");
        checked += (lhs != 0) as usize;
    }
    assert!(checked > 50);
}

#[test]
fn frobenius_pullback_is_pth_power() {
    let r = ring(Kind::A1, 3, 9);
    let e = GradedSection::unit(zero_weight(&r));
    assert_eq!(r.frt_star(&e).unwrap(), e);
    let x = mono(&r, &[1], &[0]);
    assert_eq!(r.frt_star(&x).unwrap(), mono(&r, &[3], &[0]));
    let y = mono(&r, &[1], &[1]);
    let lhs = r.ring_mult(&r.frt_star(&x).unwrap(), &r.frt_star(&y).unwrap()).unwrap();
    assert_eq!(lhs, r.frt_star(&r.ring_mult(&x, &y).unwrap()).unwrap());
    // a binomial: (x + y)^p = x^p + y^p
    let mut sum = x.clone();
    sum.terms.insert((exps(&[0]), exps(&[1])), 1);
    let mut pow = GradedSection::unit(zero_weight(&r));
    for _ in 0..3 {
        pow = r.ring_mult(&pow, &sum).unwrap();
    }
    assert_eq!(pow, r.frt_star(&sum).unwrap());
    assert!(matches!(r.frt_star(&mono(&r, &[4], &[0])), Err(Error::TruncationExceeded(_))));
}

#[test]
fn op_s_examples() {
    let r = ring(Kind::A2, 3, 12);
    let top = r.top();
    let z = [2u16, 2, 2];
    let mut f = mono(&r, &z, &z);
    f.shift = top;
    let s = r.op_s(&f).unwrap();
    assert_eq!(s, GradedSection::unit(zero_weight(&r)));
    // S(f^p g) = f S(g)
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let all: Vec<SecKey> = (0..=top + 3).flat_map(|g| zero_weight_monomials(&r, g, 12)).collect();
    for _ in 0..200 {
        let (ga, gb) = all[rng.gen_range(0..all.len())];
        let fa = exps(&[rng.gen_range(0..2), 0, rng.gen_range(0..2)]);
        let fb = exps(&[rng.gen_range(0..2), rng.gen_range(0..2), 0]);
        let fm = GradedSection::monomial(zero_weight(&r), fa, fb, 1);
        let mut g = GradedSection::monomial(zero_weight(&r), ga, gb, 1);
        g.shift = top;
        let Ok(fpg) = r.ring_mult(&r.frt_star(&fm).unwrap(), &g) else { continue };
        let lhs = r.op_s(&fpg).unwrap();
        let rhs = r.product_unchecked(&fm, &r.op_s(&g).unwrap());
        assert_eq!(lhs.terms, rhs.terms);
    }
}

#[test]
fn op_s_divides_weights() {
    let r = ring(Kind::A2, 3, 12);
    let rs = r.alg().rs();
    let lambda = rs.rho();
    let top = r.top();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for n in 0..=2u32 {
        let grade = 3 * n + top;
        // every monomial of the grade, of arbitrary weight
        let mut terms = BTreeMap::new();
        for b in monomials_of_degree(r.n(), grade) {
            for dx in 0..=12 {
                for a in monomials_of_degree(r.n(), dx) {
                    if rng.gen_bool(0.05) {
                        terms.insert((a, b), 1);
                    }
                }
            }
        }
        if n == 0 {
            terms.insert((exps(&[2, 2, 2]), exps(&[2, 2, 2])), 1);
        }
        let f = GradedSection { lambda: lambda.clone(), shift: top, terms };
        let s = r.op_s(&f).unwrap();
        assert!(!s.is_zero());
        for (x, y) in s.terms.keys() {
            let w_out = r.term_weight(&lambda, s.twist(degree(y)), x, y);
            let lift = |e: &Exps| -> Exps { std::array::from_fn(|k| if k < r.n() { 3 * e[k] + 2 } else { 0 }) };
            let src = (lift(x), lift(y));
            let w_in = r.term_weight(&lambda, f.twist(degree(&src.1)), &src.0, &src.1);
            assert_eq!(w_in, w_out.scale(3));
        }
    }
    let mut bad = mono(&r, &[2, 2, 2], &[2, 2, 2]);
    bad.lambda = lambda;
    assert!(matches!(r.op_s(&bad), Err(Error::LambdaMismatch(_))));
}

/// The trace formula against the defining formula of `S`, on every
/// dual-basis argument allowed by the truncation.
#[test]
fn op_s_definitional_cross_check() {
    for (kind, p, extra) in [(Kind::A1, 3, 2), (Kind::A1, 5, 2), (Kind::A2, 3, 2)] {
        let n_roots = RootSystem::build(kind).num_pos();
        let top = (p - 1) * n_roots as u32;
        let d = top + p * extra;
        let r = ring(kind, p, d);
        let mut rng = ChaCha8Rng::seed_from_u64(p as u64);
        let mut keys = Vec::new();
        for m in 0..=extra {
            keys.extend(zero_weight_monomials(&r, p * m + top, d));
        }
        for _ in 0..2 {
            let f = random_section(&r, &mut rng, &keys, top);
            assert!(!r.op_s(&f).unwrap().is_zero());
            let rep = r.cross_check_op_s(&f).unwrap();
            assert!(rep.passed(), "{kind} p={p}: {:?}", &rep.failures[..rep.failures.len().min(3)]);
            assert!(rep.cases > 0);
        }
    }
}

#[test]
fn section_multiplication() {
    let r = ring(Kind::A2, 3, 12);
    let top = r.top();
    let e = GradedSection::unit(zero_weight(&r));
    let pe = r.mul_psi(&e).unwrap();
    assert_eq!(pe.grades(), BTreeSet::from([top]));
    for (x, y) in pe.terms.keys() {
        assert!(r.term_weight(&pe.lambda, 0, x, y).is_zero());
    }
    // psi(F_0 Fr'X (x) E_0 Fr'Y) = eps(X) eps(Y) on dual-basis weight vectors
    for c in monomials_of_degree(3, 0).into_iter().chain(monomials_of_degree(3, 1)) {
        for b in monomials_of_degree(3, 0).into_iter().chain(monomials_of_degree(3, 1)) {
            let v = r.op_s_definitional(&pe, &c, &b).unwrap();
            assert_eq!(v, (degree(&c) == 0 && degree(&b) == 0) as u32);
        }
    }
    let f = mono(&r, &[1, 0, 0], &[0, 1, 1]);
    let pf = r.mul_psi(&f).unwrap();
    assert_eq!(pf.grades(), BTreeSet::from([2 + top]));
    for (x, y) in pf.terms.keys() {
        let w = r.term_weight(&pf.lambda, 2, x, y);
        assert_eq!(w, r.term_weight(&f.lambda, 2, &exps(&[1, 0, 0]), &exps(&[0, 1, 1])));
    }
}

#[test]
fn splitting_axioms() {
    for (kind, p) in [(Kind::A1, 3), (Kind::A1, 5), (Kind::A2, 3)] {
        let n = RootSystem::build(kind).num_pos();
        let d = Truncation::default_for(p, n).dn;
        let r = ring(kind, p, d);
        let lam = zero_weight(&r);
        let e = GradedSection::unit(lam.clone());
        assert_eq!(r.sigma_tot(&e).unwrap(), e, "{kind} p={p}");
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let small = (d - r.top()) / p;
        let rand_mono = |rng: &mut ChaCha8Rng, deg: u32| {
            let mut a = [0u16; MAX_ROOTS];
            let mut b = [0u16; MAX_ROOTS];
            for _ in 0..rng.gen_range(0..=deg) {
                a[rng.gen_range(0..n)] += 1;
            }
            for _ in 0..rng.gen_range(0..=deg) {
                b[rng.gen_range(0..n)] += 1;
            }
            GradedSection::monomial(lam.clone(), a, b, 1)
        };
        for _ in 0..200 {
            let f = rand_mono(&mut rng, small);
            if f.max_grade() * p > d || f.max_x_degree() * p > d {
                continue;
            }
            assert_eq!(r.sigma_tot(&r.frt_star(&f).unwrap()).unwrap(), f, "{kind} p={p}");
            // grades not divisible by p are killed
            let g = rand_mono(&mut rng, 3);
            if g.max_grade() % p != 0 {
                assert!(r.sigma_tot(&g).unwrap().is_zero());
            }
            // Frobenius linearity
            let f = rand_mono(&mut rng, 1);
            let g = rand_mono(&mut rng, 4);
            let Ok(fpg) = r.ring_mult(&r.frt_star(&f).unwrap(), &g) else { continue };
            if fpg.max_grade() + r.top() > d || fpg.max_x_degree() + r.top() > d {
                continue;
            }
            let lhs = r.sigma_tot(&fpg).unwrap();
            let rhs = r.ring_mult(&f, &r.sigma_tot(&g).unwrap()).unwrap();
            assert_eq!(lhs, rhs, "{kind} p={p}");
        }
    }
}

#[test]
fn twist_transport() {
    let r = ring(Kind::A2, 3, 12);
    let rho = r.alg().rs().rho();
    let e = GradedSection::unit(rho.clone());
    assert_eq!(r.r_lambda(&e), GradedSection::unit(zero_weight(&r)));
    let f0 = mono(&r, &[1, 0, 1], &[0, 1, 0]);
    assert_eq!(r.r_lambda(&f0), f0);
    let top = r.top();
    for g in [0, 3, 6] {
        for (a, b) in zero_weight_monomials(&r, g, 12 - top).into_iter().take(40) {
            let f = GradedSection::monomial(rho.clone(), a, b, 1);
            let lhs = r.r_lambda(&r.sigma_tot(&f).unwrap());
            let rhs = r.sigma_tot(&r.r_lambda(&f)).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn frobenius_equivariance() {
    let r = ring(Kind::A1, 3, 12);
    let top = r.top();
    let e = GradedSection::unit(zero_weight(&r));
    let rep = r.check_equivariance(&GenWord::new(vec![crate::hyperalg::Atom::F(0, 1)]), &e).unwrap();
    assert!(rep.passed());
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut keys = Vec::new();
    for m in 0..=1 {
        keys.extend(zero_weight_monomials(&r, 3 * m + top, 5));
    }
    let atoms = [
        crate::hyperalg::Atom::E(0, 1),
        crate::hyperalg::Atom::F(0, 1),
        crate::hyperalg::Atom::H(0, 1),
        crate::hyperalg::Atom::E(0, 2),
    ];
    let mut nontrivial = 0;
    for _ in 0..12 {
        let f = random_section(&r, &mut rng, &keys, top);
        let len = rng.gen_range(0..=2);
        let z = GenWord::new((0..len).map(|_| atoms[rng.gen_range(0..atoms.len())]).collect());
        let rep = r.check_equivariance(&z, &f).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        nontrivial += !r.act(&r.alg().normalize(&z).unwrap(), &r.op_s(&f).unwrap()).unwrap().is_zero() as usize;
    }
    assert!(nontrivial >= 6, "{nontrivial}");
    // the empty word gives S(mu_0 . f) on both sides
    let f = random_section(&r, &mut rng, &keys, top);
    let mu = r.op_s(&r.act(&r.alg().mu0(), &f).unwrap()).unwrap();
    assert_eq!(mu, r.op_s(&f).unwrap());
}

#[test]
fn klt_routes_agree() {
    let r = ring(Kind::A1, 3, 9);
    let rep = r.compare_klt(6).unwrap();
    assert!(rep.passed());
    assert_eq!(rep.cases, 3 * 7);
    assert!(matches!(r.compare_klt(9), Err(Error::TruncationTooSmall(_))));
}

#[test]
fn corrupted_section_breaks_the_splitting() {
    let mut r = ring(Kind::A1, 3, 9);
    r.corrupt_psi();
    let e = GradedSection::unit(zero_weight(&r));
    assert_ne!(r.sigma_tot(&e).unwrap(), e);
}

#[test]
fn borel_action_matches_antipode_formula() {
    let r = ring(Kind::A2, 3, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let lambda = Weight::new(vec![1, -2]);
    for _ in 0..60 {
        let mut key = PbwKey::ONE;
        for k in 0..3 {
            key.e[k] = rng.gen_range(0..=4);
        }
        for i in 0..2 {
            key.h[i] = rng.gen_range(0..=3);
        }
        let b = {
            let mons = monomials_of_degree(3, rng.gen_range(0..=4));
            mons[rng.gen_range(0..mons.len())]
        };
        let y = r.dual_ring().dual_basis_plus(&b).unwrap();
        let twist = rng.gen_range(-2..=2);
        let fast = r.borel_act(&key, &y, &lambda, twist).unwrap();
        let slow = r.borel_act_by_antipode(&key, &y, &lambda, twist).unwrap();
        assert_eq!(fast, slow, "key {key:?} y^{b:?} twist {twist}");
    }
}

#[test]
fn factorwise_action_matches_product() {
    use crate::hyperalg::Atom;
    let r = ring(Kind::A2, 3, 12);
    let top = r.top();
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let keys = zero_weight_monomials(&r, top, 4);
    let words = [
        vec![Atom::E(0, 1), Atom::E(1, 1)],
        vec![Atom::E(1, 1), Atom::F(0, 1)],
        vec![Atom::H(0, 1), Atom::F(1, 1)],
    ];
    for w in words {
        let z = GenWord::new(w);
        let f = random_section(&r, &mut rng, &keys, top);
        let alg = r.alg();
        let whole = r.act(&alg.phi_word(&z).unwrap(), &f).unwrap();
        let parts = r.act_factors(&alg.phi_factors(&z).unwrap(), &f).unwrap();
        assert_eq!(whole, parts, "{z}");
    }
}
