use std::sync::Arc;

use super::*;
use crate::rootdata::Kind;

fn ring(kind: Kind, p: u32) -> DualRing {
    let rs = Arc::new(RootSystem::build(kind));
    let alg = Arc::new(Hyperalgebra::new(rs, p).unwrap());
    DualRing::new(alg, 6).unwrap()
}

#[test]
fn grading_flags() {
    let cases = [
        (Kind::A1, 3, GradingFlag::SecondKind),
        (Kind::A2, 3, GradingFlag::SecondKind),
        (Kind::B2, 3, GradingFlag::SolvedEquivariant),
        (Kind::B2, 5, GradingFlag::SolvedEquivariant),
        (Kind::G2, 5, GradingFlag::SolvedEquivariant),
    ];
    for (kind, p, flag) in cases {
        let r = ring(kind, p);
        assert_eq!(r.grading().unwrap().flag, flag, "{kind}");
        let depth = 3;
        assert_eq!(r.check_equivariance(depth).unwrap(), None, "{kind}");
        // y and t substitutions are mutually inverse
        for k in 0..r.n() {
            let y = DualPoly::var(Side::Plus, k);
            assert_eq!(r.from_t(Side::Plus, &r.to_t(&y).unwrap()).unwrap(), y);
        }
    }
}

#[test]
fn traces() {
    let r = ring(Kind::A1, 3);
    let y0 = r.z0(Side::Plus);
    assert_eq!(r.trace_plus(&y0).unwrap(), DualPoly::one(Side::Plus));
    assert!(r.trace_plus(&DualPoly::one(Side::Plus)).unwrap().is_zero());
    let mut e = [0; MAX_ROOTS];
    e[0] = 5;
    assert_eq!(r.trace_plus(&DualPoly::monomial(Side::Plus, e)).unwrap(), DualPoly::var(Side::Plus, 0));
    assert!(r.trace_minus(&y0).is_err());
}

#[test]
fn pairing_and_frobenius_duality_a2() {
    let r = ring(Kind::A2, 3);
    let alg = r.alg();
    let e0 = alg.e0();
    // only y_0 pairs nontrivially with E_0 in degree (p-1)N
    for b in monomials_of_degree(3, 6) {
        let v = r.pair(&DualPoly::monomial(Side::Plus, b), &e0).unwrap();
        assert_eq!(v, (b[..3] == [2, 2, 2]) as u32, "{b:?}");
    }
    for d in 0..=3 {
        for b in monomials_of_degree(3, d) {
            let f = DualPoly::monomial(Side::Plus, b);
            for d2 in 0..=2 {
                for a in monomials_of_degree(3, d2) {
                    let z = HyperElt::from_key(PbwKey { e: a.map(|x| x * 3), ..PbwKey::ONE });
                    let lhs = r.pair(&r.fr_star(&f), &z).unwrap();
                    let rhs = r.pair(&f, &alg.frobenius(&z)).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }
    assert!(r.pair(&DualPoly::one(Side::Plus), &alg.f(0, 1)).is_err());
}

#[test]
fn dual_basis_is_dual() {
    let r = ring(Kind::B2, 3);
    for d in 0..=3 {
        let mons = monomials_of_degree(4, d);
        for b in &mons {
            let z = r.dual_basis_plus(b).unwrap();
            for c in &mons {
                let v = r.pair(&DualPoly::monomial(Side::Plus, *c), &z).unwrap();
                assert_eq!(v, (b == c) as u32);
            }
        }
    }
}

#[test]
fn torus_acts_by_weight() {
    let r = ring(Kind::A2, 5);
    let alg = r.alg();
    for k in 0..3 {
        let y = DualPoly::var(Side::Plus, k);
        for i in 0..2 {
            let img = r.dual_adjoint(&alg.hbin(i, 1), &y).unwrap();
            let c = -alg.rs().root_pair(alg.rs().root(k), i);
            assert_eq!(img, DualPoly { side: Side::Plus, terms: Poly::from([(y.terms.keys().next().copied().unwrap(), r.field().from_i64(c))]) });
        }
    }
}

#[test]
fn module_algebra_law() {
    let r = ring(Kind::B2, 5);
    let alg = r.alg();
    let fld = r.field();
    let gens = [alg.e(0, 1), alg.e(1, 1), alg.e(1, 2), alg.hbin(0, 1)];
    for a in &gens {
        for f in monomials_of_degree(4, 1).into_iter().chain(monomials_of_degree(4, 2)) {
            for g in monomials_of_degree(4, 1) {
                let fp = DualPoly::monomial(Side::Plus, f);
                let gp = DualPoly::monomial(Side::Plus, g);
                let lhs = r.dual_adjoint(a, &r.mul(&fp, &gp).unwrap()).unwrap();
                let mut rhs = Poly::new();
                for (k, &c) in &a.terms {
                    for (k1, k2) in alg.comult_key(k) {
                        let l = r.dual_adjoint(&HyperElt::from_key(k1), &fp).unwrap();
                        let m = r.dual_adjoint(&HyperElt::from_key(k2), &gp).unwrap();
                        rhs = poly_add(fld, &rhs, &poly_mul(fld, &l.terms, &m.terms), c);
                    }
                }
                assert_eq!(lhs.terms, rhs);
            }
        }
    }
}

#[test]
fn projections_decompose() {
    let r = ring(Kind::B2, 3);
    let alg = r.alg();
    let f = DualPoly { side: Side::Plus, terms: Poly::from([([1, 0, 0, 0, 0, 0], 1), ([1, 1, 0, 2, 0, 0], 2), ([0; 6], 1)]) };
    let mut acc = Poly::new();
    for n in 0..=4 {
        acc = poly_add(r.field(), &acc, &r.project_degree(&f, n).unwrap().terms, 1);
    }
    assert_eq!(acc, f.terms);
    // E_0 lies in the top graded piece
    let e0 = alg.e0();
    assert_eq!(r.project_hyper(&e0, 2 * 4).unwrap(), e0);
    assert!(r.project_hyper(&e0, 7).unwrap().is_zero());
}
