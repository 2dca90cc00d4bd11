use std::collections::BTreeMap;
use std::sync::Arc;

use super::*;
use crate::rootdata::Kind;

fn st(kind: Kind, p: u32) -> StModule {
    StModule::build(Arc::new(RootSystem::build(kind)), p, DEFAULT_SIZE_BOUND).unwrap()
}

/// Weight multiplicities of the characteristic-zero irreducible module of
/// the same highest weight, read off the diagonal of the `h_i` matrices.
fn rational_multiplicities(kind: Kind, p: u32) -> BTreeMap<Vec<i64>, usize> {
    let rs = RootSystem::build(kind);
    let lambda = rs.rho().scale(p as i64 - 1);
    let mats = rs.module_matrices(&lambda);
    let d = mats[0].len();
    let mut out = BTreeMap::new();
    for v in 0..d {
        let w: Vec<i64> = (0..rs.rank).map(|i| *mats[rs.h_index(i)][v][v].numer() as i64).collect();
        *out.entry(w).or_insert(0) += 1;
    }
    out
}

#[test]
fn dimensions_and_weights() {
    for (kind, p) in [(Kind::A1, 3), (Kind::A1, 5), (Kind::A1, 7), (Kind::A2, 3), (Kind::A2, 5), (Kind::B2, 3)] {
        let m = st(kind, p);
        assert_eq!(m.dim, (p as usize).pow(m.alg().n() as u32));
        let mut mult = BTreeMap::new();
        for w in &m.basis_weights {
            *mult.entry(w.coords.clone()).or_insert(0) += 1;
        }
        assert_eq!(mult, rational_multiplicities(kind, p), "{kind} p={p}");
    }
    let a1 = st(Kind::A1, 3);
    let mut ws: Vec<i64> = a1.basis_weights.iter().map(|w| w.coords[0]).collect();
    ws.sort();
    assert_eq!(ws, vec![-2, 0, 2]);
}

#[test]
fn pairing_properties() {
    for (kind, p) in [(Kind::A1, 3), (Kind::A1, 7), (Kind::A2, 3), (Kind::A2, 5)] {
        let m = st(kind, p);
        assert_eq!(m.invariance_failures().unwrap(), 0);
        assert_eq!(m.eta_rank(), m.dim);
        assert_eq!(m.normalization_value().unwrap(), 1);
        for i in 0..m.dim {
            for j in 0..m.dim {
                if m.eta_entry(i, j) != 0 {
                    assert!(m.basis_weights[i].add(&m.basis_weights[j]).is_zero());
                }
            }
        }
    }
}

#[test]
fn extremal_vectors() {
    let m = st(Kind::A2, 3);
    let alg = m.alg();
    let e0fm = m.apply(&alg.e0(), &m.basis_vector(m.f_minus)).unwrap();
    assert!(e0fm.iter().enumerate().all(|(i, &c)| (i == m.f_plus) == (c != 0)));
    let f0fp = m.apply(&alg.f0(), &m.basis_vector(m.f_plus)).unwrap();
    assert!(f0fp.iter().enumerate().all(|(i, &c)| (i == m.f_minus) == (c != 0)));
    // raising past the top or lowering past the bottom gives zero
    assert!(m.apply(&alg.e(0, 1), &m.basis_vector(m.f_plus)).unwrap().iter().all(|&c| c == 0));
    assert!(m.apply(&alg.f(1, 1), &m.basis_vector(m.f_minus)).unwrap().iter().all(|&c| c == 0));
}

#[test]
fn bounds_and_bad_primes() {
    let rs = Arc::new(RootSystem::build(Kind::G2));
    assert!(matches!(StModule::build(rs.clone(), 5, 1000), Err(Error::SizeBound { .. })));
    assert!(matches!(StModule::build(rs, 3, 1000), Err(Error::BadPrime { .. })));
}

#[test]
fn corrupted_normalization_is_detected() {
    let mut m = st(Kind::A1, 5);
    m.corrupt_normalization();
    assert_eq!(m.normalization_value().unwrap(), 2);
}

#[test]
fn section_coefficients() {
    for (kind, p) in [(Kind::A1, 3), (Kind::A2, 3)] {
        let m = st(kind, p);
        let dr = DualRing::new(Arc::new(Hyperalgebra::new(m.alg().rs_arc(), p).unwrap()), 6).unwrap();
        let coeffs = m.psi_coefficients(&dr).unwrap();
        let n = m.alg().n();
        let mut z = [0u16; MAX_ROOTS];
        for x in z.iter_mut().take(n) {
            *x = p as u16 - 1;
        }
        assert_eq!(coeffs.get(&(z, z)), Some(&1));
        let rs = m.alg().rs();
        for (a, b) in coeffs.keys() {
            assert_eq!(crate::dualring::exps_root(rs, a), crate::dualring::exps_root(rs, b));
            assert_eq!(crate::dualring::degree(b), (p - 1) * n as u32);
        }
        // the closed form agrees with the Sweedler-formula evaluation
        let fp = m.basis_vector(m.f_plus);
        let fm = m.basis_vector(m.f_minus);
        let e0 = dr.alg().e0();
        assert_eq!(m.psi_eval(&dr, &fp, &fm, &m.alg().f0(), &e0).unwrap(), 1);
        assert_eq!(m.psi_eval(&dr, &fp, &fm, &m.alg().one(), &m.alg().one()).unwrap(), 0);
    }
}
