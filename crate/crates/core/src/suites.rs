//! Verification suites. Each suite checks one family of identities over
//! exhaustive or seeded random cases and returns a [`VerifyReport`].

use std::collections::BTreeMap;

use rustc_hash::FxHashMap as HashMap;
use std::sync::{Arc, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dualring::{degree, exps_root, monomials_of_degree, monomials_of_root_weight, DualPoly, DualRing};
use crate::error::{Error, Result};
use crate::hyperalg::{Atom, Exps, GenWord, HyperElt, Hyperalgebra, PbwKey, Side, SmallPart, TensorElt, MAX_ROOTS};
use crate::rootdata::{Kind, RootSystem, Weight};
use crate::splitring::{GradedSection, SecKey, SplitRing, Truncation, VerifyReport};
use crate::steinberg::{StModule, DEFAULT_SIZE_BOUND};

/// Suite names with one-line descriptions, in run order.
pub const SUITES: &[(&str, &str)] = &[
    ("hopf", "associativity, coassociativity, counit and antipode on PBW monomials"),
    ("frobenius", "Fr o phi = id and Fr o Fr' = id on random generator words"),
    ("mu0", "mu_0 is idempotent and its characters detect p-divisible weights"),
    ("e0-central", "E_0 and F_0 are central and kill the small augmentation ideals"),
    ("e0-adjoint", "E_0 Fr'(Z*Y) = E_0 (Fr'Z * Fr'Y) and E_0 (N*X) = 0"),
    ("steinberg", "dimension, invariance, nondegeneracy and normalization of eta"),
    ("top-piece", "E_0 lies in the top graded piece"),
    ("s-cross-check", "S by traces equals S by its defining formula"),
    ("splitting-axiom", "sigma_tot(e) = e and sigma_tot(f^p) = f"),
    ("frobenius-linearity", "sigma_tot(f^p g) = f sigma_tot(g)"),
    ("equivariance", "S(phi(Z).f) = Z.S(f)"),
    ("f0-conjugation", "F_0 E_i^(pm) and E_i^(pm) F_0 agree against E_0 Fr'Y"),
    ("klt", "route A (unprojected section) equals route B (S after the section)"),
    ("twist-transport", "r_lambda commutes with sigma_tot for lambda in {0, rho, 2 rho}"),
];

/// Deliberate corruptions for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corruption {
    StructureConstant,
    Psi,
    EtaNormalization,
}

impl std::str::FromStr for Corruption {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "structure-constant" => Ok(Corruption::StructureConstant),
            "psi" => Ok(Corruption::Psi),
            "eta-normalization" => Ok(Corruption::EtaNormalization),
            _ => Err(Error::Parse(format!("unknown corruption `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub kind: Kind,
    pub p: u32,
    pub trunc: Truncation,
    pub seed: u64,
    /// Total PBW degree bound for the Hopf suite.
    pub hopf_degree: u32,
    /// Random words for the Frobenius suite.
    pub word_cases: usize,
    /// Random cases for the E_0 adjoint and equivariance suites.
    pub pair_cases: usize,
    pub corrupt: Option<Corruption>,
}

impl SuiteConfig {
    pub fn new(kind: Kind, p: u32) -> Self {
        let n = RootSystem::build(kind).num_pos();
        SuiteConfig {
            kind,
            p,
            trunc: Truncation::default_for(p, n),
            seed: 0,
            hopf_degree: 6,
            word_cases: 1000,
            pair_cases: 500,
            corrupt: None,
        }
    }
}

/// Lazily built structures shared by the suites.
pub struct Suites {
    cfg: SuiteConfig,
    rs: Arc<RootSystem>,
    steinberg: OnceLock<Result<Arc<StModule>>>,
    split: OnceLock<Result<SplitRing>>,
}

impl Suites {
    pub fn new(cfg: SuiteConfig) -> Result<Self> {
        let base = RootSystem::build(cfg.kind);
        base.check_good_prime(cfg.p)?;
        let rs = match cfg.corrupt {
            Some(Corruption::StructureConstant) => base.with_corrupted_constant(),
            _ => base,
        };
        Ok(Suites { cfg, rs: Arc::new(rs), steinberg: OnceLock::new(), split: OnceLock::new() })
    }

    pub fn config(&self) -> &SuiteConfig {
        &self.cfg
    }

    pub fn root_system(&self) -> &RootSystem {
        &self.rs
    }

    fn alg_with_cap(&self, cap: u32) -> Result<Hyperalgebra> {
        let p = self.cfg.p;
        let cap = cap.max(p * p - 1);
        let cap = u16::try_from(cap).map_err(|_| Error::TruncationTooSmall(format!("exponent cap {cap}")))?;
        Hyperalgebra::with_cap(self.rs.clone(), p, cap)
    }

    pub fn steinberg(&self) -> Result<Arc<StModule>> {
        self.steinberg
            .get_or_init(|| {
                let mut st = StModule::build(self.rs.clone(), self.cfg.p, DEFAULT_SIZE_BOUND)?;
                if self.cfg.corrupt == Some(Corruption::EtaNormalization) {
                    st.corrupt_normalization();
                }
                Ok(Arc::new(st))
            })
            .clone()
    }

    pub fn split_ring(&self) -> Result<&SplitRing> {
        self.split
            .get_or_init(|| {
                let p = self.cfg.p;
                let t = self.cfg.trunc;
                let cap = (p * p - 1).max(t.dx).max(t.dn) + 4 * p;
                let alg = Arc::new(self.alg_with_cap(cap)?);
                let dr = Arc::new(DualRing::new(alg, t.dn)?);
                let mut r = SplitRing::from_parts(dr, self.steinberg()?, t)?;
                if self.cfg.corrupt == Some(Corruption::Psi) {
                    r.corrupt_psi();
                }
                Ok(r)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Serialized forms of the structures built so far, keyed by file name.
    pub fn built_artifacts(&self) -> Result<Vec<(&'static str, String)>> {
        let mut out = vec![("root_system.json", self.rs.to_json())];
        if let Some(Ok(st)) = self.steinberg.get() {
            out.push(("steinberg.json", st.to_json()));
        }
        if let Some(Ok(r)) = self.split.get() {
            let g = r.dual_ring().grading()?;
            out.push(("grading.json", serde_json::to_string(g).expect("grading serializes")));
            out.push(("psi.txt", r.psi_section(&Weight::zero(r.rank())).to_text(r.n())));
        }
        Ok(out)
    }

    fn rng(&self, salt: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(salt))
    }

    pub fn run(&self, name: &str) -> Result<VerifyReport> {
        let mut rep = match name {
            "hopf" => self.hopf(),
            "frobenius" => self.frobenius(),
            "mu0" => self.mu0(),
            "e0-central" => self.e0_central(),
            "e0-adjoint" => self.e0_adjoint(),
            "steinberg" => self.steinberg_suite(),
            "top-piece" => self.top_piece(),
            "s-cross-check" => self.s_cross_check(),
            "splitting-axiom" => self.splitting_axiom(),
            "frobenius-linearity" => self.frobenius_linearity(),
            "equivariance" => self.equivariance(),
            "f0-conjugation" => self.f0_conjugation(),
            "klt" => self.klt(),
            "twist-transport" => self.twist_transport(),
            _ => return Err(Error::Parse(format!("unknown suite `{name}`"))),
        }?;
        rep.identity = format!("{name}: {}", rep.identity);
        Ok(rep)
    }

    fn hopf(&self) -> Result<VerifyReport> {
        let d = self.cfg.hopf_degree;
        let alg = self.alg_with_cap(d)?;
        let n = alg.n();
        let rank = alg.rank();
        let keys: Vec<PbwKey> = compositions(2 * n + rank, d)
            .into_iter()
            .map(|v| {
                let mut k = PbwKey::ONE;
                k.e[..n].copy_from_slice(&v[..n]);
                k.h[..rank].copy_from_slice(&v[n..n + rank]);
                k.f[..n].copy_from_slice(&v[n + rank..]);
                k
            })
            .collect();
        let mut by_degree: BTreeMap<u32, Vec<PbwKey>> = BTreeMap::new();
        for k in &keys {
            by_degree.entry(k.degree()).or_default().push(*k);
        }
        let upto = |m: u32| by_degree.range(..=m).flat_map(|(_, v)| v.iter().copied()).collect::<Vec<_>>();
        let mut rep = VerifyReport::new("Hopf algebra axioms");
        let assoc = keys
            .par_iter()
            .map(|a| {
                let mut r = VerifyReport::new("");
                let ea = HyperElt::from_key(*a);
                for b in upto(d - a.degree()) {
                    let eb = HyperElt::from_key(b);
                    let ab = match alg.mul(&ea, &eb) {
                        Err(Error::IntegralityViolation(m)) => {
                            r.cases += 1;
                            r.fail(|| format!("product {a:?} {b:?}"), || (m, "an integral coefficient".into()));
                            continue;
                        }
                        other => other?,
                    };
                    for c in upto(d - a.degree() - b.degree()) {
                        let ec = HyperElt::from_key(c);
                        let sides = alg.mul(&ab, &ec).and_then(|lhs| Ok((lhs, alg.mul(&ea, &alg.mul(&eb, &ec)?)?)));
                        match sides {
                            Ok((lhs, rhs)) => r.record(|| format!("associativity {a:?} {b:?} {c:?}"), &lhs, &rhs, lhs == rhs),
                            Err(Error::IntegralityViolation(m)) => {
                                r.cases += 1;
                                r.fail(|| format!("associativity {a:?} {b:?} {c:?}"), || (m, "an integral coefficient".into()));
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    let fr_ab = alg.frobenius(&ab);
                    let fr_a_fr_b = alg.mul(&alg.frobenius(&ea), &alg.frobenius(&eb))?;
                    r.record(|| format!("Fr multiplicative {a:?} {b:?}"), &fr_ab, &fr_a_fr_b, fr_ab == fr_a_fr_b);
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        assoc.into_iter().for_each(|r| rep.merge(r));
        for k in &keys {
            let delta = alg.comult_key(k);
            let mut left: Vec<(PbwKey, PbwKey, PbwKey)> = Vec::new();
            let mut right = Vec::new();
            for (k1, k2) in &delta {
                left.extend(alg.comult_key(k1).into_iter().map(|(a, b)| (a, b, *k2)));
                right.extend(alg.comult_key(k2).into_iter().map(|(a, b)| (*k1, a, b)));
            }
            left.sort();
            right.sort();
            rep.record(|| format!("coassociativity {k:?}"), &left, &right, left == right);
            let mut eps_left = HyperElt::zero();
            let mut eps_right = HyperElt::zero();
            for (k1, k2) in &delta {
                if k1.is_one() {
                    alg.add_term(&mut eps_left, *k2, 1);
                }
                if k2.is_one() {
                    alg.add_term(&mut eps_right, *k1, 1);
                }
            }
            let me = HyperElt::from_key(*k);
            rep.record(|| format!("counit {k:?}"), &eps_left, &me, eps_left == me && eps_right == me);
            let antipode_sides = || -> Result<(HyperElt, HyperElt)> {
                let mut s_left = HyperElt::zero();
                let mut s_right = HyperElt::zero();
                for (k1, k2) in &delta {
                    alg.add_assign(&mut s_left, &alg.mul(&*alg.antipode_key(k1)?, &HyperElt::from_key(*k2))?, 1);
                    alg.add_assign(&mut s_right, &alg.mul(&HyperElt::from_key(*k1), &*alg.antipode_key(k2)?)?, 1);
                }
                Ok((s_left, s_right))
            };
            let unit = if k.is_one() { alg.one() } else { HyperElt::zero() };
            match antipode_sides() {
                Ok((s_left, s_right)) => {
                    rep.record(|| format!("antipode {k:?}"), &(s_left.clone(), s_right.clone()), &unit, s_left == unit && s_right == unit)
                }
                Err(Error::IntegralityViolation(m)) => {
                    rep.cases += 1;
                    rep.fail(|| format!("antipode {k:?}"), || (m, "an integral coefficient".into()));
                }
                Err(e) => return Err(e),
            }
        }
        Ok(rep)
    }

    fn random_word(&self, rng: &mut ChaCha8Rng, len: usize, kinds: &[u8], max_n: u32) -> GenWord {
        let rank = self.rs.rank;
        GenWord::new(
            (0..len)
                .map(|_| {
                    let i = rng.gen_range(0..rank);
                    let m = rng.gen_range(1..=max_n);
                    match kinds[rng.gen_range(0..kinds.len())] {
                        0 => Atom::E(i, m),
                        1 => Atom::F(i, m),
                        _ => Atom::H(i, m),
                    }
                })
                .collect(),
        )
    }

    fn frobenius(&self) -> Result<VerifyReport> {
        let p = self.cfg.p;
        let alg = self.alg_with_cap(8 * p)?;
        let mut rng = self.rng(2);
        let words: Vec<GenWord> = (0..self.cfg.word_cases)
            .map(|_| {
                let len = rng.gen_range(1..=3);
                self.random_word(&mut rng, len, &[0, 1, 2], 2)
            })
            .collect();
        let mut rep = VerifyReport::new("Fr o phi = id, Fr o Fr' = id");
        let parts = words
            .par_iter()
            .enumerate()
            .map(|(idx, w)| {
                let mut r = VerifyReport::new("");
                let plain = alg.normalize(w)?;
                let phi = alg.phi_word(w)?;
                let lhs = alg.frobenius(&phi);
                r.record(|| format!("phi {w}"), &lhs, &plain, lhs == plain);
                if idx % 5 == 0 {
                    let mu = alg.mu0();
                    let (left, right) = (alg.mul(&mu, &phi)?, alg.mul(&phi, &mu)?);
                    r.record(|| format!("mu_0 phi {w}"), &left, &right, left == right);
                }
                let keep = |pred: fn(&Atom) -> bool| GenWord::new(w.atoms.iter().copied().filter(pred).collect());
                let we = keep(|a| matches!(a, Atom::E(..)));
                let wf = keep(|a| matches!(a, Atom::F(..)));
                let wh = keep(|a| matches!(a, Atom::H(..)));
                for (sub, img) in [(&we, alg.fr_prime_word(&we)?), (&wf, alg.fr_prime_minus_word(&wf)?), (&wh, alg.fr_prime_zero_word(&wh)?)] {
                    let lhs = alg.frobenius(&img);
                    let rhs = alg.normalize(sub)?;
                    r.record(|| format!("Fr' {sub}"), &lhs, &rhs, lhs == rhs);
                }
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        parts.into_iter().for_each(|r| rep.merge(r));
        self.frobenius_diagrams(&alg, &mut rep)?;
        Ok(rep)
    }

    /// `(Fr (x) id) Delta phi = (id (x) phi) Delta` and the same with `Fr'`,
    /// on every generator whose stretch fits under the exponent cap.
    fn frobenius_diagrams(&self, alg: &Hyperalgebra, rep: &mut VerifyReport) -> Result<()> {
        let p = self.cfg.p;
        let fld = alg.field();
        let fr_left = |t: &TensorElt| {
            let mut out = TensorElt::new();
            for ((k1, k2), &c) in t {
                for (k, &d) in &alg.frobenius(&HyperElt::from_key(*k1)).terms {
                    let e = out.entry((*k, *k2)).or_insert(0);
                    *e = fld.add(*e, fld.mul(c, d));
                }
            }
            out.retain(|_, v| *v != 0);
            out
        };
        let to_tensor = |pairs: Vec<(HyperElt, HyperElt)>| {
            let mut out = TensorElt::new();
            for (a, b) in pairs {
                for (k, c) in alg.tensor(&a, &b) {
                    let e = out.entry(k).or_insert(0);
                    *e = fld.add(*e, c);
                }
            }
            out.retain(|_, v| *v != 0);
            out
        };
        let max_m = u32::from(alg.cap()) / p - 2;
        for i in 0..alg.rank() {
            let makers: [(&str, fn(usize, u32) -> Atom); 3] = [("E", Atom::E), ("F", Atom::F), ("H", Atom::H)];
            for (name, make) in makers {
                for m in 0..=max_m {
                    let word = |j: u32| GenWord::new(vec![make(i, j)]);
                    let lhs = fr_left(&alg.comult(&alg.phi_word(&word(m))?));
                    let rhs = to_tensor((0..=m).map(|j| Ok((alg.normalize(&word(j))?, alg.phi_word(&word(m - j))?))).collect::<Result<_>>()?);
                    rep.record(|| format!("(Fr x id) Delta phi {name}({i},{m})"), &lhs, &rhs, lhs == rhs);
                    let stretch = |w: &GenWord| match name {
                        "E" => alg.fr_prime_word(w),
                        "F" => alg.fr_prime_minus_word(w),
                        _ => alg.fr_prime_zero_word(w),
                    };
                    let lhs = fr_left(&alg.comult(&stretch(&word(m))?));
                    let rhs = to_tensor((0..=m).map(|j| Ok((alg.normalize(&word(j))?, stretch(&word(m - j))?))).collect::<Result<_>>()?);
                    rep.record(|| format!("(Fr x id) Delta Fr' {name}({i},{m})"), &lhs, &rhs, lhs == rhs);
                }
            }
        }
        Ok(())
    }

    fn mu0(&self) -> Result<VerifyReport> {
        let alg = self.alg_with_cap(0)?;
        let p = self.cfg.p as i64;
        let mu = alg.mu0();
        let mut rep = VerifyReport::new("mu_0 idempotent, characters in {0,1}");
        let sq = alg.mul(&mu, &mu)?;
        rep.record(|| "mu_0^2".into(), &sq, &mu, sq == mu);
        let rank = alg.rank();
        let mut coords = vec![-p; rank];
        loop {
            let w = Weight::new(coords.clone());
            let c = alg.character(&w, &mu)?;
            let expect = coords.iter().all(|x| x.rem_euclid(p) == 0) as u32;
            rep.record(|| format!("c_lambda(mu_0) at {coords:?}"), &c, &expect, c == expect);
            let mut i = 0;
            loop {
                if i == rank {
                    return Ok(rep);
                }
                coords[i] += 1;
                if coords[i] < p {
                    break;
                }
                coords[i] = -p;
                i += 1;
            }
        }
    }

    fn e0_central(&self) -> Result<VerifyReport> {
        let p = self.cfg.p;
        let alg = self.alg_with_cap(3 * p)?;
        let mut rep = VerifyReport::new("E_0, F_0 central; kill small augmentation ideals");
        for (side, z0, part) in [(Side::Plus, alg.e0(), SmallPart::Plus), (Side::Minus, alg.f0(), SmallPart::Minus)] {
            let mut gens = Vec::new();
            for i in 0..alg.rank() {
                for m in 1..2 * p {
                    gens.push(if side == Side::Plus { alg.e(i, m) } else { alg.f(i, m) });
                }
            }
            let small = alg.small_spanning_set(part);
            for x in gens.iter().chain(small.iter()) {
                let l = alg.mul(&z0, x)?;
                let r = alg.mul(x, &z0)?;
                rep.record(|| format!("{side:?} centrality {}", alg.to_text(x)), &l, &r, l == r);
            }
            for x in small.iter().filter(|x| alg.counit(x) == 0) {
                let l = alg.mul(&z0, x)?;
                rep.record(|| format!("{side:?} annihilation {}", alg.to_text(x)), &l, &HyperElt::zero(), l.is_zero());
            }
            for x in &gens {
                let l = alg.adjoint_general(x, &z0)?;
                rep.record(|| format!("{side:?} adjoint {}", alg.to_text(x)), &l, &HyperElt::zero(), l.is_zero());
            }
        }
        Ok(rep)
    }

    fn e0_adjoint(&self) -> Result<VerifyReport> {
        let p = self.cfg.p;
        let alg = self.alg_with_cap(9 * p)?;
        let fld = alg.field();
        let e0 = alg.e0();
        let mut rng = self.rng(5);
        let mut pairs = Vec::new();
        for _ in 0..self.cfg.pair_cases {
            let lz = rng.gen_range(1..=2);
            let ly = rng.gen_range(1..=2);
            pairs.push((self.random_word(&mut rng, lz, &[0], 2), self.random_word(&mut rng, ly, &[0], 2)));
        }
        let small: Vec<HyperElt> = alg.small_spanning_set(SmallPart::Plus).into_iter().filter(|x| alg.counit(x) == 0).collect();
        let mut nx = Vec::new();
        for _ in 0..self.cfg.pair_cases {
            let len = rng.gen_range(1..=2);
            nx.push((small[rng.gen_range(0..small.len())].clone(), self.random_word(&mut rng, len, &[0], 2)));
        }
        let mut rep = VerifyReport::new("E_0 Fr'(Z*Y) = E_0 (Fr'Z * Fr'Y), E_0 (N*X) = 0");
        let parts = pairs
            .par_iter()
            .map(|(z, y)| {
                let mut r = VerifyReport::new("");
                // Z*Y expanded into signed words, so that Fr' applies atom by atom
                let mut exact = HyperElt::zero();
                for (w, c) in adjoint_words(z, y, fld.p()) {
                    alg.add_assign(&mut exact, &alg.fr_prime_word(&w)?, c);
                }
                let lhs = alg.mul(&e0, &exact)?;
                let rhs = alg.mul(&e0, &alg.adjoint_general(&alg.fr_prime_word(z)?, &alg.fr_prime_word(y)?)?)?;
                r.record(|| format!("Z={z} Y={y}"), &lhs, &rhs, lhs == rhs);
                Ok(r)
            })
            .collect::<Result<Vec<_>>>()?;
        parts.into_iter().for_each(|r| rep.merge(r));
        for (nel, x) in &nx {
            let v = alg.mul(&e0, &alg.adjoint_general(nel, &alg.normalize(x)?)?)?;
            rep.record(|| format!("N={} X={x}", alg.to_text(nel)), &v, &HyperElt::zero(), v.is_zero());
        }
        Ok(rep)
    }

    fn steinberg_suite(&self) -> Result<VerifyReport> {
        let st = self.steinberg()?;
        let mut rep = VerifyReport::new("Steinberg module and invariant pairing");
        let expect = (self.cfg.p as usize).pow(self.rs.num_pos() as u32);
        rep.record(|| "dim".into(), &st.dim, &expect, st.dim == expect);
        let fails = st.invariance_failures()?;
        rep.record(|| "invariance failures".into(), &fails, &0, fails == 0);
        let rank = st.eta_rank();
        rep.record(|| "eta rank".into(), &rank, &st.dim, rank == st.dim);
        let norm = st.normalization_value()?;
        rep.record(|| "eta(F_0 f_+, E_0 f_-)".into(), &norm, &1, norm == 1);
        Ok(rep)
    }

    fn top_piece(&self) -> Result<VerifyReport> {
        let alg = Arc::new(self.alg_with_cap(0)?);
        let top = (self.cfg.p - 1) * alg.n() as u32;
        let dr = DualRing::new(alg.clone(), top)?;
        let e0 = alg.e0();
        let z0 = alg.e0_key().e;
        let mut rep = VerifyReport::new("E_0 in the top graded piece");
        let mut monos: Vec<Exps> = monomials_of_degree(alg.n(), top);
        monos.extend(monomials_of_root_weight(alg.rs(), exps_root(alg.rs(), &z0)).into_iter().filter(|b| degree(b) != top));
        for b in monos {
            let v = dr.pair(&DualPoly::monomial(Side::Plus, b), &e0)?;
            let expect = (b == z0) as u32;
            let ok = if degree(&b) == top { v == expect } else { v == 0 };
            rep.record(|| format!("<y^{:?}, E_0>", &b[..alg.n()]), &v, &expect, ok);
        }
        let proj = dr.project_hyper(&e0, top)?;
        rep.record(|| "projection".into(), &proj, &e0, proj == e0);
        Ok(rep)
    }

    fn s_cross_check(&self) -> Result<VerifyReport> {
        let r = self.split_ring()?;
        let (p, top, t) = (r.p(), r.top(), r.truncation());
        let mut keys = Vec::new();
        let mut m = 0;
        while p * m + top <= t.dn {
            keys.extend(zero_weight_monomials(r, p * m + top, t.dx));
            m += 1;
        }
        let mut rng = self.rng(8);
        let mut rep = VerifyReport::new("S by traces = S by definition");
        for _ in 0..3 {
            let mut terms = BTreeMap::new();
            for k in &keys {
                if rng.gen_bool(0.3) {
                    terms.insert(*k, rng.gen_range(1..p));
                }
            }
            // make sure the trace part is exercised
            let z = z0(r);
            terms.insert((z, z), 1);
            let f = GradedSection { lambda: Weight::zero(r.rank()), shift: top, terms };
            rep.merge(r.cross_check_op_s(&f)?);
        }
        Ok(rep)
    }

    fn splitting_axiom(&self) -> Result<VerifyReport> {
        let r = self.split_ring()?;
        let (p, top, t) = (r.p(), r.top(), r.truncation());
        let lam = Weight::zero(r.rank());
        let mut rep = VerifyReport::new("sigma_tot(e) = e, sigma_tot(f^p) = f");
        let e = GradedSection::unit(lam.clone());
        let se = r.sigma_tot(&e)?;
        rep.record(|| "e".into(), &se.terms, &e.terms, se == e);
        let gx = t.dx.saturating_sub(top) / p;
        let gy = t.dn.saturating_sub(top) / p;
        for (a, b) in all_monomials(r.n(), gx, gy) {
            let f = GradedSection::monomial(lam.clone(), a, b, 1);
            let s = r.sigma_tot(&r.frt_star(&f)?)?;
            rep.record(|| format!("x^{:?} y^{:?}", &a[..r.n()], &b[..r.n()]), &s.terms, &f.terms, s == f);
        }
        Ok(rep)
    }

    fn frobenius_linearity(&self) -> Result<VerifyReport> {
        let r = self.split_ring()?;
        let (p, top, t) = (r.p(), r.top(), r.truncation());
        let n = r.n();
        let lam = Weight::zero(r.rank());
        // every product f^p g with room for the section
        let (hx, hy) = (t.dx.saturating_sub(top), t.dn.saturating_sub(top));
        let mut cache: HashMap<SecKey, GradedSection> = HashMap::default();
        for (a, b) in all_monomials(n, hx, hy) {
            cache.insert((a, b), r.sigma_tot(&GradedSection::monomial(lam.clone(), a, b, 1))?);
        }
        let mut rep = VerifyReport::new("sigma_tot(f^p g) = f sigma_tot(g)");
        for (fa, fb) in all_monomials(n, hx / p, hy / p) {
            let (rx, ry) = (hx - p * degree(&fa), hy - p * degree(&fb));
            let (pa, pb) = (fa.map(|v| v * p as u16), fb.map(|v| v * p as u16));
            for (ga, gb) in all_monomials(n, rx, ry) {
                let lhs = &cache[&(add(&pa, &ga), add(&pb, &gb))];
                let sg = &cache[&(ga, gb)];
                // f is a monomial, so f * sigma(g) shifts every exponent
                let ok = lhs.terms.len() == sg.terms.len()
                    && sg.terms.iter().all(|((x, y), c)| lhs.terms.get(&(add(x, &fa), add(y, &fb))) == Some(c));
                rep.cases += 1;
                if !ok {
                    let f = GradedSection::monomial(lam.clone(), fa, fb, 1);
                    let rhs = r.ring_mult(&f, sg)?;
                    rep.fail(
                        || format!("f=x^{:?}y^{:?} g=x^{:?}y^{:?}", &fa[..n], &fb[..n], &ga[..n], &gb[..n]),
                        || (format!("{:?}", lhs.terms), format!("{:?}", rhs.terms)),
                    );
                }
            }
        }
        Ok(rep)
    }

    fn equivariance(&self) -> Result<VerifyReport> {
        let r = self.split_ring()?;
        let (p, top) = (r.p(), r.top());
        let n = r.n();
        let mut rng = self.rng(11);
        let dx = r.truncation().dx;
        let zero = z0(r);
        let mut draw = || {
            let len = rng.gen_range(0..=2);
            let z = self.random_word(&mut rng, len, &[0, 1, 2], 2);
            let mut terms = BTreeMap::new();
            for _ in 0..rng.gen_range(1..=3) {
                let m = rng.gen_range(0..=1);
                let grade = top + p * m;
                // half of the terms have the shape z_0 x^(pc) y^(pd) seen by the traces
                let key = if rng.gen_bool(0.5) {
                    let dc = rng.gen_range(0..=(dx - top) / p);
                    let c = random_monomial(&mut rng, n, dc);
                    let d = random_monomial(&mut rng, n, m);
                    (add(&zero, &c.map(|v| v * p as u16)), add(&zero, &d.map(|v| v * p as u16)))
                } else {
                    let da = rng.gen_range(0..=dx);
                    (random_monomial(&mut rng, n, da), random_monomial(&mut rng, n, grade))
                };
                terms.insert(key, rng.gen_range(1..p));
            }
            (z, GradedSection { lambda: Weight::zero(r.rank()), shift: top, terms })
        };
        let mut rep = VerifyReport::new("S(phi(Z).f) = Z.S(f)");
        // pairs whose action leaves the truncated ring are redrawn
        let (mut skipped, max_attempts) = (0, 20 * self.cfg.pair_cases);
        while rep.cases < self.cfg.pair_cases && rep.cases + skipped < max_attempts {
            let (z, f) = draw();
            match r.equivariance_sides(&z, &f) {
                Ok((lhs, rhs)) => {
                    rep.count_nontrivial(!rhs.is_zero());
                    rep.record(|| format!("Z={z} f={}", f.to_text(n).replace('\n', "; ")), &lhs.terms, &rhs.terms, lhs == rhs);
                }
                Err(Error::TruncationExceeded(_)) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if skipped > 0 {
            rep.notes.push(format!("pairs redrawn after leaving the truncation: {skipped}"));
        }
        Ok(rep)
    }

    fn f0_conjugation(&self) -> Result<VerifyReport> {
        let r = self.split_ring()?;
        let alg = r.alg();
        let (p, top) = (r.p(), r.top());
        let n = r.n();
        let rank = r.rank();
        let mut rng = self.rng(13);
        let mut rep = VerifyReport::new("F_0 E_i^(pm) X vs E_i^(pm) F_0 X against E_0 Fr'Y");
        for _ in 0..self.cfg.pair_cases / 5 {
            let mu = Weight::new((0..rank).map(|_| rng.gen_range(-2..=2)).collect());
            let rs = alg.rs();
            let i = rng.gen_range(0..rank);
            // half the cases take Y a root vector for beta with beta + alpha_i a root
            let linked: Vec<usize> = (0..n)
                .filter(|&j| {
                    let mut e = [0u16; MAX_ROOTS];
                    e[j] = 1;
                    let mut w = exps_root(rs, &e);
                    w[i] += 1;
                    (0..n).any(|l| {
                        let mut u = [0u16; MAX_ROOTS];
                        u[l] = 1;
                        exps_root(rs, &u) == w
                    })
                })
                .collect();
            let structured = !linked.is_empty() && rng.gen_bool(0.5);
            let (nb, m, dk) = if structured { (1, 1, 0) } else { (rng.gen_range(0..=1u32), rng.gen_range(1..=2), rng.gen_range(0..=1)) };
            let grade = top + p * nb;
            let b = if structured {
                let mut e = [0u16; MAX_ROOTS];
                e[linked[rng.gen_range(0..linked.len())]] = 1;
                e
            } else {
                let mons = monomials_of_degree(n, nb);
                mons[rng.gen_range(0..mons.len())]
            };
            // F_0 kills the small augmentation ideal, so X is taken p-stretched
            let k = random_monomial(&mut rng, n, dk).map(|v| v * p as u16);
            let xk = HyperElt::from_key(PbwKey { f: k, ..PbwKey::ONE });
            // only keys with wt(y) - wt(x) = p wt(b) + pm alpha_i - wt(k) can pair
            let (wb, wk) = (exps_root(rs, &b), exps_root(rs, &k));
            let mut diff = [p as i64 * wb[0] - wk[0], p as i64 * wb[1] - wk[1]];
            diff[i] += (p * m) as i64;
            let mut terms = BTreeMap::new();
            let visible = |e: &Exps| e[..n].iter().all(|&v| v as u32 % p == p - 1);
            for y in monomials_of_degree(n, grade) {
                let wy = exps_root(rs, &y);
                let wx = [wy[0] - diff[0], wy[1] - diff[1]];
                if wx[0] < 0 || wx[1] < 0 {
                    continue;
                }
                for a in monomials_of_root_weight(rs, wx) {
                    if degree(&a) <= top + p && ((visible(&a) && visible(&y)) || rng.gen_bool(0.5)) {
                        terms.insert((a, y), rng.gen_range(1..p));
                    }
                }
            }
            // twist index 1 against lambda = p mu gives v_{p mu}
            let f = GradedSection { lambda: mu.scale(p as i64), shift: grade - 1, terms };
            let eim = alg.e(i, p * m);
            let f0 = alg.f0();
            let lhs_x = alg.mul_all(&[f0.clone(), eim.clone(), xk.clone()])?;
            let rhs_x = alg.mul_all(&[eim, f0, xk])?;
            let y = r.definitional_y(&b)?;
            let lhs = r.evaluate(&f, &lhs_x, &y, grade)?;
            let rhs = r.evaluate(&f, &rhs_x, &y, grade)?;
            rep.count_nontrivial(lhs != 0);
            rep.record(|| format!("mu={:?} i={i} m={m} b={:?} X=F^{:?} f={}", mu.coords, &b[..n], &k[..n], f.to_text(n).replace('\n', "; ")), &lhs, &rhs, lhs == rhs);
        }
        Ok(rep)
    }

    fn klt(&self) -> Result<VerifyReport> {
        let r = self.split_ring()?;
        let t = r.truncation();
        r.compare_klt(t.dn.min(t.dx) - r.top())
    }

    fn twist_transport(&self) -> Result<VerifyReport> {
        let r = self.split_ring()?;
        let (top, t) = (r.top(), r.truncation());
        let rho = r.alg().rs().rho();
        let mut rep = VerifyReport::new("r_lambda o sigma_tot = sigma_tot o r_lambda");
        for k in 0..3 {
            let lam = rho.scale(k);
            for (a, b) in all_monomials(r.n(), t.dx.saturating_sub(top), t.dn.saturating_sub(top)) {
                let f = GradedSection::monomial(lam.clone(), a, b, 1);
                let lhs = r.r_lambda(&r.sigma_tot(&f)?);
                let rhs = r.sigma_tot(&r.r_lambda(&f))?;
                rep.record(|| format!("lambda={:?} x^{:?} y^{:?}", lam.coords, &a[..r.n()], &b[..r.n()]), &lhs.terms, &rhs.terms, lhs == rhs);
            }
        }
        Ok(rep)
    }
}

/// All vectors of length `m` with entry sum at most `d`.
fn compositions(m: usize, d: u32) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; m];
    fn rec(i: usize, left: u32, cur: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..=left {
            cur[i] = v as u16;
            rec(i + 1, left - v, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

/// Monomials `x^a y^b` with `|a| <= dx` and `|b| <= dy`.
fn all_monomials(n: usize, dx: u32, dy: u32) -> Vec<SecKey> {
    let xs: Vec<Exps> = (0..=dx).flat_map(|d| monomials_of_degree(n, d)).collect();
    let ys: Vec<Exps> = (0..=dy).flat_map(|d| monomials_of_degree(n, d)).collect();
    ys.iter().flat_map(|b| xs.iter().map(move |a| (*a, *b))).collect()
}

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

fn random_monomial(rng: &mut ChaCha8Rng, n: usize, degree: u32) -> Exps {
    let mons = monomials_of_degree(n, degree);
    mons[rng.gen_range(0..mons.len())]
}

fn z0(r: &SplitRing) -> Exps {
    let mut z = [0; MAX_ROOTS];
    for v in z.iter_mut().take(r.n()) {
        *v = (r.p() - 1) as u16;
    }
    z
}

fn add(a: &Exps, b: &Exps) -> Exps {
    std::array::from_fn(|k| a[k] + b[k])
}

/// `Z * Y` for words `Z`, `Y` of `E` atoms as a signed sum of words, using
/// `E_i^(m) * Y = sum_j (-1)^(m-j) E_i^(j) Y E_i^(m-j)`.
fn adjoint_words(z: &GenWord, y: &GenWord, p: u32) -> Vec<(GenWord, u32)> {
    let mut acc: Vec<(Vec<Atom>, u32)> = vec![(y.atoms.clone(), 1)];
    for &atom in z.atoms.iter().rev() {
        let Atom::E(i, m) = atom else { unreachable!("E words only") };
        let mut next = Vec::new();
        for (w, c) in &acc {
            for j in 0..=m {
                let mut v = Vec::with_capacity(w.len() + 2);
                if j > 0 {
                    v.push(Atom::E(i, j));
                }
                v.extend_from_slice(w);
                if m > j {
                    v.push(Atom::E(i, m - j));
                }
                let sign = if (m - j) % 2 == 1 { p - c } else { *c };
                next.push((v, sign % p));
            }
        }
        acc = next;
    }
    acc.into_iter().map(|(w, c)| (GenWord::new(w), c)).collect()
}
