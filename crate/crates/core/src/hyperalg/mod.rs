//! The divided-power hyperalgebra over `F_p` in PBW normal form.

mod key;
mod ops;
pub mod zform;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

pub use key::{Exps, PbwKey, MAX_ROOTS};
pub use ops::SmallPart;
pub use ops::TensorElt;
pub use zform::Side;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::rootdata::{RootSystem, Weight};
use zform::Engine;

/// An element of the hyperalgebra over `F_p`: PBW keys with nonzero
/// coefficients in `0..p`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HyperElt {
    pub terms: BTreeMap<PbwKey, u32>,
}

impl HyperElt {
    pub fn zero() -> Self {
        HyperElt::default()
    }

    pub fn from_key(key: PbwKey) -> Self {
        HyperElt { terms: BTreeMap::from([(key, 1)]) }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn keys(&self) -> impl Iterator<Item = &PbwKey> {
        self.terms.keys()
    }

    pub fn coeff(&self, key: &PbwKey) -> u32 {
        self.terms.get(key).copied().unwrap_or(0)
    }

    /// Whether every term lies in the positive nilpotent part.
    pub fn in_plus(&self) -> bool {
        self.keys().all(|k| !k.has_h() && !k.has_f())
    }

    pub fn in_minus(&self) -> bool {
        self.keys().all(|k| !k.has_h() && !k.has_e())
    }

    pub fn in_torus(&self) -> bool {
        self.keys().all(|k| !k.has_e() && !k.has_f())
    }

    pub fn in_borel(&self) -> bool {
        self.keys().all(|k| !k.has_f())
    }
}

/// One atom of a generator word: `E_i^(n)`, `F_i^(n)` or `binom(H_i, n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Atom {
    E(usize, u32),
    F(usize, u32),
    H(usize, u32),
}

/// A formal word in simple-root generators; the empty word is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GenWord {
    pub atoms: Vec<Atom>,
}

impl GenWord {
    pub fn new(atoms: Vec<Atom>) -> Self {
        GenWord { atoms }
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

impl fmt::Display for GenWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return f.write_str("1");
        }
        let parts: Vec<String> = self
            .atoms
            .iter()
            .map(|a| match a {
                Atom::E(i, n) => format!("E{}^({n})", i + 1),
                Atom::F(i, n) => format!("F{}^({n})", i + 1),
                Atom::H(i, n) => format!("C(H{},{n})", i + 1),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Arithmetic context: a root system, a good prime, and the exponent cap.
pub struct Hyperalgebra {
    rs: Arc<RootSystem>,
    field: PrimeField,
    engine: Engine,
    antipode_cache: DashMap<PbwKey, Arc<HyperElt>, rustc_hash::FxBuildHasher>,
}

impl Hyperalgebra {
    /// Context with the default exponent cap `p^2 - 1`.
    pub fn new(rs: Arc<RootSystem>, p: u32) -> Result<Self> {
        let cap = p.saturating_mul(p).saturating_sub(1).min(u16::MAX as u32) as u16;
        Self::with_cap(rs, p, cap)
    }

    pub fn with_cap(rs: Arc<RootSystem>, p: u32, cap: u16) -> Result<Self> {
        rs.check_good_prime(p)?;
        Ok(Hyperalgebra {
            field: PrimeField::new(p),
            engine: Engine::new(rs.clone(), cap),
            rs,
            antipode_cache: DashMap::default(),
        })
    }

    pub fn rs(&self) -> &RootSystem {
        &self.rs
    }

    pub fn rs_arc(&self) -> Arc<RootSystem> {
        self.rs.clone()
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.field.p()
    }

    pub fn cap(&self) -> u16 {
        self.engine.cap()
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Number of positive roots.
    pub fn n(&self) -> usize {
        self.rs.num_pos()
    }

    pub fn rank(&self) -> usize {
        self.rs.rank
    }

    pub fn one(&self) -> HyperElt {
        HyperElt::from_key(PbwKey::ONE)
    }

    pub fn scalar(&self, c: u32) -> HyperElt {
        self.scale(&self.one(), c)
    }

    /// `E_beta^(n)` for the positive root at position `k`.
    pub fn e_root(&self, k: usize, n: u32) -> HyperElt {
        let mut key = PbwKey::ONE;
        key.e[k] = n as u16;
        HyperElt::from_key(key)
    }

    pub fn f_root(&self, k: usize, n: u32) -> HyperElt {
        let mut key = PbwKey::ONE;
        key.f[k] = n as u16;
        HyperElt::from_key(key)
    }

    /// `E_i^(n)` for the simple root `i` (zero-based).
    pub fn e(&self, i: usize, n: u32) -> HyperElt {
        self.e_root(self.rs.simple_root_position(i), n)
    }

    pub fn f(&self, i: usize, n: u32) -> HyperElt {
        self.f_root(self.rs.simple_root_position(i), n)
    }

    pub fn hbin(&self, i: usize, n: u32) -> HyperElt {
        let mut key = PbwKey::ONE;
        key.h[i] = n as u16;
        HyperElt::from_key(key)
    }

    pub fn add(&self, a: &HyperElt, b: &HyperElt) -> HyperElt {
        let mut out = a.clone();
        self.add_assign(&mut out, b, 1);
        out
    }

    pub fn sub(&self, a: &HyperElt, b: &HyperElt) -> HyperElt {
        let mut out = a.clone();
        self.add_assign(&mut out, b, self.field.neg(1));
        out
    }

    /// `acc += c * b`.
    pub fn add_assign(&self, acc: &mut HyperElt, b: &HyperElt, c: u32) {
        let f = self.field;
        for (k, &v) in &b.terms {
            let e = acc.terms.entry(*k).or_insert(0);
            *e = f.add(*e, f.mul(v, c));
            if *e == 0 {
                acc.terms.remove(k);
            }
        }
    }

    pub fn add_term(&self, acc: &mut HyperElt, key: PbwKey, c: u32) {
        if c == 0 {
            return;
        }
        let e = acc.terms.entry(key).or_insert(0);
        *e = self.field.add(*e, c);
        if *e == 0 {
            acc.terms.remove(&key);
        }
    }

    pub fn scale(&self, a: &HyperElt, c: u32) -> HyperElt {
        let c = c % self.p();
        if c == 0 {
            return HyperElt::zero();
        }
        HyperElt { terms: a.terms.iter().map(|(k, v)| (*k, self.field.mul(*v, c))).collect() }
    }

    pub fn neg(&self, a: &HyperElt) -> HyperElt {
        self.scale(a, self.p() - 1)
    }

    /// Product of two PBW monomials, reduced mod p.
    pub fn mul_keys(&self, a: PbwKey, b: PbwKey) -> Result<Vec<(PbwKey, u32)>> {
        let z = self.engine.mul_keys(a, b)?;
        Ok(z.iter().map(|(k, c)| (*k, self.field.from_i128(*c))).filter(|(_, c)| *c != 0).collect())
    }

    pub fn mul(&self, a: &HyperElt, b: &HyperElt) -> Result<HyperElt> {
        let f = self.field;
        let mut out = HyperElt::zero();
        for (ka, &ca) in &a.terms {
            for (kb, &cb) in &b.terms {
                let cab = f.mul(ca, cb);
                for (k, c) in self.engine.mul_keys(*ka, *kb)?.iter() {
                    self.add_term(&mut out, *k, f.mul(cab, f.from_i128(*c)));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_all(&self, factors: &[HyperElt]) -> Result<HyperElt> {
        let mut acc = self.one();
        for x in factors {
            acc = self.mul(&acc, x)?;
        }
        Ok(acc)
    }

    pub fn atom(&self, a: Atom) -> Result<HyperElt> {
        let check = |i: usize| {
            if i >= self.rank() {
                Err(Error::IndexOutOfRange { index: i, rank: self.rank() })
            } else {
                Ok(())
            }
        };
        Ok(match a {
            Atom::E(i, n) => {
                check(i)?;
                self.e(i, n)
            }
            Atom::F(i, n) => {
                check(i)?;
                self.f(i, n)
            }
            Atom::H(i, n) => {
                check(i)?;
                self.hbin(i, n)
            }
        })
    }

    /// The product of the atoms of a word, in normal form.
    pub fn normalize(&self, w: &GenWord) -> Result<HyperElt> {
        let mut acc = self.one();
        for &a in &w.atoms {
            acc = self.mul(&acc, &self.atom(a)?)?;
        }
        Ok(acc)
    }

    /// Torus weight of a PBW monomial.
    pub fn weight_of(&self, key: &PbwKey) -> Weight {
        let mut r = [0i64; 2];
        for k in 0..self.n() {
            let beta = self.rs.root(k);
            let d = key.e[k] as i64 - key.f[k] as i64;
            r[0] += d * beta[0];
            r[1] += d * beta[1];
        }
        self.rs.root_weight(r)
    }

    /// Canonical text form, one `E[..] H[..] F[..] : c` line per term.
    pub fn to_text(&self, x: &HyperElt) -> String {
        let mut s = String::new();
        for (k, c) in &x.terms {
            s.push_str(&format!("{} : {}\n", k.display(self.n(), self.rank()), c));
        }
        s
    }

    pub fn parse_text(&self, text: &str) -> Result<HyperElt> {
        let mut out = HyperElt::zero();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (lhs, rhs) = line.split_once(':').ok_or_else(|| Error::Parse(format!("missing `:` in `{line}`")))?;
            let coeff: i64 = rhs.trim().parse().map_err(|_| Error::Parse(format!("bad coefficient in `{line}`")))?;
            let mut key = PbwKey::ONE;
            let mut seen = [false; 3];
            for part in lhs.split_whitespace() {
                let (tag, body) = part.split_at(1);
                let inner = body
                    .strip_prefix('[')
                    .and_then(|b| b.strip_suffix(']'))
                    .ok_or_else(|| Error::Parse(format!("bad block `{part}`")))?;
                let vals: Vec<u16> = if inner.is_empty() {
                    vec![]
                } else {
                    inner
                        .split(',')
                        .map(|v| v.trim().parse().map_err(|_| Error::Parse(format!("bad exponent in `{part}`"))))
                        .collect::<Result<_>>()?
                };
                let (slot, len, dst): (usize, usize, &mut [u16]) = match tag {
                    "E" => (0, self.n(), &mut key.e[..]),
                    "H" => (1, self.rank(), &mut key.h[..]),
                    "F" => (2, self.n(), &mut key.f[..]),
                    _ => return Err(Error::Parse(format!("unknown block `{part}`"))),
                };
                if vals.len() != len {
                    return Err(Error::Parse(format!("block `{part}` needs {len} entries")));
                }
                dst[..len].copy_from_slice(&vals);
                seen[slot] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::Parse(format!("line `{line}` must have E, H and F blocks")));
            }
            self.add_term(&mut out, key, self.field.from_i64(coeff));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
