//! Hopf structure, Frobenius maps, the idempotent `mu_0`, the splitting map
//! `phi`, characters of the torus part, `E_0`, `F_0` and the adjoint action.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Atom, GenWord, HyperElt, Hyperalgebra, PbwKey, Side, MAX_ROOTS};
use crate::error::{Error, Result};
use crate::rootdata::Weight;

/// Element of the tensor square, in bilinear normal form.
pub type TensorElt = BTreeMap<(PbwKey, PbwKey), u32>;

/// All ways of writing `v` as `a + b` componentwise.
fn splits(v: &[u16]) -> Vec<(Vec<u16>, Vec<u16>)> {
    let mut out = vec![(Vec::new(), Vec::new())];
    for &x in v {
        let mut next = Vec::with_capacity(out.len() * (x as usize + 1));
        for (a, b) in &out {
            for i in 0..=x {
                let mut a2 = a.clone();
                let mut b2 = b.clone();
                a2.push(i);
                b2.push(x - i);
                next.push((a2, b2));
            }
        }
        out = next;
    }
    out
}

fn key_from_flat(v: &[u16]) -> PbwKey {
    let mut k = PbwKey::ONE;
    k.e.copy_from_slice(&v[..MAX_ROOTS]);
    k.h.copy_from_slice(&v[MAX_ROOTS..MAX_ROOTS + 2]);
    k.f.copy_from_slice(&v[MAX_ROOTS + 2..]);
    k
}

impl Hyperalgebra {
    /// Coproduct of a PBW monomial: every component splits independently
    /// because the root vectors are primitive and `binom(H, n)` is of
    /// divided-power type.
    pub fn comult_key(&self, key: &PbwKey) -> Vec<(PbwKey, PbwKey)> {
        let flat: Vec<u16> = key.components().collect();
        splits(&flat).into_iter().map(|(a, b)| (key_from_flat(&a), key_from_flat(&b))).collect()
    }

    pub fn comult(&self, a: &HyperElt) -> TensorElt {
        let f = self.field();
        let mut out = TensorElt::new();
        for (k, &c) in &a.terms {
            for pair in self.comult_key(k) {
                let e = out.entry(pair).or_insert(0);
                *e = f.add(*e, c);
            }
        }
        out.retain(|_, v| *v != 0);
        out
    }

    pub fn counit(&self, a: &HyperElt) -> u32 {
        a.coeff(&PbwKey::ONE)
    }

    /// Antipode of a single PBW monomial.
    pub fn antipode_key(&self, key: &PbwKey) -> Result<Arc<HyperElt>> {
        if let Some(v) = self.antipode_cache.get(key) {
            return Ok(v.clone());
        }
        let fld = self.field();
        let n = self.n();
        let mut factors: Vec<HyperElt> = Vec::new();
        let sign = |m: u16| if m % 2 == 1 { fld.neg(1) } else { 1 };
        for k in (0..n).rev() {
            if key.f[k] > 0 {
                factors.push(self.scale(&self.f_root(k, key.f[k] as u32), sign(key.f[k])));
            }
        }
        for i in (0..self.rank()).rev() {
            let b = key.h[i];
            if b > 0 {
                // binom(-H, b) = (-1)^b binom(H + b - 1, b)
                let mut x = HyperElt::zero();
                for j in 0..=b {
                    let c = fld.binom(b as i64 - 1, j as u64);
                    let mut hk = PbwKey::ONE;
                    hk.h[i] = b - j;
                    self.add_term(&mut x, hk, fld.mul(c, sign(b)));
                }
                factors.push(x);
            }
        }
        for k in (0..n).rev() {
            if key.e[k] > 0 {
                factors.push(self.scale(&self.e_root(k, key.e[k] as u32), sign(key.e[k])));
            }
        }
        let out = Arc::new(self.mul_all(&factors)?);
        self.antipode_cache.insert(*key, out.clone());
        Ok(out)
    }

    pub fn antipode(&self, a: &HyperElt) -> Result<HyperElt> {
        let mut out = HyperElt::zero();
        for (k, &c) in &a.terms {
            self.add_assign(&mut out, &*self.antipode_key(k)?, c);
        }
        Ok(out)
    }

    /// Tensor product of two elements.
    pub fn tensor(&self, a: &HyperElt, b: &HyperElt) -> TensorElt {
        let f = self.field();
        let mut out = TensorElt::new();
        for (ka, &ca) in &a.terms {
            for (kb, &cb) in &b.terms {
                out.insert((*ka, *kb), f.mul(ca, cb));
            }
        }
        out
    }

    /// Componentwise product in the tensor square.
    pub fn tensor_mul(&self, a: &TensorElt, b: &TensorElt) -> Result<TensorElt> {
        let f = self.field();
        let mut out = TensorElt::new();
        for ((a1, a2), &ca) in a {
            for ((b1, b2), &cb) in b {
                let c = f.mul(ca, cb);
                let left = self.mul_keys(*a1, *b1)?;
                let right = self.mul_keys(*a2, *b2)?;
                for (l, cl) in &left {
                    for (r, cr) in &right {
                        let e = out.entry((*l, *r)).or_insert(0);
                        *e = f.add(*e, f.mul(c, f.mul(*cl, *cr)));
                    }
                }
            }
        }
        out.retain(|_, v| *v != 0);
        Ok(out)
    }

    /// Frobenius: divide every component by `p`, killing terms where some
    /// component is not divisible.
    pub fn frobenius(&self, a: &HyperElt) -> HyperElt {
        let p = self.p() as u16;
        let mut out = HyperElt::zero();
        for (k, &c) in &a.terms {
            if k.components().all(|x| x % p == 0) {
                self.add_term(&mut out, k.map_components(|x| x / p), c);
            }
        }
        out
    }

    fn stretch_atom(&self, a: Atom) -> Atom {
        let p = self.p();
        match a {
            Atom::E(i, n) => Atom::E(i, p * n),
            Atom::F(i, n) => Atom::F(i, p * n),
            Atom::H(i, n) => Atom::H(i, p * n),
        }
    }

    fn fr_prime_checked(&self, w: &GenWord, ok: fn(&Atom) -> bool, name: &str) -> Result<HyperElt> {
        if let Some(a) = w.atoms.iter().find(|a| !ok(a)) {
            return Err(Error::WrongAtomKind(format!("{name} does not accept {a:?}")));
        }
        self.normalize(&GenWord::new(w.atoms.iter().map(|&a| self.stretch_atom(a)).collect()))
    }

    /// `Fr'` on a word of `E` atoms: `E_i^(n) -> E_i^(pn)`, multiplied out.
    pub fn fr_prime_word(&self, w: &GenWord) -> Result<HyperElt> {
        self.fr_prime_checked(w, |a| matches!(a, Atom::E(..)), "Fr'")
    }

    pub fn fr_prime_minus_word(&self, w: &GenWord) -> Result<HyperElt> {
        self.fr_prime_checked(w, |a| matches!(a, Atom::F(..)), "Fr'-")
    }

    pub fn fr_prime_zero_word(&self, w: &GenWord) -> Result<HyperElt> {
        self.fr_prime_checked(w, |a| matches!(a, Atom::H(..)), "Fr'0")
    }

    /// Componentwise stretch `n -> pn` on a nilpotent element.
    pub fn fr_prime_pbw(&self, a: &HyperElt, side: Side) -> Result<HyperElt> {
        let ok = match side {
            Side::Plus => a.in_plus(),
            Side::Minus => a.in_minus(),
        };
        if !ok {
            return Err(Error::WrongTriangularPart(format!("expected an element of the {side:?} nilpotent part")));
        }
        let p = self.p() as u16;
        Ok(HyperElt { terms: a.terms.iter().map(|(k, c)| (k.map_components(|x| x * p), *c)).collect() })
    }

    /// `mu_0 = prod_i binom(H_i - 1, p - 1)`.
    pub fn mu0(&self) -> HyperElt {
        let f = self.field();
        let p = self.p() as u16;
        let mut acc: Vec<([u16; 2], u32)> = vec![([0, 0], 1)];
        for i in 0..self.rank() {
            let mut next = Vec::new();
            for (h, c) in &acc {
                for j in 0..p {
                    let mut h2 = *h;
                    h2[i] = p - 1 - j;
                    let s = if j % 2 == 1 { f.neg(1) } else { 1 };
                    next.push((h2, f.mul(*c, s)));
                }
            }
            acc = next;
        }
        let mut out = HyperElt::zero();
        for (h, c) in acc {
            self.add_term(&mut out, PbwKey { h, ..PbwKey::ONE }, c);
        }
        out
    }

    /// `phi` on a word, atom by atom: `phi(x) = Fr'(x) mu_0`.
    pub fn phi_word(&self, w: &GenWord) -> Result<HyperElt> {
        let mu0 = self.mu0();
        let mut acc = mu0.clone();
        for &a in &w.atoms {
            let stretched = self.atom(self.stretch_atom(a))?;
            acc = self.mul(&acc, &self.mul(&stretched, &mu0)?)?;
        }
        Ok(acc)
    }

    /// Factors of `phi(w)` in order: `Fr'(a) mu_0` for every atom `a`, and a
    /// leading `mu_0`. Their product is `phi_word(w)`.
    pub fn phi_factors(&self, w: &GenWord) -> Result<Vec<HyperElt>> {
        let mu0 = self.mu0();
        let mut out = vec![mu0.clone()];
        for &a in &w.atoms {
            out.push(self.mul(&self.atom(self.stretch_atom(a))?, &mu0)?);
        }
        Ok(out)
    }

    /// The character `c_lambda` of the torus part.
    pub fn character(&self, lambda: &Weight, h: &HyperElt) -> Result<u32> {
        if !h.in_torus() {
            return Err(Error::NotTorusPart);
        }
        let f = self.field();
        let mut total = 0;
        for (k, &c) in &h.terms {
            let mut v = c;
            for i in 0..self.rank() {
                v = f.mul(v, f.binom(lambda.coords[i], k.h[i] as u64));
            }
            total = f.add(total, v);
        }
        Ok(total)
    }

    pub fn e0_key(&self) -> PbwKey {
        let mut k = PbwKey::ONE;
        for t in 0..self.n() {
            k.e[t] = (self.p() - 1) as u16;
        }
        k
    }

    pub fn f0_key(&self) -> PbwKey {
        let mut k = PbwKey::ONE;
        for t in 0..self.n() {
            k.f[t] = (self.p() - 1) as u16;
        }
        k
    }

    /// `E_0 = prod_beta E_beta^(p-1)`.
    pub fn e0(&self) -> HyperElt {
        HyperElt::from_key(self.e0_key())
    }

    pub fn f0(&self) -> HyperElt {
        HyperElt::from_key(self.f0_key())
    }

    /// PBW monomials with all exponents below `p` in the chosen part.
    pub fn small_spanning_set(&self, part: SmallPart) -> Vec<HyperElt> {
        let p = self.p() as u16;
        let len = match part {
            SmallPart::Plus | SmallPart::Minus => self.n(),
            SmallPart::Torus => self.rank(),
        };
        let mut out = Vec::new();
        let mut v = vec![0u16; len];
        loop {
            let mut k = PbwKey::ONE;
            match part {
                SmallPart::Plus => k.e[..len].copy_from_slice(&v),
                SmallPart::Minus => k.f[..len].copy_from_slice(&v),
                SmallPart::Torus => k.h[..len].copy_from_slice(&v),
            }
            out.push(HyperElt::from_key(k));
            let mut i = 0;
            loop {
                if i == len {
                    return out;
                }
                v[i] += 1;
                if v[i] < p {
                    break;
                }
                v[i] = 0;
                i += 1;
            }
        }
    }

    /// Adjoint action `X * Y = sum X_(1) Y sigma(X_(2))` of the Borel part on
    /// the positive nilpotent part.
    pub fn adjoint(&self, x: &HyperElt, y: &HyperElt) -> Result<HyperElt> {
        if !x.in_borel() {
            return Err(Error::WrongTriangularPart("adjoint action needs a Borel element".into()));
        }
        if !y.in_plus() {
            return Err(Error::WrongTriangularPart("adjoint action acts on the positive nilpotent part".into()));
        }
        self.adjoint_general(x, y)
    }

    /// `sum X_(1) Y sigma(X_(2))` without triangular checks.
    pub fn adjoint_general(&self, x: &HyperElt, y: &HyperElt) -> Result<HyperElt> {
        let mut out = HyperElt::zero();
        for (k, &c) in &x.terms {
            for (k1, k2) in self.comult_key(k) {
                let left = self.mul(&HyperElt::from_key(k1), y)?;
                let prod = self.mul(&left, &*self.antipode_key(&k2)?)?;
                self.add_assign(&mut out, &prod, c);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SmallPart {
    Plus,
    Minus,
    Torus,
}
