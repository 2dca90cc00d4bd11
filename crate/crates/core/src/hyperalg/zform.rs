//! Straightening in the Kostant Z-form over the integers.
//!
//! Monomials are `E^(a) binom(H, b) F^(c)` with root vectors in the fixed
//! convex order. Products are built from right multiplication by single
//! Chevalley generators; a divided power `x^(m)` is applied as `m`
//! successive multiplications by `x`, dividing exactly by `k` at step `k`.

use rustc_hash::{FxBuildHasher, FxHashMap as HashMap};
use std::sync::Arc;

use dashmap::DashMap;

use super::key::{Exps, PbwKey, MAX_ROOTS};
use crate::error::{Error, Result};
use crate::field::binom_i128;
use crate::rootdata::{BasisIndex, RootSystem};

pub type ZTerms = Vec<(PbwKey, i128)>;
type NilTerms = Vec<(Exps, i128)>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

pub struct Engine {
    rs: Arc<RootSystem>,
    cap: u16,
    nil_gen: [DashMap<(Exps, u8), Arc<NilTerms>, FxBuildHasher>; 2],
    nil_prod: [DashMap<(Exps, Exps), Arc<NilTerms>, FxBuildHasher>; 2],
    gen_cache: DashMap<(PbwKey, u8), Arc<ZTerms>, FxBuildHasher>,
    prod_cache: DashMap<(PbwKey, PbwKey), Arc<ZTerms>, FxBuildHasher>,
    hbin_cache: DashMap<([u16; 2], u8, i64, u16), Arc<Vec<([u16; 2], i128)>>, FxBuildHasher>,
}

fn side_idx(s: Side) -> usize {
    match s {
        Side::Plus => 0,
        Side::Minus => 1,
    }
}

fn add_to<K: std::hash::Hash + Eq>(acc: &mut HashMap<K, i128>, k: K, v: i128) -> Result<()> {
    let e = acc.entry(k).or_insert(0);
    *e = e.checked_add(v).ok_or_else(|| Error::Overflow("coefficient exceeds i128".into()))?;
    Ok(())
}

fn mul_c(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(|| Error::Overflow("coefficient exceeds i128".into()))
}

fn finish<K: Copy>(acc: HashMap<K, i128>) -> Vec<(K, i128)> {
    acc.into_iter().filter(|(_, c)| *c != 0).collect()
}

/// `binom(x, m) binom(x, n) = sum_k c_k binom(x, m + n - k)`.
fn binom_product(m: u16, n: u16) -> Vec<(u16, i128)> {
    (0..=m.min(n))
        .map(|k| {
            let top = (m + n - k) as i128;
            let c = binom_i128(top, m as u32).unwrap() * binom_i128(m as i128, k as u32).unwrap();
            (m + n - k, c)
        })
        .collect()
}

impl Engine {
    pub fn new(rs: Arc<RootSystem>, cap: u16) -> Self {
        Engine {
            rs,
            cap,
            nil_gen: [DashMap::default(), DashMap::default()],
            nil_prod: [DashMap::default(), DashMap::default()],
            gen_cache: DashMap::default(),
            prod_cache: DashMap::default(),
            hbin_cache: DashMap::default(),
        }
    }

    pub fn rs(&self) -> &RootSystem {
        &self.rs
    }

    pub fn cap(&self) -> u16 {
        self.cap
    }

    fn check_cap(&self, v: u16) -> Result<()> {
        if v > self.cap {
            Err(Error::Overflow(format!("exponent {v} exceeds cap {}", self.cap)))
        } else {
            Ok(())
        }
    }

    fn lie_index(&self, side: Side, k: usize) -> BasisIndex {
        match side {
            Side::Plus => k,
            Side::Minus => self.rs.f_index(k),
        }
    }

    fn root_of_lie(&self, side: Side, b: BasisIndex) -> usize {
        let n = self.rs.num_pos();
        match side {
            Side::Plus => {
                assert!(b < n, "nilpotent product left the positive part");
                b
            }
            Side::Minus => {
                assert!(b >= n + self.rs.rank, "nilpotent product left the negative part");
                b - n - self.rs.rank
            }
        }
    }

    /// `x^(exps) * x_k` inside one nilpotent part.
    pub fn nil_mul_gen(&self, side: Side, exps: Exps, k: usize) -> Result<Arc<NilTerms>> {
        let s = side_idx(side);
        if let Some(v) = self.nil_gen[s].get(&(exps, k as u8)) {
            return Ok(v.clone());
        }
        let n = self.rs.num_pos();
        let last = (0..n).rev().find(|&t| exps[t] > 0);
        let out: NilTerms = match last {
            Some(l) if k < l => {
                let mut prefix = exps;
                prefix[l] = 0;
                let c = exps[l];
                let xl = self.lie_index(side, l);
                let xk = self.lie_index(side, k);
                let mut acc: HashMap<Exps, i128> = HashMap::default();
                for j in 0..=c as usize {
                    let g: Vec<(BasisIndex, i64)> =
                        if j == 0 { vec![(xk, 1)] } else { self.rs.ad_divided(xl, j, xk).to_vec() };
                    if g.is_empty() {
                        break;
                    }
                    let rest = c - j as u16;
                    for (t_lie, coef) in g {
                        let t = self.root_of_lie(side, t_lie);
                        let sub = self.nil_mul_gen(side, prefix, t)?;
                        for (m, c2) in sub.iter() {
                            let c2 = mul_c(*c2, coef as i128)?;
                            if m[l..].iter().all(|&x| x == 0) {
                                let mut m2 = *m;
                                m2[l] = rest;
                                add_to(&mut acc, m2, c2)?;
                            } else {
                                for (m2, c3) in self.nil_mul_divpow(side, *m, l, rest)?.iter() {
                                    add_to(&mut acc, *m2, mul_c(c2, *c3)?)?;
                                }
                            }
                        }
                    }
                }
                finish(acc)
            }
            Some(l) if k == l => {
                let mut m = exps;
                m[k] += 1;
                self.check_cap(m[k])?;
                vec![(m, m[k] as i128)]
            }
            _ => {
                let mut m = exps;
                m[k] = 1;
                vec![(m, 1)]
            }
        };
        let out = Arc::new(out);
        self.nil_gen[s].insert((exps, k as u8), out.clone());
        Ok(out)
    }

    /// `x^(exps) * x_k^(m)` inside one nilpotent part.
    fn nil_mul_divpow(&self, side: Side, exps: Exps, k: usize, m: u16) -> Result<Arc<NilTerms>> {
        let mut other = [0u16; MAX_ROOTS];
        other[k] = m;
        self.nil_mul(side, exps, other)
    }

    fn nil_mul_divpow_terms(&self, side: Side, terms: &NilTerms, k: usize, m: u16) -> Result<NilTerms> {
        let mut cur: NilTerms = terms.clone();
        for step in 1..=m as i128 {
            let mut acc: HashMap<Exps, i128> = HashMap::default();
            for (e, c) in &cur {
                for (e2, c2) in self.nil_mul_gen(side, *e, k)?.iter() {
                    add_to(&mut acc, *e2, mul_c(*c, *c2)?)?;
                }
            }
            cur = finish(acc);
            for (e, c) in cur.iter_mut() {
                if *c % step != 0 {
                    return Err(Error::IntegralityViolation(format!(
                        "coefficient {c} of {e:?} not divisible by {step}"
                    )));
                }
                *c /= step;
            }
        }
        Ok(cur)
    }

    /// Product of two monomials of one nilpotent part.
    pub fn nil_mul(&self, side: Side, a: Exps, b: Exps) -> Result<Arc<NilTerms>> {
        let s = side_idx(side);
        if let Some(v) = self.nil_prod[s].get(&(a, b)) {
            return Ok(v.clone());
        }
        let n = self.rs.num_pos();
        let a_last = (0..n).rev().find(|&t| a[t] > 0);
        let b_first = (0..n).find(|&t| b[t] > 0);
        let out = match (a_last, b_first) {
            (_, None) => vec![(a, 1)],
            (None, _) => vec![(b, 1)],
            (Some(l), Some(f)) if l < f => {
                let mut m = a;
                for t in 0..n {
                    m[t] += b[t];
                }
                vec![(m, 1)]
            }
            (Some(l), Some(f)) if l == f && b[f + 1..].iter().all(|&x| x == 0) => {
                let mut m = a;
                m[l] += b[l];
                self.check_cap(m[l])?;
                vec![(m, binom_i128(m[l] as i128, b[l] as u32).unwrap())]
            }
            (_, Some(f)) => {
                let mut rest = b;
                rest[f] = 0;
                let head = self.nil_mul_divpow_terms(side, &vec![(a, 1)], f, b[f])?;
                if rest.iter().all(|&x| x == 0) {
                    head
                } else {
                    let mut acc: HashMap<Exps, i128> = HashMap::default();
                    for (e, c) in head {
                        for (e2, c2) in self.nil_mul(side, e, rest)?.iter() {
                            add_to(&mut acc, *e2, mul_c(c, *c2)?)?;
                        }
                    }
                    finish(acc)
                }
            }
        };
        let out = Arc::new(out);
        self.nil_prod[s].insert((a, b), out.clone());
        Ok(out)
    }

    fn f_weight_pair(&self, f: &Exps, i: usize) -> i64 {
        (0..self.rs.num_pos()).map(|k| f[k] as i64 * self.rs.root_pair(self.rs.root(k), i)).sum()
    }

    /// `binom(H, b) * binom(H_i + s, n)` expanded in the binomial basis.
    fn h_times_shifted_binom(&self, h: [u16; 2], i: usize, s: i64, n: u16) -> Result<Arc<Vec<([u16; 2], i128)>>> {
        let key = (h, i as u8, s, n);
        if let Some(v) = self.hbin_cache.get(&key) {
            return Ok(v.clone());
        }
        let out = Arc::new(self.h_times_shifted_binom_uncached(h, i, s, n)?);
        self.hbin_cache.insert(key, out.clone());
        Ok(out)
    }

    fn h_times_shifted_binom_uncached(&self, h: [u16; 2], i: usize, s: i64, n: u16) -> Result<Vec<([u16; 2], i128)>> {
        let mut acc: HashMap<[u16; 2], i128> = HashMap::default();
        for j in 0..=n {
            let cj = binom_i128(s as i128, j as u32).ok_or_else(|| Error::Overflow("binomial".into()))?;
            if cj == 0 {
                continue;
            }
            for (deg, c) in binom_product(h[i], n - j) {
                self.check_cap(deg)?;
                let mut h2 = h;
                h2[i] = deg;
                add_to(&mut acc, h2, mul_c(cj, c)?)?;
            }
        }
        Ok(finish(acc))
    }

    /// `key * binom(H_i, n)`.
    fn mul_binom(&self, key: PbwKey, i: usize, n: u16) -> Result<ZTerms> {
        if n == 0 {
            return Ok(vec![(key, 1)]);
        }
        // F^(c) P(H) = P(H + wt) F^(c) with wt(h_i) = sum c_k <beta_k, alpha_i^vee>
        let s = self.f_weight_pair(&key.f, i);
        Ok(self
            .h_times_shifted_binom(key.h, i, s, n)?
            .iter()
            .map(|&(h, c)| (PbwKey { h, ..key }, c))
            .collect())
    }

    /// `key * x` for a single Chevalley basis vector `x`.
    pub fn mul_gen(&self, key: PbwKey, x: BasisIndex) -> Result<Arc<ZTerms>> {
        if let Some(v) = self.gen_cache.get(&(key, x as u8)) {
            return Ok(v.clone());
        }
        let n = self.rs.num_pos();
        let rank = self.rs.rank;
        let out: ZTerms = if x >= n + rank {
            let k = x - n - rank;
            self.nil_mul_gen(Side::Minus, key.f, k)?.iter().map(|(f, c)| (PbwKey { f: *f, ..key }, *c)).collect()
        } else if x >= n {
            // binom(H, b) F h_i = binom(H, b) (h_i + s) F
            let i = x - n;
            let s = self.f_weight_pair(&key.f, i) as i128;
            let b = key.h[i];
            let mut acc: HashMap<PbwKey, i128> = HashMap::default();
            let mut up = key;
            up.h[i] = b + 1;
            self.check_cap(up.h[i])?;
            add_to(&mut acc, up, b as i128 + 1)?;
            add_to(&mut acc, key, b as i128 + s)?;
            finish(acc)
        } else {
            self.mul_e(key, x)?
        };
        let out = Arc::new(out);
        self.gen_cache.insert((key, x as u8), out.clone());
        Ok(out)
    }

    fn mul_e(&self, key: PbwKey, k: usize) -> Result<ZTerms> {
        let n = self.rs.num_pos();
        let rank = self.rs.rank;
        let mut acc: HashMap<PbwKey, i128> = HashMap::default();
        match (0..n).rev().find(|&t| key.f[t] > 0) {
            None => {
                // binom(H, b) e_k = e_k binom(H + beta_k, b)
                let beta = self.rs.root(k);
                let mut hs: Vec<([u16; 2], i128)> = vec![([0, 0], 1)];
                for i in 0..rank {
                    let s = self.rs.root_pair(beta, i);
                    let part = self.h_times_shifted_binom([0, 0], i, s, key.h[i])?;
                    let mut next = Vec::new();
                    for (h, c) in &hs {
                        for (h2, c2) in part.iter() {
                            let mut hh = *h;
                            hh[i] = h2[i];
                            next.push((hh, mul_c(*c, *c2)?));
                        }
                    }
                    hs = next;
                }
                for (e, c) in self.nil_mul_gen(Side::Plus, key.e, k)?.iter() {
                    for (h, c2) in &hs {
                        add_to(&mut acc, PbwKey { e: *e, h: *h, f: [0; MAX_ROOTS] }, mul_c(*c, *c2)?)?;
                    }
                }
            }
            Some(l) => {
                // F_l^(c) e_k = sum_j ad_{f_l}^(j)(e_k) F_l^(c - j)
                let c = key.f[l];
                let mut prefix = key;
                prefix.f[l] = 0;
                let fl = self.rs.f_index(l);
                for j in 0..=c as usize {
                    let g: Vec<(BasisIndex, i64)> =
                        if j == 0 { vec![(k, 1)] } else { self.rs.ad_divided(fl, j, k).to_vec() };
                    if g.is_empty() {
                        break;
                    }
                    let rest = c - j as u16;
                    for (t, coef) in g {
                        let sub = self.mul_gen(prefix, t)?;
                        for (m, c2) in sub.iter() {
                            let c2 = mul_c(*c2, coef as i128)?;
                            for (f2, c3) in self.nil_mul_divpow(Side::Minus, m.f, l, rest)?.iter() {
                                add_to(&mut acc, PbwKey { f: *f2, ..*m }, mul_c(c2, *c3)?)?;
                            }
                        }
                    }
                }
            }
        }
        Ok(finish(acc))
    }

    fn mul_gen_divpow(&self, terms: ZTerms, x: BasisIndex, m: u16) -> Result<ZTerms> {
        let mut cur = terms;
        for step in 1..=m as i128 {
            let mut acc: HashMap<PbwKey, i128> = HashMap::default();
            for (k, c) in &cur {
                for (k2, c2) in self.mul_gen(*k, x)?.iter() {
                    add_to(&mut acc, *k2, mul_c(*c, *c2)?)?;
                }
            }
            cur = finish(acc);
            for (k, c) in cur.iter_mut() {
                if *c % step != 0 {
                    return Err(Error::IntegralityViolation(format!(
                        "coefficient {c} of {k:?} not divisible by {step}"
                    )));
                }
                *c /= step;
            }
        }
        Ok(cur)
    }

    /// Product of two PBW monomials.
    pub fn mul_keys(&self, a: PbwKey, b: PbwKey) -> Result<Arc<ZTerms>> {
        if let Some(v) = self.prod_cache.get(&(a, b)) {
            return Ok(v.clone());
        }
        let n = self.rs.num_pos();
        let rank = self.rs.rank;
        let b_has_e = b.e.iter().any(|&x| x > 0);
        let b_has_h = b.h.iter().any(|&x| x > 0);
        let mut cur: ZTerms;
        if !b_has_e {
            cur = vec![(a, 1)];
        } else if a.f.iter().all(|&x| x == 0) {
            // E^(a) binom(H, h) E^(b) = E^(a) E^(b) binom(H + wt(b), h)
            let mut hs: Vec<([u16; 2], i128)> = vec![([0, 0], 1)];
            for i in 0..rank {
                let s: i64 = (0..n).map(|k| b.e[k] as i64 * self.rs.root_pair(self.rs.root(k), i)).sum();
                let part = self.h_times_shifted_binom([0, 0], i, s, a.h[i])?;
                let mut next = Vec::new();
                for (h, c) in &hs {
                    for (h2, c2) in part.iter() {
                        let mut hh = *h;
                        hh[i] = h2[i];
                        next.push((hh, mul_c(*c, *c2)?));
                    }
                }
                hs = next;
            }
            let mut acc: HashMap<PbwKey, i128> = HashMap::default();
            for (e, c) in self.nil_mul(Side::Plus, a.e, b.e)?.iter() {
                for (h, c2) in &hs {
                    add_to(&mut acc, PbwKey { e: *e, h: *h, f: [0; MAX_ROOTS] }, mul_c(*c, *c2)?)?;
                }
            }
            cur = finish(acc);
        } else {
            cur = vec![(a, 1)];
            for k in 0..n {
                if b.e[k] > 0 {
                    cur = self.mul_gen_divpow(cur, k, b.e[k])?;
                }
            }
        }
        if b_has_h {
            for i in 0..rank {
                if b.h[i] == 0 {
                    continue;
                }
                let mut acc: HashMap<PbwKey, i128> = HashMap::default();
                for (k, c) in &cur {
                    for (k2, c2) in self.mul_binom(*k, i, b.h[i])? {
                        add_to(&mut acc, k2, mul_c(*c, c2)?)?;
                    }
                }
                cur = finish(acc);
            }
        }
        if b.f.iter().any(|&x| x > 0) {
            let mut acc: HashMap<PbwKey, i128> = HashMap::default();
            for (k, c) in &cur {
                for (f2, c2) in self.nil_mul(Side::Minus, k.f, b.f)?.iter() {
                    add_to(&mut acc, PbwKey { f: *f2, ..*k }, mul_c(*c, *c2)?)?;
                }
            }
            cur = finish(acc);
        }
        for (k, _) in &cur {
            for &x in k.e.iter().chain(k.h.iter()).chain(k.f.iter()) {
                self.check_cap(x)?;
            }
        }
        let out = Arc::new(cur);
        self.prod_cache.insert((a, b), out.clone());
        Ok(out)
    }
}
