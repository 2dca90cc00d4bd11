//! The Steinberg module `L((p-1) rho)` over `F_p`, its invariant pairing and
//! the distinguished section built from its extremal vectors.
//!
//! Basis vectors are PBW vectors `E^(a) f_-` in the lowest-weight Verma
//! module. A vector of weight above the lowest one is zero in the simple
//! quotient exactly when every `f_j` kills it there, so weight spaces are
//! built by increasing height, identifying each PBW vector by its images
//! under the simple lowering operators.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use dashmap::DashMap;
use serde::Serialize;

use crate::dualring::{monomials_of_root_weight, DualRing};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::hyperalg::{Exps, HyperElt, Hyperalgebra, PbwKey, MAX_ROOTS};
use crate::linalg::{express_in_rows, rank as linalg_rank, SparseRref};
use crate::rootdata::{Root, RootSystem, Weight};

/// Default bound on `p^N` accepted by [`StModule::build`].
pub const DEFAULT_SIZE_BOUND: usize = 1000;

/// Column-sparse matrix: entry `j` lists the image of basis vector `j`.
pub type SparseMat = Vec<Vec<(usize, u32)>>;

#[derive(Serialize)]
struct StJson<'a> {
    kind: String,
    p: u32,
    dim: usize,
    weights: Vec<&'a [i64]>,
    f_plus: usize,
    f_minus: usize,
    gen_actions: &'a BTreeMap<String, SparseMat>,
    eta: Vec<(usize, usize, u32)>,
}

pub struct StModule {
    alg: Arc<Hyperalgebra>,
    pub lambda: Weight,
    pub dim: usize,
    pub basis_weights: Vec<Weight>,
    basis_pbw: Vec<Exps>,
    /// weight offset from the lowest weight, in simple-root coordinates
    offsets: Vec<Root>,
    by_offset: HashMap<Root, Vec<usize>>,
    /// coordinates of every PBW vector `E^(a) f_-` with weight in range
    coords: HashMap<Exps, Vec<(usize, u32)>>,
    pub f_plus: usize,
    pub f_minus: usize,
    pub gen_actions: BTreeMap<String, SparseMat>,
    /// `eta[(i, j)]` for basis vectors of opposite weights
    eta: BTreeMap<(usize, usize), u32>,
    factor_cache: DashMap<PbwKey, Arc<SparseMat>>,
}

impl StModule {
    /// Builds the module for a good prime with `p^N <= size_bound`.
    pub fn build(rs: Arc<RootSystem>, p: u32, size_bound: usize) -> Result<Self> {
        rs.check_good_prime(p)?;
        let n = rs.num_pos();
        let expected = (p as usize).checked_pow(n as u32).unwrap_or(usize::MAX);
        if expected > size_bound {
            return Err(Error::SizeBound { dim: expected as u64, bound: size_bound as u64 });
        }
        let mut top = [0i64; 2];
        for k in 0..n {
            top[0] += (p as i64 - 1) * rs.root(k)[0];
            top[1] += (p as i64 - 1) * rs.root(k)[1];
        }
        let cap = (p * p - 1).max(top[0].max(top[1]) as u32 + 2 * p) as u16;
        let alg = Arc::new(Hyperalgebra::with_cap(rs, p, cap)?);
        let mut st = StModule {
            lambda: alg.rs().rho().scale(p as i64 - 1),
            alg,
            dim: 0,
            basis_weights: Vec::new(),
            basis_pbw: Vec::new(),
            offsets: Vec::new(),
            by_offset: HashMap::new(),
            coords: HashMap::new(),
            f_plus: 0,
            f_minus: 0,
            gen_actions: BTreeMap::new(),
            eta: BTreeMap::new(),
            factor_cache: DashMap::new(),
        };
        st.close(top)?;
        if st.dim != expected {
            return Err(Error::ClosureFailure(format!("dimension {} differs from p^N = {expected}", st.dim)));
        }
        let f_plus = st.by_offset.get(&top).filter(|v| v.len() == 1);
        let f_minus = st.by_offset.get(&[0, 0]).filter(|v| v.len() == 1);
        let (Some(fp), Some(fm)) = (f_plus, f_minus) else {
            return Err(Error::ClosureFailure("extremal weight spaces are not lines".into()));
        };
        st.f_plus = fp[0];
        st.f_minus = fm[0];
        st.record_gen_actions()?;
        st.build_eta()?;
        Ok(st)
    }

    pub fn alg(&self) -> &Hyperalgebra {
        &self.alg
    }

    pub fn field(&self) -> PrimeField {
        self.alg.field()
    }

    fn lowest(&self) -> Weight {
        self.lambda.scale(-1)
    }

    fn weight_of_offset(&self, nu: Root) -> Weight {
        let rs = self.alg.rs();
        let mut w = self.lowest();
        for i in 0..rs.rank {
            w = w.add(&rs.simple_root_weight(i).scale(nu[i]));
        }
        w
    }

    /// Scalar of `binom(H, b)` on the lowest weight vector.
    fn binom_at(&self, w: &Weight, b: &[u16; 2]) -> u32 {
        let f = self.field();
        let mut c = 1;
        for i in 0..self.alg.rank() {
            if b[i] > 0 {
                c = f.mul(c, f.binom(w.coords[i], b[i] as u64));
            }
        }
        c
    }

    fn close(&mut self, top: Root) -> Result<()> {
        let rs = self.alg.rs_arc();
        let f = self.field();
        let rank = rs.rank;
        let lowest = self.lowest();
        let mut offsets: Vec<Root> = Vec::new();
        for a in 0..=top[0] {
            for b in 0..=top[1] {
                offsets.push([a, b]);
            }
        }
        offsets.sort_by_key(|o| (o[0] + o[1], *o));
        for nu in offsets {
            let mons = monomials_of_root_weight(&rs, nu);
            if nu == [0, 0] {
                self.push_basis(nu, [0; MAX_ROOTS]);
                self.coords.insert([0; MAX_ROOTS], vec![(self.dim - 1, 1)]);
                continue;
            }
            // signature layout: for each j, the weight space at nu - alpha_j
            let mut blocks: Vec<(usize, Vec<usize>)> = Vec::new();
            let mut width = 0;
            for j in 0..rank {
                let mut lower = nu;
                lower[j] -= 1;
                let idx = if lower[j] < 0 { Vec::new() } else { self.by_offset.get(&lower).cloned().unwrap_or_default() };
                blocks.push((width, idx.clone()));
                width += idx.len();
            }
            let mut sigs: Vec<Vec<u32>> = Vec::with_capacity(mons.len());
            for a in &mons {
                let mut sig = vec![0u32; width];
                let key = PbwKey { e: *a, ..PbwKey::ONE };
                for j in 0..rank {
                    let (start, idx) = &blocks[j];
                    if idx.is_empty() {
                        continue;
                    }
                    let fj = PbwKey { f: unit(rs.simple_root_position(j)), ..PbwKey::ONE };
                    for (t, c) in self.alg.mul_keys(fj, key)? {
                        if t.has_f() {
                            continue;
                        }
                        let c = f.mul(c, self.binom_at(&lowest, &t.h));
                        if c == 0 {
                            continue;
                        }
                        for &(bi, v) in self.coords.get(&t.e).map(|v| v.as_slice()).unwrap_or(&[]) {
                            let pos = idx.iter().position(|&x| x == bi).expect("weight bookkeeping");
                            sig[start + pos] = f.add(sig[start + pos], f.mul(c, v));
                        }
                    }
                }
                sigs.push(sig);
            }
            let mut chosen: Vec<usize> = Vec::new();
            let mut rows: Vec<Vec<u32>> = Vec::new();
            for (ai, sig) in sigs.iter().enumerate() {
                let mut trial = rows.clone();
                trial.push(sig.clone());
                if linalg_rank(f, trial.clone(), width) > rows.len() {
                    rows = trial;
                    chosen.push(ai);
                }
            }
            let start = self.dim;
            for &ai in &chosen {
                self.push_basis(nu, mons[ai]);
            }
            for (ai, sig) in sigs.iter().enumerate() {
                if rows.is_empty() {
                    self.coords.insert(mons[ai], Vec::new());
                    continue;
                }
                let x = express_in_rows(f, &rows, sig)
                    .ok_or_else(|| Error::ClosureFailure(format!("signature of {:?} outside span", mons[ai])))?;
                let v: Vec<(usize, u32)> =
                    x.iter().enumerate().filter(|(_, c)| **c != 0).map(|(k, c)| (start + k, *c)).collect();
                self.coords.insert(mons[ai], v);
            }
        }
        Ok(())
    }

    fn push_basis(&mut self, nu: Root, a: Exps) {
        let w = self.weight_of_offset(nu);
        self.basis_weights.push(w);
        self.basis_pbw.push(a);
        self.offsets.push(nu);
        self.by_offset.entry(nu).or_default().push(self.dim);
        self.dim += 1;
    }

    /// Matrix of a key with a single nonzero component (or a torus key).
    fn factor_matrix(&self, key: PbwKey) -> Result<Arc<SparseMat>> {
        if let Some(m) = self.factor_cache.get(&key) {
            return Ok(m.clone());
        }
        let f = self.field();
        let mut cols: SparseMat = Vec::with_capacity(self.dim);
        for j in 0..self.dim {
            let mut acc: BTreeMap<usize, u32> = BTreeMap::new();
            let basis = PbwKey { e: self.basis_pbw[j], ..PbwKey::ONE };
            for (t, c) in self.alg.mul_keys(key, basis)? {
                if t.has_f() {
                    continue;
                }
                let c = f.mul(c, self.binom_at(&self.lowest(), &t.h));
                if c == 0 {
                    continue;
                }
                if let Some(v) = self.coords.get(&t.e) {
                    for &(bi, x) in v {
                        let e = acc.entry(bi).or_insert(0);
                        *e = f.add(*e, f.mul(c, x));
                    }
                }
            }
            cols.push(acc.into_iter().filter(|(_, v)| *v != 0).collect());
        }
        let m = Arc::new(cols);
        self.factor_cache.insert(key, m.clone());
        Ok(m)
    }

    fn apply_mat(&self, m: &SparseMat, v: &[u32]) -> Vec<u32> {
        let f = self.field();
        let mut out = vec![0u32; self.dim];
        for (j, &c) in v.iter().enumerate() {
            if c != 0 {
                for &(i, x) in &m[j] {
                    out[i] = f.add(out[i], f.mul(c, x));
                }
            }
        }
        out
    }

    /// Action of a PBW monomial, applied factor by factor from the right.
    pub fn apply_key(&self, key: &PbwKey, v: &[u32]) -> Result<Vec<u32>> {
        let n = self.alg.n();
        let f = self.field();
        let mut cur = v.to_vec();
        for k in (0..n).rev() {
            if key.f[k] > 0 {
                let mut e = [0u16; MAX_ROOTS];
                e[k] = key.f[k];
                cur = self.apply_mat(&*self.factor_matrix(PbwKey { f: e, ..PbwKey::ONE })?, &cur);
            }
        }
        if key.has_h() {
            for (j, c) in cur.iter_mut().enumerate() {
                *c = f.mul(*c, self.binom_at(&self.basis_weights[j], &key.h));
            }
        }
        for k in (0..n).rev() {
            if key.e[k] > 0 {
                let mut e = [0u16; MAX_ROOTS];
                e[k] = key.e[k];
                cur = self.apply_mat(&*self.factor_matrix(PbwKey { e, ..PbwKey::ONE })?, &cur);
            }
        }
        Ok(cur)
    }

    pub fn apply(&self, x: &HyperElt, v: &[u32]) -> Result<Vec<u32>> {
        let f = self.field();
        let mut out = vec![0u32; self.dim];
        for (k, &c) in &x.terms {
            let img = self.apply_key(k, v)?;
            for (o, y) in out.iter_mut().zip(img) {
                *o = f.add(*o, f.mul(c, y));
            }
        }
        Ok(out)
    }

    pub fn basis_vector(&self, j: usize) -> Vec<u32> {
        let mut v = vec![0u32; self.dim];
        v[j] = 1;
        v
    }

    /// The vector `E^(a) f_-`.
    pub fn pbw_vector(&self, a: &Exps) -> Vec<u32> {
        let mut v = vec![0u32; self.dim];
        if let Some(c) = self.coords.get(a) {
            for &(i, x) in c {
                v[i] = x;
            }
        }
        v
    }

    fn gen_keys(&self) -> Vec<(String, PbwKey, u32)> {
        let rs = self.alg.rs();
        let mut out = Vec::new();
        for i in 0..rs.rank {
            let k = rs.simple_root_position(i);
            for n in 1..2 * self.alg.p() {
                let mut e = [0u16; MAX_ROOTS];
                e[k] = n as u16;
                out.push((format!("E({},{n})", i + 1), PbwKey { e, ..PbwKey::ONE }, n));
                out.push((format!("F({},{n})", i + 1), PbwKey { f: e, ..PbwKey::ONE }, n));
            }
        }
        out
    }

    fn record_gen_actions(&mut self) -> Result<()> {
        for (name, key, _) in self.gen_keys() {
            let m = self.factor_matrix(key)?;
            self.gen_actions.insert(name, (*m).clone());
        }
        Ok(())
    }

    /// Solves for the invariant pairing on opposite weight spaces and scales
    /// it so that `eta(F_0 f_+, E_0 f_-) = 1`.
    fn build_eta(&mut self) -> Result<()> {
        let f = self.field();
        let p = self.alg.p();
        // unknowns: pairs (i, j) of basis vectors with opposite weights
        let mut unk: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for i in 0..self.dim {
            let neg = self.basis_weights[i].scale(-1);
            for j in 0..self.dim {
                if self.basis_weights[j] == neg {
                    let id = unk.len();
                    unk.insert((i, j), id);
                }
            }
        }
        let mut system = SparseRref::new(f, unk.len());
        let gens: Vec<(PbwKey, u32)> = self
            .gen_keys()
            .into_iter()
            .filter(|(_, _, n)| *n == 1 || *n == p)
            .map(|(_, k, n)| (k, n))
            .collect();
        for (key, n) in gens {
            let m = self.factor_matrix(key)?;
            let sign = if n % 2 == 1 { f.neg(1) } else { 1 };
            // eta(Y u_i, u_j) - (-1)^n eta(u_i, Y u_j) = 0
            let shift = self.alg.weight_of(&key);
            for i in 0..self.dim {
                let target = self.basis_weights[i].add(&shift).scale(-1);
                for j in 0..self.dim {
                    if self.basis_weights[j] != target {
                        continue;
                    }
                    let mut row: BTreeMap<usize, u32> = BTreeMap::new();
                    for &(k, c) in &m[i] {
                        if let Some(&id) = unk.get(&(k, j)) {
                            let e = row.entry(id).or_insert(0);
                            *e = f.add(*e, c);
                        }
                    }
                    for &(k, c) in &m[j] {
                        if let Some(&id) = unk.get(&(i, k)) {
                            let e = row.entry(id).or_insert(0);
                            *e = f.sub(*e, f.mul(sign, c));
                        }
                    }
                    system.insert(row);
                }
            }
        }
        let ns = system.nullspace();
        if ns.len() != 1 {
            return Err(Error::NonUniqueForm(ns.len()));
        }
        let sol = &ns[0];
        self.eta = unk.iter().filter(|(_, &id)| sol[id] != 0).map(|(&ij, &id)| (ij, sol[id])).collect();
        let v = self.normalization_value()?;
        if v == 0 {
            return Err(Error::NonUniqueForm(0));
        }
        let inv = f.inv(v);
        for c in self.eta.values_mut() {
            *c = f.mul(*c, inv);
        }
        Ok(())
    }

    /// `eta(F_0 f_+, E_0 f_-)`.
    pub fn normalization_value(&self) -> Result<u32> {
        let a = self.apply_key(&self.alg.f0_key(), &self.basis_vector(self.f_plus))?;
        let b = self.pbw_vector(&self.alg.e0_key().e);
        Ok(self.eta_pair(&a, &b))
    }

    pub fn eta_entry(&self, i: usize, j: usize) -> u32 {
        self.eta.get(&(i, j)).copied().unwrap_or(0)
    }

    pub fn eta_pair(&self, u: &[u32], v: &[u32]) -> u32 {
        let f = self.field();
        let mut s = 0;
        for (&(i, j), &c) in &self.eta {
            if u[i] != 0 && v[j] != 0 {
                s = f.add(s, f.mul(c, f.mul(u[i], v[j])));
            }
        }
        s
    }

    /// Scales the pairing by 2, breaking its normalization.
    pub fn corrupt_normalization(&mut self) {
        let f = self.field();
        for c in self.eta.values_mut() {
            *c = f.mul(*c, 2);
        }
    }

    /// Residual count of `eta(Y u, v) = eta(u, sigma(Y) v)` over all stored
    /// generators and basis pairs; zero means invariant.
    pub fn invariance_failures(&self) -> Result<usize> {
        let f = self.field();
        let mut bad = 0;
        for (_, key, n) in self.gen_keys() {
            let m = self.factor_matrix(key)?;
            let sign = if n % 2 == 1 { f.neg(1) } else { 1 };
            let shift = self.alg.weight_of(&key);
            for i in 0..self.dim {
                let target = self.basis_weights[i].add(&shift).scale(-1);
                for j in 0..self.dim {
                    if self.basis_weights[j] != target {
                        continue;
                    }
                    let lhs = m[i].iter().fold(0, |s, &(k, c)| f.add(s, f.mul(c, self.eta_entry(k, j))));
                    let rhs = m[j].iter().fold(0, |s, &(k, c)| f.add(s, f.mul(c, self.eta_entry(i, k))));
                    if lhs != f.mul(sign, rhs) {
                        bad += 1;
                    }
                }
            }
        }
        Ok(bad)
    }

    pub fn eta_rank(&self) -> usize {
        let mut rows = vec![vec![0u32; self.dim]; self.dim];
        for (&(i, j), &c) in &self.eta {
            rows[i][j] = c;
        }
        linalg_rank(self.field(), rows, self.dim)
    }

    /// `eta(v, X w)`.
    pub fn psi_bar(&self, v: &[u32], x: &HyperElt, w: &[u32]) -> Result<u32> {
        Ok(self.eta_pair(v, &self.apply(x, w)?))
    }

    /// `sum eta(X_1 v, pi(Y) X_2 w)` with `pi` the projection to the top
    /// graded piece.
    pub fn psi_eval(&self, dr: &DualRing, v: &[u32], w: &[u32], x: &HyperElt, y: &HyperElt) -> Result<u32> {
        let f = self.field();
        let top = (self.alg.p() - 1) * self.alg.n() as u32;
        let py = dr.project_hyper(y, top)?;
        let mut s = 0;
        for ((k1, k2), c) in self.alg.comult(x) {
            let a = self.apply_key(&k1, v)?;
            let b = self.apply(&py, &self.apply_key(&k2, w)?)?;
            s = f.add(s, f.mul(c, self.eta_pair(&a, &b)));
        }
        Ok(s)
    }

    /// Coefficients of the section in `x`/`y` coordinates: the coefficient of
    /// `x^a y^b` is `eta(F^(a) f_+, (y^b)^* f_-)`, with `|b| = (p-1)N` and
    /// the two weights opposite.
    pub fn psi_coefficients(&self, dr: &DualRing) -> Result<BTreeMap<(Exps, Exps), u32>> {
        let top = (self.alg.p() - 1) * self.alg.n() as u32;
        self.section_coefficients(dr, top..=top)
    }

    /// The unprojected section: the same formula in every `y`-degree up to
    /// `max_degree`.
    pub fn psi_hat_coefficients(&self, dr: &DualRing, max_degree: u32) -> Result<BTreeMap<(Exps, Exps), u32>> {
        self.section_coefficients(dr, 0..=max_degree)
    }

    fn section_coefficients(&self, dr: &DualRing, degrees: std::ops::RangeInclusive<u32>) -> Result<BTreeMap<(Exps, Exps), u32>> {
        let n = self.alg.n();
        let rs = self.alg.rs();
        let f = self.field();
        let fp = self.basis_vector(self.f_plus);
        let mut out = BTreeMap::new();
        let mut lowered: HashMap<Exps, Vec<u32>> = HashMap::new();
        for d in degrees {
            for b in crate::dualring::monomials_of_degree(n, d) {
                let weight = crate::dualring::exps_root(rs, &b);
                // Y f_- vanishes unless wt(Y) <= 2 lambda
                if !self.by_offset.contains_key(&weight) {
                    continue;
                }
                let dual = dr.dual_basis_plus(&b)?;
                let mut img = vec![0u32; self.dim];
                for (k, &c) in &dual.terms {
                    for (o, y) in img.iter_mut().zip(self.pbw_vector(&k.e)) {
                        *o = f.add(*o, f.mul(c, y));
                    }
                }
                if img.iter().all(|&c| c == 0) {
                    continue;
                }
                for a in monomials_of_root_weight(rs, weight) {
                    let xa = match lowered.get(&a) {
                        Some(v) => v.clone(),
                        None => {
                            let v = self.apply_key(&PbwKey { f: a, ..PbwKey::ONE }, &fp)?;
                            lowered.insert(a, v.clone());
                            v
                        }
                    };
                    let c = self.eta_pair(&xa, &img);
                    if c != 0 {
                        out.insert((a, b), c);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        let eta: Vec<(usize, usize, u32)> = self.eta.iter().map(|(&(i, j), &c)| (i, j, c)).collect();
        let j = StJson {
            kind: self.alg.rs().kind.to_string(),
            p: self.alg.p(),
            dim: self.dim,
            weights: self.basis_weights.iter().map(|w| w.coords.as_slice()).collect(),
            f_plus: self.f_plus,
            f_minus: self.f_minus,
            gen_actions: &self.gen_actions,
            eta,
        };
        serde_json::to_string(&j).expect("serializable")
    }
}

fn unit(k: usize) -> Exps {
    let mut e = [0u16; MAX_ROOTS];
    e[k] = 1;
    e
}

#[cfg(test)]
mod tests;
