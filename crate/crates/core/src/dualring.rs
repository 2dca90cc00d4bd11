//! Graded duals of the nilpotent hyperalgebras as polynomial rings.
//!
//! The dual basis to the divided-power PBW monomials `E^(a)` multiplies like
//! ordinary monomials `t^a` (the coproduct of `E^(a)` is the sum over all
//! splittings `a = b + c`), so the dual of the positive part is the
//! polynomial ring in second-kind coordinates `t_beta`. Plus-side dual
//! polynomials are stored in the graded generators `y_beta`, which differ
//! from `t_beta` by corrections of the same weight and higher degree in
//! variables of smaller height; minus-side polynomials use second-kind
//! coordinates `x_beta` directly.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::hyperalg::{Exps, HyperElt, Hyperalgebra, PbwKey, Side, MAX_ROOTS};
use crate::linalg::SparseRref;
use crate::rootdata::{Root, RootSystem};

/// Sparse polynomial over `F_p` in variables indexed by positive roots.
pub type Poly = BTreeMap<Exps, u32>;

/// A dual polynomial: `y` variables on the plus side, `x` on the minus side.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DualPoly {
    pub side: Side,
    pub terms: Poly,
}

impl DualPoly {
    pub fn zero(side: Side) -> Self {
        DualPoly { side, terms: Poly::new() }
    }

    pub fn one(side: Side) -> Self {
        DualPoly { side, terms: Poly::from([([0; MAX_ROOTS], 1)]) }
    }

    pub fn monomial(side: Side, exps: Exps) -> Self {
        DualPoly { side, terms: Poly::from([(exps, 1)]) }
    }

    /// The variable attached to the root at position `k`.
    pub fn var(side: Side, k: usize) -> Self {
        let mut e = [0; MAX_ROOTS];
        e[k] = 1;
        Self::monomial(side, e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

pub fn degree(e: &Exps) -> u32 {
    e.iter().map(|&x| x as u32).sum()
}

pub fn add_exps(a: &Exps, b: &Exps) -> Exps {
    let mut out = *a;
    for (o, x) in out.iter_mut().zip(b) {
        *o += x;
    }
    out
}

pub fn poly_add_term(f: PrimeField, p: &mut Poly, e: Exps, c: u32) {
    if c == 0 {
        return;
    }
    let v = p.entry(e).or_insert(0);
    *v = f.add(*v, c);
    if *v == 0 {
        p.remove(&e);
    }
}

pub fn poly_add(f: PrimeField, a: &Poly, b: &Poly, scale_b: u32) -> Poly {
    let mut out = a.clone();
    for (e, &c) in b {
        poly_add_term(f, &mut out, *e, f.mul(c, scale_b));
    }
    out
}

pub fn poly_mul(f: PrimeField, a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, &ca) in a {
        for (eb, &cb) in b {
            poly_add_term(f, &mut out, add_exps(ea, eb), f.mul(ca, cb));
        }
    }
    out
}

pub fn poly_pow(f: PrimeField, a: &Poly, n: u32) -> Poly {
    let mut acc = Poly::from([([0; MAX_ROOTS], 1)]);
    for _ in 0..n {
        acc = poly_mul(f, &acc, a);
    }
    acc
}

/// Weight, in simple-root coordinates, of `E^(a)` (the dual monomial has
/// the negative weight).
pub fn exps_root(rs: &RootSystem, e: &Exps) -> Root {
    let mut r = [0i64; 2];
    for k in 0..rs.num_pos() {
        let b = rs.root(k);
        r[0] += e[k] as i64 * b[0];
        r[1] += e[k] as i64 * b[1];
    }
    r
}

/// All exponent vectors `a` with `sum a_k beta_k = target`.
pub fn monomials_of_root_weight(rs: &RootSystem, target: Root) -> Vec<Exps> {
    fn go(rs: &RootSystem, k: usize, rem: Root, cur: &mut Exps, out: &mut Vec<Exps>) {
        if k == rs.num_pos() {
            if rem == [0, 0] {
                out.push(*cur);
            }
            return;
        }
        let b = rs.root(k);
        let mut m = 0u16;
        loop {
            let r = [rem[0] - m as i64 * b[0], rem[1] - m as i64 * b[1]];
            if r[0] < 0 || r[1] < 0 {
                break;
            }
            cur[k] = m;
            go(rs, k + 1, r, cur, out);
            m += 1;
        }
        cur[k] = 0;
    }
    let mut out = Vec::new();
    if target[0] < 0 || target[1] < 0 {
        return out;
    }
    go(rs, 0, target, &mut [0; MAX_ROOTS], &mut out);
    out.sort();
    out
}

/// Exponent vectors of total degree exactly `d` in `n` variables.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Exps> {
    fn go(n: usize, k: usize, rem: u32, cur: &mut Exps, out: &mut Vec<Exps>) {
        if k + 1 == n {
            cur[k] = rem as u16;
            out.push(*cur);
            cur[k] = 0;
            return;
        }
        for m in 0..=rem {
            cur[k] = m as u16;
            go(n, k + 1, rem - m, cur, out);
        }
        cur[k] = 0;
    }
    let mut out = Vec::new();
    go(n, 0, d, &mut [0; MAX_ROOTS], &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GradingFlag {
    /// Second-kind coordinates are already equivariant.
    SecondKind,
    /// Degree-one generators were corrected by solving a linear system.
    SolvedEquivariant,
}

/// Graded generators `y_beta` expressed in second-kind coordinates, and the
/// inverse substitution.
#[derive(Clone, Debug, Serialize)]
pub struct GradingMap {
    pub flag: GradingFlag,
    pub max_degree: u32,
    /// `y_beta` as a polynomial in the `t` variables.
    #[serde(serialize_with = "ser_polys")]
    pub y_in_t: Vec<Poly>,
    #[serde(serialize_with = "ser_polys")]
    pub t_in_y: Vec<Poly>,
}

fn ser_polys<S: serde::Serializer>(v: &[Poly], s: S) -> std::result::Result<S::Ok, S::Error> {
    let lists: Vec<Vec<(Vec<u16>, u32)>> =
        v.iter().map(|p| p.iter().map(|(e, c)| (e.to_vec(), *c)).collect()).collect();
    lists.serialize(s)
}

/// Context for dual-ring computations at a fixed root system and prime.
pub struct DualRing {
    alg: Arc<Hyperalgebra>,
    grading: Option<GradingMap>,
    to_t: DashMap<Exps, Arc<Poly>, rustc_hash::FxBuildHasher>,
    to_y: DashMap<Exps, Arc<Poly>, rustc_hash::FxBuildHasher>,
}

impl DualRing {
    /// Context without a grading; plus-side operations that need one
    /// report `GradingMissing`.
    pub fn ungraded(alg: Arc<Hyperalgebra>) -> Self {
        DualRing { alg, grading: None, to_t: DashMap::default(), to_y: DashMap::default() }
    }

    pub fn new(alg: Arc<Hyperalgebra>, max_degree: u32) -> Result<Self> {
        let mut dr = Self::ungraded(alg);
        let g = dr.build_grading(max_degree)?;
        dr.grading = Some(g);
        Ok(dr)
    }

    pub fn alg(&self) -> &Hyperalgebra {
        &self.alg
    }

    pub fn alg_arc(&self) -> Arc<Hyperalgebra> {
        self.alg.clone()
    }

    pub fn field(&self) -> PrimeField {
        self.alg.field()
    }

    pub fn n(&self) -> usize {
        self.alg.n()
    }

    pub fn grading(&self) -> Result<&GradingMap> {
        self.grading.as_ref().ok_or(Error::GradingMissing)
    }

    /// `y^b` in second-kind coordinates.
    pub fn y_mono_in_t(&self, b: &Exps) -> Result<Arc<Poly>> {
        if let Some(v) = self.to_t.get(b) {
            return Ok(v.clone());
        }
        let g = self.grading()?;
        let f = self.field();
        let mut acc = Poly::from([([0; MAX_ROOTS], 1)]);
        for k in 0..self.n() {
            if b[k] > 0 {
                acc = poly_mul(f, &acc, &poly_pow(f, &g.y_in_t[k], b[k] as u32));
            }
        }
        let out = Arc::new(acc);
        self.to_t.insert(*b, out.clone());
        Ok(out)
    }

    /// `t^a` in graded coordinates.
    pub fn t_mono_in_y(&self, a: &Exps) -> Result<Arc<Poly>> {
        if let Some(v) = self.to_y.get(a) {
            return Ok(v.clone());
        }
        let g = self.grading()?;
        let f = self.field();
        let mut acc = Poly::from([([0; MAX_ROOTS], 1)]);
        for k in 0..self.n() {
            if a[k] > 0 {
                acc = poly_mul(f, &acc, &poly_pow(f, &g.t_in_y[k], a[k] as u32));
            }
        }
        let out = Arc::new(acc);
        self.to_y.insert(*a, out.clone());
        Ok(out)
    }

    pub fn to_t(&self, f: &DualPoly) -> Result<Poly> {
        if f.side == Side::Minus {
            return Ok(f.terms.clone());
        }
        let fld = self.field();
        let mut out = Poly::new();
        for (b, &c) in &f.terms {
            for (a, &v) in self.y_mono_in_t(b)?.iter() {
                poly_add_term(fld, &mut out, *a, fld.mul(c, v));
            }
        }
        Ok(out)
    }

    pub fn from_t(&self, side: Side, p: &Poly) -> Result<DualPoly> {
        if side == Side::Minus {
            return Ok(DualPoly { side, terms: p.clone() });
        }
        let fld = self.field();
        let mut out = Poly::new();
        for (a, &c) in p {
            for (b, &v) in self.t_mono_in_y(a)?.iter() {
                poly_add_term(fld, &mut out, *b, fld.mul(c, v));
            }
        }
        Ok(DualPoly { side, terms: out })
    }

    pub fn mul(&self, a: &DualPoly, b: &DualPoly) -> Result<DualPoly> {
        if a.side != b.side {
            return Err(Error::SideMismatch);
        }
        Ok(DualPoly { side: a.side, terms: poly_mul(self.field(), &a.terms, &b.terms) })
    }

    /// Dual-basis pairing with an element of the matching nilpotent part.
    pub fn pair(&self, f: &DualPoly, z: &HyperElt) -> Result<u32> {
        let ok = match f.side {
            Side::Plus => z.in_plus(),
            Side::Minus => z.in_minus(),
        };
        if !ok {
            return Err(Error::SideMismatch);
        }
        let fld = self.field();
        let t = self.to_t(f)?;
        let mut total = 0;
        for (a, &c) in &t {
            let key = match f.side {
                Side::Plus => PbwKey { e: *a, ..PbwKey::ONE },
                Side::Minus => PbwKey { f: *a, ..PbwKey::ONE },
            };
            total = fld.add(total, fld.mul(c, z.coeff(&key)));
        }
        Ok(total)
    }

    /// The `p`-th power map.
    pub fn fr_star(&self, f: &DualPoly) -> DualPoly {
        let p = self.alg.p() as u16;
        DualPoly { side: f.side, terms: f.terms.iter().map(|(e, c)| (e.map(|x| x * p), *c)).collect() }
    }

    /// Trace map: `z_0 g^p -> g`, other monomials to zero, with `z_0` the
    /// product of all variables to the power `p - 1`.
    pub fn trace(&self, f: &DualPoly) -> DualPoly {
        let p = self.alg.p() as u16;
        let n = self.n();
        let mut out = Poly::new();
        for (e, &c) in &f.terms {
            if e[..n].iter().all(|&x| x % p == p - 1) {
                let g = e.map(|x| if x == 0 { 0 } else { (x + 1) / p - 1 });
                poly_add_term(self.field(), &mut out, g, c);
            }
        }
        DualPoly { side: f.side, terms: out }
    }

    pub fn trace_plus(&self, f: &DualPoly) -> Result<DualPoly> {
        if f.side != Side::Plus {
            return Err(Error::SideMismatch);
        }
        Ok(self.trace(f))
    }

    pub fn trace_minus(&self, f: &DualPoly) -> Result<DualPoly> {
        if f.side != Side::Minus {
            return Err(Error::SideMismatch);
        }
        Ok(self.trace(f))
    }

    /// `z_0` on the given side: `x_0` or `y_0`.
    pub fn z0(&self, side: Side) -> DualPoly {
        let mut e = [0; MAX_ROOTS];
        for k in 0..self.n() {
            e[k] = (self.alg.p() - 1) as u16;
        }
        DualPoly::monomial(side, e)
    }

    /// Homogeneous component of `y`-degree `n`.
    pub fn project_degree(&self, f: &DualPoly, n: u32) -> Result<DualPoly> {
        if f.side == Side::Plus {
            self.grading()?;
        }
        Ok(DualPoly { side: f.side, terms: f.terms.iter().filter(|(e, _)| degree(e) == n).map(|(e, c)| (*e, *c)).collect() })
    }

    /// Dual adjoint action `<A * f, Y> = <f, sigma(A) * Y>` in second-kind
    /// coordinates.
    pub fn dual_adjoint_t(&self, a: &HyperElt, t: &Poly) -> Result<Poly> {
        if !a.in_borel() {
            return Err(Error::WrongTriangularPart("dual adjoint action needs a Borel element".into()));
        }
        let fld = self.field();
        let rs = self.alg.rs();
        let sa = self.alg.antipode(a)?;
        // group f by weight; A shifts the dual weight by wt(A)
        let mut by_weight: BTreeMap<Root, Poly> = BTreeMap::new();
        for (e, &c) in t {
            by_weight.entry(exps_root(rs, e)).or_default().insert(*e, c);
        }
        let mut a_weights: BTreeMap<Root, HyperElt> = BTreeMap::new();
        for (k, &c) in &sa.terms {
            let w = exps_root(rs, &k.e);
            self.alg.add_term(a_weights.entry(w).or_default(), *k, c);
        }
        let mut out = Poly::new();
        for (fw, fpart) in &by_weight {
            for (aw, apart) in &a_weights {
                // <A*f, E^(a)> nonzero needs wt(E^(a)) + wt(A) = wt(f-dual)
                let target = [fw[0] - aw[0], fw[1] - aw[1]];
                for m in monomials_of_root_weight(rs, target) {
                    let img = self.alg.adjoint_general(apart, &HyperElt::from_key(PbwKey { e: m, ..PbwKey::ONE }))?;
                    let mut v = 0;
                    for (e, &c) in fpart {
                        v = fld.add(v, fld.mul(c, img.coeff(&PbwKey { e: *e, ..PbwKey::ONE })));
                    }
                    poly_add_term(fld, &mut out, m, v);
                }
            }
        }
        Ok(out)
    }

    pub fn dual_adjoint(&self, a: &HyperElt, f: &DualPoly) -> Result<DualPoly> {
        if f.side != Side::Plus {
            return Err(Error::SideMismatch);
        }
        let t = self.to_t(f)?;
        let img = self.dual_adjoint_t(a, &t)?;
        self.from_t(Side::Plus, &img)
    }

    /// Dual basis element `(y^b)^*` in the positive nilpotent part.
    pub fn dual_basis_plus(&self, b: &Exps) -> Result<HyperElt> {
        let rs = self.alg.rs();
        let w = exps_root(rs, b);
        let mut out = HyperElt::zero();
        for a in monomials_of_root_weight(rs, w) {
            let c = self.t_mono_in_y(&a)?.get(b).copied().unwrap_or(0);
            self.alg.add_term(&mut out, PbwKey { e: a, ..PbwKey::ONE }, c);
        }
        Ok(out)
    }

    /// Dual basis element `(x^a)^* = F^(a)`.
    pub fn dual_basis_minus(&self, a: &Exps) -> HyperElt {
        HyperElt::from_key(PbwKey { f: *a, ..PbwKey::ONE })
    }

    /// Projection of the positive nilpotent part onto graded piece `n`.
    pub fn project_hyper(&self, y: &HyperElt, n: u32) -> Result<HyperElt> {
        if !y.in_plus() {
            return Err(Error::WrongTriangularPart("projection acts on the positive nilpotent part".into()));
        }
        let fld = self.field();
        let mut t = Poly::new();
        for (k, &c) in &y.terms {
            t.insert(k.e, c);
        }
        // coefficient of y^b in Y's dual expansion: <y^b, Y>
        let mut out = HyperElt::zero();
        let mut seen: HashMap<Root, Vec<Exps>> = HashMap::new();
        for k in y.keys() {
            let w = exps_root(self.alg.rs(), &k.e);
            seen.entry(w).or_insert_with(|| monomials_of_root_weight(self.alg.rs(), w));
        }
        for bs in seen.values() {
            for b in bs.iter().filter(|b| degree(b) == n) {
                let mut v = 0;
                for (a, &c) in self.y_mono_in_t(b)?.iter() {
                    v = fld.add(v, fld.mul(c, t.get(a).copied().unwrap_or(0)));
                }
                if v != 0 {
                    self.alg.add_assign(&mut out, &self.dual_basis_plus(b)?, v);
                }
            }
        }
        Ok(out)
    }

    fn build_grading(&self, max_degree: u32) -> Result<GradingMap> {
        let alg = &self.alg;
        let rs = alg.rs();
        let fld = self.field();
        let n = self.n();
        let rank = rs.rank;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&k| (rs.root(k)[0] + rs.root(k)[1], k));
        let lin = |k: usize| {
            let mut e = [0; MAX_ROOTS];
            e[k] = 1;
            e
        };
        // unknowns: coefficient of each degree >= 2 monomial of weight beta in y_beta
        let corr: Vec<Vec<Exps>> = (0..n)
            .map(|k| monomials_of_root_weight(rs, rs.root(k)).into_iter().filter(|e| degree(e) >= 2).collect())
            .collect();
        let mut offset = vec![0usize; n + 1];
        for k in 0..n {
            offset[k + 1] = offset[k] + corr[k].len();
        }
        let nunk = offset[n];
        let mut system = SparseRref::new(fld, nunk + 1);
        // the action preserves the augmentation ideal and its square, so
        // E_i^(m) * y_beta = d y_gamma where d is read off the linear part
        for k in 0..n {
            let beta = rs.root(k);
            for i in 0..rank {
                for m in 1u32.. {
                    let mut g = beta;
                    g[i] -= m as i64;
                    if g[0] < 0 || g[1] < 0 {
                        break;
                    }
                    let ei = alg.e(i, m);
                    let base = self.dual_adjoint_t(&ei, &Poly::from([(lin(k), 1)]))?;
                    let cols: Vec<Poly> = corr[k]
                        .iter()
                        .map(|e| self.dual_adjoint_t(&ei, &Poly::from([(*e, 1)])))
                        .collect::<Result<_>>()?;
                    let (gamma, d) = match rs.root_position(g) {
                        Some(gk) => (Some(gk), base.get(&lin(gk)).copied().unwrap_or(0)),
                        None => (None, 0),
                    };
                    let mut mons: Vec<Exps> = base.keys().copied().filter(|e| degree(e) >= 2).collect();
                    for c in &cols {
                        mons.extend(c.keys().copied());
                    }
                    if let (Some(gk), true) = (gamma, d != 0) {
                        mons.extend(corr[gk].iter().copied());
                    }
                    mons.sort();
                    mons.dedup();
                    for mono in mons {
                        // (u, 1) lies in the null space of [cols - d id_gamma | base]
                        let mut row = BTreeMap::new();
                        for (ci, col) in cols.iter().enumerate() {
                            if let Some(&v) = col.get(&mono) {
                                row.insert(offset[k] + ci, v);
                            }
                        }
                        if let (Some(gk), true) = (gamma, d != 0) {
                            if let Some(ci) = corr[gk].iter().position(|e| *e == mono) {
                                let e = row.entry(offset[gk] + ci).or_insert(0);
                                *e = fld.sub(*e, d);
                            }
                        }
                        if let Some(&v) = base.get(&mono) {
                            row.insert(nunk, v);
                        }
                        system.insert(row);
                    }
                }
            }
        }
        let sol = solve_particular(&system, nunk).ok_or(Error::NoEquivariantGrading(max_degree))?;
        let mut corrected = false;
        let y_in_t: Vec<Poly> = (0..n)
            .map(|k| {
                let mut y = Poly::from([(lin(k), 1)]);
                for (ci, e) in corr[k].iter().enumerate() {
                    let v = sol[offset[k] + ci];
                    if v != 0 {
                        corrected = true;
                        y.insert(*e, v);
                    }
                }
                y
            })
            .collect();
        // invert by height: t_beta = y_beta - (corrections in lower t's)
        let mut t_in_y: Vec<Option<Poly>> = vec![None; n];
        for &k in &order {
            let mut lin = [0; MAX_ROOTS];
            lin[k] = 1;
            let mut t = Poly::from([(lin, 1)]);
            for (e, &c) in &y_in_t[k] {
                if *e == lin {
                    continue;
                }
                let mut prod = Poly::from([([0; MAX_ROOTS], 1)]);
                for j in 0..n {
                    if e[j] > 0 {
                        let tj = t_in_y[j].as_ref().expect("corrections use lower roots");
                        prod = poly_mul(fld, &prod, &poly_pow(fld, tj, e[j] as u32));
                    }
                }
                t = poly_add(fld, &t, &prod, fld.neg(c));
            }
            t_in_y[k] = Some(t);
        }
        Ok(GradingMap {
            flag: if corrected { GradingFlag::SolvedEquivariant } else { GradingFlag::SecondKind },
            max_degree,
            y_in_t,
            t_in_y: t_in_y.into_iter().map(Option::unwrap).collect(),
        })
    }

    /// Checks that every `E_i^(m)` maps graded piece `d` into itself, for
    /// all `y`-monomials of degree `d <= max_degree` and all `m` that can act
    /// nontrivially. Returns the first offending monomial.
    pub fn check_equivariance(&self, max_degree: u32) -> Result<Option<(usize, u32, Exps)>> {
        let alg = &self.alg;
        for d in 1..=max_degree {
            for b in monomials_of_degree(self.n(), d) {
                let f = DualPoly::monomial(Side::Plus, b);
                let w = exps_root(alg.rs(), &b);
                for i in 0..alg.rank() {
                    for m in 1..=w[i].max(0) as u32 {
                        let img = self.dual_adjoint(&alg.e(i, m), &f)?;
                        if img.terms.keys().any(|e| degree(e) != d) {
                            return Ok(Some((i, m, b)));
                        }
                    }
                }
            }
        }
        Ok(None)
    }

    pub fn to_text(&self, f: &DualPoly) -> String {
        let n = self.n();
        let mut s = String::new();
        for (e, c) in &f.terms {
            let list = e[..n].iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            let zeros = vec!["0"; n].join(",");
            match f.side {
                Side::Minus => s.push_str(&format!("x[{list}] y[{zeros}] : {c}\n")),
                Side::Plus => s.push_str(&format!("x[{zeros}] y[{list}] : {c}\n")),
            }
        }
        s
    }
}

/// A particular solution (free variables zero) of the augmented system whose
/// last column is the right-hand side, or `None` if inconsistent.
fn solve_particular(system: &SparseRref, nunk: usize) -> Option<Vec<u32>> {
    let ns = system.nullspace();
    // the null space of [A | -b] contains (x, 1) iff A x = b
    let f = system.field();
    let mut found: Option<Vec<u32>> = None;
    for v in &ns {
        if v[nunk] != 0 {
            let inv = f.inv(v[nunk]);
            found = Some(v[..nunk].iter().map(|&x| f.mul(x, inv)).collect());
            break;
        }
    }
    found
}

impl fmt::Display for GradingFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GradingFlag::SecondKind => f.write_str("second_kind_coordinates"),
            GradingFlag::SolvedEquivariant => f.write_str("solved_equivariant"),
        }
    }
}

#[cfg(test)]
mod tests;
