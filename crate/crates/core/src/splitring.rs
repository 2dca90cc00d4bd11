//! Truncated induction rings `R_lambda` realized as polynomial rings in the
//! `x` coordinates (dual of the negative part) and the graded `y`
//! generators (dual of the positive part), together with the Frobenius
//! splitting assembled from the trace maps and the Steinberg section.
//!
//! A section is a finite sum of terms `x^a y^b`. The grade of a term is the
//! `y`-degree `|b|`; its twist index is `|b| - shift`, so that the term pairs
//! against `X (x) Y (x) v_{t lambda}` with `t` the twist index.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use rustc_hash::FxHashMap as HashMap;
use serde::Serialize;

use crate::dualring::{degree, exps_root, monomials_of_degree, monomials_of_root_weight, DualPoly, DualRing};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::hyperalg::{Exps, GenWord, HyperElt, Hyperalgebra, PbwKey, Side, MAX_ROOTS};
use crate::rootdata::{sub_root, Root, RootSystem, Weight};
use crate::steinberg::{StModule, DEFAULT_SIZE_BOUND};

/// `(x` exponents, `y` exponents`)`.
pub type SecKey = (Exps, Exps);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedSection {
    pub lambda: Weight,
    /// Grade minus twist index, shared by all terms.
    pub shift: u32,
    pub terms: BTreeMap<SecKey, u32>,
}

impl GradedSection {
    pub fn zero(lambda: Weight) -> Self {
        GradedSection { lambda, shift: 0, terms: BTreeMap::new() }
    }

    /// The unit `e(X (x) Y) = eps(X) eps(Y)`.
    pub fn unit(lambda: Weight) -> Self {
        Self::monomial(lambda, [0; MAX_ROOTS], [0; MAX_ROOTS], 1)
    }

    pub fn monomial(lambda: Weight, x: Exps, y: Exps, c: u32) -> Self {
        let mut terms = BTreeMap::new();
        if c != 0 {
            terms.insert((x, y), c);
        }
        GradedSection { lambda, shift: 0, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn grades(&self) -> BTreeSet<u32> {
        self.terms.keys().map(|(_, y)| degree(y)).collect()
    }

    /// Terms of grade `n`.
    pub fn component(&self, n: u32) -> GradedSection {
        GradedSection {
            lambda: self.lambda.clone(),
            shift: self.shift,
            terms: self.terms.iter().filter(|((_, y), _)| degree(y) == n).map(|(k, c)| (*k, *c)).collect(),
        }
    }

    pub fn max_x_degree(&self) -> u32 {
        self.terms.keys().map(|(x, _)| degree(x)).max().unwrap_or(0)
    }

    pub fn max_grade(&self) -> u32 {
        self.terms.keys().map(|(_, y)| degree(y)).max().unwrap_or(0)
    }

    pub fn twist(&self, grade: u32) -> i64 {
        grade as i64 - self.shift as i64
    }

    /// One header line followed by one `x=.. y=.. c=..` line per term.
    pub fn to_text(&self, n: usize) -> String {
        let join = |e: &Exps| e[..n].iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let lam = self.lambda.coords.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        let mut s = format!("lambda={lam} shift={}\n", self.shift);
        for ((x, y), c) in &self.terms {
            let _ = writeln!(s, "x={} y={} c={c}", join(x), join(y));
        }
        s
    }

    pub fn parse_text(text: &str, rank: usize, n: usize, field: PrimeField) -> Result<Self> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| bad("empty section"))?;
        let mut lambda = None;
        let mut shift = 0;
        for tok in header.split_whitespace() {
            match tok.split_once('=') {
                Some(("lambda", v)) => lambda = Some(parse_ints(v)?),
                Some(("shift", v)) => shift = v.parse().map_err(|_| bad("shift"))?,
                _ => return Err(bad(&format!("unexpected header token {tok:?}"))),
            }
        }
        let lambda = lambda.ok_or_else(|| bad("missing lambda"))?;
        if lambda.len() != rank {
            return Err(bad("lambda has the wrong rank"));
        }
        let mut out = GradedSection { lambda: Weight::new(lambda), shift, terms: BTreeMap::new() };
        for line in lines {
            let (mut x, mut y, mut c) = (None, None, None);
            for tok in line.split_whitespace() {
                match tok.split_once('=') {
                    Some(("x", v)) => x = Some(parse_exps(v, n)?),
                    Some(("y", v)) => y = Some(parse_exps(v, n)?),
                    Some(("c", v)) => c = Some(v.parse::<i64>().map_err(|_| bad("coefficient"))?),
                    _ => return Err(bad(&format!("unexpected token {tok:?}"))),
                }
            }
            let (x, y, c) = (x.ok_or_else(|| bad("missing x"))?, y.ok_or_else(|| bad("missing y"))?, c.ok_or_else(|| bad("missing c"))?);
            add_term(field, &mut out.terms, (x, y), field.from_i64(c));
        }
        Ok(out)
    }
}

fn parse_ints(v: &str) -> Result<Vec<i64>> {
    v.split(',').map(|t| t.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad integer {t:?}")))).collect()
}

fn parse_exps(v: &str, n: usize) -> Result<Exps> {
    let vals = parse_ints(v)?;
    if vals.len() != n || vals.iter().any(|&x| !(0..=u16::MAX as i64).contains(&x)) {
        return Err(Error::Parse(format!("exponent vector {v:?} needs {n} nonnegative entries")));
    }
    let mut e = [0; MAX_ROOTS];
    for (k, x) in vals.into_iter().enumerate() {
        e[k] = x as u16;
    }
    Ok(e)
}

fn add_term(f: PrimeField, terms: &mut BTreeMap<SecKey, u32>, k: SecKey, c: u32) {
    if c == 0 {
        return;
    }
    let e = terms.entry(k).or_insert(0);
    *e = f.add(*e, c);
    if *e == 0 {
        terms.remove(&k);
    }
}

fn add_exps(a: &Exps, b: &Exps) -> Exps {
    std::array::from_fn(|k| a[k] + b[k])
}

/// Degree budgets: `dx` for the `x`-degree, `dn` for the grade.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Truncation {
    pub dx: u32,
    pub dn: u32,
}

impl Truncation {
    /// `p (p-1) N + p` in both directions.
    pub fn default_for(p: u32, n: usize) -> Self {
        let d = p * (p - 1) * n as u32 + p;
        Truncation { dx: d, dn: d }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub input: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub identity: String,
    pub cases: usize,
    /// Number of failing cases; only the first [`MAX_RECORDED_FAILURES`]
    /// are kept in `failures`.
    pub failed: usize,
    pub failures: Vec<Failure>,
    pub status: String,
    /// Cases where the compared values are nonzero, for suites that track it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nontrivial: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub const MAX_RECORDED_FAILURES: usize = 20;

impl VerifyReport {
    pub fn new(identity: &str) -> Self {
        VerifyReport {
            identity: identity.to_string(),
            cases: 0,
            failed: 0,
            failures: Vec::new(),
            status: "pass".into(),
            nontrivial: None,
            notes: Vec::new(),
        }
    }

    /// Counts a case as nontrivial when `yes` holds.
    pub fn count_nontrivial(&mut self, yes: bool) {
        *self.nontrivial.get_or_insert(0) += yes as usize;
    }

    pub fn record(&mut self, input: impl FnOnce() -> String, lhs: &impl std::fmt::Debug, rhs: &impl std::fmt::Debug, ok: bool) {
        self.cases += 1;
        if !ok {
            self.fail(input, || (format!("{lhs:?}"), format!("{rhs:?}")));
        }
    }

    /// Records a failing case whose sides are only rendered if kept.
    pub fn fail(&mut self, input: impl FnOnce() -> String, sides: impl FnOnce() -> (String, String)) {
        self.failed += 1;
        self.status = "fail".into();
        if self.failures.len() < MAX_RECORDED_FAILURES {
            let (lhs, rhs) = sides();
            self.failures.push(Failure { input: input(), lhs, rhs });
        }
    }

    pub fn merge(&mut self, other: VerifyReport) {
        self.cases += other.cases;
        self.failed += other.failed;
        if other.failed > 0 {
            self.status = "fail".into();
        }
        let room = MAX_RECORDED_FAILURES.saturating_sub(self.failures.len());
        self.failures.extend(other.failures.into_iter().take(room));
        if let Some(k) = other.nontrivial {
            *self.nontrivial.get_or_insert(0) += k;
        }
        self.notes.extend(other.notes);
    }

    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

/// The ring context: graded dual ring, Steinberg module, the section `psi`
/// and the truncation.
pub struct SplitRing {
    dr: Arc<DualRing>,
    st: Arc<StModule>,
    psi: BTreeMap<SecKey, u32>,
    trunc: Truncation,
}

impl SplitRing {
    /// Builds everything for `(rs, p)`. The hyperalgebra cap covers every
    /// exponent the truncation can produce.
    pub fn new(rs: Arc<RootSystem>, p: u32, trunc: Truncation) -> Result<Self> {
        let cap = (p * p - 1).max(trunc.dx).max(trunc.dn) + 4 * p;
        let cap = u16::try_from(cap).map_err(|_| Error::TruncationTooSmall(format!("exponent cap {cap} too large")))?;
        let alg = Arc::new(Hyperalgebra::with_cap(rs.clone(), p, cap)?);
        let dr = Arc::new(DualRing::new(alg, trunc.dn)?);
        let st = Arc::new(StModule::build(rs, p, DEFAULT_SIZE_BOUND)?);
        Self::from_parts(dr, st, trunc)
    }

    pub fn from_parts(dr: Arc<DualRing>, st: Arc<StModule>, trunc: Truncation) -> Result<Self> {
        let top = (dr.alg().p() - 1) * dr.n() as u32;
        if trunc.dn < top || trunc.dx < top {
            return Err(Error::TruncationTooSmall(format!("truncation {trunc:?} below the section degree {top}")));
        }
        let psi = st.psi_coefficients(&dr)?;
        Ok(SplitRing { dr, st, psi, trunc })
    }

    pub fn dual_ring(&self) -> &DualRing {
        &self.dr
    }

    pub fn steinberg(&self) -> &StModule {
        &self.st
    }

    pub fn alg(&self) -> &Hyperalgebra {
        self.dr.alg()
    }

    pub fn field(&self) -> PrimeField {
        self.dr.field()
    }

    pub fn p(&self) -> u32 {
        self.dr.alg().p()
    }

    /// Number of positive roots.
    pub fn n(&self) -> usize {
        self.dr.n()
    }

    pub fn rank(&self) -> usize {
        self.dr.alg().rank()
    }

    pub fn truncation(&self) -> Truncation {
        self.trunc
    }

    /// `(p-1) N`, the grade of the section.
    pub fn top(&self) -> u32 {
        (self.p() - 1) * self.n() as u32
    }

    /// Replaces the coefficient of `x_0 y_0` in the section by twice its
    /// value; used as a negative control.
    pub fn corrupt_psi(&mut self) {
        let z = self.z0();
        let f = self.field();
        if let Some(c) = self.psi.get_mut(&(z, z)) {
            *c = f.add(*c, *c);
        }
    }

    fn z0(&self) -> Exps {
        let mut z = [0; MAX_ROOTS];
        for v in z.iter_mut().take(self.n()) {
            *v = (self.p() - 1) as u16;
        }
        z
    }

    pub fn check_truncation(&self, f: &GradedSection) -> Result<()> {
        let (dx, dn) = (f.max_x_degree(), f.max_grade());
        if dx > self.trunc.dx || dn > self.trunc.dn {
            return Err(Error::TruncationExceeded(format!(
                "x-degree {dx} / grade {dn} beyond {} / {}",
                self.trunc.dx, self.trunc.dn
            )));
        }
        Ok(())
    }

    /// Weight of the term `x^a y^b (x) v_{-t lambda}`.
    pub fn term_weight(&self, lambda: &Weight, twist: i64, x: &Exps, y: &Exps) -> Weight {
        let rs = self.alg().rs();
        let wx = rs.root_weight(exps_root(rs, x));
        let wy = rs.root_weight(exps_root(rs, y));
        wx.sub(&wy).sub(&lambda.scale(twist))
    }

    pub fn ring_mult(&self, f: &GradedSection, g: &GradedSection) -> Result<GradedSection> {
        if f.lambda != g.lambda {
            return Err(Error::LambdaMismatch(format!("{:?} vs {:?}", f.lambda.coords, g.lambda.coords)));
        }
        let out = self.product_unchecked(f, g);
        self.check_truncation(&out)?;
        Ok(out)
    }

    fn product_unchecked(&self, f: &GradedSection, g: &GradedSection) -> GradedSection {
        let fld = self.field();
        let mut terms = BTreeMap::new();
        for ((xa, ya), ca) in &f.terms {
            for ((xb, yb), cb) in &g.terms {
                add_term(fld, &mut terms, (add_exps(xa, xb), add_exps(ya, yb)), fld.mul(*ca, *cb));
            }
        }
        GradedSection { lambda: f.lambda.clone(), shift: f.shift + g.shift, terms }
    }

    /// The `p`-th power.
    pub fn frt_star(&self, f: &GradedSection) -> Result<GradedSection> {
        let p = self.p() as u16;
        let out = GradedSection {
            lambda: f.lambda.clone(),
            shift: f.shift * self.p(),
            terms: f.terms.iter().map(|((x, y), c)| ((x.map(|v| v * p), y.map(|v| v * p)), *c)).collect(),
        };
        self.check_truncation(&out)?;
        Ok(out)
    }

    /// `S` computed as `Tr_- (x) Tr_+`: grade `pn + (p-1)N` with twist `pn`
    /// lands in grade `n` with twist `n`.
    pub fn op_s(&self, f: &GradedSection) -> Result<GradedSection> {
        let p = self.p();
        let top = self.top();
        let shift = if f.shift >= top && (f.shift - top).is_multiple_of(p) {
            (f.shift - top) / p
        } else if f.lambda.is_zero() || f.is_zero() {
            0
        } else {
            return Err(Error::LambdaMismatch(format!("S needs twist p*n on grade p*n+{top}, got shift {}", f.shift)));
        };
        let fld = self.field();
        let n = self.n();
        let pu = p as u16;
        let tr = |e: &Exps| -> Option<Exps> {
            e[..n].iter().all(|&v| v % pu == pu - 1).then(|| e.map(|v| if v == 0 { 0 } else { (v + 1) / pu - 1 }))
        };
        let mut terms = BTreeMap::new();
        for ((x, y), &c) in &f.terms {
            if let (Some(x2), Some(y2)) = (tr(x), tr(y)) {
                add_term(fld, &mut terms, (x2, y2), c);
            }
        }
        Ok(GradedSection { lambda: f.lambda.clone(), shift, terms })
    }

    /// The section as an element of grade `(p-1)N` and twist zero.
    pub fn psi_section(&self, lambda: &Weight) -> GradedSection {
        GradedSection { lambda: lambda.clone(), shift: self.top(), terms: self.psi.clone() }
    }

    pub fn mul_psi(&self, f: &GradedSection) -> Result<GradedSection> {
        self.ring_mult(f, &self.psi_section(&f.lambda))
    }

    /// `S` after multiplication by the section on grades divisible by `p`;
    /// other grades are annihilated.
    pub fn sigma_tot(&self, f: &GradedSection) -> Result<GradedSection> {
        if f.shift != 0 && !f.lambda.is_zero() {
            return Err(Error::LambdaMismatch(format!("sigma_tot acts on sections with twist = grade, got shift {}", f.shift)));
        }
        let p = self.p();
        let kept = GradedSection {
            lambda: f.lambda.clone(),
            shift: 0,
            terms: f.terms.iter().filter(|((_, y), _)| degree(y).is_multiple_of(p)).map(|(k, c)| (*k, *c)).collect(),
        };
        self.op_s(&self.mul_psi(&kept)?)
    }

    /// Forgets the twist.
    pub fn r_lambda(&self, f: &GradedSection) -> GradedSection {
        GradedSection { lambda: Weight::zero(f.lambda.coords.len()), shift: 0, terms: f.terms.clone() }
    }

    /// `f(X (x) Y (x) v)` on the grade-`n` component of `f`. `X` is taken in
    /// `E H F` normal form; the Borel factor of each term is moved across
    /// through its antipode and the negative part pairs with the `x` terms.
    pub fn evaluate(&self, f: &GradedSection, x: &HyperElt, y: &HyperElt, n: u32) -> Result<u32> {
        if !y.in_plus() {
            return Err(Error::WrongTriangularPart("second argument must lie in the positive nilpotent part".into()));
        }
        if n > self.trunc.dn {
            return Err(Error::TruncationExceeded(format!("grade {n} beyond {}", self.trunc.dn)));
        }
        let by_x = self.grade_slices(f, n);
        let mut moved = HashMap::default();
        self.evaluate_sliced(f, &by_x, n, x, y, &mut moved)
    }

    /// The grade-`n` terms of `f` grouped by their `x` exponents.
    fn grade_slices(&self, f: &GradedSection, n: u32) -> BTreeMap<Exps, DualPoly> {
        let mut by_x: BTreeMap<Exps, DualPoly> = BTreeMap::new();
        for ((a, b), &c) in &f.terms {
            if degree(b) == n {
                by_x.entry(*a).or_insert_with(|| DualPoly::zero(Side::Plus)).terms.insert(*b, c);
            }
        }
        by_x
    }

    /// `evaluate` with the grade slices precomputed and the pairings of `y`
    /// moved by each Borel key memoized in `moved`.
    fn evaluate_sliced(
        &self,
        f: &GradedSection,
        by_x: &BTreeMap<Exps, DualPoly>,
        n: u32,
        x: &HyperElt,
        y: &HyperElt,
        moved: &mut HashMap<(PbwKey, Exps), u32>,
    ) -> Result<u32> {
        let fld = self.field();
        let twist = f.twist(n);
        let mut total = 0;
        for (k, &c) in &x.terms {
            let Some(ypoly) = by_x.get(&k.f) else { continue };
            let borel = PbwKey { f: [0; MAX_ROOTS], ..*k };
            let v = match moved.get(&(borel, k.f)) {
                Some(&v) => v,
                None => {
                    let m = if borel.is_one() { y.clone() } else { self.borel_act(&borel, y, &f.lambda, twist)? };
                    let v = self.dr.pair(ypoly, &m)?;
                    moved.insert((borel, k.f), v);
                    v
                }
            };
            total = fld.add(total, fld.mul(c, v));
        }
        Ok(total)
    }

    /// `sigma(A) * (Y (x) v_{t lambda})` for a Borel key `A = E^(a) H`, with
    /// the vector `v` dropped (the result is a multiple of it). Root vectors
    /// are primitive, so `sigma(E^(a))` acts as a signed composite of
    /// single-root adjoint steps, applied in PBW order.
    fn borel_act(&self, key: &PbwKey, y: &HyperElt, lambda: &Weight, twist: i64) -> Result<HyperElt> {
        let alg = self.alg();
        let fld = self.field();
        let mut cur = y.clone();
        for (k, &m) in key.e[..self.n()].iter().enumerate() {
            if m == 0 || cur.is_zero() {
                continue;
            }
            let mut next = HyperElt::zero();
            for j in 0..=m as u32 {
                let left = alg.mul(&alg.e_root(k, j), &cur)?;
                let term = alg.mul(&left, &alg.e_root(k, m as u32 - j))?;
                // (-1)^(m-j) from the antipode of the coproduct, (-1)^m from sigma
                let c = if j % 2 == 1 { fld.neg(1) } else { 1 };
                alg.add_assign(&mut next, &term, c);
            }
            cur = next;
        }
        if !key.has_h() {
            return Ok(cur);
        }
        let shift = lambda.scale(twist);
        let mut out = HyperElt::zero();
        for (yk, &yc) in &cur.terms {
            let w = alg.weight_of(yk).add(&shift);
            let mut s = yc;
            for i in 0..alg.rank() {
                if key.h[i] > 0 {
                    s = fld.mul(s, fld.binom(-w.coords[i], key.h[i] as u64));
                }
            }
            alg.add_term(&mut out, *yk, s);
        }
        Ok(out)
    }

    /// `borel_act` through the full antipode of `A`.
    #[cfg(test)]
    pub(crate) fn borel_act_by_antipode(&self, key: &PbwKey, y: &HyperElt, lambda: &Weight, twist: i64) -> Result<HyperElt> {
        let alg = self.alg();
        let fld = self.field();
        let shift = lambda.scale(twist);
        let mut out = HyperElt::zero();
        for (k2, &c2) in &alg.antipode_key(key)?.terms {
            let mut scaled = HyperElt::zero();
            for (yk, &yc) in &y.terms {
                let w = alg.weight_of(yk).add(&shift);
                let mut s = yc;
                for i in 0..alg.rank() {
                    if k2.h[i] > 0 {
                        s = fld.mul(s, fld.binom(w.coords[i], k2.h[i] as u64));
                    }
                }
                alg.add_term(&mut scaled, *yk, s);
            }
            if scaled.is_zero() {
                continue;
            }
            let moved = if k2.has_e() {
                alg.adjoint_general(&HyperElt::from_key(PbwKey { e: k2.e, ..PbwKey::ONE }), &scaled)?
            } else {
                scaled
            };
            alg.add_assign(&mut out, &moved, c2);
        }
        Ok(out)
    }

    /// `(Z.f)(X (x) Y) = f(XZ (x) Y)`, read off on dual-basis arguments.
    pub fn act(&self, z: &HyperElt, f: &GradedSection) -> Result<GradedSection> {
        let alg = self.alg();
        let rs = alg.rs();
        let fld = self.field();
        // x-weight minus y-weight is shifted by the weight of each term of Z
        let mut targets: BTreeMap<u32, BTreeSet<Root>> = BTreeMap::new();
        for (xa, yb) in f.terms.keys() {
            let base = sub_root(exps_root(rs, xa), exps_root(rs, yb));
            for k in z.keys() {
                let shift = sub_root(exps_root(rs, &k.f), exps_root(rs, &k.e));
                targets.entry(degree(yb)).or_default().insert([base[0] - shift[0], base[1] - shift[1]]);
            }
        }
        // F^(c) E^(e) only has F-parts of height at least ht(c) - ht(e), so
        // heavier c pair to zero against every x-term of f
        let height = |e: &Exps| -> i64 { exps_root(rs, e).iter().sum() };
        let hx = f.terms.keys().map(|(a, _)| height(a)).max().unwrap_or(0);
        let he = z.keys().map(|k| height(&k.e)).max().unwrap_or(0);
        let mut out = GradedSection { lambda: f.lambda.clone(), shift: f.shift, terms: BTreeMap::new() };
        let mut xz_cache: HashMap<Exps, HyperElt> = HashMap::default();
        for (&grade, ws) in &targets {
            let by_x = self.grade_slices(f, grade);
            for b in monomials_of_degree(self.n(), grade) {
                let yw = exps_root(rs, &b);
                let ydual = self.dr.dual_basis_plus(&b)?;
                let mut moved = HashMap::default();
                for w in ws {
                    let xw = [w[0] + yw[0], w[1] + yw[1]];
                    if xw[0] < 0 || xw[1] < 0 || xw[0] + xw[1] > hx + he {
                        continue;
                    }
                    for c in monomials_of_root_weight(rs, xw) {
                        if let std::collections::hash_map::Entry::Vacant(e) = xz_cache.entry(c) {
                            let xz = alg.mul(&HyperElt::from_key(PbwKey { f: c, ..PbwKey::ONE }), z)?;
                            e.insert(xz);
                        }
                        let v = self.evaluate_sliced(f, &by_x, grade, &xz_cache[&c], &ydual, &mut moved)?;
                        add_term(fld, &mut out.terms, (c, b), v);
                    }
                }
            }
        }
        self.check_truncation(&out)?;
        Ok(out)
    }

    /// The action of a product `Z_1 ... Z_k`, applied factor by factor from
    /// the right. Cheaper than `act` on the multiplied-out product.
    pub fn act_factors(&self, factors: &[HyperElt], f: &GradedSection) -> Result<GradedSection> {
        let mut cur = f.clone();
        for z in factors.iter().rev() {
            cur = self.act(z, &cur)?;
        }
        Ok(cur)
    }

    /// `F_0 Fr'^-(F^(c))`, the first argument of the defining formula of `S`.
    pub fn definitional_x(&self, c: &Exps) -> Result<HyperElt> {
        let alg = self.alg();
        alg.mul(&alg.f0(), &alg.fr_prime_pbw(&self.dr.dual_basis_minus(c), Side::Minus)?)
    }

    /// `E_0 Fr'((y^b)^*)`, the second argument.
    pub fn definitional_y(&self, b: &Exps) -> Result<HyperElt> {
        let alg = self.alg();
        alg.mul(&alg.e0(), &alg.fr_prime_pbw(&self.dr.dual_basis_plus(b)?, Side::Plus)?)
    }

    /// The right-hand side of the defining formula of `S`:
    /// `f(F_0 Fr'^-(F^(c)) (x) E_0 Fr'((y^b)^*))` on grade `p|b| + (p-1)N`.
    pub fn op_s_definitional(&self, f: &GradedSection, c: &Exps, b: &Exps) -> Result<u32> {
        self.evaluate(f, &self.definitional_x(c)?, &self.definitional_y(b)?, self.p() * degree(b) + self.top())
    }

    /// Compares the trace formula for `S` with its definition on every
    /// dual-basis argument the truncation allows.
    pub fn cross_check_op_s(&self, f: &GradedSection) -> Result<VerifyReport> {
        let mut rep = VerifyReport::new("S by traces = S by definition");
        let s = self.op_s(f)?;
        let (p, top, n) = (self.p(), self.top(), self.n());
        let max_c = self.trunc.dx.saturating_sub(top) / p;
        let max_b = self.trunc.dn.saturating_sub(top) / p;
        let xs: Vec<(Exps, HyperElt, HyperElt)> = (0..=max_c)
            .flat_map(|d| monomials_of_degree(n, d))
            .map(|c| Ok((c, self.dr.dual_basis_minus(&c), self.definitional_x(&c)?)))
            .collect::<Result<_>>()?;
        for nb in 0..=max_b {
            for b in monomials_of_degree(n, nb) {
                let ydual = self.dr.dual_basis_plus(&b)?;
                let ydef = self.definitional_y(&b)?;
                for (c, xdual, xdef) in &xs {
                    let lhs = self.evaluate(&s, xdual, &ydual, nb)?;
                    let rhs = self.evaluate(f, xdef, &ydef, p * nb + top)?;
                    rep.record(|| format!("x^{:?} y^{:?}", &c[..n], &b[..n]), &lhs, &rhs, lhs == rhs);
                }
            }
        }
        Ok(rep)
    }

    /// Both sides of `S(phi(Z).f) = Z.S(f)`.
    pub fn equivariance_sides(&self, z: &GenWord, f: &GradedSection) -> Result<(GradedSection, GradedSection)> {
        let alg = self.alg();
        let lhs = self.op_s(&self.act_factors(&alg.phi_factors(z)?, f)?)?;
        let rhs = self.act(&alg.normalize(z)?, &self.op_s(f)?)?;
        Ok((lhs, rhs))
    }

    /// `S(phi(Z).f) = Z.S(f)`.
    pub fn check_equivariance(&self, z: &GenWord, f: &GradedSection) -> Result<VerifyReport> {
        let (lhs, rhs) = self.equivariance_sides(z, f)?;
        let mut rep = VerifyReport::new("S(phi(Z).f) = Z.S(f)");
        let n = self.n();
        rep.record(|| format!("Z={z:?} f={}", f.to_text(n).replace('\n', "; ")), &lhs.terms, &rhs.terms, lhs.terms == rhs.terms);
        Ok(rep)
    }

    /// Route A (multiply by the unprojected section, project to grade
    /// `pn + (p-1)N`, apply the traces) against route B (`S` after
    /// multiplication by the section) on every monomial with `x`-degree and
    /// grade `pn` at most `d`.
    pub fn compare_klt(&self, d: u32) -> Result<VerifyReport> {
        let (p, top) = (self.p(), self.top());
        if d + top > self.trunc.dn || d + top > self.trunc.dx {
            return Err(Error::TruncationTooSmall(format!("comparison degree {d} needs truncation {}", d + top)));
        }
        let hat = self.st.psi_hat_coefficients(&self.dr, top + 1)?;
        let below = hat.keys().filter(|(_, y)| degree(y) < top).count();
        let above = hat.keys().filter(|(_, y)| degree(y) > top).count();
        let psi_hat = GradedSection { lambda: Weight::zero(self.rank()), shift: top, terms: hat };
        let mut rep = VerifyReport::new("KLT route A = route B");
        rep.notes.push(format!("unprojected section terms below grade {top}: {below}, in grade {}: {above}", top + 1));
        let n = self.n();
        let lambda = Weight::zero(self.rank());
        for g in (0..=d).step_by(p as usize) {
            for b in monomials_of_degree(n, g) {
                for dx in 0..=d {
                    for a in monomials_of_degree(n, dx) {
                        let f = GradedSection::monomial(lambda.clone(), a, b, 1);
                        let prod = self.product_unchecked(&f, &psi_hat);
                        let route_a = self.op_s(&prod.component(g + top))?;
                        let route_b = self.op_s(&self.mul_psi(&f)?)?;
                        rep.count_nontrivial(!route_b.is_zero());
                        rep.record(|| format!("x^{:?} y^{:?}", &a[..n], &b[..n]), &route_a.terms, &route_b.terms, route_a.terms == route_b.terms);
                    }
                }
            }
        }
        Ok(rep)
    }
}

#[cfg(test)]
mod tests;
