//! Root systems of rank at most two: Cartan data, positive roots in a fixed
//! convex order, weights, and a Chevalley basis with integral structure
//! constants.
//!
//! Conventions: `cartan[i][j] = <alpha_j, alpha_i^vee>`. In `B2` the first
//! simple root is long, in `G2` the first simple root is short. Roots are
//! written in simple-root coordinates, weights in fundamental-weight
//! coordinates.
//!
//! Chevalley basis signs: for a non-simple positive root `beta`, take the
//! smallest `i` with `gamma = beta - alpha_i` a root and set
//! `e_beta = [e_i, e_gamma] / (r + 1)` where `r` is the largest `k` with
//! `gamma - k alpha_i` a root, so `N_{alpha_i, gamma} = r + 1 > 0`. The
//! negative root vectors are `f_beta = -omega(e_beta)` for the Chevalley
//! involution `omega`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{express_rat, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    A1,
    A2,
    B2,
    G2,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::A1 => "A1",
            Kind::A2 => "A2",
            Kind::B2 => "B2",
            Kind::G2 => "G2",
        };
        f.write_str(s)
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A1" => Ok(Kind::A1),
            "A2" => Ok(Kind::A2),
            "B2" => Ok(Kind::B2),
            "G2" => Ok(Kind::G2),
            other => Err(Error::Parse(format!("unknown root system kind `{other}`"))),
        }
    }
}

impl Kind {
    pub fn cartan(self) -> Vec<Vec<i64>> {
        match self {
            Kind::A1 => vec![vec![2]],
            Kind::A2 => vec![vec![2, -1], vec![-1, 2]],
            Kind::B2 => vec![vec![2, -1], vec![-2, 2]],
            Kind::G2 => vec![vec![2, -3], vec![-1, 2]],
        }
    }

    /// Squared lengths `(alpha_i, alpha_i)` up to a common factor.
    pub fn symmetrizer(self) -> Vec<i64> {
        match self {
            Kind::A1 => vec![1],
            Kind::A2 => vec![1, 1],
            Kind::B2 => vec![2, 1],
            Kind::G2 => vec![1, 3],
        }
    }

    pub fn bad_primes(self) -> &'static [u32] {
        match self {
            Kind::A1 | Kind::A2 => &[],
            Kind::B2 => &[2],
            Kind::G2 => &[2, 3],
        }
    }
}

/// An integral weight in fundamental-weight coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    pub coords: Vec<i64>,
}

impl Weight {
    pub fn new(coords: Vec<i64>) -> Self {
        Weight { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Weight { coords: vec![0; rank] }
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight { coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, k: i64) -> Weight {
        Weight { coords: self.coords.iter().map(|a| a * k).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// Whether the weight lies in `p * Lambda`.
    pub fn divisible_by(&self, p: i64) -> bool {
        self.coords.iter().all(|c| c.rem_euclid(p) == 0)
    }

    pub fn div_exact(&self, p: i64) -> Option<Weight> {
        self.divisible_by(p).then(|| Weight { coords: self.coords.iter().map(|c| c / p).collect() })
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords)
    }
}

/// A positive root or difference of roots in simple-root coordinates.
pub type Root = [i64; 2];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureConstant {
    pub alpha: Vec<i64>,
    pub beta: Vec<i64>,
    pub n: i64,
}

/// Index of a Chevalley basis vector: `0..N` are `e_beta`, then `h_1..h_l`,
/// then `f_beta` in the same root order.
pub type BasisIndex = usize;

/// Sparse integral vector in the Chevalley basis.
pub type LieVec = Vec<(BasisIndex, i64)>;

#[derive(Clone, Debug, Serialize)]
pub struct RootSystem {
    pub kind: Kind,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    pub positive_roots: Vec<Vec<i64>>,
    pub structure_constants: Vec<StructureConstant>,
    #[serde(skip)]
    roots: Vec<Root>,
    #[serde(skip)]
    root_index: HashMap<Root, usize>,
    #[serde(skip)]
    bracket: Vec<Vec<LieVec>>,
    /// `ad_div[x][j][y] = ad_x^j (y) / j!` for `j >= 1`, while nonzero.
    #[serde(skip)]
    ad_div: Vec<Vec<Vec<LieVec>>>,
}

impl RootSystem {
    pub fn build(kind: Kind) -> RootSystem {
        let cartan = kind.cartan();
        let rank = cartan.len();
        let roots = convex_order(&cartan);
        let root_index = roots.iter().enumerate().map(|(k, r)| (*r, k)).collect();
        let mut rs = RootSystem {
            kind,
            rank,
            positive_roots: roots.iter().map(|r| r[..rank].to_vec()).collect(),
            cartan,
            structure_constants: Vec::new(),
            roots,
            root_index,
            bracket: Vec::new(),
            ad_div: Vec::new(),
        };
        rs.bracket = chevalley_brackets(&rs);
        rs.finish_tables();
        rs
    }

    fn finish_tables(&mut self) {
        self.ad_div = compute_ad_div(&self.bracket);
        self.structure_constants = self.collect_structure_constants();
    }

    /// Copy with one structure constant multiplied by two (negative control).
    pub fn with_corrupted_constant(&self) -> RootSystem {
        let mut rs = self.clone();
        if self.num_pos() >= 2 {
            let (a, b) = (0, self.num_pos() - 1);
            for (x, y) in [(a, b), (b, a)] {
                for t in rs.bracket[x][y].iter_mut() {
                    t.1 *= 2;
                }
            }
        } else {
            // rank one: double the coroot in [e, f]
            let (e, f) = (0, self.f_index(0));
            for (x, y) in [(e, f), (f, e)] {
                for t in rs.bracket[x][y].iter_mut() {
                    t.1 *= 2;
                }
            }
        }
        rs.finish_tables();
        rs
    }

    /// Number of positive roots.
    pub fn num_pos(&self) -> usize {
        self.roots.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.num_pos() + self.rank
    }

    pub fn root(&self, k: usize) -> Root {
        self.roots[k]
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn root_position(&self, r: Root) -> Option<usize> {
        self.root_index.get(&r).copied()
    }

    pub fn simple_root_position(&self, i: usize) -> usize {
        let mut r = [0; 2];
        r[i] = 1;
        self.root_index[&r]
    }

    pub fn h_index(&self, i: usize) -> BasisIndex {
        self.num_pos() + i
    }

    pub fn f_index(&self, k: usize) -> BasisIndex {
        self.num_pos() + self.rank + k
    }

    pub fn bracket(&self, a: BasisIndex, b: BasisIndex) -> &LieVec {
        &self.bracket[a][b]
    }

    /// `ad_x^j(y) / j!`; empty once it vanishes.
    pub fn ad_divided(&self, x: BasisIndex, j: usize, y: BasisIndex) -> &[(BasisIndex, i64)] {
        if j == 0 {
            unreachable!("ad_divided is only used for j >= 1");
        }
        self.ad_div[x].get(j).map(|v| v[y].as_slice()).unwrap_or(&[])
    }

    pub fn max_ad_power(&self, x: BasisIndex) -> usize {
        self.ad_div[x].len().saturating_sub(1)
    }

    /// Root-lattice weight (simple-root coordinates) of a basis vector.
    pub fn basis_root(&self, b: BasisIndex) -> Root {
        let n = self.num_pos();
        if b < n {
            self.roots[b]
        } else if b < n + self.rank {
            [0, 0]
        } else {
            let r = self.roots[b - n - self.rank];
            [-r[0], -r[1]]
        }
    }

    /// `<beta, alpha_i^vee>` for `beta` in simple-root coordinates.
    pub fn root_pair(&self, beta: Root, i: usize) -> i64 {
        (0..self.rank).map(|j| beta[j] * self.cartan[i][j]).sum()
    }

    /// A root-lattice element as a weight.
    pub fn root_weight(&self, beta: Root) -> Weight {
        Weight::new((0..self.rank).map(|i| self.root_pair(beta, i)).collect())
    }

    pub fn simple_root_weight(&self, i: usize) -> Weight {
        let mut r = [0; 2];
        r[i] = 1;
        self.root_weight(r)
    }

    pub fn rho(&self) -> Weight {
        Weight::new(vec![1; self.rank])
    }

    pub fn is_good_prime(&self, p: u32) -> bool {
        !self.kind.bad_primes().contains(&p)
    }

    pub fn check_good_prime(&self, p: u32) -> Result<()> {
        if crate::field::is_prime(p) && self.is_good_prime(p) {
            Ok(())
        } else {
            Err(Error::BadPrime { kind: self.kind.to_string(), p })
        }
    }

    /// `<lambda, alpha_i^vee>` with a zero-based simple index.
    pub fn pair(&self, lambda: &Weight, i: usize) -> Result<i64> {
        if i >= self.rank {
            return Err(Error::IndexOutOfRange { index: i, rank: self.rank });
        }
        Ok(lambda.coords[i])
    }

    /// Whether `beta` is a root (positive or negative; zero is not).
    pub fn is_root(&self, beta: Root) -> bool {
        self.root_index.contains_key(&beta) || self.root_index.contains_key(&[-beta[0], -beta[1]])
    }

    pub fn is_convex(&self) -> bool {
        let n = self.num_pos();
        for a in 0..n {
            for b in a + 1..n {
                let s = add_root(self.roots[a], self.roots[b]);
                if let Some(&c) = self.root_index.get(&s) {
                    if !(a < c && c < b) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn collect_structure_constants(&self) -> Vec<StructureConstant> {
        let n = self.num_pos();
        let root_vectors: Vec<BasisIndex> = (0..n).chain(n + self.rank..self.dim()).collect();
        let mut out = Vec::new();
        for &a in &root_vectors {
            for &b in &root_vectors {
                let s = add_root(self.basis_root(a), self.basis_root(b));
                if s == [0, 0] || !self.is_root(s) {
                    continue;
                }
                let coef = self.bracket[a][b].first().map(|t| t.1).unwrap_or(0);
                let ra = self.basis_root(a);
                let rb = self.basis_root(b);
                out.push(StructureConstant { alpha: ra[..self.rank].to_vec(), beta: rb[..self.rank].to_vec(), n: coef });
            }
        }
        out
    }

    /// Antisymmetry and the Jacobi identity over all basis triples.
    pub fn check_jacobi(&self) -> bool {
        let d = self.dim();
        let br = |u: &BTreeMap<usize, i64>, b: usize| -> BTreeMap<usize, i64> {
            let mut out = BTreeMap::new();
            for (&k, &c) in u {
                for &(t, v) in &self.bracket[k][b] {
                    *out.entry(t).or_insert(0) += c * v;
                }
            }
            out.retain(|_, v| *v != 0);
            out
        };
        for a in 0..d {
            for b in 0..d {
                let ab: BTreeMap<_, _> = self.bracket[a][b].iter().copied().collect();
                let mut ba: BTreeMap<_, _> = self.bracket[b][a].iter().map(|&(k, v)| (k, -v)).collect();
                ba.retain(|_, v| *v != 0);
                if ab != ba {
                    return false;
                }
            }
        }
        for a in 0..d {
            for b in 0..d {
                let ab: BTreeMap<_, _> = self.bracket[a][b].iter().copied().collect();
                for c in 0..d {
                    let bc: BTreeMap<_, _> = self.bracket[b][c].iter().copied().collect();
                    let ca: BTreeMap<_, _> = self.bracket[c][a].iter().copied().collect();
                    let mut total = br(&ab, c);
                    for (k, v) in br(&bc, a) {
                        *total.entry(k).or_insert(0) += v;
                    }
                    for (k, v) in br(&ca, b) {
                        *total.entry(k).or_insert(0) += v;
                    }
                    if total.values().any(|&v| v != 0) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Rational matrices of the Chevalley basis on the irreducible module
    /// of dominant highest weight `lambda`; rows index the output basis.
    pub fn module_matrices(&self, lambda: &Weight) -> Vec<Vec<Vec<Rat>>> {
        chevalley_matrices(self, &lambda.coords)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("root system serializes")
    }
}

pub fn add_root(a: Root, b: Root) -> Root {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub_root(a: Root, b: Root) -> Root {
    [a[0] - b[0], a[1] - b[1]]
}

/// Positive roots in the convex order attached to the reduced word
/// `s_1 s_2 s_1 ...` of the longest Weyl group element.
fn convex_order(cartan: &[Vec<i64>]) -> Vec<Root> {
    let rank = cartan.len();
    let reflect = |i: usize, b: Root| -> Root {
        let c: i64 = (0..rank).map(|j| b[j] * cartan[i][j]).sum();
        let mut out = b;
        out[i] -= c;
        out
    };
    let simple = |i: usize| {
        let mut r = [0; 2];
        r[i] = 1;
        r
    };
    if rank == 1 {
        return vec![[1, 0]];
    }
    let mut out = Vec::new();
    for k in 0.. {
        let mut beta = simple(k % 2);
        for m in (0..k).rev() {
            beta = reflect(m % 2, beta);
        }
        if beta.iter().any(|&c| c < 0) {
            break;
        }
        out.push(beta);
    }
    out
}

type QMat = Vec<Vec<Rat>>;

fn q(n: i64) -> Rat {
    Rat::from_integer(n as i128)
}

fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    let n = a.len();
    let mut out = vec![vec![q(0); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k] == q(0) {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

fn commutator(a: &QMat, b: &QMat) -> QMat {
    let ab = mat_mul(a, b);
    let ba = mat_mul(b, a);
    ab.iter().zip(&ba).map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect()).collect()
}

fn mat_scale(a: &QMat, c: Rat) -> QMat {
    a.iter().map(|r| r.iter().map(|x| x * c).collect()).collect()
}

fn flatten(a: &QMat) -> Vec<Rat> {
    a.iter().flatten().copied().collect()
}

/// Matrices of `e_i`, `f_i` on the irreducible module of highest weight
/// `lambda` over the rationals, built weight space by weight space from the
/// highest weight vector using only the defining relations.
fn irreducible_module(cartan: &[Vec<i64>], lambda: &[i64]) -> (Vec<QMat>, Vec<QMat>) {
    let rank = cartan.len();
    // weights in fundamental coordinates; alpha_j = column j of the Cartan matrix
    let alpha: Vec<Vec<i64>> = (0..rank).map(|j| (0..rank).map(|i| cartan[i][j]).collect()).collect();
    let plus = |mu: &[i64], j: usize| -> Vec<i64> { mu.iter().zip(&alpha[j]).map(|(a, b)| a + b).collect() };
    let minus = |mu: &[i64], j: usize| -> Vec<i64> { mu.iter().zip(&alpha[j]).map(|(a, b)| a - b).collect() };

    let mut dims: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    // e[(mu, j)]: images of basis of V_mu in V_{mu + alpha_j}
    let mut e: HashMap<(Vec<i64>, usize), Vec<Vec<Rat>>> = HashMap::new();
    // f[(mu, i)]: images of basis of V_mu in V_{mu - alpha_i}
    let mut f: HashMap<(Vec<i64>, usize), Vec<Vec<Rat>>> = HashMap::new();
    let dim_of = |dims: &BTreeMap<Vec<i64>, usize>, mu: &Vec<i64>| dims.get(mu).copied().unwrap_or(0);

    dims.insert(lambda.to_vec(), 1);
    for j in 0..rank {
        e.insert((lambda.to_vec(), j), vec![vec![]]);
    }
    let mut layer = vec![lambda.to_vec()];
    while !layer.is_empty() {
        let mut next: Vec<Vec<i64>> = Vec::new();
        for nu in &layer {
            for i in 0..rank {
                let mu = minus(nu, i);
                if !next.contains(&mu) {
                    next.push(mu);
                }
            }
        }
        let mut produced = Vec::new();
        for mu in next {
            // candidates f_i b with b a basis vector of V_{mu + alpha_i}
            let mut cands: Vec<(usize, usize, Vec<Rat>)> = Vec::new();
            for i in 0..rank {
                let src = plus(&mu, i);
                for b in 0..dim_of(&dims, &src) {
                    let mut sig = Vec::new();
                    for j in 0..rank {
                        let tgt_dim = dim_of(&dims, &plus(&mu, j));
                        let mut v = vec![q(0); tgt_dim];
                        if tgt_dim > 0 {
                            let eb = &e[&(src.clone(), j)][b];
                            if !eb.is_empty() {
                                let fi = &f[&(plus(&src, j), i)];
                                for (k, c) in eb.iter().enumerate() {
                                    if *c != q(0) {
                                        for (t, x) in fi[k].iter().enumerate() {
                                            v[t] += c * x;
                                        }
                                    }
                                }
                            }
                            if i == j {
                                v[b] += q(src[i]);
                            }
                        }
                        sig.extend(v);
                    }
                    cands.push((i, b, sig));
                }
            }
            let mut basis: Vec<Vec<Rat>> = Vec::new();
            for (_, _, sig) in &cands {
                let mut trial = basis.clone();
                trial.push(sig.clone());
                if sig.iter().any(|x| *x != q(0)) && express_rat(&basis, sig).is_none() {
                    basis = trial;
                }
            }
            if basis.is_empty() {
                continue;
            }
            let d = basis.len();
            dims.insert(mu.clone(), d);
            for (i, b, sig) in &cands {
                let coords = express_rat(&basis, sig).expect("candidate lies in span");
                let key = (plus(&mu, *i), *i);
                let src_dim = dims[&key.0];
                let entry = f.entry(key).or_insert_with(|| vec![Vec::new(); src_dim]);
                entry[*b] = coords;
            }
            let mut offset = 0;
            for j in 0..rank {
                let tgt_dim = dim_of(&dims, &plus(&mu, j));
                let imgs = basis.iter().map(|s| s[offset..offset + tgt_dim].to_vec()).collect();
                e.insert((mu.clone(), j), imgs);
                offset += tgt_dim;
            }
            produced.push(mu);
        }
        layer = produced;
    }
    // sources whose f_i image space is zero
    for (mu, &d) in &dims {
        for i in 0..rank {
            f.entry((mu.clone(), i)).or_insert_with(|| vec![Vec::new(); d]);
        }
    }

    let mut offsets: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut total = 0;
    for (mu, &d) in &dims {
        offsets.insert(mu.clone(), total);
        total += d;
    }
    let mut es = vec![vec![vec![q(0); total]; total]; rank];
    let mut fs = vec![vec![vec![q(0); total]; total]; rank];
    for (mu, &d) in &dims {
        let o = offsets[mu];
        for i in 0..rank {
            let up = plus(mu, i);
            if let Some(&ou) = offsets.get(&up) {
                for b in 0..d {
                    for (t, c) in e[&(mu.clone(), i)][b].iter().enumerate() {
                        es[i][ou + t][o + b] = *c;
                    }
                }
            }
            let down = minus(mu, i);
            if let Some(&od) = offsets.get(&down) {
                for b in 0..d {
                    for (t, c) in f[&(mu.clone(), i)][b].iter().enumerate() {
                        fs[i][od + t][o + b] = *c;
                    }
                }
            }
        }
    }
    (es, fs)
}

/// Matrices of the whole Chevalley basis (in basis-index order) acting on
/// the irreducible module of highest weight `lambda`, over the rationals.
fn chevalley_matrices(rs: &RootSystem, lambda: &[i64]) -> Vec<QMat> {
    let rank = rs.rank;
    let n = rs.num_pos();
    let (es, fs) = irreducible_module(&rs.cartan, lambda);

    let mut e_mats: Vec<Option<QMat>> = vec![None; n];
    let mut f_mats: Vec<Option<QMat>> = vec![None; n];
    for i in 0..rank {
        let k = rs.simple_root_position(i);
        e_mats[k] = Some(es[i].clone());
        f_mats[k] = Some(fs[i].clone());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&k| rs.roots[k][0] + rs.roots[k][1]);
    for &k in &order {
        if e_mats[k].is_some() {
            continue;
        }
        let beta = rs.roots[k];
        let (i, gamma) = (0..rank)
            .find_map(|i| {
                let mut ai = [0; 2];
                ai[i] = 1;
                let g = sub_root(beta, ai);
                rs.root_index.get(&g).map(|&gk| (i, gk))
            })
            .expect("non-simple root has a simple predecessor");
        let mut ai = [0; 2];
        ai[i] = 1;
        let mut r = 0;
        while rs.is_root(sub_root(rs.roots[gamma], [ai[0] * (r + 1), ai[1] * (r + 1)])) {
            r += 1;
        }
        let s = rs.simple_root_position(i);
        let scale = Rat::new(1, (r + 1) as i128);
        let e = mat_scale(&commutator(e_mats[s].as_ref().unwrap(), e_mats[gamma].as_ref().unwrap()), scale);
        let f = mat_scale(&commutator(f_mats[s].as_ref().unwrap(), f_mats[gamma].as_ref().unwrap()), scale);
        e_mats[k] = Some(e);
        f_mats[k] = Some(f);
    }
    let mut basis: Vec<QMat> = Vec::new();
    basis.extend(e_mats.into_iter().map(Option::unwrap));
    for i in 0..rank {
        let s = rs.simple_root_position(i);
        basis.push(commutator(&basis[s], &fs[i]));
    }
    basis.extend(f_mats.into_iter().map(Option::unwrap));
    basis
}

fn chevalley_brackets(rs: &RootSystem) -> Vec<Vec<LieVec>> {
    // the adjoint module is the irreducible module of the highest root
    let theta = rs.roots.iter().max_by_key(|r| r[0] + r[1]).copied().unwrap();
    let theta_w = rs.root_weight(theta).coords;
    let basis = chevalley_matrices(rs, &theta_w);

    let d = basis.len();
    let flat: Vec<Vec<Rat>> = basis.iter().map(flatten).collect();
    let mut table = vec![vec![Vec::new(); d]; d];
    for a in 0..d {
        for b in 0..d {
            let c = commutator(&basis[a], &basis[b]);
            let target = flatten(&c);
            if target.iter().all(|x| *x == q(0)) {
                continue;
            }
            let w = add_root(rs.basis_root(a), rs.basis_root(b));
            let cands: Vec<usize> = (0..d).filter(|&t| rs.basis_root(t) == w).collect();
            let vecs: Vec<Vec<Rat>> = cands.iter().map(|&t| flat[t].clone()).collect();
            let coords = express_rat(&vecs, &target).expect("bracket closes in the Chevalley basis");
            let mut entry = Vec::new();
            for (&t, c) in cands.iter().zip(coords) {
                if c != q(0) {
                    assert!(c.is_integer(), "non-integral structure constant");
                    entry.push((t, *c.numer() as i64));
                }
            }
            table[a][b] = entry;
        }
    }
    table
}

fn compute_ad_div(bracket: &[Vec<LieVec>]) -> Vec<Vec<Vec<LieVec>>> {
    let d = bracket.len();
    let mut out = Vec::with_capacity(d);
    for x in 0..d {
        let mut powers: Vec<Vec<LieVec>> = vec![(0..d).map(|y| vec![(y, 1)]).collect()];
        for j in 1.. {
            let prev = &powers[j - 1];
            let mut layer = Vec::with_capacity(d);
            let mut any = false;
            for v in prev.iter() {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                for &(k, c) in v {
                    for &(t, b) in &bracket[x][k] {
                        *acc.entry(t).or_insert(0) += c * b;
                    }
                }
                let mut entry = Vec::new();
                for (t, c) in acc {
                    if c != 0 {
                        entry.push((t, c / j as i64));
                    }
                }
                entry.retain(|t| t.1 != 0);
                any |= !entry.is_empty();
                layer.push(entry);
            }
            if !any {
                break;
            }
            powers.push(layer);
        }
        out.push(powers);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convex_orders() {
        let a2 = RootSystem::build(Kind::A2);
        assert_eq!(a2.positive_roots, vec![vec![1, 0], vec![1, 1], vec![0, 1]]);
        let b2 = RootSystem::build(Kind::B2);
        assert_eq!(b2.positive_roots, vec![vec![1, 0], vec![1, 1], vec![1, 2], vec![0, 1]]);
        let g2 = RootSystem::build(Kind::G2);
        assert_eq!(
            g2.positive_roots,
            vec![vec![1, 0], vec![3, 1], vec![2, 1], vec![3, 2], vec![1, 1], vec![0, 1]]
        );
    }

    #[test]
    fn tables_are_consistent() {
        for kind in [Kind::A1, Kind::A2, Kind::B2, Kind::G2] {
            let rs = RootSystem::build(kind);
            assert!(rs.is_convex(), "{kind}");
            assert!(rs.check_jacobi(), "{kind}");
            assert_eq!(rs.num_pos(), [1, 3, 4, 6][kind as usize]);
            // [e_i, f_i] = h_i and [h_i, e_beta] = <beta, alpha_i^vee> e_beta
            for i in 0..rs.rank {
                let s = rs.simple_root_position(i);
                assert_eq!(rs.bracket(s, rs.f_index(s)), &vec![(rs.h_index(i), 1)]);
                for k in 0..rs.num_pos() {
                    let c = rs.root_pair(rs.root(k), i);
                    let expect = if c == 0 { vec![] } else { vec![(k, c)] };
                    assert_eq!(rs.bracket(rs.h_index(i), k), &expect);
                }
            }
            // N_{a,b} = +-(r+1)
            for sc in &rs.structure_constants {
                let a = [sc.alpha[0], *sc.alpha.get(1).unwrap_or(&0)];
                let b = [sc.beta[0], *sc.beta.get(1).unwrap_or(&0)];
                let mut r = 0;
                while rs.is_root(sub_root(b, [a[0] * (r + 1), a[1] * (r + 1)])) {
                    r += 1;
                }
                assert_eq!(sc.n.abs(), r + 1, "{kind} {a:?} {b:?}");
            }
        }
    }

    #[test]
    fn corrupted_constants_break_jacobi() {
        let rs = RootSystem::build(Kind::A2).with_corrupted_constant();
        assert!(!rs.check_jacobi());
    }

    #[test]
    fn good_primes_and_pairing() {
        let a2 = RootSystem::build(Kind::A2);
        assert!(a2.is_good_prime(2));
        assert!(!RootSystem::build(Kind::B2).is_good_prime(2));
        assert!(RootSystem::build(Kind::G2).is_good_prime(5));
        let a1 = a2.simple_root_weight(0);
        assert_eq!(a2.pair(&a1, 0).unwrap(), 2);
        assert_eq!(a2.pair(&a1, 1).unwrap(), -1);
        assert_eq!(a2.pair(&a2.rho(), 1).unwrap(), 1);
        assert!(a2.pair(&a1, 2).is_err());
    }
}
