//! Small exact linear algebra: dense and sparse Gaussian elimination over
//! `F_p`, and dense elimination over the rationals.

use std::collections::BTreeMap;

use num_rational::Ratio;

use crate::field::PrimeField;

pub type Rat = Ratio<i128>;

/// Row-reduced echelon form over `F_p`, kept fully reduced so that the
/// null space and particular solutions can be read off directly.
#[derive(Clone, Debug)]
pub struct SparseRref {
    field: PrimeField,
    ncols: usize,
    /// pivot column -> row (pivot entry normalized to 1, other pivots cleared)
    rows: BTreeMap<usize, BTreeMap<usize, u32>>,
}

impl SparseRref {
    pub fn new(field: PrimeField, ncols: usize) -> Self {
        SparseRref { field, ncols, rows: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    fn reduce(&self, row: &mut BTreeMap<usize, u32>) {
        let f = self.field;
        let pivots: Vec<usize> = row.keys().copied().filter(|c| self.rows.contains_key(c)).collect();
        for c in pivots {
            let Some(&coef) = row.get(&c) else { continue };
            if coef == 0 {
                continue;
            }
            for (&k, &v) in &self.rows[&c] {
                let e = row.entry(k).or_insert(0);
                *e = f.sub(*e, f.mul(coef, v));
                if *e == 0 {
                    row.remove(&k);
                }
            }
        }
    }

    /// Insert a row; returns `true` if it increased the rank.
    pub fn insert(&mut self, mut row: BTreeMap<usize, u32>) -> bool {
        row.retain(|_, v| *v != 0);
        self.reduce(&mut row);
        let Some((&piv, &pv)) = row.iter().find(|(c, _)| !self.rows.contains_key(c)) else {
            return false;
        };
        // every remaining key is a non-pivot column after reduction
        debug_assert!(row.keys().all(|c| !self.rows.contains_key(c)));
        let f = self.field;
        let inv = f.inv(pv);
        for v in row.values_mut() {
            *v = f.mul(*v, inv);
        }
        for other in self.rows.values_mut() {
            if let Some(&coef) = other.get(&piv) {
                for (&k, &v) in &row {
                    let e = other.entry(k).or_insert(0);
                    *e = f.sub(*e, f.mul(coef, v));
                    if *e == 0 {
                        other.remove(&k);
                    }
                }
            }
        }
        self.rows.insert(piv, row);
        true
    }

    /// Basis of the null space `{x : row . x = 0 for all rows}`.
    pub fn nullspace(&self) -> Vec<Vec<u32>> {
        let f = self.field;
        let mut out = Vec::new();
        for free in 0..self.ncols {
            if self.rows.contains_key(&free) {
                continue;
            }
            let mut v = vec![0u32; self.ncols];
            v[free] = 1;
            for (&piv, row) in &self.rows {
                if let Some(&c) = row.get(&free) {
                    v[piv] = f.neg(c);
                }
            }
            out.push(v);
        }
        out
    }
}

/// Dense row reduction over `F_p`. Returns the reduced rows and pivot columns.
pub fn rref(field: PrimeField, mut rows: Vec<Vec<u32>>, ncols: usize) -> (Vec<Vec<u32>>, Vec<usize>) {
    let f = field;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, pr);
        let inv = f.inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let coef = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = f.sub(*x, f.mul(coef, y));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

pub fn rank(field: PrimeField, rows: Vec<Vec<u32>>, ncols: usize) -> usize {
    rref(field, rows, ncols).1.len()
}

/// Solve `x . rows = target` for `x` (a combination of the given rows),
/// returning `None` when `target` is outside the row space. The rows must
/// be linearly independent.
pub fn express_in_rows(field: PrimeField, rows: &[Vec<u32>], target: &[u32]) -> Option<Vec<u32>> {
    let f = field;
    let n = rows.len();
    let m = target.len();
    // augmented system: columns of `rows` as equations
    let mut eqs: Vec<Vec<u32>> = (0..m)
        .map(|j| {
            let mut e: Vec<u32> = rows.iter().map(|r| r[j]).collect();
            e.push(target[j]);
            e
        })
        .collect();
    let (red, pivots) = {
        let (red, piv) = rref(f, std::mem::take(&mut eqs), n + 1);
        (red, piv)
    };
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![0u32; n];
    for (row, &c) in red.iter().zip(&pivots) {
        x[c] = row[n];
    }
    Some(x)
}

/// Dense row reduction over the rationals; returns pivot columns and the
/// reduced rows.
pub fn rref_rat(mut rows: Vec<Vec<Rat>>, ncols: usize) -> (Vec<Vec<Rat>>, Vec<usize>) {
    let zero = Rat::from_integer(0);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != zero) else { continue };
        rows.swap(r, pr);
        let inv = Rat::from_integer(1) / rows[r][c];
        for v in rows[r].iter_mut() {
            *v *= inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != zero {
                let coef = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x -= coef * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Express `target` as a rational combination of `vectors` (assumed
/// independent). `None` if not in their span.
pub fn express_rat(vectors: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    let n = vectors.len();
    let m = target.len();
    let eqs: Vec<Vec<Rat>> = (0..m)
        .map(|j| {
            let mut e: Vec<Rat> = vectors.iter().map(|v| v[j]).collect();
            e.push(target[j]);
            e
        })
        .collect();
    let (red, pivots) = rref_rat(eqs, n + 1);
    if pivots.last() == Some(&n) {
        return None;
    }
    let mut x = vec![Rat::from_integer(0); n];
    for (row, &c) in red.iter().zip(&pivots) {
        x[c] = row[n];
    }
    Some(x)
}
