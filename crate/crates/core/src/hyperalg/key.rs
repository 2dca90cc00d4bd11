use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest number of positive roots among supported kinds (`G2`).
pub const MAX_ROOTS: usize = 6;

/// Exponent vector over positive roots in the fixed convex order.
pub type Exps = [u16; MAX_ROOTS];

/// A PBW monomial `E^(e) binom(H, h) F^(f)`: divided powers of positive root
/// vectors, binomials in the `H_i`, and divided powers of negative root
/// vectors, each block in the fixed root order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PbwKey {
    pub e: Exps,
    pub h: [u16; 2],
    pub f: Exps,
}

impl PbwKey {
    pub const ONE: PbwKey = PbwKey { e: [0; MAX_ROOTS], h: [0; 2], f: [0; MAX_ROOTS] };

    pub fn is_one(&self) -> bool {
        *self == Self::ONE
    }

    pub fn has_e(&self) -> bool {
        self.e.iter().any(|&x| x > 0)
    }

    pub fn has_h(&self) -> bool {
        self.h.iter().any(|&x| x > 0)
    }

    pub fn has_f(&self) -> bool {
        self.f.iter().any(|&x| x > 0)
    }

    /// Total degree: sum of all divided-power and binomial indices.
    pub fn degree(&self) -> u32 {
        self.e.iter().chain(self.h.iter()).chain(self.f.iter()).map(|&x| x as u32).sum()
    }

    pub fn components(&self) -> impl Iterator<Item = u16> + '_ {
        self.e.iter().chain(self.h.iter()).chain(self.f.iter()).copied()
    }

    pub fn map_components(&self, mut g: impl FnMut(u16) -> u16) -> PbwKey {
        PbwKey { e: self.e.map(&mut g), h: self.h.map(&mut g), f: self.f.map(&mut g) }
    }

    /// Display with `n` roots and rank `l`.
    pub fn display(&self, n: usize, l: usize) -> KeyDisplay<'_> {
        KeyDisplay { key: self, n, l }
    }
}

pub struct KeyDisplay<'a> {
    key: &'a PbwKey,
    n: usize,
    l: usize,
}

fn join(v: &[u16]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for KeyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "E[{}] H[{}] F[{}]",
            join(&self.key.e[..self.n]),
            join(&self.key.h[..self.l]),
            join(&self.key.f[..self.n])
        )
    }
}
