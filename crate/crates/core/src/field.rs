//! Arithmetic in the prime field `F_p`, with elements stored as canonical
//! representatives in `0..p`.

use serde::{Deserialize, Serialize};

/// The prime field `F_p`. Elements are plain `u32` values reduced mod `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeField {
    p: u32,
}

impl PrimeField {
    pub fn new(p: u32) -> Self {
        assert!(is_prime(p), "{p} is not prime");
        PrimeField { p }
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        ((a as u64 * b as u64) % self.p as u64) as u32
    }

    pub fn pow(&self, mut a: u32, mut e: u64) -> u32 {
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self, a: u32) -> u32 {
        assert!(!a.is_multiple_of(self.p), "inverse of zero in F_{}", self.p);
        self.pow(a, (self.p - 2) as u64)
    }

    /// Reduce an arbitrary signed integer.
    #[inline]
    pub fn from_i128(&self, a: i128) -> u32 {
        a.rem_euclid(self.p as i128) as u32
    }

    #[inline]
    pub fn from_i64(&self, a: i64) -> u32 {
        a.rem_euclid(self.p as i64) as u32
    }

    /// Signed representative in `(-p/2, p/2]`, used for readable output.
    pub fn signed(&self, a: u32) -> i64 {
        if a as u64 * 2 > self.p as u64 {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    /// `binom(m, k) mod p` for any integer `m` (generalized binomial),
    /// via Lucas' theorem.
    pub fn binom(&self, m: i64, k: u64) -> u32 {
        if m >= 0 {
            self.lucas(m as u64, k)
        } else {
            // binom(m, k) = (-1)^k binom(k - m - 1, k)
            let v = self.lucas(k + (-m) as u64 - 1, k);
            if k % 2 == 1 {
                self.neg(v)
            } else {
                v
            }
        }
    }

    fn lucas(&self, mut n: u64, mut k: u64) -> u32 {
        let p = self.p as u64;
        let mut acc = 1u32 % self.p;
        while k > 0 || n > 0 {
            let (nd, kd) = (n % p, k % p);
            if kd > nd {
                return 0;
            }
            acc = self.mul(acc, self.small_binom(nd as u32, kd as u32));
            n /= p;
            k /= p;
        }
        acc
    }

    fn small_binom(&self, n: u32, k: u32) -> u32 {
        let mut num = 1u32;
        let mut den = 1u32;
        for i in 0..k {
            num = self.mul(num, n - i);
            den = self.mul(den, i + 1);
        }
        self.mul(num, self.inv(den))
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Exact generalized binomial coefficient `binom(m, k)` over the integers.
pub fn binom_i128(m: i128, k: u32) -> Option<i128> {
    let mut acc: i128 = 1;
    for i in 0..k as i128 {
        acc = acc.checked_mul(m - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binom_matches_exact_values() {
        for p in [2, 3, 5, 7] {
            let f = PrimeField::new(p);
            for m in -12i64..20 {
                for k in 0..10u32 {
                    let exact = binom_i128(m as i128, k).unwrap();
                    assert_eq!(f.binom(m, k as u64), f.from_i128(exact), "p={p} m={m} k={k}");
                }
            }
        }
    }

    #[test]
    fn inverse_and_signed() {
        let f = PrimeField::new(7);
        for a in 1..7 {
            assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        assert_eq!(f.signed(6), -1);
        assert_eq!(f.signed(3), 3);
    }
}
