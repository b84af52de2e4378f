//! Exact integer and modular arithmetic.
//!
//! The residue ring and the small number-theoretic helpers are generic over
//! the unsigned primitive integers; the crate root fixes `u64` as the working
//! residue type. Counts that can outgrow a machine word (binomials, Gaussian
//! binomials) are returned as [`BigUint`].

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, PrimInt, Unsigned, Zero};

use crate::error::{Error, Result};
use crate::Rational;

/// Unsigned primitive integers usable as residues.
pub trait ResidueInt: PrimInt + Unsigned + Integer + Debug + Send + Sync + 'static {}

impl<T: PrimInt + Unsigned + Integer + Debug + Send + Sync + 'static> ResidueInt for T {}

/// The ring of residues modulo an odd `v >= 3`, where 2 is invertible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OddResidueRing<T> {
    modulus: T,
    inv2: T,
}

impl<T: ResidueInt> OddResidueRing<T> {
    pub fn new(modulus: T) -> Result<Self> {
        let two = T::one() + T::one();
        let three = two + T::one();
        // Half-sums add a residue to the modulus, so keep one bit of headroom.
        if modulus < three || modulus.is_even() || modulus > T::max_value() >> 1 {
            return Err(Error::InvalidModulus(modulus.to_u64().unwrap_or(u64::MAX)));
        }
        let inv2 = (modulus + T::one()) / two;
        Ok(Self { modulus, inv2 })
    }

    pub fn modulus(&self) -> T {
        self.modulus
    }

    /// The inverse of 2, i.e. `(v + 1) / 2`.
    pub fn inv2(&self) -> T {
        self.inv2
    }

    pub fn contains(&self, x: T) -> bool {
        x < self.modulus
    }

    pub fn reduce(&self, x: T) -> T {
        x % self.modulus
    }

    /// Canonical representative in `[0, v)` of a signed integer.
    pub fn reduce_signed(&self, x: i64) -> T {
        let v = self.modulus.to_i128().expect("modulus fits in i128");
        let r = i128::from(x).rem_euclid(v);
        T::from(r).expect("reduced residue fits in the residue type")
    }

    pub fn add(&self, x: T, y: T) -> T {
        let s = x + y;
        if s >= self.modulus {
            s - self.modulus
        } else {
            s
        }
    }

    pub fn neg(&self, x: T) -> T {
        if x.is_zero() {
            x
        } else {
            self.modulus - x
        }
    }

    pub fn sub(&self, x: T, y: T) -> T {
        self.add(x, self.neg(y))
    }

    /// `(x + y) / 2` in the ring, for residues `x, y < v`.
    pub fn half_sum(&self, x: T, y: T) -> T {
        debug_assert!(x < self.modulus && y < self.modulus);
        let two = T::one() + T::one();
        let s = self.add(x, y);
        if s.is_even() {
            s / two
        } else {
            (s + self.modulus) / two
        }
    }

    /// `2x` in the ring.
    pub fn double(&self, x: T) -> T {
        self.add(x, x)
    }
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Gaussian binomial coefficient `[k t]_q`.
pub fn gaussian_binomial(k: u64, t: u64, q: u64) -> Result<BigUint> {
    if q < 2 {
        return Err(Error::InvalidArgument(format!("gaussian binomial needs q >= 2, got {q}")));
    }
    if t > k {
        return Err(Error::InvalidArgument(format!("gaussian binomial [{k} {t}]_{q} needs t <= k")));
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..t {
        num *= q.pow((k - i) as u32) - 1u32;
        den *= q.pow((i + 1) as u32) - 1u32;
    }
    debug_assert!((&num % &den).is_zero());
    Ok(num / den)
}

/// The exact rational `num / den`, reduced. Panics on a zero denominator.
pub fn ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Rational {
    Rational::new(num.into(), den.into())
}

/// `(gcd(a, b), lcm(a, b))`.
pub fn gcd_lcm<T: Integer + Copy>(a: T, b: T) -> (T, T) {
    a.gcd_lcm(&b)
}

/// Largest `r` with `r^n <= v`, by binary search over exact powers.
pub fn integer_root<T: ResidueInt>(v: T, n: u32) -> T {
    assert!(n >= 1, "root index must be positive");
    if n == 1 || v <= T::one() {
        return v;
    }
    let fits = |r: T| -> bool {
        let mut acc = T::one();
        for _ in 0..n {
            match acc.checked_mul(&r) {
                Some(p) if p <= v => acc = p,
                _ => return false,
            }
        }
        true
    };
    let two = T::one() + T::one();
    let (mut lo, mut hi) = (T::one(), v);
    while lo < hi {
        let mid = lo + (hi - lo + T::one()) / two;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - T::one();
        }
    }
    lo
}

/// Whether `q` is a power of a prime.
pub fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2;
    let mut n = q;
    while p * p <= n {
        if n.is_multiple_of(p) {
            while n.is_multiple_of(p) {
                n /= p;
            }
            return n == 1;
        }
        p += 1;
    }
    true
}
