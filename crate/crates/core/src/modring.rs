//! Word-sized arithmetic modulo `p^k`, used by the enumeration hot paths.

use crate::error::{Error, Result};

#[inline]
pub fn mul_mod(a: u64, b: u64, modulus: u64) -> u64 {
    ((a as u128 * b as u128) % modulus as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, modulus: u64) -> u64 {
    ((a as u128 + b as u128) % modulus as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, modulus);
        }
        base = mul_mod(base, base, modulus);
        exp >>= 1;
    }
    acc
}

/// `p^k`, or an error if it does not fit in 63 bits.
pub fn checked_pow(p: u64, k: u32) -> Result<u64> {
    p.checked_pow(k)
        .filter(|v| *v < (1u64 << 63))
        .ok_or_else(|| Error::InvalidArgument(format!("{p}^{k} overflows a machine word")))
}

pub fn ipow(p: u64, k: u32) -> u64 {
    checked_pow(p, k).expect("modulus overflow")
}

/// Valuation of `r` as a residue modulo `p^k`; `k` when `r == 0`.
#[inline]
pub fn val_mod(mut r: u64, p: u64, k: u32) -> u32 {
    if r == 0 {
        return k;
    }
    let mut v = 0;
    while r.is_multiple_of(p) {
        r /= p;
        v += 1;
    }
    v.min(k)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Modular inverse of a unit, by extended Euclid.
pub fn inv_mod(a: u64, modulus: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % modulus as i128, modulus as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(modulus as i128) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuations() {
        assert_eq!(val_mod(18, 3, 4), 2);
        assert_eq!(val_mod(0, 3, 4), 4);
        assert_eq!(val_mod(5, 2, 3), 0);
    }

    #[test]
    fn inverses() {
        for a in 1..27u64 {
            if a % 3 != 0 {
                let b = inv_mod(a, 27).unwrap();
                assert_eq!(mul_mod(a, b, 27), 1);
            } else {
                assert!(inv_mod(a, 27).is_none());
            }
        }
    }

    #[test]
    fn primes() {
        assert!(is_prime(2) && is_prime(3) && is_prime(7));
        assert!(!is_prime(1) && !is_prime(9));
        assert_eq!(prime_factors(18), vec![2, 3]);
    }
}
