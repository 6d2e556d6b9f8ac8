//! Multiplicative characters of `(Z/p^c)^x` for odd `p`, and the normalized
//! Gauss sums
//! `g_chi = (p-1)^{-1} p^{1-c(chi)} sum_{v mod p^c(chi), unit} chi(v) Psi(v / p^c(chi))`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::modring::{ipow, mul_mod, pow_mod, prime_factors};
use crate::padic::psi_ratio;

/// Largest modulus `p^c` for which a discrete-log table is built.
pub const MAX_MODULUS: u64 = 1_000_000;

/// The cyclic group `(Z/p^c)^x` with a fixed generator and its discrete logs.
pub struct CharacterGroup {
    p: u64,
    level: u32,
    modulus: u64,
    order: u64,
    generator: u64,
    dlog: Vec<u32>,
}

impl fmt::Debug for CharacterGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharacterGroup")
            .field("p", &self.p)
            .field("level", &self.level)
            .field("generator", &self.generator)
            .finish()
    }
}

impl CharacterGroup {
    pub fn new(p: u64, level: u32) -> Result<Arc<Self>> {
        if p == 2 {
            return Err(Error::EvenPrimeUnsupported);
        }
        if !crate::modring::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if level == 0 {
            return Err(Error::InvalidArgument("character level must be >= 1".into()));
        }
        let modulus = p
            .checked_pow(level)
            .filter(|m| *m <= MAX_MODULUS)
            .ok_or(Error::ModulusTooLarge(p.saturating_pow(level)))?;
        let order = modulus / p * (p - 1);
        let factors = prime_factors(order);
        let generator = (2..modulus)
            .find(|g| g % p != 0 && factors.iter().all(|q| pow_mod(*g, order / q, modulus) != 1))
            .expect("(Z/p^c)^x is cyclic for odd p");
        let mut dlog = vec![u32::MAX; modulus as usize];
        let mut x = 1u64;
        for k in 0..order {
            dlog[x as usize] = k as u32;
            x = mul_mod(x, generator, modulus);
        }
        Ok(Arc::new(CharacterGroup { p, level, modulus, order, generator, dlog }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `phi(p^c)`.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn dlog(&self, u: u64) -> Result<u64> {
        let r = u % self.modulus;
        match self.dlog[r as usize] {
            u32::MAX => Err(Error::NonUnitArgument(u)),
            k => Ok(k as u64),
        }
    }

    /// Conductor of the character with the given index: smallest `c'` such
    /// that it is trivial on units `= 1 mod p^{c'}`.
    fn conductor_of(&self, index: u64) -> u32 {
        if index == 0 {
            return 0;
        }
        // the subgroup 1 + p^{c'} Z has order p^{c - c'}
        let mut v = 0;
        let mut i = index;
        while i.is_multiple_of(self.p) {
            i /= self.p;
            v += 1;
        }
        self.level.saturating_sub(v).max(1)
    }

    pub fn character(self: &Arc<Self>, index: u64) -> MultChar {
        let index = index % self.order;
        MultChar { group: Arc::clone(self), index, conductor: self.conductor_of(index) }
    }

    /// All `phi(p^c)` characters, by index.
    pub fn characters(self: &Arc<Self>) -> Vec<MultChar> {
        (0..self.order).map(|i| self.character(i)).collect()
    }
}

/// `enumerate_characters(p, c)`: every character of `(Z/p^c)^x` with its conductor.
pub fn enumerate_characters(p: u64, level: u32) -> Result<Vec<MultChar>> {
    Ok(CharacterGroup::new(p, level)?.characters())
}

/// `chi(g^k) = exp(2 pi i index k / phi(p^c))` for the fixed generator `g`.
#[derive(Clone)]
pub struct MultChar {
    group: Arc<CharacterGroup>,
    index: u64,
    conductor: u32,
}

impl fmt::Debug for MultChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MultChar(p={}, c={}, index={}, conductor={})",
            self.group.p, self.group.level, self.index, self.conductor
        )
    }
}

impl PartialEq for MultChar {
    fn eq(&self, other: &Self) -> bool {
        self.group.p == other.group.p && self.group.level == other.group.level && self.index == other.index
    }
}

impl MultChar {
    pub fn p(&self) -> u64 {
        self.group.p
    }

    pub fn level(&self) -> u32 {
        self.group.level
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Zero for the trivial character.
    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn is_trivial(&self) -> bool {
        self.index == 0
    }

    pub fn group(&self) -> &Arc<CharacterGroup> {
        &self.group
    }

    pub fn inverse(&self) -> MultChar {
        self.group.character((self.group.order - self.index) % self.group.order)
    }

    /// Exact phase `(num, den)` with `chi(u) = exp(2 pi i num / den)`.
    pub fn phase(&self, u: u64) -> Result<(u64, u64)> {
        let k = self.group.dlog(u)?;
        let ord = self.group.order;
        Ok((((self.index as u128 * k as u128) % ord as u128) as u64, ord))
    }

    pub fn value(&self, u: u64) -> Result<Complex64> {
        let (num, den) = self.phase(u)?;
        Ok(if num == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, 2.0 * PI * num as f64 / den as f64)
        })
    }

    /// The normalized Gauss sum, by direct summation at the conductor level.
    pub fn gauss_sum(&self) -> Result<Complex64> {
        if self.is_trivial() {
            return Err(Error::TrivialCharacter);
        }
        let p = self.group.p;
        let c = self.conductor;
        let pc = ipow(p, c);
        let mut acc = Complex64::new(0.0, 0.0);
        for v in 1..pc {
            if v % p == 0 {
                continue;
            }
            acc += self.value(v)? * psi_ratio(v, pc);
        }
        Ok(acc * ((p as f64).powi(1 - c as i32) / (p - 1) as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_examples() {
        let cs = enumerate_characters(3, 1).unwrap();
        assert_eq!(cs.iter().map(|c| c.conductor()).collect::<Vec<_>>(), vec![0, 1]);
        let cs = enumerate_characters(5, 1).unwrap();
        assert_eq!(cs.iter().map(|c| c.conductor()).collect::<Vec<_>>(), vec![0, 1, 1, 1]);
        let cs = enumerate_characters(3, 2).unwrap();
        assert_eq!(cs.len(), 6);
        assert_eq!(cs.iter().filter(|c| c.conductor() <= 1).count(), 2);
        assert_eq!(cs.iter().filter(|c| c.conductor() == 2).count(), 4);
    }

    #[test]
    fn rejects_bad_moduli() {
        assert_eq!(enumerate_characters(2, 3).unwrap_err(), Error::EvenPrimeUnsupported);
        assert!(matches!(enumerate_characters(3, 13), Err(Error::ModulusTooLarge(_))));
    }

    #[test]
    fn value_examples() {
        let triv = enumerate_characters(5, 1).unwrap()[0].clone();
        assert_eq!(triv.value(3).unwrap(), Complex64::new(1.0, 0.0));
        let quad = enumerate_characters(3, 1).unwrap()[1].clone();
        assert!((quad.value(2).unwrap() + 1.0).norm() < 1e-12);
        // generator of (Z/5)^x is 2; index 1 gives chi(2) = i
        let g = CharacterGroup::new(5, 1).unwrap();
        assert_eq!(g.generator(), 2);
        let chi = g.character(1);
        assert!((chi.value(2).unwrap() - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert!((chi.value(4).unwrap() + 1.0).norm() < 1e-12);
        assert_eq!(chi.value(10).unwrap_err(), Error::NonUnitArgument(10));
    }

    #[test]
    fn gauss_examples() {
        let quad = enumerate_characters(3, 1).unwrap()[1].clone();
        let g = quad.gauss_sum().unwrap();
        assert!((g - Complex64::new(0.0, 3f64.sqrt() / 2.0)).norm() < 1e-12);
        for chi in enumerate_characters(5, 1).unwrap().into_iter().skip(1) {
            assert!((chi.gauss_sum().unwrap().norm() - 5f64.sqrt() / 4.0).abs() < 1e-12);
        }
        for chi in enumerate_characters(3, 2).unwrap().into_iter().filter(|c| c.conductor() == 2) {
            assert!((chi.gauss_sum().unwrap().norm() - 0.5).abs() < 1e-12);
        }
        assert_eq!(enumerate_characters(3, 1).unwrap()[0].gauss_sum(), Err(Error::TrivialCharacter));
    }

    #[test]
    fn inverse_and_orthogonality() {
        for chi in enumerate_characters(7, 2).unwrap() {
            let inv = chi.inverse();
            let mut total = Complex64::new(0.0, 0.0);
            for u in (1..49u64).filter(|u| u % 7 != 0) {
                let a = chi.value(u).unwrap();
                assert!((a * inv.value(u).unwrap() - 1.0).norm() < 1e-12);
                total += a;
            }
            if !chi.is_trivial() {
                assert!(total.norm() < 1e-10);
            }
        }
    }
}
