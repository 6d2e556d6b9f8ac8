//! Truncated p-adic integers for `K = Q_p`.
//!
//! The uniformizer is `p`, the residue field `F_p` and the exponent of the
//! different is zero, so the standard additive character is
//! `Psi(z) = exp(2 pi i {z}_p)`.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// The valuation of a truncated p-adic integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Valuation {
    Exact(u32),
    /// The residue is zero at precision `M`; all we know is `ord >= M`.
    AtLeast(u32),
}

impl Valuation {
    pub fn exact(self) -> Option<u32> {
        match self {
            Valuation::Exact(v) => Some(v),
            Valuation::AtLeast(_) => None,
        }
    }
}

/// A residue modulo `p^M`, standing in for an element of `Z_p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PAdicApprox {
    p: u64,
    residue: BigUint,
    precision: u32,
}

impl PAdicApprox {
    /// Reduces `value` modulo `p^precision`.
    pub fn new(p: u64, value: impl Into<BigUint>, precision: u32) -> Self {
        let modulus = BigUint::from(p).pow(precision);
        PAdicApprox { p, residue: value.into() % modulus, precision }
    }

    pub fn from_i64(p: u64, value: i64, precision: u32) -> Self {
        let modulus = BigUint::from(p).pow(precision);
        let r = if value >= 0 {
            BigUint::from(value as u64) % &modulus
        } else {
            let neg = BigUint::from(value.unsigned_abs()) % &modulus;
            (&modulus - neg) % &modulus
        };
        PAdicApprox { p, residue: r, precision }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn modulus(&self) -> BigUint {
        BigUint::from(self.p).pow(self.precision)
    }

    pub fn valuation(&self) -> Valuation {
        if self.residue.is_zero() {
            return Valuation::AtLeast(self.precision);
        }
        let p = BigUint::from(self.p);
        let mut r = self.residue.clone();
        let mut k = 0;
        loop {
            let (q, rem) = r.div_rem(&p);
            if !rem.is_zero() {
                break;
            }
            r = q;
            k += 1;
        }
        Valuation::Exact(k)
    }

    /// `ac(a) = a p^{-ord a}` as a unit modulo `p^{M - ord a}`.
    pub fn angular_component(&self) -> Result<PAdicApprox> {
        let k = self.valuation().exact().ok_or(Error::UndefinedForZero)?;
        let unit = &self.residue / BigUint::from(self.p).pow(k);
        Ok(PAdicApprox::new(self.p, unit, self.precision - k))
    }

    fn common(&self, other: &Self) -> (u32, BigUint) {
        assert_eq!(self.p, other.p, "mixed primes");
        let prec = self.precision.min(other.precision);
        (prec, BigUint::from(self.p).pow(prec))
    }

    pub fn add(&self, other: &Self) -> Self {
        let (prec, m) = self.common(other);
        PAdicApprox { p: self.p, residue: (&self.residue + &other.residue) % m, precision: prec }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (prec, m) = self.common(other);
        PAdicApprox { p: self.p, residue: (&self.residue * &other.residue) % m, precision: prec }
    }

    pub fn neg(&self) -> Self {
        let m = self.modulus();
        PAdicApprox { p: self.p, residue: (&m - &self.residue) % &m, precision: self.precision }
    }

    /// Reduce to a lower precision.
    pub fn truncate(&self, precision: u32) -> Self {
        PAdicApprox::new(self.p, self.residue.clone(), precision.min(self.precision))
    }
}

/// `z = u p^{-m}` with `u` a unit modulo `p^m`, `m >= 1`; or, with `m == 0`,
/// an element of `Z_p` (fractional part zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledUnit {
    pub p: u64,
    pub m: u32,
    pub u: BigUint,
}

impl ScaledUnit {
    pub fn new(p: u64, u: impl Into<BigUint>, m: u32) -> Result<Self> {
        let u = u.into();
        if m > 0 && (&u % BigUint::from(p)).is_zero() {
            return Err(Error::NonUnitArgument(u.to_u64().unwrap_or(0)));
        }
        Ok(ScaledUnit { p, m, u })
    }

    /// An element of `Z_p`.
    pub fn integral(p: u64) -> Self {
        ScaledUnit { p, m: 0, u: BigUint::zero() }
    }

    /// `{z}_p = (u mod p^m) / p^m`, exactly.
    pub fn fractional_part(&self) -> BigRational {
        fractional_part(self.p, &self.u, self.m)
    }

    pub fn additive_character(&self) -> Complex64 {
        psi(&self.fractional_part())
    }
}

/// `{a p^{-m}}_p` for a nonnegative integer `a`; zero when `m == 0`.
pub fn fractional_part(p: u64, a: &BigUint, m: u32) -> BigRational {
    if m == 0 {
        return BigRational::zero();
    }
    let modulus = BigUint::from(p).pow(m);
    BigRational::new((a % &modulus).into(), modulus.into())
}

/// `exp(2 pi i q)` for an exact rational `q`; only `q mod 1` matters.
pub fn psi(q: &BigRational) -> Complex64 {
    let num = q.numer().mod_floor(q.denom());
    let x = BigRational::new(num, q.denom().clone());
    let f = x.to_f64().unwrap_or(0.0);
    if f == 0.0 {
        return Complex64::one();
    }
    Complex64::from_polar(1.0, 2.0 * PI * f)
}

/// `exp(2 pi i a / modulus)` for word-sized residues.
#[inline]
pub fn psi_ratio(a: u64, modulus: u64) -> Complex64 {
    let a = a % modulus;
    if a == 0 {
        return Complex64::one();
    }
    Complex64::from_polar(1.0, 2.0 * PI * (a as f64) / (modulus as f64))
}
