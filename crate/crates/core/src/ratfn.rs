//! Univariate polynomials and rational functions over `Q` in the variable
//! `t`, exact rational reconstruction from power series coefficients, and
//! pole analysis of denominators.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Coefficients from the constant term up; never has trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QPoly(Vec<BigRational>);

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        QPoly(coeffs)
    }

    pub fn zero() -> Self {
        QPoly(Vec::new())
    }

    pub fn one() -> Self {
        QPoly(vec![BigRational::one()])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::new(coeffs.iter().map(|&c| q(c)).collect())
    }

    /// `c t^k`.
    pub fn monomial(c: BigRational, k: usize) -> Self {
        let mut v = vec![BigRational::zero(); k + 1];
        v[k] = c;
        QPoly::new(v)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn coeff(&self, k: usize) -> BigRational {
        self.0.get(k).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.0.len() <= 1
    }

    pub fn leading(&self) -> BigRational {
        self.0.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        QPoly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &QPoly) -> QPoly {
        let n = self.0.len().max(other.0.len());
        QPoly::new((0..n).map(|k| self.coeff(k) - other.coeff(k)).collect())
    }

    pub fn scale(&self, c: &BigRational) -> QPoly {
        QPoly::new(self.0.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &QPoly) -> QPoly {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        QPoly::new(out)
    }

    pub fn pow(&self, k: u32) -> QPoly {
        (0..k).fold(QPoly::one(), |acc, _| acc.mul(self))
    }

    /// Terms of degree `< k`.
    pub fn truncate(&self, k: usize) -> QPoly {
        QPoly::new(self.0.iter().take(k).cloned().collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.leading();
        let mut r = self.0.clone();
        let mut quot = vec![BigRational::zero(); self.0.len().saturating_sub(dd)];
        while r.len() > dd && !r.is_empty() {
            let k = r.len() - 1 - dd;
            let c = r.last().unwrap() / &lead;
            for (j, dc) in d.0.iter().enumerate() {
                r[k + j] -= &c * dc;
            }
            quot[k] = c;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        (QPoly::new(quot), QPoly::new(r))
    }

    /// Exact quotient if `d` divides `self`.
    pub fn div_exact(&self, d: &QPoly) -> Option<QPoly> {
        let (quot, r) = self.divrem(d);
        r.is_zero().then_some(quot)
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &QPoly) -> QPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return a;
        }
        let lead = a.leading();
        a.scale(&(BigRational::one() / lead))
    }

    pub fn derivative(&self) -> QPoly {
        QPoly::new(self.0.iter().enumerate().skip(1).map(|(k, c)| c * q(k as i64)).collect())
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * t + c)
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        self.0
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Display for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (neg, a) = (c.is_negative(), c.abs());
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            match k {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    write!(f, "t")?;
                    if k > 1 {
                        write!(f, "^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// `num / den` in lowest terms with `den(0) = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalFn {
    pub num: QPoly,
    pub den: QPoly,
}

impl RationalFn {
    pub fn new(num: QPoly, den: QPoly) -> Result<Self> {
        if den.is_zero() || den.coeff(0).is_zero() {
            return Err(Error::InvalidArgument("denominator must not vanish at t = 0".into()));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_zero() || g.is_constant() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let c = BigRational::one() / den.coeff(0);
        Ok(RationalFn { num: num.scale(&c), den: den.scale(&c) })
    }

    /// First `k` power series coefficients at `t = 0`.
    pub fn series(&self, k: usize) -> Vec<BigRational> {
        let mut out: Vec<BigRational> = Vec::with_capacity(k);
        for n in 0..k {
            let mut c = self.num.coeff(n);
            for j in 1..=n.min(self.den.0.len().saturating_sub(1)) {
                c -= self.den.coeff(j) * &out[n - j];
            }
            out.push(c);
        }
        out
    }

    pub fn eval(&self, t: &BigRational) -> Option<BigRational> {
        let d = self.den.eval(t);
        (!d.is_zero()).then(|| self.num.eval(t) / d)
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        self.num.eval_complex(t) / self.den.eval_complex(t)
    }

    pub fn to_json(&self) -> RationalFnJson {
        let strs = |p: &QPoly| p.coeffs().iter().map(|c| c.to_string()).collect();
        RationalFnJson { num: strs(&self.num), den: strs(&self.den), display: self.to_string() }
    }
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// Serialized form: coefficient strings from the constant term up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalFnJson {
    pub num: Vec<String>,
    pub den: Vec<String>,
    pub display: String,
}

/// Berlekamp-Massey over `Q`: the shortest recurrence `C` (with `C(0) = 1`)
/// generating `a`, and its length.
pub fn berlekamp_massey(a: &[BigRational]) -> (QPoly, usize) {
    let mut c = QPoly::one();
    let mut b = QPoly::one();
    let mut l = 0usize;
    let mut m = 1usize;
    let mut bd = BigRational::one();
    for n in 0..a.len() {
        let mut d = a[n].clone();
        for i in 1..=l {
            d += c.coeff(i) * &a[n - i];
        }
        if d.is_zero() {
            m += 1;
            continue;
        }
        let adj = QPoly::monomial(&d / &bd, m).mul(&b);
        let t = c.clone();
        c = c.sub(&adj);
        if 2 * l <= n {
            l = n + 1 - l;
            b = t;
            bd = d;
            m = 1;
        } else {
            m += 1;
        }
    }
    (c, l)
}

/// Reconstructs `num/den` from the first coefficients of its series. The last
/// `holdout` coefficients are not used for fitting and must be reproduced.
pub fn reconstruct_rational(coeffs: &[BigRational], holdout: usize) -> Result<RationalFn> {
    let k = coeffs.len();
    if holdout >= k {
        return Err(Error::NoRecurrenceFound { terms: k });
    }
    let train = k - holdout;
    let (c, l) = berlekamp_massey(&coeffs[..train]);
    if 2 * l > train {
        return Err(Error::NoRecurrenceFound { terms: k });
    }
    let a = QPoly::new(coeffs[..train].to_vec());
    let num = a.mul(&c).truncate(l);
    let rf = RationalFn::new(num, c)?;
    let check = rf.series(k);
    if let Some(i) = (train..k).find(|&i| check[i] != coeffs[i]) {
        return Err(Error::ValidationFailed { index: i });
    }
    Ok(rf)
}

/// A denominator factor `(1 - p^{-v} t^N)^mu`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PoleFactor {
    pub v: i64,
    pub n: u32,
    pub mu: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoleReport {
    /// `rho` as a fraction `v/N` when the denominator factored exactly.
    pub rho_exact: Option<(i64, u32)>,
    pub rho: f64,
    /// Order of the pole at `s = -rho`.
    pub multiplicity: u32,
    pub factors: Vec<PoleFactor>,
}

fn factor_poly(p: u64, v: i64, n: u32) -> QPoly {
    let pv = BigRational::from_integer(BigInt::from(p)).pow(-v as i32);
    QPoly::one().sub(&QPoly::monomial(pv, n as usize))
}

/// Writes `den` as a product of factors `1 - p^{-v} t^N`, trying larger `N`
/// first. `None` if some part does not factor this way.
pub fn factor_denominator(den: &QPoly, p: u64) -> Option<Vec<PoleFactor>> {
    const V_RANGE: i64 = 64;
    let mut rest = den.scale(&(BigRational::one() / den.coeff(0)));
    let mut found: Vec<PoleFactor> = Vec::new();
    'outer: while !rest.is_constant() {
        let deg = rest.degree().unwrap() as u32;
        for n in (1..=deg).rev() {
            for v in -V_RANGE..=V_RANGE {
                let f = factor_poly(p, v, n);
                if let Some(qt) = rest.div_exact(&f) {
                    rest = qt;
                    match found.iter_mut().find(|x| x.v == v && x.n == n) {
                        Some(x) => x.mu += 1,
                        None => found.push(PoleFactor { v, n, mu: 1 }),
                    }
                    continue 'outer;
                }
            }
        }
        return None;
    }
    found.sort_by_key(|f| (f.n, f.v));
    Some(found)
}

/// Largest real part `-rho` of the poles of `Z(s)` with `t = p^{-s}`, and the
/// order of the pole there.
pub fn pole_analysis(rf: &RationalFn, p: u64) -> Result<PoleReport> {
    if rf.den.is_constant() {
        return Err(Error::ConstantDenominator);
    }
    if let Some(factors) = factor_denominator(&rf.den, p) {
        let best = factors
            .iter()
            .min_by(|a, b| (a.v * b.n as i64).cmp(&(b.v * a.n as i64)))
            .unwrap();
        let multiplicity = factors
            .iter()
            .filter(|f| f.v * best.n as i64 == best.v * f.n as i64)
            .map(|f| f.mu)
            .sum();
        let g = num_integer::gcd(best.v.unsigned_abs(), best.n as u64).max(1);
        return Ok(PoleReport {
            rho_exact: Some((best.v / g as i64, best.n / g as u32)),
            rho: best.v as f64 / best.n as f64,
            multiplicity,
            factors,
        });
    }
    numeric_poles(&rf.den, p)
}

fn numeric_poles(den: &QPoly, p: u64) -> Result<PoleReport> {
    let mut best: Option<(f64, u32)> = None;
    for (mult, part) in square_free(den) {
        for root in durand_kerner(&part) {
            let r = root.norm();
            let onreal = root.im.abs() < 1e-7 * r.max(1.0) && root.re > 0.0;
            best = match best {
                None => Some((r, if onreal { mult } else { 0 })),
                Some((br, bm)) if (r - br).abs() < 1e-8 * br => Some((br, if onreal { bm.max(mult) } else { bm })),
                Some((br, _)) if r < br => Some((r, if onreal { mult } else { 0 })),
                keep => keep,
            };
        }
    }
    let (r, m) = best.ok_or(Error::ConstantDenominator)?;
    Ok(PoleReport { rho_exact: None, rho: r.ln() / (p as f64).ln(), multiplicity: m, factors: Vec::new() })
}

/// Yun's square-free decomposition: `(i, g_i)` with `f = c prod g_i^i`.
pub fn square_free(f: &QPoly) -> Vec<(u32, QPoly)> {
    let mut out = Vec::new();
    let a0 = f.gcd(&f.derivative());
    let mut b = f.div_exact(&a0).unwrap();
    let mut c = f.derivative().div_exact(&a0).unwrap();
    let mut d = c.sub(&b.derivative());
    let mut i = 1;
    while !b.is_constant() {
        let a = b.gcd(&d);
        b = b.div_exact(&a).unwrap();
        c = d.div_exact(&a).unwrap();
        d = c.sub(&b.derivative());
        if !a.is_constant() {
            out.push((i, a));
        }
        i += 1;
    }
    out
}

/// Complex roots of a square-free polynomial by Durand-Kerner iteration.
pub fn durand_kerner(f: &QPoly) -> Vec<Complex64> {
    let Some(deg) = f.degree().filter(|d| *d > 0) else {
        return Vec::new();
    };
    let lead = f.leading();
    let monic: Vec<Complex64> = f
        .coeffs()
        .iter()
        .map(|c| Complex64::new((c / &lead).to_f64().unwrap_or(0.0), 0.0))
        .collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c);
    let radius = 1.0 + monic.iter().take(deg).map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut delta: f64 = 0.0;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 * radius {
            break;
        }
    }
    roots
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateReport {
    /// Whether `den` divides the product of candidate factors to power `cap`.
    pub divides: bool,
    /// Candidates `(v, N)` sharing a root with the denominator.
    pub matched: Vec<(i64, u32)>,
}

/// Compares a denominator with candidate factors `1 - p^{-v} t^N`.
pub fn candidate_pole_check(rf: &RationalFn, p: u64, candidates: &[(i64, u32)], cap: u32) -> Result<CandidateReport> {
    if rf.den.is_constant() {
        return Err(Error::ConstantDenominator);
    }
    let mut product = QPoly::one();
    let mut matched = Vec::new();
    for &(v, n) in candidates {
        let f = factor_poly(p, v, n);
        if !rf.den.gcd(&f).is_constant() {
            matched.push((v, n));
        }
        product = product.mul(&f.pow(cap));
    }
    if matched.is_empty() {
        return Err(Error::NoMatch);
    }
    Ok(CandidateReport { divides: product.divrem(&rf.den).1.is_zero(), matched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn reconstruct_geometric() {
        let coeffs: Vec<_> = (0..8).map(|k| r(1, 3i64.pow(k))).collect();
        let rf = reconstruct_rational(&coeffs, 2).unwrap();
        assert_eq!(rf.num, QPoly::one());
        assert_eq!(rf.den, QPoly::new(vec![q(1), r(-1, 3)]));
    }

    #[test]
    fn reconstruct_needs_enough_terms() {
        let coeffs = vec![q(1), q(2), q(5)];
        assert!(matches!(reconstruct_rational(&coeffs, 2), Err(Error::NoRecurrenceFound { .. })));
        // fits 1/(1-2t) on three terms, then breaks
        let coeffs = vec![q(1), q(2), q(4), q(8), q(17)];
        assert_eq!(reconstruct_rational(&coeffs, 1), Err(Error::ValidationFailed { index: 4 }));
    }

    #[test]
    fn poles_of_factored_denominators() {
        let den = QPoly::new(vec![q(1), q(0), r(-1, 3)]);
        let rf = RationalFn::new(QPoly::from_ints(&[1]), den).unwrap();
        let rep = pole_analysis(&rf, 3).unwrap();
        assert_eq!(rep.rho_exact, Some((1, 2)));
        assert_eq!(rep.multiplicity, 1);

        let den = QPoly::new(vec![q(1), r(-1, 3)]).pow(2);
        let rf = RationalFn::new(QPoly::one(), den).unwrap();
        let rep = pole_analysis(&rf, 3).unwrap();
        assert_eq!(rep.rho_exact, Some((1, 1)));
        assert_eq!(rep.multiplicity, 2);

        let rf = RationalFn::new(QPoly::from_ints(&[1, 1]), QPoly::one()).unwrap();
        assert_eq!(pole_analysis(&rf, 3), Err(Error::ConstantDenominator));
    }

    #[test]
    fn numeric_fallback_agrees() {
        // (1 - t/3)(1 - t/5) does not factor over powers of 3 alone
        let den = QPoly::new(vec![q(1), r(-1, 3)]).mul(&QPoly::new(vec![q(1), r(-1, 5)]));
        let rf = RationalFn::new(QPoly::one(), den).unwrap();
        let rep = pole_analysis(&rf, 3).unwrap();
        assert!(rep.rho_exact.is_none());
        assert!((rep.rho - 1.0).abs() < 1e-9);
        assert_eq!(rep.multiplicity, 1);
    }

    #[test]
    fn candidates() {
        let den = QPoly::new(vec![q(1), q(0), r(-1, 3)]);
        let rf = RationalFn::new(QPoly::one(), den).unwrap();
        let rep = candidate_pole_check(&rf, 3, &[(1, 2), (1, 1)], 1).unwrap();
        assert!(rep.divides);
        assert_eq!(rep.matched, vec![(1, 2)]);
        assert_eq!(candidate_pole_check(&rf, 3, &[(2, 1)], 2), Err(Error::NoMatch));
    }

    #[test]
    fn display() {
        let p = QPoly::new(vec![q(1), r(-1, 3), q(0), q(2)]);
        assert_eq!(p.to_string(), "1 - 1/3*t + 2*t^3");
    }

    #[test]
    fn square_free_parts() {
        let f = QPoly::from_ints(&[1, -1]).pow(3).mul(&QPoly::from_ints(&[2, 1]));
        let parts = square_free(&f);
        assert_eq!(parts.iter().map(|(i, g)| (*i, g.degree().unwrap())).collect::<Vec<_>>(), vec![(1, 1), (3, 1)]);
    }

    fn small_poly() -> impl Strategy<Value = QPoly> {
        prop::collection::vec(-5i64..=5, 1..4).prop_map(|v| QPoly::from_ints(&v))
    }

    proptest! {
        #[test]
        fn divrem_identity(a in small_poly(), b in small_poly()) {
            prop_assume!(!b.is_zero());
            let (qt, rm) = a.divrem(&b);
            prop_assert_eq!(qt.mul(&b).add(&rm), a);
            prop_assert!(rm.degree().is_none_or(|d| d < b.degree().unwrap()));
        }

        #[test]
        fn reconstruction_round_trip(num in small_poly(), den_tail in prop::collection::vec(-3i64..=3, 1..3)) {
            let mut den = vec![1i64];
            den.extend(den_tail);
            let rf = RationalFn::new(num, QPoly::from_ints(&den)).unwrap();
            let coeffs = rf.series(16);
            let back = reconstruct_rational(&coeffs, 3).unwrap();
            prop_assert_eq!(back, rf);
        }
    }
}
