//! Integer multivariate polynomials.
//!
//! Text grammar (variables `x1..xn`, integers, `+ - * ^`, parentheses; the
//! exponent after `^` is a nonnegative integer literal; no implicit
//! multiplication):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | 'x' integer | '(' expr ')'
//! ```

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::modring::{add_mod, mul_mod};
use crate::padic::PAdicApprox;

/// Largest exponent accepted by the parser.
const MAX_EXPONENT: u32 = 256;

/// A polynomial in `n` variables with integer coefficients. Zero coefficients
/// are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    n: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MPoly {
    pub fn zero(n: usize) -> Self {
        MPoly { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: impl Into<BigInt>) -> Self {
        let mut p = MPoly::zero(n);
        p.add_term(vec![0; n], c.into());
        p
    }

    /// The variable `x_{i+1}` (zero-based index `i`).
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        let mut p = MPoly::zero(n);
        p.add_term(e, BigInt::one());
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>) -> Self {
        let mut p = MPoly::zero(n);
        for (e, c) in terms {
            assert_eq!(e.len(), n, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    pub fn parse(text: &str, n: usize) -> Result<Self> {
        Parser { src: text.as_bytes(), pos: 0, n }.parse()
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms.get(&vec![0; self.n]).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, e: Vec<u32>, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.n, other.n);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &BigInt) -> MPoly {
        if k.is_zero() {
            return MPoly::zero(self.n);
        }
        MPoly { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect() }
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.n, other.n);
        let mut acc: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_default() += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MPoly { n: self.n, terms: acc }
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut acc = MPoly::constant(self.n, 1);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Formal partial derivative with respect to `x_{j+1}`.
    pub fn derivative(&self, j: usize) -> MPoly {
        let mut out = MPoly::zero(self.n);
        for (e, c) in &self.terms {
            if e[j] > 0 {
                let mut e2 = e.clone();
                e2[j] -= 1;
                out.add_term(e2, c * BigInt::from(e[j]));
            }
        }
        out
    }

    /// The homogeneous degree-one part as a coefficient row.
    pub fn linear_part(&self) -> Vec<BigInt> {
        (0..self.n)
            .map(|j| {
                let mut e = vec![0; self.n];
                e[j] = 1;
                self.terms.get(&e).cloned().unwrap_or_default()
            })
            .collect()
    }

    /// Exact integer value at an integer point.
    pub fn eval_int(&self, point: &[BigInt]) -> Result<BigInt> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: point.len() });
        }
        let mut acc = BigInt::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, k) in point.iter().zip(e) {
                if *k > 0 {
                    t *= x.pow(*k);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Value at `point` modulo `p^precision`.
    pub fn evaluate_mod(&self, point: &[PAdicApprox]) -> Result<PAdicApprox> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: point.len() });
        }
        let p = point.first().map(|a| a.p());
        let Some(p) = p else {
            return Err(Error::DimensionMismatch { expected: self.n, got: 0 });
        };
        let prec = point.iter().map(|a| a.precision()).min().unwrap();
        let ints: Vec<BigInt> = point.iter().map(|a| BigInt::from(a.residue().clone())).collect();
        let v = self.eval_int(&ints)?;
        let modulus = BigInt::from(BigUint::from(p).pow(prec));
        let r = v.mod_floor(&modulus);
        Ok(PAdicApprox::new(p, r.to_biguint().unwrap(), prec))
    }

    /// Minimum p-adic valuation over the coefficients; `None` for zero.
    pub fn content_valuation(&self, p: u64) -> Option<u32> {
        let pb = BigInt::from(p);
        self.terms.values().map(|c| valuation_bigint(c, &pb)).min()
    }

    /// Divides every coefficient by `p^e`, which must divide all of them.
    pub fn div_pow(&self, p: u64, e: u32) -> MPoly {
        let d = BigInt::from(p).pow(e);
        MPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    let (q, r) = c.div_rem(&d);
                    debug_assert!(r.is_zero());
                    (k.clone(), q)
                })
                .collect(),
        }
    }

    /// Substitutes `x_j -> shift_j + scale * y_j` and expands.
    pub fn affine_substitute(&self, shift: &[BigInt], scale: &BigInt) -> Result<MPoly> {
        if shift.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: shift.len() });
        }
        let images: Vec<MPoly> = (0..self.n)
            .map(|j| MPoly::constant(self.n, shift[j].clone()).add(&MPoly::var(self.n, j).scale(scale)))
            .collect();
        // cache powers of each image
        let mut out = MPoly::zero(self.n);
        let mut cache: BTreeMap<(usize, u32), MPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut t = MPoly::constant(self.n, c.clone());
            for (j, k) in e.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                let pw = cache.entry((j, *k)).or_insert_with(|| images[j].pow(*k)).clone();
                t = t.mul(&pw);
            }
            out = out.add(&t);
        }
        Ok(out)
    }

    /// Writes `f(x0 + p^level y) = p^e f_level(y)` with `f_level` not in `pZ[y]`.
    pub fn shift_rescale(&self, x0: &[BigInt], level: u32, p: u64) -> Result<(u32, MPoly)> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let scale = BigInt::from(p).pow(level);
        let g = self.affine_substitute(x0, &scale)?;
        let e = g.content_valuation(p).ok_or(Error::ZeroPolynomial)?;
        Ok((e, g.div_pow(p, e)))
    }

    /// Coefficients reduced modulo `modulus` for fast evaluation.
    pub fn compile(&self, modulus: u64) -> CompiledPoly {
        let m = BigInt::from(modulus);
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| {
                let cm = c.mod_floor(&m).to_u64().unwrap();
                let vars = e
                    .iter()
                    .enumerate()
                    .filter(|(_, k)| **k > 0)
                    .map(|(j, k)| (j, *k))
                    .collect();
                (cm, vars)
            })
            .collect();
        CompiledPoly { modulus, terms }
    }
}

pub(crate) fn valuation_bigint(c: &BigInt, p: &BigInt) -> u32 {
    if c.is_zero() {
        return u32::MAX;
    }
    let mut v = 0;
    let mut x = c.clone();
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        x = q;
        v += 1;
    }
}

/// A polynomial with coefficients reduced modulo a fixed word-sized modulus.
#[derive(Debug, Clone)]
pub struct CompiledPoly {
    modulus: u64,
    terms: Vec<(u64, Vec<(usize, u32)>)>,
}

impl CompiledPoly {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// Value at a point whose coordinates are residues modulo `self.modulus()`
    /// (or any integers; only their classes matter).
    pub fn eval(&self, point: &[u64]) -> u64 {
        let m = self.modulus;
        let mut acc = 0u64;
        for (c, vars) in &self.terms {
            let mut t = *c;
            for &(j, k) in vars {
                let x = point[j] % m;
                for _ in 0..k {
                    t = mul_mod(t, x, m);
                }
            }
            acc = add_mod(acc, t, m);
        }
        acc
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest total degree first, then reverse lexicographic
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| {
            let da: u32 = a.iter().sum();
            let db: u32 = b.iter().sum();
            db.cmp(&da).then_with(|| b.cmp(a))
        });
        for (i, (e, c)) in terms.into_iter().enumerate() {
            let neg = c.sign() == Sign::Minus;
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let abs = c.abs();
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(j, k)| if *k == 1 { format!("x{}", j + 1) } else { format!("x{}^{}", j + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{abs}")?;
            } else if abs.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", abs, vars.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn parse(mut self) -> Result<MPoly> {
        let e = self.expr()?;
        self.skip_ws();
        if self.pos < self.src.len() {
            return Err(self.err(format!("unexpected '{}'", self.src[self.pos] as char)));
        }
        Ok(e)
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Syntax { position: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<MPoly> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                b'-' => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<MPoly> {
        let mut acc = self.unary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<MPoly> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<MPoly> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            if self.peek() == Some(b'-') {
                return Err(Error::NegativeExponent { position: self.pos });
            }
            let start = self.pos;
            let k = self.integer()?;
            let k = k
                .to_u32()
                .filter(|k| *k <= MAX_EXPONENT)
                .ok_or(Error::Syntax { position: start, message: "exponent too large".into() })?;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<BigUint> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        Ok(s.parse::<BigUint>().unwrap())
    }

    fn atom(&mut self) -> Result<MPoly> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                let start = self.pos;
                if !self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    return Err(self.err("expected variable index after 'x'"));
                }
                let idx = self.integer()?.to_usize().unwrap_or(usize::MAX);
                if idx == 0 || idx > self.n {
                    let _ = start;
                    return Err(Error::VariableOutOfRange { index: idx, n: self.n });
                }
                let v = MPoly::var(self.n, idx - 1);
                self.no_implicit()?;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let k = self.integer()?;
                self.no_implicit()?;
                Ok(MPoly::constant(self.n, BigInt::from(k)))
            }
            Some(c) => Err(self.err(format!("unexpected '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    /// Rejects `3x1`, `x1x2`, `2(x1)` and similar juxtapositions.
    fn no_implicit(&mut self) -> Result<()> {
        if let Some(c) = self.src.get(self.pos) {
            if c.is_ascii_alphanumeric() || *c == b'(' {
                return Err(self.err("implicit multiplication is not allowed"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn parse_examples() {
        let f = MPoly::parse("x2^2", 2).unwrap();
        assert_eq!(f, MPoly::from_terms(2, [(vec![0, 2], bi(1))]));
        let g = MPoly::parse("3*x1 - 9*x2", 2).unwrap();
        assert_eq!(g, MPoly::from_terms(2, [(vec![1, 0], bi(3)), (vec![0, 1], bi(-9))]));
        assert_eq!(MPoly::parse("x1^-1", 1), Err(Error::NegativeExponent { position: 3 }));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(MPoly::parse("x1^", 1), Err(Error::Syntax { position: 3, .. })));
        assert_eq!(MPoly::parse("x5", 3), Err(Error::VariableOutOfRange { index: 5, n: 3 }));
        assert!(matches!(MPoly::parse("3x1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(MPoly::parse("(x1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(MPoly::parse("x1 x1", 1), Err(Error::Syntax { .. })));
        assert!(matches!(MPoly::parse("1/3", 1), Err(Error::Syntax { .. })));
    }

    #[test]
    fn parse_expands() {
        let f = MPoly::parse("(x1 + 1)^2 - x1*(x1 + 2)", 1).unwrap();
        assert_eq!(f, MPoly::constant(1, 1));
        let g = MPoly::parse("-x1^2", 1).unwrap();
        assert_eq!(g, MPoly::from_terms(1, [(vec![2], bi(-1))]));
        assert!(MPoly::parse("x1 - x1", 1).unwrap().is_zero());
    }

    #[test]
    fn evaluate_examples() {
        let f = MPoly::parse("x2^2", 2).unwrap();
        let pt = [PAdicApprox::new(3, 0u32, 4), PAdicApprox::new(3, 3u32, 4)];
        let v = f.evaluate_mod(&pt).unwrap();
        assert_eq!(v, PAdicApprox::new(3, 9u32, 4));
        assert_eq!(v.valuation(), crate::Valuation::Exact(2));

        let g = MPoly::parse("3*x1 - 9*x2", 2).unwrap();
        let pt = [PAdicApprox::new(3, 1u32, 3), PAdicApprox::new(3, 0u32, 3)];
        assert_eq!(g.evaluate_mod(&pt).unwrap(), PAdicApprox::new(3, 3u32, 3));

        let h = MPoly::parse("x1", 2).unwrap();
        let pt = [PAdicApprox::new(3, 0u32, 3), PAdicApprox::new(3, 17u32, 3)];
        assert_eq!(h.evaluate_mod(&pt).unwrap().valuation(), crate::Valuation::AtLeast(3));
        assert!(matches!(h.evaluate_mod(&pt[..1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn shift_rescale_examples() {
        let f = MPoly::parse("3*x1 - 9*x2", 2).unwrap();
        let (e, g) = f.shift_rescale(&[bi(0), bi(0)], 2, 3).unwrap();
        assert_eq!(e, 3);
        assert_eq!(g, MPoly::parse("x1 - 3*x2", 2).unwrap());

        let f = MPoly::parse("x1^2", 1).unwrap();
        assert_eq!(f.shift_rescale(&[bi(0)], 1, 3).unwrap(), (2, MPoly::parse("x1^2", 1).unwrap()));

        let f = MPoly::parse("x1 + 3", 1).unwrap();
        assert_eq!(f.shift_rescale(&[bi(0)], 1, 3).unwrap(), (1, MPoly::parse("x1 + 1", 1).unwrap()));

        assert_eq!(MPoly::zero(1).shift_rescale(&[bi(0)], 1, 3), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn derivatives() {
        let f = MPoly::parse("3*x1 - 9*x2", 2).unwrap();
        assert_eq!(f.derivative(0), MPoly::constant(2, 3));
        assert_eq!(f.derivative(1), MPoly::constant(2, -9));
        let g = MPoly::parse("x2^2", 2).unwrap();
        assert_eq!(g.derivative(1).eval_int(&[bi(5), bi(3)]).unwrap(), bi(6));
    }

    #[test]
    fn compiled_matches_exact() {
        let f = MPoly::parse("5*x1^3 - 7*x1*x2 + 11", 2).unwrap();
        let c = f.compile(81);
        for a in 0..20u64 {
            for b in 0..20u64 {
                let exact = f.eval_int(&[bi(a as i64), bi(b as i64)]).unwrap();
                assert_eq!(BigInt::from(c.eval(&[a, b])), exact.mod_floor(&bi(81)));
            }
        }
    }

    #[test]
    fn display_is_reparseable() {
        let f = MPoly::parse("-(x1 - 2*x2)^3 + 4*x3 - 1", 3).unwrap();
        let g = MPoly::parse(&f.to_string(), 3).unwrap();
        assert_eq!(f, g);
        assert_eq!(MPoly::parse("3*x1 - 9*x2", 2).unwrap().to_string(), "3*x1 - 9*x2");
    }
}
