use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modring::is_prime;
use crate::mpoly::MPoly;
use crate::padic::PAdicApprox;

/// Constraints `f_1..f_{l-1}` cutting out the submanifold and the target
/// (phase) polynomial `f_l`, over `Z_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    p: u64,
    n: usize,
    constraints: Vec<MPoly>,
    target: MPoly,
    resolution_data: Option<Vec<NumericalDatum>>,
}

/// One pair `(N, v)` of numerical data of an embedded resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumericalDatum {
    pub n: u32,
    pub v: u32,
}

impl PolySystem {
    pub fn new(p: u64, n: usize, constraints: Vec<MPoly>, target: MPoly) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if constraints.is_empty() {
            return Err(Error::InvalidSystem("at least one constraint is required".into()));
        }
        let l = constraints.len() + 1;
        if l > n {
            return Err(Error::InvalidSystem(format!("l = {l} exceeds n = {n}")));
        }
        for f in constraints.iter().chain(std::iter::once(&target)) {
            if f.nvars() != n {
                return Err(Error::DimensionMismatch { expected: n, got: f.nvars() });
            }
        }
        if target.is_zero() {
            return Err(Error::InvalidSystem("target must not be the zero polynomial".into()));
        }
        Ok(PolySystem { p, n, constraints, target, resolution_data: None })
    }

    /// Parses constraint and target texts in `n` variables.
    pub fn parse(p: u64, n: usize, constraints: &[&str], target: &str) -> Result<Self> {
        let cs = constraints.iter().map(|c| MPoly::parse(c, n)).collect::<Result<Vec<_>>>()?;
        PolySystem::new(p, n, cs, MPoly::parse(target, n)?)
    }

    pub fn with_resolution_data(mut self, data: Vec<NumericalDatum>) -> Result<Self> {
        if data.iter().any(|d| d.n == 0 || d.v == 0) {
            return Err(Error::InvalidSystem("numerical data must be positive".into()));
        }
        self.resolution_data = Some(data);
        Ok(self)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `l`: number of constraints plus one.
    pub fn l(&self) -> usize {
        self.constraints.len() + 1
    }

    /// Dimension `n - l + 1` of the submanifold.
    pub fn dim(&self) -> usize {
        self.n - self.constraints.len()
    }

    pub fn constraints(&self) -> &[MPoly] {
        &self.constraints
    }

    pub fn target(&self) -> &MPoly {
        &self.target
    }

    pub fn resolution_data(&self) -> Option<&[NumericalDatum]> {
        self.resolution_data.as_deref()
    }

    /// Same constraints, different target.
    pub fn with_target(&self, target: MPoly) -> Result<Self> {
        let mut s = PolySystem::new(self.p, self.n, self.constraints.clone(), target)?;
        s.resolution_data = self.resolution_data.clone();
        Ok(s)
    }

    /// Formal partial derivatives of the selected polynomials (indices
    /// `0..l-1` are the constraints, `l-1` is the target) at `point`.
    pub fn jacobian(&self, point: &[PAdicApprox], rows: &[usize]) -> Result<Vec<Vec<PAdicApprox>>> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: point.len() });
        }
        rows.iter()
            .map(|&i| {
                let f = self.poly(i)?;
                (0..self.n).map(|j| f.derivative(j).evaluate_mod(point)).collect()
            })
            .collect()
    }

    /// Polynomial `i` of `f_1, ..., f_l` (zero-based).
    pub fn poly(&self, i: usize) -> Result<&MPoly> {
        if i < self.constraints.len() {
            Ok(&self.constraints[i])
        } else if i == self.constraints.len() {
            Ok(&self.target)
        } else {
            Err(Error::InvalidArgument(format!("no polynomial with index {i}")))
        }
    }

    /// `rho = min v_i / N_i` from user-supplied numerical data.
    pub fn rho_from_data(&self) -> Option<(u32, u32)> {
        let data = self.resolution_data.as_ref()?;
        data.iter()
            .map(|d| (d.v, d.n))
            .min_by(|a, b| (a.0 as u64 * b.1 as u64).cmp(&(b.0 as u64 * a.1 as u64)))
    }
}

/// A cap on the number of enumeration nodes a computation may visit.
#[derive(Debug)]
pub struct Budget {
    limit: u64,
    used: AtomicU64,
}

impl Budget {
    pub const DEFAULT: u64 = 10_000_000;

    pub fn new(limit: u64) -> Self {
        Budget { limit, used: AtomicU64::new(0) }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn used(&self) -> u64 {
        self.used.load(Ordering::Relaxed)
    }

    /// Fails up front when a computation is known to need `needed` units.
    pub fn require(&self, needed: u128) -> Result<()> {
        if needed > self.limit as u128 {
            return Err(Error::BudgetExceeded { needed, budget: self.limit as u128 });
        }
        Ok(())
    }

    /// Charges `k` units against the running total.
    pub fn charge(&self, k: u64) -> Result<()> {
        let used = self.used.fetch_add(k, Ordering::Relaxed) + k;
        if used > self.limit {
            return Err(Error::BudgetExceeded { needed: used as u128, budget: self.limit as u128 });
        }
        Ok(())
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(Budget::DEFAULT)
    }
}

impl Clone for Budget {
    /// A fresh budget with the same limit.
    fn clone(&self) -> Self {
        Budget::new(self.limit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PolySystem::parse(3, 2, &["x1"], "x2^2").is_ok());
        assert_eq!(PolySystem::parse(4, 2, &["x1"], "x2").unwrap_err(), Error::NotPrime(4));
        assert!(PolySystem::parse(3, 2, &[], "x2").is_err());
        assert!(PolySystem::parse(3, 2, &["x1", "x2"], "x1").is_err());
        assert!(PolySystem::parse(3, 2, &["x1"], "x2 - x2").is_err());
    }

    #[test]
    fn rho_from_data() {
        let s = PolySystem::parse(3, 2, &["x1"], "x2^2")
            .unwrap()
            .with_resolution_data(vec![NumericalDatum { n: 2, v: 1 }, NumericalDatum { n: 1, v: 1 }])
            .unwrap();
        assert_eq!(s.rho_from_data(), Some((1, 2)));
    }

    #[test]
    fn jacobian_examples() {
        let pt = |a: u32, b: u32| [PAdicApprox::new(3, a, 3), PAdicApprox::new(3, b, 3)];
        let s = PolySystem::parse(3, 2, &["x1"], "x2^2").unwrap();
        let j = s.jacobian(&pt(4, 3), &[0, 1]).unwrap();
        assert_eq!(j[0], vec![PAdicApprox::new(3, 1u32, 3), PAdicApprox::new(3, 0u32, 3)]);
        assert_eq!(j[1][1], PAdicApprox::new(3, 6u32, 3));
        let s = PolySystem::parse(3, 2, &["3*x1 - 9*x2"], "x2").unwrap();
        let j = s.jacobian(&pt(1, 1), &[0]).unwrap();
        assert_eq!(j[0], vec![PAdicApprox::new(3, 3u32, 3), PAdicApprox::from_i64(3, -9, 3)]);
        assert!(s.jacobian(&pt(1, 1)[..1], &[0]).is_err());
    }

    #[test]
    fn budget_trips() {
        let b = Budget::new(10);
        assert!(b.charge(6).is_ok());
        assert!(matches!(b.charge(6), Err(Error::BudgetExceeded { .. })));
        assert!(b.require(11).is_err());
    }
}
