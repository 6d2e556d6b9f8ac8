//! Supports `Phi`: indicator functions of finite unions of cosets
//! `x0 + (p^L Z_p)^n`.

use num_rational::BigRational;
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modring::ipow;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Support {
    /// `Z_p^n`.
    #[default]
    UnitPolydisc,
    /// A union of cosets `c + (p^level Z_p)^n`.
    Cosets { level: u32, centers: Vec<Vec<u64>> },
}

impl Support {
    /// Reduces centers modulo `p^level` and removes duplicates.
    pub fn normalized(&self, p: u64, n: usize) -> Result<Support> {
        match self {
            Support::UnitPolydisc => Ok(Support::UnitPolydisc),
            Support::Cosets { level, centers } => {
                let m = ipow(p, *level);
                let mut cs = Vec::with_capacity(centers.len());
                for c in centers {
                    if c.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
                    }
                    cs.push(c.iter().map(|x| x % m).collect::<Vec<_>>());
                }
                cs.sort();
                cs.dedup();
                Ok(Support::Cosets { level: *level, centers: cs })
            }
        }
    }

    pub fn is_polydisc(&self) -> bool {
        matches!(self, Support::UnitPolydisc)
    }

    /// Level needed to decide membership.
    pub fn level(&self) -> u32 {
        match self {
            Support::UnitPolydisc => 0,
            Support::Cosets { level, .. } => *level,
        }
    }

    /// Whether some point of the support reduces to `x` modulo `p^k`.
    /// For `k >= level` this is exact membership.
    pub fn admits(&self, p: u64, x: &[u64], k: u32) -> bool {
        match self {
            Support::UnitPolydisc => true,
            Support::Cosets { level, centers } => {
                let m = ipow(p, k.min(*level));
                centers.iter().any(|c| c.iter().zip(x).all(|(a, b)| a % m == b % m))
            }
        }
    }

    /// Haar measure of the support in `Z_p^n`.
    pub fn measure(&self, p: u64, n: usize) -> BigRational {
        match self {
            Support::UnitPolydisc => BigRational::from_integer(1.into()),
            Support::Cosets { level, centers } => {
                if centers.is_empty() {
                    return BigRational::zero();
                }
                let denom = BigInt::from(p).pow(level * n as u32);
                BigRational::new(BigInt::from(centers.len()), denom)
            }
        }
    }
}
