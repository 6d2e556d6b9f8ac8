//! Rescaled charts around points of `V` and the global decomposition.
//!
//! Near a point `x0` the constraint Jacobian is brought to echelon form over
//! `Z_p`; with `L = ord(b_{l-1,l-1}) + 1` the rescaled constraints
//! `p^{-e_i} f_{i,x0}(x0 + p^L y)` have good reduction, so every computation
//! on `V` can be done chart by chart with Hensel lifting. A chart carries the
//! weight `p^{sum e_i - L n}` of the Gelfand-Leray measure.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modring::ipow;
use crate::mpoly::{valuation_bigint, MPoly};
use crate::system::{Budget, PolySystem};
use crate::variety::{congruence_count, congruence_points, good_reduction_of, Reduction};

/// Largest level tried by [`global_decompose`].
pub const MAX_DECOMPOSITION_LEVEL: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowOp {
    Swap(usize, usize),
    /// `row[target] <- u * row[target] - w * row[source]`.
    Combine { target: usize, source: usize, u: BigInt, w: BigInt },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EchelonResult {
    /// Upper triangular rows, columns in `col_perm` order.
    pub b: Vec<Vec<BigInt>>,
    /// `col_perm[j]` is the original column placed at position `j`.
    pub col_perm: Vec<usize>,
    /// `U` with `U A = b` up to the column permutation; `det U` is a unit.
    pub transform: Vec<Vec<BigInt>>,
    pub pivot_vals: Vec<u32>,
    pub row_ops: Vec<RowOp>,
}

impl EchelonResult {
    /// `ord(b_{r,r}) + 1` for the last pivot.
    pub fn lemma_level(&self) -> u32 {
        self.pivot_vals.last().map_or(1, |v| v + 1)
    }
}

/// Echelon form of an integer matrix over `Z_p`: at each step the entry of
/// least valuation in the remaining block is moved to the pivot (ties: lowest
/// row, then lowest column) and the rows below are cleared with unit
/// multiples of themselves.
pub fn dvr_echelon(a: &[Vec<BigInt>], p: u64) -> Result<EchelonResult> {
    let r = a.len();
    let n = a.first().map_or(0, |row| row.len());
    let pb = BigInt::from(p);
    let mut b: Vec<Vec<BigInt>> = a.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut u_mat: Vec<Vec<BigInt>> = (0..r)
        .map(|i| (0..r).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut ops = Vec::new();
    let mut vals = Vec::new();
    for s in 0..r {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in s..r {
            for j in s..n {
                if b[i][j].is_zero() {
                    continue;
                }
                let v = valuation_bigint(&b[i][j], &pb);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((v, i, j)) = best else {
            return Err(Error::RankDeficient { rank: s, expected: r });
        };
        if i != s {
            b.swap(i, s);
            u_mat.swap(i, s);
            ops.push(RowOp::Swap(s, i));
        }
        if j != s {
            for row in b.iter_mut() {
                row.swap(j, s);
            }
            perm.swap(j, s);
        }
        let pv = pb.pow(v);
        let u = &b[s][s] / &pv;
        for k in s + 1..r {
            if b[k][s].is_zero() {
                continue;
            }
            let w = &b[k][s] / &pv;
            for c in 0..n {
                b[k][c] = &u * &b[k][c] - &w * &b[s][c];
            }
            for c in 0..r {
                u_mat[k][c] = &u * &u_mat[k][c] - &w * &u_mat[s][c];
            }
            ops.push(RowOp::Combine { target: k, source: s, u: u.clone(), w });
        }
        vals.push(v);
    }
    Ok(EchelonResult { b, col_perm: perm, transform: u_mat, pivot_vals: vals, row_ops: ops })
}

/// Integer Jacobian of the constraints at an integer point.
pub fn constraint_jacobian(system: &PolySystem, x0: &[BigInt]) -> Result<Vec<Vec<BigInt>>> {
    system
        .constraints()
        .iter()
        .map(|f| (0..system.n()).map(|j| f.derivative(j).eval_int(x0)).collect())
        .collect()
}

/// A good-reduction chart `x = x0 + p^L y` of `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub p: u64,
    pub n: usize,
    pub center: Vec<u64>,
    pub level: u32,
    /// Rescaled constraints in `y`.
    pub constraints: Vec<MPoly>,
    pub exponents: Vec<u32>,
    /// `f_l(x0 + p^L y)`, not rescaled.
    pub target: MPoly,
}

impl Chart {
    /// The whole space, for systems with good reduction.
    pub fn identity(system: &PolySystem) -> Chart {
        Chart {
            p: system.p(),
            n: system.n(),
            center: vec![0; system.n()],
            level: 0,
            constraints: system.constraints().to_vec(),
            exponents: vec![0; system.l() - 1],
            target: system.target().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n - self.constraints.len()
    }

    /// Exponent `sum e_i - L n` of the chart weight.
    pub fn weight_exp(&self) -> i64 {
        self.exponents.iter().map(|&e| e as i64).sum::<i64>() - self.level as i64 * self.n as i64
    }

    /// `x0 + p^L y mod p^m`.
    pub fn to_ambient(&self, y: &[u64], m: u32) -> Vec<u64> {
        let pm = ipow(self.p, m) as u128;
        let pl = ipow(self.p, self.level) as u128;
        self.center
            .iter()
            .zip(y)
            .map(|(&c, &t)| ((c as u128 + pl * t as u128) % pm) as u64)
            .collect()
    }

    pub fn center_mod(&self, m: u32) -> Vec<u64> {
        let pm = ipow(self.p, m);
        self.center.iter().map(|c| c % pm).collect()
    }

    /// `#V_chart(Z/p^k)`.
    pub fn count(&self, k: u32, budget: &Budget) -> Result<u128> {
        congruence_count(self.p, self.n, &self.constraints, k, budget, 1)
    }
}

/// The charts covering `V(Z_p)`, all at a common level.
#[derive(Debug, Clone, PartialEq)]
pub struct Atlas {
    pub p: u64,
    pub n: usize,
    pub dim: usize,
    pub level: u32,
    pub good: bool,
    pub charts: Vec<Chart>,
}

impl Atlas {
    /// One identity chart under good reduction, otherwise [`global_decompose`].
    pub fn for_system(system: &PolySystem, budget: &Budget) -> Result<Atlas> {
        match good_reduction_of(system.p(), system.n(), system.constraints(), budget)? {
            Reduction::Good => Ok(Atlas {
                p: system.p(),
                n: system.n(),
                dim: system.dim(),
                level: 0,
                good: true,
                charts: vec![Chart::identity(system)],
            }),
            Reduction::Bad(_) => {
                let d = global_decompose(system, budget)?;
                Ok(Atlas { p: system.p(), n: system.n(), dim: system.dim(), level: d.level, good: false, charts: d.charts })
            }
        }
    }

    /// `#(V(Z_p) mod p^m)`.
    pub fn image_count(&self, m: u32, budget: &Budget) -> Result<u128> {
        if m <= self.level {
            return Ok(self.center_reductions(m).len() as u128);
        }
        let mut total = 0;
        for c in &self.charts {
            total += c.count(m - self.level, budget)?;
        }
        Ok(total)
    }

    /// The residues of `V(Z_p) mod p^m`, chart by chart.
    pub fn image_points(&self, m: u32, budget: &Budget) -> Result<Vec<Vec<u64>>> {
        if m <= self.level {
            return Ok(self.center_reductions(m).into_iter().collect());
        }
        let mut out = Vec::new();
        for c in &self.charts {
            for y in congruence_points(self.p, self.n, &c.constraints, m - self.level, budget)? {
                out.push(c.to_ambient(&y, m));
            }
        }
        Ok(out)
    }

    fn center_reductions(&self, m: u32) -> BTreeSet<Vec<u64>> {
        self.charts.iter().map(|c| c.center_mod(m)).collect()
    }
}

/// Verdict and data of one rescaling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmoothingCertificate {
    pub p: u64,
    pub center: Vec<u64>,
    pub level: u32,
    pub lemma_level: u32,
    pub pivot_vals: Vec<u32>,
    pub exponents: Vec<u32>,
    pub rescaled_constraints: Vec<String>,
    pub good_reduction: bool,
    pub witness: Option<Vec<u64>>,
}

/// Rescales at the level given by the echelon form of the Jacobian at `x0`.
pub fn neron_rescale(system: &PolySystem, x0: &[u64], budget: &Budget) -> Result<(SmoothingCertificate, Chart)> {
    let x: Vec<BigInt> = x0.iter().map(|&a| BigInt::from(a)).collect();
    let ech = dvr_echelon(&constraint_jacobian(system, &x)?, system.p())?;
    rescale_with(system, x0, &ech, ech.lemma_level(), budget)
}

/// Rescales at a given level, which must be at least the lemma level.
pub fn neron_rescale_at(system: &PolySystem, x0: &[u64], level: u32, budget: &Budget) -> Result<(SmoothingCertificate, Chart)> {
    let x: Vec<BigInt> = x0.iter().map(|&a| BigInt::from(a)).collect();
    let ech = dvr_echelon(&constraint_jacobian(system, &x)?, system.p())?;
    if level < ech.lemma_level() {
        return Err(Error::InvalidArgument(format!(
            "level {level} is below the lemma level {}",
            ech.lemma_level()
        )));
    }
    rescale_with(system, x0, &ech, level, budget)
}

fn rescale_with(
    system: &PolySystem,
    x0: &[u64],
    ech: &EchelonResult,
    level: u32,
    budget: &Budget,
) -> Result<(SmoothingCertificate, Chart)> {
    let p = system.p();
    let pb = BigInt::from(p);
    let x: Vec<BigInt> = x0.iter().map(|&a| BigInt::from(a)).collect();
    let needed = level + ech.lemma_level() + 1;
    for f in system.constraints() {
        let v = f.eval_int(&x)?;
        if !v.is_zero() && valuation_bigint(&v, &pb) < needed {
            return Err(Error::CenterNotOnVariety(format!(
                "{f} has valuation {} at {x0:?}, need {needed}",
                valuation_bigint(&v, &pb)
            )));
        }
    }
    let combined: Vec<MPoly> = ech
        .transform
        .iter()
        .map(|row| {
            row.iter()
                .zip(system.constraints())
                .filter(|(c, _)| !c.is_zero())
                .fold(MPoly::zero(system.n()), |acc, (c, f)| acc.add(&f.scale(c)))
        })
        .collect();
    let mut exps = Vec::new();
    let mut rescaled = Vec::new();
    for f in &combined {
        let (e, g) = f.shift_rescale(&x, level, p)?;
        exps.push(e);
        rescaled.push(g);
    }
    let verdict = good_reduction_of(p, system.n(), &rescaled, budget)?;
    let target = system.target().affine_substitute(&x, &pb.pow(level))?;
    let cert = SmoothingCertificate {
        p,
        center: x0.to_vec(),
        level,
        lemma_level: ech.lemma_level(),
        pivot_vals: ech.pivot_vals.clone(),
        exponents: exps.clone(),
        rescaled_constraints: rescaled.iter().map(|g| g.to_string()).collect(),
        good_reduction: verdict.is_good(),
        witness: match &verdict {
            Reduction::Good => None,
            Reduction::Bad(w) => Some(w.clone()),
        },
    };
    let chart = Chart { p, n: system.n(), center: x0.to_vec(), level, constraints: rescaled, exponents: exps, target };
    Ok((cert, chart))
}

/// Charts at a common level `L` whose images partition `V(Z_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub level: u32,
    pub charts: Vec<Chart>,
    pub certificates: Vec<SmoothingCertificate>,
}

/// Finds the least level `k` at which every class of `V(Z_p) mod p^k` has a
/// good-reduction chart, with one center per class.
pub fn global_decompose(system: &PolySystem, budget: &Budget) -> Result<Decomposition> {
    'levels: for k in 1..=MAX_DECOMPOSITION_LEVEL {
        let reps = class_representatives(system, k, 2 * k + 2, budget)?;
        let mut charts = Vec::new();
        let mut certs = Vec::new();
        for x0 in &reps {
            let x: Vec<BigInt> = x0.iter().map(|&a| BigInt::from(a)).collect();
            let ech = match dvr_echelon(&constraint_jacobian(system, &x)?, system.p()) {
                Ok(e) => e,
                Err(Error::RankDeficient { .. }) => continue 'levels,
                Err(e) => return Err(e),
            };
            if ech.lemma_level() > k {
                continue 'levels;
            }
            let (cert, chart) = rescale_with(system, x0, &ech, k, budget)?;
            if !cert.good_reduction {
                continue 'levels;
            }
            if chart.count(1, budget)? == 0 {
                continue;
            }
            charts.push(chart);
            certs.push(cert);
        }
        return Ok(Decomposition { level: k, charts, certificates: certs });
    }
    Err(Error::GoodReductionFailed(format!(
        "no good-reduction decomposition up to level {MAX_DECOMPOSITION_LEVEL}"
    )))
}

/// For each class mod `p^k` of congruence solutions that lifts to a solution
/// mod `p^depth`, the first such lift.
fn class_representatives(system: &PolySystem, k: u32, depth: u32, budget: &Budget) -> Result<Vec<Vec<u64>>> {
    let p = system.p();
    let n = system.n();
    let modulus = ipow(p, depth);
    let cs: Vec<_> = system.constraints().iter().map(|f| f.compile(modulus)).collect();
    let classes = congruence_points(p, n, system.constraints(), k, budget)?;
    let mut reps = Vec::new();
    for c in classes {
        let mut point = c.clone();
        if first_lift(p, n, &cs, &mut point, k, depth, budget)? {
            reps.push(point);
        }
    }
    Ok(reps)
}

fn first_lift(
    p: u64,
    n: usize,
    cs: &[crate::mpoly::CompiledPoly],
    point: &mut Vec<u64>,
    k: u32,
    depth: u32,
    budget: &Budget,
) -> Result<bool> {
    if k == depth {
        return Ok(true);
    }
    budget.charge(ipow(p, n as u32))?;
    let pk = ipow(p, k);
    let next = ipow(p, k + 1);
    let base = point.clone();
    for digits in crate::enumerate::digit_vectors(p, n) {
        for j in 0..n {
            point[j] = base[j] + pk * digits[j];
        }
        if cs.iter().all(|f| f.eval(point) % next == 0) && first_lift(p, n, cs, point, k + 1, depth, budget)? {
            return Ok(true);
        }
    }
    point.copy_from_slice(&base);
    Ok(false)
}

/// Reduces an integer to its least nonnegative residue mod `p^k`.
pub fn residue(a: &BigInt, p: u64, k: u32) -> u64 {
    let m = BigInt::from(ipow(p, k));
    let r = a.mod_floor(&m);
    debug_assert!(!r.is_negative());
    r.try_into().unwrap()
}
