//! Points of `V = {f_1 = ... = f_{l-1} = 0}` modulo `p^m`.
//!
//! [`brute_force_points`] scans the whole grid and is the oracle for every
//! other counting path. Under good reduction, Hensel lifting gives
//! `#V(Z/p^m) = #V(F_p) p^{(m-1)(n-l+1)}` and the congruence solutions are
//! exactly the reductions of `Z_p`-points.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::enumerate::{digit_vectors, grid, Lifter, Step};
use crate::error::{Error, Result};
use crate::modring::{inv_mod, ipow, mul_mod, val_mod};
use crate::mpoly::MPoly;
use crate::smoothing::Atlas;
use crate::system::{Budget, PolySystem};

/// Number of points at level `m`, optionally split by shell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberCount {
    pub m: u32,
    pub count: u128,
    /// `(ord f_l, ac f_l mod p^c) -> count`, for `ord f_l < cutoff`.
    pub by_shell: Option<BTreeMap<(u32, u64), u128>>,
    /// Points with `ord f_l >= cutoff` when `by_shell` is present.
    pub deep: u128,
}

impl FiberCount {
    fn plain(m: u32, count: u128) -> Self {
        FiberCount { m, count, by_shell: None, deep: 0 }
    }
}

/// Outcome of the good reduction test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reduction {
    Good,
    /// A point of `V(F_p)` where the constraint Jacobian drops rank.
    Bad(Vec<u64>),
}

impl Reduction {
    pub fn is_good(&self) -> bool {
        matches!(self, Reduction::Good)
    }
}

fn check_constraints(x: &[u64], cs: &[crate::mpoly::CompiledPoly], m: u64) -> bool {
    cs.iter().all(|f| f.eval(x) % m == 0)
}

/// Every `x mod p^m` with all constraints `= 0 mod p^m`, by scanning the full
/// grid `(Z/p^m)^n`.
pub fn brute_force_list(p: u64, n: usize, constraints: &[MPoly], m: u32, budget: &Budget) -> Result<Vec<Vec<u64>>> {
    let size = (p as u128).checked_pow(m * n as u32).unwrap_or(u128::MAX);
    budget.require(size)?;
    let modulus = ipow(p, m);
    let cs: Vec<_> = constraints.iter().map(|f| f.compile(modulus)).collect();
    Ok(grid(p, n, m).filter(|x| check_constraints(x, &cs, modulus)).collect())
}

pub fn brute_force_points(system: &PolySystem, m: u32, budget: &Budget) -> Result<FiberCount> {
    let size = (system.p() as u128).checked_pow(m * system.n() as u32).unwrap_or(u128::MAX);
    budget.require(size)?;
    let modulus = ipow(system.p(), m);
    let cs: Vec<_> = system.constraints().iter().map(|f| f.compile(modulus)).collect();
    let count = grid(system.p(), system.n(), m).filter(|x| check_constraints(x, &cs, modulus)).count();
    Ok(FiberCount::plain(m, count as u128))
}

/// Rank of an integer matrix reduced modulo a prime.
pub fn rank_mod_p(rows: &[Vec<u64>], p: u64) -> usize {
    let mut a: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let ncols = a.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..ncols {
        let Some(piv) = (rank..a.len()).find(|&i| a[i][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = inv_mod(a[rank][col], p).unwrap();
        for i in 0..a.len() {
            if i != rank && a[i][col] != 0 {
                let factor = mul_mod(a[i][col], inv, p);
                for j in 0..ncols {
                    let sub = mul_mod(factor, a[rank][j], p);
                    a[i][j] = (a[i][j] + p - sub) % p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Good reduction of `{constraints = 0}`: full rank of the Jacobian mod `p` at
/// every point of `V(F_p)`.
pub fn good_reduction_of(p: u64, n: usize, constraints: &[MPoly], budget: &Budget) -> Result<Reduction> {
    budget.require((p as u128).pow(n as u32))?;
    let cs: Vec<_> = constraints.iter().map(|f| f.compile(p)).collect();
    let jac: Vec<Vec<_>> = constraints
        .iter()
        .map(|f| (0..n).map(|j| f.derivative(j).compile(p)).collect())
        .collect();
    for x in digit_vectors(p, n) {
        if !check_constraints(&x, &cs, p) {
            continue;
        }
        let rows: Vec<Vec<u64>> = jac.iter().map(|r| r.iter().map(|d| d.eval(&x)).collect()).collect();
        if rank_mod_p(&rows, p) < constraints.len() {
            return Ok(Reduction::Bad(x));
        }
    }
    Ok(Reduction::Good)
}

pub fn good_reduction_test(system: &PolySystem, budget: &Budget) -> Result<Reduction> {
    good_reduction_of(system.p(), system.n(), system.constraints(), budget)
}

fn require_good(system: &PolySystem, budget: &Budget) -> Result<()> {
    match good_reduction_test(system, budget)? {
        Reduction::Good => Ok(()),
        Reduction::Bad(w) => Err(Error::BadReductionInput { witness: w }),
    }
}

/// Counts `V(Z/p^m)` by depth-first Hensel lifting from `V(F_p)`.
pub fn hensel_enumerate(system: &PolySystem, m: u32, budget: &Budget, workers: usize) -> Result<FiberCount> {
    require_good(system, budget)?;
    let count = congruence_count(system.p(), system.n(), system.constraints(), m, budget, workers)?;
    Ok(FiberCount::plain(m, count))
}

/// Streams the level-`m` points in lexicographic lifting order.
pub fn hensel_for_each<F: FnMut(&[u64])>(system: &PolySystem, m: u32, budget: &Budget, f: F) -> Result<()> {
    require_good(system, budget)?;
    Lifter::new(system.p(), system.n(), system.constraints(), m, budget).for_each_leaf(f)
}

/// Number of congruence solutions modulo `p^m` (no reduction hypothesis).
pub fn congruence_count(p: u64, n: usize, constraints: &[MPoly], m: u32, budget: &Budget, workers: usize) -> Result<u128> {
    if m == 0 {
        return Ok(1);
    }
    let parts = Lifter::new(p, n, constraints, m, budget).workers(workers).run(
        || 0u128,
        |acc, k, _| {
            if k == m {
                *acc += 1;
            }
            Step::Descend
        },
    )?;
    Ok(parts.into_iter().sum())
}

/// Congruence solutions modulo `p^m`, in lifting order.
pub fn congruence_points(p: u64, n: usize, constraints: &[MPoly], m: u32, budget: &Budget) -> Result<Vec<Vec<u64>>> {
    let mut out = Vec::new();
    Lifter::new(p, n, constraints, m, budget).for_each_leaf(|x| out.push(x.to_vec()))?;
    Ok(out)
}

/// Level-`m` points split by `(ord f_l, ac f_l mod p^c)` for `ord f_l < cutoff`.
pub fn hensel_shells(system: &PolySystem, m: u32, c: u32, cutoff: u32, budget: &Budget) -> Result<FiberCount> {
    if cutoff + c > m + 1 {
        return Err(Error::InvalidArgument(format!(
            "shells below {cutoff} with ac mod p^{c} need level >= {}",
            cutoff + c - 1
        )));
    }
    require_good(system, budget)?;
    let p = system.p();
    let modulus = ipow(p, m);
    let pc = ipow(p, c);
    let target = system.target().compile(modulus);
    let mut shells = BTreeMap::new();
    let mut deep = 0u128;
    let mut total = 0u128;
    Lifter::new(p, system.n(), system.constraints(), m, budget).for_each_leaf(|x| {
        total += 1;
        let v = target.eval(x);
        let ord = val_mod(v, p, m);
        if ord >= cutoff {
            deep += 1;
        } else {
            let ac = (v / ipow(p, ord)) % pc;
            *shells.entry((ord, ac)).or_insert(0u128) += 1;
        }
    })?;
    Ok(FiberCount { m, count: total, by_shell: Some(shells), deep })
}

/// Oracle for `V(Z_p) mod p^m`: congruence solutions at level `m + buffer`
/// projected to level `m`.
pub fn image_oracle(p: u64, n: usize, constraints: &[MPoly], m: u32, buffer: u32, budget: &Budget) -> Result<BTreeSet<Vec<u64>>> {
    let pm = ipow(p, m);
    let mut out = BTreeSet::new();
    Lifter::new(p, n, constraints, m + buffer, budget)
        .for_each_leaf(|x| {
            out.insert(x.iter().map(|a| a % pm).collect());
        })?;
    Ok(out)
}

/// Result of the projection oracle, with its stabilization check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageOracle {
    pub count: u128,
    pub buffer: u32,
    /// Whether buffers `B` and `B + 1` gave the same image.
    pub stable: bool,
}

pub fn image_count_oracle(system: &PolySystem, m: u32, buffer: u32, budget: &Budget) -> Result<ImageOracle> {
    let (p, n, cs) = (system.p(), system.n(), system.constraints());
    let a = image_oracle(p, n, cs, m, buffer, budget)?;
    let b = image_oracle(p, n, cs, m, buffer + 1, budget)?;
    Ok(ImageOracle { count: a.len() as u128, buffer, stable: a == b })
}

/// `#(V(Z_p) mod p^m)`. Good reduction: the congruence count. Otherwise the
/// smoothing decomposition: for `m > L` the sum of chart counts at level
/// `m - L`, for `m <= L` the distinct reductions of the centers.
pub fn reduction_image_count(system: &PolySystem, m: u32, budget: &Budget) -> Result<u128> {
    let atlas = Atlas::for_system(system, budget)?;
    atlas.image_count(m, budget)
}

/// Residues `x mod p^level` where the constraints vanish, every `l x l` minor
/// of the full Jacobian vanishes, and `ord f_l(x) < level`. An empty report is
/// evidence, not proof, that the critical locus lies in `f_l^{-1}(0)`.
pub fn critical_locus_probe(system: &PolySystem, level: u32, budget: &Budget) -> Result<Vec<Vec<u64>>> {
    let (p, n, l) = (system.p(), system.n(), system.l());
    let modulus = ipow(p, level);
    let polys: Vec<&MPoly> = (0..l).map(|i| system.poly(i).unwrap()).collect();
    let jac: Vec<Vec<_>> = polys
        .iter()
        .map(|f| (0..n).map(|j| f.derivative(j).compile(modulus)).collect())
        .collect();
    let target = system.target().compile(modulus);
    let subsets = column_subsets(n, l);
    let mut out = Vec::new();
    Lifter::new(p, n, system.constraints(), level, budget).for_each_leaf(|x| {
        if val_mod(target.eval(x), p, level) >= level {
            return;
        }
        let rows: Vec<Vec<BigInt>> =
            jac.iter().map(|r| r.iter().map(|d| BigInt::from(d.eval(x))).collect()).collect();
        let m = BigInt::from(modulus);
        let all_vanish = subsets.iter().all(|cols| {
            let minor: Vec<Vec<BigInt>> = rows.iter().map(|r| cols.iter().map(|&j| r[j].clone()).collect()).collect();
            (determinant(&minor) % &m).is_zero()
        });
        if all_vanish {
            out.push(x.to_vec());
        }
    })?;
    Ok(out)
}

fn column_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Determinant by cofactor expansion; matrices here are at most a few rows.
pub fn determinant(a: &[Vec<BigInt>]) -> BigInt {
    match a.len() {
        0 => BigInt::from(1),
        1 => a[0][0].clone(),
        2 => &a[0][0] * &a[1][1] - &a[0][1] * &a[1][0],
        k => {
            let mut acc = BigInt::zero();
            for j in 0..k {
                if a[0][j].is_zero() {
                    continue;
                }
                let sub: Vec<Vec<BigInt>> = a[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &a[0][j] * determinant(&sub);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

/// CSV rows `level,x1,...,xn`.
pub fn points_csv(n: usize, level: u32, points: &[Vec<u64>]) -> String {
    let mut s = String::from("level");
    for j in 1..=n {
        s.push_str(&format!(",x{j}"));
    }
    s.push('\n');
    for x in points {
        s.push_str(&level.to_string());
        for a in x {
            s.push(',');
            s.push_str(&a.to_string());
        }
        s.push('\n');
    }
    s
}

/// `#V(F_p)`.
pub fn fp_point_count(system: &PolySystem, budget: &Budget) -> Result<u128> {
    congruence_count(system.p(), system.n(), system.constraints(), 1, budget, 1)
}
