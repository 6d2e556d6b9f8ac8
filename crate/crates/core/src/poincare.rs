//! The counts `N_m = #{x in V(Z_p) mod p^m : f_l(x) = 0 mod p^m}` (with
//! `N_0 = 1`) and the Poincare series `P(t) = sum_m p^{-md} N_m t^m`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::enumerate::{Lifter, Step};
use crate::error::{Error, Result};
use crate::modring::{checked_pow, ipow};
use crate::mpoly::MPoly;
use crate::ratfn::{reconstruct_rational, QPoly, RationalFn};
use crate::smoothing::{Atlas, Chart};
use crate::system::{Budget, PolySystem};
use crate::variety::image_oracle;
use crate::zeta::p_power;

/// `#{y mod p^k on the chart : g(y) = 0 mod p^modexp}` with pruning on the
/// partial residues, where `g` is the chart target.
fn chart_zero_count(chart: &Chart, g: &MPoly, k: u32, modexp: u32, budget: &Budget, workers: usize) -> Result<u128> {
    if k == 0 {
        return Ok(1);
    }
    let p = chart.p;
    let mm = checked_pow(p, modexp)?;
    let gc = g.compile(mm);
    let shift = chart.level;
    let parts = Lifter::new(p, chart.n, &chart.constraints, k, budget).workers(workers).run(
        || 0u128,
        |acc, lvl, y| {
            // g(y) mod p^{lvl + L} is already determined by y mod p^lvl
            let known = ipow(p, (lvl + shift).min(modexp));
            if !gc.eval(y).is_multiple_of(known) {
                return Step::Prune;
            }
            if lvl == k {
                *acc += 1;
            }
            Step::Descend
        },
    )?;
    Ok(parts.into_iter().sum())
}

/// `N_m` over the reduction image of `V`.
pub fn count_nm(system: &PolySystem, m: u32, budget: &Budget, workers: usize) -> Result<u128> {
    let atlas = Atlas::for_system(system, budget)?;
    count_nm_on(&atlas, system, m, budget, workers)
}

pub fn count_nm_on(atlas: &Atlas, system: &PolySystem, m: u32, budget: &Budget, workers: usize) -> Result<u128> {
    if m == 0 {
        return Ok(1);
    }
    if m <= atlas.level {
        let f = system.target().compile(ipow(system.p(), m));
        return Ok(atlas.image_points(m, budget)?.iter().filter(|x| f.eval(x) == 0).count() as u128);
    }
    let mut total = 0;
    for chart in &atlas.charts {
        total += chart_zero_count(chart, &chart.target, m - atlas.level, m, budget, workers)?;
    }
    Ok(total)
}

/// Number of solutions of `f_1 = ... = f_l = 0 mod p^m`, without passing to
/// the image of `V(Z_p)`. Agrees with [`count_nm`] under good reduction.
pub fn congruence_nm(system: &PolySystem, m: u32, budget: &Budget) -> Result<u128> {
    if m == 0 {
        return Ok(1);
    }
    let mut eqs = system.constraints().to_vec();
    eqs.push(system.target().clone());
    let parts = Lifter::new(system.p(), system.n(), &eqs, m, budget).run(
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

/// `N_0, ..., N_M`, their scaled values and the reconstructed `P(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountSeries {
    pub p: u64,
    pub dim: usize,
    pub nm: Vec<u128>,
    pub scaled: Vec<BigRational>,
    pub reconstructed: Option<RationalFn>,
    /// Why reconstruction failed, when it did.
    pub failure: Option<Error>,
}

impl CountSeries {
    pub fn from_counts(p: u64, dim: usize, nm: Vec<u128>) -> Self {
        let scaled = nm
            .iter()
            .enumerate()
            .map(|(m, &n)| BigRational::from_integer(BigInt::from(n)) * p_power(p, -((m * dim) as i64)))
            .collect();
        CountSeries { p, dim, nm, scaled, reconstructed: None, failure: None }
    }

    /// Fits `P(t)` holding out the last `holdout` coefficients.
    pub fn reconstruct(mut self, holdout: usize) -> Self {
        match reconstruct_rational(&self.scaled, holdout) {
            Ok(rf) => self.reconstructed = Some(rf),
            Err(e) => self.failure = Some(e),
        }
        self
    }

    /// `m,N_m,scaled_num,scaled_den`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,N_m,scaled_num,scaled_den\n");
        for (m, (n, q)) in self.nm.iter().zip(&self.scaled).enumerate() {
            s.push_str(&format!("{m},{n},{},{}\n", q.numer(), q.denom()));
        }
        s
    }
}

/// `N_0..=N_M` and `P(t)` reconstructed with two held-out terms.
pub fn poincare_series(system: &PolySystem, max_m: u32, budget: &Budget, workers: usize) -> Result<CountSeries> {
    let atlas = Atlas::for_system(system, budget)?;
    let nm = (0..=max_m)
        .map(|m| count_nm_on(&atlas, system, m, budget, workers))
        .collect::<Result<Vec<_>>>()?;
    Ok(CountSeries::from_counts(system.p(), system.dim(), nm).reconstruct(2))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenefVerdict {
    pub pass: bool,
    /// Coefficients of `P_num (1 - t) Z_den + t Z_num P_den - P_den Z_den`.
    pub residual: Vec<String>,
}

/// Tests `P(t)(1 - t) + t Z(t) = 1` exactly.
pub fn denef_identity_check(poincare: &RationalFn, zeta: &RationalFn) -> DenefVerdict {
    let one_minus_t = QPoly::from_ints(&[1, -1]);
    let t = QPoly::from_ints(&[0, 1]);
    let lhs = poincare.num.mul(&one_minus_t).mul(&zeta.den).add(&t.mul(&zeta.num).mul(&poincare.den));
    let residual = lhs.sub(&poincare.den.mul(&zeta.den));
    DenefVerdict { pass: residual.is_zero(), residual: residual.coeffs().iter().map(|c| c.to_string()).collect() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    /// `max_m N_m / (p^{(d - rho) m} m^{mult - 1})` over `m >= 1`.
    pub constant: f64,
    pub argmax: u32,
    pub bounded: bool,
}

/// The bound `N_m <= C p^{(d - rho) m} m^{mult - 1}` over the computed range;
/// bounded when the largest ratio occurs in the lower half.
pub fn nm_bound_check(series: &CountSeries, rho: f64, mult: u32) -> BoundCheck {
    let p = series.p as f64;
    let d = series.dim as f64;
    let mut best = (0.0f64, 0u32);
    let top = series.nm.len().saturating_sub(1);
    for (m, &n) in series.nm.iter().enumerate().skip(1) {
        let m_f = m as f64;
        let ratio = n as f64 / (p.powf((d - rho) * m_f) * m_f.powi(mult as i32 - 1));
        if ratio > best.0 * (1.0 + 1e-12) {
            best = (ratio, m as u32);
        }
    }
    BoundCheck { constant: best.0, argmax: best.1, bounded: (best.1 as usize) * 2 <= top.max(1) }
}

/// One center of the chart decomposition of `N_m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenterCount {
    pub center: Vec<u64>,
    /// `g(y) = f_l(x0 + p^L y) = p^e g~(y)`.
    pub e: u32,
    pub count: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lastform2Report {
    pub m: u32,
    pub level: u32,
    /// First level from which per-center solvability of `g~ = 0` is stable.
    pub m0: u32,
    pub centers: Vec<CenterCount>,
    pub decomposed: u128,
    /// `N_m` from the projection oracle.
    pub direct: u128,
}

impl Lastform2Report {
    pub fn holds(&self) -> bool {
        self.decomposed == self.direct
    }
}

/// `N_m` as a sum over chart centers of counts for the rescaled target,
/// against the projection oracle with `buffer` extra levels.
pub fn lastform2(system: &PolySystem, m: u32, buffer: u32, budget: &Budget) -> Result<Lastform2Report> {
    let atlas = Atlas::for_system(system, budget)?;
    if m <= atlas.level {
        return Err(Error::InvalidArgument(format!("level {m} is not above the chart level {}", atlas.level)));
    }
    let p = system.p();
    let k = m - atlas.level;
    let mut centers = Vec::new();
    let mut decomposed = 0;
    for chart in &atlas.charts {
        let (e, reduced) = split_target(chart, p);
        let count = if e >= m {
            chart.count(k, budget)?
        } else {
            // g~(y) mod p^{m-e} is determined by y mod p^{m-e-L+...}; count over y mod p^k
            let shifted = Chart { level: chart.level.saturating_sub(e), ..chart.clone() };
            chart_zero_count(&shifted, &reduced, k, m - e, budget, 1)?
        };
        decomposed += count;
        centers.push(CenterCount { center: chart.center.clone(), e, count });
    }
    let f = system.target().compile(ipow(p, m));
    let direct = image_oracle(p, system.n(), system.constraints(), m, buffer, budget)?
        .iter()
        .filter(|x| f.eval(x) == 0)
        .count() as u128;
    Ok(Lastform2Report { m, level: atlas.level, m0: solvability_threshold(&atlas, budget)?, centers, decomposed, direct })
}

fn split_target(chart: &Chart, p: u64) -> (u32, MPoly) {
    match chart.target.content_valuation(p) {
        Some(e) => (e, chart.target.div_pow(p, e)),
        None => (u32::MAX, chart.target.clone()),
    }
}

/// Smallest `j` such that, for every center, solvability of `g~(y) = 0` on
/// the chart modulo `p^j` and `p^{j+1}` agree.
fn solvability_threshold(atlas: &Atlas, budget: &Budget) -> Result<u32> {
    const LIMIT: u32 = 8;
    let status = |j: u32| -> Result<Vec<bool>> {
        atlas
            .charts
            .iter()
            .map(|c| {
                let (_, g) = split_target(c, atlas.p);
                let flat = Chart { level: 0, ..c.clone() };
                chart_zero_count(&flat, &g, j, j, budget, 1).map(|n| n > 0)
            })
            .collect()
    };
    let mut prev = status(1)?;
    for j in 1..LIMIT {
        let next = status(j + 1)?;
        if next == prev {
            return Ok(j);
        }
        prev = next;
    }
    Ok(LIMIT)
}

/// `N_{m+1} <= p^d N_m` for `m >= 1`.
pub fn monotone_lifts(series: &CountSeries) -> bool {
    let pd = (series.p as u128).pow(series.dim as u32);
    series.nm.windows(2).skip(1).all(|w| w[1] <= pd * w[0])
}

/// Exact `P(t)` value helper: `sum_m scaled_m t^m` through degree `k`.
pub fn truncated(series: &CountSeries, t: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    let mut pw = BigRational::one();
    for c in &series.scaled {
        acc += c * &pw;
        pw *= t;
    }
    acc
}
