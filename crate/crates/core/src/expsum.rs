//! Exponential sums `E(u p^{-m}) = p^{-md} sum_{x in V(Z_p) mod p^m} Psi(u f_l(x) / p^m)`
//! by direct summation, and the same values rebuilt from zeta coefficients
//! through the stationary phase formula
//!
//! `E = Z(0, triv) + [t^{m-1}] (t - p) Z(t, triv) / ((p - 1)(1 - t))
//!    + sum_{chi != triv} g_{chi^{-1}} chi(u) [t^{m - c(chi)}] Z(t, chi)`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::characters::MultChar;
use crate::enumerate::{Lifter, Step};
use crate::error::{Error, Result};
use crate::modring::{checked_pow, gcd, ipow};
use crate::padic::{psi_ratio, ScaledUnit};
use crate::smoothing::Atlas;
use crate::support::Support;
use crate::system::{Budget, PolySystem};
use crate::zeta::{all_tables, p_power, volume, CoeffTable, ZetaOptions, ZERO_TOL};

/// Counts of `f_l mod p^m` over the residues of `V(Z_p) mod p^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueHistogram {
    pub p: u64,
    pub m: u32,
    pub dim: usize,
    pub counts: BTreeMap<u64, u128>,
}

impl ValueHistogram {
    pub fn build(atlas: &Atlas, target: &crate::mpoly::MPoly, m: u32, budget: &Budget, workers: usize) -> Result<Self> {
        let pm = checked_pow(atlas.p, m)?;
        let mut counts = BTreeMap::new();
        if m <= atlas.level {
            let f = target.compile(pm);
            for x in atlas.image_points(m, budget)? {
                *counts.entry(f.eval(&x)).or_insert(0) += 1;
            }
        } else {
            for chart in &atlas.charts {
                let g = chart.target.compile(pm);
                let k = m - atlas.level;
                let parts = Lifter::new(atlas.p, atlas.n, &chart.constraints, k, budget).workers(workers).run(
                    BTreeMap::<u64, u128>::new,
                    |acc, lvl, y| {
                        if lvl == k {
                            *acc.entry(g.eval(y)).or_insert(0) += 1;
                        }
                        Step::Descend
                    },
                )?;
                for part in parts {
                    for (a, c) in part {
                        *counts.entry(a).or_insert(0) += c;
                    }
                }
            }
        }
        Ok(ValueHistogram { p: atlas.p, m, dim: atlas.dim, counts })
    }

    pub fn points(&self) -> u128 {
        self.counts.values().sum()
    }

    /// `E(u p^{-m})`, summing in increasing order of the value of `f_l`.
    pub fn sum(&self, u: u64) -> Complex64 {
        let pm = ipow(self.p, self.m);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&a, &c) in &self.counts {
            let ua = ((u % pm) as u128 * a as u128 % pm as u128) as u64;
            acc += psi_ratio(ua, pm) * c as f64;
        }
        acc / (self.p as f64).powi((self.m as usize * self.dim) as i32)
    }
}

/// Direct `E(u p^{-m})` over the reduction image of `V`.
pub fn exponential_sum(system: &PolySystem, m: u32, u: u64, budget: &Budget) -> Result<Complex64> {
    check_unit(system.p(), m, u)?;
    let atlas = Atlas::for_system(system, budget)?;
    Ok(ValueHistogram::build(&atlas, system.target(), m, budget, 1)?.sum(u))
}

fn check_unit(p: u64, m: u32, u: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    if u.is_multiple_of(p) {
        return Err(Error::NonUnitArgument(u));
    }
    Ok(())
}

/// `E_Phi(z) = integral over V of Phi Psi(z f_l)` for the Gelfand-Leray
/// measure, summed chart by chart.
pub fn oscillatory_integral(system: &PolySystem, support: &Support, z: &ScaledUnit, budget: &Budget) -> Result<Complex64> {
    let atlas = Atlas::for_system(system, budget)?;
    oscillatory_on(&atlas, support, z, budget)
}

pub fn oscillatory_on(atlas: &Atlas, support: &Support, z: &ScaledUnit, budget: &Budget) -> Result<Complex64> {
    let p = atlas.p;
    let d = atlas.dim as i64;
    let zm = z.m;
    let pm = ipow(p, zm);
    let u = (&z.u % num_bigint::BigUint::from(pm)).to_u64().unwrap_or(0);
    let mut total = Complex64::new(0.0, 0.0);
    for chart in &atlas.charts {
        let k = zm.max(support.level().saturating_sub(chart.level)).max(1);
        let g = chart.target.compile(ipow(p, k));
        let parts = Lifter::new(p, chart.n, &chart.constraints, k, budget).run(
            BTreeMap::<u64, u128>::new,
            |acc, lvl, y| {
                if !support.is_polydisc()
                    && !support.admits(p, &chart.to_ambient(y, chart.level + lvl), chart.level + lvl)
                {
                    return Step::Prune;
                }
                if lvl == k {
                    *acc.entry(g.eval(y) % pm).or_insert(0) += 1;
                }
                Step::Descend
            },
        )?;
        let mut hist = BTreeMap::new();
        for part in parts {
            for (a, c) in part {
                *hist.entry(a).or_insert(0u128) += c;
            }
        }
        let w = p_power(p, chart.weight_exp() - k as i64 * d).to_f64().unwrap_or(f64::NAN);
        for (a, c) in hist {
            let ua = (u as u128 * a as u128 % pm as u128) as u64;
            total += psi_ratio(ua, pm) * (c as f64 * w);
        }
    }
    Ok(total)
}

/// Hooks that deliberately break the formula, to check that verifiers notice.
#[derive(Debug, Clone, PartialEq)]
pub struct Form1Options {
    /// Multiplies every Gauss sum.
    pub gauss_scale: f64,
    /// Adds a constant to one coefficient of `Z(t, triv)`.
    pub z_shift: Option<(usize, f64)>,
}

impl Default for Form1Options {
    fn default() -> Self {
        Form1Options { gauss_scale: 1.0, z_shift: None }
    }
}

/// Zeta data consumed by [`form1_eval`].
#[derive(Debug, Clone)]
pub struct Form1Data {
    pub p: u64,
    pub volume: BigRational,
    /// `c_0(triv), ..., c_{M-1}(triv)`.
    pub trivial: Vec<BigRational>,
    pub twisted: Vec<(MultChar, Vec<Complex64>)>,
    /// Largest conductor with a nonzero table.
    pub cutoff: u32,
    /// Level of the character group used.
    pub c_cap: u32,
    /// Whether the tables one conductor past the cutoff were found to vanish.
    pub guard_checked: bool,
}

/// Builds tables for all characters up to the empirical conductor cutoff,
/// enough for [`form1_eval`] at every `m <= max_m`.
pub fn form1_data(atlas: &Atlas, max_m: u32, opts: &ZetaOptions, budget: &Budget) -> Result<Form1Data> {
    if max_m == 0 {
        return Err(Error::InvalidArgument("max level must be at least 1".into()));
    }
    // a character of conductor c only enters E at levels m >= c, and a vanishing
    // conductor does not imply that larger ones vanish, so tabulate all of them
    let c_cap = max_m;
    let tables = all_tables(atlas, c_cap, max_m - 1, opts, budget)?;
    let cutoff = tables.iter().filter(|t| !t.is_zero()).map(|t| t.conductor).max().unwrap_or(0);
    let trivial = tables[0].exact().expect("trivial character has exact coefficients");
    let twisted = tables
        .iter()
        .filter(|t| t.index != 0 && t.conductor <= cutoff && !t.is_zero())
        .map(|t: &CoeffTable| {
            let chi = crate::characters::CharacterGroup::new(atlas.p, c_cap).map(|g| g.character(t.index));
            chi.map(|c| (c, t.rows.iter().map(|r| r.value).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Form1Data {
        p: atlas.p,
        volume: volume(atlas, &opts.support, budget)?,
        trivial,
        twisted,
        cutoff,
        c_cap,
        guard_checked: true,
    })
}

/// `E(u p^{-m})` from zeta coefficients.
pub fn form1_eval(data: &Form1Data, m: u32, u: u64, opts: &Form1Options) -> Result<Complex64> {
    check_unit(data.p, m, u)?;
    let mi = m as usize;
    if data.trivial.len() < mi {
        return Err(Error::MissingTable(format!("trivial coefficients up to t^{}", mi - 1)));
    }
    let p = data.p as f64;
    let mut triv: Vec<f64> = data.trivial.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    if let Some((k, delta)) = opts.z_shift {
        if k < triv.len() {
            triv[k] += delta;
        }
    }
    let partial = |k: isize| -> f64 { if k < 0 { 0.0 } else { triv[..=k as usize].iter().sum() } };
    let s1 = partial(mi as isize - 1);
    let s2 = partial(mi as isize - 2);
    let mut total = Complex64::new(data.volume.to_f64().unwrap_or(f64::NAN) + (s2 - p * s1) / (p - 1.0), 0.0);
    for (chi, coeffs) in &data.twisted {
        let c = chi.conductor();
        if c > m {
            continue;
        }
        let k = (m - c) as usize;
        let ck = coeffs
            .get(k)
            .ok_or_else(|| Error::MissingTable(format!("character {} up to t^{k}", chi.index())))?;
        let g = chi.inverse().gauss_sum()? * opts.gauss_scale;
        total += g * chi.value(u)? * ck;
    }
    Ok(total)
}

/// One row of an exponential sum table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumRecord {
    pub m: u32,
    pub u: u64,
    pub direct: Complex64,
    pub via_form1: Option<Complex64>,
    pub normalized: Option<f64>,
}

impl ExpSumRecord {
    pub fn abs_direct(&self) -> f64 {
        self.direct.norm()
    }
}

/// `m,u,re_direct,im_direct,re_form1,im_form1,abs,normalized`.
pub fn records_csv(records: &[ExpSumRecord]) -> String {
    let mut s = String::from("m,u,re_direct,im_direct,re_form1,im_form1,abs,normalized\n");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
    for r in records {
        s.push_str(&format!(
            "{},{},{:.12e},{:.12e},{},{},{:.12e},{}\n",
            r.m,
            r.u,
            r.direct.re,
            r.direct.im,
            opt(r.via_form1.map(|z| z.re)),
            opt(r.via_form1.map(|z| z.im)),
            r.abs_direct(),
            opt(r.normalized),
        ));
    }
    s
}

/// Units modulo `p^k`, in increasing order.
pub fn units(p: u64, k: u32) -> impl Iterator<Item = u64> {
    (1..ipow(p, k)).filter(move |u| gcd(*u, p) == 1)
}

/// Direct sums for every unit `u mod p^m` and `m` in `1..=max_m`.
pub fn expsum_table(system: &PolySystem, max_m: u32, budget: &Budget, workers: usize) -> Result<Vec<ExpSumRecord>> {
    let atlas = Atlas::for_system(system, budget)?;
    let mut out = Vec::new();
    for m in 1..=max_m {
        let h = ValueHistogram::build(&atlas, system.target(), m, budget, workers)?;
        for u in units(system.p(), m) {
            out.push(ExpSumRecord { m, u, direct: h.sum(u), via_form1: None, normalized: None });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct SpsReport {
    pub max_discrepancy: f64,
    pub records: Vec<ExpSumRecord>,
    pub cutoff: u32,
    pub guard_checked: bool,
}

impl SpsReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_discrepancy < tol
    }
}

/// Compares the integral `E_Phi(u p^{-m})` with the formula for `m` in
/// `1..=max_m` and `u` over units mod `p^{min(m, c_cap)}`.
pub fn sps_verify(
    system: &PolySystem,
    max_m: u32,
    zopts: &ZetaOptions,
    fopts: &Form1Options,
    budget: &Budget,
) -> Result<SpsReport> {
    let atlas = Atlas::for_system(system, budget)?;
    let data = form1_data(&atlas, max_m, zopts, budget)?;
    let mut records = Vec::new();
    let mut worst: f64 = 0.0;
    for m in 1..=max_m {
        for u in units(system.p(), m.min(data.c_cap)) {
            let z = ScaledUnit::new(system.p(), u, m)?;
            let direct = oscillatory_on(&atlas, &zopts.support, &z, budget)?;
            let formula = form1_eval(&data, m, u, fopts)?;
            worst = worst.max((direct - formula).norm());
            records.push(ExpSumRecord { m, u, direct, via_form1: Some(formula), normalized: None });
        }
    }
    Ok(SpsReport { max_discrepancy: worst, records, cutoff: data.cutoff, guard_checked: data.guard_checked })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayVerdict {
    Bounded,
    Inconclusive,
}

#[derive(Debug, Clone)]
pub struct DecayReport {
    /// `(m, max_u |E(u p^{-m})|, normalized)`.
    pub rows: Vec<(u32, f64, f64)>,
    pub verdict: DecayVerdict,
}

/// Tabulates `max_u |E| p^{rho m} / m^{mult - 1}` for `m` in `1..=max_m`.
pub fn decay_report(system: &PolySystem, max_m: u32, rho: f64, mult: u32, slack: f64, budget: &Budget) -> Result<DecayReport> {
    let atlas = Atlas::for_system(system, budget)?;
    let p = system.p() as f64;
    let mut rows = Vec::new();
    for m in 1..=max_m {
        let h = ValueHistogram::build(&atlas, system.target(), m, budget, 1)?;
        let e = units(system.p(), m).map(|u| h.sum(u).norm()).fold(0.0, f64::max);
        let norm = e * p.powf(rho * m as f64) / (m as f64).powi(mult as i32 - 1);
        rows.push((m, e, norm));
    }
    let half = rows.len() / 2;
    let running = |r: &[(u32, f64, f64)]| r.iter().map(|x| x.2).fold(0.0, f64::max);
    let (lo, hi) = (running(&rows[..half.max(1)]), running(&rows[half..]));
    let verdict = if hi <= slack * lo || hi < ZERO_TOL { DecayVerdict::Bounded } else { DecayVerdict::Inconclusive };
    Ok(DecayReport { rows, verdict })
}

/// Both sides of the chart decomposition
/// `p^{md} E = sum_{x0} Psi(u f_l(x0)/p^m) sum_y Psi(u (g(y) - g(0))/p^m)`.
pub fn decomposition_identity(system: &PolySystem, m: u32, u: u64, budget: &Budget) -> Result<(Complex64, Complex64)> {
    check_unit(system.p(), m, u)?;
    let atlas = Atlas::for_system(system, budget)?;
    if m <= atlas.level {
        return Err(Error::InvalidArgument(format!("level {m} is not above the chart level {}", atlas.level)));
    }
    let p = system.p();
    let pm = ipow(p, m);
    let h = ValueHistogram::build(&atlas, system.target(), m, budget, 1)?;
    let direct = h.sum(u) * (p as f64).powi((m as usize * atlas.dim) as i32);
    let mut decomposed = Complex64::new(0.0, 0.0);
    for chart in &atlas.charts {
        let g0 = chart.target.constant_term();
        let outer = psi_ratio(crate::smoothing::residue(&(&g0 * u), p, m), pm);
        let shifted = chart.target.sub(&crate::mpoly::MPoly::constant(chart.n, g0.clone())).compile(pm);
        let mut inner = Complex64::new(0.0, 0.0);
        for y in crate::variety::congruence_points(p, chart.n, &chart.constraints, m - atlas.level, budget)? {
            let v = shifted.eval(&y);
            inner += psi_ratio((u as u128 * v as u128 % pm as u128) as u64, pm);
        }
        decomposed += outer * inner;
    }
    Ok((direct, decomposed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(p: u64, n: usize, cs: &[&str], t: &str) -> PolySystem {
        PolySystem::parse(p, n, cs, t).unwrap()
    }

    #[test]
    fn direct_examples() {
        let b = Budget::default();
        assert!(exponential_sum(&sys(3, 2, &["x1"], "x2"), 1, 1, &b).unwrap().norm() < 1e-12);
        let e = exponential_sum(&sys(3, 2, &["x1"], "x2^2"), 1, 1, &b).unwrap();
        assert!((e - Complex64::new(0.0, 1.0 / 3f64.sqrt())).norm() < 1e-12);
        let e = exponential_sum(&sys(3, 2, &["x1"], "x2^2"), 2, 1, &b).unwrap();
        assert!((e - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-12);
        assert_eq!(exponential_sum(&sys(3, 2, &["x1"], "x2"), 1, 3, &b), Err(Error::NonUnitArgument(3)));
    }

    #[test]
    fn form1_single_level() {
        let b = Budget::default();
        let s = sys(3, 2, &["x1"], "x2^2");
        let atlas = Atlas::for_system(&s, &b).unwrap();
        let data = form1_data(&atlas, 1, &ZetaOptions::default(), &b).unwrap();
        let e = form1_eval(&data, 1, 1, &Form1Options::default()).unwrap();
        assert!((e - Complex64::new(0.0, 1.0 / 3f64.sqrt())).norm() < 1e-12);
    }

    #[test]
    fn sps_square_and_linear() {
        let b = Budget::default();
        let z = ZetaOptions::default();
        let f = Form1Options::default();
        let r = sps_verify(&sys(3, 2, &["x1"], "x2^2"), 4, &z, &f, &b).unwrap();
        assert!(r.passed(1e-9), "{}", r.max_discrepancy);
        assert_eq!(r.cutoff, 1);
        let r = sps_verify(&sys(3, 2, &["x1"], "x2"), 3, &z, &f, &b).unwrap();
        assert!(r.passed(1e-9));
        assert_eq!(r.cutoff, 0);
        assert!(r.records.iter().all(|x| x.via_form1.unwrap().norm() < 1e-9));
    }

    #[test]
    fn mutated_gauss_sums_fail() {
        let b = Budget::default();
        let f = Form1Options { gauss_scale: 1.5, z_shift: None };
        let r = sps_verify(&sys(3, 2, &["x1"], "x2^2"), 3, &ZetaOptions::default(), &f, &b).unwrap();
        assert!(r.max_discrepancy > 0.1);
    }

    #[test]
    fn exact_decay_on_square_line() {
        let b = Budget::default();
        let rep = decay_report(&sys(3, 2, &["x1"], "x2^2"), 6, 0.5, 1, 1.5, &b).unwrap();
        for (_, _, norm) in &rep.rows {
            assert!((norm - 1.0).abs() < 1e-9);
        }
        assert_eq!(rep.verdict, DecayVerdict::Bounded);
    }

    #[test]
    fn oscillatory_matches_direct_on_polydisc() {
        let b = Budget::default();
        let s = sys(3, 2, &["x1 - x2^2"], "x2^3 + x2");
        for m in 1..=3 {
            let z = ScaledUnit::new(3, 2u32, m).unwrap();
            let a = oscillatory_integral(&s, &Support::UnitPolydisc, &z, &b).unwrap();
            let e = exponential_sum(&s, m, 2, &b).unwrap();
            assert!((a - e).norm() < 1e-12);
        }
        let empty = Support::Cosets { level: 1, centers: vec![] };
        let z = ScaledUnit::new(3, 1u32, 2).unwrap();
        assert_eq!(oscillatory_integral(&s, &empty, &z, &b).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn coset_integral_is_local_gauss_sum() {
        // x2 in 1 + 3Z_3: x2^2 = 1 + 3(2t + 3t^2), so E = Psi(u/9) 3^{-1} sum_t Psi(2ut/3) = 0 at m = 2
        let b = Budget::default();
        let s = sys(3, 2, &["x1"], "x2^2");
        let disc = Support::Cosets { level: 1, centers: vec![vec![0, 1]] };
        let z = ScaledUnit::new(3, 1u32, 2).unwrap();
        assert!(oscillatory_integral(&s, &disc, &z, &b).unwrap().norm() < 1e-12);
        let z = ScaledUnit::new(3, 1u32, 1).unwrap();
        let e = oscillatory_integral(&s, &disc, &z, &b).unwrap();
        assert!((e - psi_ratio(1, 3) / 3.0).norm() < 1e-12);
    }

    #[test]
    fn bad_reduction_decomposition() {
        let b = Budget::default();
        let s = sys(3, 2, &["3*x1 - 9*x2"], "x2^2 + x1");
        for m in 3..=5 {
            let (a, d) = decomposition_identity(&s, m, 1, &b).unwrap();
            assert!((a - d).norm() < 1e-9);
        }
    }

    #[test]
    fn crude_bound_and_csv() {
        let b = Budget::default();
        let rows = expsum_table(&sys(3, 2, &["x1"], "x2^2"), 2, &b, 1).unwrap();
        assert!(rows.iter().all(|r| r.abs_direct() <= 3f64.powi(r.m as i32)));
        let csv = records_csv(&rows[..1]);
        assert!(csv.starts_with("m,u,re_direct,im_direct,re_form1,im_form1,abs,normalized\n1,1,"));
    }
}
