//! Twisted local zeta functions along `V`:
//! `Z(s, chi, Phi) = sum_m c_m(chi) t^m` with `t = p^{-s}` and
//! `c_m(chi) = integral over {ord f_l = m} of chi(ac f_l) Phi`
//! against the Gelfand-Leray measure of `V`.
//!
//! A point of `V` with `ord f_l = m` is pinned down modulo `p^{m+c}` up to
//! the value of `ac f_l mod p^c`, so each coefficient is a finite weighted
//! count of residues, done chart by chart.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::characters::{CharacterGroup, MultChar};
use crate::enumerate::{Lifter, Step};
use crate::error::{Error, Result};
use crate::modring::{checked_pow, ipow};
use crate::ratfn::{pole_analysis, reconstruct_rational, PoleReport, RationalFn};
use crate::smoothing::{Atlas, Chart};
use crate::support::Support;
use crate::system::{Budget, PolySystem};

/// Below this modulus a coefficient counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// `p^k` as an exact rational, `k` of either sign.
pub fn p_power(p: u64, k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p)).pow(k as i32)
}

/// Measure of `{x in V : ord f_l(x) = m, ac f_l(x) = u mod p^c}` for each unit `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellMasses {
    pub m: u32,
    pub c: u32,
    pub mass: BTreeMap<u64, BigRational>,
    /// Counts one level deeper scaled by exactly `p^d`.
    pub stabilized: bool,
}

impl ShellMasses {
    pub fn total(&self) -> BigRational {
        self.mass.values().fold(BigRational::zero(), |a, b| a + b)
    }

    /// `sum_u chi(u) mass(u)`; `chi` needs conductor at most `c`.
    pub fn twisted(&self, chi: &MultChar) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&u, w) in &self.mass {
            acc += chi.value(u)? * w.to_f64().unwrap_or(f64::NAN);
        }
        Ok(acc)
    }
}

fn chart_support_ok(chart: &Chart, support: &Support, y: &[u64], k: u32) -> bool {
    support.is_polydisc() || support.admits(chart.p, &chart.to_ambient(y, chart.level + k), chart.level + k)
}

/// `#{y mod p^depth on the chart, in the support : ord g(y) = m}` split by
/// `g(y) / p^m mod p^c`, where `depth >= m + c`.
pub fn chart_histogram(
    chart: &Chart,
    m: u32,
    c: u32,
    depth: u32,
    support: &Support,
    budget: &Budget,
    workers: usize,
) -> Result<BTreeMap<u64, u128>> {
    let p = chart.p;
    checked_pow(p, depth + chart.level)?;
    let g = chart.target.compile(ipow(p, depth));
    let pm = ipow(p, m);
    let pc = ipow(p, c);
    let parts = Lifter::new(p, chart.n, &chart.constraints, depth, budget).workers(workers).run(
        BTreeMap::<u64, u128>::new,
        |acc, k, y| {
            if !chart_support_ok(chart, support, y, k) {
                return Step::Prune;
            }
            if k <= m && !g.eval(y).is_multiple_of(ipow(p, k)) {
                return Step::Prune;
            }
            if k == depth {
                let v = g.eval(y);
                if v.is_multiple_of(pm) && !(v / pm).is_multiple_of(p) {
                    *acc.entry((v / pm) % pc).or_insert(0) += 1;
                }
            }
            Step::Descend
        },
    )?;
    let mut out = BTreeMap::new();
    for part in parts {
        for (u, k) in part {
            *out.entry(u).or_insert(0) += k;
        }
    }
    Ok(out)
}

fn depth_for(chart: &Chart, m: u32, c: u32, support: &Support) -> u32 {
    (m + c).max(support.level().saturating_sub(chart.level)).max(1)
}

/// Shell masses at `(m, c)` summed over the charts of `atlas`.
pub fn shell_masses(
    atlas: &Atlas,
    m: u32,
    c: u32,
    support: &Support,
    budget: &Budget,
    workers: usize,
    verify: bool,
) -> Result<ShellMasses> {
    let p = atlas.p;
    let d = atlas.dim as i64;
    let mut mass: BTreeMap<u64, BigRational> = BTreeMap::new();
    let mut stabilized = true;
    for chart in &atlas.charts {
        let depth = depth_for(chart, m, c, support);
        let hist = chart_histogram(chart, m, c, depth, support, budget, workers)?;
        if verify {
            let deeper = chart_histogram(chart, m, c, depth + 1, support, budget, workers)?;
            let pd = ipow(p, d as u32) as u128;
            stabilized &= deeper.len() == hist.len() && hist.iter().all(|(u, k)| deeper.get(u) == Some(&(k * pd)));
        }
        let w = p_power(p, chart.weight_exp() - depth as i64 * d);
        for (u, k) in hist {
            *mass.entry(u).or_insert_with(BigRational::zero) += &w * BigRational::from_integer(BigInt::from(k));
        }
    }
    Ok(ShellMasses { m, c, mass, stabilized })
}

/// Counts for a good-reduction system on the unit polydisc: level-`m+c`
/// points with `ord f_l = m`, by `ac f_l mod p^c`.
pub fn shell_count(system: &PolySystem, m: u32, c: u32, budget: &Budget) -> Result<BTreeMap<u64, u128>> {
    let atlas = Atlas::for_system(system, budget)?;
    if !atlas.good {
        return Err(Error::BadReductionInput { witness: Vec::new() });
    }
    chart_histogram(&atlas.charts[0], m, c, m + c, &Support::UnitPolydisc, budget, 1)
}

/// One coefficient `c_m(chi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub m: u32,
    pub value: Complex64,
    /// Exact value for the trivial character.
    pub exact: Option<BigRational>,
    pub stabilized: bool,
}

/// `c_0, ..., c_{max_m}` for one character.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffTable {
    pub p: u64,
    pub index: u64,
    pub conductor: u32,
    pub rows: Vec<Coefficient>,
}

impl CoeffTable {
    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.value.norm() < ZERO_TOL)
    }

    /// Exact coefficients, when all are available.
    pub fn exact(&self) -> Option<Vec<BigRational>> {
        self.rows.iter().map(|r| r.exact.clone()).collect()
    }

    /// `m,re,im,exact_num,exact_den,stabilized`; exact columns are empty for
    /// nontrivial characters.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("m,re,im,exact_num,exact_den,stabilized\n");
        for r in &self.rows {
            let (num, den) = match &r.exact {
                Some(q) => (q.numer().to_string(), q.denom().to_string()),
                None => (String::new(), String::new()),
            };
            s.push_str(&format!(
                "{},{:.12e},{:.12e},{},{},{}\n",
                r.m, r.value.re, r.value.im, num, den, r.stabilized
            ));
        }
        s
    }
}

/// Options shared by the coefficient routines.
#[derive(Debug, Clone)]
pub struct ZetaOptions {
    pub support: Support,
    pub workers: usize,
    /// Recount one level deeper to confirm stabilization.
    pub verify: bool,
}

impl Default for ZetaOptions {
    fn default() -> Self {
        ZetaOptions { support: Support::UnitPolydisc, workers: 1, verify: true }
    }
}

/// `c_m(chi)` computed at level `m + max(c(chi), 1)`.
pub fn zeta_coefficient(
    system: &PolySystem,
    chi: &MultChar,
    m: u32,
    opts: &ZetaOptions,
    budget: &Budget,
) -> Result<Coefficient> {
    let atlas = Atlas::for_system(system, budget)?;
    coefficient_on(&atlas, chi, m, opts, budget)
}

fn coefficient_on(atlas: &Atlas, chi: &MultChar, m: u32, opts: &ZetaOptions, budget: &Budget) -> Result<Coefficient> {
    let c = chi.conductor().max(1);
    let sm = shell_masses(atlas, m, c, &opts.support, budget, opts.workers, opts.verify)?;
    coefficient_from(&sm, chi)
}

fn coefficient_from(sm: &ShellMasses, chi: &MultChar) -> Result<Coefficient> {
    if chi.is_trivial() {
        let t = sm.total();
        return Ok(Coefficient {
            m: sm.m,
            value: Complex64::new(t.to_f64().unwrap_or(f64::NAN), 0.0),
            exact: Some(t),
            stabilized: sm.stabilized,
        });
    }
    Ok(Coefficient { m: sm.m, value: sm.twisted(chi)?, exact: None, stabilized: sm.stabilized })
}

pub fn zeta_table(system: &PolySystem, chi: &MultChar, max_m: u32, opts: &ZetaOptions, budget: &Budget) -> Result<CoeffTable> {
    let atlas = Atlas::for_system(system, budget)?;
    zeta_table_on(&atlas, chi, max_m, opts, budget)
}

pub fn zeta_table_on(atlas: &Atlas, chi: &MultChar, max_m: u32, opts: &ZetaOptions, budget: &Budget) -> Result<CoeffTable> {
    let rows = (0..=max_m).map(|m| coefficient_on(atlas, chi, m, opts, budget)).collect::<Result<Vec<_>>>()?;
    Ok(CoeffTable { p: atlas.p, index: chi.index(), conductor: chi.conductor(), rows })
}

/// Tables for every character of `(Z/p^{c_cap})^x`, from one histogram per `m`.
pub fn all_tables(atlas: &Atlas, c_cap: u32, max_m: u32, opts: &ZetaOptions, budget: &Budget) -> Result<Vec<CoeffTable>> {
    let group = CharacterGroup::new(atlas.p, c_cap)?;
    let chars = group.characters();
    let masses = (0..=max_m)
        .map(|m| shell_masses(atlas, m, c_cap, &opts.support, budget, opts.workers, opts.verify))
        .collect::<Result<Vec<_>>>()?;
    chars
        .iter()
        .map(|chi| {
            let rows = masses.iter().map(|sm| coefficient_from(sm, chi)).collect::<Result<Vec<_>>>()?;
            Ok(CoeffTable { p: atlas.p, index: chi.index(), conductor: chi.conductor(), rows })
        })
        .collect()
}

/// Largest conductor `e <= c_max` having a character with a nonzero table up
/// to `max_m`; `0` when only the trivial character survives.
#[derive(Debug, Clone, PartialEq)]
pub struct ConductorScan {
    pub e: u32,
    /// `(conductor, largest |c_m(chi)| over characters of that conductor)`.
    pub by_conductor: Vec<(u32, f64)>,
}

pub fn conductor_vanishing_scan(atlas: &Atlas, c_max: u32, max_m: u32, opts: &ZetaOptions, budget: &Budget) -> Result<ConductorScan> {
    let tables = all_tables(atlas, c_max, max_m, opts, budget)?;
    let mut by_conductor = Vec::new();
    let mut e = 0;
    for c in 1..=c_max {
        let largest = tables
            .iter()
            .filter(|t| t.conductor == c)
            .flat_map(|t| t.rows.iter().map(|r| r.value.norm()))
            .fold(0.0, f64::max);
        if largest >= ZERO_TOL {
            e = c;
        }
        by_conductor.push((c, largest));
    }
    Ok(ConductorScan { e, by_conductor })
}

/// Gelfand-Leray volume of `V` inside the support.
pub fn volume(atlas: &Atlas, support: &Support, budget: &Budget) -> Result<BigRational> {
    let d = atlas.dim as i64;
    let mut total = BigRational::zero();
    for chart in &atlas.charts {
        let k = support.level().saturating_sub(chart.level).max(1);
        let parts = Lifter::new(chart.p, chart.n, &chart.constraints, k, budget).run(
            || 0u128,
            |acc, lvl, y| {
                if !chart_support_ok(chart, support, y, lvl) {
                    return Step::Prune;
                }
                if lvl == k {
                    *acc += 1;
                }
                Step::Descend
            },
        )?;
        let count: u128 = parts.into_iter().sum();
        total += p_power(chart.p, chart.weight_exp() - k as i64 * d) * BigRational::from_integer(BigInt::from(count));
    }
    Ok(total)
}

/// `Z(s, triv, Phi)` as an exact rational function of `t`, with its poles.
#[derive(Debug, Clone, PartialEq)]
pub struct TrivialZeta {
    pub coeffs: Vec<BigRational>,
    pub function: RationalFn,
    pub poles: Option<PoleReport>,
}

/// Reconstructs `Z(s, triv)` from `terms` exact coefficients, holding out two.
pub fn trivial_zeta(atlas: &Atlas, terms: u32, opts: &ZetaOptions, budget: &Budget) -> Result<TrivialZeta> {
    let coeffs = (0..terms)
        .map(|m| shell_masses(atlas, m, 1, &opts.support, budget, opts.workers, false).map(|s| s.total()))
        .collect::<Result<Vec<_>>>()?;
    let function = reconstruct_rational(&coeffs, 2)?;
    let poles = match pole_analysis(&function, atlas.p) {
        Ok(r) => Some(r),
        Err(Error::ConstantDenominator) => None,
        Err(e) => return Err(e),
    };
    Ok(TrivialZeta { coeffs, function, poles })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn atlas(p: u64, n: usize, cs: &[&str], t: &str) -> Atlas {
        Atlas::for_system(&PolySystem::parse(p, n, cs, t).unwrap(), &Budget::default()).unwrap()
    }

    #[test]
    fn square_line_trivial_coefficients() {
        // V = x2-axis, f_l = x2^2: c_{2k} = (1 - 1/3) 3^{-k}, odd ones vanish
        let a = atlas(3, 2, &["x1"], "x2^2");
        let b = Budget::default();
        let triv = CharacterGroup::new(3, 1).unwrap().character(0);
        let t = zeta_table_on(&a, &triv, 5, &ZetaOptions::default(), &b).unwrap();
        let exact = t.exact().unwrap();
        assert_eq!(exact, vec![r(2, 3), r(0, 1), r(2, 9), r(0, 1), r(2, 27), r(0, 1)]);
        assert!(t.rows.iter().all(|r| r.stabilized));
    }

    #[test]
    fn square_line_reconstruction() {
        let a = atlas(3, 2, &["x1"], "x2^2");
        let b = Budget::default();
        let z = trivial_zeta(&a, 10, &ZetaOptions::default(), &b).unwrap();
        assert_eq!(z.function.den, crate::ratfn::QPoly::new(vec![r(1, 1), r(0, 1), r(-1, 3)]));
        let poles = z.poles.unwrap();
        assert_eq!(poles.rho_exact, Some((1, 2)));
        assert_eq!(poles.multiplicity, 1);
    }

    #[test]
    fn quadratic_character_on_square_line() {
        // ac(x2^2) is a square, so the quadratic character sees mass 2/3 3^{-k}
        let a = atlas(3, 2, &["x1"], "x2^2");
        let b = Budget::default();
        let quad = CharacterGroup::new(3, 1).unwrap().character(1);
        let t = zeta_table_on(&a, &quad, 3, &ZetaOptions::default(), &b).unwrap();
        assert!((t.rows[0].value.re - 2.0 / 3.0).abs() < 1e-12);
        assert!((t.rows[2].value.re - 2.0 / 9.0).abs() < 1e-12);
        assert!(t.rows[1].value.norm() < 1e-12);
    }

    #[test]
    fn linear_target_has_no_twisted_part() {
        let a = atlas(3, 2, &["x1"], "x2");
        let b = Budget::default();
        let scan = conductor_vanishing_scan(&a, 2, 4, &ZetaOptions::default(), &b).unwrap();
        assert_eq!(scan.e, 0);
    }

    #[test]
    fn volumes() {
        let b = Budget::default();
        let opts = Support::UnitPolydisc;
        assert_eq!(volume(&atlas(3, 2, &["x1"], "x2"), &opts, &b).unwrap(), r(1, 1));
        assert_eq!(volume(&atlas(3, 2, &["3*x1 - 9*x2"], "x2"), &opts, &b).unwrap(), r(3, 1));
        let disc = Support::Cosets { level: 1, centers: vec![vec![0, 1]] };
        assert_eq!(volume(&atlas(3, 2, &["x1"], "x2"), &disc, &b).unwrap(), r(1, 3));
    }

    #[test]
    fn bad_reduction_coefficients_match_brute_force() {
        // On {x1 = 3 x2} with f_l = x2, c_m = 3 (1 - 1/3) 3^{-m}
        let a = atlas(3, 2, &["3*x1 - 9*x2"], "x2");
        let b = Budget::default();
        let triv = CharacterGroup::new(3, 1).unwrap().character(0);
        let t = zeta_table_on(&a, &triv, 3, &ZetaOptions::default(), &b).unwrap();
        for (m, row) in t.rows.iter().enumerate() {
            assert_eq!(row.exact.clone().unwrap(), r(2, 3i64.pow(m as u32)));
        }
    }

    #[test]
    fn csv_layout() {
        let a = atlas(3, 2, &["x1"], "x2");
        let b = Budget::default();
        let triv = CharacterGroup::new(3, 1).unwrap().character(0);
        let t = zeta_table_on(&a, &triv, 1, &ZetaOptions::default(), &b).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("m,re,im,exact_num,exact_den,stabilized\n0,"));
        assert!(csv.contains(",2,3,true\n"));
    }
}
