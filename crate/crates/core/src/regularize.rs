//! Approximating the surface measure on `V` by `delta_r(f_1, ..., f_{l-1}) dx`
//! with `delta_r(u) = p^{r(l-1)}` on `(p^r Z_p)^{l-1}` and `0` elsewhere.
//!
//! `I_r = integral of Phi delta_r(f) chi(ac f_l) |f_l|^s dx` is summed over the
//! ambient grid mod `p^M`. A subtree is collapsed as soon as every factor is
//! constant on it, so only residues close to `f_l = 0` are expanded to depth
//! `M`; those are bounded by the certified tail.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::characters::MultChar;
use crate::enumerate::{Lifter, Step};
use crate::error::{Error, Result};
use crate::expsum::oscillatory_on;
use crate::modring::{checked_pow, ipow, val_mod};
use crate::padic::{psi_ratio, ScaledUnit};
use crate::smoothing::Atlas;
use crate::support::Support;
use crate::system::{Budget, PolySystem};
use crate::zeta::{p_power, shell_masses, trivial_zeta, ZetaOptions};

/// The weight `p^{r(l-1)}`, or the deliberately wrong `p^{rl}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeltaNorm {
    #[default]
    Standard,
    Mutated,
}

impl DeltaNorm {
    fn exponent(self, r: u32, l: usize) -> i64 {
        match self {
            DeltaNorm::Standard => r as i64 * (l as i64 - 1),
            DeltaNorm::Mutated => r as i64 * l as i64,
        }
    }
}

/// `I_r` at scan depth `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaApprox {
    pub r: u32,
    pub s: u32,
    pub depth: u32,
    pub value: Complex64,
    /// Exact value for the trivial character.
    pub exact: Option<BigRational>,
    /// Bound on the contribution of residues with unresolved `f_l`.
    pub tail_bound: BigRational,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    /// `(collapse level k, ord f_l, ac f_l mod p^c) -> count`.
    resolved: BTreeMap<(u32, u32, u64), u128>,
    deep: u128,
}

/// `I_r` for `omega = chi(ac) |.|^s`, `s >= 1`.
#[allow(clippy::too_many_arguments)]
pub fn delta_r_integral(
    system: &PolySystem,
    support: &Support,
    s: u32,
    chi: &MultChar,
    r: u32,
    depth: u32,
    norm: DeltaNorm,
    budget: &Budget,
) -> Result<DeltaApprox> {
    if s == 0 {
        return Err(Error::InvalidArgument("s must be a positive integer".into()));
    }
    if depth <= r {
        return Err(Error::InvalidArgument(format!("scan depth {depth} must exceed r = {r}")));
    }
    let p = system.p();
    let n = system.n();
    let c = chi.conductor();
    let pm = checked_pow(p, depth)?;
    let target = system.target().compile(pm);
    let floor = r.max(support.level());
    let parts = Lifter::new(p, n, system.constraints(), depth, budget).constraint_depth(r).run(Tally::default, |acc, k, x| {
        if !support.admits(p, x, k) {
            return Step::Prune;
        }
        let v = val_mod(target.eval(x) % ipow(p, k), p, k);
        if k >= floor && v + c <= k && v < k {
            let ac = if c == 0 { 0 } else { (target.eval(x) / ipow(p, v)) % ipow(p, c) };
            *acc.resolved.entry((k, v, ac)).or_insert(0) += 1;
            return Step::Prune;
        }
        if k == depth {
            acc.deep += 1;
        }
        Step::Descend
    })?;
    let mut resolved: BTreeMap<(u32, u32, u64), u128> = BTreeMap::new();
    let mut deep = 0u128;
    for t in parts {
        deep += t.deep;
        for (key, cnt) in t.resolved {
            *resolved.entry(key).or_insert(0) += cnt;
        }
    }
    // the level-0 node is never visited; r = 0 with a trivial support still
    // starts collapsing at level 1
    let delta = norm.exponent(r, system.l());
    let mut exact = BigRational::zero();
    let mut value = Complex64::new(0.0, 0.0);
    for ((k, v, ac), cnt) in resolved {
        let w = p_power(p, delta - (k as i64) * n as i64 - (s as i64) * v as i64) * BigRational::from_integer(BigInt::from(cnt));
        if chi.is_trivial() {
            exact += &w;
        } else {
            value += chi.value(ac)? * w.to_f64().unwrap_or(f64::NAN);
        }
    }
    let unresolved_ord = depth.saturating_sub(c) as i64;
    let tail_bound = p_power(p, delta - (depth as i64) * n as i64 - (s as i64) * unresolved_ord)
        * BigRational::from_integer(BigInt::from(deep));
    Ok(if chi.is_trivial() {
        DeltaApprox { r, s, depth, value: Complex64::new(exact.to_f64().unwrap_or(f64::NAN), 0.0), exact: Some(exact), tail_bound }
    } else {
        DeltaApprox { r, s, depth, value, exact: None, tail_bound }
    })
}

/// `Z_Phi(s, chi)` at a positive integer `s`: exact for the trivial character
/// (reconstructed rational function at `t = p^{-s}`), otherwise the series
/// summed through `terms` coefficients.
pub fn surface_value(atlas: &Atlas, support: &Support, s: u32, chi: &MultChar, terms: u32, budget: &Budget) -> Result<(Complex64, Option<BigRational>)> {
    let opts = ZetaOptions { support: support.clone(), workers: 1, verify: false };
    let t = p_power(atlas.p, -(s as i64));
    if chi.is_trivial() {
        let z = trivial_zeta(atlas, terms, &opts, budget)?;
        let v = z.function.eval(&t).ok_or_else(|| Error::InvalidArgument("pole at the evaluation point".into()))?;
        return Ok((Complex64::new(v.to_f64().unwrap_or(f64::NAN), 0.0), Some(v)));
    }
    let c = chi.conductor().max(1);
    let mut acc = Complex64::new(0.0, 0.0);
    let tf = t.to_f64().unwrap_or(0.0);
    for m in 0..terms {
        let sm = shell_masses(atlas, m, c, support, budget, 1, false)?;
        acc += sm.twisted(chi)? * tf.powi(m as i32);
    }
    Ok((acc, None))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaRow {
    pub r: u32,
    pub value_re: f64,
    pub value_im: f64,
    pub tail_bound: f64,
    pub surface_value: f64,
    pub abs_diff: f64,
    #[serde(skip)]
    pub exact_match: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaReport {
    pub rows: Vec<DeltaRow>,
    pub r0: Option<u32>,
    pub pass: bool,
    pub max_tail: f64,
}

impl DeltaReport {
    /// `r,value_re,value_im,tail_bound,surface_value,abs_diff`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,value_re,value_im,tail_bound,surface_value,abs_diff\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.15e},{:.15e},{:.6e},{:.15e},{:.6e}\n",
                r.r, r.value_re, r.value_im, r.tail_bound, r.surface_value, r.abs_diff
            ));
        }
        s
    }
}

/// Compares `I_r` for `r` in `0..=r_max` with the surface value and reports
/// the least `r0` from which every `|I_r - Z|` is within the tail bound.
#[allow(clippy::too_many_arguments)]
pub fn delta_limit_check(
    system: &PolySystem,
    support: &Support,
    s: u32,
    chi: &MultChar,
    r_max: u32,
    depth: u32,
    norm: DeltaNorm,
    budget: &Budget,
) -> Result<DeltaReport> {
    let atlas = Atlas::for_system(system, budget)?;
    let (surface, surface_exact) = surface_value(&atlas, support, s, chi, 14, budget)?;
    let mut rows = Vec::new();
    let mut within = Vec::new();
    for r in 0..=r_max {
        let a = delta_r_integral(system, support, s, chi, r, depth, norm, budget)?;
        let tail = a.tail_bound.to_f64().unwrap_or(f64::INFINITY);
        let diff = (a.value - surface).norm();
        let exact_match = match (&a.exact, &surface_exact) {
            (Some(v), Some(z)) => Some((v - z).abs() <= a.tail_bound),
            _ => None,
        };
        within.push(exact_match.unwrap_or(diff <= tail + 1e-12));
        rows.push(DeltaRow {
            r,
            value_re: a.value.re,
            value_im: a.value.im,
            tail_bound: tail,
            surface_value: surface.re,
            abs_diff: diff,
            exact_match,
        });
    }
    let r0 = (0..within.len()).find(|&i| within[i..].iter().all(|&b| b)).map(|i| i as u32);
    let max_tail = rows.iter().map(|r| r.tail_bound).fold(0.0, f64::max);
    Ok(DeltaReport { pass: r0.is_some(), rows, r0, max_tail })
}

/// `delta_r`-regularized `integral Phi delta_r(f) Psi(z f_l) dx`, exact at
/// depth `max(r, m, level of Phi)`.
pub fn delta_oscillatory(system: &PolySystem, support: &Support, z: &ScaledUnit, r: u32, norm: DeltaNorm, budget: &Budget) -> Result<Complex64> {
    let p = system.p();
    let n = system.n();
    let depth = r.max(z.m).max(support.level()).max(1);
    let pm = ipow(p, z.m);
    let u = (&z.u % num_bigint::BigUint::from(pm)).to_u64().unwrap_or(0);
    let target = system.target().compile(ipow(p, depth));
    let parts = Lifter::new(p, n, system.constraints(), depth, budget).constraint_depth(r).run(
        BTreeMap::<u64, u128>::new,
        |acc, k, x| {
            if !support.admits(p, x, k) {
                return Step::Prune;
            }
            if k == depth {
                *acc.entry(target.eval(x) % pm).or_insert(0) += 1;
            }
            Step::Descend
        },
    )?;
    let w = p_power(p, norm.exponent(r, system.l()) - (depth as i64) * n as i64).to_f64().unwrap_or(f64::NAN);
    let mut total = Complex64::new(0.0, 0.0);
    let mut hist = BTreeMap::new();
    for part in parts {
        for (a, c) in part {
            *hist.entry(a).or_insert(0u128) += c;
        }
    }
    for (a, c) in hist {
        total += psi_ratio((u as u128 * a as u128 % pm as u128) as u64, pm) * (c as f64 * w);
    }
    Ok(total)
}

/// Largest `|delta-regularized E - E_Phi(u p^{-m})|` over `m` in
/// `1..=max_m`, units `u mod p^m` and `r` from `max(m, r_min)` to `m + extra`.
/// Below `r = m` the regularization is coarser than the phase.
pub fn delta_oscillatory_check(
    system: &PolySystem,
    support: &Support,
    r_min: u32,
    extra: u32,
    max_m: u32,
    budget: &Budget,
) -> Result<f64> {
    let atlas = Atlas::for_system(system, budget)?;
    let mut worst: f64 = 0.0;
    for m in 1..=max_m {
        for u in crate::expsum::units(system.p(), m) {
            let z = ScaledUnit::new(system.p(), u, m)?;
            let target = oscillatory_on(&atlas, support, &z, budget)?;
            for r in m.max(r_min)..=m + extra {
                let v = delta_oscillatory(system, support, &z, r, DeltaNorm::Standard, budget)?;
                worst = worst.max((v - target).norm());
            }
        }
    }
    Ok(worst)
}

/// `sum_{u mod p^M} delta_r(u) p^{-M(l-1)}`, which is `1` for `r <= M`.
pub fn delta_mass(p: u64, l: usize, r: u32, depth: u32) -> BigRational {
    let k = l as i64 - 1;
    let inside = BigRational::from_integer(BigInt::from(p)).pow(((depth - r.min(depth)) as i64 * k) as i32);
    inside * p_power(p, r as i64 * k) * p_power(p, -(depth as i64) * k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::CharacterGroup;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn triv() -> MultChar {
        CharacterGroup::new(3, 1).unwrap().character(0)
    }

    #[test]
    fn square_line_value() {
        let b = Budget::default();
        let s = PolySystem::parse(3, 2, &["x1"], "x2^2").unwrap();
        let a = delta_r_integral(&s, &Support::UnitPolydisc, 1, &triv(), 2, 5, DeltaNorm::Standard, &b).unwrap();
        let diff = a.exact.clone().unwrap() - r(9, 13);
        assert!(diff.abs() <= a.tail_bound);
        assert!(a.tail_bound > BigRational::zero());
    }

    #[test]
    fn limit_checks() {
        let b = Budget::default();
        let s = PolySystem::parse(3, 2, &["x1"], "x2^2").unwrap();
        let rep = delta_limit_check(&s, &Support::UnitPolydisc, 1, &triv(), 4, 9, DeltaNorm::Standard, &b).unwrap();
        assert!(rep.pass);
        assert!(rep.r0.unwrap() <= 4);
        assert!(rep.max_tail <= 1e-6);
        let par = PolySystem::parse(3, 2, &["x1 - x2^2"], "x2").unwrap();
        let rep = delta_limit_check(&par, &Support::UnitPolydisc, 1, &triv(), 4, 9, DeltaNorm::Standard, &b).unwrap();
        assert!(rep.pass);
        assert!((rep.rows[0].surface_value - 0.75).abs() < 1e-12);
        let bad = delta_limit_check(&par, &Support::UnitPolydisc, 1, &triv(), 3, 7, DeltaNorm::Mutated, &b).unwrap();
        assert!(!bad.rows.last().unwrap().exact_match.unwrap());
    }

    #[test]
    fn r_zero_is_the_plain_integral() {
        let b = Budget::default();
        let s = PolySystem::parse(3, 2, &["x1 - x2^2"], "x1").unwrap();
        let a = delta_r_integral(&s, &Support::UnitPolydisc, 1, &triv(), 0, 8, DeltaNorm::Standard, &b).unwrap();
        // integral of |x1| over Z_3^2
        assert!((a.exact.unwrap() - r(3, 4)).abs() <= a.tail_bound);
    }

    #[test]
    fn delta_integrates_to_one() {
        for (l, rr, m) in [(2, 0, 3), (2, 2, 4), (3, 3, 3)] {
            assert_eq!(delta_mass(3, l, rr, m), r(1, 1));
        }
    }

    #[test]
    fn oscillatory_limit() {
        let b = Budget::default();
        let s = PolySystem::parse(3, 2, &["x1 - x2^2"], "x2^2 + x1").unwrap();
        let worst = delta_oscillatory_check(&s, &Support::UnitPolydisc, 1, 2, 3, &b).unwrap();
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn csv_layout() {
        let rep = DeltaReport { rows: vec![], r0: None, pass: false, max_tail: 0.0 };
        assert_eq!(rep.to_csv(), "r,value_re,value_im,tail_bound,surface_value,abs_diff\n");
    }
}
