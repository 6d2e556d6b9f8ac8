use psum::characters::{CharacterGroup, MultChar};
use psum::expsum::{decay_report, expsum_table, records_csv, sps_verify, Form1Options};
use psum::poincare::{count_nm_on, denef_identity_check, nm_bound_check, poincare_series, CountSeries};
use psum::ratfn::{candidate_pole_check, QPoly};
use psum::regularize::{delta_limit_check, DeltaNorm};
use psum::smoothing::{global_decompose, Atlas};
use psum::variety::{critical_locus_probe, good_reduction_test, image_count_oracle, points_csv, Reduction};
use psum::zeta::{all_tables, trivial_zeta, ZetaOptions};
use psum::{Budget, PolySystem, RationalFn, Support};
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::output::Output;
use crate::spec::ProblemSpec;
use crate::{Cli, Command, Mutation};

const SPS_TOLERANCE: f64 = 1e-9;

struct Ctx<'a> {
    cli: &'a Cli,
    spec: ProblemSpec,
    system: PolySystem,
    support: Support,
    budget: Budget,
}

impl Ctx<'_> {
    fn max_level(&self, default: u32) -> u32 {
        self.cli.max_level.or(self.spec.max_level).unwrap_or(default)
    }

    fn zeta_options(&self) -> ZetaOptions {
        ZetaOptions { support: self.support.clone(), workers: self.cli.workers, verify: true }
    }

    fn mutated(&self, m: Mutation) -> bool {
        self.cli.mutate == Some(m)
    }

    fn trivial_character(&self) -> Result<MultChar, Failure> {
        Ok(CharacterGroup::new(self.system.p(), 1)?.character(0))
    }
}

pub fn execute(cli: &Cli, spec: ProblemSpec) -> Result<(), Failure> {
    let system = spec.system()?;
    let support = spec.support()?;
    let budget = Budget::new(cli.budget.or(spec.budget).unwrap_or(Budget::DEFAULT));
    let ctx = Ctx { cli, spec, system, support, budget };
    let mut out = Output::create(&cli.out)?;
    let result = match cli.command {
        Command::Count => count(&ctx, &mut out),
        Command::Poincare => poincare(&ctx, &mut out),
        Command::Zeta => zeta(&ctx, &mut out),
        Command::Expsum => expsum(&ctx, &mut out),
        Command::SpsVerify => sps(&ctx, &mut out),
        Command::Smooth => smooth(&ctx, &mut out),
        Command::DeltaCheck => delta(&ctx, &mut out),
        Command::Decay => decay(&ctx, &mut out),
        Command::Probe => probe(&ctx, &mut out),
    };
    let status = match &result {
        Ok(summary) => {
            println!("{summary}");
            json!({"status": "ok", "summary": summary})
        }
        Err(f) => json!({"status": "failed", "exit_code": f.exit_code(), "message": f.to_string()}),
    };
    let mut files = out.written().to_vec();
    files.push("run.json".into());
    let manifest = json!({
        "command": format!("{:?}", cli.command),
        "seed": cli.seed,
        "workers": cli.workers,
        "budget": ctx.budget.limit(),
        "mutation": cli.mutate.map(|m| format!("{m:?}")),
        "spec": ctx.spec,
        "result": status,
        "files": files,
    });
    out.json("run.json", &manifest)?;
    result.map(|_| ())
}

fn counts(ctx: &Ctx, max_m: u32) -> Result<Vec<u128>, Failure> {
    let atlas = Atlas::for_system(&ctx.system, &ctx.budget)?;
    (0..=max_m)
        .map(|m| count_nm_on(&atlas, &ctx.system, m, &ctx.budget, ctx.cli.workers).map_err(Failure::from))
        .collect()
}

fn count(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let m = ctx.max_level(6);
    let series = CountSeries::from_counts(ctx.system.p(), ctx.system.dim(), counts(ctx, m)?);
    out.csv("counts.csv", &series.to_csv())?;
    Ok(format!("N_0..N_{m} = {:?}", series.nm))
}

/// `Z + t/p^2`, used to check that the identity test notices a wrong `Z`.
fn perturbed(z: &RationalFn, p: u64) -> Result<RationalFn, Failure> {
    let bump = QPoly::monomial(psum::zeta::p_power(p, -2), 1);
    Ok(RationalFn::new(z.num.add(&z.den.mul(&bump)), z.den.clone())?)
}

fn poincare(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let m = ctx.max_level(8);
    let series = poincare_series(&ctx.system, m, &ctx.budget, ctx.cli.workers)?;
    out.csv("counts.csv", &series.to_csv())?;
    let p = match (&series.reconstructed, &series.failure) {
        (Some(p), _) => p.clone(),
        (None, Some(e)) => return Err(Failure::Verification(format!("P(t) reconstruction: {e}"))),
        (None, None) => unreachable!("reconstruction either succeeds or records an error"),
    };
    let poles = psum::ratfn::pole_analysis(&p, ctx.system.p()).ok();
    let atlas = Atlas::for_system(&ctx.system, &ctx.budget)?;
    let opts = ZetaOptions { support: Support::UnitPolydisc, ..ctx.zeta_options() };
    let mut z = trivial_zeta(&atlas, m + 4, &opts, &ctx.budget)?.function;
    if ctx.mutated(Mutation::ZetaCoefficient) {
        z = perturbed(&z, ctx.system.p())?;
    }
    let verdict = denef_identity_check(&p, &z);
    let bound = poles.as_ref().map(|r| nm_bound_check(&series, r.rho, r.multiplicity));
    out.json(
        "poincare.json",
        &json!({
            "poincare": p.to_json(),
            "zeta_trivial": z.to_json(),
            "poles": poles,
            "identity": verdict,
            "count_bound": bound,
        }),
    )?;
    if !verdict.pass {
        return Err(Failure::Verification("P(t)(1 - t) + t Z(t) != 1".into()));
    }
    Ok(format!("P(t) = {p}; identity with Z holds"))
}

fn zeta(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let m = ctx.max_level(8);
    let atlas = Atlas::for_system(&ctx.system, &ctx.budget)?;
    let opts = ctx.zeta_options();
    let mut tables_written = 0;
    if ctx.system.p() != 2 {
        let cap = ctx.spec.character_conductor_cap.unwrap_or(2).max(1);
        for t in all_tables(&atlas, cap, m, &opts, &ctx.budget)? {
            out.csv(&format!("zeta_chi{}.csv", t.index), &t.to_csv())?;
            tables_written += 1;
        }
    }
    let triv = trivial_zeta(&atlas, (m + 1).max(12), &opts, &ctx.budget)?;
    let mut csv = String::from("m,exact_num,exact_den\n");
    for (k, c) in triv.coeffs.iter().enumerate() {
        csv.push_str(&format!("{k},{},{}\n", c.numer(), c.denom()));
    }
    out.csv("zeta_trivial.csv", &csv)?;
    let candidates: Option<Vec<(i64, u32)>> =
        ctx.system.resolution_data().map(|d| d.iter().map(|x| (x.v as i64, x.n)).collect());
    let check = match &candidates {
        Some(c) if !triv.function.den.is_constant() => Some(candidate_pole_check(&triv.function, ctx.system.p(), c, ctx.system.n() as u32)?),
        _ => None,
    };
    out.json(
        "zeta.json",
        &json!({
            "function": triv.function.to_json(),
            "poles": triv.poles,
            "candidates": candidates,
            "candidate_check": check,
            "character_tables": tables_written,
        }),
    )?;
    if check.as_ref().is_some_and(|c| !c.divides) {
        return Err(Failure::Verification("denominator does not divide the candidate product".into()));
    }
    Ok(format!("Z(t) = {}", triv.function))
}

fn expsum(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let m = ctx.max_level(4);
    let records = expsum_table(&ctx.system, m, &ctx.budget, ctx.cli.workers)?;
    out.csv("expsum.csv", &records_csv(&records))?;
    let worst = records.iter().map(|r| r.abs_direct()).fold(0.0, f64::max);
    Ok(format!("{} sums, max |E| = {worst:.6e}", records.len()))
}

fn sps(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let m = ctx.max_level(4);
    let fopts = Form1Options {
        gauss_scale: if ctx.mutated(Mutation::GaussScale) { 1.5 } else { 1.0 },
        z_shift: ctx.mutated(Mutation::ZetaCoefficient).then_some((0, 0.25)),
    };
    let rep = sps_verify(&ctx.system, m, &ctx.zeta_options(), &fopts, &ctx.budget)?;
    out.csv("sps.csv", &records_csv(&rep.records))?;
    let pass = rep.passed(SPS_TOLERANCE);
    out.json(
        "sps.json",
        &json!({
            "max_discrepancy": rep.max_discrepancy,
            "tolerance": SPS_TOLERANCE,
            "cutoff_conductor": rep.cutoff,
            "records": rep.records.len(),
            "pass": pass,
        }),
    )?;
    if !pass {
        return Err(Failure::Verification(format!("max discrepancy {:e}", rep.max_discrepancy)));
    }
    Ok(format!("max discrepancy {:.3e} over {} sums", rep.max_discrepancy, rep.records.len()))
}

fn smooth(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let m = ctx.max_level(3);
    let reduction = good_reduction_test(&ctx.system, &ctx.budget)?;
    let (level, certificates) = match reduction {
        Reduction::Good => (0, Vec::new()),
        Reduction::Bad(_) => {
            let d = global_decompose(&ctx.system, &ctx.budget)?;
            (d.level, d.certificates)
        }
    };
    let atlas = Atlas::for_system(&ctx.system, &ctx.budget)?;
    let mut csv = String::from("m,image_count,oracle_count,oracle_stable\n");
    let mut mismatch = None;
    for k in 1..=m {
        let got = atlas.image_count(k, &ctx.budget)?;
        let oracle = image_count_oracle(&ctx.system, k, k + 2, &ctx.budget)?;
        csv.push_str(&format!("{k},{got},{},{}\n", oracle.count, oracle.stable));
        if oracle.stable && oracle.count != got && mismatch.is_none() {
            mismatch = Some(k);
        }
    }
    out.csv("smooth.csv", &csv)?;
    out.json(
        "smooth.json",
        &json!({
            "good_reduction": reduction.is_good(),
            "level": level,
            "charts": atlas.charts.len(),
            "certificates": certificates,
        }),
    )?;
    if certificates.iter().any(|c| !c.good_reduction) {
        return Err(Failure::Verification("a rescaled chart does not have good reduction".into()));
    }
    if let Some(k) = mismatch {
        return Err(Failure::Verification(format!("image count differs from the oracle at m = {k}")));
    }
    Ok(format!("level {level}, {} charts", atlas.charts.len()))
}

fn delta(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let depth = ctx.max_level(9);
    let s = ctx.spec.s.unwrap_or(1);
    let norm = if ctx.mutated(Mutation::DeltaNorm) { DeltaNorm::Mutated } else { DeltaNorm::Standard };
    let chi = ctx.trivial_character()?;
    let r_max = 4.min(depth.saturating_sub(1));
    let rep = delta_limit_check(&ctx.system, &ctx.support, s, &chi, r_max, depth, norm, &ctx.budget)?;
    out.csv("delta.csv", &rep.to_csv())?;
    out.json("delta.json", &json!({"s": s, "depth": depth, "r0": rep.r0, "pass": rep.pass, "max_tail": rep.max_tail}))?;
    match rep.r0 {
        Some(r0) if rep.pass => Ok(format!("r0 = {r0}, max tail {:.3e}", rep.max_tail)),
        _ => Err(Failure::Verification("I_r does not settle within the tail bound".into())),
    }
}

fn decay(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let m = ctx.max_level(6);
    let (rho, mult, source) = match ctx.system.rho_from_data() {
        Some((v, n)) => (v as f64 / n as f64, 1, "resolution_data"),
        None => {
            let atlas = Atlas::for_system(&ctx.system, &ctx.budget)?;
            let z = trivial_zeta(&atlas, 2 * m + 4, &ctx.zeta_options(), &ctx.budget)?;
            let poles = z.poles.ok_or_else(|| Failure::Schema("Z(t) has no poles; supply resolution_data".into()))?;
            (poles.rho, poles.multiplicity, "zeta_poles")
        }
    };
    let rep = decay_report(&ctx.system, m, rho, mult, 2.0, &ctx.budget)?;
    let mut csv = String::from("m,max_abs,normalized\n");
    for (k, e, n) in &rep.rows {
        csv.push_str(&format!("{k},{e:.12e},{n:.12e}\n"));
    }
    out.csv("decay.csv", &csv)?;
    let verdict = format!("{:?}", rep.verdict);
    out.json("decay.json", &json!({"rho": rho, "multiplicity": mult, "rho_source": source, "verdict": verdict}))?;
    let top = rep.rows.iter().map(|r| r.2).fold(0.0, f64::max);
    Ok(format!("rho = {rho}, multiplicity {mult}: {verdict} (max normalized {:.4})", top))
}

fn probe(ctx: &Ctx, out: &mut Output) -> Result<String, Failure> {
    let level = ctx.max_level(2);
    let points = critical_locus_probe(&ctx.system, level, &ctx.budget)?;
    out.csv("probe.csv", &points_csv(ctx.system.n(), level, &points))?;
    let summary: Value = json!({"level": level, "critical_points": points.len()});
    out.json("probe.json", &summary)?;
    Ok(format!("{} critical residue classes mod p^{level}", points.len()))
}
