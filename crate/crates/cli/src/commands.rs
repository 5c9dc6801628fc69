use std::fs;
use std::path::Path;

use iwasawa_core::arith;
use iwasawa_core::character_lattice::{enumerate_orbits, f_n, GammaQuotient};
use iwasawa_core::function_fields::{class_number_layer, CarlitzData, Curve, CurveSpec, PlaceDescriptor, PlaceLedger};
use iwasawa_core::normic::{psi_isomorphism, recover_components, split_level, validate_normic, NormicSystemSpec};
use iwasawa_core::sampling::{random_sinnott_spec, SampleShape};
use iwasawa_core::sinnott::{
    characteristic_ideal, finitely_generated_check, level_stats, sinnott_limit as limit, washington_bound_check,
    CharIdealTail, LimitKind, SinnottModule, SinnottModuleSpec,
};
use iwasawa_core::stickelberger::identity::IdentityMode;
use iwasawa_core::stickelberger::series::{two_route_check, two_route_check_all};
use iwasawa_core::stickelberger::{
    build_series, imc_check, modify_v0, omega_factors, theta_element, FrobeniusAssignment, ImcConfig,
    StickelbergerInput, TowerKind, Verdict,
};
use iwasawa_core::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::{ImcArgs, LimitArgs, ModuleArgs, NormicArgs, OrbitArgs, Outcome, TowerArgs, ZetaArgs};

type Run = (RunConfig, Result<Outcome>);

/// Points are counted directly over F_{q^m} only while q^m stays below this.
const DIRECT_COUNT_LIMIT: u64 = 1 << 20;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

fn read_json(path: &Path) -> Result<(String, Value)> {
    let text = fs::read_to_string(path).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok((text, value))
}

pub fn orbits(a: &OrbitArgs) -> Run {
    let mut config = RunConfig::new("orbits");
    config.ell = Some(a.ell);
    config.p = Some(a.p);
    config.d = Some(a.d);
    config.n = Some(a.n);
    let run = || -> Result<Outcome> {
        arith::require_ell_p(a.ell, a.p)?;
        let table = enumerate_orbits(a.ell, GammaQuotient::new(a.p, a.d, a.n)?, None)?;
        table.counting_identities()?;
        let per_level: Vec<Value> = (0..=a.n)
            .map(|m| {
                let f = f_n(a.ell, a.p, m).map(|r| r.f)?;
                Ok(json!({ "level": m, "orbits": table.levels[m as usize].len(), "f": f }))
            })
            .collect::<Result<_>>()?;
        Ok(Outcome::Ok(json!({
            "orbit_count": table.orbits.len(),
            "levels": per_level,
            "table": to_value(&table),
        })))
    };
    (config, run())
}

fn load_module(a: &ModuleArgs, seed: Option<u64>, config: &mut RunConfig) -> Result<SinnottModuleSpec> {
    match &a.spec {
        Some(path) => {
            let (text, value) = read_json(path)?;
            config.spec = Some(value);
            SinnottModuleSpec::from_json(&text)
        }
        None => {
            let (ell, p) = match (a.ell, a.p) {
                (Some(ell), Some(p)) => (ell, p),
                _ => return Err(Error::invalid("without --spec, --ell and --p select the random module")),
            };
            let seed = seed.unwrap_or(0);
            config.seed = Some(seed);
            let shape = SampleShape { d: a.d.unwrap_or(1), ..SampleShape::torsion(a.n) };
            let spec = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed), ell, p, &shape)?;
            config.spec = Some(to_value(&spec));
            Ok(spec)
        }
    }
}

fn ideal_value(module: &SinnottModule) -> Value {
    let ideal = characteristic_ideal(module);
    let explicit: Vec<Value> = ideal
        .explicit
        .exponents
        .iter()
        .map(|((level, rep), e)| json!({ "level": level, "rep": rep, "exponent": to_value(e) }))
        .collect();
    let tail: Option<&CharIdealTail> = ideal.tail.as_ref();
    json!({ "explicit": explicit, "tail": to_value(&tail), "unit": ideal.is_unit() })
}

pub fn module_stats(a: &ModuleArgs, seed: Option<u64>) -> Run {
    let mut config = RunConfig::new("module-stats");
    config.n = Some(a.n);
    let spec = match load_module(a, seed, &mut config) {
        Ok(s) => s,
        Err(e) => return (config, Err(e)),
    };
    config.ell = Some(spec.ell);
    config.p = Some(spec.p);
    config.d = Some(spec.d);
    let run = || -> Result<Outcome> {
        let module = spec.validate()?;
        let levels: Vec<_> = (0..=a.n).map(|m| level_stats(&module, m)).collect::<Result<_>>()?;
        if let Some(path) = &a.csv {
            let mut csv = String::from(
                "level,f,r,rho,t,level_rank_zl,level_rank_ell,level_log_order,rank_zl,rank_ell,log_order\n",
            );
            let opt = |x: Option<u128>| x.map_or(String::new(), |v| v.to_string());
            for s in &levels {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{}\n",
                    s.level,
                    s.f,
                    s.r,
                    s.rho,
                    opt(s.t),
                    s.level_rank_zl,
                    s.level_rank_ell,
                    opt(s.level_log_order),
                    s.rank_zl,
                    s.rank_ell,
                    opt(s.log_order)
                ));
            }
            fs::write(path, csv).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?;
        }
        let washington = if module.is_torsion() { Some(washington_bound_check(&module, a.n)?) } else { None };
        Ok(Outcome::Ok(json!({
            "torsion": module.is_torsion(),
            "components": to_value(&module.components.values().collect::<Vec<_>>()),
            "levels": to_value(&levels),
            "characteristic_ideal": ideal_value(&module),
            "finite_generation": to_value(&finitely_generated_check(&module)?),
            "growth_bound": to_value(&washington),
        })))
    };
    (config, run())
}

pub fn sinnott_limit(a: &LimitArgs) -> Run {
    let mut config = RunConfig::new("sinnott-limit");
    config.kind = Some(a.kind.clone());
    config.pi = Some(a.pi);
    let mut run = || -> Result<Outcome> {
        let (text, value) = read_json(&a.spec)?;
        config.spec = Some(value);
        let spec = SinnottModuleSpec::from_json(&text)?;
        config.ell = Some(spec.ell);
        config.p = Some(spec.p);
        config.d = Some(spec.d);
        let kind: LimitKind = a.kind.parse()?;
        let module = spec.validate()?;
        let result = limit(&module, kind, a.pi)?;
        let body = to_value(&result);
        Ok(if result.congruences_hold() { Outcome::Ok(body) } else { Outcome::Verdict(body, 3) })
    };
    let out = run();
    (config, out)
}

pub fn normic_check(a: &NormicArgs) -> Run {
    let mut config = RunConfig::new("normic-check");
    let mut run = || -> Result<Outcome> {
        let (text, value) = read_json(&a.spec)?;
        config.spec = Some(value);
        let spec = NormicSystemSpec::from_json(&text)?;
        config.ell = Some(spec.ell);
        config.p = Some(spec.p);
        config.d = Some(spec.d);
        let sys = spec.build()?;
        let axioms = validate_normic(&sys);
        if !axioms.holds() {
            return Ok(Outcome::Verdict(json!({ "axioms": to_value(&axioms), "holds": false }), 2));
        }
        let mut splits = Vec::new();
        for n in 0..sys.top() {
            let s = split_level(&sys, n)?;
            splits.push(json!({
                "level": s.level,
                "image_log_order": s.image_log,
                "kernel_log_order": s.kernel_log,
                "exhaustive": s.exhaustive,
                "holds": s.holds,
                "failures": s.failures,
            }));
        }
        let split_ok = splits.iter().all(|s| s["holds"] == json!(true));
        let psi = psi_isomorphism(&sys)?;
        let components = recover_components(&sys)?;
        let holds = split_ok && psi.holds();
        let body = json!({
            "axioms": to_value(&axioms),
            "splitting": splits,
            "psi": to_value(&psi),
            "components": to_value(&components),
            "holds": holds,
        });
        Ok(if holds { Outcome::Ok(body) } else { Outcome::Verdict(body, 3) })
    };
    let out = run();
    (config, out)
}

/// A curve from a descriptor, or from a JSON file when the argument names one.
fn load_curve(curve: &str, q: Option<u64>, config: &mut RunConfig) -> Result<Curve> {
    let path = Path::new(curve);
    if path.is_file() {
        let (text, value) = read_json(path)?;
        let spec = CurveSpec::from_json(&text)?;
        if let Some(q) = q {
            if q != spec.q {
                return Err(Error::invalid(format!("--q {q} disagrees with q = {} in {curve}", spec.q)));
            }
        }
        config.spec = Some(value);
        config.q = Some(spec.q);
        return Curve::new(spec);
    }
    let q = q.ok_or_else(|| Error::invalid("--q is required with a curve descriptor"))?;
    config.q = Some(q);
    Curve::from_descriptor(q, curve)
}

pub fn zeta(a: &ZetaArgs) -> Run {
    let mut config = RunConfig::new("zeta");
    config.curve = Some(a.curve.clone());
    config.p = a.p;
    if a.p.is_some() {
        config.n = Some(a.n);
    }
    let mut run = || -> Result<Outcome> {
        let curve = load_curve(&a.curve, a.q, &mut config)?;
        let q = curve.q();
        let zeta = curve.zeta_numerator()?;
        let g = curve.genus();
        let ledger_degree = (2 * g).max(4);
        let predicted: Vec<_> = (1..=ledger_degree).map(|m| zeta.point_count(m)).collect();
        let ledger = PlaceLedger::from_zeta(&zeta, ledger_degree)?;
        ledger.mobius_check(&predicted)?;
        let mut direct = Vec::new();
        for m in 1..=ledger_degree {
            if q.checked_pow(m).is_none_or(|s| s > DIRECT_COUNT_LIMIT) {
                break;
            }
            let count = curve.count_points(m)?;
            if predicted[m as usize - 1] != count.into() {
                return Err(Error::cross(format!("N_{m}: counted {count}, zeta numerator predicts {}", predicted[m as usize - 1])));
            }
            direct.push(count);
        }
        let layers = match a.p {
            Some(p) => (0..=a.n).map(|m| class_number_layer(&zeta, p, m)).collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        };
        Ok(Outcome::Ok(json!({
            "q": q,
            "genus": g,
            "point_counts": direct,
            "zeta_numerator": to_value(&zeta),
            "class_number": zeta.class_number().to_string(),
            "weil_bound": zeta.weil_bound_holds(),
            "places": to_value(&ledger),
            "layers": to_value(&layers),
        })))
    };
    let out = run();
    (config, out)
}

fn descriptors(items: &[String]) -> Result<Vec<PlaceDescriptor>> {
    items.iter().map(|s| s.parse()).collect()
}

/// The Stickelberger input for either tower, recording resolved defaults in `config`.
fn tower_input(a: &TowerArgs, config: &mut RunConfig) -> Result<StickelbergerInput> {
    let kind: TowerKind = a.tower.parse()?;
    config.tower = Some(kind.to_string());
    config.ell = Some(a.ell);
    config.n = Some(a.n);
    config.truncation = a.truncation;
    config.precision = a.precision;
    arith::require_prime(a.ell)?;
    let (assignment, s, v0) = match kind {
        TowerKind::Arithmetic => {
            let curve_arg = a.curve.clone().unwrap_or_else(|| "P1".to_string());
            config.curve = Some(curve_arg.clone());
            let p = a.p.ok_or_else(|| Error::invalid("--p is required for the arithmetic tower"))?;
            config.p = Some(p);
            arith::require_ell_p(a.ell, p)?;
            let curve = load_curve(&curve_arg, a.q, config)?;
            let s = if a.set_s.is_empty() { vec!["deg:1".to_string()] } else { a.set_s.clone() };
            let v0 = a.v0.clone().unwrap_or_else(|| "deg:1".to_string());
            (FrobeniusAssignment::arithmetic(&curve, p, a.n)?, s, v0)
        }
        TowerKind::Carlitz => {
            let q = a.q.ok_or_else(|| Error::invalid("--q is required for the Carlitz tower"))?;
            let prime = a.frak_p.clone().ok_or_else(|| Error::invalid("--frak-p is required for the Carlitz tower"))?;
            config.q = Some(q);
            config.frak_p = Some(prime.clone());
            let data = CarlitzData::from_descriptor(q, &prime, a.n)?;
            let p = data.field().characteristic();
            if a.p.is_some_and(|x| x != p) {
                return Err(Error::invalid(format!("the Carlitz tower has p = {p}, the characteristic of F_{q}")));
            }
            config.p = Some(p);
            arith::require_ell_p(a.ell, p)?;
            let s = if a.set_s.is_empty() { vec![prime] } else { a.set_s.clone() };
            let v0 = a.v0.clone().unwrap_or_else(|| "inf".to_string());
            (FrobeniusAssignment::carlitz(data), s, v0)
        }
    };
    config.set_s = Some(s.clone());
    config.v0 = Some(v0.clone());
    StickelbergerInput::from_descriptors(assignment, &descriptors(&s)?, &v0.parse()?)
}

pub fn stickelberger(a: &TowerArgs) -> Run {
    let mut config = RunConfig::new("stickelberger");
    let mut run = || -> Result<Outcome> {
        let input = tower_input(a, &mut config)?;
        let truncation = a.truncation.unwrap_or_else(|| input.default_truncation());
        config.truncation = Some(truncation);
        let series = modify_v0(&build_series(&input, truncation)?, &input)?;
        let two_route = match input.assignment.kind() {
            TowerKind::Arithmetic => two_route_check_all(&input, &series)?,
            TowerKind::Carlitz => {
                usize::from(two_route_check(&input, &series, &vec![0; input.assignment.quotient().d as usize])?)
            }
        };
        let theta = theta_element(&input, &series, a.ell, a.precision)?;
        config.precision = theta.precision;
        let omega = omega_factors(&input, a.ell)?;
        let coeffs: Vec<Vec<String>> =
            series.coeffs().iter().map(|row| row.iter().map(|c| c.to_string()).collect()).collect();
        Ok(Outcome::Ok(json!({
            "tower": input.assignment.kind(),
            "q": input.assignment.q(),
            "p": input.assignment.p(),
            "level": input.assignment.level(),
            "genus": input.assignment.genus(),
            "s": input.s.iter().map(|v| v.describe()).collect::<Vec<_>>(),
            "v0": input.v0.describe(),
            "certificates": {
                "truncation": truncation,
                "degree_bound": input.degree_bound(),
                "detected_degree": series.len().saturating_sub(1),
                "two_route_characters": two_route,
            },
            "series": coeffs,
            "theta": to_value(&theta),
            "omega": to_value(&omega),
        })))
    };
    let out = run();
    (config, out)
}

pub fn imc_verify(a: &ImcArgs) -> Run {
    let mut config = RunConfig::new("imc-verify");
    let mut run = || -> Result<Outcome> {
        let mode: IdentityMode = a.identity_mode.parse()?;
        config.identity_mode = Some(mode.to_string());
        let input = tower_input(&a.tower, &mut config)?;
        let truncation = a.tower.truncation.unwrap_or_else(|| input.default_truncation());
        config.truncation = Some(truncation);
        let imc = ImcConfig { ell: a.tower.ell, truncation: Some(truncation), precision: a.tower.precision, identity_mode: mode };
        let report = imc_check(&input, &imc)?;
        config.precision = report.certificates.precision;
        let body = to_value(&report);
        Ok(if report.verdict == Verdict::Refuted { Outcome::Verdict(body, 3) } else { Outcome::Ok(body) })
    };
    let out = run();
    (config, out)
}
