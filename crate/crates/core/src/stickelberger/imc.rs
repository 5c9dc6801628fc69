//! Main-conjecture drivers: hypothesis checks, θ valuations against class-number data, and
//! the JSON report.

use num_bigint::BigInt;
use serde::Serialize;

use super::assignment::{StickelbergerInput, TowerKind};
use super::identity::{verify_class_number_identity, IdentityMode, IdentityReport};
use super::omega::{omega_factors, omega_valuations, OmegaReport};
use super::series::{build_series, modify_v0, two_route_check, two_route_check_all};
use super::theta::{theta_element, ThetaElement};
use crate::arith;
use crate::coeff_rings::zl::bigint_valuation;
use crate::error::{Error, Result};
use crate::function_fields::{class_number_layer, Place};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Confirmed,
    Refuted,
    InformationalAgree,
    InformationalDisagree,
    NoPrediction,
}

impl Verdict {
    fn compare(asserted: bool, agree: bool) -> Verdict {
        match (asserted, agree) {
            (true, true) => Verdict::Confirmed,
            (true, false) => Verdict::Refuted,
            (false, true) => Verdict::InformationalAgree,
            (false, false) => Verdict::InformationalDisagree,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
    /// Informational checks never gate assertions.
    pub required: bool,
}

fn check(name: &str, holds: bool, detail: String, required: bool) -> HypothesisCheck {
    HypothesisCheck { name: name.into(), holds, detail, required }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitRow {
    pub rep: Vec<u64>,
    pub level: u32,
    pub size: usize,
    pub theta: String,
    pub v_ell_theta: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_exponent: Option<i64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelRow {
    pub level: u32,
    #[serde(serialize_with = "crate::bigjson::opt_int")]
    pub class_number: Option<BigInt>,
    /// v_ℓ(h(F_m)/h(F_{m−1})), or v_ℓ(h(F_0)) at m = 0.
    pub predicted_exponent: Option<i64>,
    /// Σ v_ℓ(θ) over the orbits of level m; `None` if one of them vanishes.
    pub analytic_exponent: Option<u64>,
    /// ℓ^{Σ v_ℓ(θ) over orbits of level ≤ m}.
    #[serde(serialize_with = "crate::bigjson::opt_int")]
    pub predicted_order: Option<BigInt>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceRow {
    pub level: u32,
    pub modulus: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImcConfig {
    pub ell: u64,
    pub truncation: Option<u32>,
    pub precision: Option<u32>,
    pub identity_mode: IdentityMode,
}

impl ImcConfig {
    pub fn new(ell: u64) -> Self {
        ImcConfig { ell, truncation: None, precision: None, identity_mode: IdentityMode::Bridged }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificates {
    pub truncation: u32,
    pub degree_bound: u32,
    pub detected_degree: usize,
    pub precision: Option<u32>,
    /// Characters whose Euler-product value was matched against a closed form.
    pub two_route_characters: usize,
    pub trivial_character_matches: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ImcReport {
    pub tower: TowerKind,
    pub ell: u64,
    pub p: u64,
    pub q: u64,
    pub level: u32,
    pub genus: u32,
    pub s: Vec<String>,
    pub v0: String,
    pub hypotheses: Vec<HypothesisCheck>,
    pub hypotheses_hold: bool,
    /// Orbits of level above this are asserted when the hypotheses hold.
    pub assertion_level: Option<u32>,
    pub orbits: Vec<OrbitRow>,
    pub levels: Vec<LevelRow>,
    pub congruences: Vec<CongruenceRow>,
    pub omega: OmegaReport,
    pub omega_valuations: Vec<Option<u32>>,
    pub identity: Option<IdentityReport>,
    pub certificates: Certificates,
    pub verdict: Verdict,
}

/// ℓ generates (Z/p)^* and v_p(ℓ^{p−1} − 1) = 1.
pub fn ell_generates(ell: u64, p: u64) -> (bool, String) {
    let generator = p == 2 || arith::mult_order(ell % p, p) == Some(p - 1);
    let big = num_traits::pow(BigInt::from(ell), (p - 1) as usize) - 1;
    let v = bigint_valuation(&big, p);
    (
        generator && v == Some(1),
        format!(
            "ord_{p}({ell}) = {}, v_{p}({ell}^{} - 1) = {}",
            arith::mult_order(ell % p, p).map_or("-".into(), |o| o.to_string()),
            p - 1,
            v.map_or("inf".into(), |v| v.to_string())
        ),
    )
}

pub fn arithmetic_hypotheses(input: &StickelbergerInput, ell: u64) -> Result<Vec<HypothesisCheck>> {
    let a = &input.assignment;
    let (p, q) = (a.p(), a.q());
    let d0 = input.v0.degree();
    let v0_split = a.split_data(&input.v0)?.split;
    let unit = arith::pow_mod(q % ell, d0 as u64, ell) != 1;
    let mut out = vec![check(
        "v0 does not split completely, or v_ell(1 - q^deg v0) = 0",
        v0_split.is_some() || unit,
        format!("n_0 = {}", v0_split.map_or("inf".into(), |x| x.to_string())),
        true,
    )];
    let mut splitting = Vec::new();
    for v in &input.s {
        if a.split_data(v)?.split.is_none() {
            splitting.push(v.describe());
        }
    }
    out.push(check(
        "no place of S splits completely",
        splitting.is_empty(),
        if splitting.is_empty() { "all n_v^s finite".into() } else { format!("totally split: {}", splitting.join(", ")) },
        true,
    ));
    let (gen, detail) = ell_generates(ell, p);
    out.push(check("ell generates (Z/p)^* and v_p(ell^(p-1) - 1) = 1", gen, detail, true));
    out.extend(informational_h1_h2(input, ell)?);
    Ok(out)
}

fn informational_h1_h2(input: &StickelbergerInput, ell: u64) -> Result<Vec<HypothesisCheck>> {
    let a = &input.assignment;
    let d0 = input.v0.degree();
    let v0_total = a.split_data(&input.v0)?.split.is_none();
    let unit = arith::pow_mod(a.q() % ell, d0 as u64, ell) != 1;
    let h1 = v0_total && unit;
    let mut ramified_ok = true;
    for v in &input.s {
        let sd = a.split_data(v)?;
        let ramified = a.class_of(v)?.is_none();
        ramified_ok &= ramified && sd.split == Some(0) && !(v.degree() as u64).is_multiple_of(ell);
    }
    Ok(vec![
        check(
            "H1: v0 totally split and 1 - q^deg v0 prime to ell",
            h1,
            format!("v0 totally split: {v0_total}"),
            false,
        ),
        check(
            "H2: S is the set of ramified places, all totally ramified, ell not dividing their degrees",
            ramified_ok,
            "informational".into(),
            false,
        ),
    ])
}

pub fn carlitz_hypotheses(input: &StickelbergerInput, ell: u64) -> Result<Vec<HypothesisCheck>> {
    let a = &input.assignment;
    let c = a.carlitz_data().ok_or_else(|| Error::invalid("not a Carlitz assignment"))?;
    let q = a.q();
    let prime_degree = c.prime_degree();
    let mut out = vec![
        check("F inside the maximal pro-p subextension of the p-cyclotomic tower", true, "one-unit quotient".into(), true),
        check("p does not divide the class number of A", true, "h(F_q[t]) = 1".into(), true),
        check(
            "q^deg(inf) not congruent to 1 mod ell",
            q % ell != 1 % ell,
            format!("{q} mod {ell} = {}", q % ell),
            true,
        ),
        check(
            "ell does not divide deg p",
            !(prime_degree as u64).is_multiple_of(ell),
            format!("deg p = {prime_degree}"),
            true,
        ),
    ];
    let expected_s = vec![Place::Finite(c.prime().to_vec())];
    out.push(check(
        "S = {p} and v0 = inf",
        input.s == expected_s && input.v0 == Place::Infinity,
        format!("S = {:?}, v0 = {}", input.s.iter().map(Place::describe).collect::<Vec<_>>(), input.v0.describe()),
        true,
    ));
    out.extend(informational_h1_h2(input, ell)?);
    Ok(out)
}

fn orbit_rows(theta: &ThetaElement) -> Vec<OrbitRow> {
    theta
        .orbits
        .iter()
        .map(|o| OrbitRow {
            rep: o.rep.clone(),
            level: o.level,
            size: o.size,
            theta: o.display_value(),
            v_ell_theta: o.v_ell,
            predicted_exponent: None,
            verdict: Verdict::NoPrediction,
        })
        .collect()
}

fn level_exponent(theta: &ThetaElement, m: u32) -> Option<u64> {
    theta.orbits.iter().filter(|o| o.level == m).map(|o| o.v_ell.map(u64::from)).sum()
}

/// Runs the full pipeline at the input's level.
pub fn imc_check(input: &StickelbergerInput, config: &ImcConfig) -> Result<ImcReport> {
    let ell = config.ell;
    let a = &input.assignment;
    arith::require_ell_p(ell, a.p())?;
    let n = a.level();
    let truncation = config.truncation.unwrap_or_else(|| input.default_truncation());
    let series = build_series(input, truncation)?;
    let modified = modify_v0(&series, input)?;

    let (two_route_characters, trivial_character_matches) = match a.kind() {
        TowerKind::Arithmetic => (two_route_check_all(input, &modified)?, true),
        TowerKind::Carlitz => {
            let ok = two_route_check(input, &modified, &vec![0; a.quotient().d as usize])?;
            (usize::from(ok), ok)
        }
    };
    let theta = theta_element(input, &modified, ell, config.precision)?;
    let omega = omega_factors(input, ell)?;
    let omega_vals = omega_valuations(input, ell)?;

    let hypotheses = match a.kind() {
        TowerKind::Arithmetic => arithmetic_hypotheses(input, ell)?,
        TowerKind::Carlitz => carlitz_hypotheses(input, ell)?,
    };
    let hypotheses_hold = hypotheses.iter().filter(|h| h.required).all(|h| h.holds);
    let assertion_level = omega.stabilization.assertion_level();
    let asserted = |m: u32| hypotheses_hold && assertion_level.is_some_and(|nb| m > nb);

    let mut orbits = orbit_rows(&theta);
    let mut levels = Vec::new();
    let mut congruences = Vec::new();
    let identity = match a.kind() {
        TowerKind::Arithmetic => Some(verify_class_number_identity(input, &modified, config.identity_mode)?),
        TowerKind::Carlitz => None,
    };

    match a.kind() {
        TowerKind::Arithmetic => {
            let zeta = a.zeta();
            let mut previous: Option<u32> = None;
            for m in 0..=n {
                let h = class_number_layer(&zeta, a.p(), m)?.h;
                let vh = bigint_valuation(&h, ell).expect("class numbers are positive");
                let predicted = vh as i64 - previous.map_or(0, |x| x as i64);
                previous = Some(vh);
                let analytic = level_exponent(&theta, m);
                let agree = analytic.is_some_and(|x| x as i64 == predicted);
                let verdict = Verdict::compare(asserted(m), agree);
                let level_orbits: Vec<usize> = (0..orbits.len()).filter(|&i| orbits[i].level == m).collect();
                if level_orbits.len() == 1 {
                    let row = &mut orbits[level_orbits[0]];
                    row.predicted_exponent = Some(predicted);
                    row.verdict = verdict;
                }
                levels.push(LevelRow {
                    level: m,
                    class_number: Some(h),
                    predicted_exponent: Some(predicted),
                    analytic_exponent: analytic,
                    predicted_order: None,
                    verdict,
                });
            }
        }
        TowerKind::Carlitz => {
            let mut total: Option<u64> = Some(0);
            let mut orders: Vec<Option<BigInt>> = Vec::new();
            for m in 0..=n {
                total = match (total, level_exponent(&theta, m)) {
                    (Some(t), Some(x)) => Some(t + x),
                    _ => None,
                };
                let order = total.map(|t| num_traits::pow(BigInt::from(ell), t as usize));
                orders.push(order.clone());
                levels.push(LevelRow {
                    level: m,
                    class_number: None,
                    predicted_exponent: None,
                    analytic_exponent: level_exponent(&theta, m),
                    predicted_order: order,
                    verdict: Verdict::NoPrediction,
                });
            }
            for m in 0..n {
                let modulus = a.p().pow(m + 1);
                let holds = match (&orders[m as usize], &orders[m as usize + 1]) {
                    (Some(x), Some(y)) => ((y - x) % BigInt::from(modulus)) == BigInt::from(0),
                    _ => false,
                };
                if !holds && hypotheses_hold {
                    return Err(Error::cross(format!(
                        "predicted orders violate the congruence modulo {modulus} at level {m}"
                    )));
                }
                congruences.push(CongruenceRow { level: m, modulus, holds });
            }
        }
    }

    let verdicts: Vec<Verdict> = levels.iter().map(|l| l.verdict).collect();
    let verdict = if verdicts.contains(&Verdict::Refuted) {
        Verdict::Refuted
    } else if verdicts.contains(&Verdict::Confirmed) {
        Verdict::Confirmed
    } else if verdicts.contains(&Verdict::InformationalDisagree) {
        Verdict::InformationalDisagree
    } else if verdicts.contains(&Verdict::InformationalAgree) {
        Verdict::InformationalAgree
    } else {
        Verdict::NoPrediction
    };

    Ok(ImcReport {
        tower: a.kind(),
        ell,
        p: a.p(),
        q: a.q(),
        level: n,
        genus: a.genus(),
        s: input.s.iter().map(Place::describe).collect(),
        v0: input.v0.describe(),
        hypotheses,
        hypotheses_hold,
        assertion_level,
        orbits,
        levels,
        congruences,
        omega,
        omega_valuations: omega_vals,
        identity,
        certificates: Certificates {
            truncation,
            degree_bound: input.degree_bound(),
            detected_degree: modified.len().saturating_sub(1),
            precision: theta.precision,
            two_route_characters,
            trivial_character_matches,
        },
        verdict,
    })
}
