//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to see the table.

use std::time::{Duration, Instant};

use iwasawa_core::arith;
use iwasawa_core::character_lattice::{a_ell_p, enumerate_orbits, f_n_closed, f_n_direct, GammaQuotient};
use iwasawa_core::function_fields::{CarlitzData, Curve, PlaceDescriptor};
use iwasawa_core::iwasawa_algebra::verify_idempotent_relations;
use iwasawa_core::linalg::ModMatrix;
use iwasawa_core::normic::{
    icomplete_to_normic, psi_isomorphism, recover_components, split_level, torsion_components, validate_normic,
    NormicSystem,
};
use iwasawa_core::sampling::{random_sinnott_spec, SampleShape};
use iwasawa_core::sinnott::{level_stats, sinnott_limit, stable_limit_closed_form, GeneratorRule, LimitKind, SinnottModule, SinnottModuleSpec, ComponentSpec};
use iwasawa_core::stickelberger::identity::IdentityMode;
use iwasawa_core::stickelberger::omega::OmegaReport;
use iwasawa_core::stickelberger::series::{closed_form_poly, two_route_check_all};
use iwasawa_core::stickelberger::{
    build_series, imc_check, modify_v0, omega_factors, theta_element, verify_class_number_identity,
    FrobeniusAssignment, ImcConfig, StickelbergerInput, Verdict,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PAIRS: [(u64, u64); 5] = [(2, 3), (3, 2), (2, 5), (5, 2), (3, 7)];
const IDEMPOTENT_PRECISION: u32 = 32;
const SPECS_PER_PAIR: u64 = 200;
const NORMIC_SPECS: u64 = 100;
const NORMIC_LOG_ORDER_CAP: u32 = 9;
const LIMIT_PRECISION: u32 = 10;
const ELLIPTIC_MAX_TRUNCATION: u32 = 40;
const CARLITZ_TRUNCATION: u32 = 12;

const BUDGET_1: Duration = Duration::from_secs(60);
const BUDGET_2: Duration = Duration::from_secs(10);
const BUDGET_6: Duration = Duration::from_secs(1);
const BUDGET_7: Duration = Duration::from_secs(120);
const BUDGET_8: Duration = Duration::from_secs(120);

/// Criteria that fail on their own stated inputs, with the single sub-check responsible.
const KNOWN_FAILURES: [(u32, &str); 1] = [(8, "q^deg(inf) not congruent to 1 mod ell")];

type Check = Result<String, Vec<String>>;

struct Line {
    id: u32,
    pass: bool,
    detail: String,
    failures: Vec<String>,
    elapsed: Duration,
}

fn timed(id: u32, budget: Option<Duration>, f: impl FnOnce() -> Check) -> Line {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    let (mut pass, detail, mut failures) = match result {
        Ok(d) => (true, d, Vec::new()),
        Err(f) => (false, String::new(), f),
    };
    if let Some(b) = budget {
        if elapsed > b {
            pass = false;
            failures.push(format!("runtime {elapsed:?} exceeds {b:?}"));
        }
    }
    Line { id, pass, detail, failures, elapsed }
}

fn collect(failures: Vec<String>, detail: String) -> Check {
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(failures)
    }
}

fn places(items: &[&str]) -> Vec<PlaceDescriptor> {
    items.iter().map(|s| s.parse().unwrap()).collect()
}

fn big(x: i64) -> BigInt {
    BigInt::from(x)
}

fn criterion_1() -> Check {
    let mut failures = Vec::new();
    let mut runs = 0;
    for (ell, p) in PAIRS {
        for d in 1..=2 {
            for n in 0..=3 {
                let table = match enumerate_orbits(ell, GammaQuotient::new(p, d, n).unwrap(), None) {
                    Ok(t) => t,
                    Err(e) => {
                        failures.push(format!("({ell},{p},{d},{n}): {e}"));
                        continue;
                    }
                };
                match verify_idempotent_relations(&table, IDEMPOTENT_PRECISION) {
                    Ok(r) if r.all_hold() => runs += 1,
                    Ok(r) => failures.push(format!("({ell},{p},{d},{n}): {:?}", r.first_failure)),
                    Err(e) => failures.push(format!("({ell},{p},{d},{n}): {e}")),
                }
            }
        }
    }
    collect(failures, format!("{runs} (ell,p,d,n) cases at K = {IDEMPOTENT_PRECISION}"))
}

/// Order of x mod m by repeated multiplication.
fn naive_order(x: u64, m: u64) -> u64 {
    if m == 1 {
        return 1;
    }
    let mut k = 1;
    let mut y = x % m;
    while y != 1 {
        y = (y as u128 * x as u128 % m as u128) as u64;
        k += 1;
    }
    k
}

fn criterion_2() -> Check {
    let mut failures = Vec::new();
    for (ell, p) in PAIRS {
        for d in 1..=2 {
            for n in 0..=3 {
                let table = enumerate_orbits(ell, GammaQuotient::new(p, d, n).unwrap(), None).unwrap();
                let mut total = 0u64;
                for m in 0..=n {
                    let count = table.levels[m as usize].len() as u64;
                    let f = naive_order(ell, p.pow(m));
                    let expected = if m == 0 { 1 } else { p.pow(d * m) - p.pow(d * (m - 1)) };
                    if count * f != expected {
                        failures.push(format!("({ell},{p},{d}) level {m}: {count}·{f} ≠ {expected}"));
                    }
                    total += count * f;
                }
                if total != p.pow(n * d) {
                    failures.push(format!("({ell},{p},{d},{n}): total {total}"));
                }
            }
        }
    }
    let primes: Vec<u64> = (2..50).filter(|&x| arith::is_prime(x)).collect();
    let mut compared = 0;
    for &ell in &primes {
        for &p in &primes {
            if ell == p {
                continue;
            }
            for n in 0..=6u32 {
                let closed = f_n_closed(ell, p, n).unwrap();
                let modulus = p.pow(n);
                let brute = if modulus <= 4_000_000 { naive_order(ell, modulus) } else { f_n_direct(ell, p, n).unwrap() };
                if closed != brute {
                    failures.push(format!("f_{n}({ell},{p}): closed {closed}, brute force {brute}"));
                }
                compared += 1;
            }
        }
    }
    collect(failures, format!("counting grid and {compared} f_n values"))
}

fn criterion_3() -> Check {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (ell, p) in PAIRS {
        for seed in 0..SPECS_PER_PAIR {
            let shape = SampleShape {
                d: 1 + (seed % 2) as u32,
                torsion_only: false,
                max_components_per_level: 2,
                ..SampleShape::torsion(5)
            };
            let spec = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed ^ (ell << 40) ^ (p << 48)), ell, p, &shape)
                .unwrap();
            let module = SinnottModule::new(&spec).unwrap();
            let (mut zl, mut el, mut ord) = (0u128, 0u128, 0u128);
            for n in 0..=5u32 {
                for c in module.components.values().filter(|c| c.level == n) {
                    let size = c.orbit_size as u128;
                    zl += size * c.invariant.free_rank as u128;
                    el += size * c.invariant.local_rank() as u128;
                    ord += size * c.invariant.torsion_length() as u128;
                }
                let s = match level_stats(&module, n) {
                    Ok(s) => s,
                    Err(e) => {
                        failures.push(format!("({ell},{p}) seed {seed} level {n}: {e}"));
                        break;
                    }
                };
                let f = s.f as u128;
                let integral = s.r * f == s.level_rank_zl && s.rho * f == s.level_rank_ell;
                let orders = if module.is_torsion() { s.log_order == Some(ord) } else { s.log_order.is_none() };
                if s.rank_zl != zl || s.rank_ell != el || !orders || !integral {
                    failures.push(format!("({ell},{p}) seed {seed} level {n}: {s:?} vs direct ({zl},{el},{ord})"));
                }
                checked += 1;
            }
        }
    }
    collect(failures, format!("{checked} (spec, level) comparisons"))
}

fn stable_spec(ell: u64, p: u64, free_rank: u32, torsion: Vec<u32>, from_level: u32, base: ComponentSpec) -> SinnottModuleSpec {
    SinnottModuleSpec {
        ell,
        p,
        d: 1,
        components: vec![base],
        rule: Some(GeneratorRule::Stable { from_level, free_rank, torsion_exponents: torsion }),
        explicit_through: Some(0),
        unspecified_beyond: false,
    }
}

fn criterion_4() -> Check {
    let mut failures = Vec::new();
    let mut sequences = 0;
    for (ell, p) in PAIRS {
        for seed in 0..40u64 {
            let shape = SampleShape { rule_probability: 0.6, ..SampleShape::torsion(3) };
            let spec = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed + 7_000), ell, p, &shape).unwrap();
            let module = SinnottModule::new(&spec).unwrap();
            let logs: Vec<u128> = (0..=7).map(|n| level_stats(&module, n).unwrap().log_order.unwrap()).collect();
            for n in 0..=6u32 {
                let m = p.pow(n + 1);
                let c = |e: u128| arith::pow_mod(ell, e as u64, m);
                if c(logs[n as usize + 1]) != c(logs[n as usize]) {
                    failures.push(format!("({ell},{p}) seed {seed}: c_{} ≢ c_{n} mod {p}^{}", n + 1, n + 1));
                }
            }
            sequences += 1;
        }
        let free = SinnottModuleSpec {
            ell,
            p,
            d: 1,
            components: vec![],
            rule: Some(GeneratorRule::Free { rank: 3 }),
            explicit_through: None,
            unspecified_beyond: false,
        };
        let free = SinnottModule::new(&free).unwrap();
        for kind in [LimitKind::RankZl, LimitKind::RankEll] {
            match sinnott_limit(&free, kind, LIMIT_PRECISION) {
                Ok(l) if l.value == 0 => {}
                other => failures.push(format!("free module ({ell},{p}) {kind:?}: {other:?}")),
            }
        }
    }
    // stable modules, p odd: α − r·p^{N−a}·f_1/(p − 1) computed here from its ingredients
    for (ell, p) in [(2u64, 3u64), (2, 5), (3, 7), (2, 7), (7, 3)] {
        let a = a_ell_p(ell, p).unwrap();
        let from = a.max(1) + 1;
        let r = 2u128;
        let base = ComponentSpec { level: 0, orbit_rep: vec![0], free_rank: 1, torsion_exponents: vec![] };
        let module = SinnottModule::new(&stable_spec(ell, p, r as u32, vec![], from, base)).unwrap();
        let modulus = p.pow(LIMIT_PRECISION) as u128;
        let f1 = arith::mult_order(ell, p).unwrap() as u128;
        let inv = arith::inv_mod(p as u128 - 1, modulus).unwrap();
        let shift = r * (p as u128).pow(from - a) % modulus * f1 % modulus * inv % modulus;
        let expected = ((1 + modulus - shift) % modulus) as u64;
        match sinnott_limit(&module, LimitKind::RankZl, LIMIT_PRECISION) {
            Ok(l) if l.value == expected => {}
            other => failures.push(format!("stable rank ({ell},{p}): expected {expected}, got {other:?}")),
        }
        let base = ComponentSpec { level: 0, orbit_rep: vec![0], free_rank: 0, torsion_exponents: vec![2] };
        let module = SinnottModule::new(&stable_spec(ell, p, 0, vec![1, 1], from, base)).unwrap();
        let closed = stable_limit_closed_form(ell, p, LimitKind::Order, 2, 2, from, LIMIT_PRECISION).unwrap();
        match sinnott_limit(&module, LimitKind::Order, LIMIT_PRECISION) {
            Ok(l) if l.value == closed => {}
            other => failures.push(format!("stable order ({ell},{p}): expected {closed}, got {other:?}")),
        }
    }
    collect(failures, format!("{sequences} order sequences, free and stable limits mod p^{LIMIT_PRECISION}"))
}

/// Systems that break one axiom each; every one must be flagged.
fn mutants(sys: &NormicSystem) -> Vec<(String, NormicSystem)> {
    let mut out = Vec::new();
    for n in 0..sys.top() {
        if sys.levels[n].rank() == 0 {
            continue;
        }
        let mut m = sys.clone();
        m.down[n] = ModMatrix::zeros(sys.ring, m.down[n].rows, m.down[n].cols);
        out.push((format!("down[{n}] = 0"), m));
        let mut m = sys.clone();
        m.up[n] = ModMatrix::zeros(sys.ring, m.up[n].rows, m.up[n].cols);
        out.push((format!("up[{n}] = 0"), m));
    }
    for n in 1..sys.levels.len() {
        if sys.levels[n].rank() == 0 {
            continue;
        }
        let mut m = sys.clone();
        m.levels[n].action[0] = m.levels[n].action[0].scale(sys.ell as u128);
        out.push((format!("action at level {n} made singular"), m));
    }
    out
}

fn criterion_5() -> Check {
    let mut failures = Vec::new();
    let (mut systems, mut detected, mut exhaustive) = (0, 0, 0);
    for seed in 0..NORMIC_SPECS {
        let shape = SampleShape {
            max_log_order: Some(NORMIC_LOG_ORDER_CAP),
            max_exponent: 4,
            max_factors: 3,
            ..SampleShape::torsion(2)
        };
        let spec = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed + 31_000), 2, 3, &shape).unwrap();
        let module = SinnottModule::new(&spec).unwrap();
        let sys = match icomplete_to_normic(&module, 2) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        systems += 1;
        if !validate_normic(&sys).holds() {
            failures.push(format!("seed {seed}: constructed system violates the axioms"));
        }
        match psi_isomorphism(&sys) {
            Ok(r) if r.holds() => {}
            other => failures.push(format!("seed {seed}: psi {other:?}")),
        }
        if recover_components(&sys).ok() != torsion_components(&module, 2).ok() {
            failures.push(format!("seed {seed}: recovered invariants differ"));
        }
        for n in 0..sys.top() {
            match split_level(&sys, n) {
                Ok(s) if s.holds => exhaustive += usize::from(s.exhaustive),
                Ok(s) => failures.push(format!("seed {seed} level {n}: {:?}", s.failures)),
                Err(e) => failures.push(format!("seed {seed} level {n}: {e}")),
            }
        }
        for (name, m) in mutants(&sys) {
            if validate_normic(&m).holds() {
                failures.push(format!("seed {seed}: mutant {name} not detected"));
            } else {
                detected += 1;
            }
        }
    }
    collect(failures, format!("{systems} systems, {exhaustive} exhaustive splittings, {detected} mutants detected"))
}

fn p1_input(n: u32) -> StickelbergerInput {
    let a = FrobeniusAssignment::arithmetic(&Curve::projective_line(5).unwrap(), 3, n).unwrap();
    StickelbergerInput::from_descriptors(a, &places(&["t"]), &"t-1".parse().unwrap()).unwrap()
}

fn criterion_6() -> Check {
    let mut failures = Vec::new();
    let input = p1_input(1);
    let series = modify_v0(&build_series(&input, input.default_truncation()).unwrap(), &input).unwrap();
    for a in 0..3u64 {
        let v = series.char_eval(&[a]).unwrap();
        if v.as_integer() != Some(big(1)) {
            failures.push(format!("χ_{a} value {v}"));
        }
    }
    let omega = omega_factors(&input, 2).unwrap();
    if (omega.omega_v0.clone(), omega.omega_s.clone(), omega.z_n) != (big(-124), big(3), 1) {
        failures.push(format!("Ω = ({}, {}), z = {}", omega.omega_v0, omega.omega_s, omega.z_n));
    }
    let raw = verify_class_number_identity(&input, &series, IdentityMode::Raw).unwrap();
    let one = BigRational::from_integer(big(1));
    if !(raw.raw_holds && raw.lhs == big(1) && raw.rhs == one) {
        failures.push(format!("raw identity {} = {}", raw.lhs, raw.rhs));
    }
    collect(failures, "values 1, Ω = (-124, 3), z = 1, raw identity 1 = 1".into())
}

fn elliptic_input(n: u32) -> StickelbergerInput {
    let curve = Curve::from_descriptor(5, "weierstrass:0,0,0,1,0").unwrap();
    let a = FrobeniusAssignment::arithmetic(&curve, 3, n).unwrap();
    StickelbergerInput::from_descriptors(a, &places(&["deg:1"]), &"deg:1".parse().unwrap()).unwrap()
}

fn omega_agrees(r: &OmegaReport) -> bool {
    r.omega_v0_closed_form.as_ref() == Some(&r.omega_v0)
        && r.per_place.iter().all(|f| f.closed_form.as_ref() == Some(&f.direct))
}

fn criterion_7() -> Check {
    let mut failures = Vec::new();
    let curve = Curve::from_descriptor(5, "weierstrass:0,0,0,1,0").unwrap();
    let zeta = curve.zeta_numerator().unwrap();
    if zeta.coeffs != [big(1), big(-2), big(5)] {
        failures.push(format!("P(u) coefficients {:?}", zeta.coeffs));
    }
    let expected = [4i64, 148, 1955524];
    let mut two_route = 0;
    for n in 0..=2u32 {
        let big_n = 3u64.pow(n);
        let by_det = zeta.layer_by_companion(big_n);
        let by_norms = zeta.layer_by_cyclotomic_norms(3, n);
        if by_det != big(expected[n as usize]) || by_norms != by_det {
            failures.push(format!("h(F_{n}): det {by_det}, cyclotomic norms {by_norms}"));
        }
        let input = elliptic_input(n);
        let d = input.default_truncation();
        if d > ELLIPTIC_MAX_TRUNCATION {
            failures.push(format!("level {n}: truncation {d} above {ELLIPTIC_MAX_TRUNCATION}"));
        }
        let series = modify_v0(&build_series(&input, d).unwrap(), &input).unwrap();
        match two_route_check_all(&input, &series) {
            Ok(k) if k == 3usize.pow(n) => two_route += k,
            other => failures.push(format!("level {n}: two-route check {other:?}")),
        }
        let omega = omega_factors(&input, 2).unwrap();
        if !omega_agrees(&omega) {
            failures.push(format!("level {n}: Ω closed form differs from the direct product"));
        }
    }
    let report = imc_check(&elliptic_input(2), &ImcConfig::new(2)).unwrap();
    for row in &report.levels {
        if row.level >= 1 && (row.predicted_exponent != Some(0) || row.verdict != Verdict::Confirmed) {
            failures.push(format!("level {}: {row:?}", row.level));
        }
    }
    for row in report.orbits.iter().filter(|o| o.level >= 1) {
        if row.v_ell_theta != Some(0) || row.predicted_exponent != Some(0) || row.verdict != Verdict::Confirmed {
            failures.push(format!("orbit {:?}: {row:?}", row.rep));
        }
    }
    collect(failures, format!("h = 4, 148, 1955524; {two_route} characters agree on both routes; levels 1, 2 confirmed"))
}

fn criterion_8() -> Check {
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for level in 1..=2u32 {
        let data = CarlitzData::from_descriptor(3, "t", level).unwrap();
        let a = FrobeniusAssignment::carlitz(data);
        let input = StickelbergerInput::from_descriptors(a, &places(&["t"]), &"inf".parse().unwrap()).unwrap();
        let report = imc_check(&input, &ImcConfig { truncation: Some(CARLITZ_TRUNCATION), ..ImcConfig::new(2) }).unwrap();
        for h in report.hypotheses.iter().filter(|h| h.required && !h.holds) {
            let msg = format!("hypothesis: {}", h.name);
            if !failures.contains(&msg) {
                failures.push(msg);
            }
        }
        let series = modify_v0(&build_series(&input, CARLITZ_TRUNCATION).unwrap(), &input).unwrap();
        let theta = theta_element(&input, &series, 2, None).unwrap();
        if theta.orbits.iter().any(|o| o.theta.is_none()) {
            failures.push(format!("level {level}: non-integral θ component"));
        }
        let trivial = vec![0u64; input.assignment.quotient().d as usize];
        let closed = closed_form_poly(&input, &trivial).unwrap();
        let direct = series.char_poly(&trivial);
        if closed.as_ref() != Some(&direct) || !report.certificates.trivial_character_matches {
            failures.push(format!("level {level}: trivial character differs from the genus-0 closed form"));
        }
        if report.congruences.iter().any(|c| !c.holds) {
            failures.push(format!("level {level}: predicted orders break the congruence"));
        }
        rows.push(theta.orbits.iter().map(|o| o.display_value()).collect::<Vec<_>>().join(","));
    }
    collect(failures, format!("θ by level: [{}]", rows.join("] [")))
}

fn criterion_9() -> Check {
    let mut failures = Vec::new();
    let mut ratios = Vec::new();
    let cases: Vec<(StickelbergerInput, u64)> =
        vec![(p1_input(1), 5), (elliptic_input(0), 5), (elliptic_input(1), 5), (elliptic_input(2), 5)];
    for (input, q) in cases {
        let n = input.assignment.level();
        let series = modify_v0(&build_series(&input, input.default_truncation()).unwrap(), &input).unwrap();
        let r = verify_class_number_identity(&input, &series, IdentityMode::Bridged).unwrap();
        let pn = 3u32.pow(n);
        let candidate = BigRational::new(big(pn as i64) * (big(1) - num_traits::pow(BigInt::from(q), pn as usize)), big(1 - q as i64));
        let flagged = r.note.as_deref().is_some_and(|s| s.starts_with("observed arithmetic-tower correction"));
        if r.bridging_ratio.as_ref() != Some(&candidate) || !flagged || !r.raw_holds {
            failures.push(format!("genus {} level {n}: ratio {:?}, candidate {candidate}", input.assignment.genus(), r.bridging_ratio));
        }
        ratios.push(candidate.to_string());
    }
    collect(failures, format!("bridged/raw = {}", ratios.join(", ")))
}

#[test]
fn acceptance() {
    let lines = vec![
        timed(1, Some(BUDGET_1), criterion_1),
        timed(2, Some(BUDGET_2), criterion_2),
        timed(3, None, criterion_3),
        timed(4, None, criterion_4),
        timed(5, None, criterion_5),
        timed(6, Some(BUDGET_6), criterion_6),
        timed(7, Some(BUDGET_7), criterion_7),
        timed(8, Some(BUDGET_8), criterion_8),
        timed(9, None, criterion_9),
    ];
    for l in &lines {
        let verdict = if l.pass { "PASS" } else { "FAIL" };
        let what = if l.pass { l.detail.clone() } else { l.failures.join("; ") };
        println!("criterion {}: {verdict} [{:.2?}] {what}", l.id, l.elapsed);
    }
    for l in &lines {
        match KNOWN_FAILURES.iter().find(|(id, _)| *id == l.id) {
            Some((_, cause)) => {
                let expected = vec![format!("hypothesis: {cause}")];
                assert!(!l.pass && l.failures == expected, "criterion {}: expected only {expected:?}, got {:?}", l.id, l.failures);
            }
            None => assert!(l.pass, "criterion {} failed: {:?}", l.id, l.failures),
        }
    }
}
