//! Sinnott modules given by per-orbit invariants: characteristic ideals, the level-wise
//! rank and order formulas, p-adic limits of the partial sums, and the growth bounds.
//!
//! A module is a product over orbits [ω] of Λ_[ω]^r ⊕ ⊕_j Λ_[ω]/(ℓ^{t_j}). Finitely many
//! orbits are listed explicitly; everything above a cutoff level comes from an optional
//! generator rule, evaluated level by level as a multiset of invariants with multiplicities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::character_lattice::{self, Branch, Character};
use crate::error::{Error, Result};
use crate::iwasawa_algebra::{IdealData, IdealExponent};

/// Orbits longer than this are not enumerated when normalising a representative.
const ORBIT_ENUMERATION_LIMIT: u64 = 1 << 20;
/// Highest level the limit routines will sum to.
pub const MAX_LIMIT_LEVEL: u32 = 64;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ComponentInvariant {
    #[serde(default)]
    pub free_rank: u32,
    #[serde(default)]
    pub torsion_exponents: Vec<u32>,
}

impl ComponentInvariant {
    pub fn new(free_rank: u32, mut torsion_exponents: Vec<u32>) -> Self {
        torsion_exponents.sort_unstable();
        ComponentInvariant { free_rank, torsion_exponents }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion_exponents.is_empty()
    }

    /// dim over the residue field of M_[ω]/ℓM_[ω].
    pub fn local_rank(&self) -> u64 {
        self.free_rank as u64 + self.torsion_exponents.len() as u64
    }

    pub fn torsion_length(&self) -> u64 {
        self.torsion_exponents.iter().map(|&t| t as u64).sum()
    }

    pub fn char_exponent(&self) -> IdealExponent {
        if self.free_rank > 0 {
            IdealExponent::Infinite
        } else {
            IdealExponent::Finite(self.torsion_length() as u32)
        }
    }
}

/// One explicitly listed component, as it appears in the JSON description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub level: u32,
    pub orbit_rep: Vec<u64>,
    #[serde(default)]
    pub free_rank: u32,
    #[serde(default)]
    pub torsion_exponents: Vec<u32>,
}

/// Level ↦ components for the levels above the explicit cutoff.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", content = "params", rename_all = "snake_case")]
pub enum GeneratorRule {
    /// Every orbit carries Λ_[ω]^rank, so the module is Λ^rank.
    Free { rank: u32 },
    /// Every orbit carries Λ_[ω]/(ℓ^exponent), so the module is Λ/ℓ^exponent.
    CyclicTorsion { exponent: u32 },
    /// Each orbit of level m carries Λ_[ω]^{p^m}; locally finitely generated but unbounded.
    Regular,
    /// One orbit per level from `from_level` on, all with the same invariant.
    Stable {
        from_level: u32,
        #[serde(default)]
        free_rank: u32,
        #[serde(default)]
        torsion_exponents: Vec<u32>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SinnottModuleSpec {
    pub ell: u64,
    pub p: u64,
    pub d: u32,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
    #[serde(default)]
    pub rule: Option<GeneratorRule>,
    /// Last level described by `components`; defaults to the highest listed level, or to
    /// "none" when only a rule is given.
    #[serde(default)]
    pub explicit_through: Option<u32>,
    /// When set and no rule is given, levels above the cutoff are unknown rather than zero.
    #[serde(default)]
    pub unspecified_beyond: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub level: u32,
    pub rep: Vec<u64>,
    pub orbit_size: u64,
    pub invariant: ComponentInvariant,
}

/// A validated module description.
#[derive(Clone, Debug, Serialize)]
pub struct SinnottModule {
    pub ell: u64,
    pub p: u64,
    pub d: u32,
    pub components: BTreeMap<(u32, Vec<u64>), Component>,
    pub rule: Option<GeneratorRule>,
    pub explicit_through: Option<u32>,
    pub unspecified_beyond: bool,
}

impl SinnottModuleSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn validate(&self) -> Result<SinnottModule> {
        SinnottModule::new(self)
    }
}

fn orbit_count(p: u64, d: u32, m: u32, f: u64) -> Result<u128> {
    if m == 0 {
        return Ok(1);
    }
    let overflow = || Error::Overflow(format!("|S_{m}| for p = {p}, d = {d}"));
    let top = arith::pow_u128(p, d * m).ok_or_else(overflow)?;
    let bottom = arith::pow_u128(p, d * (m - 1)).ok_or_else(overflow)?;
    Ok((top - bottom) / f as u128)
}

fn checked(x: Option<u128>, what: &str) -> Result<u128> {
    x.ok_or_else(|| Error::Overflow(what.to_string()))
}

impl SinnottModule {
    pub fn new(spec: &SinnottModuleSpec) -> Result<Self> {
        arith::require_ell_p(spec.ell, spec.p)?;
        if spec.d == 0 || spec.d > 16 {
            return Err(Error::invalid(format!("d = {} must lie in 1..=16", spec.d)));
        }
        let mut components = BTreeMap::new();
        for c in &spec.components {
            let comp = normalise(spec, c)?;
            if comp.invariant.is_zero() {
                continue;
            }
            let key = (comp.level, comp.rep.clone());
            if components.insert(key, comp).is_some() {
                return Err(Error::invalid(format!(
                    "orbit of {:?} at level {} listed twice",
                    c.orbit_rep, c.level
                )));
            }
        }
        if let Some(rule) = &spec.rule {
            match rule {
                GeneratorRule::CyclicTorsion { exponent: 0 } => {
                    return Err(Error::invalid("cyclic_torsion exponent must be positive"))
                }
                GeneratorRule::Stable { torsion_exponents, .. } if torsion_exponents.contains(&0) => {
                    return Err(Error::invalid("torsion exponents must be positive"))
                }
                _ => {}
            }
        }
        let max_listed = spec.components.iter().map(|c| c.level).max();
        let explicit_through = match (spec.explicit_through, max_listed) {
            (Some(t), Some(m)) if m > t => {
                return Err(Error::invalid(format!(
                    "component at level {m} lies above explicit_through = {t}"
                )))
            }
            (Some(t), _) => Some(t),
            (None, Some(m)) => Some(m),
            (None, None) if spec.rule.is_some() => None,
            (None, None) => Some(0),
        };
        Ok(SinnottModule {
            ell: spec.ell,
            p: spec.p,
            d: spec.d,
            components,
            rule: spec.rule.clone(),
            explicit_through,
            unspecified_beyond: spec.unspecified_beyond,
        })
    }

    pub fn f(&self, m: u32) -> Result<u64> {
        character_lattice::f_n_closed(self.ell, self.p, m)
    }

    fn is_explicit(&self, m: u32) -> bool {
        self.explicit_through.is_some_and(|t| m <= t)
    }

    /// Whether the components at level m are known.
    pub fn is_determined(&self, m: u32) -> bool {
        self.is_explicit(m) || self.rule.is_some() || !self.unspecified_beyond
    }

    /// The components of ε_m M as (invariant, number of orbits carrying it).
    pub fn level_content(&self, m: u32) -> Result<Vec<(ComponentInvariant, u128)>> {
        if self.is_explicit(m) {
            return Ok(self
                .components
                .range((m, Vec::new())..(m + 1, Vec::new()))
                .map(|(_, c)| (c.invariant.clone(), 1))
                .collect());
        }
        if !self.is_determined(m) {
            return Err(Error::Truncation(format!("level {m} lies beyond the described levels")));
        }
        let Some(rule) = &self.rule else {
            return Ok(Vec::new());
        };
        let count = || orbit_count(self.p, self.d, m, self.f(m)?);
        Ok(match rule {
            GeneratorRule::Free { rank } => {
                if *rank == 0 {
                    Vec::new()
                } else {
                    vec![(ComponentInvariant::new(*rank, vec![]), count()?)]
                }
            }
            GeneratorRule::CyclicTorsion { exponent } => {
                vec![(ComponentInvariant::new(0, vec![*exponent]), count()?)]
            }
            GeneratorRule::Regular => {
                let rank = self
                    .p
                    .checked_pow(m)
                    .filter(|&r| r <= u32::MAX as u64)
                    .ok_or_else(|| Error::Overflow(format!("p^{m}")))?;
                vec![(ComponentInvariant::new(rank as u32, vec![]), count()?)]
            }
            GeneratorRule::Stable { from_level, free_rank, torsion_exponents } => {
                let inv = ComponentInvariant::new(*free_rank, torsion_exponents.clone());
                if m < *from_level || inv.is_zero() {
                    Vec::new()
                } else {
                    vec![(inv, 1)]
                }
            }
        })
    }

    /// All free ranks vanish, including those produced by the rule.
    pub fn is_torsion(&self) -> bool {
        let explicit = self.components.values().all(|c| c.invariant.free_rank == 0);
        let rule = match &self.rule {
            None => true,
            Some(GeneratorRule::Free { rank }) => *rank == 0,
            Some(GeneratorRule::CyclicTorsion { .. }) => true,
            Some(GeneratorRule::Regular) => false,
            Some(GeneratorRule::Stable { free_rank, .. }) => *free_rank == 0,
        };
        explicit && rule
    }

    /// Per-level normalised counts r_m, ρ_m, t_m read straight off the invariants.
    pub fn normalised_counts(&self, m: u32) -> Result<(u128, u128, u128)> {
        let mut r = 0u128;
        let mut rho = 0u128;
        let mut t = 0u128;
        for (inv, mult) in self.level_content(m)? {
            r = checked(r.checked_add(mult * inv.free_rank as u128), "r_m")?;
            rho = checked(
                mult.checked_mul(inv.local_rank() as u128).and_then(|x| rho.checked_add(x)),
                "rho_m",
            )?;
            t = checked(
                mult.checked_mul(inv.torsion_length() as u128).and_then(|x| t.checked_add(x)),
                "t_m",
            )?;
        }
        Ok((r, rho, t))
    }
}

fn normalise(spec: &SinnottModuleSpec, c: &ComponentSpec) -> Result<Component> {
    let (p, d, m) = (spec.p, spec.d, c.level);
    if c.orbit_rep.len() != d as usize {
        return Err(Error::invalid(format!(
            "orbit_rep {:?} must have {d} entries",
            c.orbit_rep
        )));
    }
    if c.torsion_exponents.contains(&0) {
        return Err(Error::invalid("torsion exponents must be positive"));
    }
    let modulus = p
        .checked_pow(m)
        .ok_or_else(|| Error::invalid(format!("level {m} too large")))?;
    if c.orbit_rep.iter().any(|&x| x >= modulus) {
        return Err(Error::invalid(format!(
            "orbit_rep {:?} is not reduced mod {p}^{m}",
            c.orbit_rep
        )));
    }
    let level = character_lattice::character_level(p, m, &c.orbit_rep);
    if level != m {
        return Err(Error::invalid(format!(
            "orbit_rep {:?} has level {level}, not {m}",
            c.orbit_rep
        )));
    }
    let f = character_lattice::f_n_direct(spec.ell, p, m)?;
    if f > ORBIT_ENUMERATION_LIMIT {
        return Err(Error::Budget(format!("orbit of size {f} at level {m}")));
    }
    let orbit = character_lattice::orbit_of(&Character::new(p, m, c.orbit_rep.clone()), spec.ell);
    Ok(Component {
        level: m,
        rep: orbit.rep.clone(),
        orbit_size: orbit.size() as u64,
        invariant: ComponentInvariant::new(c.free_rank, c.torsion_exponents.clone()),
    })
}

/// The characteristic ideal: one exponent per explicit orbit, plus the rule's pattern above
/// the cutoff. Orbits not listed carry the unit ideal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharIdealData {
    pub explicit: IdealData,
    pub tail: Option<CharIdealTail>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CharIdealTail {
    /// Every orbit above `above_level` has this exponent.
    Uniform { above_level: Option<u32>, exponent: IdealExponent },
    /// One orbit per level from `from_level` has this exponent, the rest the unit ideal.
    OnePerLevel { from_level: u32, exponent: IdealExponent },
}

impl CharIdealData {
    pub fn exponent(&self, level: u32, rep: &[u64]) -> IdealExponent {
        self.explicit
            .exponents
            .get(&(level, rep.to_vec()))
            .copied()
            .unwrap_or(IdealExponent::Finite(0))
    }

    pub fn is_unit(&self) -> bool {
        self.explicit.exponents.values().all(|&e| e == IdealExponent::Finite(0))
            && match &self.tail {
                None => true,
                Some(CharIdealTail::Uniform { exponent, .. })
                | Some(CharIdealTail::OnePerLevel { exponent, .. }) => *exponent == IdealExponent::Finite(0),
            }
    }
}

pub fn characteristic_ideal(m: &SinnottModule) -> CharIdealData {
    let exponents = m
        .components
        .iter()
        .map(|(k, c)| (k.clone(), c.invariant.char_exponent()))
        .collect();
    let tail = m.rule.as_ref().map(|rule| match rule {
        GeneratorRule::Free { rank } => CharIdealTail::Uniform {
            above_level: m.explicit_through,
            exponent: if *rank > 0 { IdealExponent::Infinite } else { IdealExponent::Finite(0) },
        },
        GeneratorRule::CyclicTorsion { exponent } => CharIdealTail::Uniform {
            above_level: m.explicit_through,
            exponent: IdealExponent::Finite(*exponent),
        },
        GeneratorRule::Regular => CharIdealTail::Uniform {
            above_level: m.explicit_through,
            exponent: IdealExponent::Infinite,
        },
        GeneratorRule::Stable { from_level, free_rank, torsion_exponents } => {
            let inv = ComponentInvariant::new(*free_rank, torsion_exponents.clone());
            CharIdealTail::OnePerLevel {
                from_level: (*from_level).max(m.explicit_through.map_or(0, |t| t + 1)),
                exponent: inv.char_exponent(),
            }
        }
    });
    CharIdealData { explicit: IdealData { exponents }, tail }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiplicativityReport {
    pub holds: bool,
    pub orbits_checked: usize,
    pub levels_checked: u32,
    pub violations: Vec<String>,
}

fn add_exponents(a: IdealExponent, b: IdealExponent) -> IdealExponent {
    match (a, b) {
        (IdealExponent::Finite(x), IdealExponent::Finite(y)) => IdealExponent::Finite(x + y),
        _ => IdealExponent::Infinite,
    }
}

/// Given 0 → sub → mid → quot → 0 componentwise, checks Ch(mid) = Ch(sub)·Ch(quot) orbit by
/// orbit, and the same additivity for the aggregated per-level torsion lengths and ranks.
pub fn char_ideal_multiplicativity_check(
    sub: &SinnottModule,
    mid: &SinnottModule,
    quot: &SinnottModule,
) -> Result<MultiplicativityReport> {
    if (sub.ell, sub.p, sub.d) != (mid.ell, mid.p, mid.d) || (quot.ell, quot.p, quot.d) != (mid.ell, mid.p, mid.d) {
        return Err(Error::invalid("the three modules must share ell, p and d"));
    }
    let (cs, cm, cq) = (characteristic_ideal(sub), characteristic_ideal(mid), characteristic_ideal(quot));
    let mut keys: Vec<&(u32, Vec<u64>)> = cs
        .explicit
        .exponents
        .keys()
        .chain(cm.explicit.exponents.keys())
        .chain(cq.explicit.exponents.keys())
        .collect();
    keys.sort();
    keys.dedup();
    let mut violations = Vec::new();
    let explicit_top = [sub, mid, quot].iter().filter_map(|m| m.explicit_through).max().unwrap_or(0);
    for (level, rep) in &keys {
        if [sub, mid, quot].iter().any(|m| !m.is_explicit(*level)) {
            continue;
        }
        let lhs = cm.exponent(*level, rep);
        let rhs = add_exponents(cs.exponent(*level, rep), cq.exponent(*level, rep));
        if lhs != rhs {
            violations.push(format!("orbit {rep:?} at level {level}: {lhs:?} ≠ {rhs:?}"));
        }
    }
    let levels_checked = explicit_top + 3;
    for level in 0..=levels_checked {
        let (ms, mm, mq) = (
            sub.normalised_counts(level)?,
            mid.normalised_counts(level)?,
            quot.normalised_counts(level)?,
        );
        if mm.0 != ms.0 + mq.0 {
            violations.push(format!("level {level}: free ranks {} ≠ {} + {}", mm.0, ms.0, mq.0));
        }
        if mm.0 == 0 && mm.2 != ms.2 + mq.2 {
            violations.push(format!("level {level}: torsion lengths {} ≠ {} + {}", mm.2, ms.2, mq.2));
        }
    }
    Ok(MultiplicativityReport {
        holds: violations.is_empty(),
        orbits_checked: keys.len(),
        levels_checked: levels_checked + 1,
        violations,
    })
}

/// Ranks and orders of ε_n M and of M(n) = ⊕_{m ≤ n} ε_m M (equivalently M/I_n M).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LevelStats {
    pub level: u32,
    pub f: u64,
    pub r: u128,
    pub rho: u128,
    pub t: Option<u128>,
    pub level_rank_zl: u128,
    pub level_rank_ell: u128,
    pub level_log_order: Option<u128>,
    pub rank_zl: u128,
    pub rank_ell: u128,
    /// v_ℓ |M(n)| when the module is torsion.
    pub log_order: Option<u128>,
    pub branch: Branch,
}

/// Σ_{m ≤ n} f_m x_m written as in the three branch formulas.
fn branch_formula(ell: u64, p: u64, xs: &[u128]) -> Result<u128> {
    let a = character_lattice::a_ell_p(ell, p)?;
    let pw = |e: u32| checked(arith::pow_u128(p, e), "p-power");
    let tail = |from: usize| -> Result<u128> {
        let mut s = 0u128;
        for (m, &x) in xs.iter().enumerate().skip(from) {
            let m = m as u32;
            let term = if m <= a { x } else { checked(x.checked_mul(pw(m - a)?), "branch term")? };
            s = checked(s.checked_add(term), "branch sum")?;
        }
        Ok(s)
    };
    let x = |m: usize| xs.get(m).copied().unwrap_or(0);
    match character_lattice::branch(ell, p) {
        Branch::OddP => {
            let f1 = arith::mult_order(ell, p).expect("unit") as u128;
            checked(f1.checked_mul(tail(1)?).and_then(|s| s.checked_add(x(0))), "rank")
        }
        Branch::TwoEllOneModFour => tail(0),
        Branch::TwoEllThreeModFour => {
            let inner = tail(2)?;
            checked(inner.checked_mul(2).and_then(|s| s.checked_add(x(0) + x(1))), "rank")
        }
    }
}

fn direct_level_sum(module: &SinnottModule, m: u32, weight: impl Fn(&ComponentInvariant) -> u64) -> Result<u128> {
    let mut s = 0u128;
    if module.is_explicit(m) {
        for (_, c) in module.components.range((m, Vec::new())..(m + 1, Vec::new())) {
            let term = (weight(&c.invariant) as u128).checked_mul(c.orbit_size as u128);
            s = checked(term.and_then(|t| s.checked_add(t)), "direct sum")?;
        }
        return Ok(s);
    }
    let f = character_lattice::f_n_direct(module.ell, module.p, m)? as u128;
    for (inv, mult) in module.level_content(m)? {
        let term = mult
            .checked_mul(weight(&inv) as u128)
            .and_then(|t| t.checked_mul(f));
        s = checked(term.and_then(|t| s.checked_add(t)), "direct sum")?;
    }
    Ok(s)
}

/// Level statistics computed twice: by summing orbit sizes over the components, and by the
/// closed branch formulas applied to r_m, ρ_m, t_m. Disagreement is a cross-check error.
pub fn level_stats(module: &SinnottModule, n: u32) -> Result<LevelStats> {
    let torsion = module.is_torsion();
    let mut rs = Vec::new();
    let mut rhos = Vec::new();
    let mut ts = Vec::new();
    let (mut rank_zl, mut rank_ell, mut log_order) = (0u128, 0u128, 0u128);
    let mut last = (0u128, 0u128, 0u128);
    for m in 0..=n {
        let lz = direct_level_sum(module, m, |c| c.free_rank as u64)?;
        let le = direct_level_sum(module, m, |c| c.local_rank())?;
        let lo = direct_level_sum(module, m, |c| c.torsion_length())?;
        let f = character_lattice::f_n_direct(module.ell, module.p, m)? as u128;
        for (name, v) in [("r", lz), ("rho", le), ("t", lo)] {
            if v % f != 0 {
                return Err(Error::cross(format!("{name}_{m} = {v}/{f} is not integral")));
            }
        }
        let counts = module.normalised_counts(m)?;
        if (lz / f, le / f, lo / f) != counts {
            return Err(Error::cross(format!(
                "level {m}: normalised counts {:?} disagree with invariants {counts:?}",
                (lz / f, le / f, lo / f)
            )));
        }
        rs.push(counts.0);
        rhos.push(counts.1);
        ts.push(counts.2);
        rank_zl = checked(rank_zl.checked_add(lz), "rank")?;
        rank_ell = checked(rank_ell.checked_add(le), "rank")?;
        log_order = checked(log_order.checked_add(lo), "order")?;
        last = (lz, le, lo);
    }
    let closed = (
        branch_formula(module.ell, module.p, &rs)?,
        branch_formula(module.ell, module.p, &rhos)?,
        branch_formula(module.ell, module.p, &ts)?,
    );
    if closed != (rank_zl, rank_ell, log_order) {
        return Err(Error::cross(format!(
            "level {n}: closed forms {closed:?} vs direct sums {:?}",
            (rank_zl, rank_ell, log_order)
        )));
    }
    Ok(LevelStats {
        level: n,
        f: character_lattice::f_n_closed(module.ell, module.p, n)?,
        r: rs[n as usize],
        rho: rhos[n as usize],
        t: torsion.then_some(ts[n as usize]),
        level_rank_zl: last.0,
        level_rank_ell: last.1,
        level_log_order: torsion.then_some(last.2),
        rank_zl,
        rank_ell,
        log_order: torsion.then_some(log_order),
        branch: character_lattice::branch(module.ell, module.p),
    })
}

/// M/I_n M; the same numbers as M(n) when Γ_n = Γ/Γ^{p^n}.
pub fn quotient_stats(module: &SinnottModule, n: u32) -> Result<LevelStats> {
    level_stats(module, n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    RankZl,
    RankEll,
    Order,
}

impl std::str::FromStr for LimitKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rank_zl" | "rank-zl" | "rank_Zl" => Ok(LimitKind::RankZl),
            "rank_ell" | "rank-ell" | "rank_l" => Ok(LimitKind::RankEll),
            "order" => Ok(LimitKind::Order),
            _ => Err(Error::invalid(format!("unknown limit kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CongruenceRow {
    pub n: u32,
    /// The sequence is compared mod p^exponent between n and n + 1.
    pub exponent: u32,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SinnottLimit {
    pub kind: LimitKind,
    pub p: u64,
    pub precision: u32,
    pub modulus: u64,
    /// The limit mod p^precision.
    pub value: u64,
    /// Every term beyond this level agrees with this level's term mod p^precision.
    pub stabilized_at: u32,
    pub stabilization_criterion: String,
    pub congruences: Vec<CongruenceRow>,
}

impl SinnottLimit {
    pub fn congruences_hold(&self) -> bool {
        self.congruences.iter().all(|c| c.holds)
    }
}

fn limit_modulus(p: u64, pi: u32) -> Result<u64> {
    if pi == 0 {
        return Err(Error::invalid("precision must be positive"));
    }
    p.checked_pow(pi)
        .filter(|&m| m < 1 << 62)
        .ok_or_else(|| Error::invalid(format!("{p}^{pi} exceeds the supported modulus")))
}

/// Exact partial sums Σ_{m ≤ n} f_m x_m for n = 0..=top, with x read by `pick`.
fn partial_sums(module: &SinnottModule, top: u32, pick: fn((u128, u128, u128)) -> u128) -> Result<Vec<u128>> {
    let mut out = Vec::with_capacity(top as usize + 1);
    let mut acc = 0u128;
    for m in 0..=top {
        let f = module.f(m)? as u128;
        let x = pick(module.normalised_counts(m)?);
        acc = checked(x.checked_mul(f).and_then(|v| acc.checked_add(v)), "partial sum")?;
        out.push(acc);
    }
    Ok(out)
}

/// The p-adic limit of rank_Zℓ M(n), rank_ℓ M(n) or |M(n)|, mod p^π.
pub fn sinnott_limit(module: &SinnottModule, kind: LimitKind, pi: u32) -> Result<SinnottLimit> {
    let (ell, p) = (module.ell, module.p);
    let modulus = limit_modulus(p, pi)?;
    if kind == LimitKind::Order && !module.is_torsion() {
        return Err(Error::invalid("the order limit needs a torsion module"));
    }
    // first level m* from which every increment vanishes mod p^π
    let mut first = None;
    for m in 1..=MAX_LIMIT_LEVEL {
        let f = module.f(m)?;
        let vanishes = match kind {
            LimitKind::Order => arith::pow_mod(ell, f, modulus) == 1,
            _ => f % modulus == 0,
        };
        if vanishes {
            first = Some(m);
            break;
        }
    }
    let first = first.ok_or_else(|| Error::Truncation(format!("no stabilization below level {MAX_LIMIT_LEVEL}")))?;
    let top = (first - 1).max(module.explicit_through.unwrap_or(0));
    if !(0..=top.max(first)).all(|m| module.is_determined(m)) {
        return Err(Error::Truncation(format!(
            "precision {pi} needs levels up to {}, described only through {}",
            top.max(first),
            module.explicit_through.unwrap_or(0)
        )));
    }
    let criterion = match kind {
        LimitKind::Order => format!("{ell}^f_m ≡ 1 mod {p}^{pi} for m ≥ {first}"),
        _ => format!("{p}^{pi} divides f_m for m ≥ {first}"),
    };
    let pick: fn((u128, u128, u128)) -> u128 = match kind {
        LimitKind::RankZl => |c| c.0,
        LimitKind::RankEll => |c| c.1,
        LimitKind::Order => |c| c.2,
    };
    let check_top = top.max(first).max(6);
    let sums = partial_sums(module, check_top, pick)?;
    let term = |v: u128, m: u64| -> u64 {
        match kind {
            LimitKind::Order => arith::pow_mod(ell, (v % (m / p * (p - 1)) as u128) as u64, m),
            _ => (v % m as u128) as u64,
        }
    };
    let mut congruences = Vec::new();
    for n in 0..check_top {
        let exponent = match kind {
            LimitKind::Order => n + 1,
            _ => arith::v_p(module.f(n + 1)? as u128, p).unwrap_or(0),
        };
        let Some(m) = p.checked_pow(exponent).filter(|&m| m < 1 << 62) else { break };
        let holds = if m == 1 {
            true
        } else {
            term(sums[n as usize], m) == term(sums[n as usize + 1], m)
        };
        congruences.push(CongruenceRow { n, exponent, holds });
    }
    let value = term(sums[top as usize], modulus);
    // the tail really is constant mod p^π up to the checked level
    for n in top..check_top {
        if term(sums[n as usize + 1], modulus) != value {
            return Err(Error::cross(format!("partial sum at level {} moved mod {p}^{pi}", n + 1)));
        }
    }
    Ok(SinnottLimit {
        kind,
        p,
        precision: pi,
        modulus,
        value,
        stabilized_at: top,
        stabilization_criterion: criterion,
        congruences,
    })
}

/// Limit for a module whose normalised count is constant, equal to `ratio`, from level N ≥ a(ℓ,p):
/// the rank limit is α − ratio·f_N/(p−1) and the order limit is ℓ raised to the same
/// expression with α replaced by β. `base` is α or β, the partial sum through level N − 1.
pub fn stable_limit_closed_form(ell: u64, p: u64, kind: LimitKind, base: u128, ratio: u128, from_level: u32, pi: u32) -> Result<u64> {
    let a = character_lattice::a_ell_p(ell, p)?;
    let lowest = if character_lattice::branch(ell, p) == Branch::TwoEllThreeModFour { a.max(2) } else { a };
    if from_level < lowest {
        return Err(Error::invalid(format!("stabilization level {from_level} must be at least {lowest}")));
    }
    let modulus = limit_modulus(p, pi)?;
    let m = modulus as u128;
    let inv = arith::inv_mod((p - 1) as u128 % m, m).unwrap_or(0);
    let f_n = character_lattice::f_n_closed(ell, p, from_level)? as u128 % m;
    let shift = f_n * inv % m * (ratio % m) % m;
    match kind {
        LimitKind::Order => {
            // ℓ^{−ratio·f_N/(p−1)} = u^{−ratio·w} with u a principal unit
            let (u, w) = if p == 2 {
                (ell % modulus, f_n)
            } else {
                let f1 = arith::mult_order(ell, p).expect("unit");
                let pw = p.pow(from_level - a) as u128 % m;
                (arith::pow_mod(ell, f1, modulus), pw * inv % m)
            };
            let y = (m - (ratio % m) * w % m) % m;
            let phi = (modulus / p * (p - 1)) as u128;
            let head = arith::pow_mod(ell, (base % phi) as u64, modulus);
            Ok(arith::mul_mod(head, arith::pow_mod(u, y as u64, modulus), modulus))
        }
        _ => Ok(((base % m + m - shift) % m) as u64),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WashingtonRow {
    pub level: u32,
    pub f: u64,
    pub nonzero: bool,
    pub log_order: u128,
    pub rank_ell: u128,
    /// v_ℓ|ε_m M| ≥ rank_ℓ ε_m M ≥ f_m when ε_m M ≠ 0.
    pub level_bound: bool,
    /// v_ℓ|M(m)| ≥ rank_ℓ M(m) ≥ c·p^m when ε_m M ≠ 0.
    pub cumulative_bound: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WashingtonReport {
    pub c_numerator: u64,
    pub c_denominator: u64,
    pub rows: Vec<WashingtonRow>,
    pub holds: bool,
}

pub fn washington_bound_check(module: &SinnottModule, n: u32) -> Result<WashingtonReport> {
    if !module.is_torsion() {
        return Err(Error::invalid("the growth bound concerns torsion modules"));
    }
    let (cn, cd) = character_lattice::c_ell_p(module.ell, module.p)?;
    let mut rows = Vec::new();
    for m in 0..=n {
        let s = level_stats(module, m)?;
        let nonzero = s.level_rank_ell > 0;
        let lo = s.level_log_order.unwrap_or(0);
        let level_bound = !nonzero || (lo >= s.level_rank_ell && s.level_rank_ell >= s.f as u128);
        let total = s.log_order.unwrap_or(0);
        let pm = checked(arith::pow_u128(module.p, m), "p^m")?;
        let cumulative_bound = !nonzero
            || (total >= s.rank_ell
                && checked(s.rank_ell.checked_mul(cd as u128), "bound")? >= checked(pm.checked_mul(cn as u128), "bound")?);
        rows.push(WashingtonRow {
            level: m,
            f: s.f,
            nonzero,
            log_order: lo,
            rank_ell: s.level_rank_ell,
            level_bound,
            cumulative_bound,
        });
    }
    let holds = rows.iter().all(|r| r.level_bound && r.cumulative_bound);
    Ok(WashingtonReport { c_numerator: cn, c_denominator: cd, rows, holds })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FiniteGeneration {
    Bounded { sup: u64 },
    Unbounded { witness_level: u32, local_rank: u64 },
    UnknownBeyond { bound: u32, sup_so_far: u64 },
}

/// M is finitely generated iff its local ranks dim M_[ω]/ℓM_[ω] are bounded.
pub fn finitely_generated_check(module: &SinnottModule) -> Result<FiniteGeneration> {
    let explicit_sup = module.components.values().map(|c| c.invariant.local_rank()).max().unwrap_or(0);
    let through = module.explicit_through;
    let rule_sup = match &module.rule {
        None if module.unspecified_beyond => {
            return Ok(FiniteGeneration::UnknownBeyond { bound: through.unwrap_or(0), sup_so_far: explicit_sup })
        }
        None => 0,
        Some(GeneratorRule::Free { rank }) => *rank as u64,
        Some(GeneratorRule::CyclicTorsion { .. }) => 1,
        Some(GeneratorRule::Stable { free_rank, torsion_exponents, .. }) => {
            ComponentInvariant::new(*free_rank, torsion_exponents.clone()).local_rank()
        }
        Some(GeneratorRule::Regular) => {
            // p^m eventually exceeds every explicit rank
            let mut m = through.map_or(0, |t| t + 1);
            while module.p.pow(m) <= explicit_sup {
                m += 1;
            }
            return Ok(FiniteGeneration::Unbounded { witness_level: m, local_rank: module.p.pow(m) });
        }
    };
    Ok(FiniteGeneration::Bounded { sup: explicit_sup.max(rule_sup) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(ell: u64, p: u64, d: u32, comps: Vec<ComponentSpec>, rule: Option<GeneratorRule>) -> SinnottModule {
        SinnottModuleSpec { ell, p, d, components: comps, rule, explicit_through: None, unspecified_beyond: false }
            .validate()
            .unwrap()
    }

    fn comp(level: u32, rep: Vec<u64>, free_rank: u32, torsion: Vec<u32>) -> ComponentSpec {
        ComponentSpec { level, orbit_rep: rep, free_rank, torsion_exponents: torsion }
    }

    #[test]
    fn zero_module() {
        let m = spec(2, 3, 1, vec![], None);
        assert!(characteristic_ideal(&m).is_unit());
        let s = level_stats(&m, 4).unwrap();
        assert_eq!((s.rank_zl, s.rank_ell, s.log_order), (0, 0, Some(0)));
    }

    #[test]
    fn char_ideal_examples() {
        let m = spec(2, 3, 1, vec![comp(1, vec![1], 0, vec![2])], None);
        let ch = characteristic_ideal(&m);
        assert_eq!(ch.exponent(1, &[1]), IdealExponent::Finite(2));
        assert_eq!(ch.exponent(0, &[0]), IdealExponent::Finite(0));
        let m = spec(2, 3, 1, vec![comp(1, vec![2], 1, vec![])], None);
        assert_eq!(characteristic_ideal(&m).exponent(1, &[1]), IdealExponent::Infinite);
    }

    #[test]
    fn representatives_are_normalised() {
        let m = spec(2, 3, 1, vec![comp(2, vec![7], 0, vec![1])], None);
        assert!(m.components.contains_key(&(2, vec![1])));
        let dup = SinnottModuleSpec {
            ell: 2,
            p: 3,
            d: 1,
            components: vec![comp(1, vec![1], 0, vec![1]), comp(1, vec![2], 0, vec![1])],
            rule: None,
            explicit_through: None,
            unspecified_beyond: false,
        };
        assert!(dup.validate().is_err());
        let bad_level = SinnottModuleSpec { components: vec![comp(2, vec![3], 0, vec![1])], ..dup };
        assert!(bad_level.validate().is_err());
    }

    #[test]
    fn multiplicativity_examples() {
        let sub = spec(2, 3, 1, vec![comp(1, vec![1], 0, vec![1])], None);
        let mid = spec(2, 3, 1, vec![comp(1, vec![1], 0, vec![2])], None);
        let quot = spec(2, 3, 1, vec![comp(1, vec![1], 0, vec![1])], None);
        assert!(char_ideal_multiplicativity_check(&sub, &mid, &quot).unwrap().holds);
        let wrong = spec(2, 3, 1, vec![comp(1, vec![1], 0, vec![2])], None);
        let r = char_ideal_multiplicativity_check(&sub, &mid, &wrong).unwrap();
        assert!(!r.holds && !r.violations.is_empty());
    }

    #[test]
    fn free_module_ranks() {
        for (ell, p, d) in [(2u64, 3u64, 1u32), (3, 2, 2), (5, 2, 1), (2, 5, 2)] {
            let m = spec(ell, p, d, vec![], Some(GeneratorRule::Free { rank: 3 }));
            for n in 0..=4u32 {
                let s = level_stats(&m, n).unwrap();
                let pd = p.pow(d) as u128;
                let geometric: u128 = (1..=n).map(|k| pd.pow(k - 1)).sum();
                assert_eq!(s.rank_zl, 3 + 3 * (pd - 1) * geometric);
                assert_eq!(s.rank_zl, s.rank_ell);
            }
        }
    }

    #[test]
    fn small_order_example() {
        // ε_0 = Z/2, ε_1 = Z_2[μ_3]/(2)
        let m = spec(2, 3, 1, vec![comp(0, vec![0], 0, vec![1]), comp(1, vec![1], 0, vec![1])], None);
        assert_eq!(level_stats(&m, 1).unwrap().log_order, Some(3));
    }

    #[test]
    fn free_limit_is_zero() {
        let m = spec(2, 3, 2, vec![], Some(GeneratorRule::Free { rank: 2 }));
        for kind in [LimitKind::RankZl, LimitKind::RankEll] {
            let lim = sinnott_limit(&m, kind, 5).unwrap();
            assert_eq!(lim.value, 0);
            assert!(lim.congruences_hold());
        }
    }

    #[test]
    fn eventually_zero_limit() {
        let m = spec(2, 3, 1, vec![comp(0, vec![0], 0, vec![3])], None);
        let lim = sinnott_limit(&m, LimitKind::Order, 4).unwrap();
        assert_eq!(lim.value, 8);
    }

    #[test]
    fn stable_limit_matches_closed_form() {
        for (ell, p) in [(2u64, 3u64), (2, 7), (5, 2), (3, 2), (7, 3)] {
            let a = character_lattice::a_ell_p(ell, p).unwrap();
            let from = a.max(2);
            let rule = GeneratorRule::Stable { from_level: from, free_rank: 2, torsion_exponents: vec![] };
            let m = spec(ell, p, 1, vec![comp(0, vec![0], 1, vec![])], Some(rule));
            let alpha = 1u128;
            let lim = sinnott_limit(&m, LimitKind::RankZl, 6).unwrap();
            let closed = stable_limit_closed_form(ell, p, LimitKind::RankZl, alpha, 2, from, 6).unwrap();
            assert_eq!(lim.value, closed, "({ell},{p})");
            let rule = GeneratorRule::Stable { from_level: from, free_rank: 0, torsion_exponents: vec![1, 2] };
            let m = spec(ell, p, 1, vec![comp(0, vec![0], 0, vec![2])], Some(rule));
            let lim = sinnott_limit(&m, LimitKind::Order, 6).unwrap();
            let closed = stable_limit_closed_form(ell, p, LimitKind::Order, 2, 3, from, 6).unwrap();
            assert_eq!(lim.value, closed, "order ({ell},{p})");
            assert!(lim.congruences_hold());
        }
    }

    #[test]
    fn washington_examples() {
        let m = spec(2, 3, 1, vec![], Some(GeneratorRule::Stable { from_level: 0, free_rank: 0, torsion_exponents: vec![1] }));
        let r = washington_bound_check(&m, 5).unwrap();
        assert!(r.holds);
        for row in &r.rows {
            assert_eq!(row.log_order, row.f as u128);
            assert_eq!(row.rank_ell, row.f as u128);
        }
        let m = spec(2, 3, 1, vec![comp(2, vec![1], 0, vec![1])], None);
        let r = washington_bound_check(&m, 3).unwrap();
        assert_eq!(r.rows[2].log_order, 6);
        assert!(!r.rows[3].nonzero);
    }

    #[test]
    fn finite_generation() {
        let m = spec(2, 3, 1, vec![], Some(GeneratorRule::Regular));
        assert!(matches!(finitely_generated_check(&m).unwrap(), FiniteGeneration::Unbounded { .. }));
        let m = spec(2, 3, 1, vec![comp(1, vec![1], 2, vec![1])], None);
        assert_eq!(finitely_generated_check(&m).unwrap(), FiniteGeneration::Bounded { sup: 3 });
        let mut s = SinnottModuleSpec::from_json(r#"{"ell":2,"p":3,"d":1,"components":[],"unspecified_beyond":true}"#).unwrap();
        assert!(matches!(
            finitely_generated_check(&s.validate().unwrap()).unwrap(),
            FiniteGeneration::UnknownBeyond { .. }
        ));
        s.unspecified_beyond = false;
        assert_eq!(finitely_generated_check(&s.validate().unwrap()).unwrap(), FiniteGeneration::Bounded { sup: 0 });
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"ell":2,"p":3,"d":1,
            "components":[{"level":1,"orbit_rep":[1],"torsion_exponents":[1,2]}],
            "rule":{"name":"stable","params":{"from_level":3,"torsion_exponents":[1]}}}"#;
        let s = SinnottModuleSpec::from_json(text).unwrap();
        assert_eq!(SinnottModuleSpec::from_json(&s.to_json()).unwrap(), s);
        let m = s.validate().unwrap();
        assert_eq!(m.level_content(2).unwrap(), vec![]);
        assert_eq!(m.level_content(4).unwrap().len(), 1);
    }
}
