//! The finite-level algebras Λ_n = Z/ℓ^K[Γ_n]: orbit idempotents, component maps,
//! canonical generators of closed ideals and augmentation ideals.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use crate::character_lattice::{enumerate_orbits, GammaQuotient, Orbit, OrbitTable};
use crate::coeff_rings::{
    hensel_cyclotomic_factors, CycloExact, CyclotomicFactorBasis, UnramifiedElement, Zl,
};
use crate::error::{Error, Result};
use crate::linalg::{rank_mod_ell, HowellForm, ModMatrix};

/// Groups up to this order are checked by explicit convolution.
pub const DIRECT_CHECK_LIMIT: u64 = 256;
/// Groups up to this order also get a Gaussian-elimination rank check.
pub const MATRIX_RANK_LIMIT: u64 = 128;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraElement {
    quotient: GammaQuotient,
    ring: Zl,
    coeffs: Vec<u128>,
}

impl AlgebraElement {
    pub fn zero(quotient: GammaQuotient, ring: Zl) -> Self {
        AlgebraElement { quotient, ring, coeffs: vec![0; quotient.len()] }
    }

    pub fn one(quotient: GammaQuotient, ring: Zl) -> Self {
        Self::group_element(quotient, ring, 0)
    }

    pub fn group_element(quotient: GammaQuotient, ring: Zl, index: u64) -> Self {
        let mut x = Self::zero(quotient, ring);
        x.coeffs[index as usize] = 1;
        x
    }

    pub fn from_coeffs(quotient: GammaQuotient, ring: Zl, coeffs: Vec<u128>) -> Result<Self> {
        if coeffs.len() != quotient.len() {
            return Err(Error::invalid("coefficient vector length differs from |Γ_n|"));
        }
        let coeffs = coeffs.into_iter().map(|c| ring.reduce(c)).collect();
        Ok(AlgebraElement { quotient, ring, coeffs })
    }

    pub fn quotient(&self) -> GammaQuotient {
        self.quotient
    }

    pub fn ring(&self) -> Zl {
        self.ring
    }

    pub fn coeffs(&self) -> &[u128] {
        &self.coeffs
    }

    pub fn coeff(&self, index: u64) -> u128 {
        self.coeffs[index as usize]
    }

    pub fn set_coeff(&mut self, index: u64, value: u128) {
        self.coeffs[index as usize] = self.ring.reduce(value);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        let r = self.ring;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| r.add(a, b)).collect();
        AlgebraElement { quotient: self.quotient, ring: r, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let r = self.ring;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| r.sub(a, b)).collect();
        AlgebraElement { quotient: self.quotient, ring: r, coeffs }
    }

    pub fn scale(&self, c: u128) -> Self {
        let r = self.ring;
        AlgebraElement {
            quotient: self.quotient,
            ring: r,
            coeffs: self.coeffs.iter().map(|&a| r.mul(a, c)).collect(),
        }
    }

    /// Group-algebra product.
    pub fn mul(&self, other: &Self) -> Self {
        let q = self.quotient;
        let r = self.ring;
        let n = q.len();
        let vecs: Vec<Vec<u64>> = (0..n as u64).map(|i| q.to_vec(i)).collect();
        let m = q.modulus();
        let mut out = vec![0u128; n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                if b == 0 {
                    continue;
                }
                let k: Vec<u64> = vecs[i].iter().zip(&vecs[j]).map(|(&x, &y)| (x + y) % m).collect();
                let k = q.to_index(&k) as usize;
                out[k] = r.add(out[k], r.mul(a, b));
            }
        }
        AlgebraElement { quotient: q, ring: r, coeffs: out }
    }

    /// Multiplication by a group element (a permutation of coefficients).
    pub fn translate(&self, g: u64) -> Self {
        let q = self.quotient;
        let mut out = vec![0u128; q.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a != 0 {
                out[q.add(i as u64, g) as usize] = a;
            }
        }
        AlgebraElement { quotient: q, ring: self.ring, coeffs: out }
    }

    /// Image under Λ_n → Λ_m (m ≤ n), summing coefficients over fibres.
    pub fn project(&self, m: u32) -> Self {
        let target = self.quotient.at_level(m);
        let r = self.ring;
        let mut out = vec![0u128; target.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a != 0 {
                let k = self.quotient.project(i as u64, m) as usize;
                out[k] = r.add(out[k], a);
            }
        }
        AlgebraElement { quotient: target, ring: r, coeffs: out }
    }

    /// Trace of multiplication by self on the basis Γ_n: |Γ_n|·x(1).
    pub fn regular_trace(&self) -> u128 {
        self.ring.mul(self.coeffs[0], self.ring.from_u64(self.quotient.len() as u64))
    }

    /// Matrix of y ↦ self·y in the basis Γ_n (column j = self·γ_j).
    pub fn multiplication_matrix(&self) -> ModMatrix {
        let n = self.quotient.len();
        let mut m = ModMatrix::zeros(self.ring, n, n);
        for j in 0..n {
            let col = self.translate(j as u64);
            for i in 0..n {
                m.set(i, j, col.coeffs[i]);
            }
        }
        m
    }
}

/// Per-level data: the lifted factor carrying ζ_{p^m} and the orbit-sum table
/// T_m[k] = Σ_{j<f_m} ζ^{−ℓ^j k}.
#[derive(Clone, Debug)]
struct LevelData {
    basis: Arc<CyclotomicFactorBasis>,
    trace_table: Vec<u128>,
}

/// Λ_n at precision K together with its orbit table and component rings.
#[derive(Clone, Debug)]
pub struct LevelAlgebra {
    ring: Zl,
    table: OrbitTable,
    levels: Vec<LevelData>,
    inv_order: u128,
    /// Flattened coordinates of every γ ∈ Γ_n, d entries each.
    coords: Vec<u64>,
}

impl LevelAlgebra {
    pub fn new(ell: u64, quotient: GammaQuotient, precision: u32) -> Result<Self> {
        let table = enumerate_orbits(ell, quotient, None)?;
        Self::from_table(table, precision)
    }

    pub fn from_table(table: OrbitTable, precision: u32) -> Result<Self> {
        let ring = Zl::new(table.ell, precision)?;
        let q = table.quotient;
        let mut levels = Vec::with_capacity(q.n as usize + 1);
        for m in 0..=q.n {
            let basis = Arc::new(
                hensel_cyclotomic_factors(table.ell, q.p, m, precision)?
                    .into_iter()
                    .next()
                    .expect("at least one factor"),
            );
            let trace_table = orbit_sum_table(table.ell, &basis)?;
            levels.push(LevelData { basis, trace_table });
        }
        let inv_order = ring
            .inv(ring.from_u64(q.size()?))
            .ok_or_else(|| Error::invalid("|Γ_n| is not invertible mod ℓ"))?;
        let d = q.d as usize;
        let mut coords = Vec::with_capacity(q.len() * d);
        for i in 0..q.len() as u64 {
            coords.extend(q.to_vec(i));
        }
        Ok(LevelAlgebra { ring, table, levels, inv_order, coords })
    }

    pub fn ring(&self) -> Zl {
        self.ring
    }

    pub fn table(&self) -> &OrbitTable {
        &self.table
    }

    pub fn quotient(&self) -> GammaQuotient {
        self.table.quotient
    }

    /// Component ring of characters of level m: Z/ℓ^K[x]/(g_m).
    pub fn component_basis(&self, m: u32) -> Arc<CyclotomicFactorBasis> {
        self.levels[m as usize].basis.clone()
    }

    /// ⟨a, γ⟩ mod p^level for every γ ∈ Γ_n, where a is a character of Γ_level.
    pub fn pairing_indices(&self, level: u32, a: &[u64]) -> Vec<u32> {
        let d = a.len();
        let mm = self.quotient().at_level(level).modulus();
        let a: Vec<u64> = a.iter().map(|&x| x % mm).collect();
        self.coords
            .chunks_exact(d)
            .map(|g| {
                let s = g.iter().zip(&a).fold(0u64, |acc, (&x, &y)| (acc + (x % mm) * y) % mm);
                s as u32
            })
            .collect()
    }

    /// e_{[ω]} = |Γ_n|^{-1} Σ_γ T_m[⟨a',γ⟩]·γ.
    pub fn idempotent(&self, orbit_index: usize) -> AlgebraElement {
        let orbit = &self.table.orbits[orbit_index];
        let lvl = &self.levels[orbit.level as usize];
        let scaled: Vec<u128> =
            lvl.trace_table.iter().map(|&t| self.ring.mul(self.inv_order, t)).collect();
        let coeffs = self
            .pairing_indices(orbit.level, &orbit.rep_at_own_level())
            .into_iter()
            .map(|k| scaled[k as usize])
            .collect();
        AlgebraElement { quotient: self.quotient(), ring: self.ring, coeffs }
    }

    pub fn idempotents(&self) -> Vec<AlgebraElement> {
        (0..self.table.orbits.len()).into_par_iter().map(|i| self.idempotent(i)).collect()
    }

    /// χ(x) = Σ_γ x(γ)·ζ^{⟨a',γ⟩} in the component ring of the character's level.
    pub fn character_value(&self, x: &AlgebraElement, level: u32, a: &[u64]) -> UnramifiedElement {
        self.character_value_indexed(x, level, &self.pairing_indices(level, a))
    }

    /// As `character_value`, with the pairing table precomputed.
    pub fn character_value_indexed(&self, x: &AlgebraElement, level: u32, pairing: &[u32]) -> UnramifiedElement {
        let basis = self.component_basis(level);
        let mm = self.quotient().at_level(level).modulus() as usize;
        let mut buckets = vec![0u128; mm];
        for (&c, &k) in x.coeffs.iter().zip(pairing) {
            if c != 0 {
                buckets[k as usize] = self.ring.add(buckets[k as usize], c);
            }
        }
        UnramifiedElement::from_coeffs(basis.clone(), &basis.reduce_dense(buckets))
    }

    /// ω(e_{[ω]}x) for the orbit representative ω; since ω(e_{[ω]}) = 1 this is ω(x).
    pub fn component_map(&self, x: &AlgebraElement, orbit_index: usize) -> UnramifiedElement {
        let orbit = &self.table.orbits[orbit_index];
        self.character_value(x, orbit.level, &orbit.rep_at_own_level())
    }

    /// α_I = Σ ℓ^{n(I,ω)}·e_{[ω]}.
    pub fn canonical_generator(&self, ideal: &IdealData) -> CanonicalGenerator {
        let mut acc = AlgebraElement::zero(self.quotient(), self.ring);
        let mut zero_at_precision = Vec::new();
        for (i, orbit) in self.table.orbits.iter().enumerate() {
            let key = (orbit.level, orbit.rep_at_own_level());
            let exp = ideal.exponents.get(&key).copied().unwrap_or(IdealExponent::Finite(0));
            let scale = match exp {
                IdealExponent::Infinite => None,
                IdealExponent::Finite(e) if e >= self.ring.precision() => {
                    zero_at_precision.push(orbit.rep.clone());
                    None
                }
                IdealExponent::Finite(e) => Some(self.ring.ell_power(e)),
            };
            if let Some(s) = scale {
                acc = acc.add(&self.idempotent(i).scale(s));
            }
        }
        CanonicalGenerator { element: acc, zero_at_precision }
    }
}

/// T[k] = Σ_{j<f} ρ^{−ℓ^j k} for the root ρ of `basis`, computed twice: as an exact cyclotomic
/// sum mapped through the root, and from Newton power sums of the factor's coefficients.
fn orbit_sum_table(ell: u64, basis: &Arc<CyclotomicFactorBasis>) -> Result<Vec<u128>> {
    let ring = basis.ring();
    let m = basis.level();
    let p = basis.p();
    let order = basis.root_order();
    let f = basis.degree();
    let power_sums = newton_power_sums(basis, order as usize);
    let mut table = Vec::with_capacity(order as usize);
    for k in 0..order {
        let mut v = vec![BigInt::from(0); order as usize];
        let mut e = (order - k % order) % order;
        for _ in 0..f {
            v[e as usize] += 1;
            e = (e as u128 * ell as u128 % order as u128) as u64;
        }
        let exact = CycloExact::from_exponent_vector(p, m, v).embed(basis);
        let scalar = exact.as_scalar().ok_or_else(|| {
            Error::cross(format!("orbit sum T_{m}[{k}] is not a scalar in the component ring"))
        })?;
        let newton = power_sums[((order - k % order) % order) as usize];
        if scalar != newton {
            return Err(Error::cross(format!("orbit sum T_{m}[{k}]: routes disagree")));
        }
        table.push(ring.reduce(scalar));
    }
    Ok(table)
}

/// s_e = Σ ρ_i^e over the roots of the factor, for e < count.
fn newton_power_sums(basis: &CyclotomicFactorBasis, count: usize) -> Vec<u128> {
    let ring = basis.ring();
    let g = basis.factor();
    let f = basis.degree();
    // g = x^f + c_1 x^{f−1} + … + c_f
    let c = |i: usize| g[f - i];
    let mut s = vec![0u128; count.max(1)];
    s[0] = ring.from_u64(f as u64);
    for e in 1..count {
        let mut acc = 0u128;
        for i in 1..=e.min(f) {
            if i < e {
                acc = ring.add(acc, ring.mul(c(i), s[e - i]));
            } else {
                acc = ring.add(acc, ring.mul(c(i), ring.from_u64(e as u64)));
            }
        }
        s[e] = ring.neg(acc);
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealExponent {
    Finite(u32),
    Infinite,
}

/// A closed ideal as orbit ↦ exponent; orbits are keyed by (level, representative at that level).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IdealData {
    pub exponents: BTreeMap<(u32, Vec<u64>), IdealExponent>,
}

impl IdealData {
    pub fn uniform(table: &OrbitTable, e: IdealExponent) -> Self {
        let exponents = table
            .orbits
            .iter()
            .map(|o| ((o.level, o.rep_at_own_level()), e))
            .collect();
        IdealData { exponents }
    }

    /// Exponent-wise sum, the product of principal ideals.
    pub fn product(&self, other: &IdealData) -> IdealData {
        let mut exponents = self.exponents.clone();
        for (k, &v) in &other.exponents {
            let cur = exponents.get(k).copied().unwrap_or(IdealExponent::Finite(0));
            let sum = match (cur, v) {
                (IdealExponent::Finite(a), IdealExponent::Finite(b)) => IdealExponent::Finite(a + b),
                _ => IdealExponent::Infinite,
            };
            exponents.insert(k.clone(), sum);
        }
        IdealData { exponents }
    }
}

#[derive(Clone, Debug)]
pub struct CanonicalGenerator {
    pub element: AlgebraElement,
    /// Orbits whose exponent reaches the precision, so their component is zero mod ℓ^K.
    pub zero_at_precision: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdempotentReport {
    pub ell: u64,
    pub p: u64,
    pub d: u32,
    pub n: u32,
    pub precision: u32,
    pub orbit_count: usize,
    pub method: &'static str,
    pub sum_to_one: bool,
    pub orthogonality: bool,
    pub idempotency: bool,
    pub projection_compatibility: bool,
    pub ranks_match_orbit_sizes: bool,
    pub rank_method: &'static str,
    pub first_failure: Option<String>,
}

impl IdempotentReport {
    pub fn all_hold(&self) -> bool {
        self.sum_to_one
            && self.orthogonality
            && self.idempotency
            && self.projection_compatibility
            && self.ranks_match_orbit_sizes
    }
}

/// Computes every orbit idempotent at level n and checks the relations.
pub fn verify_idempotent_relations(table: &OrbitTable, precision: u32) -> Result<IdempotentReport> {
    let alg = LevelAlgebra::from_table(table.clone(), precision)?;
    let family = alg.idempotents();
    verify_family(&alg, &family)
}

/// Checks a proposed idempotent family (one element per orbit, in table order).
pub fn verify_family(alg: &LevelAlgebra, family: &[AlgebraElement]) -> Result<IdempotentReport> {
    let q = alg.quotient();
    let ring = alg.ring();
    let table = alg.table();
    let size = q.size()?;
    let mut first_failure: Option<String> = None;
    let note = |msg: String, first: &mut Option<String>| {
        if first.is_none() {
            *first = Some(msg);
        }
    };

    let mut total = AlgebraElement::zero(q, ring);
    for e in family {
        total = total.add(e);
    }
    let sum_to_one = total == AlgebraElement::one(q, ring);
    if !sum_to_one {
        note("idempotents do not sum to 1".into(), &mut first_failure);
    }

    let (orthogonality, idempotency, method) = if size <= DIRECT_CHECK_LIMIT {
        let mut orth = true;
        let mut idem = true;
        for i in 0..family.len() {
            for j in i..family.len() {
                let prod = family[i].mul(&family[j]);
                if i == j && prod != family[i] {
                    idem = false;
                    note(format!("e² ≠ e for orbit {:?}", table.orbits[i].rep), &mut first_failure);
                }
                if i != j && !prod.is_zero() {
                    orth = false;
                    note(
                        format!("orbits {:?} and {:?} are not orthogonal", table.orbits[i].rep, table.orbits[j].rep),
                        &mut first_failure,
                    );
                }
            }
        }
        (orth, idem, "direct")
    } else {
        // Λ_n → Π_b R_b, x ↦ (χ_b(x)) over orbit representatives b is a ring isomorphism,
        // so χ_b(e_a) = δ_ab pins down the family and all its relations. Each e_a is first
        // checked to factor through γ ↦ ⟨a',γ⟩; characters outside the cyclic group ⟨a⟩
        // then vanish on it by orthogonality, and those inside are evaluated explicitly,
        // one per Frobenius class.
        let failures: Vec<(usize, bool, String)> = (0..family.len())
            .into_par_iter()
            .filter_map(|a| fibre_certificate(alg, a, &family[a]).err())
            .collect();
        let idem = failures.iter().all(|f| !f.1);
        let orth = failures.iter().all(|f| f.1);
        if let Some((a, _, msg)) = failures.first() {
            note(format!("orbit {:?}: {msg}", table.orbits[*a].rep), &mut first_failure);
        }
        (orth, idem, "fibre_transform")
    };

    let mut projection_compatibility = true;
    for k in 0..q.n {
        let lower = LevelAlgebra::new(table.ell, q.at_level(k), ring.precision())?;
        for (i, orbit) in table.orbits.iter().enumerate() {
            let projected = family[i].project(k);
            let expected = if orbit.level <= k {
                let s = q.p.pow(q.n - k);
                let rep: Vec<u64> = orbit.rep.iter().map(|&x| x / s).collect();
                let j = lower.table().find(&rep).expect("orbit exists at the lower level");
                lower.idempotent(j)
            } else {
                AlgebraElement::zero(q.at_level(k), ring)
            };
            if projected != expected {
                projection_compatibility = false;
                note(format!("projection of orbit {:?} to level {k} fails", orbit.rep), &mut first_failure);
            }
        }
    }

    let mut ranks_match_orbit_sizes = true;
    let rank_method = if size <= MATRIX_RANK_LIMIT { "trace_and_matrix_rank" } else { "trace" };
    for (i, orbit) in table.orbits.iter().enumerate() {
        let e = &family[i];
        let mut ok = e.regular_trace() == ring.from_u64(orbit.size() as u64);
        if ok && size <= MATRIX_RANK_LIMIT {
            ok = rank_mod_ell(&e.multiplication_matrix()) == orbit.size();
        }
        if !ok {
            ranks_match_orbit_sizes = false;
            note(format!("rank of e·Λ_n differs from |orbit| for {:?}", orbit.rep), &mut first_failure);
        }
    }

    Ok(IdempotentReport {
        ell: table.ell,
        p: q.p,
        d: q.d,
        n: q.n,
        precision: ring.precision(),
        orbit_count: table.orbits.len(),
        method,
        sum_to_one,
        orthogonality,
        idempotency,
        projection_compatibility,
        ranks_match_orbit_sizes,
        rank_method,
        first_failure,
    })
}

/// Err((orbit, is_self_value, reason)) when the certificate for e_a fails.
fn fibre_certificate(alg: &LevelAlgebra, a: usize, e: &AlgebraElement) -> std::result::Result<(), (usize, bool, String)> {
    let table = alg.table();
    let orbit = &table.orbits[a];
    let m = orbit.level;
    let ring = alg.ring();
    let q = alg.quotient();
    let order = q.p.pow(m);
    let pairing = alg.pairing_indices(m, &orbit.rep_at_own_level());
    let mut profile: Vec<Option<u128>> = vec![None; order as usize];
    for (&c, &k) in e.coeffs().iter().zip(&pairing) {
        match profile[k as usize] {
            None => profile[k as usize] = Some(c),
            Some(prev) if prev != c => {
                return Err((a, false, "coefficients are not constant on fibres".into()));
            }
            _ => {}
        }
    }
    let profile: Vec<u128> = profile.into_iter().map(|c| c.unwrap_or(0)).collect();
    let fibre = ring.from_u64(q.size().expect("validated") / order);
    let basis = alg.component_basis(m);
    let line = GammaQuotient { p: q.p, d: 1, n: m };
    let reps = enumerate_orbits(table.ell, line, None).expect("line orbits");
    for t_orbit in &reps.orbits {
        let t = t_orbit.rep[0];
        let mut buckets = vec![0u128; order as usize];
        for (k, &c) in profile.iter().enumerate() {
            let idx = (t as u128 * k as u128 % order as u128) as usize;
            buckets[idx] = ring.add(buckets[idx], ring.mul(c, fibre));
        }
        let value = basis.reduce_dense(buckets);
        let own = t_orbit.level == m && t_orbit.contains(&[1 % order.max(1)]);
        let expected = if own { 1 } else { 0 };
        let ok = value[0] == expected && value[1..].iter().all(|&c| c == 0);
        if !ok {
            return Err((a, own, format!("character {t}·a takes a wrong value")));
        }
    }
    Ok(())
}

/// Convenience wrapper: the idempotent of one orbit.
pub fn idempotent(orbit: &Orbit, ell: u64, quotient: GammaQuotient, precision: u32) -> Result<AlgebraElement> {
    let alg = LevelAlgebra::new(ell, quotient, precision)?;
    let i = alg
        .table()
        .find(&orbit.rep)
        .ok_or_else(|| Error::invalid("orbit is not in Γ_n^∨"))?;
    Ok(alg.idempotent(i))
}

#[derive(Clone, Debug, Serialize)]
pub struct AugmentationReport {
    pub n: u32,
    pub m: u32,
    /// I_n inside Λ_m equals Σ e_{[ω]}Λ_m over orbits of level > n.
    pub matches_idempotent_sum: bool,
    /// I² = I.
    pub idempotent_ideal: bool,
    /// log_ℓ |I|.
    pub log_size: u32,
    pub expected_log_size: u32,
}

impl AugmentationReport {
    pub fn holds(&self) -> bool {
        self.matches_idempotent_sum && self.idempotent_ideal && self.log_size == self.expected_log_size
    }
}

/// Compares the ideal of Λ_m generated by γ − 1 (γ ∈ G_n/G_m) with its idempotent description.
pub fn augmentation_ideal_check(ell: u64, quotient_m: GammaQuotient, n: u32, precision: u32) -> Result<AugmentationReport> {
    let m = quotient_m.n;
    if n > m {
        return Err(Error::invalid("augmentation level n must not exceed m"));
    }
    let alg = LevelAlgebra::new(ell, quotient_m, precision)?;
    let q = quotient_m;
    let ring = alg.ring();
    let size = q.len();
    let one = AlgebraElement::one(q, ring);
    let step = q.p.pow(n);
    let gens: Vec<AlgebraElement> = (0..q.d as usize)
        .map(|i| {
            let mut v = vec![0u64; q.d as usize];
            v[i] = step % q.modulus();
            AlgebraElement::group_element(q, ring, q.to_index(&v)).sub(&one)
        })
        .collect();
    let translates = |x: &AlgebraElement| -> Vec<Vec<u128>> {
        (0..size as u64).map(|g| x.translate(g).coeffs).collect()
    };
    let ideal_rows: Vec<Vec<u128>> = gens.iter().flat_map(&translates).collect();
    let ideal = HowellForm::new(ring, size, ideal_rows);

    let mut e_sum = AlgebraElement::zero(q, ring);
    let mut expected_rank = 0usize;
    for (i, orbit) in alg.table().orbits.iter().enumerate() {
        if orbit.level > n {
            e_sum = e_sum.add(&alg.idempotent(i));
            expected_rank += orbit.size();
        }
    }
    let target = HowellForm::new(ring, size, translates(&e_sum));

    let mut square_rows = Vec::new();
    for a in &gens {
        for b in &gens {
            square_rows.extend(translates(&a.mul(b)));
        }
    }
    let square = HowellForm::new(ring, size, square_rows);

    Ok(AugmentationReport {
        n,
        m,
        matches_idempotent_sum: ideal.same_span(&target),
        idempotent_ideal: ideal.same_span(&square),
        log_size: ideal.log_size(),
        expected_log_size: expected_rank as u32 * ring.precision(),
    })
}
