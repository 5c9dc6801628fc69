//! Finite normic systems: towers M_0, M_1, … of finite ℓ-groups with Γ_n-actions, upward
//! maps a: M_n → M_{n+1} and downward maps b: M_{n+1} → M_n with b∘a = [G_n : G_{n+1}].
//!
//! Every group is ⊕_i Z/ℓ^{k_i}; maps are integer matrices over Z/ℓ^K with K the largest
//! k_i of the system. A matrix X from ⊕ Z/ℓ^{k_j} to ⊕ Z/ℓ^{k_i} is a well-defined map iff
//! ℓ^{max(0, k_i − k_j)} divides X_ij, and two maps agree iff their entries agree mod ℓ^{k_i}.

use serde::{Deserialize, Serialize};

use crate::arith;
use crate::character_lattice::{enumerate_orbits, GammaQuotient};
use crate::coeff_rings::{hensel_cyclotomic_factors, Zl};
use crate::error::{Error, Result};
use crate::iwasawa_algebra::LevelAlgebra;
use crate::linalg::{smith_valuations, ModMatrix};
use crate::sinnott::{GeneratorRule, SinnottModule};

/// Groups up to this order are verified element by element.
pub const EXHAUSTIVE_LIMIT: u128 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSpec {
    /// Exponents k_i of the cyclic factors Z/ℓ^{k_i}.
    pub invariants: Vec<u32>,
    /// One square matrix (list of rows) per generator of Γ_n.
    pub action: Vec<Vec<Vec<u64>>>,
}

/// JSON form of a system; `up[n]` maps level n to n + 1 and `down[n]` maps n + 1 to n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormicSystemSpec {
    pub ell: u64,
    pub p: u64,
    pub d: u32,
    pub levels: Vec<LevelSpec>,
    pub up: Vec<Vec<Vec<u64>>>,
    pub down: Vec<Vec<Vec<u64>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteLevelModule {
    pub invariants: Vec<u32>,
    pub action: Vec<ModMatrix>,
}

impl FiniteLevelModule {
    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    pub fn log_order(&self) -> u32 {
        self.invariants.iter().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormicSystem {
    pub ell: u64,
    pub p: u64,
    pub d: u32,
    pub ring: Zl,
    pub levels: Vec<FiniteLevelModule>,
    pub up: Vec<ModMatrix>,
    pub down: Vec<ModMatrix>,
}

fn matrix_from_rows(ring: Zl, rows: &[Vec<u64>], shape: (usize, usize), what: &str) -> Result<ModMatrix> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(Error::invalid(format!("{what} must be {}×{}", shape.0, shape.1)));
    }
    let rows: Vec<Vec<u128>> = rows.iter().map(|r| r.iter().map(|&x| x as u128).collect()).collect();
    Ok(ModMatrix::from_rows(ring, &rows, shape.1))
}

fn matrix_to_rows(m: &ModMatrix) -> Vec<Vec<u64>> {
    (0..m.rows).map(|i| m.row(i).iter().map(|&x| x as u64).collect()).collect()
}

impl NormicSystemSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<NormicSystem> {
        arith::require_ell_p(self.ell, self.p)?;
        if self.d == 0 || self.d > 8 {
            return Err(Error::invalid("d must lie in 1..=8"));
        }
        if self.levels.is_empty() {
            return Err(Error::invalid("a system needs at least one level"));
        }
        let n = self.levels.len();
        if self.up.len() != n - 1 || self.down.len() != n - 1 {
            return Err(Error::invalid(format!("{} levels need {} up and down maps", n, n - 1)));
        }
        if self.levels.iter().flat_map(|l| &l.invariants).any(|&k| k == 0) {
            return Err(Error::invalid("cyclic factor exponents must be positive"));
        }
        let k = self.levels.iter().flat_map(|l| l.invariants.iter().copied()).max().unwrap_or(1);
        if k > Zl::max_precision(self.ell) {
            return Err(Error::invalid(format!("exponent {k} exceeds the supported precision")));
        }
        let ring = Zl::new(self.ell, k)?;
        let mut levels = Vec::with_capacity(n);
        for (i, l) in self.levels.iter().enumerate() {
            if l.action.len() != self.d as usize {
                return Err(Error::invalid(format!("level {i} needs {} action matrices", self.d)));
            }
            let r = l.invariants.len();
            let action = l
                .action
                .iter()
                .map(|m| matrix_from_rows(ring, m, (r, r), &format!("action at level {i}")))
                .collect::<Result<Vec<_>>>()?;
            levels.push(FiniteLevelModule { invariants: l.invariants.clone(), action });
        }
        let mut up = Vec::new();
        let mut down = Vec::new();
        for i in 0..n - 1 {
            let (r0, r1) = (levels[i].rank(), levels[i + 1].rank());
            up.push(matrix_from_rows(ring, &self.up[i], (r1, r0), &format!("up map {i}"))?);
            down.push(matrix_from_rows(ring, &self.down[i], (r0, r1), &format!("down map {i}"))?);
        }
        Ok(NormicSystem { ell: self.ell, p: self.p, d: self.d, ring, levels, up, down })
    }
}

impl NormicSystem {
    pub fn to_spec(&self) -> NormicSystemSpec {
        NormicSystemSpec {
            ell: self.ell,
            p: self.p,
            d: self.d,
            levels: self
                .levels
                .iter()
                .map(|l| LevelSpec {
                    invariants: l.invariants.clone(),
                    action: l.action.iter().map(matrix_to_rows).collect(),
                })
                .collect(),
            up: self.up.iter().map(matrix_to_rows).collect(),
            down: self.down.iter().map(matrix_to_rows).collect(),
        }
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// [G_n : G_{n+1}] for Γ_n = (Z/p^n)^d.
    pub fn index(&self) -> u64 {
        self.p.pow(self.d)
    }

    /// The composite M_m → M_n of downward maps.
    pub fn down_composite(&self, m: usize, n: usize) -> ModMatrix {
        let mut acc = ModMatrix::identity(self.ring, self.levels[m].rank());
        for j in (n..m).rev() {
            acc = self.down[j].mul(&acc);
        }
        acc
    }

    /// ℓ^e as an integer; e never exceeds the working precision.
    fn ell_pow(&self, e: u32) -> u128 {
        (self.ell as u128).pow(e)
    }
}

fn well_defined(sys: &NormicSystem, x: &ModMatrix, src: &[u32], dst: &[u32]) -> bool {
    (0..x.rows).all(|i| {
        (0..x.cols).all(|j| {
            let need = dst[i].saturating_sub(src[j]);
            x.get(i, j).is_multiple_of(sys.ell_pow(need))
        })
    })
}

fn maps_equal(sys: &NormicSystem, x: &ModMatrix, y: &ModMatrix, dst: &[u32]) -> bool {
    (0..x.rows).all(|i| {
        let m = sys.ell_pow(dst[i]);
        (0..x.cols).all(|j| x.get(i, j) % m == y.get(i, j) % m)
    })
}

/// log_ℓ of |coker(X)| for X into ⊕ Z/ℓ^{k_i}, together with its invariants.
fn cokernel(sys: &NormicSystem, x: &ModMatrix, dst: &[u32]) -> (u32, Vec<u32>) {
    let r = dst.len();
    if r == 0 {
        return (0, Vec::new());
    }
    let mut rel = ModMatrix::zeros(sys.ring, r, r);
    for (i, &k) in dst.iter().enumerate() {
        rel.set(i, i, sys.ring.reduce(sys.ell_pow(k)));
    }
    let full = x.hcat(&rel);
    let mut inv: Vec<u32> = smith_valuations(&full)
        .into_iter()
        .map(|v| v.lower_bound())
        .filter(|&v| v > 0)
        .collect();
    inv.sort_unstable();
    (inv.iter().sum(), inv)
}

fn image_log(sys: &NormicSystem, x: &ModMatrix, dst: &[u32]) -> u32 {
    dst.iter().sum::<u32>() - cokernel(sys, x, dst).0
}

fn reduce_into(sys: &NormicSystem, v: &mut [u128], dst: &[u32]) {
    for (x, &k) in v.iter_mut().zip(dst) {
        *x %= sys.ell_pow(k);
    }
}

/// Every element of ⊕ Z/ℓ^{k_i}, in mixed radix.
fn elements<'a>(sys: &'a NormicSystem, inv: &[u32]) -> impl Iterator<Item = Vec<u128>> + 'a {
    let radices: Vec<u128> = inv.iter().map(|&k| sys.ell_pow(k)).collect();
    let total: u128 = radices.iter().product();
    (0..total).map(move |mut i| {
        radices
            .iter()
            .map(|&r| {
                let x = i % r;
                i /= r;
                x
            })
            .collect()
    })
}

fn group_order(sys: &NormicSystem, inv: &[u32]) -> Option<u128> {
    inv.iter().try_fold(1u128, |acc, &k| acc.checked_mul(sys.ell_pow(k)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    /// Maps and actions are well defined on the finite groups.
    WellDefined,
    /// Γ acts through Γ_n: commuting automorphisms of order dividing p^n.
    I,
    /// The upward maps are equivariant.
    II,
    /// The downward maps are equivariant.
    III,
    /// b ∘ a is multiplication by the index.
    IV,
    UpInjective,
    DownSurjective,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub level: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormicReport {
    pub levels: usize,
    pub violations: Vec<Violation>,
}

impl NormicReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first_violation(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

pub fn validate_normic(sys: &NormicSystem) -> NormicReport {
    let mut violations = Vec::new();
    let mut flag = |axiom, level, detail: String| violations.push(Violation { axiom, level, detail });
    let g = sys.ring.from_u64(sys.index());
    for (n, lvl) in sys.levels.iter().enumerate() {
        let inv = &lvl.invariants;
        let id = ModMatrix::identity(sys.ring, lvl.rank());
        let order = sys.p.pow(n as u32);
        for (i, a) in lvl.action.iter().enumerate() {
            if !well_defined(sys, a, inv, inv) {
                flag(Axiom::WellDefined, n, format!("action of generator {i}"));
                continue;
            }
            if !maps_equal(sys, &a.pow(order), &id, inv) {
                flag(Axiom::I, n, format!("generator {i} does not have order dividing {order}"));
            }
            for (j, b) in lvl.action.iter().enumerate().skip(i + 1) {
                if !maps_equal(sys, &a.mul(b), &b.mul(a), inv) {
                    flag(Axiom::I, n, format!("generators {i} and {j} do not commute"));
                }
            }
        }
    }
    for n in 0..sys.top() {
        let (lo, hi) = (&sys.levels[n], &sys.levels[n + 1]);
        let (up, down) = (&sys.up[n], &sys.down[n]);
        if !well_defined(sys, up, &lo.invariants, &hi.invariants) {
            flag(Axiom::WellDefined, n, "up map".into());
            continue;
        }
        if !well_defined(sys, down, &hi.invariants, &lo.invariants) {
            flag(Axiom::WellDefined, n, "down map".into());
            continue;
        }
        for i in 0..sys.d as usize {
            if !maps_equal(sys, &up.mul(&lo.action[i]), &hi.action[i].mul(up), &hi.invariants) {
                flag(Axiom::II, n, format!("up map does not commute with generator {i}"));
            }
            if !maps_equal(sys, &down.mul(&hi.action[i]), &lo.action[i].mul(down), &lo.invariants) {
                flag(Axiom::III, n, format!("down map does not commute with generator {i}"));
            }
        }
        let id = ModMatrix::identity(sys.ring, lo.rank());
        if !maps_equal(sys, &down.mul(up), &id.scale(g), &lo.invariants) {
            flag(Axiom::IV, n, format!("b∘a is not multiplication by {}", sys.index()));
        }
        if image_log(sys, up, &hi.invariants) != lo.log_order() {
            flag(Axiom::UpInjective, n, "up map has a kernel".into());
        }
        if image_log(sys, down, &lo.invariants) != lo.log_order() {
            flag(Axiom::DownSurjective, n, "down map is not onto".into());
        }
    }
    NormicReport { levels: sys.levels.len(), violations }
}

/// M_{n+1} = a(M_n) ⊕ ker(b) through the projector a∘b/[G_n:G_{n+1}].
#[derive(Clone, Debug)]
pub struct SplitReport {
    pub level: usize,
    pub projector: ModMatrix,
    pub complement: ModMatrix,
    pub image_log: u32,
    pub kernel_log: u32,
    pub exhaustive: bool,
    pub holds: bool,
    pub failures: Vec<String>,
}

pub fn split_level(sys: &NormicSystem, n: usize) -> Result<SplitReport> {
    if n >= sys.top() {
        return Err(Error::invalid(format!("no level {} above {n}", n + 1)));
    }
    let inv_g = sys
        .ring
        .inv(sys.ring.from_u64(sys.index()))
        .ok_or_else(|| Error::invalid("the index is not a unit"))?;
    let (lo, hi) = (&sys.levels[n].invariants, &sys.levels[n + 1].invariants);
    let (a, b) = (&sys.up[n], &sys.down[n]);
    let proj = a.mul(b).scale(inv_g);
    let id = ModMatrix::identity(sys.ring, hi.len());
    let comp = id.sub(&proj);
    let mut failures = Vec::new();
    if !maps_equal(sys, &proj.mul(&proj), &proj, hi) {
        failures.push("projector is not idempotent".to_string());
    }
    if !maps_equal(sys, &b.mul(&comp), &ModMatrix::zeros(sys.ring, lo.len(), hi.len()), lo) {
        failures.push("complement does not land in ker b".to_string());
    }
    if !maps_equal(sys, &proj.mul(a), a, hi) {
        failures.push("projector does not fix a(M_n)".to_string());
    }
    let image = image_log(sys, a, hi);
    let kernel = hi.iter().sum::<u32>() - image_log(sys, b, lo);
    if image + kernel != hi.iter().sum::<u32>() {
        failures.push(format!("|a(M_n)|·|ker b| = ℓ^{} ≠ |M_{{n+1}}|", image + kernel));
    }
    let order = group_order(sys, hi);
    let exhaustive = order.is_some_and(|o| o <= EXHAUSTIVE_LIMIT);
    if exhaustive {
        let mut kernel_count = 0u128;
        for x in elements(sys, hi) {
            let mut bx = b.apply(&x);
            reduce_into(sys, &mut bx, lo);
            if bx.iter().all(|&c| c == 0) {
                kernel_count += 1;
                let mut px = proj.apply(&x);
                reduce_into(sys, &mut px, hi);
                if px.iter().any(|&c| c != 0) {
                    failures.push(format!("{x:?} lies in ker b but not in ker of the projector"));
                    break;
                }
            }
            let mut rest = comp.apply(&x);
            reduce_into(sys, &mut rest, hi);
            let mut brest = b.apply(&rest);
            reduce_into(sys, &mut brest, lo);
            if brest.iter().any(|&c| c != 0) {
                failures.push(format!("x − Px ∉ ker b for x = {x:?}"));
                break;
            }
        }
        let mut images = std::collections::HashSet::new();
        for z in elements(sys, lo) {
            let mut az = a.apply(&z);
            reduce_into(sys, &mut az, hi);
            let mut baz = b.apply(&az);
            reduce_into(sys, &mut baz, lo);
            if baz.iter().all(|&c| c == 0) && z.iter().any(|&c| c != 0) {
                failures.push(format!("a({z:?}) is a nonzero element of ker b"));
                break;
            }
            images.insert(az);
        }
        if images.len() as u128 * kernel_count != order.unwrap_or(0) {
            failures.push("image and kernel do not fill M_{n+1}".to_string());
        }
    }
    Ok(SplitReport {
        level: n,
        holds: failures.is_empty(),
        projector: proj,
        complement: comp,
        image_log: image,
        kernel_log: kernel,
        exhaustive,
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiLevel {
    pub level: usize,
    /// Abelian invariants of ker(M_n → M_{n−1}) (all of M_0 at level 0).
    pub kernel_invariants: Vec<u32>,
    pub lands_in_kernels: bool,
    pub bijective: bool,
    pub square_commutes: bool,
    pub equivariant: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PsiReport {
    pub levels: Vec<PsiLevel>,
}

impl PsiReport {
    pub fn holds(&self) -> bool {
        self.levels.iter().all(|l| l.lands_in_kernels && l.bijective && l.square_commutes && l.equivariant)
    }
}

/// ψ_k(x) = g·x − a(b(x)) on M_k, and ψ_0 = id.
fn psi_component(sys: &NormicSystem, k: usize) -> ModMatrix {
    let id = ModMatrix::identity(sys.ring, sys.levels[k].rank());
    if k == 0 {
        return id;
    }
    id.scale(sys.ring.from_u64(sys.index())).sub(&sys.up[k - 1].mul(&sys.down[k - 1]))
}

fn stack(ring: Zl, blocks: &[ModMatrix], cols: usize) -> ModMatrix {
    let rows: usize = blocks.iter().map(|b| b.rows).sum();
    let mut out = ModMatrix::zeros(ring, rows, cols);
    let mut r0 = 0;
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..cols {
                out.set(r0 + i, j, b.get(i, j));
            }
        }
        r0 += b.rows;
    }
    out
}

/// Ψ_n: M_n → ⊕_{k ≤ n} M_k, x ↦ (ψ_k b_k^n x)_k.
pub fn psi_matrix(sys: &NormicSystem, n: usize) -> ModMatrix {
    let blocks: Vec<ModMatrix> = (0..=n).map(|k| psi_component(sys, k).mul(&sys.down_composite(n, k))).collect();
    stack(sys.ring, &blocks, sys.levels[n].rank())
}

fn block_diagonal(ring: Zl, blocks: &[ModMatrix]) -> ModMatrix {
    let n: usize = blocks.iter().map(|b| b.rows).sum();
    let mut out = ModMatrix::zeros(ring, n, n);
    let mut o = 0;
    for b in blocks {
        for i in 0..b.rows {
            for j in 0..b.cols {
                out.set(o + i, o + j, b.get(i, j));
            }
        }
        o += b.rows;
    }
    out
}

pub fn psi_isomorphism(sys: &NormicSystem) -> Result<PsiReport> {
    let mut levels = Vec::new();
    for n in 0..=sys.top() {
        let inv_n = &sys.levels[n].invariants;
        let target: Vec<u32> = (0..=n).flat_map(|k| sys.levels[k].invariants.clone()).collect();
        let psi = psi_matrix(sys, n);
        let lands = (1..=n).all(|k| {
            let c = sys.down[k - 1].mul(&psi_component(sys, k));
            c.data.iter().enumerate().all(|(idx, &x)| x % sys.ell_pow(sys.levels[k - 1].invariants[idx / c.cols]) == 0)
        });
        // ker b_{k−1}^k ≅ M_k / a(M_{k−1})
        let kernel_invariants = if n == 0 {
            let mut v = inv_n.clone();
            v.sort_unstable();
            v
        } else {
            cokernel(sys, &sys.up[n - 1], inv_n).1
        };
        let kernel_total: u32 = (0..=n)
            .map(|k| if k == 0 { sys.levels[0].log_order() } else { cokernel(sys, &sys.up[k - 1], &sys.levels[k].invariants).0 })
            .sum();
        let injective = image_log(sys, &psi, &target) == sys.levels[n].log_order();
        let bijective = injective && kernel_total == sys.levels[n].log_order();
        let square_commutes = n == 0 || {
            let lower = psi_matrix(sys, n - 1).mul(&sys.down[n - 1]);
            let rows = lower.rows;
            let mut upper = ModMatrix::zeros(sys.ring, rows, psi.cols);
            for i in 0..rows {
                for j in 0..psi.cols {
                    upper.set(i, j, psi.get(i, j));
                }
            }
            let lower_target: Vec<u32> = target[..rows].to_vec();
            maps_equal(sys, &upper, &lower, &lower_target)
        };
        let equivariant = (0..sys.d as usize).all(|i| {
            let blocks: Vec<ModMatrix> = (0..=n).map(|k| sys.levels[k].action[i].clone()).collect();
            let act = block_diagonal(sys.ring, &blocks);
            maps_equal(sys, &psi.mul(&sys.levels[n].action[i]), &act.mul(&psi), &target)
        });
        levels.push(PsiLevel { level: n, kernel_invariants, lands_in_kernels: lands, bijective, square_commutes, equivariant });
    }
    let report = PsiReport { levels };
    if report.levels.iter().any(|l| !l.bijective) {
        return Err(Error::cross("Ψ_n is not bijective; the system is not normic"));
    }
    Ok(report)
}

/// A torsion component recovered from a system: orbit representative at its own level and
/// the torsion exponents.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecoveredComponent {
    pub level: u32,
    pub rep: Vec<u64>,
    pub torsion_exponents: Vec<u32>,
}

/// e_[ω]·M_n for every orbit of level exactly n, computed by letting the idempotents of
/// Z/ℓ^K[Γ_n] act through the action matrices. Their orders must multiply to |ker b|.
pub fn level_components(sys: &NormicSystem, n: usize) -> Result<Vec<RecoveredComponent>> {
    let lvl = &sys.levels[n];
    let inv = &lvl.invariants;
    if lvl.rank() == 0 {
        return Ok(Vec::new());
    }
    let q = GammaQuotient::new(sys.p, sys.d, n as u32)?;
    let alg = LevelAlgebra::new(sys.ell, q, sys.ring.precision())?;
    // γ ↦ A(γ) for all γ, in the index order of the quotient
    let mut mats: Vec<ModMatrix> = Vec::with_capacity(q.len());
    for idx in 0..q.len() as u64 {
        let g = q.to_vec(idx);
        let mut acc = ModMatrix::identity(sys.ring, lvl.rank());
        for (i, &e) in g.iter().enumerate() {
            if e > 0 {
                acc = acc.mul(&lvl.action[i].pow(e));
            }
        }
        mats.push(acc);
    }
    let id = ModMatrix::identity(sys.ring, lvl.rank());
    let mut out = Vec::new();
    let mut total = 0u32;
    for (oi, orbit) in alg.table().orbits.iter().enumerate() {
        if orbit.level as usize != n {
            continue;
        }
        let e = alg.idempotent(oi);
        let mut acting = ModMatrix::zeros(sys.ring, lvl.rank(), lvl.rank());
        for (idx, &c) in e.coeffs().iter().enumerate() {
            if c != 0 {
                acting = acting.add(&mats[idx].scale(c));
            }
        }
        // e·M ≅ M/(1 − e)M since e is idempotent on M
        let (log, invariants) = cokernel(sys, &id.sub(&acting), inv);
        total += log;
        if invariants.is_empty() {
            continue;
        }
        let f = orbit.size();
        let mut torsion = Vec::new();
        let mut i = 0;
        while i < invariants.len() {
            let t = invariants[i];
            let run = invariants[i..].iter().take_while(|&&x| x == t).count();
            if run % f != 0 {
                return Err(Error::cross(format!(
                    "component {:?} has invariant {t} with multiplicity {run}, not a multiple of {f}",
                    orbit.rep
                )));
            }
            torsion.extend(std::iter::repeat_n(t, run / f));
            i += run;
        }
        out.push(RecoveredComponent { level: n as u32, rep: orbit.rep_at_own_level(), torsion_exponents: torsion });
    }
    let expected = if n == 0 { lvl.log_order() } else { cokernel(sys, &sys.up[n - 1], inv).0 };
    if total != expected {
        return Err(Error::cross(format!("level {n}: components have order ℓ^{total}, the kernel ℓ^{expected}")));
    }
    Ok(out)
}

/// All torsion components of the limit, level by level.
pub fn recover_components(sys: &NormicSystem) -> Result<Vec<RecoveredComponent>> {
    let mut out = Vec::new();
    for n in 0..=sys.top() {
        out.extend(level_components(sys, n)?);
    }
    Ok(out)
}

/// Multiplication by x^e on Z/ℓ^K[x]/(g) in the basis 1, x, …, x^{f−1}.
fn power_matrix(ring: Zl, basis: &crate::coeff_rings::CyclotomicFactorBasis, e: u64) -> ModMatrix {
    let f = basis.degree();
    let mut m = ModMatrix::zeros(ring, f, f);
    for j in 0..f {
        let col = basis.root_power(e as i128 + j as i128);
        for (i, &c) in col.iter().enumerate() {
            m.set(i, j, c);
        }
    }
    m
}

/// The components of a Sinnott module through level `top`, with orbit representatives.
pub fn torsion_components(module: &SinnottModule, top: u32) -> Result<Vec<RecoveredComponent>> {
    let mut out = Vec::new();
    for m in 0..=top {
        let explicit: Vec<_> = module.components.range((m, Vec::new())..(m + 1, Vec::new())).collect();
        let listed = module.explicit_through.is_some_and(|t| m <= t);
        if listed {
            for (_, c) in explicit {
                if c.invariant.free_rank > 0 {
                    return Err(Error::invalid(format!("component {:?} at level {m} has a free part", c.rep)));
                }
                out.push(RecoveredComponent { level: m, rep: c.rep.clone(), torsion_exponents: c.invariant.torsion_exponents.clone() });
            }
            continue;
        }
        if !module.is_determined(m) {
            return Err(Error::Truncation(format!("level {m} is not described")));
        }
        let reps: Vec<Vec<u64>> = match &module.rule {
            None => Vec::new(),
            Some(GeneratorRule::Free { rank: 0 }) => Vec::new(),
            Some(GeneratorRule::Free { .. }) | Some(GeneratorRule::Regular) => {
                return Err(Error::invalid("free components have no finite-level model"))
            }
            Some(GeneratorRule::CyclicTorsion { .. }) | Some(GeneratorRule::Stable { .. }) => {
                let table = enumerate_orbits(module.ell, GammaQuotient::new(module.p, module.d, m)?, None)?;
                let mut reps: Vec<Vec<u64>> = table.level_set(m).map(|o| o.rep_at_own_level()).collect();
                if matches!(module.rule, Some(GeneratorRule::Stable { .. })) {
                    reps.truncate(1);
                }
                reps
            }
        };
        for (inv, _) in module.level_content(m)? {
            if inv.free_rank > 0 {
                return Err(Error::invalid("free components have no finite-level model"));
            }
            for rep in &reps {
                out.push(RecoveredComponent { level: m, rep: rep.clone(), torsion_exponents: inv.torsion_exponents.clone() });
            }
        }
    }
    out.sort_by(|a, b| (a.level, &a.rep).cmp(&(b.level, &b.rep)));
    Ok(out)
}

/// The normic system M_n = M/I_n M of a torsion module, n ≤ top: b is the projection and a
/// the trace Σ_{τ ∈ G_n/G_{n+1}} τ, which is the index times the inclusion.
pub fn icomplete_to_normic(module: &SinnottModule, top: u32) -> Result<NormicSystem> {
    let comps = torsion_components(module, top)?;
    let k = comps.iter().flat_map(|c| c.torsion_exponents.iter().copied()).max().unwrap_or(1);
    let ring = Zl::new(module.ell, k)?;
    let d = module.d as usize;
    // coordinate blocks: one per (component, exponent), of size f_level
    struct Block {
        level: u32,
        invariant: u32,
        action: Vec<ModMatrix>,
    }
    let mut bases = Vec::new();
    for m in 0..=top {
        bases.push(hensel_cyclotomic_factors(module.ell, module.p, m, k)?.into_iter().next().expect("factor"));
    }
    let mut blocks = Vec::new();
    for c in &comps {
        let basis = &bases[c.level as usize];
        let action: Vec<ModMatrix> = (0..d).map(|i| power_matrix(ring, basis, c.rep[i])).collect();
        for &t in &c.torsion_exponents {
            blocks.push(Block { level: c.level, invariant: t, action: action.clone() });
        }
    }
    let mut levels = Vec::new();
    let mut coords: Vec<Vec<(usize, usize)>> = Vec::new();
    for n in 0..=top {
        let mut invariants = Vec::new();
        let mut owners = Vec::new();
        let mut acts: Vec<ModMatrix> = Vec::new();
        let chosen: Vec<&Block> = blocks.iter().filter(|b| b.level <= n).collect();
        for (bi, b) in blocks.iter().enumerate() {
            if b.level <= n {
                let f = b.action[0].rows;
                invariants.extend(std::iter::repeat_n(b.invariant, f));
                owners.extend((0..f).map(|j| (bi, j)));
            }
        }
        for i in 0..d {
            let mats: Vec<ModMatrix> = chosen.iter().map(|b| b.action[i].clone()).collect();
            acts.push(block_diagonal(ring, &mats));
        }
        levels.push(FiniteLevelModule { invariants, action: acts });
        coords.push(owners);
    }
    let g = ring.from_u64(module.p.pow(module.d));
    let mut up = Vec::new();
    let mut down = Vec::new();
    for n in 0..top as usize {
        let (lo, hi) = (&coords[n], &coords[n + 1]);
        let mut a = ModMatrix::zeros(ring, hi.len(), lo.len());
        let mut b = ModMatrix::zeros(ring, lo.len(), hi.len());
        for (j, owner) in lo.iter().enumerate() {
            let i = hi.iter().position(|o| o == owner).expect("lower blocks persist");
            a.set(i, j, g);
            b.set(j, i, 1);
        }
        up.push(a);
        down.push(b);
    }
    Ok(NormicSystem { ell: module.ell, p: module.p, d: module.d, ring, levels, up, down })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sinnott::{ComponentSpec, SinnottModuleSpec};

    fn toy(ell: u64, p: u64, levels: usize) -> NormicSystem {
        // M_n = Z/ℓ with trivial action, a = identity, b = multiplication by p
        let spec = NormicSystemSpec {
            ell,
            p,
            d: 1,
            levels: vec![LevelSpec { invariants: vec![1], action: vec![vec![vec![1]]] }; levels],
            up: vec![vec![vec![1]]; levels - 1],
            down: vec![vec![vec![p]]; levels - 1],
        };
        spec.build().unwrap()
    }

    #[test]
    fn toy_system_is_valid() {
        let sys = toy(2, 3, 3);
        assert!(validate_normic(&sys).holds());
        let psi = psi_isomorphism(&sys).unwrap();
        assert!(psi.holds());
        assert_eq!(psi.levels[1].kernel_invariants, Vec::<u32>::new());
        let split = split_level(&sys, 0).unwrap();
        assert!(split.holds && split.exhaustive);
        assert_eq!(split.kernel_log, 0);
    }

    #[test]
    fn wrong_index_is_axiom_four() {
        let mut sys = toy(5, 3, 2);
        sys.down[0] = sys.down[0].scale(3);
        let r = validate_normic(&sys);
        assert_eq!(r.first_violation().unwrap().axiom, Axiom::IV);
    }

    #[test]
    fn non_equivariant_up_map() {
        // γ acts on M_1 = (Z/7)² by diag(1, 2), and 2 has order 3 mod 7
        let spec = NormicSystemSpec {
            ell: 7,
            p: 3,
            d: 1,
            levels: vec![
                LevelSpec { invariants: vec![1], action: vec![vec![vec![1]]] },
                LevelSpec { invariants: vec![1, 1], action: vec![vec![vec![1, 0], vec![0, 2]]] },
            ],
            up: vec![vec![vec![3], vec![1]]],
            down: vec![vec![vec![1, 0]]],
        };
        let sys = spec.build().unwrap();
        let r = validate_normic(&sys);
        assert!(r.violations.iter().any(|v| v.axiom == Axiom::II));
    }

    #[test]
    fn split_toy_with_kernel() {
        let spec = NormicSystemSpec {
            ell: 7,
            p: 3,
            d: 1,
            levels: vec![
                LevelSpec { invariants: vec![1], action: vec![vec![vec![1]]] },
                LevelSpec { invariants: vec![1, 1], action: vec![vec![vec![1, 0], vec![0, 2]]] },
            ],
            up: vec![vec![vec![1], vec![0]]],
            down: vec![vec![vec![3, 0]]],
        };
        let sys = spec.build().unwrap();
        assert!(validate_normic(&sys).holds());
        let s = split_level(&sys, 0).unwrap();
        assert!(s.holds);
        assert_eq!((s.image_log, s.kernel_log), (1, 1));
        // kernel is the second factor
        assert_eq!(s.complement.column(1), vec![0, 1]);
        let psi = psi_isomorphism(&sys).unwrap();
        assert!(psi.holds());
        assert_eq!(psi.levels[1].kernel_invariants, vec![1]);
    }

    #[test]
    fn round_trip_small() {
        let spec = SinnottModuleSpec {
            ell: 2,
            p: 3,
            d: 1,
            components: vec![
                ComponentSpec { level: 0, orbit_rep: vec![0], free_rank: 0, torsion_exponents: vec![1, 3] },
                ComponentSpec { level: 1, orbit_rep: vec![2], free_rank: 0, torsion_exponents: vec![2] },
                ComponentSpec { level: 2, orbit_rep: vec![1], free_rank: 0, torsion_exponents: vec![1] },
            ],
            rule: None,
            explicit_through: None,
            unspecified_beyond: false,
        };
        let module = spec.validate().unwrap();
        let sys = icomplete_to_normic(&module, 2).unwrap();
        assert!(validate_normic(&sys).holds());
        assert!(psi_isomorphism(&sys).unwrap().holds());
        for n in 0..2 {
            assert!(split_level(&sys, n).unwrap().holds);
        }
        assert_eq!(recover_components(&sys).unwrap(), torsion_components(&module, 2).unwrap());
    }

    #[test]
    fn free_components_are_rejected() {
        let spec = SinnottModuleSpec {
            ell: 2,
            p: 3,
            d: 1,
            components: vec![ComponentSpec { level: 1, orbit_rep: vec![1], free_rank: 1, torsion_exponents: vec![] }],
            rule: None,
            explicit_through: None,
            unspecified_beyond: false,
        };
        assert!(icomplete_to_normic(&spec.validate().unwrap(), 1).is_err());
    }

    #[test]
    fn idempotents_match_kernels_on_toy() {
        let sys = toy(2, 3, 2);
        let comps = recover_components(&sys).unwrap();
        assert_eq!(comps, vec![RecoveredComponent { level: 0, rep: vec![0], torsion_exponents: vec![1] }]);
    }

    #[test]
    fn json_round_trip() {
        let sys = toy(2, 3, 2);
        let text = serde_json::to_string(&sys.to_spec()).unwrap();
        assert_eq!(NormicSystemSpec::from_json(&text).unwrap().build().unwrap(), sys);
    }
}
