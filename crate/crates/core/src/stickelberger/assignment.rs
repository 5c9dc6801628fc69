//! Frobenius classes in Γ_n for the two supported towers, and the validated choice of
//! the truncation set S and the auxiliary place v_0.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::arith;
use crate::character_lattice::GammaQuotient;
use crate::error::{Error, Result};
use crate::function_fields::places::monic_irreducibles;
use crate::function_fields::{CarlitzData, Curve, CurveModel, FqField, Place, PlaceDescriptor, PlaceLedger, ZetaNumerator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TowerKind {
    Arithmetic,
    Carlitz,
}

impl FromStr for TowerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "arithmetic" => Ok(TowerKind::Arithmetic),
            "carlitz" => Ok(TowerKind::Carlitz),
            _ => Err(Error::Parse(format!("unknown tower {s:?} (arithmetic | carlitz)"))),
        }
    }
}

impl fmt::Display for TowerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TowerKind::Arithmetic => "arithmetic",
            TowerKind::Carlitz => "carlitz",
        })
    }
}

/// v is totally split up to level `split` and inert from there up to level `inert`;
/// `None` means the condition never stops holding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SplitData {
    pub split: Option<u32>,
    pub inert: Option<u32>,
}

/// Per degree δ (index δ − 1): Frobenius class ↦ number of places.
pub type ClassCounts = Vec<BTreeMap<u64, BigInt>>;

#[derive(Clone, Debug)]
enum Tower {
    Arithmetic { zeta: ZetaNumerator, field: FqField, rational: bool },
    Carlitz(CarlitzData),
}

#[derive(Clone, Debug)]
pub struct FrobeniusAssignment {
    q: u64,
    quotient: GammaQuotient,
    tower: Tower,
}

impl FrobeniusAssignment {
    /// Constant-field Z_p-tower of the function field of `curve`, at level n.
    pub fn arithmetic(curve: &Curve, p: u64, n: u32) -> Result<Self> {
        let zeta = curve.zeta_numerator()?;
        let rational = matches!(curve.spec().model, CurveModel::ProjectiveLine);
        Self::arithmetic_with(zeta, curve.field().clone(), rational, p, n)
    }

    /// As `arithmetic`, for a curve known only through its zeta numerator.
    pub fn arithmetic_from_zeta(zeta: ZetaNumerator, p: u64, n: u32) -> Result<Self> {
        let field = FqField::new(zeta.q)?;
        let rational = zeta.genus == 0;
        Self::arithmetic_with(zeta, field, rational, p, n)
    }

    fn arithmetic_with(zeta: ZetaNumerator, field: FqField, rational: bool, p: u64, n: u32) -> Result<Self> {
        arith::require_prime(p)?;
        let quotient = GammaQuotient::new(p, 1, n)?;
        Ok(FrobeniusAssignment { q: zeta.q, quotient, tower: Tower::Arithmetic { zeta, field, rational } })
    }

    /// The p-part of the 𝔭-cyclotomic Carlitz tower; Γ sits at level (Carlitz level − 1).
    pub fn carlitz(data: CarlitzData) -> Self {
        FrobeniusAssignment { q: data.field().size(), quotient: data.quotient(), tower: Tower::Carlitz(data) }
    }

    pub fn kind(&self) -> TowerKind {
        match self.tower {
            Tower::Arithmetic { .. } => TowerKind::Arithmetic,
            Tower::Carlitz(_) => TowerKind::Carlitz,
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.quotient.p
    }

    pub fn level(&self) -> u32 {
        self.quotient.n
    }

    pub fn quotient(&self) -> GammaQuotient {
        self.quotient
    }

    pub fn genus(&self) -> u32 {
        match &self.tower {
            Tower::Arithmetic { zeta, .. } => zeta.genus,
            Tower::Carlitz(_) => 0,
        }
    }

    /// P(u) of the base field.
    pub fn zeta(&self) -> ZetaNumerator {
        match &self.tower {
            Tower::Arithmetic { zeta, .. } => zeta.clone(),
            Tower::Carlitz(_) => ZetaNumerator::trivial(self.q),
        }
    }

    pub fn carlitz_data(&self) -> Option<&CarlitzData> {
        match &self.tower {
            Tower::Carlitz(c) => Some(c),
            Tower::Arithmetic { .. } => None,
        }
    }

    pub fn field(&self) -> &FqField {
        match &self.tower {
            Tower::Arithmetic { field, .. } => field,
            Tower::Carlitz(c) => c.field(),
        }
    }

    /// The same tower viewed at a lower level m ≤ n.
    pub fn restrict(&self, m: u32) -> Result<Self> {
        if m > self.level() {
            return Err(Error::invalid(format!("cannot restrict level {} to {m}", self.level())));
        }
        Ok(FrobeniusAssignment { q: self.q, quotient: self.quotient.at_level(m), tower: self.tower.clone() })
    }

    /// Degree of the conductor of the tower at this level.
    pub fn conductor_degree(&self) -> u32 {
        match &self.tower {
            Tower::Arithmetic { .. } => 0,
            Tower::Carlitz(c) => (self.level() + 1) * c.prime_degree(),
        }
    }

    pub fn resolve(&self, desc: &PlaceDescriptor) -> Result<Place> {
        match (&self.tower, desc) {
            (Tower::Arithmetic { rational: false, .. }, PlaceDescriptor::Polynomial(_) | PlaceDescriptor::Infinity) => {
                Err(Error::invalid(format!(
                    "place {desc} names a point of P1; places of a higher-genus curve are given as deg:k"
                )))
            }
            (Tower::Carlitz(_), PlaceDescriptor::Degree(_)) => {
                Err(Error::invalid("Carlitz places must be explicit polynomials or inf"))
            }
            _ => Place::resolve(desc, self.field()),
        }
    }

    /// Class of Fr_v in Γ_n; `None` for a ramified place.
    pub fn class_of(&self, v: &Place) -> Result<Option<u64>> {
        match &self.tower {
            Tower::Arithmetic { .. } => Ok(Some(self.degree_class(v.degree()))),
            Tower::Carlitz(c) => {
                if let Place::Finite(poly) = v {
                    if poly.as_slice() == c.prime() {
                        return Ok(None);
                    }
                }
                let top = c.frobenius(v)?;
                Ok(Some(c.quotient().project(top, self.level())))
            }
        }
    }

    fn degree_class(&self, degree: u32) -> u64 {
        self.quotient.to_index(&[degree as u64 % self.quotient.modulus()])
    }

    pub fn split_data(&self, v: &Place) -> Result<SplitData> {
        match &self.tower {
            Tower::Arithmetic { .. } => Ok(SplitData {
                split: Some(arith::v_p(v.degree() as u128, self.p()).expect("degree is positive")),
                inert: None,
            }),
            Tower::Carlitz(c) => {
                let top = match self.class_of(v)? {
                    None => return Ok(SplitData { split: Some(0), inert: Some(0) }),
                    Some(_) if *v == Place::Infinity => return Ok(SplitData { split: None, inert: None }),
                    Some(_) => c.frobenius(v)?,
                };
                let gamma = c.quotient();
                let split = (0..=gamma.n).rev().find(|&k| gamma.project(top, k) == 0).unwrap_or(0);
                // Γ is procyclic only when d = 1
                let inert = if gamma.d == 1 { None } else { Some(split) };
                Ok(SplitData { split: Some(split), inert })
            }
        }
    }

    /// Places of degree ≤ D outside `excluded`, counted per Frobenius class.
    pub fn class_counts(&self, max_degree: u32, excluded: &[Place]) -> Result<ClassCounts> {
        let mut out: ClassCounts = vec![BTreeMap::new(); max_degree as usize];
        match &self.tower {
            Tower::Arithmetic { zeta, .. } => {
                let ledger = PlaceLedger::from_zeta(zeta, max_degree)?;
                self.counts_from_ledger(&ledger, excluded, &mut out)?;
            }
            Tower::Carlitz(c) => {
                let irreducibles = monic_irreducibles(c.field(), max_degree)?;
                for (deg, polys) in irreducibles.iter().enumerate().skip(1) {
                    for f in polys {
                        if f.as_slice() == c.prime() || excluded.iter().any(|v| matches!(v, Place::Finite(g) if g == f)) {
                            continue;
                        }
                        let class = c.quotient().project(c.frobenius_of_residue(f)?, self.level());
                        *out[deg - 1].entry(class).or_insert_with(BigInt::zero) += 1;
                    }
                }
                if max_degree >= 1 && !excluded.contains(&Place::Infinity) {
                    *out[0].entry(0).or_insert_with(BigInt::zero) += 1;
                }
            }
        }
        Ok(out)
    }

    /// Arithmetic tower only: ledger counts minus the excluded places of each degree.
    pub fn counts_from_ledger(&self, ledger: &PlaceLedger, excluded: &[Place], out: &mut ClassCounts) -> Result<()> {
        if self.kind() != TowerKind::Arithmetic {
            return Err(Error::invalid("degree ledgers describe the arithmetic tower only"));
        }
        if ledger.max_degree() < out.len() as u32 {
            return Err(Error::Truncation(format!(
                "place ledger reaches degree {} but the series needs {}",
                ledger.max_degree(),
                out.len()
            )));
        }
        for (i, slot) in out.iter_mut().enumerate() {
            let deg = i as u32 + 1;
            let removed = excluded.iter().filter(|v| v.degree() == deg).count();
            let count = ledger.count(deg) - BigInt::from(removed);
            if count.is_negative() {
                return Err(Error::invalid(format!("S lists more places of degree {deg} than exist")));
            }
            slot.clear();
            if !count.is_zero() {
                slot.insert(self.degree_class(deg), count);
            }
        }
        Ok(())
    }
}

/// A tower together with the truncation set S and the auxiliary place v_0.
#[derive(Clone, Debug)]
pub struct StickelbergerInput {
    pub assignment: FrobeniusAssignment,
    pub s: Vec<Place>,
    pub v0: Place,
}

impl StickelbergerInput {
    pub fn new(assignment: FrobeniusAssignment, s: Vec<Place>, v0: Place) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::invalid("S must contain at least one place"));
        }
        for (i, v) in s.iter().enumerate() {
            if !matches!(v, Place::Abstract { .. }) && s[..i].contains(v) {
                return Err(Error::invalid(format!("place {} is listed twice in S", v.describe())));
            }
        }
        if !matches!(v0, Place::Abstract { .. }) && s.contains(&v0) {
            return Err(Error::invalid("v0 must lie outside S"));
        }
        if let Some(c) = assignment.carlitz_data() {
            let prime = Place::Finite(c.prime().to_vec());
            if !s.contains(&prime) {
                return Err(Error::invalid("S must contain the ramified Carlitz prime"));
            }
            if v0 == prime {
                return Err(Error::invalid("v0 must be unramified"));
            }
        }
        let input = StickelbergerInput { assignment, s, v0 };
        if input.assignment.kind() == TowerKind::Arithmetic {
            // each abstract place must exist on the curve
            let top = input.s.iter().map(Place::degree).chain([input.v0.degree()]).max().unwrap_or(1);
            let ledger = PlaceLedger::from_zeta(&input.assignment.zeta(), top)?;
            for d in 1..=top {
                let used = input.s.iter().chain([&input.v0]).filter(|v| v.degree() == d).count();
                if BigInt::from(used) > ledger.count(d) {
                    return Err(Error::invalid(format!("S and v0 use {used} places of degree {d}, only {} exist", ledger.count(d))));
                }
            }
        }
        Ok(input)
    }

    pub fn from_descriptors(assignment: FrobeniusAssignment, s: &[PlaceDescriptor], v0: &PlaceDescriptor) -> Result<Self> {
        let s = s.iter().map(|d| assignment.resolve(d)).collect::<Result<Vec<_>>>()?;
        let v0 = assignment.resolve(v0)?;
        Self::new(assignment, s, v0)
    }

    pub fn restrict(&self, m: u32) -> Result<Self> {
        Ok(StickelbergerInput { assignment: self.assignment.restrict(m)?, s: self.s.clone(), v0: self.v0.clone() })
    }

    pub fn s_degree(&self) -> u32 {
        self.s.iter().map(Place::degree).sum()
    }

    /// Degree beyond which the v_0-modified series vanishes at this level.
    pub fn degree_bound(&self) -> u32 {
        (2 * self.assignment.genus() + self.v0.degree() + self.s_degree() + self.assignment.conductor_degree())
            .saturating_sub(2)
    }

    /// 2g + deg v_0·(1 + p^n) + Σ_S deg v + 4.
    pub fn default_truncation(&self) -> u32 {
        let a = &self.assignment;
        2 * a.genus() + self.v0.degree() * (1 + a.quotient().modulus() as u32) + self.s_degree() + 4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_classes_follow_degree() {
        let a = FrobeniusAssignment::arithmetic(&Curve::projective_line(5).unwrap(), 3, 2).unwrap();
        let v = a.resolve(&"t^2+2".parse().unwrap()).unwrap();
        assert_eq!(a.class_of(&v).unwrap(), Some(2));
        assert_eq!(a.split_data(&Place::Abstract { degree: 9 }).unwrap().split, Some(2));
        let counts = a.class_counts(2, &[Place::Finite(vec![0, 1])]).unwrap();
        assert_eq!(counts[0][&1], BigInt::from(5));
        assert_eq!(counts[1][&2], BigInt::from(10));
    }

    #[test]
    fn input_validation() {
        let a = FrobeniusAssignment::arithmetic(&Curve::projective_line(5).unwrap(), 3, 1).unwrap();
        let t: PlaceDescriptor = "t".parse().unwrap();
        assert!(StickelbergerInput::from_descriptors(a.clone(), &[], &t).is_err());
        assert!(StickelbergerInput::from_descriptors(a.clone(), std::slice::from_ref(&t), &t).is_err());
        assert!(StickelbergerInput::from_descriptors(a.clone(), &[t.clone(), t.clone()], &"t-1".parse().unwrap()).is_err());
        let ok = StickelbergerInput::from_descriptors(a, &[t], &"t-1".parse().unwrap()).unwrap();
        assert_eq!(ok.degree_bound(), 0);
        assert_eq!(ok.default_truncation(), 1 + 3 + 1 + 4);

        let e = Curve::from_descriptor(5, "weierstrass:0,0,0,1,0").unwrap();
        let a = FrobeniusAssignment::arithmetic(&e, 3, 1).unwrap();
        assert!(a.resolve(&"t".parse().unwrap()).is_err());
        let d1: PlaceDescriptor = "deg:1".parse().unwrap();
        let ok = StickelbergerInput::from_descriptors(a, std::slice::from_ref(&d1), &d1).unwrap();
        assert_eq!(ok.degree_bound(), 2);
    }

    #[test]
    fn carlitz_places() {
        let c = CarlitzData::from_descriptor(3, "t", 2).unwrap();
        let a = FrobeniusAssignment::carlitz(c);
        let prime = a.resolve(&"t".parse().unwrap()).unwrap();
        assert_eq!(a.class_of(&prime).unwrap(), None);
        assert_eq!(a.split_data(&Place::Infinity).unwrap().split, None);
        assert_eq!(a.split_data(&prime).unwrap(), SplitData { split: Some(0), inert: Some(0) });
        let w = a.resolve(&"t^2+1".parse().unwrap()).unwrap();
        assert_eq!(a.split_data(&w).unwrap().split, Some(1));
        assert!(StickelbergerInput::new(a.clone(), vec![w], Place::Infinity).is_err());
        let input = StickelbergerInput::new(a, vec![prime], Place::Infinity).unwrap();
        assert_eq!(input.degree_bound(), 2);
        let counts = input.assignment.class_counts(2, &input.s).unwrap();
        let degree_one: BigInt = counts[0].values().sum();
        // t+1, t+2 and ∞
        assert_eq!(degree_one, BigInt::from(3));
    }
}
