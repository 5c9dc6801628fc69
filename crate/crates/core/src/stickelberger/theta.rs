//! The Stickelberger element θ: products of character values at u = 1 over ℓ-orbits.

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::Serialize;

use super::assignment::StickelbergerInput;
use super::series::{closed_form_poly, eval_at_one, StickSeries};
use crate::coeff_rings::hensel::shared_factors;
use crate::coeff_rings::zl::bigint_valuation;
use crate::coeff_rings::{CycloExact, Valuation, Zl};
use crate::character_lattice::{enumerate_orbits, OrbitTable};
use crate::error::{Error, Result};

/// θ at one orbit. When the orbit is smaller than a full Galois orbit the product is only
/// an ℓ-adic integer; it is then read through the first cyclotomic factor over Z_ℓ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ThetaOrbit {
    pub rep: Vec<u64>,
    pub level: u32,
    pub size: usize,
    #[serde(serialize_with = "crate::bigjson::opt_int")]
    pub theta: Option<BigInt>,
    /// Residue modulo ℓ^K when `theta` is not a rational integer.
    pub theta_residue: Option<String>,
    /// `None` when θ vanishes.
    pub v_ell: Option<u32>,
}

impl ThetaOrbit {
    pub fn display_value(&self) -> String {
        match (&self.theta, &self.theta_residue) {
            (Some(x), _) => x.to_string(),
            (None, Some(r)) => r.clone(),
            (None, None) => "?".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaElement {
    pub ell: u64,
    pub p: u64,
    pub level: u32,
    /// ℓ-adic precision used for orbits that are not rational.
    pub precision: Option<u32>,
    pub orbits: Vec<ThetaOrbit>,
    /// Π over all of Γ_n^∨.
    #[serde(serialize_with = "crate::bigjson::int")]
    pub full_product: BigInt,
    #[serde(skip)]
    pub values: Vec<CycloExact>,
    #[serde(skip)]
    pub table: OrbitTable,
}

/// χ(Θ)(1) for every character, indexed like Γ_n.
pub fn character_values(series: &StickSeries) -> Result<Vec<CycloExact>> {
    let q = series.quotient();
    (0..q.len() as u64).into_par_iter().map(|i| series.char_eval(&q.to_vec(i))).collect()
}

pub fn theta_element(
    input: &StickelbergerInput,
    series: &StickSeries,
    ell: u64,
    precision: Option<u32>,
) -> Result<ThetaElement> {
    let q = series.quotient();
    if q != input.assignment.quotient() {
        return Err(Error::invalid("series and assignment sit at different levels"));
    }
    let table = enumerate_orbits(ell, q, None)?;
    let values = character_values(series)?;

    let trivial = vec![0u64; q.d as usize];
    let closed = closed_form_poly(input, &trivial)?.expect("trivial character has a closed form");
    if eval_at_one(&closed, q) != values[0] {
        return Err(Error::cross(format!(
            "trivial character: series gives {}, closed form {}",
            values[0],
            eval_at_one(&closed, q)
        )));
    }

    let mut factors = None;
    let mut used_precision = None;
    let mut orbits = Vec::with_capacity(table.orbits.len());
    let mut residue_product: Option<(Zl, u128)> = None;
    for orbit in &table.orbits {
        let mut prod = CycloExact::one(q.p, q.n);
        for m in &orbit.members {
            prod = prod.mul(&values[q.to_index(m) as usize]);
        }
        let row = match prod.as_integer() {
            Some(x) => ThetaOrbit {
                rep: orbit.rep.clone(),
                level: orbit.level,
                size: orbit.size(),
                v_ell: bigint_valuation(&x, ell),
                theta: Some(x),
                theta_residue: None,
            },
            None => {
                let k = precision.unwrap_or_else(|| Zl::default_precision(ell));
                if factors.is_none() {
                    factors = Some(shared_factors(ell, q.p, q.n, k)?);
                    used_precision = Some(k);
                }
                let basis = &factors.as_ref().expect("computed above")[0];
                let embedded = prod.embed(basis);
                let scalar = embedded
                    .as_scalar()
                    .ok_or_else(|| Error::cross(format!("orbit product at {:?} is not Frobenius-fixed", orbit.rep)))?;
                let v_ell = match embedded.valuation() {
                    Valuation::Finite(v) => Some(v),
                    Valuation::AtLeast(_) if prod.is_zero() => None,
                    Valuation::AtLeast(k) => {
                        return Err(Error::Budget(format!(
                            "θ at {:?} vanishes modulo {ell}^{k}; raise the precision",
                            orbit.rep
                        )))
                    }
                };
                let ring = basis.ring();
                residue_product = Some(match residue_product {
                    None => (ring, scalar),
                    Some((r, acc)) => (r, r.mul(acc, scalar)),
                });
                ThetaOrbit {
                    rep: orbit.rep.clone(),
                    level: orbit.level,
                    size: orbit.size(),
                    theta: None,
                    theta_residue: Some(format!("{} mod {ell}^{k}", ring.to_signed(scalar))),
                    v_ell,
                }
            }
        };
        orbits.push(row);
    }

    let full = values.iter().fold(CycloExact::one(q.p, q.n), |acc, v| acc.mul(v));
    let full_product = full
        .as_integer()
        .ok_or_else(|| Error::cross("product over all characters is not rational"))?;
    let rational: BigInt = orbits.iter().filter_map(|o| o.theta.clone()).product();
    match residue_product {
        None if rational != full_product => {
            return Err(Error::cross(format!(
                "orbit products multiply to {rational}, full product is {full_product}"
            )))
        }
        Some((ring, acc)) if ring.mul(acc, ring.from_bigint(&rational)) != ring.from_bigint(&full_product) => {
            return Err(Error::cross("orbit products disagree with the full product modulo ℓ^K"))
        }
        _ => {}
    }

    Ok(ThetaElement { ell, p: q.p, level: q.n, precision: used_precision, orbits, full_product, values, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function_fields::{CarlitzData, Curve, Place, PlaceDescriptor};
    use crate::stickelberger::assignment::FrobeniusAssignment;
    use crate::stickelberger::series::{build_series, modify_v0};

    #[test]
    fn elliptic_level_one() {
        let e = Curve::from_descriptor(5, "weierstrass:0,0,0,1,0").unwrap();
        let a = FrobeniusAssignment::arithmetic(&e, 3, 1).unwrap();
        let d1: PlaceDescriptor = "deg:1".parse().unwrap();
        let input = StickelbergerInput::from_descriptors(a, std::slice::from_ref(&d1), &d1).unwrap();
        let s = modify_v0(&build_series(&input, input.default_truncation()).unwrap(), &input).unwrap();
        let theta = theta_element(&input, &s, 2, None).unwrap();
        let values: Vec<BigInt> = theta.orbits.iter().map(|o| o.theta.clone().unwrap()).collect();
        // P(1) = 4 and P(ζ)P(ζ²) = 37
        assert_eq!(values, vec![BigInt::from(4), BigInt::from(37)]);
        assert_eq!(theta.full_product, BigInt::from(148));
        assert_eq!(theta.orbits[0].v_ell, Some(2));
    }

    #[test]
    fn carlitz_hand_values() {
        let c = CarlitzData::from_descriptor(3, "t", 2).unwrap();
        let a = FrobeniusAssignment::carlitz(c);
        let prime = a.resolve(&"t".parse().unwrap()).unwrap();
        let input = StickelbergerInput::new(a, vec![prime], Place::Infinity).unwrap();
        let s = modify_v0(&build_series(&input, 9).unwrap(), &input).unwrap();
        let theta = theta_element(&input, &s, 2, None).unwrap();
        let values: Vec<BigInt> = theta.orbits.iter().map(|o| o.theta.clone().unwrap()).collect();
        assert_eq!(values, vec![BigInt::from(1), BigInt::from(4)]);
        assert_eq!(theta.orbits[1].v_ell, Some(2));
    }

    #[test]
    fn non_rational_orbits_use_the_embedding() {
        // ℓ = 7 ≡ 1 mod 3: orbits are singletons, values lie in Z[ζ_3] \ Z
        let e = Curve::from_descriptor(5, "weierstrass:0,0,0,1,0").unwrap();
        let a = FrobeniusAssignment::arithmetic(&e, 3, 1).unwrap();
        let d1: PlaceDescriptor = "deg:1".parse().unwrap();
        let input = StickelbergerInput::from_descriptors(a, std::slice::from_ref(&d1), &d1).unwrap();
        let s = modify_v0(&build_series(&input, input.default_truncation()).unwrap(), &input).unwrap();
        let theta = theta_element(&input, &s, 7, Some(8)).unwrap();
        assert_eq!(theta.orbits.len(), 3);
        assert!(theta.orbits[1].theta.is_none());
        // 37 = N(P(ζ)) is prime to 7
        assert_eq!(theta.orbits[1].v_ell, Some(0));
        assert_eq!(theta.precision, Some(8));
    }
}
