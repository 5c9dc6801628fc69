//! Seeded random module descriptions for batch property runs.

use std::collections::BTreeSet;

use rand::Rng;

use crate::arith;
use crate::character_lattice::{orbit_of, Character};
use crate::error::Result;
use crate::sinnott::{ComponentSpec, GeneratorRule, SinnottModuleSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleShape {
    pub d: u32,
    /// Highest explicit level.
    pub top: u32,
    pub max_components_per_level: usize,
    pub max_exponent: u32,
    /// Number of cyclic factors per component is at most this.
    pub max_factors: usize,
    pub torsion_only: bool,
    /// Attach a generator rule above `top` with this probability.
    pub rule_probability: f64,
    /// Cap on f_level · Σ exponents for each component; None for no cap.
    pub max_log_order: Option<u32>,
}

impl SampleShape {
    pub fn torsion(top: u32) -> Self {
        SampleShape {
            d: 1,
            top,
            max_components_per_level: 2,
            max_exponent: 3,
            max_factors: 2,
            torsion_only: true,
            rule_probability: 0.0,
            max_log_order: None,
        }
    }
}

/// A character of exact level m, drawn uniformly from those of level m.
pub fn random_character<R: Rng>(rng: &mut R, p: u64, d: u32, m: u32) -> Vec<u64> {
    let modulus = p.pow(m);
    loop {
        let a: Vec<u64> = (0..d).map(|_| rng.gen_range(0..modulus)).collect();
        if m == 0 || a.iter().any(|&x| x % p != 0) {
            return a;
        }
    }
}

pub fn random_sinnott_spec<R: Rng>(rng: &mut R, ell: u64, p: u64, shape: &SampleShape) -> Result<SinnottModuleSpec> {
    arith::require_ell_p(ell, p)?;
    let mut components = Vec::new();
    for m in 0..=shape.top {
        let f = arith::mult_order(ell, p.pow(m)).unwrap_or(1) as u32;
        let count = rng.gen_range(0..=shape.max_components_per_level);
        let mut seen = BTreeSet::new();
        for _ in 0..count {
            let a = random_character(rng, p, shape.d, m);
            let rep = orbit_of(&Character::new(p, m, a), ell).rep;
            if !seen.insert(rep.clone()) {
                continue;
            }
            let free_rank = if shape.torsion_only { 0 } else { rng.gen_range(0..=2) };
            let factors = rng.gen_range(0..=shape.max_factors);
            let mut torsion: Vec<u32> = (0..factors).map(|_| rng.gen_range(1..=shape.max_exponent)).collect();
            if let Some(cap) = shape.max_log_order {
                while !torsion.is_empty() && f * torsion.iter().sum::<u32>() > cap {
                    torsion.pop();
                }
            }
            components.push(ComponentSpec { level: m, orbit_rep: rep, free_rank, torsion_exponents: torsion });
        }
    }
    let rule = if rng.gen_bool(shape.rule_probability.clamp(0.0, 1.0)) {
        Some(match (shape.torsion_only, rng.gen_range(0..3)) {
            (false, 0) => GeneratorRule::Free { rank: rng.gen_range(1..=2) },
            (_, 1) => GeneratorRule::Stable {
                from_level: shape.top + 1,
                free_rank: 0,
                torsion_exponents: vec![rng.gen_range(1..=shape.max_exponent)],
            },
            _ => GeneratorRule::CyclicTorsion { exponent: rng.gen_range(1..=shape.max_exponent) },
        })
    } else {
        None
    };
    Ok(SinnottModuleSpec {
        ell,
        p,
        d: shape.d,
        components,
        rule,
        explicit_through: Some(shape.top),
        unspecified_beyond: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sinnott::SinnottModule;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_validate_and_repeat() {
        let shape = SampleShape { rule_probability: 0.5, torsion_only: false, d: 2, ..SampleShape::torsion(3) };
        for seed in 0..20 {
            let a = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed), 2, 3, &shape).unwrap();
            let b = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed), 2, 3, &shape).unwrap();
            assert_eq!(a, b);
            SinnottModule::new(&a).unwrap();
        }
    }

    #[test]
    fn log_order_cap() {
        let shape = SampleShape { max_log_order: Some(9), max_exponent: 5, max_factors: 3, ..SampleShape::torsion(2) };
        for seed in 0..50 {
            let s = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed), 2, 3, &shape).unwrap();
            for c in &s.components {
                let f = arith::mult_order(2, 3u64.pow(c.level)).unwrap() as u32;
                assert!(f * c.torsion_exponents.iter().sum::<u32>() <= 9);
            }
        }
    }
}
