use std::sync::Arc;

use iwasawa_core::character_lattice::{enumerate_orbits, f_n_closed, f_n_direct, GammaQuotient};
use iwasawa_core::coeff_rings::{hensel_cyclotomic_factors, CycloExact, Zl};
use iwasawa_core::function_fields::{zeta::layer_determinant, Curve, PlaceLedger};
use iwasawa_core::iwasawa_algebra::{AlgebraElement, LevelAlgebra};
use iwasawa_core::normic::{icomplete_to_normic, recover_components, torsion_components, validate_normic};
use iwasawa_core::sampling::{random_sinnott_spec, SampleShape};
use iwasawa_core::sinnott::{level_stats, sinnott_limit, LimitKind, SinnottModule};
use iwasawa_core::stickelberger::{build_series, modify_v0, FrobeniusAssignment, StickelbergerInput};
use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PAIRS: [(u64, u64); 5] = [(2, 3), (3, 2), (2, 5), (5, 2), (3, 7)];

fn cyclo(p: u64, level: u32, v: &[i64]) -> CycloExact {
    CycloExact::from_exponent_vector(p, level, v.iter().map(|&x| BigInt::from(x)).collect())
}

fn small_vec(len: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-20i64..20, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cyclotomic_ring_laws(a in small_vec(9), b in small_vec(9), c in small_vec(9)) {
        let (x, y, z) = (cyclo(3, 2, &a), cyclo(3, 2, &b), cyclo(3, 2, &c));
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert_eq!(x.mul(&y.add(&z)), x.mul(&y).add(&x.mul(&z)));
        prop_assert_eq!(x.mul(&y), y.mul(&x));
        prop_assert_eq!(x.mul(&y).norm(), x.norm() * y.norm());
        for s in [2u64, 4, 5, 7, 8] {
            prop_assert_eq!(x.mul(&y).galois(s), x.galois(s).mul(&y.galois(s)));
        }
    }

    #[test]
    fn embedding_commutes_with_ring_operations(a in small_vec(5), b in small_vec(5), pick in 0usize..4) {
        // Φ_5 splits into four linear factors over Z_11
        let bases = hensel_cyclotomic_factors(11, 5, 1, 6).unwrap();
        let basis = Arc::new(bases[pick % bases.len()].clone());
        let (x, y) = (cyclo(5, 1, &a), cyclo(5, 1, &b));
        prop_assert_eq!(x.add(&y).embed(&basis), x.embed(&basis).add(&y.embed(&basis)));
        prop_assert_eq!(x.mul(&y).embed(&basis), x.embed(&basis).mul(&y.embed(&basis)));
    }

    #[test]
    fn unramified_valuation_is_additive(a in small_vec(9), b in small_vec(9)) {
        // 2 has order 6 mod 9: Z_2[ζ_9] is unramified of degree 6
        let basis = Arc::new(hensel_cyclotomic_factors(2, 3, 2, 24).unwrap().remove(0));
        let (x, y) = (cyclo(3, 2, &a).embed(&basis), cyclo(3, 2, &b).embed(&basis));
        let (vx, vy, vxy) = (x.valuation(), y.valuation(), x.mul(&y).valuation());
        if let (Some(s), Some(t)) = (vx.finite(), vy.finite()) {
            if s + t < 24 {
                prop_assert_eq!(vxy.finite(), Some(s + t));
            }
        }
    }

    #[test]
    fn orbit_counting(ell in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
                      p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
                      d in 1u32..=2, n in 0u32..=3) {
        prop_assume!(ell != p);
        let q = GammaQuotient::new(p, d, n).unwrap();
        prop_assume!(q.size().unwrap() <= 40_000);
        let table = enumerate_orbits(ell, q, None).unwrap();
        table.counting_identities().unwrap();
        for m in 0..=n {
            let f = f_n_direct(ell, p, m).unwrap();
            prop_assert_eq!(f, f_n_closed(ell, p, m).unwrap());
            prop_assert!(table.level_set(m).all(|o| o.size() as u64 == f));
        }
    }

    #[test]
    fn orbits_include_into_higher_levels((ell, p) in prop::sample::select(PAIRS.to_vec()), n in 0u32..=2) {
        let low = enumerate_orbits(ell, GammaQuotient::new(p, 1, n).unwrap(), None).unwrap();
        let high = enumerate_orbits(ell, GammaQuotient::new(p, 1, n + 1).unwrap(), None).unwrap();
        for o in &low.orbits {
            let images: Vec<usize> = o.members.iter().map(|a| high.find(&[a[0] * p]).unwrap()).collect();
            prop_assert!(images.iter().all(|&i| i == images[0]));
            prop_assert_eq!(high.orbits[images[0]].level, o.level);
        }
    }

    #[test]
    fn idempotents_decompose_elements((ell, p) in prop::sample::select(PAIRS.to_vec()), seed in any::<u64>()) {
        let q = GammaQuotient::new(p, 1, 2).unwrap();
        let alg = LevelAlgebra::new(ell, q, 12).unwrap();
        let ring = alg.ring();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut random = || {
            let c: Vec<u128> = (0..q.len()).map(|_| rand::Rng::gen_range(&mut rng, 0..ring.modulus())).collect();
            AlgebraElement::from_coeffs(q, ring, c).unwrap()
        };
        let (x, y) = (random(), random());
        let es = alg.idempotents();
        let mut sum = AlgebraElement::zero(q, ring);
        for e in &es {
            sum = sum.add(&e.mul(&x));
        }
        prop_assert_eq!(sum, x.clone());
        for i in 0..es.len() {
            let lhs = alg.component_map(&x.mul(&y), i);
            prop_assert_eq!(lhs, alg.component_map(&x, i).mul(&alg.component_map(&y, i)));
        }
    }

    #[test]
    fn closed_forms_match_component_sums((ell, p) in prop::sample::select(PAIRS.to_vec()), seed in any::<u64>(), d in 1u32..=2) {
        let shape = SampleShape { d, torsion_only: false, rule_probability: 0.5, ..SampleShape::torsion(4) };
        let spec = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed), ell, p, &shape).unwrap();
        let module = SinnottModule::new(&spec).unwrap();
        for m in 0..=5 {
            // errors here are formula/direct disagreements or non-integral r, ρ, t
            level_stats(&module, m).unwrap();
        }
    }

    #[test]
    fn order_sequences_are_p_adically_congruent((ell, p) in prop::sample::select(PAIRS.to_vec()), seed in any::<u64>()) {
        let shape = SampleShape { rule_probability: 0.7, ..SampleShape::torsion(3) };
        let spec = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed), ell, p, &shape).unwrap();
        let module = SinnottModule::new(&spec).unwrap();
        let orders: Vec<u128> = (0..=7).map(|m| level_stats(&module, m).unwrap().log_order.unwrap()).collect();
        let lim = sinnott_limit(&module, LimitKind::Order, 6).unwrap();
        prop_assert!(lim.congruences_hold());
        for n in 0..=6u32 {
            let modulus = (p as u128).pow(n + 1);
            // c_n = ℓ^{orders[n]}; compare the integers mod p^{n+1}
            let c = |e: u128| iwasawa_core::arith::pow_mod(ell, e as u64, modulus as u64);
            prop_assert_eq!(c(orders[n as usize + 1]), c(orders[n as usize]));
        }
    }

    #[test]
    fn normic_round_trip(seed in any::<u64>()) {
        let shape = SampleShape { max_log_order: Some(9), max_exponent: 4, ..SampleShape::torsion(2) };
        let spec = random_sinnott_spec(&mut ChaCha8Rng::seed_from_u64(seed), 2, 3, &shape).unwrap();
        let module = SinnottModule::new(&spec).unwrap();
        let sys = icomplete_to_normic(&module, 2).unwrap();
        prop_assert!(validate_normic(&sys).holds());
        prop_assert_eq!(recover_components(&sys).unwrap(), torsion_components(&module, 2).unwrap());
    }

    #[test]
    fn layer_determinants_agree(a4 in 0i64..5, a6 in 1i64..5, m in 1u64..=9, k in 1u64..=9) {
        let curve = match Curve::from_descriptor(5, &format!("weierstrass:0,0,0,{a4},{a6}")) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        let zeta = curve.zeta_numerator().unwrap();
        prop_assert!(zeta.weil_bound_holds());
        let h = layer_determinant(&zeta, m * k).unwrap();
        prop_assert!(h > BigInt::from(0));
        // the m·k layer contains the m layer, whose class number divides
        let hm = layer_determinant(&zeta, m).unwrap();
        prop_assert_eq!(h % hm, BigInt::from(0));
    }

    #[test]
    fn place_ledger_mobius(q in prop::sample::select(vec![2u64, 3, 4, 5, 7, 9]), a in prop::sample::select(vec![
        "P1", "weierstrass:0,0,1,0,0", "weierstrass:1,0,0,0,1", "hyperelliptic:1,0,0,0,0,1;0,1",
    ])) {
        let curve = match Curve::from_descriptor(q, a) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        let zeta = curve.zeta_numerator().unwrap();
        let ledger = PlaceLedger::from_zeta(&zeta, 8).unwrap();
        let n: Vec<BigInt> = (1..=8).map(|m| zeta.point_count(m)).collect();
        ledger.mobius_check(&n).unwrap();
        for (m, nm) in n.iter().enumerate().take(3) {
            prop_assert_eq!(nm.clone(), BigInt::from(curve.count_points(m as u32 + 1).unwrap()));
        }
    }

    #[test]
    fn character_values_are_galois_equivariant(n in 1u32..=2, s in 1u64..=3, a in 1u64..9) {
        let curve = Curve::from_descriptor(5, "weierstrass:0,0,0,1,0").unwrap();
        let assignment = FrobeniusAssignment::arithmetic(&curve, 3, n).unwrap();
        let input = StickelbergerInput::from_descriptors(
            assignment, &[format!("deg:{s}").parse().unwrap()], &"deg:1".parse().unwrap()).unwrap();
        let series = modify_v0(&build_series(&input, input.default_truncation()).unwrap(), &input).unwrap();
        let modulus = 3u64.pow(n);
        let chi = a % modulus;
        for sigma in (1..modulus).filter(|x| x % 3 != 0) {
            let lhs = series.char_eval(&[chi * sigma % modulus]).unwrap();
            let rhs = series.char_eval(&[chi]).unwrap().galois(sigma);
            prop_assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn hensel_factors_multiply_to_cyclotomic() {
    use iwasawa_core::coeff_rings::poly;
    for ell in [2u64, 3, 5, 7, 11, 13, 17, 19] {
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19] {
            if ell == p {
                continue;
            }
            for n in 0..=4u32 {
                if p.pow(n) > 20_000 {
                    continue;
                }
                let ring = Zl::new(ell, 8).unwrap();
                let factors = hensel_cyclotomic_factors(ell, p, n, 8).unwrap();
                let mut product = vec![1u128];
                for f in &factors {
                    product = poly::mul(&ring, &product, f.factor());
                }
                let target = if n == 0 {
                    vec![ring.neg(1), 1]
                } else {
                    poly::cyclotomic_prime_power(&ring, p, n)
                };
                assert_eq!(product, target, "ℓ={ell} p={p} n={n}");
                let f = f_n_direct(ell, p, n).unwrap() as usize;
                assert!(factors.iter().all(|b| b.degree() == f), "ℓ={ell} p={p} n={n}");
            }
        }
    }
}
