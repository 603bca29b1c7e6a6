//! Ring, module and character invariants against brute-force oracles.

use std::collections::BTreeSet;

use proptest::prelude::*;

use ringwalk::characters::{dual_module, invariant_factors_from_table};
use ringwalk::module::{annihilator_of, check_cyclic_equals_unit_orbit, cyclic_submodules};
use ringwalk::ring::{principal_ideal, units};
use ringwalk::spectrum::{fourier_p, SpectralContext};
use ringwalk::{
    build_cyclic_module, build_free_module, build_gf, build_product, build_zn, direct_sum, quotient_ring, Elem,
    FiniteModule, RingRef,
};

fn zn(n: u64) -> RingRef {
    build_zn(n).unwrap()
}

fn ring_strategy() -> impl Strategy<Value = RingRef> {
    prop_oneof![
        (1u64..=16).prop_map(zn),
        Just(()).prop_map(|_| build_gf(2, 2, &[1, 1, 1]).unwrap()),
        Just(()).prop_map(|_| build_gf(2, 3, &[1, 1, 0, 1]).unwrap()),
        Just(()).prop_map(|_| build_gf(3, 2, &[1, 0, 1]).unwrap()),
        (2u64..=4, 2u64..=4).prop_map(|(a, b)| build_product(&[zn(a), zn(b)]).unwrap()),
        (2u64..=12, 0u64..12).prop_map(|(n, a)| {
            let r = zn(n);
            let i = principal_ideal(&r, (a % n) as Elem);
            quotient_ring(&r, &i).unwrap().ring
        }),
    ]
}

/// A module of size at most `limit` over a random ring: `R`, `R^2`, `R/(a)` or
/// `R + R/(a)`.
fn module_strategy(limit: usize) -> impl Strategy<Value = FiniteModule> {
    (ring_strategy(), 0usize..4, any::<u64>()).prop_filter_map("too large", move |(ring, shape, a)| {
        let a = (a % ring.size() as u64) as Elem;
        let cyclic = || build_cyclic_module(&ring, &principal_ideal(&ring, a)).unwrap();
        let m = match shape {
            0 => build_free_module(&ring, 1).unwrap(),
            1 if ring.size() * ring.size() <= limit => build_free_module(&ring, 2).unwrap(),
            2 => cyclic(),
            3 if ring.size() * ring.size() <= limit => {
                direct_sum(&[build_free_module(&ring, 1).unwrap(), cyclic()]).unwrap()
            }
            _ => return None,
        };
        (m.size() <= limit).then_some(m)
    })
}

fn brute_units(ring: &RingRef) -> BTreeSet<Elem> {
    ring.elements()
        .filter(|&a| ring.elements().any(|b| ring.mul(a, b) == ring.one()))
        .collect()
}

fn span(module: &FiniteModule, v: Elem) -> BTreeSet<Elem> {
    module.ring().elements().map(|r| module.act(r, v)).collect()
}

/// Invariant factors of `Z/m_1 x ... x Z/m_k` via prime-power parts.
fn canonical_factors(moduli: &[u64]) -> Vec<u64> {
    let mut by_prime: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
    for &m in moduli {
        let mut m = m;
        let mut p = 2;
        while m > 1 {
            let mut q = 1;
            while m % p == 0 {
                m /= p;
                q *= p;
            }
            if q > 1 {
                by_prime.entry(p).or_default().push(q);
            }
            p += 1;
        }
    }
    let width = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut factors = vec![1u64; width];
    for powers in by_prime.values_mut() {
        powers.sort_unstable_by(|a, b| b.cmp(a));
        for (i, q) in powers.iter().enumerate() {
            factors[width - 1 - i] *= q;
        }
    }
    factors
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_axioms_hold(ring in ring_strategy()) {
        prop_assert!(ring.check_axioms().is_ok());
    }

    #[test]
    fn units_match_brute_force(ring in ring_strategy()) {
        let u: BTreeSet<Elem> = units(&ring).members().iter().copied().collect();
        prop_assert_eq!(u, brute_units(&ring));
    }

    #[test]
    fn units_map_onto_quotient_units(ring in ring_strategy(), a in any::<u64>()) {
        let a = (a % ring.size() as u64) as Elem;
        let q = quotient_ring(&ring, &principal_ideal(&ring, a)).unwrap();
        let image: BTreeSet<Elem> = units(&ring).members().iter().map(|&u| q.project(u)).collect();
        prop_assert_eq!(image, brute_units(&q.ring));
    }

    #[test]
    fn cyclic_span_size_is_index_of_annihilator(module in module_strategy(64)) {
        let r = module.ring().size();
        for v in module.elements() {
            let ann = annihilator_of(&module, v);
            prop_assert_eq!(span(&module, v).len() * ann.len(), r);
        }
    }

    #[test]
    fn annihilators_are_ideals(module in module_strategy(64)) {
        let ring = module.ring();
        for v in module.elements() {
            let ann: BTreeSet<Elem> = annihilator_of(&module, v).members().iter().copied().collect();
            let brute: BTreeSet<Elem> = ring.elements().filter(|&r| module.act(r, v) == module.zero()).collect();
            prop_assert_eq!(&ann, &brute);
            for &a in &ann {
                for &b in &ann {
                    prop_assert!(ann.contains(&ring.sub(a, b)));
                }
                for r in ring.elements() {
                    prop_assert!(ann.contains(&ring.mul(r, a)));
                }
            }
        }
    }

    #[test]
    fn cyclic_generators_are_one_unit_orbit(module in module_strategy(32)) {
        let us = brute_units(module.ring());
        let spans: Vec<BTreeSet<Elem>> = module.elements().map(|v| span(&module, v)).collect();
        let mut oracle = true;
        for v in module.elements() {
            for w in module.elements() {
                let associates = us.iter().any(|&u| module.act(u, v) == w);
                oracle &= (spans[v] == spans[w]) == associates;
            }
        }
        prop_assert!(oracle);
        prop_assert_eq!(check_cyclic_equals_unit_orbit(&module), oracle);
    }

    #[test]
    fn cyclic_submodules_partition_by_span(module in module_strategy(64)) {
        let subs = cyclic_submodules(&module);
        let distinct: BTreeSet<BTreeSet<Elem>> = module.elements().map(|v| span(&module, v)).collect();
        prop_assert_eq!(subs.len(), distinct.len());
        for s in &subs {
            let members: BTreeSet<Elem> = s.members.iter().copied().collect();
            prop_assert_eq!(&members, &span(&module, s.generator));
        }
    }

    #[test]
    fn dual_has_the_same_size_and_separates_points(module in module_strategy(64)) {
        let dual = dual_module(&module);
        prop_assert_eq!(dual.size(), module.size());
        prop_assert!(dual.double_dual_is_injective());
        prop_assert!(dual.module().check_axioms().is_ok());
        // (r chi)(v) = chi(r v)
        for (i, chi) in dual.characters().iter().enumerate().take(8) {
            for r in module.ring().elements() {
                let rchi = dual.character(dual.module().act(r, i));
                for v in module.elements() {
                    prop_assert_eq!(rchi.evaluate(v), chi.evaluate(module.act(r, v)));
                }
            }
        }
    }

    #[test]
    fn pair_count_equals_module_size(module in module_strategy(64)) {
        // Independent count: cyclic submodules W of the dual, and units of R/ann(W).
        let dual = dual_module(&module);
        let ring = module.ring();
        let spans: BTreeSet<BTreeSet<Elem>> = dual.module().elements().map(|c| span(dual.module(), c)).collect();
        let mut total = 0;
        for w in &spans {
            let ann: BTreeSet<Elem> = ring
                .elements()
                .filter(|&r| w.iter().all(|&c| dual.module().act(r, c) == dual.module().zero()))
                .collect();
            let unit_reps = ring
                .elements()
                .filter(|&a| ring.elements().any(|b| ann.contains(&ring.sub(ring.mul(a, b), ring.one()))))
                .count();
            total += unit_reps / ann.len();
        }
        prop_assert_eq!(total, module.size());
        prop_assert_eq!(SpectralContext::new(&module).pair_count(), module.size());
    }

    #[test]
    fn fourier_transform_is_constant_on_generators(module in module_strategy(32), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = module.elements().map(|_| rng.gen_range(0.0..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let p = ringwalk::Distribution::new(raw.iter().map(|x| x / total).collect::<Vec<f64>>())
            .unwrap()
            .symmetrized(&module);
        let dual = dual_module(&module);
        let us = brute_units(module.ring());
        for chi in dual.module().elements() {
            let base = fourier_p(&p, dual.character(chi));
            for &u in &us {
                let other = fourier_p(&p, dual.character(dual.module().act(u, chi)));
                prop_assert!((base - other).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn invariant_factors_of_cyclic_products(moduli in proptest::collection::vec(1u64..=12, 1..4)) {
        prop_assume!(moduli.iter().product::<u64>() <= 400);
        let ring = build_product(&moduli.iter().map(|&m| zn(m)).collect::<Vec<_>>()).unwrap();
        let n = ring.size();
        let pres = invariant_factors_from_table(n, ring.add_table().to_vec()).unwrap();
        let orders: Vec<u64> = pres.orders().to_vec();
        prop_assert_eq!(orders.iter().product::<u64>(), n as u64);
        prop_assert!(orders.windows(2).all(|w| w[1] % w[0] == 0));
        prop_assert_eq!(orders, canonical_factors(&moduli));
        // Coordinates are a bijection onto the product of cyclic groups.
        let coords: BTreeSet<Vec<u64>> = (0..n).map(|x| pres.coords(x).to_vec()).collect();
        prop_assert_eq!(coords.len(), n);
    }
}
