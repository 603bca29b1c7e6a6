//! Walk matrices, predicted spectra and verification on random instances.

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Zero};
use proptest::prelude::*;

use ringwalk::matrix::Matrix;
use ringwalk::ring::principal_ideal;
use ringwalk::spectrum::{
    pair_and_triple_agree, predicted_spectrum, predicted_spectrum_frobenius, predicted_spectrum_triple,
};
use ringwalk::verify::{stationary_distribution, verify_power_sums, Stationary};
use ringwalk::walk::{digraph_irreducibility, irreducibility_report};
use ringwalk::{
    build_cyclic_module, build_free_module, build_gf, build_product, build_transition, build_zn, direct_sum,
    scalar::parse_rational, Distribution, FiniteModule, Polynomial, Rational, RingRef, TransitionMatrix, WalkKind,
    WalkSpec,
};

fn zn(n: u64) -> RingRef {
    build_zn(n).unwrap()
}

fn module_strategy() -> impl Strategy<Value = FiniteModule> {
    let ring = prop_oneof![
        (1u64..=12).prop_map(zn),
        Just(()).prop_map(|_| build_gf(2, 2, &[1, 1, 1]).unwrap()),
        Just(()).prop_map(|_| build_gf(3, 2, &[1, 0, 1]).unwrap()),
        Just(()).prop_map(|_| build_product(&[zn(2), zn(4)]).unwrap()),
        Just(()).prop_map(|_| build_product(&[zn(3), zn(2)]).unwrap()),
    ];
    (ring, 0usize..3, any::<u64>()).prop_filter_map("too large", |(ring, shape, a)| {
        let a = (a % ring.size() as u64) as usize;
        let m = match shape {
            0 => build_free_module(&ring, 1).unwrap(),
            1 if ring.size() <= 4 => build_free_module(&ring, 2).unwrap(),
            2 => direct_sum(&[
                build_free_module(&ring, 1).unwrap(),
                build_cyclic_module(&ring, &principal_ideal(&ring, a)).unwrap(),
            ])
            .unwrap(),
            _ => return None,
        };
        (m.size() <= 24).then_some(m)
    })
}

fn rational_distribution(raw: &[u8]) -> Distribution<Rational> {
    let mut raw: Vec<u64> = raw.iter().map(|&x| u64::from(x % 6)).collect();
    if raw.iter().all(|&x| x == 0) {
        raw[0] = 1;
    }
    let total: u64 = raw.iter().sum();
    Distribution::new(raw.iter().map(|&x| Rational::new(BigInt::from(x), BigInt::from(total))).collect()).unwrap()
}

fn q_rational(s: &str) -> Complex<Rational> {
    Complex::new(parse_rational(s).unwrap(), Rational::zero())
}

fn walk_strategy() -> impl Strategy<Value = WalkKind<Rational>> {
    prop_oneof![
        (0u64..=6).prop_map(|k| WalkKind::CoinToss { alpha: Rational::new(BigInt::from(k), BigInt::from(6)) }),
        Just(WalkKind::Affine),
        Just(WalkKind::Polynomial(Polynomial::monomial(2, 1))),
        Just(WalkKind::Polynomial(Polynomial::new([
            ((1, 1), q_rational("1/2")),
            ((0, 2), q_rational("1/4")),
            ((3, 0), q_rational("1/4")),
        ]))),
        // Not a probability: complex coefficients.
        Just(WalkKind::Polynomial(Polynomial::new([
            ((1, 0), Complex::new(parse_rational("1/2").unwrap(), parse_rational("1/3").unwrap())),
            ((0, 1), Complex::new(parse_rational("1/2").unwrap(), parse_rational("-1/3").unwrap())),
        ]))),
    ]
}

fn instance() -> impl Strategy<Value = (FiniteModule, WalkSpec<Rational>)> {
    (module_strategy(), walk_strategy(), proptest::collection::vec(any::<u8>(), 24), proptest::collection::vec(any::<u8>(), 12))
        .prop_map(|(module, kind, pr, qr)| {
            let p = rational_distribution(&pr[..module.size()]).symmetrized(&module);
            let q = rational_distribution(&qr[..module.ring().size()]);
            let spec = WalkSpec::new(kind, p, q, &module, false).unwrap();
            (module, spec)
        })
}

fn row_times(pi: &[Rational], m: &Matrix<Rational>) -> Vec<Rational> {
    (0..m.cols())
        .map(|j| (0..m.rows()).fold(Rational::zero(), |acc, i| acc + &pi[i] * &m[(i, j)]))
        .collect()
}

/// Reachability by repeated squaring of the boolean matrix, and the period as
/// the gcd of closed-walk lengths up to `n`.
fn digraph_oracle(adj: &[Vec<bool>]) -> (bool, Option<u64>) {
    let n = adj.len();
    let mut reach: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || adj[i][j]).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                reach[i][j] |= reach[i][k] && reach[k][j];
            }
        }
    }
    let irreducible = reach.iter().all(|row| row.iter().all(|&b| b));
    if !irreducible {
        return (false, None);
    }
    let mut power = adj.to_vec();
    let mut g = 0u64;
    for k in 1..=n as u64 {
        if (0..n).any(|i| power[i][i]) {
            g = num_integer::gcd(g, k);
        }
        power = (0..n)
            .map(|i| (0..n).map(|j| (0..n).any(|l| power[i][l] && adj[l][j])).collect())
            .collect();
    }
    (true, Some(g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn predicted_spectra_verify((module, spec) in instance()) {
        let matrix = build_transition(&spec, &module);
        prop_assert_eq!(matrix.is_stochastic(), spec.polynomial().is_probabilistic());
        let general = predicted_spectrum(&spec, &module).unwrap();
        prop_assert_eq!(general.items.len(), module.size());
        let report = verify_power_sums(&matrix, &general, 1e-8).unwrap();
        prop_assert!(report.pass, "residuals {:?}", report.power_sum_residuals);
        let triple = predicted_spectrum_triple(&spec, &module).unwrap();
        prop_assert!(pair_and_triple_agree(&general, &triple, 1e-9));
        if module.is_regular() {
            let frob = predicted_spectrum_frobenius(&spec, &module).unwrap();
            prop_assert!(frob.same_multiset(&general, 1e-9));
        }
        if matrix.is_stochastic() {
            prop_assert!(report.spectral_radius <= 1.0 + 1e-9);
            prop_assert!(general.values().iter().any(|z| (z - 1.0).norm() < 1e-9));
        }
    }

    #[test]
    fn stationary_vector_is_fixed_exactly((module, spec) in instance()) {
        let TransitionMatrix::Real(m) = build_transition(&spec, &module) else {
            return Ok(());
        };
        let irr = irreducibility_report(&spec, &module);
        match stationary_distribution(&m) {
            Stationary::Unique(pi) => {
                let pi: Vec<Rational> = pi.iter().map(|s| parse_rational(s).unwrap()).collect();
                prop_assert_eq!(row_times(&pi, &m), pi.clone());
                prop_assert!(pi.iter().fold(Rational::zero(), |a, x| a + x).is_one());
                prop_assert!(pi.iter().all(|x| *x >= Rational::zero()));
            }
            Stationary::NotUnique { fixed_space_dimension } => {
                prop_assert!(!irr.irreducible);
                prop_assert!(fixed_space_dimension != 1);
            }
            Stationary::NotApplicable => prop_assert!(false),
        }
        prop_assert!(irr.is_consistent());
    }

    #[test]
    fn digraph_check_matches_oracle(n in 1usize..8, bits in proptest::collection::vec(any::<bool>(), 64)) {
        let adj: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| bits[i * 8 + j]).collect()).collect();
        let lists: Vec<Vec<usize>> = adj.iter().map(|row| (0..n).filter(|&j| row[j]).collect()).collect();
        prop_assert_eq!(digraph_irreducibility(&lists), digraph_oracle(&adj));
    }
}

#[test]
fn identity_walk_has_trace_equal_to_size() {
    let module = build_free_module(&zn(6), 1).unwrap();
    let q = Distribution::point_mass(6, 1).unwrap();
    let spec = WalkSpec::new(WalkKind::CoinToss { alpha: Rational::zero() }, Distribution::uniform(6), q, &module, false).unwrap();
    let matrix = build_transition(&spec, &module);
    let report = verify_power_sums(&matrix, &predicted_spectrum(&spec, &module).unwrap(), 1e-8).unwrap();
    assert!(report.pass);
    assert_eq!(report.stationary, Stationary::NotUnique { fixed_space_dimension: 6 });
}
