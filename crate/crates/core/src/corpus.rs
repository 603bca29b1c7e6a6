//! Seeded regression corpus: rings, modules, distributions and walks.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::module::{build_cyclic_module, build_free_module, check_cyclic_equals_unit_orbit, direct_sum, FiniteModule};
use crate::ring::{build_gf, build_product, build_zn, principal_ideal, RingProvenance, RingRef};
use crate::spectrum::{
    predicted_spectrum_frobenius, predicted_spectrum_in, predicted_spectrum_uniform, SpectralContext, SpectrumReport,
};
use crate::verify::{verify_power_sums, DEFAULT_TOLERANCE};
use crate::walk::{build_transition, irreducibility_report, Distribution, Polynomial, WalkKind, WalkSpec};
use crate::Rational;

/// Modules up to this size also get the exhaustive cyclic-orbit check.
pub const ORBIT_CHECK_LIMIT: usize = 32;
const PATH_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct CorpusCase {
    pub name: String,
    pub module: FiniteModule,
    pub p: Distribution<Rational>,
    pub q: Distribution<Rational>,
    pub uniform_p: bool,
}

impl CorpusCase {
    pub fn ring(&self) -> &RingRef {
        self.module.ring()
    }

    /// `V = R` with `R = Z/n`.
    pub fn is_regular_zn(&self) -> bool {
        matches!(self.ring().provenance(), RingProvenance::Zn(_)) && self.module.is_regular()
    }
}

fn ratio(n: u64, d: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Coin-toss at `alpha` in {0, 1/3, 1/2, 1}, affine, and `x^2 y`.
pub fn corpus_walks() -> Vec<WalkKind<Rational>> {
    let mut out: Vec<WalkKind<Rational>> = [(0, 1), (1, 3), (1, 2), (1, 1)]
        .into_iter()
        .map(|(n, d)| WalkKind::CoinToss { alpha: ratio(n, d) })
        .collect();
    out.push(WalkKind::Affine);
    out.push(WalkKind::Polynomial(Polynomial::monomial(2, 1)));
    out
}

/// Integer weights in `0..=9` with roughly a quarter of them zero, normalized.
fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Distribution<Rational> {
    let mut raw: Vec<u64> = (0..n)
        .map(|_| if rng.gen_bool(0.25) { 0 } else { rng.gen_range(1..=9) })
        .collect();
    if raw.iter().all(|&w| w == 0) {
        raw[rng.gen_range(0..n)] = 1;
    }
    let total: u64 = raw.iter().sum();
    Distribution::new(raw.into_iter().map(|w| ratio(w, total)).collect()).expect("normalized weights")
}

enum Shape {
    Free(usize),
    /// `R/(Ra)` for each listed `a`, summed.
    Cyclic(&'static [u64]),
    /// `R` plus `R/(Ra)`.
    FreePlusCyclic(u64),
}

fn zn(n: u64) -> RingRef {
    build_zn(n).expect("valid modulus")
}

fn module_of(ring: &RingRef, shape: &Shape) -> (String, FiniteModule) {
    let cyclic = |a: u64| {
        let a = ring.from_integer(a);
        build_cyclic_module(ring, &principal_ideal(ring, a)).expect("cyclic module")
    };
    match shape {
        Shape::Free(1) => ("R".into(), build_free_module(ring, 1).expect("free module")),
        Shape::Free(d) => (format!("R^{d}"), build_free_module(ring, *d).expect("free module")),
        Shape::Cyclic(gens) => {
            let name = gens.iter().map(|a| format!("R/({a})")).collect::<Vec<_>>().join("+");
            let parts: Vec<FiniteModule> = gens.iter().map(|&a| cyclic(a)).collect();
            (name, direct_sum(&parts).expect("direct sum"))
        }
        Shape::FreePlusCyclic(a) => {
            let parts = [build_free_module(ring, 1).expect("free module"), cyclic(*a)];
            (format!("R+R/({a})"), direct_sum(&parts).expect("direct sum"))
        }
    }
}

/// The bundled cases. Fixed seeds make every run identical.
pub fn corpus() -> Vec<CorpusCase> {
    use Shape::*;
    let gf4 = || build_gf(2, 2, &[1, 1, 1]).expect("x^2+x+1 is irreducible over GF(2)");
    let gf9 = || build_gf(3, 2, &[1, 0, 1]).expect("x^2+1 is irreducible over GF(3)");
    let z2z4 = || build_product(&[zn(2), zn(4)]).expect("product ring");
    let z6z2 = || build_product(&[zn(6), zn(2)]).expect("product ring");
    // (ring name, ring, module shape, uniform P)
    let table: Vec<(String, RingRef, Shape, bool)> = vec![
        ("Z/1".into(), zn(1), Free(1), false),
        ("Z/2".into(), zn(2), Free(1), false),
        ("Z/2".into(), zn(2), Free(2), false),
        ("Z/3".into(), zn(3), Free(1), false),
        ("Z/3".into(), zn(3), Free(2), true),
        ("Z/4".into(), zn(4), Free(1), false),
        ("Z/4".into(), zn(4), Free(2), false),
        ("Z/4".into(), zn(4), Cyclic(&[2]), false),
        ("Z/4".into(), zn(4), FreePlusCyclic(2), true),
        ("Z/5".into(), zn(5), Free(1), false),
        ("Z/5".into(), zn(5), Free(2), false),
        ("Z/6".into(), zn(6), Free(1), true),
        ("Z/6".into(), zn(6), Free(2), false),
        ("Z/6".into(), zn(6), Cyclic(&[2, 3]), false),
        ("Z/6".into(), zn(6), FreePlusCyclic(3), false),
        ("Z/7".into(), zn(7), Free(1), false),
        ("Z/7".into(), zn(7), Free(2), false),
        ("Z/8".into(), zn(8), Free(1), false),
        ("Z/8".into(), zn(8), Free(2), false),
        ("Z/8".into(), zn(8), FreePlusCyclic(4), true),
        ("Z/9".into(), zn(9), Free(1), false),
        ("Z/9".into(), zn(9), FreePlusCyclic(3), false),
        ("Z/10".into(), zn(10), Free(1), false),
        ("Z/11".into(), zn(11), Free(1), false),
        ("Z/12".into(), zn(12), Free(1), false),
        ("Z/12".into(), zn(12), Cyclic(&[4]), false),
        ("Z/12".into(), zn(12), Cyclic(&[4, 6]), true),
        ("GF(4)".into(), gf4(), Free(1), false),
        ("GF(4)".into(), gf4(), Free(2), false),
        ("GF(9)".into(), gf9(), Free(1), false),
        ("Z/2xZ/4".into(), z2z4(), Free(1), false),
        ("Z/2xZ/4".into(), z2z4(), FreePlusCyclic(2), false),
        ("Z/2xZ/4".into(), z2z4(), Free(2), true),
        ("Z/6xZ/2".into(), z6z2(), Free(1), false),
        ("Z/6xZ/2".into(), z6z2(), Cyclic(&[2]), false),
        ("Z/6xZ/2".into(), z6z2(), FreePlusCyclic(3), false),
    ];
    table
        .into_iter()
        .enumerate()
        .map(|(i, (ring_name, ring, shape, uniform_p))| {
            let (module_name, module) = module_of(&ring, &shape);
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + i as u64);
            let p = if uniform_p {
                Distribution::uniform(module.size())
            } else {
                random_distribution(&mut rng, module.size()).symmetrized(&module)
            };
            let q = random_distribution(&mut rng, ring.size());
            CorpusCase {
                name: format!("{ring_name} {module_name}"),
                module,
                p,
                q,
                uniform_p,
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct WalkOutcome {
    pub walk: String,
    pub item_count: usize,
    pub total_multiplicity: usize,
    pub verified: bool,
    pub max_residual: f64,
    /// Frobenius path against the general path, when `V = R` is regular.
    pub frobenius_agrees: Option<bool>,
    /// Uniform path against the general path, for coin-toss walks with uniform P.
    pub uniform_agrees: Option<bool>,
    /// Coin-toss with uniform P: `{1} ∪ (1-alpha) * (alpha = 0 spectrum minus its designated item)`.
    pub scaling_holds: Option<bool>,
    /// The sufficient conditions never claim more than the digraph shows.
    pub irreducibility_sound: bool,
    pub sufficient_irreducible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseOutcome {
    pub name: String,
    pub dimension: usize,
    pub pair_count: usize,
    pub orbit_check: Option<bool>,
    pub walks: Vec<WalkOutcome>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl CaseOutcome {
    pub fn pass(&self) -> bool {
        self.pair_count == self.dimension
            && self.orbit_check != Some(false)
            && self.walks.iter().all(|w| {
                w.verified
                    && w.item_count == self.dimension
                    && w.frobenius_agrees != Some(false)
                    && w.uniform_agrees != Some(false)
                    && w.scaling_holds != Some(false)
                    && w.irreducibility_sound
            })
    }
}

fn scaling_holds(alpha: &Rational, alpha_zero: &SpectrumReport, report: &SpectrumReport) -> bool {
    let s = 1.0 - num_traits::ToPrimitive::to_f64(alpha).unwrap_or(f64::NAN);
    let mut expected = vec![num_complex::Complex64::new(1.0, 0.0)];
    for item in alpha_zero.items.iter().filter(|i| !i.designated) {
        for _ in 0..item.multiplicity {
            expected.push(item.value() * s);
        }
    }
    crate::spectrum::multiset_eq(&expected, &report.values(), PATH_TOLERANCE)
}

pub fn run_case(case: &CorpusCase, tol: f64) -> CaseOutcome {
    let start = Instant::now();
    let ctx = SpectralContext::new(&case.module);
    let orbit_check = (case.module.size() <= ORBIT_CHECK_LIMIT).then(|| check_cyclic_equals_unit_orbit(&case.module));
    let mut alpha_zero: Option<SpectrumReport> = None;
    let mut walks = Vec::new();
    for kind in corpus_walks() {
        let name = crate::experiment::walk_name(&kind);
        let spec = WalkSpec::new(kind, case.p.clone(), case.q.clone(), &case.module, false)
            .expect("corpus distributions satisfy the walk hypotheses");
        let matrix = build_transition(&spec, &case.module);
        let report = predicted_spectrum_in(&spec, &ctx).expect("general path applies to every corpus case");
        let verification = verify_power_sums(&matrix, &report, tol).expect("dimensions agree");
        let frobenius_agrees = case.module.is_regular().then(|| {
            predicted_spectrum_frobenius(&spec, &case.module)
                .map(|f| f.same_multiset(&report, PATH_TOLERANCE))
                .unwrap_or(false)
        });
        let (uniform_agrees, scaling) = match &spec.kind {
            WalkKind::CoinToss { alpha } if case.uniform_p => {
                let u = predicted_spectrum_uniform(&spec.q, alpha, &case.module)
                    .map(|u| u.same_multiset(&report, PATH_TOLERANCE))
                    .unwrap_or(false);
                if alpha.is_zero() {
                    alpha_zero = Some(report.clone());
                }
                let s = alpha_zero.as_ref().map(|z| scaling_holds(alpha, z, &report));
                (Some(u), s)
            }
            _ => (None, None),
        };
        let irr = irreducibility_report(&spec, &case.module);
        walks.push(WalkOutcome {
            walk: name,
            item_count: report.items.len(),
            total_multiplicity: report.total_multiplicity(),
            verified: verification.pass,
            max_residual: verification.max_residual,
            frobenius_agrees,
            uniform_agrees,
            scaling_holds: scaling,
            irreducibility_sound: irr.is_consistent(),
            sufficient_irreducible: irr.sufficient_irreducible,
        });
    }
    CaseOutcome {
        name: case.name.clone(),
        dimension: case.module.size(),
        pair_count: ctx.pair_count(),
        orbit_check,
        walks,
        elapsed: start.elapsed(),
    }
}

/// Runs all cases concurrently; results come back in corpus order.
pub fn run_corpus(cases: &[CorpusCase], tol: f64) -> Vec<CaseOutcome> {
    cases.par_iter().map(|c| run_case(c, tol)).collect()
}

pub fn run_default_corpus() -> Vec<CaseOutcome> {
    run_corpus(&corpus(), DEFAULT_TOLERANCE)
}

fn mark(x: Option<bool>) -> &'static str {
    match x {
        None => "-",
        Some(true) => "ok",
        Some(false) => "FAIL",
    }
}

/// One row per case: name, |V|, pair count, walks verified, path checks, result.
pub fn summary_table(outcomes: &[CaseOutcome]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<24} {:>4} {:>6} {:>8} {:>10} {:>9} {:>7} {:>12}  result",
        "case", "|V|", "pairs", "walks", "max resid", "frobenius", "uniform", "orbit check"
    );
    for o in outcomes {
        let verified = o.walks.iter().filter(|w| w.verified).count();
        let max_res = o.walks.iter().map(|w| w.max_residual).fold(0.0, f64::max);
        let all = |f: fn(&WalkOutcome) -> Option<bool>| {
            let xs: Vec<bool> = o.walks.iter().filter_map(f).collect();
            (!xs.is_empty()).then(|| xs.iter().all(|&b| b))
        };
        let _ = writeln!(
            out,
            "{:<24} {:>4} {:>6} {:>4}/{:<3} {:>10.2e} {:>9} {:>7} {:>12}  {}",
            o.name,
            o.dimension,
            o.pair_count,
            verified,
            o.walks.len(),
            max_res,
            mark(all(|w| w.frobenius_agrees)),
            mark(all(|w| w.uniform_agrees.zip(w.scaling_holds.or(Some(true))).map(|(a, b)| a && b))),
            mark(o.orbit_check),
            if o.pass() { "PASS" } else { "FAIL" }
        );
    }
    let passed = outcomes.iter().filter(|o| o.pass()).count();
    let _ = writeln!(out, "{passed}/{} cases passed", outcomes.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_shape() {
        let cases = corpus();
        assert!(cases.len() >= 30);
        assert!(cases.iter().all(|c| c.module.size() <= 64));
        assert!(cases.iter().filter(|c| c.uniform_p).count() >= 5);
        assert!(cases.iter().any(|c| c.q.weights().iter().any(|w| w.is_zero())));
        assert_eq!(cases[0].module.size(), 1);
    }

    #[test]
    fn corpus_is_deterministic() {
        let a = corpus();
        let b = corpus();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.p, y.p);
            assert_eq!(x.q, y.q);
        }
    }

    #[test]
    fn small_cases_pass() {
        for case in corpus().iter().filter(|c| c.module.size() <= 8) {
            let o = run_case(case, DEFAULT_TOLERANCE);
            assert!(o.pass(), "{}\n{:#?}", case.name, o);
        }
    }
}
