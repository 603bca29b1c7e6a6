//! Checks a predicted spectrum against a transition matrix without an
//! eigensolver.
//!
//! Two multisets of `n` complex numbers coincide iff their power sums agree
//! for `k = 1..=n`, and `tr(A^k)` is the `k`-th power sum of the eigenvalues
//! of `A`. Traces are computed exactly; only the predicted side is floating.

use std::fmt::Display;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::characters::dual_module;
use crate::matrix::{power_traces, Matrix};
use crate::modtrace::{gaussian_integer_traces, integer_traces};
use crate::module::FiniteModule;
use crate::scalar::Real;
use crate::spectrum::{multiplication_walk_spectrum, SpectrumError, SpectrumReport};
use crate::walk::{dilation_matrix, Distribution, TransitionMatrix};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Characteristic polynomials are compared only up to this dimension; the
/// coefficients from Newton's identities lose precision quickly beyond it.
const CHAR_POLY_LIMIT: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("matrix has dimension {matrix} but the spectrum has total multiplicity {spectrum}")]
    DimensionMismatch { matrix: usize, spectrum: usize },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Scalars whose matrices have computable power traces.
pub trait SpectralScalar: Real + Display {
    /// `tr(m^k)` for `k = 1..=upto`.
    fn traces(m: &Matrix<Self>, upto: usize) -> Vec<Complex64>;

    fn complex_traces(m: &Matrix<Complex<Self>>, upto: usize) -> Vec<Complex64>;

    fn stationary(a: &Matrix<Self>) -> Stationary {
        stationary_by_elimination(a)
    }
}

fn common_denominator<'a>(entries: impl Iterator<Item = &'a BigRational>) -> BigInt {
    entries.fold(BigInt::one(), |d, x| d.lcm(x.denom()))
}

fn scaled_to_c64(t: BigInt, d: &BigInt, k: usize) -> f64 {
    BigRational::new(t, d.pow(k as u32)).to_f64().unwrap_or(f64::NAN)
}

impl SpectralScalar for BigRational {
    /// Exact: with `D` the common denominator, `tr(A^k) = tr((DA)^k) / D^k`
    /// and `DA` is an integer matrix, whose traces come from modular
    /// arithmetic and CRT.
    fn traces(m: &Matrix<Self>, upto: usize) -> Vec<Complex64> {
        let d = common_denominator(m.entries().iter());
        let scaled = m.map(|x| x.numer() * (&d / x.denom()));
        integer_traces(&scaled, upto)
            .into_iter()
            .enumerate()
            .map(|(i, t)| Complex64::new(scaled_to_c64(t, &d, i + 1), 0.0))
            .collect()
    }

    fn complex_traces(m: &Matrix<Complex<Self>>, upto: usize) -> Vec<Complex64> {
        let d = common_denominator(m.entries().iter().flat_map(|z| [&z.re, &z.im]));
        let scaled = m.map(|z| Complex::new(z.re.numer() * (&d / z.re.denom()), z.im.numer() * (&d / z.im.denom())));
        gaussian_integer_traces(&scaled, upto)
            .into_iter()
            .enumerate()
            .map(|(i, t)| Complex64::new(scaled_to_c64(t.re, &d, i + 1), scaled_to_c64(t.im, &d, i + 1)))
            .collect()
    }

    /// Bareiss elimination on the integer matrix `D (A^T - I)`. With a single
    /// free column `f`, back-substitution from `pi_f = 1` gives the fixed
    /// vector, which is then normalized.
    fn stationary(a: &Matrix<Self>) -> Stationary {
        let n = a.rows();
        let d = common_denominator(a.entries().iter());
        let mut m = Matrix::<BigInt>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let x = &a[(j, i)];
                m[(i, j)] = x.numer() * (&d / x.denom()) - if i == j { d.clone() } else { BigInt::zero() };
            }
        }
        let pivots = m.bareiss_echelon();
        let nullity = n - pivots.len();
        if nullity != 1 {
            return Stationary::NotUnique { fixed_space_dimension: nullity };
        }
        let free = (0..n).find(|c| !pivots.contains(c)).expect("one free column");
        let mut pi = vec![BigRational::zero(); n];
        pi[free] = BigRational::one();
        for (row, &c) in pivots.iter().enumerate().rev() {
            let mut acc = BigRational::zero();
            for j in c + 1..n {
                if !m[(row, j)].is_zero() && !pi[j].is_zero() {
                    acc += &pi[j] * BigRational::from_integer(m[(row, j)].clone());
                }
            }
            pi[c] = -acc / BigRational::from_integer(m[(row, c)].clone());
        }
        let total: BigRational = pi.iter().sum();
        Stationary::Unique(pi.iter().map(|x| (x / &total).to_string()).collect())
    }
}

fn widen(x: &Rational64) -> BigRational {
    BigRational::new(BigInt::from(*x.numer()), BigInt::from(*x.denom()))
}

impl SpectralScalar for Rational64 {
    fn traces(m: &Matrix<Self>, upto: usize) -> Vec<Complex64> {
        BigRational::traces(&m.map(widen), upto)
    }

    fn complex_traces(m: &Matrix<Complex<Self>>, upto: usize) -> Vec<Complex64> {
        BigRational::complex_traces(&m.map(|z| Complex::new(widen(&z.re), widen(&z.im))), upto)
    }

    fn stationary(a: &Matrix<Self>) -> Stationary {
        BigRational::stationary(&a.map(widen))
    }
}

impl SpectralScalar for f64 {
    fn traces(m: &Matrix<Self>, upto: usize) -> Vec<Complex64> {
        power_traces(&m.map(|&x| Complex64::new(x, 0.0)), upto)
    }

    fn complex_traces(m: &Matrix<Complex<Self>>, upto: usize) -> Vec<Complex64> {
        power_traces(m, upto)
    }
}

impl SpectralScalar for f32 {
    fn traces(m: &Matrix<Self>, upto: usize) -> Vec<Complex64> {
        f64::traces(&m.map(|&x| f64::from(x)), upto)
    }

    fn complex_traces(m: &Matrix<Complex<Self>>, upto: usize) -> Vec<Complex64> {
        f64::complex_traces(&m.map(|z| Complex64::new(f64::from(z.re), f64::from(z.im))), upto)
    }
}

/// `tr(A^k)` for `k = 1..=upto`, exact for rational entries.
pub fn matrix_traces<T: SpectralScalar>(a: &TransitionMatrix<T>, upto: usize) -> Vec<Complex64> {
    match a {
        TransitionMatrix::Real(m) => T::traces(m, upto),
        TransitionMatrix::Complex(m) => T::complex_traces(m, upto),
    }
}

/// `sum_i m_i lambda_i^k` for `k = 1..=upto`.
pub fn spectrum_power_sums(spectrum: &SpectrumReport, upto: usize) -> Vec<Complex64> {
    let mut sums = vec![Complex64::zero(); upto];
    for item in &spectrum.items {
        let z = item.value();
        let mut power = Complex64::one();
        for s in sums.iter_mut() {
            power *= z;
            *s += power * item.multiplicity as f64;
        }
    }
    sums
}

fn absolute_power_sums(spectrum: &SpectrumReport, upto: usize) -> Vec<f64> {
    let mut sums = vec![0.0; upto];
    for item in &spectrum.items {
        let r = item.value().norm();
        let mut power = 1.0;
        for s in sums.iter_mut() {
            power *= r;
            *s += power * item.multiplicity as f64;
        }
    }
    sums
}

/// Unique stationary distribution, or the dimension of the space of
/// left-fixed vectors when it is not unique.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stationary {
    Unique(Vec<String>),
    NotUnique { fixed_space_dimension: usize },
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub dimension: usize,
    pub tolerance: f64,
    /// `|tr(A^k) - sum_i lambda_i^k|` for `k = 1..=n`.
    pub power_sum_residuals: Vec<f64>,
    pub max_residual: f64,
    /// Residual `k` is compared against `tol * max(1, sum_i |lambda_i|^k)`.
    pub pass: bool,
    pub char_poly_match: Option<bool>,
    pub stationary: Stationary,
    /// `1 - max |lambda|` over every item except the designated one.
    pub spectral_gap: Option<f64>,
    pub spectral_radius: f64,
}

/// Compares power sums of the predicted spectrum with exact matrix traces.
pub fn verify_power_sums<T: SpectralScalar>(
    a: &TransitionMatrix<T>,
    spectrum: &SpectrumReport,
    tol: f64,
) -> Result<VerificationReport, VerifyError> {
    let n = a.size();
    let total = spectrum.total_multiplicity();
    if total != n {
        return Err(VerifyError::DimensionMismatch { matrix: n, spectrum: total });
    }
    let traces = matrix_traces(a, n);
    let sums = spectrum_power_sums(spectrum, n);
    let scales = absolute_power_sums(spectrum, n);
    let residuals: Vec<f64> = traces.iter().zip(&sums).map(|(t, s)| (t - s).norm()).collect();
    let pass = residuals
        .iter()
        .zip(&scales)
        .all(|(r, s)| *r <= tol * s.max(1.0));
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    let char_poly_match = (n <= CHAR_POLY_LIMIT).then(|| char_poly_matches(&traces, spectrum, tol));
    let stationary = match a.as_real() {
        Some(m) if a.is_stochastic() => stationary_distribution(&m),
        _ => Stationary::NotApplicable,
    };
    let spectral_radius = spectrum.items.iter().map(|i| i.value().norm()).fold(0.0, f64::max);
    let spectral_gap = spectrum
        .items
        .iter()
        .filter(|i| !i.designated)
        .map(|i| i.value().norm())
        .reduce(f64::max)
        .map(|m| 1.0 - m);
    Ok(VerificationReport {
        dimension: n,
        tolerance: tol,
        power_sum_residuals: residuals,
        max_residual,
        pass,
        char_poly_match,
        stationary,
        spectral_gap,
        spectral_radius,
    })
}

/// Coefficients of `prod (x - lambda_i)` from the traces via Newton's
/// identities, against the same coefficients expanded from the spectrum.
fn char_poly_matches(traces: &[Complex64], spectrum: &SpectrumReport, tol: f64) -> bool {
    let n = traces.len();
    // e_k = (1/k) sum_{i=1..k} (-1)^{i-1} e_{k-i} p_i
    let mut from_traces = vec![Complex64::one()];
    for k in 1..=n {
        let mut acc = Complex64::zero();
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += from_traces[k - i] * traces[i - 1] * sign;
        }
        from_traces.push(acc / k as f64);
    }
    let mut from_roots = vec![Complex64::zero(); n + 1];
    from_roots[0] = Complex64::one();
    let mut degree = 0;
    for z in spectrum.values() {
        degree += 1;
        for k in (1..=degree).rev() {
            let prev = from_roots[k - 1];
            from_roots[k] += prev * z;
        }
    }
    let mut binom = 1.0;
    (1..=n).all(|k| {
        binom = binom * (n + 1 - k) as f64 / k as f64;
        (from_traces[k] - from_roots[k]).norm() <= tol * binom
    })
}

/// Solves `pi (A - I) = 0`, `sum pi = 1` exactly. The solution is unique iff
/// the left-fixed space of `A` is one-dimensional.
pub fn stationary_distribution<T: SpectralScalar>(a: &Matrix<T>) -> Stationary {
    T::stationary(a)
}

fn stationary_by_elimination<T: SpectralScalar>(a: &Matrix<T>) -> Stationary {
    let n = a.rows();
    let mut system = Matrix::<T>::zeros(n + 1, n);
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { T::one() } else { T::zero() };
            system[(i, j)] = a[(j, i)].clone() - delta;
        }
        system[(n, i)] = T::one();
    }
    let mut fixed = Matrix::<T>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            fixed[(i, j)] = system[(i, j)].clone();
        }
    }
    let nullity = n - fixed.rank();
    if nullity != 1 {
        return Stationary::NotUnique { fixed_space_dimension: nullity };
    }
    let mut rhs = vec![T::zero(); n + 1];
    rhs[n] = T::one();
    match system.solve_unique(&rhs) {
        Some(pi) => Stationary::Unique(pi.iter().map(|x| x.to_string()).collect()),
        None => Stationary::NotUnique { fixed_space_dimension: nullity },
    }
}

/// Result of comparing the multiplication walk on `V` and on its dual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    /// Largest `|tr(A_V^k) - tr(A_dual^k)|`.
    pub max_trace_difference: f64,
    pub predicted_spectra_agree: bool,
    pub module_verified: bool,
    pub dual_verified: bool,
}

impl DualityReport {
    pub fn pass(&self) -> bool {
        self.predicted_spectra_agree && self.module_verified && self.dual_verified
    }
}

/// Builds the walk `x -> ax`, `a ~ Q` on `V` and on the dual of `V`, checks
/// that their traces agree, and that each matrix matches its predicted
/// spectrum.
pub fn cross_check_duality<T: SpectralScalar>(
    q: &Distribution<T>,
    module: &FiniteModule,
    tol: f64,
) -> Result<DualityReport, VerifyError> {
    let dual = dual_module(module);
    let on_v = TransitionMatrix::Real(dilation_matrix(q, module));
    let on_dual = TransitionMatrix::Real(dilation_matrix(q, dual.module()));
    let n = module.size();
    let tv = matrix_traces(&on_v, n);
    let td = matrix_traces(&on_dual, n);
    let max_trace_difference = tv.iter().zip(&td).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let sv = multiplication_walk_spectrum(q, module)?;
    let sd = multiplication_walk_spectrum(q, dual.module())?;
    let module_verified = verify_power_sums(&on_v, &sv, tol)?.pass;
    let dual_verified = verify_power_sums(&on_dual, &sd, tol)?.pass;
    Ok(DualityReport {
        max_trace_difference,
        predicted_spectra_agree: sv.same_multiset(&sd, 1e-9) && max_trace_difference <= tol * n as f64,
        module_verified,
        dual_verified,
    })
}

/// A copy of `spectrum` with item `index` moved by `delta`.
pub fn perturbed(spectrum: &SpectrumReport, index: usize, delta: f64) -> SpectrumReport {
    let mut out = spectrum.clone();
    out.items[index].re += delta;
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::build_free_module;
    use crate::ring::{build_product, build_zn};
    use crate::spectrum::predicted_spectrum;
    use crate::walk::{build_transition, WalkKind, WalkSpec};
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn dist(ws: &[(i64, i64)]) -> Distribution<Rational> {
        Distribution::new(ws.iter().map(|&(n, d)| q(n, d)).collect()).unwrap()
    }

    fn z4_affine() -> (TransitionMatrix<Rational>, SpectrumReport) {
        let r = build_zn(4).unwrap();
        let v = build_free_module(&r, 1).unwrap();
        let spec = WalkSpec::new(
            WalkKind::Affine,
            dist(&[(2, 5), (1, 5), (1, 5), (1, 5)]),
            dist(&[(1, 10), (3, 10), (1, 5), (2, 5)]),
            &v,
            false,
        )
        .unwrap();
        (build_transition(&spec, &v), predicted_spectrum(&spec, &v).unwrap())
    }

    #[test]
    fn z4_affine_verifies() {
        let (a, s) = z4_affine();
        let report = verify_power_sums(&a, &s, DEFAULT_TOLERANCE).unwrap();
        assert!(report.pass);
        assert!(report.max_residual < 1e-9);
        assert_eq!(report.char_poly_match, Some(true));
        assert!((report.spectral_gap.unwrap() - 0.86).abs() < 1e-12);
    }

    #[test]
    fn perturbation_is_detected() {
        let (a, s) = z4_affine();
        for i in 0..s.items.len() {
            let report = verify_power_sums(&a, &perturbed(&s, i, 0.01), DEFAULT_TOLERANCE).unwrap();
            assert!(!report.pass);
            assert!(report.max_residual >= 0.0099);
            assert_eq!(report.char_poly_match, Some(false));
        }
    }

    #[test]
    fn dimension_mismatch() {
        let (a, mut s) = z4_affine();
        s.items.pop();
        assert_eq!(
            verify_power_sums(&a, &s, DEFAULT_TOLERANCE).unwrap_err(),
            VerifyError::DimensionMismatch { matrix: 4, spectrum: 3 }
        );
    }

    #[test]
    fn identity_walk() {
        let r = build_zn(6).unwrap();
        let v = build_free_module(&r, 1).unwrap();
        let one: Distribution<Rational> = Distribution::point_mass(6, 1).unwrap();
        let spec = WalkSpec::new(WalkKind::CoinToss { alpha: q(0, 1) }, Distribution::uniform(6), one, &v, false).unwrap();
        let a = build_transition(&spec, &v);
        assert!(matrix_traces(&a, 6).iter().all(|t| (t - 6.0).norm() == 0.0));
        let s = predicted_spectrum(&spec, &v).unwrap();
        assert!(verify_power_sums(&a, &s, DEFAULT_TOLERANCE).unwrap().pass);
        assert_eq!(stationary_distribution(&a.as_real().unwrap()), Stationary::NotUnique { fixed_space_dimension: 6 });
    }

    #[test]
    fn stationary_examples() {
        let r = build_zn(4).unwrap();
        let v = build_free_module(&r, 1).unwrap();
        let p = dist(&[(2, 5), (1, 5), (1, 5), (1, 5)]);
        // translation walk: doubly stochastic, uniform stationary vector
        let spec = WalkSpec::new(WalkKind::CoinToss { alpha: q(1, 1) }, p.clone(), Distribution::uniform(4), &v, false).unwrap();
        let a = build_transition(&spec, &v).as_real().unwrap();
        assert_eq!(stationary_distribution(&a), Stationary::Unique(vec!["1/4".into(); 4]));
        // rows all equal P: stationary is P even though P need not have full support
        let p0 = dist(&[(1, 2), (1, 4), (0, 1), (1, 4)]);
        let zero: Distribution<Rational> = Distribution::point_mass(4, 0).unwrap();
        let spec = WalkSpec::new(WalkKind::Affine, p0, zero, &v, false).unwrap();
        let a = build_transition(&spec, &v).as_real().unwrap();
        assert_eq!(
            stationary_distribution(&a),
            Stationary::Unique(vec!["1/2".into(), "1/4".into(), "0".into(), "1/4".into()])
        );
        // pi A = pi for a generic walk
        let spec = WalkSpec::new(WalkKind::CoinToss { alpha: q(1, 3) }, p, dist(&[(1, 10), (3, 10), (1, 5), (2, 5)]), &v, false).unwrap();
        let a = build_transition(&spec, &v).as_real().unwrap();
        let Stationary::Unique(pi) = stationary_distribution(&a) else { panic!("expected unique") };
        let pi: Vec<Rational> = pi.iter().map(|s| crate::scalar::parse_rational(s).unwrap()).collect();
        let row = Matrix::from_rows(vec![pi.clone()]).mul(&a);
        assert_eq!(row.row(0), pi.as_slice());
    }

    #[test]
    fn float_matrices_verify_too() {
        let r = build_zn(5).unwrap();
        let v = build_free_module(&r, 1).unwrap();
        let p = Distribution::<f64>::new(vec![0.2, 0.2, 0.2, 0.2, 0.2]).unwrap();
        let qd = Distribution::<f64>::new(vec![0.1, 0.2, 0.3, 0.25, 0.15]).unwrap();
        let spec = WalkSpec::new(WalkKind::Affine, p, qd, &v, false).unwrap();
        let a = build_transition(&spec, &v);
        let s = predicted_spectrum(&spec, &v).unwrap();
        assert!(verify_power_sums(&a, &s, DEFAULT_TOLERANCE).unwrap().pass);
    }

    #[test]
    fn duality_cross_check() {
        let z2z4 = build_product(&[build_zn(2).unwrap(), build_zn(4).unwrap()]).unwrap();
        let v = build_free_module(&z2z4, 1).unwrap();
        let qd: Distribution<Rational> = Distribution::new((1..=8).map(|k| q(k, 36)).collect()).unwrap();
        assert!(cross_check_duality(&qd, &v, DEFAULT_TOLERANCE).unwrap().pass());
        let z6 = build_zn(6).unwrap();
        let v = build_free_module(&z6, 1).unwrap();
        assert!(cross_check_duality(&Distribution::<Rational>::uniform(6), &v, DEFAULT_TOLERANCE).unwrap().pass());
        let one: Distribution<Rational> = Distribution::point_mass(6, 1).unwrap();
        assert!(cross_check_duality(&one, &v, DEFAULT_TOLERANCE).unwrap().pass());
    }
}
