//! Predicted eigenvalues of coin-toss, affine and polynomial walks.
//!
//! The general path indexes eigenvalues by pairs `(W, rho)`: `W = R chi` a
//! cyclic submodule of the dual module and `rho` a character of
//! `U(R/ann W)`. The value is `p(P^(chi), Q^(rho))`. The other paths are
//! alternative indexings of the same multiset and serve as cross-checks.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::characters::{dual_module, generating_character, Character, DualModule, RootOfUnity, UnitCharacters};
use crate::module::{cyclic_submodules, minimal_fixing_idempotent, CyclicSubmodule, FiniteModule};
use crate::ring::{idempotents, principal_ideal, quotient_ring, units, units_of_corner, Elem, Ideal, Quotient, UnitGroup};
use crate::scalar::Real;
use crate::walk::{validate_constant_on_associates, AssociatesViolation, Distribution, WalkSpec};

/// Tolerance used to group numerically equal eigenvalues for display.
pub const GROUPING_TOLERANCE: f64 = 1e-9;

/// Fourier coefficients of `P` must agree across the generators of `R chi`
/// to this precision.
pub const GENERATOR_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectrumError {
    #[error("P is not constant on associates: P({}) != P({})", .0.v, .0.w)]
    Hypothesis(AssociatesViolation),
    #[error("P^ differs between generators of the cyclic submodule generated by character {chi} (|diff| = {diff:e})")]
    GeneratorDependence { chi: Elem, diff: f64 },
    #[error("the Frobenius path needs V to be the regular module R")]
    NotRegular,
    #[error("no generating character exists for this ring")]
    NoGeneratingCharacter,
    #[error("{what} has {got} entries, expected {expected}")]
    SizeMismatch { what: &'static str, expected: usize, got: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumPath {
    General,
    Triple,
    Frobenius,
    Uniform,
}

impl SpectrumPath {
    pub const ALL: [SpectrumPath; 4] = [
        SpectrumPath::General,
        SpectrumPath::Frobenius,
        SpectrumPath::Uniform,
        SpectrumPath::Triple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpectrumPath::General => "general",
            SpectrumPath::Triple => "triple",
            SpectrumPath::Frobenius => "frobenius",
            SpectrumPath::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == s)
    }
}

impl fmt::Display for SpectrumPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One predicted eigenvalue with the data that indexes it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumItem {
    pub path: SpectrumPath,
    /// Canonical generator: a character index of the dual module on the
    /// general and triple paths, `b` of `Rb` on the Frobenius path, and an
    /// element of `V` on the uniform path.
    pub generator: Elem,
    /// Exponent tuple of the generating character, or the label of the
    /// generating element on paths indexed by elements.
    pub generator_label: String,
    pub annihilator: Vec<Elem>,
    pub rho: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idempotent: Option<Elem>,
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    /// The item indexed by `W = 0` and the trivial `rho`.
    pub designated: bool,
}

impl SpectrumItem {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupedValue {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub dimension: usize,
    pub items: Vec<SpectrumItem>,
}

impl SpectrumReport {
    pub fn total_multiplicity(&self) -> usize {
        self.items.iter().map(|i| i.multiplicity).sum()
    }

    /// Every eigenvalue repeated by its multiplicity, in item order.
    pub fn values(&self) -> Vec<Complex64> {
        self.items
            .iter()
            .flat_map(|i| std::iter::repeat_n(i.value(), i.multiplicity))
            .collect()
    }

    pub fn designated(&self) -> Option<&SpectrumItem> {
        self.items.iter().find(|i| i.designated)
    }

    /// Values merged within `tol`, sorted by real then imaginary part.
    pub fn grouped(&self, tol: f64) -> Vec<GroupedValue> {
        let mut vals: Vec<(Complex64, usize)> = self.items.iter().map(|i| (i.value(), i.multiplicity)).collect();
        vals.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
        let mut out: Vec<GroupedValue> = Vec::new();
        for (z, m) in vals {
            match out.iter_mut().find(|g| (Complex64::new(g.re, g.im) - z).norm() <= tol) {
                Some(g) => g.multiplicity += m,
                None => out.push(GroupedValue { re: z.re, im: z.im, multiplicity: m }),
            }
        }
        out
    }

    /// Multiset equality of the expanded values within `tol`.
    pub fn same_multiset(&self, other: &SpectrumReport, tol: f64) -> bool {
        multiset_eq(&self.values(), &other.values(), tol)
    }
}

/// Greedy matching of two multisets of complex numbers within `tol`.
pub fn multiset_eq(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
        match best {
            Some(j) if (b[j] - x).norm() <= tol => {
                used[j] = true;
                true
            }
            _ => false,
        }
    })
}

/// Sum of `weight * root` with weights aggregated exactly per root.
fn exact_fourier_sum<T: Real>(terms: impl Iterator<Item = (RootOfUnity, T)>) -> Complex64 {
    let mut by_root: BTreeMap<RootOfUnity, T> = BTreeMap::new();
    for (z, w) in terms {
        let slot = by_root.entry(z).or_insert_with(T::zero);
        *slot = slot.clone() + w;
    }
    by_root
        .into_iter()
        .map(|(z, w)| z.to_complex() * w.to_f64_lossy())
        .sum()
}

/// `P^(chi) = sum_b P(b) chi(b)`.
pub fn fourier_p<T: Real>(p: &Distribution<T>, chi: &Character) -> Complex64 {
    exact_fourier_sum(
        p.support()
            .into_iter()
            .map(|b| (chi.evaluate(b), p.weight(b).clone())),
    )
}

/// The quotient `R/I` with its unit characters, shared by every `W` with
/// annihilator `I`.
#[derive(Clone, Debug)]
pub struct QuotientUnits {
    pub ideal: Ideal,
    pub quotient: Quotient,
    pub characters: UnitCharacters,
}

impl QuotientUnits {
    pub fn new(ideal: &Ideal) -> Self {
        let quotient = quotient_ring(ideal.ring(), ideal).expect("annihilators are ideals");
        let characters = UnitCharacters::new(units(&quotient.ring));
        QuotientUnits {
            ideal: ideal.clone(),
            quotient,
            characters,
        }
    }

    /// Whether `a + I` is a unit of `R/I`, i.e. `a` lies in `U(R) + I`.
    pub fn is_unit_coset(&self, a: Elem) -> bool {
        self.characters.units.contains(self.quotient.project(a))
    }
}

/// `Q^(rho) = sum_{a in U(R)+I} Q(a) rho(a + I)` for `rho` a character of
/// `U(R/I)`.
pub fn fourier_q<T: Real>(q: &Distribution<T>, qu: &QuotientUnits, rho: usize) -> Complex64 {
    exact_fourier_sum(
        q.support()
            .into_iter()
            .filter(|&a| qu.is_unit_coset(a))
            .map(|a| (qu.characters.evaluate(rho, qu.quotient.project(a)), q.weight(a).clone())),
    )
}

/// Structural data shared by every spectrum path on one module: the dual,
/// its cyclic submodules, and the unit groups of the relevant quotients.
#[derive(Clone, Debug)]
pub struct SpectralContext {
    pub module: FiniteModule,
    pub dual: DualModule,
    pub dual_cyclic: Vec<CyclicSubmodule>,
    pub units: UnitGroup,
    quotients: HashMap<Vec<Elem>, Arc<QuotientUnits>>,
}

impl SpectralContext {
    pub fn new(module: &FiniteModule) -> Self {
        let dual = dual_module(module);
        let dual_cyclic = cyclic_submodules(dual.module());
        let mut quotients = HashMap::new();
        for w in &dual_cyclic {
            quotients
                .entry(w.annihilator.members().to_vec())
                .or_insert_with(|| Arc::new(QuotientUnits::new(&w.annihilator)));
        }
        SpectralContext {
            module: module.clone(),
            units: units(module.ring()),
            dual,
            dual_cyclic,
            quotients,
        }
    }

    pub fn quotient_units(&mut self, ideal: &Ideal) -> Arc<QuotientUnits> {
        Arc::clone(
            self.quotients
                .entry(ideal.members().to_vec())
                .or_insert_with(|| Arc::new(QuotientUnits::new(ideal))),
        )
    }

    /// `sum_W |U(R/ann W)|` over cyclic submodules `W` of the dual.
    pub fn pair_count(&self) -> usize {
        self.dual_cyclic
            .iter()
            .map(|w| self.quotients[w.annihilator.members()].characters.len())
            .sum()
    }

    fn check_p<T: Real>(&self, spec: &WalkSpec<T>) -> Result<(), SpectrumError> {
        check_sizes(spec, &self.module)?;
        validate_constant_on_associates(&spec.p, &self.module).map_err(SpectrumError::Hypothesis)
    }
}

fn check_sizes<T: Real>(spec: &WalkSpec<T>, module: &FiniteModule) -> Result<(), SpectrumError> {
    if spec.p.len() != module.size() {
        return Err(SpectrumError::SizeMismatch { what: "P", expected: module.size(), got: spec.p.len() });
    }
    let r = module.ring().size();
    if spec.q.len() != r {
        return Err(SpectrumError::SizeMismatch { what: "Q", expected: r, got: spec.q.len() });
    }
    Ok(())
}

fn exponent_label(chi: &Character) -> String {
    let parts: Vec<String> = chi.exponents().iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

/// `P^` at the canonical generator of `w`, checked against every other
/// generator (the unit orbit of the canonical one).
fn fourier_p_on_submodule<T: Real>(
    p: &Distribution<T>,
    ctx: &SpectralContext,
    w: &CyclicSubmodule,
) -> Result<Complex64, SpectrumError> {
    let value = fourier_p(p, ctx.dual.character(w.generator));
    for &u in ctx.units.members() {
        let other = ctx.dual.module().act(u, w.generator);
        let diff = (fourier_p(p, ctx.dual.character(other)) - value).norm();
        if diff > GENERATOR_TOLERANCE {
            return Err(SpectrumError::GeneratorDependence { chi: w.generator, diff });
        }
    }
    Ok(value)
}

/// The general `(W, rho)` path; one item per pair, `|V|` items in total.
pub fn predicted_spectrum<T: Real>(spec: &WalkSpec<T>, module: &FiniteModule) -> Result<SpectrumReport, SpectrumError> {
    predicted_spectrum_in(spec, &SpectralContext::new(module))
}

pub fn predicted_spectrum_in<T: Real>(spec: &WalkSpec<T>, ctx: &SpectralContext) -> Result<SpectrumReport, SpectrumError> {
    ctx.check_p(spec)?;
    let poly = spec.polynomial();
    let mut items = Vec::new();
    for w in &ctx.dual_cyclic {
        let ph = fourier_p_on_submodule(&spec.p, ctx, w)?;
        let qu = &ctx.quotients[w.annihilator.members()];
        for (rho, character) in qu.characters.characters.iter().enumerate() {
            let value = poly.evaluate(ph, fourier_q(&spec.q, qu, rho));
            items.push(SpectrumItem {
                path: SpectrumPath::General,
                generator: w.generator,
                generator_label: exponent_label(ctx.dual.character(w.generator)),
                annihilator: w.annihilator.members().to_vec(),
                rho: character.exponents().to_vec(),
                idempotent: None,
                re: value.re,
                im: value.im,
                multiplicity: 1,
                designated: w.is_zero() && character.is_trivial(),
            });
        }
    }
    Ok(SpectrumReport {
        dimension: ctx.module.size(),
        items,
    })
}

/// The `(e, O, rho)` path: `e` idempotent, `O = U(R) chi` with `e_chi = e`,
/// `rho` a character of `U(Re)` trivial on the stabilizer of `chi`, and
/// `Q^(rho) = sum_{e in Ra} Q(a) rho(ae)`.
pub fn predicted_spectrum_triple<T: Real>(spec: &WalkSpec<T>, module: &FiniteModule) -> Result<SpectrumReport, SpectrumError> {
    predicted_spectrum_triple_in(spec, &SpectralContext::new(module))
}

pub fn predicted_spectrum_triple_in<T: Real>(
    spec: &WalkSpec<T>,
    ctx: &SpectralContext,
) -> Result<SpectrumReport, SpectrumError> {
    ctx.check_p(spec)?;
    let ring = ctx.module.ring();
    let poly = spec.polynomial();
    let mut items = Vec::new();
    for e in idempotents(ring) {
        let corner = units_of_corner(ring, e).expect("e is idempotent");
        let uc = UnitCharacters::new(corner.clone());
        // a with e in Ra, so that ae is a unit of Re.
        let above: Vec<Elem> = spec
            .q
            .support()
            .into_iter()
            .filter(|&a| principal_ideal(ring, a).contains(e))
            .collect();
        for w in ctx.dual_cyclic.iter() {
            if minimal_fixing_idempotent(ctx.dual.module(), w.generator) != e {
                continue;
            }
            let ph = fourier_p_on_submodule(&spec.p, ctx, w)?;
            let stabilizer: Vec<Elem> = corner
                .members()
                .iter()
                .copied()
                .filter(|&u| ctx.dual.module().act(u, w.generator) == w.generator)
                .collect();
            for (rho, character) in uc.characters.iter().enumerate() {
                if !stabilizer.iter().all(|&u| uc.evaluate(rho, u).is_one()) {
                    continue;
                }
                let qh = exact_fourier_sum(
                    above
                        .iter()
                        .map(|&a| (uc.evaluate(rho, ring.mul(a, e)), spec.q.weight(a).clone())),
                );
                let value = poly.evaluate(ph, qh);
                items.push(SpectrumItem {
                    path: SpectrumPath::Triple,
                    generator: w.generator,
                    generator_label: exponent_label(ctx.dual.character(w.generator)),
                    annihilator: w.annihilator.members().to_vec(),
                    rho: character.exponents().to_vec(),
                    idempotent: Some(e),
                    re: value.re,
                    im: value.im,
                    multiplicity: 1,
                    designated: w.is_zero() && character.is_trivial(),
                });
            }
        }
    }
    Ok(SpectrumReport {
        dimension: ctx.module.size(),
        items,
    })
}

/// For `V = R` Frobenius with generating character `chi`: pairs `(Rb, rho)`
/// with `rho` a character of `U(R/ann b)` and `P^ = sum_r P(r) chi(br)`.
pub fn predicted_spectrum_frobenius<T: Real>(
    spec: &WalkSpec<T>,
    module: &FiniteModule,
) -> Result<SpectrumReport, SpectrumError> {
    if !module.is_regular() {
        return Err(SpectrumError::NotRegular);
    }
    check_sizes(spec, module)?;
    validate_constant_on_associates(&spec.p, module).map_err(SpectrumError::Hypothesis)?;
    let ring = module.ring();
    let (dual, chi) = generating_character(ring).ok_or(SpectrumError::NoGeneratingCharacter)?;
    let chi = dual.character(chi);
    let poly = spec.polynomial();
    let mut seen: Vec<Vec<Elem>> = Vec::new();
    let mut items = Vec::new();
    for b in ring.elements() {
        let ideal = principal_ideal(ring, b);
        if seen.contains(&ideal.members().to_vec()) {
            continue;
        }
        seen.push(ideal.members().to_vec());
        let ann = crate::module::annihilator_of(module, b);
        let qu = QuotientUnits::new(&ann);
        let ph = exact_fourier_sum(
            spec.p
                .support()
                .into_iter()
                .map(|r| (chi.evaluate(ring.mul(b, r)), spec.p.weight(r).clone())),
        );
        for (rho, character) in qu.characters.characters.iter().enumerate() {
            let value = poly.evaluate(ph, fourier_q(&spec.q, &qu, rho));
            items.push(SpectrumItem {
                path: SpectrumPath::Frobenius,
                generator: b,
                generator_label: ring.label(b).to_string(),
                annihilator: ann.members().to_vec(),
                rho: character.exponents().to_vec(),
                idempotent: None,
                re: value.re,
                im: value.im,
                multiplicity: 1,
                designated: b == ring.zero() && character.is_trivial(),
            });
        }
    }
    Ok(SpectrumReport {
        dimension: module.size(),
        items,
    })
}

/// Coin-toss walk with uniform `P`: classes `[W]` of cyclic submodules of
/// `V` (by annihilator) and characters `rho` of `U(R)` trivial on
/// `(1 + ann W) ∩ U(R)`. The value is 1 for `W = 0` and otherwise
/// `(1 - alpha) sum_{a in U(R)+ann W} Q(a) rho(u_W(a))`, with multiplicity the
/// number of cyclic submodules sharing the annihilator.
pub fn predicted_spectrum_uniform<T: Real>(
    q: &Distribution<T>,
    alpha: &T,
    module: &FiniteModule,
) -> Result<SpectrumReport, SpectrumError> {
    let ring = module.ring();
    if q.len() != ring.size() {
        return Err(SpectrumError::SizeMismatch { what: "Q", expected: ring.size(), got: q.len() });
    }
    let beta = (T::one() - alpha.clone()).to_f64_lossy();
    let us = units(ring);
    let uc = UnitCharacters::new(us.clone());
    let mut classes: BTreeMap<Vec<Elem>, (CyclicSubmodule, usize)> = BTreeMap::new();
    for w in cyclic_submodules(module) {
        classes
            .entry(w.annihilator.members().to_vec())
            .and_modify(|c| c.1 += 1)
            .or_insert((w, 1));
    }
    let mut classes: Vec<(CyclicSubmodule, usize)> = classes.into_values().collect();
    classes.sort_by_key(|(w, _)| (w.members.len(), w.generator));
    let mut items = Vec::new();
    for (w, count) in classes {
        let ann = &w.annihilator;
        let qu = QuotientUnits::new(ann);
        // least unit in each coset of ann W that meets U(R)
        let mut least_unit: HashMap<Elem, Elem> = HashMap::new();
        for &u in us.members() {
            least_unit.entry(qu.quotient.project(u)).or_insert(u);
        }
        let kernel: Vec<Elem> = us
            .members()
            .iter()
            .copied()
            .filter(|&u| qu.quotient.project(u) == qu.quotient.project(ring.one()))
            .collect();
        for (rho, character) in uc.characters.iter().enumerate() {
            if !kernel.iter().all(|&u| uc.evaluate(rho, u).is_one()) {
                continue;
            }
            let value = if w.is_zero() {
                Complex64::new(1.0, 0.0)
            } else {
                let s = exact_fourier_sum(q.support().into_iter().filter_map(|a| {
                    let u = *least_unit.get(&qu.quotient.project(a))?;
                    Some((uc.evaluate(rho, u), q.weight(a).clone()))
                }));
                s * beta
            };
            items.push(SpectrumItem {
                path: SpectrumPath::Uniform,
                generator: w.generator,
                generator_label: module.label(w.generator).to_string(),
                annihilator: ann.members().to_vec(),
                rho: character.exponents().to_vec(),
                idempotent: None,
                re: value.re,
                im: value.im,
                multiplicity: count,
                designated: w.is_zero(),
            });
        }
    }
    Ok(SpectrumReport {
        dimension: module.size(),
        items,
    })
}

/// Spectrum of the walk `x -> ax`, `a ~ Q`: the uniform path at `alpha = 0`.
pub fn multiplication_walk_spectrum<T: Real>(
    q: &Distribution<T>,
    module: &FiniteModule,
) -> Result<SpectrumReport, SpectrumError> {
    predicted_spectrum_uniform(q, &T::zero(), module)
}

/// Checks that the pair and triple paths produce, for every cyclic
/// submodule of the dual, the same values within `tol`.
pub fn pair_and_triple_agree(pairs: &SpectrumReport, triples: &SpectrumReport, tol: f64) -> bool {
    let by_generator = |r: &SpectrumReport| {
        let mut m: BTreeMap<Elem, Vec<Complex64>> = BTreeMap::new();
        for i in &r.items {
            m.entry(i.generator).or_default().push(i.value());
        }
        m
    };
    let (a, b) = (by_generator(pairs), by_generator(triples));
    a.len() == b.len()
        && a.iter()
            .all(|(g, vals)| b.get(g).is_some_and(|other| multiset_eq(vals, other, tol)))
}
