//! Distributions on rings and modules, and the transition matrices of the
//! coin-toss, affine and polynomial walks.
//!
//! States are module elements in index order; row `x` of a transition
//! matrix is the distribution of the next state given the current state `x`.

use std::collections::{BTreeMap, VecDeque};

use num_complex::{Complex, Complex64};
use num_integer::Integer;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::Matrix;
use crate::module::FiniteModule;
use crate::ring::{units, Elem};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error("{what} has {got} weights, expected {expected}")]
    SizeMismatch { what: &'static str, expected: usize, got: usize },
    #[error("weight at index {0} is negative")]
    NegativeWeight(usize),
    #[error("weights must sum to 1")]
    WeightSum,
    #[error("alpha must lie in [0, 1]")]
    AlphaOutOfRange,
    #[error("P is not constant on associates: P({}) != P({})", .0.v, .0.w)]
    NotConstantOnAssociates(AssociatesViolation),
    #[error("point mass index {0} out of range")]
    OutOfRange(usize),
}

/// Witness that `v` and `w = uv` (for a unit `u`) carry different weights.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AssociatesViolation {
    pub v: Elem,
    pub w: Elem,
}

/// A probability distribution on the elements `0..n` of a ring or module.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<T> {
    weights: Vec<T>,
}

impl<T: Real> Distribution<T> {
    pub fn new(weights: Vec<T>) -> Result<Self, WalkError> {
        if let Some(i) = weights.iter().position(|w| *w < T::zero()) {
            return Err(WalkError::NegativeWeight(i));
        }
        let total = weights.iter().cloned().fold(T::zero(), |a, b| a + b);
        if !total.close(&T::one()) {
            return Err(WalkError::WeightSum);
        }
        Ok(Distribution { weights })
    }

    pub fn uniform(n: usize) -> Self {
        let w = T::one() / T::from_count(n);
        Distribution { weights: vec![w; n] }
    }

    pub fn point_mass(n: usize, at: Elem) -> Result<Self, WalkError> {
        if at >= n {
            return Err(WalkError::OutOfRange(at));
        }
        let mut weights = vec![T::zero(); n];
        weights[at] = T::one();
        Ok(Distribution { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, x: Elem) -> &T {
        &self.weights[x]
    }

    pub fn support(&self) -> Vec<Elem> {
        (0..self.weights.len()).filter(|&i| !self.weights[i].is_zero()).collect()
    }

    /// Replaces each weight by the average over its `U(R)`-orbit in `module`.
    pub fn symmetrized(&self, module: &FiniteModule) -> Self {
        assert_eq!(self.len(), module.size());
        let us = units(module.ring());
        let weights = module
            .elements()
            .map(|v| {
                let mut orbit: Vec<Elem> = us.members().iter().map(|&u| module.act(u, v)).collect();
                orbit.sort_unstable();
                orbit.dedup();
                let total = orbit.iter().fold(T::zero(), |a, &w| a + self.weights[w].clone());
                total / T::from_count(orbit.len())
            })
            .collect();
        Distribution { weights }
    }
}

/// `Ok` when `P(uv) = P(v)` for every unit `u` and every `v`.
pub fn validate_constant_on_associates<T: Real>(
    p: &Distribution<T>,
    module: &FiniteModule,
) -> Result<(), AssociatesViolation> {
    let us = units(module.ring());
    for v in module.elements() {
        for &u in us.members() {
            let w = module.act(u, v);
            if p.weight(v) != p.weight(w) {
                return Err(AssociatesViolation { v: v.min(w), w: v.max(w) });
            }
        }
    }
    Ok(())
}

/// `p(x, y) = sum c_ij x^i y^j` with complex coefficients, where `x` stands
/// for the translation element `P` and `y` for the dilation element `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial<T> {
    terms: BTreeMap<(u32, u32), Complex<T>>,
}

impl<T: Real> Polynomial<T> {
    pub fn new(terms: impl IntoIterator<Item = ((u32, u32), Complex<T>)>) -> Self {
        let mut map: BTreeMap<(u32, u32), Complex<T>> = BTreeMap::new();
        for (k, c) in terms {
            let slot = map.entry(k).or_insert_with(|| Complex::new(T::zero(), T::zero()));
            *slot = slot.clone() + c;
        }
        map.retain(|_, c| !(c.re.is_zero() && c.im.is_zero()));
        Polynomial { terms: map }
    }

    pub fn monomial(i: u32, j: u32) -> Self {
        Self::new([((i, j), Complex::new(T::one(), T::zero()))])
    }

    /// `alpha x + (1 - alpha) y`.
    pub fn coin_toss(alpha: T) -> Self {
        let beta = T::one() - alpha.clone();
        Self::new([
            ((1, 0), Complex::new(alpha, T::zero())),
            ((0, 1), Complex::new(beta, T::zero())),
        ])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32), &Complex<T>)> {
        self.terms.iter()
    }

    /// True when every coefficient is real and nonnegative and they sum to 1,
    /// which makes `p(P, Q)` a probability on the affine monoid.
    pub fn is_probabilistic(&self) -> bool {
        let mut total = T::zero();
        for c in self.terms.values() {
            if !c.im.is_zero() || c.re < T::zero() {
                return false;
            }
            total = total + c.re.clone();
        }
        total.close(&T::one())
    }

    pub fn evaluate(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| {
                Complex64::new(c.re.to_f64_lossy(), c.im.to_f64_lossy()) * x.powu(i) * y.powu(j)
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WalkKind<T> {
    CoinToss { alpha: T },
    Affine,
    Polynomial(Polynomial<T>),
}

/// A validated walk: `P` on `V`, `Q` on `R`, `P` constant on associates.
#[derive(Clone, Debug)]
pub struct WalkSpec<T> {
    pub kind: WalkKind<T>,
    pub p: Distribution<T>,
    pub q: Distribution<T>,
}

impl<T: Real> WalkSpec<T> {
    /// Checks sizes and `alpha`, and the associates hypothesis on `P`. With
    /// `symmetrize`, a violating `P` is averaged over unit orbits instead.
    pub fn new(
        kind: WalkKind<T>,
        p: Distribution<T>,
        q: Distribution<T>,
        module: &FiniteModule,
        symmetrize: bool,
    ) -> Result<Self, WalkError> {
        if p.len() != module.size() {
            return Err(WalkError::SizeMismatch { what: "P", expected: module.size(), got: p.len() });
        }
        let r = module.ring().size();
        if q.len() != r {
            return Err(WalkError::SizeMismatch { what: "Q", expected: r, got: q.len() });
        }
        if let WalkKind::CoinToss { alpha } = &kind {
            if *alpha < T::zero() || *alpha > T::one() {
                return Err(WalkError::AlphaOutOfRange);
            }
        }
        let p = match validate_constant_on_associates(&p, module) {
            Ok(()) => p,
            Err(_) if symmetrize => p.symmetrized(module),
            Err(v) => return Err(WalkError::NotConstantOnAssociates(v)),
        };
        Ok(WalkSpec { kind, p, q })
    }

    /// The walk as a polynomial in `P` and `Q`.
    pub fn polynomial(&self) -> Polynomial<T> {
        match &self.kind {
            WalkKind::CoinToss { alpha } => Polynomial::coin_toss(alpha.clone()),
            WalkKind::Affine => Polynomial::monomial(1, 1),
            WalkKind::Polynomial(p) => p.clone(),
        }
    }
}

/// `x -> x + b` with probability `P(b)`.
pub fn translation_matrix<T: Real>(p: &Distribution<T>, module: &FiniteModule) -> Matrix<T> {
    let n = module.size();
    let mut m = Matrix::<T>::zeros(n, n);
    for x in module.elements() {
        for b in p.support() {
            let y = module.add(x, b);
            m[(x, y)] = m[(x, y)].clone() + p.weight(b).clone();
        }
    }
    m
}

/// `x -> ax` with probability `Q(a)`.
pub fn dilation_matrix<T: Real>(q: &Distribution<T>, module: &FiniteModule) -> Matrix<T> {
    let n = module.size();
    let mut m = Matrix::<T>::zeros(n, n);
    for x in module.elements() {
        for a in q.support() {
            let y = module.act(a, x);
            m[(x, y)] = m[(x, y)].clone() + q.weight(a).clone();
        }
    }
    m
}

/// Entry `(x, y) = alpha sum_{x+b=y} P(b) + (1-alpha) sum_{ax=y} Q(a)`.
pub fn coin_toss_matrix<T: Real>(
    p: &Distribution<T>,
    q: &Distribution<T>,
    alpha: &T,
    module: &FiniteModule,
) -> Matrix<T> {
    let beta = T::one() - alpha.clone();
    translation_matrix(p, module)
        .scale(alpha)
        .add(&dilation_matrix(q, module).scale(&beta))
}

/// Entry `(x, y) = sum_{ax+b=y} Q(a) P(b)`.
pub fn affine_matrix<T: Real>(p: &Distribution<T>, q: &Distribution<T>, module: &FiniteModule) -> Matrix<T> {
    let n = module.size();
    let mut m = Matrix::<T>::zeros(n, n);
    let (ps, qs) = (p.support(), q.support());
    for x in module.elements() {
        for &a in &qs {
            let ax = module.act(a, x);
            for &b in &ps {
                let y = module.add(ax, b);
                m[(x, y)] = m[(x, y)].clone() + q.weight(a).clone() * p.weight(b).clone();
            }
        }
    }
    m
}

fn complexify<T: Real>(m: &Matrix<T>) -> Matrix<Complex<T>> {
    m.map(|x| Complex::new(x.clone(), T::zero()))
}

/// Transition matrix of `p(P, Q)`. A product `XY` in the monoid algebra
/// (first `Y`, then `X`, as maps) has matrix `T_Y T_X`, so the monomial
/// `x^i y^j` becomes `T_Q^j T_P^i`.
pub fn polynomial_operator_matrix<T: Real>(
    p: &Distribution<T>,
    q: &Distribution<T>,
    poly: &Polynomial<T>,
    module: &FiniteModule,
) -> Matrix<Complex<T>> {
    let n = module.size();
    let tp = complexify(&translation_matrix(p, module));
    let tq = complexify(&dilation_matrix(q, module));
    let mut p_powers = vec![Matrix::identity(n)];
    let mut q_powers = vec![Matrix::identity(n)];
    let mut out = Matrix::zeros(n, n);
    for (&(i, j), c) in poly.terms() {
        while p_powers.len() <= i as usize {
            let next = p_powers.last().unwrap().mul(&tp);
            p_powers.push(next);
        }
        while q_powers.len() <= j as usize {
            let next = q_powers.last().unwrap().mul(&tq);
            q_powers.push(next);
        }
        let term = q_powers[j as usize].mul(&p_powers[i as usize]).scale(c);
        out = out.add(&term);
    }
    out
}

/// A transition matrix, real for coin-toss and affine walks and complex for
/// general polynomial walks.
#[derive(Clone, Debug, PartialEq)]
pub enum TransitionMatrix<T> {
    Real(Matrix<T>),
    Complex(Matrix<Complex<T>>),
}

impl<T: Real> TransitionMatrix<T> {
    pub fn size(&self) -> usize {
        match self {
            TransitionMatrix::Real(m) => m.rows(),
            TransitionMatrix::Complex(m) => m.rows(),
        }
    }

    /// Real, nonnegative, unit row sums.
    pub fn is_stochastic(&self) -> bool {
        match self {
            TransitionMatrix::Real(m) => real_is_stochastic(m),
            TransitionMatrix::Complex(m) => {
                m.entries().iter().all(|z| z.im.is_zero()) && real_is_stochastic(&m.map(|z| z.re.clone()))
            }
        }
    }

    /// The real part when every entry is real.
    pub fn as_real(&self) -> Option<Matrix<T>> {
        match self {
            TransitionMatrix::Real(m) => Some(m.clone()),
            TransitionMatrix::Complex(m) => m
                .entries()
                .iter()
                .all(|z| z.im.is_zero())
                .then(|| m.map(|z| z.re.clone())),
        }
    }

    pub fn to_complex64(&self) -> Matrix<Complex64> {
        match self {
            TransitionMatrix::Real(m) => m.map(|x| Complex64::new(x.to_f64_lossy(), 0.0)),
            TransitionMatrix::Complex(m) => m.map(|z| Complex64::new(z.re.to_f64_lossy(), z.im.to_f64_lossy())),
        }
    }

    /// Positions of nonzero entries, by row.
    pub fn support_graph(&self) -> Vec<Vec<usize>> {
        let n = self.size();
        (0..n)
            .map(|i| match self {
                TransitionMatrix::Real(m) => (0..n).filter(|&j| !m[(i, j)].is_zero()).collect(),
                TransitionMatrix::Complex(m) => (0..n)
                    .filter(|&j| !(m[(i, j)].re.is_zero() && m[(i, j)].im.is_zero()))
                    .collect(),
            })
            .collect()
    }
}

fn real_is_stochastic<T: Real>(m: &Matrix<T>) -> bool {
    m.entries().iter().all(|x| *x >= T::zero()) && m.row_sums().iter().all(|s| s.close(&T::one()))
}

/// The transition matrix of a walk on `module`.
pub fn build_transition<T: Real>(spec: &WalkSpec<T>, module: &FiniteModule) -> TransitionMatrix<T> {
    match &spec.kind {
        WalkKind::CoinToss { alpha } => TransitionMatrix::Real(coin_toss_matrix(&spec.p, &spec.q, alpha, module)),
        WalkKind::Affine => TransitionMatrix::Real(affine_matrix(&spec.p, &spec.q, module)),
        WalkKind::Polynomial(poly) => {
            TransitionMatrix::Complex(polynomial_operator_matrix(&spec.p, &spec.q, poly, module))
        }
    }
}

/// Sufficient conditions for irreducibility and aperiodicity, alongside the
/// exact answer read off the support digraph of the transition matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IrreducibilityReport {
    pub support_p_generates: bool,
    pub one_in_support_q: bool,
    pub zero_in_monoid_q: bool,
    pub sufficient_irreducible: bool,
    pub sufficient_aperiodic: bool,
    pub irreducible: bool,
    /// Period of the chain; present only when it is irreducible.
    pub period: Option<u64>,
}

impl IrreducibilityReport {
    pub fn aperiodic(&self) -> bool {
        self.period == Some(1)
    }

    /// The sufficient conditions never claim more than the digraph shows.
    pub fn is_consistent(&self) -> bool {
        (!self.sufficient_irreducible || self.irreducible) && (!self.sufficient_aperiodic || self.aperiodic())
    }
}

/// Additive subgroup of `module` generated by `gens`.
pub fn additive_closure(module: &FiniteModule, gens: &[Elem]) -> Vec<Elem> {
    let mut seen = vec![false; module.size()];
    let mut queue = VecDeque::from([module.zero()]);
    seen[module.zero()] = true;
    while let Some(x) = queue.pop_front() {
        for &g in gens {
            let y = module.add(x, g);
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    (0..module.size()).filter(|&x| seen[x]).collect()
}

/// Multiplicative monoid generated by `gens` (always containing 1).
pub fn multiplicative_closure(module: &FiniteModule, gens: &[Elem]) -> Vec<Elem> {
    let ring = module.ring();
    let mut seen = vec![false; ring.size()];
    let mut queue = VecDeque::from([ring.one()]);
    seen[ring.one()] = true;
    while let Some(x) = queue.pop_front() {
        for &g in gens {
            let y = ring.mul(x, g);
            if !seen[y] {
                seen[y] = true;
                queue.push_back(y);
            }
        }
    }
    (0..ring.size()).filter(|&x| seen[x]).collect()
}

pub fn irreducibility_report<T: Real>(spec: &WalkSpec<T>, module: &FiniteModule) -> IrreducibilityReport {
    let ring = module.ring();
    let support_p_generates = additive_closure(module, &spec.p.support()).len() == module.size();
    let q_support = spec.q.support();
    let one_in_support_q = q_support.contains(&ring.one());
    let zero_in_monoid_q = multiplicative_closure(module, &q_support).contains(&ring.zero());
    let (sufficient_irreducible, sufficient_aperiodic) = match &spec.kind {
        WalkKind::CoinToss { alpha } => {
            let strict = *alpha > T::zero() && *alpha < T::one();
            let irr = strict && support_p_generates;
            (irr, irr && zero_in_monoid_q)
        }
        WalkKind::Affine => {
            let irr = support_p_generates && one_in_support_q;
            (irr, irr && zero_in_monoid_q)
        }
        WalkKind::Polynomial(_) => (false, false),
    };
    let graph = build_transition(spec, module).support_graph();
    let (irreducible, period) = digraph_irreducibility(&graph);
    IrreducibilityReport {
        support_p_generates,
        one_in_support_q,
        zero_in_monoid_q,
        sufficient_irreducible,
        sufficient_aperiodic,
        irreducible,
        period,
    }
}

/// Strong connectivity of a digraph given by adjacency lists, and its period
/// (gcd of `level(u) + 1 - level(v)` over edges, levels from BFS) when
/// strongly connected.
pub fn digraph_irreducibility(adj: &[Vec<usize>]) -> (bool, Option<u64>) {
    let n = adj.len();
    if n == 0 {
        return (false, None);
    }
    let bfs = |edges: &[Vec<usize>]| {
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &v in &edges[u] {
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    };
    let forward = bfs(adj);
    let mut reverse = vec![Vec::new(); n];
    for (u, row) in adj.iter().enumerate() {
        for &v in row {
            reverse[v].push(u);
        }
    }
    let backward = bfs(&reverse);
    if forward.iter().chain(&backward).any(|&l| l == usize::MAX) {
        return (false, None);
    }
    let mut g: u64 = 0;
    for (u, row) in adj.iter().enumerate() {
        for &v in row {
            let d = (forward[u] as i64 + 1 - forward[v] as i64).unsigned_abs();
            g = g.gcd(&d);
        }
    }
    (true, Some(g))
}
