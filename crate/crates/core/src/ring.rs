//! Finite commutative unital rings stored as element-indexed operation tables.
//!
//! Elements are indices `0..size`. Every builder fills explicit addition and
//! multiplication tables, so downstream code never cares how a ring was
//! described. The zero ring (one element, `one == zero`) is a valid ring.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Element index into a ring or module.
pub type Elem = usize;

pub type RingRef = Arc<FiniteRing>;

/// Largest ring checked exhaustively for the ring axioms.
const EXHAUSTIVE_AXIOM_LIMIT: usize = 256;
const RANDOM_AXIOM_TRIPLES: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("modulus must be at least 1")]
    ZeroModulus,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("polynomial must be monic of degree {expected} (got {got} coefficients)")]
    BadPolynomial { expected: usize, got: usize },
    #[error("polynomial coefficient {0} is not reduced mod p")]
    CoefficientOutOfRange(u64),
    #[error("polynomial is reducible over GF(p)")]
    Reducible,
    #[error("product of an empty list of rings")]
    EmptyProduct,
    #[error("element set is not an ideal: {0}")]
    NotIdeal(String),
    #[error("invalid ring table: {0}")]
    InvalidTable(String),
    #[error("element {0} out of range")]
    OutOfRange(Elem),
}

/// How a ring was constructed. Carried for reports only.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingProvenance {
    Zn(u64),
    Gf { p: u64, k: u32, poly: Vec<u64> },
    Product(Vec<RingProvenance>),
    Quotient { parent: Box<RingProvenance>, ideal: Vec<Elem> },
    Table,
}

#[derive(Clone, Debug)]
pub struct FiniteRing {
    size: usize,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    zero: Elem,
    one: Elem,
    labels: Vec<String>,
    provenance: RingProvenance,
}

impl PartialEq for FiniteRing {
    /// Rings are equal when their tables coincide; labels and provenance are
    /// cosmetic.
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size
            && self.zero == other.zero
            && self.one == other.one
            && self.add == other.add
            && self.mul == other.mul
    }
}

impl Eq for FiniteRing {}

impl FiniteRing {
    /// Builds a ring from raw tables and checks the axioms.
    pub fn from_tables(
        size: usize,
        add: Vec<Elem>,
        mul: Vec<Elem>,
        zero: Elem,
        one: Elem,
        labels: Option<Vec<String>>,
    ) -> Result<Self, RingError> {
        let ring = Self::from_tables_unchecked(size, add, mul, zero, one, labels, RingProvenance::Table)?;
        ring.check_axioms()?;
        Ok(ring)
    }

    fn from_tables_unchecked(
        size: usize,
        add: Vec<Elem>,
        mul: Vec<Elem>,
        zero: Elem,
        one: Elem,
        labels: Option<Vec<String>>,
        provenance: RingProvenance,
    ) -> Result<Self, RingError> {
        if size == 0 {
            return Err(RingError::InvalidTable("empty element set".into()));
        }
        if add.len() != size * size || mul.len() != size * size {
            return Err(RingError::InvalidTable("tables must be size x size".into()));
        }
        if let Some(bad) = add.iter().chain(&mul).find(|&&x| x >= size) {
            return Err(RingError::InvalidTable(format!("entry {bad} out of range")));
        }
        if zero >= size || one >= size {
            return Err(RingError::InvalidTable("identity out of range".into()));
        }
        let mut neg = vec![usize::MAX; size];
        for a in 0..size {
            match (0..size).find(|&b| add[a * size + b] == zero) {
                Some(b) => neg[a] = b,
                None => return Err(RingError::InvalidTable(format!("element {a} has no additive inverse"))),
            }
        }
        let labels = match labels {
            Some(l) if l.len() == size => l,
            Some(_) => return Err(RingError::InvalidTable("label count mismatch".into())),
            None => (0..size).map(|i| i.to_string()).collect(),
        };
        Ok(FiniteRing {
            size,
            add,
            mul,
            neg,
            zero,
            one,
            labels,
            provenance,
        })
    }

    /// Checks the commutative ring axioms: exhaustively up to 256 elements,
    /// on random triples above that.
    pub fn check_axioms(&self) -> Result<(), RingError> {
        let n = self.size;
        let fail = |msg: String| Err(RingError::InvalidTable(msg));
        for a in 0..n {
            if self.add(a, self.zero) != a {
                return fail(format!("{a} + 0 != {a}"));
            }
            if self.mul(a, self.one) != a {
                return fail(format!("{a} * 1 != {a}"));
            }
            for b in 0..n {
                if self.add(a, b) != self.add(b, a) {
                    return fail(format!("addition not commutative at ({a},{b})"));
                }
                if self.mul(a, b) != self.mul(b, a) {
                    return fail(format!("multiplication not commutative at ({a},{b})"));
                }
            }
        }
        let check = |a: Elem, b: Elem, c: Elem| -> Result<(), RingError> {
            if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                return Err(RingError::InvalidTable(format!("addition not associative at ({a},{b},{c})")));
            }
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(RingError::InvalidTable(format!(
                    "multiplication not associative at ({a},{b},{c})"
                )));
            }
            if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                return Err(RingError::InvalidTable(format!("distributivity fails at ({a},{b},{c})")));
            }
            Ok(())
        };
        if n <= EXHAUSTIVE_AXIOM_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..RANDOM_AXIOM_TRIPLES {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn zero(&self) -> Elem {
        self.zero
    }

    pub fn one(&self) -> Elem {
        self.one
    }

    pub fn is_zero_ring(&self) -> bool {
        self.size == 1
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.size
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a * self.size + b]
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a * self.size + b]
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a]
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn add_table(&self) -> &[Elem] {
        &self.add
    }

    pub fn mul_table(&self) -> &[Elem] {
        &self.mul
    }

    pub fn neg_table(&self) -> &[Elem] {
        &self.neg
    }

    pub fn label(&self, a: Elem) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn provenance(&self) -> &RingProvenance {
        &self.provenance
    }

    pub fn is_idempotent(&self, e: Elem) -> bool {
        self.mul(e, e) == e
    }

    /// The element `n * 1` (repeated addition of the identity).
    pub fn from_integer(&self, n: u64) -> Elem {
        (0..n).fold(self.zero, |acc, _| self.add(acc, self.one))
    }
}

impl fmt::Display for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.provenance {
            RingProvenance::Zn(n) => write!(f, "Z/{n}"),
            RingProvenance::Gf { p, k, .. } => write!(f, "GF({p}^{k})"),
            RingProvenance::Product(_) => write!(f, "product ring of order {}", self.size),
            RingProvenance::Quotient { .. } => write!(f, "quotient ring of order {}", self.size),
            RingProvenance::Table => write!(f, "ring of order {}", self.size),
        }
    }
}

/// An ideal, stored as the sorted list of its members.
#[derive(Clone, Debug)]
pub struct Ideal {
    ring: RingRef,
    members: Vec<Elem>,
}

impl PartialEq for Ideal {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members && *self.ring == *other.ring
    }
}

impl Eq for Ideal {}

impl Ideal {
    /// Validates that `members` is an ideal of `ring`.
    pub fn new(ring: &RingRef, members: impl IntoIterator<Item = Elem>) -> Result<Self, RingError> {
        let mut members: Vec<Elem> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if let Some(&bad) = members.iter().find(|&&x| x >= ring.size()) {
            return Err(RingError::OutOfRange(bad));
        }
        let ideal = Ideal {
            ring: Arc::clone(ring),
            members,
        };
        if !ideal.contains(ring.zero()) {
            return Err(RingError::NotIdeal("missing zero".into()));
        }
        for &a in &ideal.members {
            if !ideal.contains(ring.neg(a)) {
                return Err(RingError::NotIdeal(format!("not closed under negation at {a}")));
            }
            for &b in &ideal.members {
                if !ideal.contains(ring.add(a, b)) {
                    return Err(RingError::NotIdeal(format!("not closed under addition at ({a},{b})")));
                }
            }
            for r in ring.elements() {
                if !ideal.contains(ring.mul(r, a)) {
                    return Err(RingError::NotIdeal(format!("not absorbing at ({r},{a})")));
                }
            }
        }
        Ok(ideal)
    }

    pub(crate) fn from_sorted_unchecked(ring: &RingRef, members: Vec<Elem>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        Ideal {
            ring: Arc::clone(ring),
            members,
        }
    }

    pub fn zero(ring: &RingRef) -> Self {
        Self::from_sorted_unchecked(ring, vec![ring.zero()])
    }

    pub fn whole(ring: &RingRef) -> Self {
        Self::from_sorted_unchecked(ring, ring.elements().collect())
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, a: Elem) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    pub fn is_whole(&self) -> bool {
        self.members.len() == self.ring.size()
    }
}

/// A group of units: of `R` itself, or of a corner ring `Re` with identity `e`.
#[derive(Clone, Debug)]
pub struct UnitGroup {
    ring: RingRef,
    identity: Elem,
    members: Vec<Elem>,
    inverse: BTreeMap<Elem, Elem>,
}

impl UnitGroup {
    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, u: Elem) -> bool {
        self.inverse.contains_key(&u)
    }

    pub fn inverse_of(&self, u: Elem) -> Option<Elem> {
        self.inverse.get(&u).copied()
    }

    /// Position of `u` in [`Self::members`].
    pub fn position(&self, u: Elem) -> Option<usize> {
        self.members.binary_search(&u).ok()
    }
}

/// `Z/nZ`; element `i` is the residue `i`.
pub fn build_zn(n: u64) -> Result<RingRef, RingError> {
    if n == 0 {
        return Err(RingError::ZeroModulus);
    }
    let size = n as usize;
    let mut add = Vec::with_capacity(size * size);
    let mut mul = Vec::with_capacity(size * size);
    for a in 0..n {
        for b in 0..n {
            add.push(((a + b) % n) as Elem);
            mul.push(((a * b) % n) as Elem);
        }
    }
    let one = (1 % n) as Elem;
    let ring = FiniteRing::from_tables_unchecked(size, add, mul, 0, one, None, RingProvenance::Zn(n))?;
    Ok(Arc::new(ring))
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Remainder of `num` modulo the monic polynomial `den` over `Z/p`.
/// Coefficients are stored constant term first.
fn poly_rem(num: &[u64], den: &[u64], p: u64) -> Vec<u64> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    debug_assert_eq!(den[dd], 1);
    while r.len() > dd {
        let lead = r.pop().unwrap();
        if lead == 0 {
            continue;
        }
        let shift = r.len() - dd;
        for (i, &c) in den[..dd].iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
        }
    }
    r
}

/// Irreducibility by exhaustive search for a monic factor of degree `<= k/2`.
fn is_irreducible(poly: &[u64], p: u64) -> bool {
    let k = poly.len() - 1;
    for deg in 1..=k / 2 {
        let count = p.pow(deg as u32);
        for code in 0..count {
            let mut f: Vec<u64> = (0..deg).map(|i| (code / p.pow(i as u32)) % p).collect();
            f.push(1);
            if poly_rem(poly, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn poly_label(coeffs: &[u64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| match (i, c) {
            (0, c) => c.to_string(),
            (1, 1) => "x".into(),
            (1, c) => format!("{c}x"),
            (i, 1) => format!("x^{i}"),
            (i, c) => format!("{c}x^{i}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

/// `GF(p^k)` as residues modulo a monic irreducible `poly` of degree `k`.
///
/// `poly` lists coefficients constant term first, so `[1, 1, 1]` is
/// `x^2 + x + 1`. Element index `sum c_i p^i` is the residue `sum c_i x^i`.
pub fn build_gf(p: u64, k: u32, poly: &[u64]) -> Result<RingRef, RingError> {
    if !is_prime(p) {
        return Err(RingError::NotPrime(p));
    }
    if k == 0 {
        return Err(RingError::ZeroDegree);
    }
    let k_us = k as usize;
    if poly.len() != k_us + 1 || poly[k_us] != 1 {
        return Err(RingError::BadPolynomial {
            expected: k_us,
            got: poly.len(),
        });
    }
    if let Some(&c) = poly.iter().find(|&&c| c >= p) {
        return Err(RingError::CoefficientOutOfRange(c));
    }
    if !is_irreducible(poly, p) {
        return Err(RingError::Reducible);
    }
    let size = p.pow(k) as usize;
    let digits = |x: usize| -> Vec<u64> { (0..k_us).map(|i| (x as u64 / p.pow(i as u32)) % p).collect() };
    let index = |c: &[u64]| -> Elem { c.iter().enumerate().map(|(i, &d)| d * p.pow(i as u32)).sum::<u64>() as Elem };
    let elems: Vec<Vec<u64>> = (0..size).map(digits).collect();
    let mut add = Vec::with_capacity(size * size);
    let mut mul = Vec::with_capacity(size * size);
    for a in &elems {
        for b in &elems {
            let s: Vec<u64> = a.iter().zip(b).map(|(x, y)| (x + y) % p).collect();
            add.push(index(&s));
            let mut prod = vec![0u64; 2 * k_us - 1];
            for (i, x) in a.iter().enumerate() {
                for (j, y) in b.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            let mut r = poly_rem(&prod, poly, p);
            r.resize(k_us, 0);
            mul.push(index(&r));
        }
    }
    let labels = elems.iter().map(|c| poly_label(c)).collect();
    let ring = FiniteRing::from_tables_unchecked(
        size,
        add,
        mul,
        0,
        1,
        Some(labels),
        RingProvenance::Gf {
            p,
            k,
            poly: poly.to_vec(),
        },
    )?;
    Ok(Arc::new(ring))
}

/// Mixed-radix digits of `x` with the last coordinate varying fastest.
pub(crate) fn mixed_radix_digits(mut x: usize, radices: &[usize]) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = x % r;
        x /= r;
    }
    out
}

pub(crate) fn mixed_radix_index(digits: &[usize], radices: &[usize]) -> usize {
    digits.iter().zip(radices).fold(0, |acc, (&d, &r)| acc * r + d)
}

/// Direct product of rings with componentwise operations.
pub fn build_product(factors: &[RingRef]) -> Result<RingRef, RingError> {
    if factors.is_empty() {
        return Err(RingError::EmptyProduct);
    }
    let radices: Vec<usize> = factors.iter().map(|r| r.size()).collect();
    let size: usize = radices.iter().product();
    let tuples: Vec<Vec<usize>> = (0..size).map(|x| mixed_radix_digits(x, &radices)).collect();
    let mut add = Vec::with_capacity(size * size);
    let mut mul = Vec::with_capacity(size * size);
    for a in &tuples {
        for b in &tuples {
            let s: Vec<usize> = factors.iter().enumerate().map(|(i, r)| r.add(a[i], b[i])).collect();
            let m: Vec<usize> = factors.iter().enumerate().map(|(i, r)| r.mul(a[i], b[i])).collect();
            add.push(mixed_radix_index(&s, &radices));
            mul.push(mixed_radix_index(&m, &radices));
        }
    }
    let zero: Vec<usize> = factors.iter().map(|r| r.zero()).collect();
    let one: Vec<usize> = factors.iter().map(|r| r.one()).collect();
    let labels = if factors.len() == 1 {
        factors[0].labels().to_vec()
    } else {
        tuples
            .iter()
            .map(|t| {
                let parts: Vec<&str> = t.iter().enumerate().map(|(i, &d)| factors[i].label(d)).collect();
                format!("({})", parts.join(","))
            })
            .collect()
    };
    let ring = FiniteRing::from_tables_unchecked(
        size,
        add,
        mul,
        mixed_radix_index(&zero, &radices),
        mixed_radix_index(&one, &radices),
        Some(labels),
        RingProvenance::Product(factors.iter().map(|r| r.provenance().clone()).collect()),
    )?;
    Ok(Arc::new(ring))
}

/// The quotient `R/I` together with the canonical projection.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub ring: RingRef,
    /// Element of `R` to its coset (an element of the quotient ring).
    pub projection: Vec<Elem>,
    /// Coset to its least member in `R`; cosets are numbered in increasing
    /// order of this representative.
    pub representatives: Vec<Elem>,
}

impl Quotient {
    pub fn project(&self, a: Elem) -> Elem {
        self.projection[a]
    }

    /// Least element of `R` in the coset of `a`.
    pub fn representative_of(&self, a: Elem) -> Elem {
        self.representatives[self.projection[a]]
    }
}

/// `R/I`. The quotient's elements are the cosets ordered by least member.
pub fn quotient_ring(ring: &RingRef, ideal: &Ideal) -> Result<Quotient, RingError> {
    if **ideal.ring() != **ring {
        return Err(RingError::NotIdeal("ideal belongs to a different ring".into()));
    }
    // Re-validate: an Ideal may come from another ring with equal tables.
    let ideal = Ideal::new(ring, ideal.members().iter().copied())?;
    let n = ring.size();
    let mut projection = vec![usize::MAX; n];
    let mut representatives = Vec::new();
    for a in ring.elements() {
        if projection[a] != usize::MAX {
            continue;
        }
        let coset = representatives.len();
        representatives.push(a);
        for &i in ideal.members() {
            projection[ring.add(a, i)] = coset;
        }
    }
    let m = representatives.len();
    let mut add = Vec::with_capacity(m * m);
    let mut mul = Vec::with_capacity(m * m);
    for &a in &representatives {
        for &b in &representatives {
            add.push(projection[ring.add(a, b)]);
            mul.push(projection[ring.mul(a, b)]);
        }
    }
    let labels = representatives.iter().map(|&r| format!("[{}]", ring.label(r))).collect();
    let q = FiniteRing::from_tables_unchecked(
        m,
        add,
        mul,
        projection[ring.zero()],
        projection[ring.one()],
        Some(labels),
        RingProvenance::Quotient {
            parent: Box::new(ring.provenance().clone()),
            ideal: ideal.members().to_vec(),
        },
    )?;
    Ok(Quotient {
        ring: Arc::new(q),
        projection,
        representatives,
    })
}

/// `U(R)`. For the zero ring this is `{0}`.
pub fn units(ring: &RingRef) -> UnitGroup {
    corner_units(ring, ring.one())
}

/// `U(Re)` for an idempotent `e`: elements `u` of `Re` with `uv = e` for some
/// `v` in `Re`.
pub fn units_of_corner(ring: &RingRef, e: Elem) -> Result<UnitGroup, RingError> {
    if e >= ring.size() {
        return Err(RingError::OutOfRange(e));
    }
    if !ring.is_idempotent(e) {
        return Err(RingError::InvalidTable(format!("{e} is not idempotent")));
    }
    Ok(corner_units(ring, e))
}

fn corner_units(ring: &RingRef, e: Elem) -> UnitGroup {
    let corner: Vec<Elem> = ring.elements().filter(|&a| ring.mul(a, e) == a).collect();
    let mut inverse = BTreeMap::new();
    for &u in &corner {
        if let Some(&v) = corner.iter().find(|&&v| ring.mul(u, v) == e) {
            inverse.insert(u, v);
        }
    }
    UnitGroup {
        ring: Arc::clone(ring),
        identity: e,
        members: inverse.keys().copied().collect(),
        inverse,
    }
}

/// All `e` with `e^2 = e`, ascending.
pub fn idempotents(ring: &FiniteRing) -> Vec<Elem> {
    ring.elements().filter(|&e| ring.is_idempotent(e)).collect()
}

/// `Ra = {ra : r in R}`.
pub fn principal_ideal(ring: &RingRef, a: Elem) -> Ideal {
    let mut members: Vec<Elem> = ring.elements().map(|r| ring.mul(r, a)).collect();
    members.sort_unstable();
    members.dedup();
    Ideal::from_sorted_unchecked(ring, members)
}
