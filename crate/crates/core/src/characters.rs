//! Characters of finite abelian groups and the dual module.
//!
//! Groups are given by operation tables. A group is presented through its
//! invariant factors `d_1 | d_2 | ... | d_t`, and a character is stored as an
//! exponent tuple `(c_1, ..., c_t)`: its value at `sum a_i g_i` is the root of
//! unity with angle `sum c_i a_i / d_i` turns. Angles are exact fractions.

use std::collections::HashSet;
use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::module::FiniteModule;
use crate::ring::{mixed_radix_digits, mixed_radix_index, Elem, RingRef, UnitGroup};

const EXHAUSTIVE_GROUP_LIMIT: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("table must be size x size with entries in range")]
    BadShape,
    #[error("no identity element")]
    NoIdentity,
    #[error("element {0} has no inverse")]
    NoInverse(Elem),
    #[error("operation is not associative at ({0},{1},{2})")]
    NotAssociative(Elem, Elem, Elem),
    #[error("operation is not commutative at ({0},{1})")]
    NotAbelian(Elem, Elem),
}

/// A finite abelian group given by its operation table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAbelianGroup {
    size: usize,
    op: Vec<Elem>,
    identity: Elem,
    inverse: Vec<Elem>,
}

impl FiniteAbelianGroup {
    /// Validates the group axioms and commutativity. Associativity is checked
    /// exhaustively up to 256 elements and on random triples above.
    pub fn from_table(size: usize, op: Vec<Elem>) -> Result<Self, GroupError> {
        if size == 0 || op.len() != size * size || op.iter().any(|&x| x >= size) {
            return Err(GroupError::BadShape);
        }
        let at = |a: Elem, b: Elem| op[a * size + b];
        let identity = (0..size)
            .find(|&e| (0..size).all(|x| at(e, x) == x && at(x, e) == x))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverse = vec![0; size];
        for (a, slot) in inverse.iter_mut().enumerate() {
            *slot = (0..size)
                .find(|&b| at(a, b) == identity)
                .ok_or(GroupError::NoInverse(a))?;
        }
        for a in 0..size {
            for b in 0..a {
                if at(a, b) != at(b, a) {
                    return Err(GroupError::NotAbelian(a, b));
                }
            }
        }
        let assoc = |a: Elem, b: Elem, c: Elem| at(at(a, b), c) == at(a, at(b, c));
        if size <= EXHAUSTIVE_GROUP_LIMIT {
            for a in 0..size {
                for b in 0..size {
                    for c in 0..size {
                        if !assoc(a, b, c) {
                            return Err(GroupError::NotAssociative(a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0xab);
            for _ in 0..200_000 {
                let (a, b, c) = (rng.gen_range(0..size), rng.gen_range(0..size), rng.gen_range(0..size));
                if !assoc(a, b, c) {
                    return Err(GroupError::NotAssociative(a, b, c));
                }
            }
        }
        Ok(FiniteAbelianGroup {
            size,
            op,
            identity,
            inverse,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    #[inline]
    pub fn op(&self, a: Elem, b: Elem) -> Elem {
        self.op[a * self.size + b]
    }

    pub fn inverse(&self, a: Elem) -> Elem {
        self.inverse[a]
    }

    /// `a` combined with itself `k` times.
    pub fn power(&self, a: Elem, k: u64) -> Elem {
        (0..k).fold(self.identity, |acc, _| self.op(acc, a))
    }

    pub fn order_of(&self, a: Elem) -> u64 {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.op(x, a);
            k += 1;
        }
        k
    }
}

/// Invariant-factor presentation `A = Z/d_1 + ... + Z/d_t` with `d_i | d_{i+1}`
/// and every `d_i > 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianPresentation {
    group_size: usize,
    basis: Vec<Elem>,
    orders: Vec<u64>,
    coord: Vec<Vec<u64>>,
    /// Mixed-radix index of a coordinate tuple to the element it names.
    element_at: Vec<Elem>,
}

impl AbelianPresentation {
    pub fn group_size(&self) -> usize {
        self.group_size
    }

    pub fn basis(&self) -> &[Elem] {
        &self.basis
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Least common multiple of the orders, i.e. the largest invariant factor.
    pub fn exponent(&self) -> u64 {
        self.orders.last().copied().unwrap_or(1)
    }

    pub fn coords(&self, x: Elem) -> &[u64] {
        &self.coord[x]
    }

    fn radices(&self) -> Vec<usize> {
        self.orders.iter().map(|&d| d as usize).collect()
    }

    pub fn element_from_coords(&self, coords: &[u64]) -> Elem {
        let digits: Vec<usize> = coords.iter().zip(&self.orders).map(|(&c, &d)| (c % d) as usize).collect();
        self.element_at[mixed_radix_index(&digits, &self.radices())]
    }
}

/// Decomposes a finite abelian group given by an operation table.
pub fn invariant_factors_from_table(size: usize, table: Vec<Elem>) -> Result<AbelianPresentation, GroupError> {
    Ok(invariant_factors(&FiniteAbelianGroup::from_table(size, table)?))
}

/// Greedy decomposition: split off a cyclic summand generated by a
/// maximal-order element, decompose the quotient, and lift each quotient
/// generator to a preimage of the same order (found by scanning its coset).
pub fn invariant_factors(group: &FiniteAbelianGroup) -> AbelianPresentation {
    let summands = split_cyclic_summands(group);
    let basis: Vec<Elem> = summands.iter().map(|s| s.0).collect();
    let orders: Vec<u64> = summands.iter().map(|s| s.1).collect();
    let radices: Vec<usize> = orders.iter().map(|&d| d as usize).collect();
    let total: usize = radices.iter().product();
    assert_eq!(total, group.size(), "invariant factors must multiply to the group order");
    let mut coord = vec![Vec::new(); group.size()];
    let mut element_at = Vec::with_capacity(total);
    for idx in 0..total {
        let digits = mixed_radix_digits(idx, &radices);
        let x = digits
            .iter()
            .zip(&basis)
            .fold(group.identity(), |acc, (&a, &g)| group.op(acc, group.power(g, a as u64)));
        assert!(coord[x].is_empty() || orders.is_empty(), "basis is not independent");
        coord[x] = digits.iter().map(|&a| a as u64).collect();
        element_at.push(x);
    }
    AbelianPresentation {
        group_size: group.size(),
        basis,
        orders,
        coord,
        element_at,
    }
}

fn split_cyclic_summands(group: &FiniteAbelianGroup) -> Vec<(Elem, u64)> {
    let n = group.size();
    if n == 1 {
        return Vec::new();
    }
    let orders: Vec<u64> = (0..n).map(|x| group.order_of(x)).collect();
    let max_order = *orders.iter().max().unwrap();
    let g0 = orders.iter().position(|&o| o == max_order).unwrap();
    let subgroup: Vec<Elem> = (0..max_order).map(|k| group.power(g0, k)).collect();

    let mut proj = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if proj[x] != usize::MAX {
            continue;
        }
        for &h in &subgroup {
            proj[group.op(x, h)] = reps.len();
        }
        reps.push(x);
    }
    let m = reps.len();
    let mut table = Vec::with_capacity(m * m);
    for &a in &reps {
        for &b in &reps {
            table.push(proj[group.op(a, b)]);
        }
    }
    let quotient = FiniteAbelianGroup::from_table(m, table).expect("quotient of an abelian group");
    let mut out: Vec<(Elem, u64)> = split_cyclic_summands(&quotient)
        .into_iter()
        .map(|(q, d)| {
            let lift = (0..n)
                .find(|&x| proj[x] == q && orders[x] == d)
                .expect("a maximal-order cyclic subgroup is a direct summand");
            (lift, d)
        })
        .collect();
    out.push((g0, max_order));
    out
}

/// An exact root of unity `exp(2 pi i num / den)` with `0 <= num < den`,
/// `gcd(num, den) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RootOfUnity {
    pub num: u64,
    pub den: u64,
}

impl RootOfUnity {
    pub const ONE: RootOfUnity = RootOfUnity { num: 0, den: 1 };

    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "root of unity with zero denominator");
        let num = num % den;
        let g = num.gcd(&den);
        RootOfUnity {
            num: num / g,
            den: den / g,
        }
    }

    pub fn is_one(&self) -> bool {
        self.num == 0
    }

    /// Exact for quarter turns; `cos`/`sin` otherwise.
    pub fn to_complex(self) -> Complex64 {
        match ((self.num * 4).is_multiple_of(self.den), self.num * 4 / self.den) {
            (true, 0) => Complex64::new(1.0, 0.0),
            (true, 1) => Complex64::new(0.0, 1.0),
            (true, 2) => Complex64::new(-1.0, 0.0),
            (true, 3) => Complex64::new(0.0, -1.0),
            _ => Complex64::from_polar(1.0, TAU * self.num as f64 / self.den as f64),
        }
    }
}

/// Product of roots of unity (sum of angles).
impl std::ops::Mul for RootOfUnity {
    type Output = RootOfUnity;

    fn mul(self, other: RootOfUnity) -> RootOfUnity {
        let den = self.den.lcm(&other.den);
        RootOfUnity::new(self.num * (den / self.den) + other.num * (den / other.den), den)
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e(2pi i {}/{})", self.num, self.den)
    }
}

/// A homomorphism from a presented abelian group to the unit circle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    presentation: Arc<AbelianPresentation>,
    exponents: Vec<u64>,
}

impl Character {
    pub fn new(presentation: &Arc<AbelianPresentation>, exponents: Vec<u64>) -> Self {
        assert_eq!(exponents.len(), presentation.orders.len());
        let exponents = exponents.iter().zip(&presentation.orders).map(|(&c, &d)| c % d).collect();
        Character {
            presentation: Arc::clone(presentation),
            exponents,
        }
    }

    pub fn trivial(presentation: &Arc<AbelianPresentation>) -> Self {
        Self::new(presentation, vec![0; presentation.orders.len()])
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn presentation(&self) -> &Arc<AbelianPresentation> {
        &self.presentation
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&c| c == 0)
    }

    /// Position in [`character_group`] order.
    pub fn index(&self) -> usize {
        let digits: Vec<usize> = self.exponents.iter().map(|&c| c as usize).collect();
        mixed_radix_index(&digits, &self.presentation.radices())
    }

    /// `chi(x)` as an exact angle.
    pub fn evaluate(&self, x: Elem) -> RootOfUnity {
        let e = self.presentation.exponent();
        let coords = self.presentation.coords(x);
        let num = self
            .exponents
            .iter()
            .zip(coords)
            .zip(&self.presentation.orders)
            .fold(0u64, |acc, ((&c, &a), &d)| (acc + (c * a % d) * (e / d)) % e);
        RootOfUnity::new(num, e)
    }

    pub fn value(&self, x: Elem) -> Complex64 {
        self.evaluate(x).to_complex()
    }
}

/// All characters: trivial first, then lexicographic in the exponents.
pub fn character_group(presentation: &Arc<AbelianPresentation>) -> Vec<Character> {
    let radices = presentation.radices();
    let total: usize = radices.iter().product();
    (0..total)
        .map(|idx| {
            let exps = mixed_radix_digits(idx, &radices).into_iter().map(|c| c as u64).collect();
            Character::new(presentation, exps)
        })
        .collect()
}

/// `V^ = Hom((V,+), U(C))` with the action `(r chi)(v) = chi(rv)`.
#[derive(Clone, Debug)]
pub struct DualModule {
    base: FiniteModule,
    presentation: Arc<AbelianPresentation>,
    characters: Vec<Character>,
    module: FiniteModule,
}

impl DualModule {
    pub fn base(&self) -> &FiniteModule {
        &self.base
    }

    pub fn presentation(&self) -> &Arc<AbelianPresentation> {
        &self.presentation
    }

    pub fn characters(&self) -> &[Character] {
        &self.characters
    }

    pub fn character(&self, index: Elem) -> &Character {
        &self.characters[index]
    }

    /// `V^` as an R-module on character indices.
    pub fn module(&self) -> &FiniteModule {
        &self.module
    }

    pub fn size(&self) -> usize {
        self.characters.len()
    }

    /// Checks that `v -> (chi -> chi(v))` separates points of `V`, i.e. that
    /// the canonical map into the double dual is injective.
    pub fn double_dual_is_injective(&self) -> bool {
        let mut seen = HashSet::new();
        self.base.elements().all(|v| {
            let column: Vec<RootOfUnity> = self.characters.iter().map(|chi| chi.evaluate(v)).collect();
            seen.insert(column)
        })
    }
}

pub fn dual_module(base: &FiniteModule) -> DualModule {
    let presentation = Arc::new(invariant_factors(&base.additive_group()));
    let characters = character_group(&presentation);
    let size = characters.len();
    let orders = presentation.orders().to_vec();
    let mut add = Vec::with_capacity(size * size);
    for a in &characters {
        for b in &characters {
            let exps = a.exponents.iter().zip(&b.exponents).map(|(x, y)| x + y).collect();
            add.push(Character::new(&presentation, exps).index());
        }
    }
    let ring = base.ring();
    let mut action = Vec::with_capacity(ring.size() * size);
    for r in ring.elements() {
        for chi in &characters {
            // (r chi)(g_j) = chi(r g_j) determines the exponents of r chi.
            let exps = presentation
                .basis()
                .iter()
                .zip(&orders)
                .map(|(&g, &d)| {
                    let z = chi.evaluate(base.act(r, g));
                    debug_assert_eq!(d % z.den, 0);
                    z.num * (d / z.den)
                })
                .collect();
            action.push(Character::new(&presentation, exps).index());
        }
    }
    let labels = characters
        .iter()
        .map(|c| {
            let parts: Vec<String> = c.exponents.iter().map(u64::to_string).collect();
            format!("chi[{}]", parts.join(","))
        })
        .collect();
    let module = FiniteModule::from_tables_unchecked(ring, size, add, 0, action, Some(labels))
        .expect("dual module tables are well formed");
    DualModule {
        base: base.clone(),
        presentation,
        characters,
        module,
    }
}

/// `{u in units : u chi = chi}` for a character index `chi` of `dual`.
pub fn stabilizer_in_units(dual: &DualModule, chi: Elem, units: &UnitGroup) -> Vec<Elem> {
    units
        .members()
        .iter()
        .copied()
        .filter(|&u| dual.module().act(u, chi) == chi)
        .collect()
}

/// A unit group presented as an abelian group, with its characters.
#[derive(Clone, Debug)]
pub struct UnitCharacters {
    pub units: UnitGroup,
    pub presentation: Arc<AbelianPresentation>,
    pub characters: Vec<Character>,
}

impl UnitCharacters {
    pub fn new(units: UnitGroup) -> Self {
        let ring = units.ring();
        let members = units.members();
        let m = members.len();
        let mut table = Vec::with_capacity(m * m);
        for &a in members {
            for &b in members {
                table.push(units.position(ring.mul(a, b)).expect("units are closed under products"));
            }
        }
        let group = FiniteAbelianGroup::from_table(m, table).expect("unit group of a commutative ring");
        let presentation = Arc::new(invariant_factors(&group));
        let characters = character_group(&presentation);
        UnitCharacters {
            units,
            presentation,
            characters,
        }
    }

    /// `rho(u)` for a ring element `u` that lies in the unit group.
    pub fn evaluate(&self, rho: usize, u: Elem) -> RootOfUnity {
        let pos = self.units.position(u).expect("element is a unit");
        self.characters[rho].evaluate(pos)
    }

    pub fn len(&self) -> usize {
        self.characters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.characters.is_empty()
    }
}

/// A character `chi` of `(R,+)` for which `r -> r chi` is injective, if any.
/// Returned as a character index into the dual of the regular module.
pub fn generating_character(ring: &RingRef) -> Option<(DualModule, Elem)> {
    let regular = crate::module::build_free_module(ring, 1).ok()?;
    let dual = dual_module(&regular);
    let found = (0..dual.size()).find(|&chi| {
        let mut seen = HashSet::new();
        ring.elements().all(|r| seen.insert(dual.module().act(r, chi)))
    })?;
    Some((dual, found))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::{build_free_module, cyclic_submodules, direct_sum};
    use crate::ring::{build_gf, build_product, build_zn, units};

    fn additive(ring: &RingRef) -> FiniteAbelianGroup {
        FiniteAbelianGroup::from_table(ring.size(), ring.add_table().to_vec()).unwrap()
    }

    #[test]
    fn invariant_factor_examples() {
        let z4 = build_zn(4).unwrap();
        assert_eq!(invariant_factors(&additive(&z4)).orders(), &[4]);
        let z2 = build_zn(2).unwrap();
        let z2z2 = build_product(&[z2.clone(), z2.clone()]).unwrap();
        assert_eq!(invariant_factors(&additive(&z2z2)).orders(), &[2, 2]);
        let z2z4 = build_product(&[z2, z4]).unwrap();
        let group = additive(&z2z4);
        // Census: Z/2 x Z/4 has 4 elements of order 4, 3 of order 2.
        let census = |o: u64| (0..8).filter(|&x| group.order_of(x) == o).count();
        assert_eq!((census(4), census(2), census(1)), (4, 3, 1));
        assert_eq!(invariant_factors(&group).orders(), &[2, 4]);
        let trivial = invariant_factors(&additive(&build_zn(1).unwrap()));
        assert!(trivial.orders().is_empty());
        // Z/6 x Z/2 is Z/2 + Z/6.
        let r = build_product(&[build_zn(6).unwrap(), build_zn(2).unwrap()]).unwrap();
        assert_eq!(invariant_factors(&additive(&r)).orders(), &[2, 6]);
    }

    #[test]
    fn presentation_coordinates_are_additive() {
        let r = build_product(&[build_zn(4).unwrap(), build_zn(6).unwrap()]).unwrap();
        let g = additive(&r);
        let p = invariant_factors(&g);
        assert_eq!(p.orders(), &[2, 12]);
        for x in 0..g.size() {
            assert_eq!(p.element_from_coords(p.coords(x)), x);
            for y in 0..g.size() {
                let sum: Vec<u64> = p
                    .coords(x)
                    .iter()
                    .zip(p.coords(y))
                    .zip(p.orders())
                    .map(|((a, b), d)| (a + b) % d)
                    .collect();
                assert_eq!(p.coords(g.op(x, y)), sum.as_slice());
            }
        }
    }

    #[test]
    fn rejects_bad_group_tables() {
        assert_eq!(FiniteAbelianGroup::from_table(2, vec![0, 1, 1]), Err(GroupError::BadShape));
        // Constant table: no identity.
        assert_eq!(FiniteAbelianGroup::from_table(2, vec![0, 0, 0, 0]), Err(GroupError::NoIdentity));
        // Monoid {0,1} under max: identity 0, 1 has no inverse.
        assert_eq!(FiniteAbelianGroup::from_table(2, vec![0, 1, 1, 1]), Err(GroupError::NoInverse(1)));
        // Non-abelian: S3 as permutations of 3 points.
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let mut table = Vec::new();
        for a in &perms {
            for b in &perms {
                table.push(idx([a[b[0]], a[b[1]], a[b[2]]]));
            }
        }
        assert!(matches!(invariant_factors_from_table(6, table), Err(GroupError::NotAbelian(..))));
    }

    #[test]
    fn characters_of_small_groups() {
        let z2 = build_zn(2).unwrap();
        let p = Arc::new(invariant_factors(&additive(&z2)));
        let chars = character_group(&p);
        assert_eq!(chars.len(), 2);
        assert!(chars[0].is_trivial());
        assert_eq!(chars[1].value(1), Complex64::new(-1.0, 0.0));

        let z4 = build_zn(4).unwrap();
        let p = Arc::new(invariant_factors(&additive(&z4)));
        let chars = character_group(&p);
        assert_eq!(chars.len(), 4);
        // exponent (1) is m -> i^m
        assert_eq!(chars[1].value(1), Complex64::new(0.0, 1.0));
        assert_eq!(chars[1].value(2), Complex64::new(-1.0, 0.0));
        assert_eq!(chars[0].evaluate(3), RootOfUnity::ONE);

        let z6 = build_zn(6).unwrap();
        let p = Arc::new(invariant_factors(&additive(&z6)));
        let chi = Character::new(&p, vec![1]);
        assert_eq!(chi.evaluate(3), RootOfUnity::new(1, 2));
        assert_eq!(chi.value(3), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn characters_of_klein_group_are_sign_patterns() {
        let z2 = build_zn(2).unwrap();
        let plane = build_free_module(&z2, 2).unwrap();
        let p = Arc::new(invariant_factors(&plane.additive_group()));
        let chars = character_group(&p);
        // Brute force: every map V -> {+1,-1} that is a homomorphism.
        let mut homs = HashSet::new();
        for signs in 0..16u32 {
            let f = |v: usize| (signs >> v) & 1;
            let is_hom = (0..4).all(|a| (0..4).all(|b| f(plane.add(a, b)) == (f(a) ^ f(b))));
            if is_hom {
                homs.insert((0..4).map(f).collect::<Vec<_>>());
            }
        }
        let ours: HashSet<Vec<u32>> = chars
            .iter()
            .map(|c| (0..4).map(|v| u32::from(!c.evaluate(v).is_one())).collect())
            .collect();
        assert_eq!(ours, homs);
    }

    #[test]
    fn orthogonality_and_double_dual() {
        let z4 = build_zn(4).unwrap();
        let v = direct_sum(&[build_free_module(&z4, 1).unwrap(), build_free_module(&build_zn(4).unwrap(), 1).unwrap()]);
        let v = v.unwrap_or_else(|_| build_free_module(&z4, 2).unwrap());
        let dual = dual_module(&v);
        assert_eq!(dual.size(), v.size());
        for chi in dual.characters() {
            let s: Complex64 = v.elements().map(|x| chi.value(x)).sum();
            let expected = if chi.is_trivial() { v.size() as f64 } else { 0.0 };
            assert!((s - expected).norm() < 1e-9);
        }
        assert!(dual.double_dual_is_injective());
        dual.module().check_axioms().unwrap();
    }

    #[test]
    fn dual_module_examples() {
        let z4 = build_zn(4).unwrap();
        let v = build_free_module(&z4, 1).unwrap();
        let dual = dual_module(&v);
        assert_eq!(cyclic_submodules(dual.module()).len(), 3);

        let plane = build_free_module(&build_zn(2).unwrap(), 2).unwrap();
        let dual = dual_module(&plane);
        for chi in 0..4 {
            assert_eq!(dual.module().act(0, chi), 0);
        }

        let z6 = build_zn(6).unwrap();
        let dual = dual_module(&build_free_module(&z6, 1).unwrap());
        // r -> r chi_1 is an isomorphism R -> R^ for Z/n.
        let images: HashSet<Elem> = z6.elements().map(|r| dual.module().act(r, 1)).collect();
        assert_eq!(images.len(), 6);
        // and intertwines the actions
        for r in z6.elements() {
            for s in z6.elements() {
                assert_eq!(dual.module().act(r, dual.module().act(s, 1)), dual.module().act(z6.mul(r, s), 1));
            }
        }
    }

    #[test]
    fn stabilizers() {
        let z4 = build_zn(4).unwrap();
        let dual = dual_module(&build_free_module(&z4, 1).unwrap());
        let u = units(&z4);
        assert_eq!(stabilizer_in_units(&dual, 0, &u), vec![1, 3]);
        assert_eq!(stabilizer_in_units(&dual, 1, &u), vec![1]);

        let z12 = build_zn(12).unwrap();
        let dual = dual_module(&build_free_module(&z12, 1).unwrap());
        let order_two = 6; // exponent 6 of 12: the sign character
        let u = units(&z12);
        assert_eq!(stabilizer_in_units(&dual, order_two, &u).len(), u.len());
    }

    #[test]
    fn unit_group_characters() {
        let z12 = build_zn(12).unwrap();
        let uc = UnitCharacters::new(units(&z12));
        assert_eq!(uc.presentation.orders(), &[2, 2]);
        assert_eq!(uc.len(), 4);
        let z9 = build_zn(9).unwrap();
        let uc = UnitCharacters::new(units(&z9));
        assert_eq!(uc.presentation.orders(), &[6]);
        let gf9 = build_gf(3, 2, &[1, 0, 1]).unwrap();
        assert_eq!(UnitCharacters::new(units(&gf9)).presentation.orders(), &[8]);
    }

    #[test]
    fn generating_characters() {
        let z5 = build_zn(5).unwrap();
        let (dual, chi) = generating_character(&z5).unwrap();
        assert_eq!(dual.character(chi).exponents(), &[1]);
        let gf4 = build_gf(2, 2, &[1, 1, 1]).unwrap();
        let (dual, chi) = generating_character(&gf4).unwrap();
        assert!(!dual.character(chi).is_trivial());
        // Z/2 x Z/2 with the product ring structure is Frobenius (a product of fields).
        let z2 = build_zn(2).unwrap();
        assert!(generating_character(&build_product(&[z2.clone(), z2]).unwrap()).is_some());
    }

    #[test]
    fn roots_of_unity() {
        assert_eq!(RootOfUnity::new(6, 8), RootOfUnity::new(3, 4));
        assert_eq!(RootOfUnity::new(3, 4).to_complex(), Complex64::new(0.0, -1.0));
        assert_eq!(RootOfUnity::new(1, 3) * RootOfUnity::new(2, 3), RootOfUnity::ONE);
        let z = RootOfUnity::new(1, 6).to_complex();
        assert!((z - Complex64::new(0.5, 3f64.sqrt() / 2.0)).norm() < 1e-15);
        assert!((z.norm() - 1.0).abs() < 1e-15);
    }
}
