//! Finite modules over finite commutative rings.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::characters::FiniteAbelianGroup;
use crate::ring::{
    idempotents, mixed_radix_digits, mixed_radix_index, quotient_ring, units, Elem, Ideal, RingError, RingRef,
};

const EXHAUSTIVE_ACTION_LIMIT: usize = 4096;
const RANDOM_ACTION_CHECKS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModuleError {
    #[error("modules are over different rings")]
    RingMismatch,
    #[error("direct sum of an empty list")]
    EmptySum,
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("invalid module table: {0}")]
    InvalidTable(String),
    #[error(transparent)]
    Ring(#[from] RingError),
}

#[derive(Clone, Debug)]
pub struct FiniteModule {
    ring: RingRef,
    size: usize,
    add: Vec<Elem>,
    neg: Vec<Elem>,
    zero: Elem,
    /// Row `r` holds `r * v` for every `v`.
    action: Vec<Elem>,
    labels: Vec<String>,
}

impl FiniteModule {
    /// Builds a module from raw tables, checking the group and module axioms.
    pub fn from_tables(
        ring: &RingRef,
        size: usize,
        add: Vec<Elem>,
        zero: Elem,
        action: Vec<Elem>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, ModuleError> {
        let m = Self::from_tables_unchecked(ring, size, add, zero, action, labels)?;
        m.check_axioms()?;
        Ok(m)
    }

    pub(crate) fn from_tables_unchecked(
        ring: &RingRef,
        size: usize,
        add: Vec<Elem>,
        zero: Elem,
        action: Vec<Elem>,
        labels: Option<Vec<String>>,
    ) -> Result<Self, ModuleError> {
        let bad = |msg: &str| Err(ModuleError::InvalidTable(msg.into()));
        if size == 0 {
            return bad("empty element set");
        }
        if add.len() != size * size || action.len() != ring.size() * size {
            return bad("table dimensions do not match");
        }
        if add.iter().chain(&action).any(|&x| x >= size) || zero >= size {
            return bad("entry out of range");
        }
        let mut neg = vec![0; size];
        for (a, slot) in neg.iter_mut().enumerate() {
            match (0..size).find(|&b| add[a * size + b] == zero) {
                Some(b) => *slot = b,
                None => return bad("missing additive inverse"),
            }
        }
        let labels = match labels {
            Some(l) if l.len() == size => l,
            Some(_) => return bad("label count mismatch"),
            None => (0..size).map(|i| i.to_string()).collect(),
        };
        Ok(FiniteModule {
            ring: Arc::clone(ring),
            size,
            add,
            neg,
            zero,
            action,
            labels,
        })
    }

    /// `(V, +)` abelian and `1v = v`, `(r+s)v = rv+sv`, `r(v+w) = rv+rw`,
    /// `(rs)v = r(sv)`. Exhaustive when `|R||V| <= 4096`, sampled above.
    pub fn check_axioms(&self) -> Result<(), ModuleError> {
        FiniteAbelianGroup::from_table(self.size, self.add.clone())
            .map_err(|e| ModuleError::InvalidTable(e.to_string()))?;
        let ring = &self.ring;
        let fail = |r: Elem, s: Elem, v: Elem, w: Elem| {
            Err(ModuleError::InvalidTable(format!(
                "module axiom fails at r={r}, s={s}, v={v}, w={w}"
            )))
        };
        let scalar_laws = |r: Elem, s: Elem, v: Elem| {
            self.act(ring.one(), v) == v
                && self.act(ring.add(r, s), v) == self.add(self.act(r, v), self.act(s, v))
                && self.act(ring.mul(r, s), v) == self.act(r, self.act(s, v))
        };
        let vector_law = |r: Elem, v: Elem, w: Elem| {
            self.act(r, self.add(v, w)) == self.add(self.act(r, v), self.act(r, w))
        };
        if ring.size() * self.size <= EXHAUSTIVE_ACTION_LIMIT {
            for r in ring.elements() {
                for v in 0..self.size {
                    for s in ring.elements() {
                        if !scalar_laws(r, s, v) {
                            return fail(r, s, v, 0);
                        }
                    }
                    for w in 0..self.size {
                        if !vector_law(r, v, w) {
                            return fail(r, 0, v, w);
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0xacc);
            for _ in 0..RANDOM_ACTION_CHECKS {
                let r = rng.gen_range(0..ring.size());
                let s = rng.gen_range(0..ring.size());
                let v = rng.gen_range(0..self.size);
                let w = rng.gen_range(0..self.size);
                if !scalar_laws(r, s, v) || !vector_law(r, v, w) {
                    return fail(r, s, v, w);
                }
            }
        }
        Ok(())
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn zero(&self) -> Elem {
        self.zero
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.size
    }

    #[inline]
    pub fn add(&self, v: Elem, w: Elem) -> Elem {
        self.add[v * self.size + w]
    }

    #[inline]
    pub fn neg(&self, v: Elem) -> Elem {
        self.neg[v]
    }

    /// Scalar multiplication `r * v`.
    #[inline]
    pub fn act(&self, r: Elem, v: Elem) -> Elem {
        self.action[r * self.size + v]
    }

    pub fn add_table(&self) -> &[Elem] {
        &self.add
    }

    pub fn action_table(&self) -> &[Elem] {
        &self.action
    }

    pub fn label(&self, v: Elem) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn additive_group(&self) -> FiniteAbelianGroup {
        FiniteAbelianGroup::from_table(self.size, self.add.clone()).expect("module tables form an abelian group")
    }

    /// True when this is the regular module `R` acting on itself.
    pub fn is_regular(&self) -> bool {
        self.size == self.ring.size()
            && self.zero == self.ring.zero()
            && self.add == self.ring.add_table()
            && self.action == self.ring.mul_table()
    }

    /// Same ring and identical tables.
    pub fn same_structure(&self, other: &FiniteModule) -> bool {
        *self.ring == *other.ring && self.size == other.size && self.add == other.add && self.action == other.action
    }

    /// `Rv`, sorted.
    pub fn cyclic_span(&self, v: Elem) -> Vec<Elem> {
        let mut span: Vec<Elem> = self.ring.elements().map(|r| self.act(r, v)).collect();
        span.sort_unstable();
        span.dedup();
        span
    }
}

/// `R^d`, elements in mixed radix with the last coordinate varying fastest.
pub fn build_free_module(ring: &RingRef, d: usize) -> Result<FiniteModule, ModuleError> {
    if d == 0 {
        return Err(ModuleError::ZeroRank);
    }
    let radices = vec![ring.size(); d];
    let size = ring.size().pow(d as u32);
    let tuples: Vec<Vec<usize>> = (0..size).map(|x| mixed_radix_digits(x, &radices)).collect();
    let mut add = Vec::with_capacity(size * size);
    for a in &tuples {
        for b in &tuples {
            let s: Vec<usize> = a.iter().zip(b).map(|(&x, &y)| ring.add(x, y)).collect();
            add.push(mixed_radix_index(&s, &radices));
        }
    }
    let mut action = Vec::with_capacity(ring.size() * size);
    for r in ring.elements() {
        for t in &tuples {
            let s: Vec<usize> = t.iter().map(|&x| ring.mul(r, x)).collect();
            action.push(mixed_radix_index(&s, &radices));
        }
    }
    let labels = if d == 1 {
        ring.labels().to_vec()
    } else {
        tuples
            .iter()
            .map(|t| {
                let parts: Vec<&str> = t.iter().map(|&x| ring.label(x)).collect();
                format!("({})", parts.join(","))
            })
            .collect()
    };
    let zero = mixed_radix_index(&vec![ring.zero(); d], &radices);
    FiniteModule::from_tables_unchecked(ring, size, add, zero, action, Some(labels))
}

/// The cyclic module `R/I`.
pub fn build_cyclic_module(ring: &RingRef, ideal: &Ideal) -> Result<FiniteModule, ModuleError> {
    let q = quotient_ring(ring, ideal)?;
    let size = q.ring.size();
    let add = q.ring.add_table().to_vec();
    let mut action = Vec::with_capacity(ring.size() * size);
    for r in ring.elements() {
        let rq = q.project(r);
        for c in 0..size {
            action.push(q.ring.mul(rq, c));
        }
    }
    FiniteModule::from_tables_unchecked(ring, size, add, q.ring.zero(), action, Some(q.ring.labels().to_vec()))
}

/// Direct sum, mixed radix with the last summand varying fastest.
pub fn direct_sum(modules: &[FiniteModule]) -> Result<FiniteModule, ModuleError> {
    let first = modules.first().ok_or(ModuleError::EmptySum)?;
    if modules.iter().any(|m| *m.ring != *first.ring) {
        return Err(ModuleError::RingMismatch);
    }
    if modules.len() == 1 {
        return Ok(first.clone());
    }
    let ring = &first.ring;
    let radices: Vec<usize> = modules.iter().map(|m| m.size).collect();
    let size: usize = radices.iter().product();
    let tuples: Vec<Vec<usize>> = (0..size).map(|x| mixed_radix_digits(x, &radices)).collect();
    let mut add = Vec::with_capacity(size * size);
    for a in &tuples {
        for b in &tuples {
            let s: Vec<usize> = modules.iter().enumerate().map(|(i, m)| m.add(a[i], b[i])).collect();
            add.push(mixed_radix_index(&s, &radices));
        }
    }
    let mut action = Vec::with_capacity(ring.size() * size);
    for r in ring.elements() {
        for t in &tuples {
            let s: Vec<usize> = modules.iter().enumerate().map(|(i, m)| m.act(r, t[i])).collect();
            action.push(mixed_radix_index(&s, &radices));
        }
    }
    let labels = tuples
        .iter()
        .map(|t| {
            let parts: Vec<&str> = t.iter().enumerate().map(|(i, &x)| modules[i].label(x)).collect();
            format!("({})", parts.join(","))
        })
        .collect();
    let zero: Vec<usize> = modules.iter().map(|m| m.zero).collect();
    FiniteModule::from_tables_unchecked(ring, size, add, mixed_radix_index(&zero, &radices), action, Some(labels))
}

/// `ann(v) = {a : av = 0}`.
pub fn annihilator_of(module: &FiniteModule, v: Elem) -> Ideal {
    let members: Vec<Elem> = module
        .ring
        .elements()
        .filter(|&a| module.act(a, v) == module.zero)
        .collect();
    Ideal::from_sorted_unchecked(&module.ring, members)
}

/// A cyclic submodule `Rg` with its canonical (least) generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicSubmodule {
    pub generator: Elem,
    pub members: Vec<Elem>,
    pub annihilator: Ideal,
}

impl CyclicSubmodule {
    pub fn is_zero(&self) -> bool {
        self.members.len() == 1
    }
}

/// Every distinct `Rv`, sorted by `(size, generator)`.
pub fn cyclic_submodules(module: &FiniteModule) -> Vec<CyclicSubmodule> {
    let mut seen: HashMap<Vec<Elem>, Elem> = HashMap::new();
    let mut out = Vec::new();
    for v in module.elements() {
        let span = module.cyclic_span(v);
        if seen.contains_key(&span) {
            continue;
        }
        seen.insert(span.clone(), v);
        out.push(CyclicSubmodule {
            generator: v,
            members: span,
            annihilator: annihilator_of(module, v),
        });
    }
    out.sort_by_key(|w| (w.members.len(), w.generator));
    out
}

/// `U(R) v`, sorted.
pub fn associates_orbit(module: &FiniteModule, v: Elem) -> Vec<Elem> {
    let mut orbit: Vec<Elem> = units(&module.ring)
        .members()
        .iter()
        .map(|&u| module.act(u, v))
        .collect();
    orbit.sort_unstable();
    orbit.dedup();
    orbit
}

/// Exhaustively checks `Rv = Rw  <=>  U(R)v = U(R)w` over all pairs.
pub fn check_cyclic_equals_unit_orbit(module: &FiniteModule) -> bool {
    let spans: Vec<Vec<Elem>> = module.elements().map(|v| module.cyclic_span(v)).collect();
    let orbits: Vec<Vec<Elem>> = module.elements().map(|v| associates_orbit(module, v)).collect();
    for v in module.elements() {
        for w in module.elements() {
            if (spans[v] == spans[w]) != (orbits[v] == orbits[w]) {
                return false;
            }
        }
    }
    true
}

/// The least idempotent `e` (in the order `e <= f` iff `ef = e`) with
/// `ev = v`: the product of every idempotent fixing `v`.
pub fn minimal_fixing_idempotent(module: &FiniteModule, v: Elem) -> Elem {
    let ring = &module.ring;
    idempotents(ring)
        .into_iter()
        .filter(|&e| module.act(e, v) == v)
        .fold(ring.one(), |acc, e| ring.mul(acc, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{build_gf, build_zn, principal_ideal};

    #[test]
    fn free_module_ordering() {
        let z2 = build_zn(2).unwrap();
        let v = build_free_module(&z2, 2).unwrap();
        assert_eq!(v.size(), 4);
        assert_eq!(v.labels(), &["(0,0)", "(0,1)", "(1,0)", "(1,1)"]);
        // (0,1) + (1,0) = (1,1)
        assert_eq!(v.add(1, 2), 3);

        let z4 = build_zn(4).unwrap();
        assert!(build_free_module(&z4, 1).unwrap().is_regular());

        let z3 = build_zn(3).unwrap();
        let v = build_free_module(&z3, 2).unwrap();
        assert_eq!(v.size(), 9);
        for r in 0..3 {
            for x in 0..9 {
                let (a, b) = (x / 3, x % 3);
                assert_eq!(v.act(r, x), (r * a % 3) * 3 + r * b % 3);
            }
        }
        v.check_axioms().unwrap();
        assert_eq!(build_free_module(&z3, 0).unwrap_err(), ModuleError::ZeroRank);
    }

    #[test]
    fn cyclic_modules() {
        let z4 = build_zn(4).unwrap();
        let m = build_cyclic_module(&z4, &Ideal::new(&z4, [0, 2]).unwrap()).unwrap();
        assert_eq!(m.size(), 2);
        m.check_axioms().unwrap();

        let z6 = build_zn(6).unwrap();
        let m = build_cyclic_module(&z6, &Ideal::new(&z6, [0, 3]).unwrap()).unwrap();
        assert_eq!(m.size(), 3);
        let z3 = build_zn(3).unwrap();
        assert_eq!(m.add_table(), z3.add_table());

        let regular = build_cyclic_module(&z6, &Ideal::zero(&z6)).unwrap();
        assert!(regular.is_regular());
    }

    #[test]
    fn direct_sums() {
        let z2 = build_zn(2).unwrap();
        let a = build_free_module(&z2, 1).unwrap();
        let sum = direct_sum(&[a.clone(), a.clone()]).unwrap();
        assert!(sum.same_structure(&build_free_module(&z2, 2).unwrap()));

        let z4 = build_zn(4).unwrap();
        let quotient = build_cyclic_module(&z4, &principal_ideal(&z4, 2)).unwrap();
        let regular = build_free_module(&z4, 1).unwrap();
        let mixed = direct_sum(&[quotient, regular.clone()]).unwrap();
        assert_eq!(mixed.size(), 8);
        mixed.check_axioms().unwrap();

        assert!(direct_sum(std::slice::from_ref(&regular)).unwrap().same_structure(&regular));
        assert_eq!(direct_sum(&[regular, a]).unwrap_err(), ModuleError::RingMismatch);
        assert_eq!(direct_sum(&[]).unwrap_err(), ModuleError::EmptySum);
    }

    #[test]
    fn annihilators() {
        let z4 = build_free_module(&build_zn(4).unwrap(), 1).unwrap();
        assert_eq!(annihilator_of(&z4, 2).members(), &[0, 2]);
        assert!(annihilator_of(&z4, 0).is_whole());
        let z12 = build_free_module(&build_zn(12).unwrap(), 1).unwrap();
        assert_eq!(annihilator_of(&z12, 4).members(), &[0, 3, 6, 9]);
    }

    #[test]
    fn cyclic_submodule_enumeration() {
        let z4 = build_free_module(&build_zn(4).unwrap(), 1).unwrap();
        let subs = cyclic_submodules(&z4);
        let members: Vec<&[Elem]> = subs.iter().map(|w| w.members.as_slice()).collect();
        assert_eq!(members, vec![&[0][..], &[0, 2], &[0, 1, 2, 3]]);

        let plane = build_free_module(&build_zn(2).unwrap(), 2).unwrap();
        let subs = cyclic_submodules(&plane);
        let members: Vec<&[Elem]> = subs.iter().map(|w| w.members.as_slice()).collect();
        assert_eq!(members, vec![&[0][..], &[0, 1], &[0, 2], &[0, 3]]);

        let z6 = build_free_module(&build_zn(6).unwrap(), 1).unwrap();
        assert_eq!(cyclic_submodules(&z6).len(), 4);
    }

    #[test]
    fn associates() {
        let z4 = build_free_module(&build_zn(4).unwrap(), 1).unwrap();
        assert_eq!(associates_orbit(&z4, 1), vec![1, 3]);
        assert_eq!(associates_orbit(&z4, 0), vec![0]);
        let z12 = build_free_module(&build_zn(12).unwrap(), 1).unwrap();
        assert_eq!(associates_orbit(&z12, 2), vec![2, 10]);
    }

    #[test]
    fn cyclic_sub_oracle_examples() {
        let z2 = build_zn(2).unwrap();
        assert!(check_cyclic_equals_unit_orbit(&build_free_module(&z2, 2).unwrap()));
        assert!(check_cyclic_equals_unit_orbit(&build_free_module(&build_zn(12).unwrap(), 1).unwrap()));
        let z4 = build_zn(4).unwrap();
        let v = direct_sum(&[
            build_free_module(&z4, 1).unwrap(),
            build_cyclic_module(&z4, &principal_ideal(&z4, 2)).unwrap(),
        ])
        .unwrap();
        assert!(check_cyclic_equals_unit_orbit(&v));
    }

    #[test]
    fn minimal_idempotents() {
        let z6 = build_free_module(&build_zn(6).unwrap(), 1).unwrap();
        assert_eq!(minimal_fixing_idempotent(&z6, 2), 4);
        assert_eq!(minimal_fixing_idempotent(&z6, 0), 0);
        let gf4 = build_free_module(&build_gf(2, 2, &[1, 1, 1]).unwrap(), 2).unwrap();
        for v in 1..gf4.size() {
            assert_eq!(minimal_fixing_idempotent(&gf4, v), 1);
        }
    }

    #[test]
    fn rejects_bad_tables() {
        let z2 = build_zn(2).unwrap();
        // Action that ignores the scalar breaks 0 * v = 0 via distributivity.
        let err = FiniteModule::from_tables(&z2, 2, vec![0, 1, 1, 0], 0, vec![0, 1, 0, 1], None);
        assert!(err.is_err());
        let ok = FiniteModule::from_tables(&z2, 2, vec![0, 1, 1, 0], 0, vec![0, 0, 0, 1], None);
        assert!(ok.is_ok());
    }
}
