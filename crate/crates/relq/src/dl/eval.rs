//! Denotation evaluation for concepts, roles, and distance features.

#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use super::{Concept, Feature, FeatureKind, Role};
use crate::relational::{Domain, ObjectUniverse, RelationalState};
use crate::{Error, Result};

/// What a feature evaluates to on one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Denotation {
    /// Concept features: the satisfying objects.
    Objects(BTreeSet<String>),
    /// Distance features: a step count in `0..=|O|`, where `|O|` is the
    /// unreachable sentinel.
    Steps(usize),
}

/// A state compiled into bitset form for fast repeated evaluation.
///
/// Unary predicates become object bitsets; binary predicates become forward
/// and backward adjacency rows. Objects are identified by their universe
/// index.
pub struct Interpretation {
    n: usize,
    unary: HashMap<String, FixedBitSet>,
    binary: HashMap<String, Adjacency>,
}

struct Adjacency {
    fwd: Vec<FixedBitSet>,
    bwd: Vec<FixedBitSet>,
}

impl Interpretation {
    pub fn build(
        domain: &Domain,
        universe: &ObjectUniverse,
        state: &RelationalState,
    ) -> Interpretation {
        let n = universe.len();
        let mut unary: HashMap<String, FixedBitSet> = domain
            .unary_predicates()
            .map(|p| (p.to_string(), FixedBitSet::with_capacity(n)))
            .collect();
        let mut binary: HashMap<String, Adjacency> = domain
            .binary_predicates()
            .map(|p| {
                (p.to_string(), Adjacency {
                    fwd: vec![FixedBitSet::with_capacity(n); n],
                    bwd: vec![FixedBitSet::with_capacity(n); n],
                })
            })
            .collect();
        for fact in state.facts() {
            match fact.args.len() {
                1 => {
                    if let (Some(bits), Some(i)) =
                        (unary.get_mut(&fact.predicate), universe.index_of(&fact.args[0]))
                    {
                        bits.insert(i);
                    }
                }
                2 => {
                    if let (Some(adj), Some(x), Some(y)) = (
                        binary.get_mut(&fact.predicate),
                        universe.index_of(&fact.args[0]),
                        universe.index_of(&fact.args[1]),
                    ) {
                        adj.fwd[x].insert(y);
                        adj.bwd[y].insert(x);
                    }
                }
                _ => {}
            }
        }
        Interpretation { n, unary, binary }
    }

    pub fn num_objects(&self) -> usize {
        self.n
    }

    fn role_rows(&self, role: &Role) -> Result<&[FixedBitSet]> {
        let adj = self.binary.get(role.predicate()).ok_or_else(|| {
            Error::validation(format!("unknown binary predicate '{}'", role.predicate()))
        })?;
        Ok(match role {
            Role::Primitive(_) => &adj.fwd,
            Role::Inverse(_) => &adj.bwd,
        })
    }

    fn full(&self) -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(self.n);
        bits.insert_range(..);
        bits
    }

    /// Denotation of a concept, as a bitset over universe indices.
    pub fn concept_bits(&self, concept: &Concept) -> Result<FixedBitSet> {
        match concept {
            Concept::Primitive(p) => self.unary.get(p).cloned().ok_or_else(|| {
                Error::validation(format!("unknown unary predicate '{p}'"))
            }),
            Concept::Top => Ok(self.full()),
            Concept::Not(c) => {
                let mut bits = self.concept_bits(c)?;
                bits.toggle_range(..);
                Ok(bits)
            }
            Concept::And(a, b) => {
                let mut bits = self.concept_bits(a)?;
                bits.intersect_with(&self.concept_bits(b)?);
                Ok(bits)
            }
            Concept::Forall(r, c) => {
                // {x | for all y: R(x,y) and C(y)}: x must relate to every
                // object and every object must satisfy C.
                let rows = self.role_rows(r)?;
                let c_bits = self.concept_bits(c)?;
                let mut bits = FixedBitSet::with_capacity(self.n);
                for x in 0..self.n {
                    let ok = (0..self.n).all(|y| rows[x].contains(y) && c_bits.contains(y));
                    if ok {
                        bits.insert(x);
                    }
                }
                Ok(bits)
            }
            Concept::Exists(r, c) => {
                let rows = self.role_rows(r)?;
                let c_bits = self.concept_bits(c)?;
                let mut bits = FixedBitSet::with_capacity(self.n);
                for x in 0..self.n {
                    if !rows[x].is_disjoint(&c_bits) {
                        bits.insert(x);
                    }
                }
                Ok(bits)
            }
            Concept::RoleEq(a, b) => {
                let rows_a = self.role_rows(a)?;
                let rows_b = self.role_rows(b)?;
                let mut bits = FixedBitSet::with_capacity(self.n);
                for x in 0..self.n {
                    if rows_a[x] == rows_b[x] {
                        bits.insert(x);
                    }
                }
                Ok(bits)
            }
        }
    }

    /// Minimum number of role steps from an object in `from` to an object
    /// in `to`, following directed role edges. `|O|` when either set is
    /// empty or no path exists; `0` when the sets intersect.
    pub fn distance_bits(
        &self,
        from: &FixedBitSet,
        role: &Role,
        to: &FixedBitSet,
    ) -> Result<usize> {
        let sentinel = self.n;
        if from.is_clear() || to.is_clear() {
            return Ok(sentinel);
        }
        let rows = self.role_rows(role)?;
        // multi-source BFS
        let mut visited = from.clone();
        let mut frontier: VecDeque<(usize, usize)> =
            from.ones().map(|x| (x, 0)).collect();
        while let Some((x, d)) = frontier.pop_front() {
            if to.contains(x) {
                return Ok(d);
            }
            for y in rows[x].ones() {
                if !visited.contains(y) {
                    visited.insert(y);
                    frontier.push_back((y, d + 1));
                }
            }
        }
        Ok(sentinel)
    }

    /// Numeric value of a feature: denotation cardinality for concepts,
    /// step count for distances.
    pub fn feature_value(&self, feature: &Feature) -> Result<usize> {
        match &feature.kind {
            FeatureKind::Concept(c) => Ok(self.concept_bits(c)?.count_ones(..)),
            FeatureKind::Distance(c1, r, c2) => {
                let from = self.concept_bits(c1)?;
                let to = self.concept_bits(c2)?;
                self.distance_bits(&from, r, &to)
            }
        }
    }

    fn names(&self, bits: &FixedBitSet, universe: &ObjectUniverse) -> BTreeSet<String> {
        bits.ones().map(|i| universe.objects()[i].clone()).collect()
    }
}

/// Set of objects satisfying the concept in the state.
pub fn eval_concept(
    concept: &Concept,
    state: &RelationalState,
    universe: &ObjectUniverse,
    domain: &Domain,
) -> Result<BTreeSet<String>> {
    let interp = Interpretation::build(domain, universe, state);
    let bits = interp.concept_bits(concept)?;
    Ok(interp.names(&bits, universe))
}

/// Minimum number of `role` steps between an object satisfying `c1` and one
/// satisfying `c2`; `|O|` when unreachable or either denotation is empty.
pub fn eval_distance(
    c1: &Concept,
    role: &Role,
    c2: &Concept,
    state: &RelationalState,
    universe: &ObjectUniverse,
    domain: &Domain,
) -> Result<usize> {
    let interp = Interpretation::build(domain, universe, state);
    let from = interp.concept_bits(c1)?;
    let to = interp.concept_bits(c2)?;
    interp.distance_bits(&from, role, &to)
}

/// Numeric feature value on a state.
pub fn feature_value(
    feature: &Feature,
    state: &RelationalState,
    universe: &ObjectUniverse,
    domain: &Domain,
) -> Result<usize> {
    Interpretation::build(domain, universe, state).feature_value(feature)
}

/// Full denotation of a feature: the satisfying objects for concept
/// features, the step count for distance features.
pub fn denotation(
    feature: &Feature,
    state: &RelationalState,
    universe: &ObjectUniverse,
    domain: &Domain,
) -> Result<Denotation> {
    let interp = Interpretation::build(domain, universe, state);
    match &feature.kind {
        FeatureKind::Concept(c) => {
            let bits = interp.concept_bits(c)?;
            Ok(Denotation::Objects(interp.names(&bits, universe)))
        }
        FeatureKind::Distance(..) => Ok(Denotation::Steps(interp.feature_value(feature)?)),
    }
}

/// 1 iff the feature is a concept feature and the object is in its
/// denotation. Distance features never have members.
pub fn object_membership(
    feature: &Feature,
    object: &str,
    state: &RelationalState,
    universe: &ObjectUniverse,
    domain: &Domain,
) -> Result<u8> {
    let idx = universe
        .index_of(object)
        .ok_or_else(|| Error::validation(format!("object '{object}' not declared")))?;
    match &feature.kind {
        FeatureKind::Distance(..) => Ok(0),
        FeatureKind::Concept(c) => {
            let interp = Interpretation::build(domain, universe, state);
            Ok(interp.concept_bits(c)?.contains(idx) as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relational::{ActionSchema, GroundFact, Predicate};

    fn sysadmin() -> (Domain, ObjectUniverse, RelationalState) {
        let domain = Domain::new(
            "sysadmin",
            vec![
                Predicate { name: "running".into(), arity: 1 },
                Predicate { name: "link".into(), arity: 2 },
            ],
            vec![ActionSchema { name: "reboot".into(), arity: 1 }],
        )
        .unwrap();
        let universe = ObjectUniverse::new(vec!["c0".into(), "c1".into()]).unwrap();
        let state = RelationalState::new([
            GroundFact::new("running", &["c0"]),
            GroundFact::new("link", &["c0", "c1"]),
            GroundFact::new("link", &["c1", "c0"]),
        ]);
        (domain, universe, state)
    }

    fn set(names: &[&str]) -> BTreeSet<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn primitive_denotation() {
        let (d, u, s) = sysadmin();
        let up = Concept::primitive("running");
        assert_eq!(eval_concept(&up, &s, &u, &d).unwrap(), set(&["c0"]));
    }

    #[test]
    fn not_is_complement() {
        let (d, u, s) = sysadmin();
        let down = Concept::not(Concept::primitive("running"));
        assert_eq!(eval_concept(&down, &s, &u, &d).unwrap(), set(&["c1"]));
    }

    #[test]
    fn exists_link_running() {
        let (d, u, s) = sysadmin();
        // c1 links to the running c0; c0 links only to the down c1
        let c = Concept::exists(Role::primitive("link"), Concept::primitive("running"));
        assert_eq!(eval_concept(&c, &s, &u, &d).unwrap(), set(&["c1"]));
    }

    #[test]
    fn forall_requires_edges_to_all_objects() {
        let (d, u, s) = sysadmin();
        // nothing links to every object (no self-links), so forall is empty
        // even with top as the filler
        let c = Concept::forall(Role::primitive("link"), Concept::Top);
        assert_eq!(eval_concept(&c, &s, &u, &d).unwrap(), set(&[]));
    }

    #[test]
    fn role_eq_over_full_universe() {
        let (d, u, s) = sysadmin();
        // the link relation here is symmetric, so link and inv(link) have
        // equal rows everywhere
        let c = Concept::role_eq(
            Role::primitive("link"),
            Role::inverse(Role::primitive("link")),
        );
        assert_eq!(eval_concept(&c, &s, &u, &d).unwrap(), set(&["c0", "c1"]));
    }

    #[test]
    fn unknown_predicate_is_an_error() {
        let (d, u, s) = sysadmin();
        assert!(eval_concept(&Concept::primitive("nosuch"), &s, &u, &d).is_err());
        assert!(
            eval_concept(
                &Concept::exists(Role::primitive("nosuch"), Concept::Top),
                &s,
                &u,
                &d
            )
            .is_err()
        );
    }

    fn chain() -> (Domain, ObjectUniverse, RelationalState) {
        let domain = Domain::new(
            "chain",
            vec![
                Predicate { name: "mark".into(), arity: 1 },
                Predicate { name: "goal".into(), arity: 1 },
                Predicate { name: "link".into(), arity: 2 },
            ],
            vec![],
        )
        .unwrap();
        let universe =
            ObjectUniverse::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let state = RelationalState::new([
            GroundFact::new("mark", &["a"]),
            GroundFact::new("goal", &["c"]),
            GroundFact::new("link", &["a", "b"]),
            GroundFact::new("link", &["b", "c"]),
        ]);
        (domain, universe, state)
    }

    #[test]
    fn distance_on_chain() {
        let (d, u, s) = chain();
        let link = Role::primitive("link");
        let dist = eval_distance(
            &Concept::primitive("mark"),
            &link,
            &Concept::primitive("goal"),
            &s,
            &u,
            &d,
        )
        .unwrap();
        assert_eq!(dist, 2);

        // intersecting denotations: distance zero
        let zero = eval_distance(
            &Concept::primitive("mark"),
            &link,
            &Concept::primitive("mark"),
            &s,
            &u,
            &d,
        )
        .unwrap();
        assert_eq!(zero, 0);

        // empty start set: sentinel |O|
        let empty = eval_distance(
            &Concept::not(Concept::Top),
            &link,
            &Concept::primitive("goal"),
            &s,
            &u,
            &d,
        )
        .unwrap();
        assert_eq!(empty, 3);

        // directed edges: goal cannot reach mark forward
        let unreachable = eval_distance(
            &Concept::primitive("goal"),
            &link,
            &Concept::primitive("mark"),
            &s,
            &u,
            &d,
        )
        .unwrap();
        assert_eq!(unreachable, 3);
    }

    #[test]
    fn distance_inverse_symmetry() {
        let (d, u, s) = chain();
        let link = Role::primitive("link");
        let fwd = eval_distance(
            &Concept::primitive("mark"),
            &link,
            &Concept::primitive("goal"),
            &s,
            &u,
            &d,
        )
        .unwrap();
        let bwd = eval_distance(
            &Concept::primitive("goal"),
            &Role::inverse(link),
            &Concept::primitive("mark"),
            &s,
            &u,
            &d,
        )
        .unwrap();
        assert_eq!(fwd, bwd);
    }

    #[test]
    fn denotation_carries_both_shapes() {
        let (d, u, s) = sysadmin();
        let up = Feature::concept(Concept::primitive("running"));
        assert_eq!(
            denotation(&up, &s, &u, &d).unwrap(),
            Denotation::Objects(set(&["c0"]))
        );
        let dist = Feature::distance(
            Concept::primitive("running"),
            Role::primitive("link"),
            Concept::not(Concept::primitive("running")),
        );
        assert_eq!(denotation(&dist, &s, &u, &d).unwrap(), Denotation::Steps(1));
    }

    #[test]
    fn feature_values_and_membership() {
        let (d, u, s) = sysadmin();
        let up = Feature::concept(Concept::primitive("running"));
        assert_eq!(feature_value(&up, &s, &u, &d).unwrap(), 1);
        assert_eq!(object_membership(&up, "c0", &s, &u, &d).unwrap(), 1);
        assert_eq!(object_membership(&up, "c1", &s, &u, &d).unwrap(), 0);

        let dist = Feature::distance(
            Concept::primitive("running"),
            Role::primitive("link"),
            Concept::Top,
        );
        assert_eq!(feature_value(&dist, &s, &u, &d).unwrap(), 0);
        assert_eq!(object_membership(&dist, "c0", &s, &u, &d).unwrap(), 0);
        assert_eq!(object_membership(&dist, "c1", &s, &u, &d).unwrap(), 0);
    }

    #[test]
    fn empty_state_concept_values_are_zero() {
        let (d, u, _) = sysadmin();
        let s = RelationalState::default();
        let up = Feature::concept(Concept::primitive("running"));
        assert_eq!(feature_value(&up, &s, &u, &d).unwrap(), 0);
    }
}
