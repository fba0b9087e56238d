//! Relational MDP building blocks: domains, objects, ground facts, states,
//! and ground actions.
//!
//! A domain fixes the predicate and action vocabulary; an object universe
//! fixes the individuals of one problem instance. States are plain sets of
//! ground facts with a canonical (sorted) serialization, which is what makes
//! tabular Q-learning over them possible.

use std::collections::BTreeSet;
use std::fmt;

use crate::{Error, Result};

/// Maximum predicate arity. Unary predicates act as description-logic
/// concepts and binary predicates as roles; nothing above arity 2 exists.
pub const MAX_ARITY: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub arity: usize,
}

/// A problem domain: predicate vocabulary plus parameterized action names.
///
/// Action schemas are kept in strict alphabetical order; their position is
/// the one-hot index used by the action encoding, so the order must not
/// depend on construction order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    name: String,
    predicates: Vec<Predicate>,
    action_schemas: Vec<ActionSchema>,
    nop_injected: bool,
}

/// Name of the always-executable no-op action, injected when a domain
/// declares no action of that name.
pub const NOP: &str = "nop";

impl Domain {
    pub fn new(
        name: impl Into<String>,
        predicates: Vec<Predicate>,
        mut action_schemas: Vec<ActionSchema>,
    ) -> Result<Self> {
        let name = name.into();
        for p in &predicates {
            if p.arity > MAX_ARITY {
                return Err(Error::validation(format!(
                    "predicate '{}' has arity {}, maximum is {MAX_ARITY}",
                    p.name, p.arity
                )));
            }
        }
        check_unique(predicates.iter().map(|p| p.name.as_str()), "predicate")?;
        let nop_injected = !action_schemas.iter().any(|a| a.name == NOP);
        if nop_injected {
            action_schemas.push(ActionSchema { name: NOP.into(), arity: 0 });
        }
        check_unique(action_schemas.iter().map(|a| a.name.as_str()), "action schema")?;
        action_schemas.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(Domain { name, predicates, action_schemas, nop_injected })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }

    /// Action schemas in alphabetical order.
    pub fn action_schemas(&self) -> &[ActionSchema] {
        &self.action_schemas
    }

    /// True when `nop` was added by the constructor rather than declared.
    pub fn nop_injected(&self) -> bool {
        self.nop_injected
    }

    pub fn predicate(&self, name: &str) -> Option<&Predicate> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn schema(&self, name: &str) -> Option<&ActionSchema> {
        self.action_schemas.iter().find(|a| a.name == name)
    }

    /// Position of a schema in the alphabetical ordering.
    pub fn schema_index(&self, name: &str) -> Option<usize> {
        self.action_schemas.iter().position(|a| a.name == name)
    }

    /// Names of unary predicates, in declaration order.
    pub fn unary_predicates(&self) -> impl Iterator<Item = &str> {
        self.predicates.iter().filter(|p| p.arity == 1).map(|p| p.name.as_str())
    }

    /// Names of binary predicates, in declaration order.
    pub fn binary_predicates(&self) -> impl Iterator<Item = &str> {
        self.predicates.iter().filter(|p| p.arity == 2).map(|p| p.name.as_str())
    }

    /// Largest action-schema arity; the `N` of the action encoding.
    pub fn max_action_arity(&self) -> usize {
        self.action_schemas.iter().map(|a| a.arity).max().unwrap_or(0)
    }
}

fn check_unique<'a>(names: impl Iterator<Item = &'a str>, kind: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::validation(format!("duplicate {kind} name '{n}'")));
        }
    }
    Ok(())
}

/// The objects of one problem instance, in a canonical order fixed at
/// construction (file order for parsed instances).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectUniverse {
    objects: Vec<String>,
}

impl ObjectUniverse {
    pub fn new(objects: Vec<String>) -> Result<Self> {
        if objects.is_empty() {
            return Err(Error::validation("universe must be non-empty"));
        }
        check_unique(objects.iter().map(|o| o.as_str()), "object")?;
        Ok(ObjectUniverse { objects })
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.objects.iter().any(|o| o == name)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.objects.iter().position(|o| o == name)
    }
}

/// An instantiation of a predicate with objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundFact {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundFact {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        GroundFact {
            predicate: predicate.into(),
            args: args.iter().map(|a| a.to_string()).collect(),
        }
    }

    /// Checks arity against the domain and membership against the universe.
    pub fn validate(&self, domain: &Domain, universe: &ObjectUniverse) -> Result<()> {
        let pred = domain.predicate(&self.predicate).ok_or_else(|| {
            Error::validation(format!("unknown predicate '{}'", self.predicate))
        })?;
        if pred.arity != self.args.len() {
            return Err(Error::validation(format!(
                "predicate '{}' expects {} argument(s), got {}",
                self.predicate,
                pred.arity,
                self.args.len()
            )));
        }
        for a in &self.args {
            if !universe.contains(a) {
                return Err(Error::validation(format!("object '{a}' not declared")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroundFact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.predicate, self.args.join(","))
    }
}

/// A state: the set of facts that are true. Everything absent is false.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RelationalState {
    facts: BTreeSet<GroundFact>,
}

/// Canonical key of the empty state.
pub const EMPTY_STATE_KEY: &str = "<empty>";

impl RelationalState {
    pub fn new(facts: impl IntoIterator<Item = GroundFact>) -> Self {
        RelationalState { facts: facts.into_iter().collect() }
    }

    pub fn facts(&self) -> impl Iterator<Item = &GroundFact> {
        self.facts.iter()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn contains(&self, fact: &GroundFact) -> bool {
        self.facts.contains(fact)
    }

    pub fn insert(&mut self, fact: GroundFact) {
        self.facts.insert(fact);
    }

    pub fn remove(&mut self, fact: &GroundFact) {
        self.facts.remove(fact);
    }

    /// True facts of one unary predicate, as object names.
    pub fn unary_args<'a>(&'a self, predicate: &'a str) -> impl Iterator<Item = &'a str> {
        self.facts
            .iter()
            .filter(move |f| f.predicate == predicate && f.args.len() == 1)
            .map(|f| f.args[0].as_str())
    }

    /// True facts of one binary predicate, as (first, second) pairs.
    pub fn binary_args<'a>(
        &'a self,
        predicate: &'a str,
    ) -> impl Iterator<Item = (&'a str, &'a str)> {
        self.facts
            .iter()
            .filter(move |f| f.predicate == predicate && f.args.len() == 2)
            .map(|f| (f.args[0].as_str(), f.args[1].as_str()))
    }

    /// Canonical serialization: facts sorted lexicographically, joined with
    /// `;`. Equal fact sets always produce equal keys, distinct sets produce
    /// distinct keys (fact syntax contains no `;`).
    pub fn canonical_key(&self) -> String {
        if self.facts.is_empty() {
            return EMPTY_STATE_KEY.to_string();
        }
        let mut out = String::new();
        for (i, f) in self.facts.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            out.push_str(&f.to_string());
        }
        out
    }

    /// Applies an object renaming to every fact. Used by the permutation
    /// invariance tests; names without a mapping are kept.
    pub fn rename(&self, map: &dyn Fn(&str) -> String) -> RelationalState {
        RelationalState::new(self.facts.iter().map(|f| GroundFact {
            predicate: f.predicate.clone(),
            args: f.args.iter().map(|a| map(a)).collect(),
        }))
    }
}

impl FromIterator<GroundFact> for RelationalState {
    fn from_iter<T: IntoIterator<Item = GroundFact>>(iter: T) -> Self {
        RelationalState::new(iter)
    }
}

/// An instantiation of an action schema with objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundAction {
    pub schema: String,
    pub args: Vec<String>,
}

impl GroundAction {
    pub fn new(schema: impl Into<String>, args: &[&str]) -> Self {
        GroundAction { schema: schema.into(), args: args.iter().map(|a| a.to_string()).collect() }
    }

    pub fn nop() -> Self {
        GroundAction { schema: NOP.into(), args: Vec::new() }
    }

    pub fn validate(&self, domain: &Domain, universe: &ObjectUniverse) -> Result<()> {
        let schema = domain
            .schema(&self.schema)
            .ok_or_else(|| Error::validation(format!("unknown action '{}'", self.schema)))?;
        if schema.arity != self.args.len() {
            return Err(Error::validation(format!(
                "action '{}' expects {} argument(s), got {}",
                self.schema,
                schema.arity,
                self.args.len()
            )));
        }
        for a in &self.args {
            if !universe.contains(a) {
                return Err(Error::validation(format!("object '{a}' not declared")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.schema, self.args.join(","))
    }
}

/// All instantiations of the domain's action schemas with objects from the
/// universe, in deterministic order: alphabetical by schema (the schema
/// order of the domain), then lexicographic in the argument tuple.
/// Repeated arguments are produced; simulators decide what they mean.
pub fn ground_actions(domain: &Domain, universe: &ObjectUniverse) -> Vec<GroundAction> {
    let mut sorted_objects: Vec<&String> = universe.objects().iter().collect();
    sorted_objects.sort();
    let mut out = Vec::new();
    for schema in domain.action_schemas() {
        let mut tuple: Vec<usize> = vec![0; schema.arity];
        loop {
            out.push(GroundAction {
                schema: schema.name.clone(),
                args: tuple.iter().map(|&i| sorted_objects[i].clone()).collect(),
            });
            // odometer increment over object indices
            let mut pos = schema.arity;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                tuple[pos] += 1;
                if tuple[pos] < sorted_objects.len() {
                    break;
                }
                tuple[pos] = 0;
            }
            if tuple.iter().all(|&i| i == 0) {
                break;
            }
        }
    }
    out
}

/// True iff the fact is an element of the state.
pub fn state_contains(state: &RelationalState, fact: &GroundFact) -> bool {
    state.contains(fact)
}

/// Stable string key for Q-table lookups; see
/// [`RelationalState::canonical_key`].
pub fn canonical_state_key(state: &RelationalState) -> String {
    state.canonical_key()
}
