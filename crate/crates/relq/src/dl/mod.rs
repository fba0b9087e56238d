//! Description-logic feature language over relational states.
//!
//! Concepts denote sets of objects, roles denote sets of object pairs.
//! Unary predicates of the domain are primitive concepts, binary predicates
//! are primitive roles. The grammar is
//!
//! ```text
//! C ::= p1 | top | not(C) | and(C,C') | forall(R,C) | exists(R,C) | eq(R,R')
//! R ::= p2 | inv(p2)
//! ```
//!
//! plus distance features `dist(C,R,C')` measuring the minimum number of
//! role steps between two objects satisfying the concepts. The serialized
//! forms above double as the on-disk feature format (see [`parse`]), so the
//! constructor names `top`, `not`, `and`, `forall`, `exists`, `eq`, `inv`
//! and `dist` are reserved and cannot be used as predicate names in
//! features.
//!
//! Complexity counts grammar rules: primitives and `top` cost 1, every
//! constructor adds 1 plus the cost of its children, and a distance feature
//! costs 1 plus the cost of its three parts.

mod enumerate;
mod eval;
mod parse;

pub use enumerate::enumerate_features;
pub use eval::{
    Denotation, Interpretation, denotation, eval_concept, eval_distance, feature_value,
    object_membership,
};
pub use parse::{parse_feature, parse_feature_line, parse_feature_set};

use std::fmt;

/// A role expression: a binary predicate or its inverse.
///
/// `inv(inv(R))` is normalized to `R` by [`Role::inverse`], so the inverse
/// constructor only ever wraps a primitive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Primitive(String),
    Inverse(String),
}

impl Role {
    pub fn primitive(name: impl Into<String>) -> Role {
        Role::Primitive(name.into())
    }

    /// Inverse of a role, collapsing double inversion.
    pub fn inverse(role: Role) -> Role {
        match role {
            Role::Primitive(p) => Role::Inverse(p),
            Role::Inverse(p) => Role::Primitive(p),
        }
    }

    /// Name of the underlying binary predicate.
    pub fn predicate(&self) -> &str {
        match self {
            Role::Primitive(p) | Role::Inverse(p) => p,
        }
    }

    pub fn complexity(&self) -> usize {
        match self {
            Role::Primitive(_) => 1,
            Role::Inverse(_) => 2,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_role(self))
    }
}

/// A concept expression denoting a set of objects.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Concept {
    /// A unary predicate of the domain.
    Primitive(String),
    /// The universal concept; denotes every object.
    Top,
    Not(Box<Concept>),
    And(Box<Concept>, Box<Concept>),
    /// `{x | for all y: R(x,y) and C(y)}`.
    Forall(Role, Box<Concept>),
    /// `{x | exists y: R(x,y) and C(y)}`.
    Exists(Role, Box<Concept>),
    /// `{x | for all y: R(x,y) iff R'(x,y)}`.
    RoleEq(Role, Role),
}

impl Concept {
    pub fn primitive(name: impl Into<String>) -> Concept {
        Concept::Primitive(name.into())
    }

    // named after the grammar constructor, not std::ops::Not
    #[allow(clippy::should_implement_trait)]
    pub fn not(c: Concept) -> Concept {
        Concept::Not(Box::new(c))
    }

    /// Conjunction with the arguments in serialized order, so `and(a,b)`
    /// and `and(b,a)` are the same expression.
    pub fn and(a: Concept, b: Concept) -> Concept {
        if serialize_concept(&b) < serialize_concept(&a) {
            Concept::And(Box::new(b), Box::new(a))
        } else {
            Concept::And(Box::new(a), Box::new(b))
        }
    }

    pub fn forall(r: Role, c: Concept) -> Concept {
        Concept::Forall(r, Box::new(c))
    }

    pub fn exists(r: Role, c: Concept) -> Concept {
        Concept::Exists(r, Box::new(c))
    }

    /// Role equality with the arguments in serialized order.
    pub fn role_eq(a: Role, b: Role) -> Concept {
        if serialize_role(&b) < serialize_role(&a) {
            Concept::RoleEq(b, a)
        } else {
            Concept::RoleEq(a, b)
        }
    }

    pub fn complexity(&self) -> usize {
        match self {
            Concept::Primitive(_) | Concept::Top => 1,
            Concept::Not(c) => 1 + c.complexity(),
            Concept::And(a, b) => 1 + a.complexity() + b.complexity(),
            Concept::Forall(r, c) | Concept::Exists(r, c) => {
                1 + r.complexity() + c.complexity()
            }
            Concept::RoleEq(a, b) => 1 + a.complexity() + b.complexity(),
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_concept(self))
    }
}

/// What a feature computes on a state.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKind {
    /// Value is the cardinality of the concept's denotation; objects can be
    /// members.
    Concept(Concept),
    /// Value is the minimum number of role steps from an object satisfying
    /// the first concept to one satisfying the second; no object is ever a
    /// member.
    Distance(Concept, Role, Concept),
}

/// One feature of the abstraction: an expression plus its grammar
/// complexity. A feature's id is its index in the canonical enumeration
/// order (complexity ascending, then serialized form).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Feature {
    pub kind: FeatureKind,
    pub complexity: usize,
}

impl Feature {
    pub fn concept(c: Concept) -> Feature {
        let complexity = c.complexity();
        Feature { kind: FeatureKind::Concept(c), complexity }
    }

    pub fn distance(c1: Concept, r: Role, c2: Concept) -> Feature {
        let complexity = 1 + c1.complexity() + r.complexity() + c2.complexity();
        Feature { kind: FeatureKind::Distance(c1, r, c2), complexity }
    }

    pub fn serialize(&self) -> String {
        match &self.kind {
            FeatureKind::Concept(c) => serialize_concept(c),
            FeatureKind::Distance(c1, r, c2) => format!(
                "dist({},{},{})",
                serialize_concept(c1),
                serialize_role(r),
                serialize_concept(c2)
            ),
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.serialize())
    }
}

pub fn serialize_role(role: &Role) -> String {
    match role {
        Role::Primitive(p) => p.clone(),
        Role::Inverse(p) => format!("inv({p})"),
    }
}

pub fn serialize_concept(concept: &Concept) -> String {
    match concept {
        Concept::Primitive(p) => p.clone(),
        Concept::Top => "top".to_string(),
        Concept::Not(c) => format!("not({})", serialize_concept(c)),
        Concept::And(a, b) => {
            format!("and({},{})", serialize_concept(a), serialize_concept(b))
        }
        Concept::Forall(r, c) => {
            format!("forall({},{})", serialize_role(r), serialize_concept(c))
        }
        Concept::Exists(r, c) => {
            format!("exists({},{})", serialize_role(r), serialize_concept(c))
        }
        Concept::RoleEq(a, b) => {
            format!("eq({},{})", serialize_role(a), serialize_role(b))
        }
    }
}

/// Writes a feature set in the on-disk text format: one `serialized
/// complexity` pair per line, in feature-id order.
pub fn serialize_feature_set(features: &[Feature]) -> String {
    let mut out = String::new();
    for f in features {
        out.push_str(&f.serialize());
        out.push(' ');
        out.push_str(&f.complexity.to_string());
        out.push('\n');
    }
    out
}
