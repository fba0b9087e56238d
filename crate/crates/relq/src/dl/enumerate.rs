//! Complexity-bounded feature enumeration with semantic pruning.
//!
//! Enumeration is bottom-up by complexity. At every level, candidate
//! expressions are evaluated on the sample states and kept only when their
//! denotation signature (the per-state denotation, concatenated over all
//! samples) is new. Because every grammar constructor is pointwise in the
//! denotations of its parts, building compounds from one representative per
//! signature class loses nothing over the sample set, while it keeps the
//! candidate pool small enough for complexity bound 5 on every benchmark
//! domain.
//!
//! Candidates of equal complexity are processed in serialized order, so the
//! retained representative of a class is the lexicographically smallest
//! expression of minimal complexity, and the output is identical across
//! runs.

use std::collections::HashSet;

use fixedbitset::FixedBitSet;

use super::{Concept, Feature, Interpretation, Role};
use crate::relational::{Domain, ObjectUniverse, RelationalState};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Sig {
    Sets(Vec<Vec<u32>>),
    Nums(Vec<u32>),
}

fn set_sig(denotations: &[FixedBitSet]) -> Sig {
    Sig::Sets(denotations.iter().map(|d| d.ones().map(|i| i as u32).collect()).collect())
}

struct ConceptEntry {
    concept: Concept,
    complexity: usize,
    denotations: Vec<FixedBitSet>,
}

/// Enumerates all features of complexity at most `k` derivable from the
/// domain's predicates, pruned so that no two retained features have the
/// same denotation signature over the sample states. The result is in
/// canonical order: complexity ascending, then serialized form; the index
/// of a feature in this list is its id.
pub fn enumerate_features(
    domain: &Domain,
    universe: &ObjectUniverse,
    samples: &[RelationalState],
    k: usize,
) -> Result<Vec<Feature>> {
    if samples.is_empty() {
        return Err(Error::validation("feature enumeration needs at least one sample state"));
    }
    if k == 0 {
        return Err(Error::validation("complexity bound must be at least 1"));
    }

    // Canonical sample order: independent of how the caller collected them.
    let mut states: Vec<&RelationalState> = samples.iter().collect();
    states.sort_by_key(|s| s.canonical_key());
    states.dedup_by_key(|s| s.canonical_key());
    let interps: Vec<Interpretation> =
        states.iter().map(|s| Interpretation::build(domain, universe, s)).collect();

    let mut roles: Vec<Role> = Vec::new();
    for p in domain.binary_predicates() {
        roles.push(Role::primitive(p));
        roles.push(Role::inverse(Role::primitive(p)));
    }

    let mut entries: Vec<ConceptEntry> = Vec::new();
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
    let mut seen: HashSet<Sig> = HashSet::new();

    for level in 1..=k {
        let mut candidates: Vec<Concept> = Vec::new();
        if level == 1 {
            candidates.push(Concept::Top);
            for p in domain.unary_predicates() {
                candidates.push(Concept::primitive(p));
            }
        } else {
            for &i in &by_level[level - 1] {
                candidates.push(Concept::not(entries[i].concept.clone()));
            }
            for a in 1..level {
                let b = level - 1 - a;
                if b < a || b > k {
                    continue;
                }
                for (ai, &i) in by_level[a].iter().enumerate() {
                    let js: &[usize] = &by_level[b];
                    for (bj, &j) in js.iter().enumerate() {
                        if a == b && bj <= ai {
                            continue;
                        }
                        candidates.push(Concept::and(
                            entries[i].concept.clone(),
                            entries[j].concept.clone(),
                        ));
                    }
                }
            }
            for role in &roles {
                let rc = role.complexity();
                if rc + 1 >= level {
                    continue;
                }
                for &i in &by_level[level - 1 - rc] {
                    candidates.push(Concept::forall(role.clone(), entries[i].concept.clone()));
                    candidates.push(Concept::exists(role.clone(), entries[i].concept.clone()));
                }
            }
            for r1 in &roles {
                for r2 in &roles {
                    if r1.complexity() + r2.complexity() + 1 == level {
                        candidates.push(Concept::role_eq(r1.clone(), r2.clone()));
                    }
                }
            }
        }

        candidates.sort_by_key(|c| c.to_string());
        candidates.dedup();
        for concept in candidates {
            debug_assert_eq!(concept.complexity(), level);
            let denotations: Vec<FixedBitSet> = interps
                .iter()
                .map(|interp| interp.concept_bits(&concept))
                .collect::<Result<_>>()?;
            if seen.insert(set_sig(&denotations)) {
                by_level[level].push(entries.len());
                entries.push(ConceptEntry { concept, complexity: level, denotations });
            }
        }
    }

    let mut features: Vec<Feature> =
        entries.iter().map(|e| Feature::concept(e.concept.clone())).collect();

    // Distance features over the retained concept classes. Candidates are
    // scanned in (complexity, serialized) order so the same keep-lowest,
    // lexicographic tie-break applies; the concept denotations memoized
    // during enumeration feed the BFS directly.
    let mut dist_candidates: Vec<(usize, String, usize, usize, Role)> = Vec::new();
    for (i1, e1) in entries.iter().enumerate() {
        for role in &roles {
            for (i2, e2) in entries.iter().enumerate() {
                let complexity = 1 + e1.complexity + role.complexity() + e2.complexity;
                if complexity > k {
                    continue;
                }
                let serialized = format!(
                    "dist({},{},{})",
                    e1.concept, role, e2.concept
                );
                dist_candidates.push((complexity, serialized, i1, i2, role.clone()));
            }
        }
    }
    dist_candidates.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut dist_seen: HashSet<Sig> = HashSet::new();
    for (_, _, i1, i2, role) in dist_candidates {
        let values: Vec<u32> = interps
            .iter()
            .enumerate()
            .map(|(si, interp)| {
                interp
                    .distance_bits(&entries[i1].denotations[si], &role, &entries[i2].denotations[si])
                    .map(|v| v as u32)
            })
            .collect::<Result<_>>()?;
        if dist_seen.insert(Sig::Nums(values)) {
            features.push(Feature::distance(
                entries[i1].concept.clone(),
                role,
                entries[i2].concept.clone(),
            ));
        }
    }

    features.sort_by_key(|f| (f.complexity, f.serialize()));
    Ok(features)
}
