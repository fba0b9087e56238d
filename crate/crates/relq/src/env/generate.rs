//! Problem generator: deterministic instances of any size for every domain,
//! the raw material of a leapfrogging curriculum.

use std::collections::BTreeSet;

use rand::Rng;
use rand::seq::SliceRandom;

use super::{DomainKind, InstanceSpec, Params};
use crate::relational::{GroundFact, ObjectUniverse};
use crate::{Error, Result, seed};

/// Horizon generated instances carry unless the caller overrides it.
pub const DEFAULT_HORIZON: u32 = 40;

/// Probability of adding each non-tree edge to a generated Sysadmin
/// topology, on top of the random spanning tree that keeps it connected.
const EXTRA_EDGE_PROB: f64 = 0.3;

/// Builds an instance of the named domain. Size parameters are
/// `sysadmin: [computers]`, `advising: [levels, courses_per_level,
/// prereqs_per_course]`, `life`/`wildfire`: `[width, height]`. The result
/// is a pure function of `(domain_name, size_params, instance_seed)`.
pub fn generate_instance(
    domain_name: &str,
    size_params: &[usize],
    instance_seed: u64,
) -> Result<InstanceSpec> {
    let kind = DomainKind::from_name(domain_name)
        .ok_or_else(|| Error::validation(format!("unsupported domain '{domain_name}'")))?;
    if size_params.len() != kind.size_arity() {
        return Err(Error::validation(format!(
            "domain '{domain_name}' takes {} size parameter(s), got {}",
            kind.size_arity(),
            size_params.len()
        )));
    }
    if size_params.contains(&0) {
        return Err(Error::validation("size parameters must be positive"));
    }

    let mut rng = seed::rng(instance_seed, &[kind as u64]);
    let mut static_facts = BTreeSet::new();
    let mut initial_facts = BTreeSet::new();

    let objects: Vec<String> = match kind {
        DomainKind::Sysadmin => {
            let n = size_params[0];
            let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
            // random spanning tree keeps the network connected; extra edges
            // make the configuration arbitrary
            for i in 1..n {
                let j = rng.gen_range(0..i);
                link_both(&mut static_facts, "link", &names[i], &names[j]);
            }
            for i in 0..n {
                for j in (i + 1)..n {
                    let in_tree = static_facts
                        .contains(&GroundFact::new("link", &[&names[i], &names[j]]));
                    if !in_tree && rng.gen_bool(EXTRA_EDGE_PROB) {
                        link_both(&mut static_facts, "link", &names[i], &names[j]);
                    }
                }
            }
            for name in &names {
                initial_facts.insert(GroundFact::new("running", &[name]));
            }
            names
        }
        DomainKind::Advising => {
            let (levels, per_level, prereqs) = (size_params[0], size_params[1], size_params[2]);
            if prereqs > per_level {
                return Err(Error::validation(format!(
                    "cannot pick {prereqs} prerequisites from a level of {per_level} courses"
                )));
            }
            let mut names = Vec::new();
            for level in 1..=levels {
                for i in 0..per_level {
                    names.push(format!("course{level}_{i}"));
                }
            }
            for level in 2..=levels {
                let below: Vec<&String> = names
                    [(level - 2) * per_level..(level - 1) * per_level]
                    .iter()
                    .collect();
                for i in 0..per_level {
                    let course = &names[(level - 1) * per_level + i];
                    let mut pool = below.clone();
                    pool.shuffle(&mut rng);
                    for pre in pool.into_iter().take(prereqs) {
                        static_facts.insert(GroundFact::new("prereq", &[pre, course]));
                    }
                }
            }
            // the program requirement is the top level
            for course in &names[(levels - 1) * per_level..] {
                static_facts.insert(GroundFact::new("required", &[course]));
            }
            names
        }
        DomainKind::Life => {
            let names = grid_objects(size_params[0], size_params[1]);
            grid_neighbors(&mut static_facts, size_params[0], size_params[1]);
            for name in &names {
                if rng.gen_bool(0.5) {
                    initial_facts.insert(GroundFact::new("alive", &[name]));
                }
            }
            names
        }
        DomainKind::Wildfire => {
            let names = grid_objects(size_params[0], size_params[1]);
            grid_neighbors(&mut static_facts, size_params[0], size_params[1]);
            for name in &names {
                initial_facts.insert(GroundFact::new("fuel", &[name]));
            }
            let start = &names[rng.gen_range(0..names.len())];
            initial_facts.insert(GroundFact::new("burning", &[start]));
            names
        }
    };

    let spec = InstanceSpec {
        kind,
        domain: kind.domain(),
        universe: ObjectUniverse::new(objects)?,
        static_facts,
        initial_facts,
        horizon: DEFAULT_HORIZON,
        seed: instance_seed,
        params: Params::defaults(kind),
    };
    spec.validate()?;
    Ok(spec)
}

fn link_both(facts: &mut BTreeSet<GroundFact>, pred: &str, a: &str, b: &str) {
    facts.insert(GroundFact::new(pred, &[a, b]));
    facts.insert(GroundFact::new(pred, &[b, a]));
}

fn grid_objects(width: usize, height: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(width * height);
    for x in 0..width {
        for y in 0..height {
            names.push(format!("l{x}_{y}"));
        }
    }
    names
}

/// Eight-way adjacency, emitted in both directions.
fn grid_neighbors(facts: &mut BTreeSet<GroundFact>, width: usize, height: usize) {
    for x in 0..width {
        for y in 0..height {
            for dx in -1i64..=1 {
                for dy in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= width as i64 || ny >= height as i64 {
                        continue;
                    }
                    facts.insert(GroundFact::new(
                        "neighbor",
                        &[&format!("l{x}_{y}"), &format!("l{nx}_{ny}")],
                    ));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{BTreeMap, VecDeque};

    #[test]
    fn sysadmin_is_connected_and_all_running() {
        for seed in 0..20 {
            let spec = generate_instance("sysadmin", &[3], seed).unwrap();
            assert_eq!(spec.universe.len(), 3);
            assert_eq!(spec.initial_facts.len(), 3); // all running

            // BFS over the link graph reaches every computer
            let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
            for fact in &spec.static_facts {
                adjacency
                    .entry(fact.args[0].as_str())
                    .or_default()
                    .push(fact.args[1].as_str());
            }
            let mut seen = BTreeSet::from(["c0"]);
            let mut queue = VecDeque::from(["c0"]);
            while let Some(c) = queue.pop_front() {
                for &d in adjacency.get(c).into_iter().flatten() {
                    if seen.insert(d) {
                        queue.push_back(d);
                    }
                }
            }
            assert_eq!(seen.len(), 3, "seed {seed} produced a disconnected topology");
        }
    }

    #[test]
    fn life_two_by_two_has_corner_adjacency() {
        let spec = generate_instance("life", &[2, 2], 0).unwrap();
        assert_eq!(spec.universe.len(), 4);
        for cell in spec.universe.objects() {
            let count = spec
                .static_facts
                .iter()
                .filter(|f| f.predicate == "neighbor" && &f.args[0] == cell)
                .count();
            assert_eq!(count, 3, "{cell} should have 3 neighbors on a 2x2 grid");
        }
    }

    #[test]
    fn grid_adjacency_matches_exhaustive_enumeration() {
        let (w, h) = (3, 4);
        let spec = generate_instance("life", &[w, h], 0).unwrap();
        for x in 0..w as i64 {
            for y in 0..h as i64 {
                for nx in 0..w as i64 {
                    for ny in 0..h as i64 {
                        let expected = (x, y) != (nx, ny)
                            && (x - nx).abs() <= 1
                            && (y - ny).abs() <= 1;
                        let fact = GroundFact::new(
                            "neighbor",
                            &[&format!("l{x}_{y}"), &format!("l{nx}_{ny}")],
                        );
                        assert_eq!(spec.static_facts.contains(&fact), expected);
                    }
                }
            }
        }
    }

    #[test]
    fn advising_levels_and_prerequisites() {
        let spec = generate_instance("advising", &[2, 2, 2], 0).unwrap();
        assert_eq!(spec.universe.len(), 4);
        for i in 0..2 {
            let course = format!("course2_{i}");
            let prereqs: Vec<&GroundFact> = spec
                .static_facts
                .iter()
                .filter(|f| f.predicate == "prereq" && f.args[1] == course)
                .collect();
            assert_eq!(prereqs.len(), 2);
            for p in prereqs {
                assert!(p.args[0].starts_with("course1_"));
            }
            assert!(
                spec.static_facts
                    .contains(&GroundFact::new("required", &[&course]))
            );
        }
        // level-1 courses are not required and have no prerequisites
        assert!(
            !spec
                .static_facts
                .contains(&GroundFact::new("required", &["course1_0"]))
        );
    }

    #[test]
    fn wildfire_starts_with_one_fire_and_full_fuel() {
        let spec = generate_instance("wildfire", &[3, 3], 5).unwrap();
        assert_eq!(
            spec.initial_facts.iter().filter(|f| f.predicate == "fuel").count(),
            9
        );
        assert_eq!(
            spec.initial_facts.iter().filter(|f| f.predicate == "burning").count(),
            1
        );
    }

    #[test]
    fn generation_is_deterministic() {
        for (name, size) in [
            ("sysadmin", vec![5]),
            ("advising", vec![3, 3, 2]),
            ("life", vec![3, 3]),
            ("wildfire", vec![2, 4]),
        ] {
            let a = generate_instance(name, &size, 42).unwrap();
            let b = generate_instance(name, &size, 42).unwrap();
            assert_eq!(a.static_facts, b.static_facts);
            assert_eq!(a.initial_facts, b.initial_facts);
            let c = generate_instance(name, &size, 43).unwrap();
            assert!(
                c.static_facts != a.static_facts || c.initial_facts != a.initial_facts,
                "{name}: different seeds should vary the instance"
            );
        }
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(generate_instance("chess", &[3], 0).is_err());
        assert!(generate_instance("sysadmin", &[3, 3], 0).is_err());
        assert!(generate_instance("sysadmin", &[0], 0).is_err());
        assert!(generate_instance("advising", &[2, 2, 3], 0).is_err());
    }
}
