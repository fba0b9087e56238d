//! Shared test oracles, all deliberately independent of the library's
//! evaluation paths: set-based quantifier expansion instead of bitsets,
//! Floyd-Warshall instead of BFS, and an explicit transition-matrix MDP
//! for value iteration.

#![allow(dead_code)]

use std::collections::BTreeSet;

use relq::dl::{Concept, Feature, FeatureKind, Role};
use relq::encode::EncodingLayout;
use relq::env::{Env, InstanceSpec, StepResult};
use relq::relational::{
    ActionSchema, Domain, GroundAction, GroundFact, ObjectUniverse, Predicate, RelationalState,
};

pub fn object_set(universe: &ObjectUniverse) -> BTreeSet<String> {
    universe.objects().iter().cloned().collect()
}

fn role_edge(role: &Role, x: &str, y: &str, state: &RelationalState) -> bool {
    match role {
        Role::Primitive(p) => state.contains(&GroundFact::new(p.as_str(), &[x, y])),
        Role::Inverse(p) => state.contains(&GroundFact::new(p.as_str(), &[y, x])),
    }
}

/// Direct quantifier expansion over all objects.
pub fn oracle_concept(
    concept: &Concept,
    state: &RelationalState,
    universe: &ObjectUniverse,
) -> BTreeSet<String> {
    let objects = object_set(universe);
    match concept {
        Concept::Primitive(p) => objects
            .iter()
            .filter(|o| state.contains(&GroundFact::new(p.as_str(), &[o])))
            .cloned()
            .collect(),
        Concept::Top => objects,
        Concept::Not(c) => {
            let inner = oracle_concept(c, state, universe);
            objects.difference(&inner).cloned().collect()
        }
        Concept::And(a, b) => {
            let left = oracle_concept(a, state, universe);
            let right = oracle_concept(b, state, universe);
            left.intersection(&right).cloned().collect()
        }
        Concept::Forall(r, c) => {
            let inner = oracle_concept(c, state, universe);
            objects
                .iter()
                .filter(|x| {
                    objects.iter().all(|y| role_edge(r, x, y, state) && inner.contains(y))
                })
                .cloned()
                .collect()
        }
        Concept::Exists(r, c) => {
            let inner = oracle_concept(c, state, universe);
            objects
                .iter()
                .filter(|x| {
                    objects.iter().any(|y| role_edge(r, x, y, state) && inner.contains(y))
                })
                .cloned()
                .collect()
        }
        Concept::RoleEq(r1, r2) => objects
            .iter()
            .filter(|x| {
                objects
                    .iter()
                    .all(|y| role_edge(r1, x, y, state) == role_edge(r2, x, y, state))
            })
            .cloned()
            .collect(),
    }
}

/// All-pairs shortest paths over the role's edge set, then the minimum
/// between the two denotations. `|O|` for empty or unreachable.
pub fn oracle_distance(
    c1: &Concept,
    role: &Role,
    c2: &Concept,
    state: &RelationalState,
    universe: &ObjectUniverse,
) -> usize {
    let n = universe.len();
    let names = universe.objects();
    let infinity = usize::MAX / 2;
    let mut dist = vec![vec![infinity; n]; n];
    for (i, x) in names.iter().enumerate() {
        for (j, y) in names.iter().enumerate() {
            if i == j {
                dist[i][j] = 0;
            } else if role_edge(role, x, y, state) {
                dist[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }
    let from = oracle_concept(c1, state, universe);
    let to = oracle_concept(c2, state, universe);
    let mut best = infinity;
    for x in &from {
        for y in &to {
            let i = universe.index_of(x).unwrap();
            let j = universe.index_of(y).unwrap();
            best = best.min(dist[i][j]);
        }
    }
    if best >= infinity { n } else { best }
}

pub fn oracle_feature_value(
    feature: &Feature,
    state: &RelationalState,
    universe: &ObjectUniverse,
) -> usize {
    match &feature.kind {
        FeatureKind::Concept(c) => oracle_concept(c, state, universe).len(),
        FeatureKind::Distance(c1, r, c2) => oracle_distance(c1, r, c2, state, universe),
    }
}

/// Closed-form rewards recomputed directly from the fact set.
pub fn oracle_reward(spec: &InstanceSpec, state: &RelationalState, action: &GroundAction) -> f64 {
    let p = &spec.params;
    let count = |pred: &str| state.facts().filter(|f| f.predicate == pred).count() as f64;
    match spec.kind.name() {
        "sysadmin" => {
            let penalty = if action.schema == "reboot" { p.get("reboot_cost") } else { 0.0 };
            p.get("up_reward") * count("running") - penalty
        }
        "advising" => {
            let required: Vec<&GroundFact> =
                state.facts().filter(|f| f.predicate == "required").collect();
            let all_passed = required.iter().all(|f| {
                state.contains(&GroundFact::new("passed", &[f.args[0].as_str()]))
            });
            if all_passed {
                return 0.0;
            }
            let mut r = -p.get("step_cost");
            if action.schema == "take" {
                let c = action.args[0].as_str();
                if state.contains(&GroundFact::new("taken", &[c]))
                    && !state.contains(&GroundFact::new("passed", &[c]))
                {
                    r -= p.get("retake_cost");
                }
            }
            r
        }
        "life" => {
            let penalty = if action.schema == "set_alive" { p.get("set_cost") } else { 0.0 };
            p.get("alive_reward") * count("alive") - penalty
        }
        "wildfire" => {
            let penalty = if action.schema == "nop" { 0.0 } else { p.get("action_cost") };
            -p.get("burn_penalty") * count("burning") - penalty
        }
        other => panic!("no reward oracle for domain {other}"),
    }
}

/// Deterministic five-position chain: `advance` moves right, `stay` stays.
/// Position 4 pays 1 per step, everywhere else costs 0.1.
pub struct ChainEnv {
    domain: Domain,
    universe: ObjectUniverse,
    actions: Vec<GroundAction>,
    position: usize,
    t: u32,
    horizon: u32,
}

pub const CHAIN_STATES: usize = 5;

impl ChainEnv {
    pub fn new(horizon: u32) -> ChainEnv {
        let domain = Domain::new(
            "chain",
            vec![Predicate { name: "at".into(), arity: 1 }],
            vec![
                ActionSchema { name: "advance".into(), arity: 0 },
                ActionSchema { name: "stay".into(), arity: 0 },
            ],
        )
        .unwrap();
        let universe =
            ObjectUniverse::new((0..CHAIN_STATES).map(|i| format!("p{i}")).collect()).unwrap();
        let actions = relq::relational::ground_actions(&domain, &universe);
        ChainEnv { domain, universe, actions, position: 0, t: 0, horizon }
    }

    pub fn state_at(&self, position: usize) -> RelationalState {
        RelationalState::new([GroundFact::new("at", &[&format!("p{position}")])])
    }

    pub fn layout(&self) -> EncodingLayout {
        EncodingLayout::new(
            self.domain.clone(),
            vec![relq::dl::Feature::concept(Concept::primitive("at"))],
        )
        .unwrap()
    }

    pub fn reward_at(position: usize) -> f64 {
        if position == CHAIN_STATES - 1 { 1.0 } else { -0.1 }
    }

    fn advances(&self, action_index: usize) -> bool {
        self.actions[action_index].schema == "advance"
    }
}

impl Env for ChainEnv {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn universe(&self) -> &ObjectUniverse {
        &self.universe
    }

    fn horizon(&self) -> u32 {
        self.horizon
    }

    fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    fn reset(&mut self, _episode_seed: u64) -> RelationalState {
        self.position = 0;
        self.t = 0;
        self.state_at(0)
    }

    fn step(&mut self, action_index: usize) -> relq::Result<StepResult> {
        if self.advances(action_index) && self.position < CHAIN_STATES - 1 {
            self.position += 1;
        }
        self.t += 1;
        Ok(StepResult {
            next_state: self.state_at(self.position),
            reward: Self::reward_at(self.position),
            done: self.t >= self.horizon,
        })
    }
}

/// Optimal state values of the chain by value iteration on the explicit
/// model.
pub fn chain_value_iteration(gamma: f64) -> Vec<f64> {
    let mut v = vec![0.0; CHAIN_STATES];
    loop {
        let mut next = vec![0.0; CHAIN_STATES];
        for s in 0..CHAIN_STATES {
            let s_advance = (s + 1).min(CHAIN_STATES - 1);
            let q_advance = ChainEnv::reward_at(s_advance) + gamma * v[s_advance];
            let q_stay = ChainEnv::reward_at(s) + gamma * v[s];
            next[s] = q_advance.max(q_stay);
        }
        let diff = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff < 1e-13 {
            return v;
        }
    }
}

/// State values of a greedy policy extracted from a learned table,
/// evaluated on the explicit chain model.
pub fn chain_policy_values(table: &relq::grl::QTable, gamma: f64) -> Vec<f64> {
    let env = ChainEnv::new(1);
    let keys: Vec<String> =
        (0..CHAIN_STATES).map(|s| env.state_at(s).canonical_key()).collect();
    let mut v = vec![0.0; CHAIN_STATES];
    loop {
        let mut next = vec![0.0; CHAIN_STATES];
        for s in 0..CHAIN_STATES {
            let action = table.greedy(&keys[s]).expect("state visited during training");
            let s2 = if env.advances(action) { (s + 1).min(CHAIN_STATES - 1) } else { s };
            next[s] = ChainEnv::reward_at(s2) + gamma * v[s2];
        }
        let diff = v.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff < 1e-13 {
            return v;
        }
    }
}
