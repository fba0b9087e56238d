//! Problem instances and stochastic simulators for the four benchmark
//! domains, plus the problem generator and state-space sampling used by
//! feature synthesis.
//!
//! An [`InstanceSpec`] is everything the simulator needs: the domain
//! vocabulary, the objects, static topology facts, the dynamic initial
//! facts, a horizon, a base seed, and the probability/reward constants
//! ([`Params`]). Transitions and rewards are pure functions of
//! `(spec, state, action)` and an explicit RNG, so episodes on different
//! threads never share state.

mod dynamics;
mod generate;
mod parse;
mod sample;

pub use dynamics::{reward, transition};
pub use generate::generate_instance;
pub use parse::{instance_to_text, parse_instance};
pub use sample::sample_state_space;

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use rand_chacha::ChaCha8Rng;

use crate::relational::{
    ActionSchema, Domain, GroundAction, GroundFact, ObjectUniverse, Predicate, RelationalState,
    ground_actions,
};
use crate::{Error, Result, seed};

/// The four built-in domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    /// Computers on a network that shut down stochastically; reboot them.
    Sysadmin,
    /// Courses with prerequisites; pass the required ones.
    Advising,
    /// Noisy Conway life on a neighbor graph; set cells alive.
    Life,
    /// Fire spreading over a neighbor graph; put it out or cut fuel.
    Wildfire,
}

impl DomainKind {
    pub fn from_name(name: &str) -> Option<DomainKind> {
        match name {
            "sysadmin" => Some(DomainKind::Sysadmin),
            "advising" => Some(DomainKind::Advising),
            "life" => Some(DomainKind::Life),
            "wildfire" => Some(DomainKind::Wildfire),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Sysadmin => "sysadmin",
            DomainKind::Advising => "advising",
            DomainKind::Life => "life",
            DomainKind::Wildfire => "wildfire",
        }
    }

    pub const ALL: [DomainKind; 4] =
        [DomainKind::Sysadmin, DomainKind::Advising, DomainKind::Life, DomainKind::Wildfire];

    /// Predicate and action vocabulary of the domain.
    pub fn domain(self) -> Domain {
        type Vocab = Vec<(&'static str, usize)>;
        let (predicates, actions): (Vocab, Vocab) = match self {
            DomainKind::Sysadmin => {
                (vec![("running", 1), ("link", 2)], vec![("reboot", 1), ("nop", 0)])
            }
            DomainKind::Advising => (
                vec![("passed", 1), ("taken", 1), ("required", 1), ("prereq", 2)],
                vec![("take", 1), ("nop", 0)],
            ),
            DomainKind::Life => {
                (vec![("alive", 1), ("neighbor", 2)], vec![("set_alive", 1), ("nop", 0)])
            }
            DomainKind::Wildfire => (
                vec![("burning", 1), ("fuel", 1), ("neighbor", 2)],
                vec![("put_out", 1), ("cut_out", 1), ("nop", 0)],
            ),
        };
        Domain::new(
            self.name(),
            predicates
                .into_iter()
                .map(|(name, arity)| Predicate { name: name.into(), arity })
                .collect(),
            actions
                .into_iter()
                .map(|(name, arity)| ActionSchema { name: name.into(), arity })
                .collect(),
        )
        .expect("built-in domain is valid")
    }

    /// Probability and reward constants with their defaults. Instance files
    /// may override any of them in the `params:` section.
    pub fn default_params(self) -> &'static [(&'static str, f64)] {
        match self {
            DomainKind::Sysadmin => &[
                ("stay_base", 0.45),
                ("stay_bonus", 0.5),
                ("up_reward", 1.0),
                ("reboot_cost", 0.75),
            ],
            DomainKind::Advising => {
                &[("pass_base", 0.8), ("step_cost", 1.0), ("retake_cost", 5.0)]
            }
            DomainKind::Life => {
                &[("noise", 0.1), ("alive_reward", 1.0), ("set_cost", 1.0)]
            }
            DomainKind::Wildfire => {
                &[("spread_rate", 0.4), ("burn_penalty", 5.0), ("action_cost", 1.0)]
            }
        }
    }

    /// Number of size parameters the generator expects.
    pub fn size_arity(self) -> usize {
        match self {
            DomainKind::Sysadmin => 1,
            DomainKind::Advising => 3,
            DomainKind::Life | DomainKind::Wildfire => 2,
        }
    }
}

/// Domain constants, defaulted per [`DomainKind::default_params`].
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    values: BTreeMap<String, f64>,
}

impl Params {
    pub fn defaults(kind: DomainKind) -> Params {
        Params {
            values: kind
                .default_params()
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        }
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value;
                Ok(())
            }
            None => Err(Error::validation(format!("unknown parameter '{key}'"))),
        }
    }

    pub fn get(&self, key: &str) -> f64 {
        *self.values.get(key).unwrap_or_else(|| panic!("parameter '{key}' missing"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// Entries that differ from the domain defaults.
    pub fn overrides(&self, kind: DomainKind) -> Vec<(&str, f64)> {
        let defaults = Params::defaults(kind);
        self.iter().filter(|(k, v)| defaults.get(k) != *v).collect()
    }
}

/// A fully validated problem instance.
#[derive(Debug, Clone)]
pub struct InstanceSpec {
    pub kind: DomainKind,
    pub domain: Domain,
    pub universe: ObjectUniverse,
    /// Topology facts (links, neighbors, prerequisites); preserved by every
    /// transition.
    pub static_facts: BTreeSet<GroundFact>,
    /// Dynamic facts true in the initial state.
    pub initial_facts: BTreeSet<GroundFact>,
    /// Steps per episode.
    pub horizon: u32,
    /// Base seed; episode RNG streams derive from it.
    pub seed: u64,
    pub params: Params,
}

impl InstanceSpec {
    /// The initial state: initial facts plus static facts.
    pub fn initial_state(&self) -> RelationalState {
        self.initial_facts.iter().chain(self.static_facts.iter()).cloned().collect()
    }

    /// Short identifier used in result files, e.g. `sysadmin-n5`.
    pub fn label(&self) -> String {
        format!("{}-n{}", self.kind.name(), self.universe.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::validation("horizon must be at least 1"));
        }
        for fact in self.static_facts.iter().chain(self.initial_facts.iter()) {
            fact.validate(&self.domain, &self.universe)?;
        }
        Ok(())
    }
}

/// Result of one simulator step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub next_state: RelationalState,
    pub reward: f64,
    /// True once the episode's horizon is exhausted.
    pub done: bool,
}

/// What the learning and evaluation loops run against. Implemented by the
/// four simulators and by hand-built test MDPs.
pub trait Env {
    fn domain(&self) -> &Domain;
    fn universe(&self) -> &ObjectUniverse;
    fn horizon(&self) -> u32;
    /// All ground actions of the instance, in canonical order. Action
    /// indices used by [`Env::step`] refer to this list.
    fn actions(&self) -> &[GroundAction];
    /// Starts a new episode and returns its initial state.
    fn reset(&mut self, episode_seed: u64) -> RelationalState;
    /// Applies an action by index; errors on out-of-range indices.
    fn step(&mut self, action_index: usize) -> Result<StepResult>;
}

/// Simulator for one [`InstanceSpec`]: tracks episode state, step count,
/// and the episode RNG stream.
pub struct SimEnv {
    spec: InstanceSpec,
    actions: Vec<GroundAction>,
    state: RelationalState,
    t: u32,
    rng: ChaCha8Rng,
}

impl SimEnv {
    pub fn new(spec: InstanceSpec) -> SimEnv {
        let actions = ground_actions(&spec.domain, &spec.universe);
        let state = spec.initial_state();
        let rng = seed::rng(spec.seed, &[0]);
        SimEnv { spec, actions, state, t: 0, rng }
    }

    pub fn spec(&self) -> &InstanceSpec {
        &self.spec
    }

    pub fn state(&self) -> &RelationalState {
        &self.state
    }
}

impl Env for SimEnv {
    fn domain(&self) -> &Domain {
        &self.spec.domain
    }

    fn universe(&self) -> &ObjectUniverse {
        &self.spec.universe
    }

    fn horizon(&self) -> u32 {
        self.spec.horizon
    }

    fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    fn reset(&mut self, episode_seed: u64) -> RelationalState {
        self.state = self.spec.initial_state();
        self.t = 0;
        self.rng = seed::rng(self.spec.seed, &[episode_seed]);
        self.state.clone()
    }

    fn step(&mut self, action_index: usize) -> Result<StepResult> {
        let action = self.actions.get(action_index).ok_or(Error::Dimension {
            expected: self.actions.len(),
            got: action_index,
        })?;
        let (next_state, reward) = transition(&self.spec, &self.state, action, &mut self.rng)?;
        self.t += 1;
        let done = self.t >= self.spec.horizon;
        self.state = next_state.clone();
        Ok(StepResult { next_state, reward, done })
    }
}
