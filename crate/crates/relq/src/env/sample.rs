//! State-space sampling by uniform-random rollouts. Feature enumeration
//! takes the resulting state set as its input.

use rand::Rng;

use super::{Env, InstanceSpec, SimEnv};
use crate::relational::RelationalState;
use crate::seed;

/// Distinct states visited by `episodes` uniform-random episodes, plus the
/// initial state. The result is sorted by canonical key, so it is a set in
/// a reproducible order.
pub fn sample_state_space(
    spec: &InstanceSpec,
    episodes: u32,
    sample_seed: u64,
) -> Vec<RelationalState> {
    let mut env = SimEnv::new(spec.clone());
    let mut keys = std::collections::BTreeMap::new();
    let s0 = spec.initial_state();
    keys.insert(s0.canonical_key(), s0);
    let mut policy_rng = seed::rng(sample_seed, &[u64::MAX]);
    for ep in 0..episodes {
        env.reset(seed::derive(sample_seed, &[ep as u64]));
        loop {
            let action = policy_rng.gen_range(0..env.actions().len());
            let step = env.step(action).expect("in-range action index");
            keys.entry(step.next_state.canonical_key()).or_insert(step.next_state);
            if step.done {
                break;
            }
        }
    }
    keys.into_values().collect()
}
