//! Transition distributions and reward functions of the four domains.
//!
//! Rewards depend only on `(state, action)` and are exactly the closed
//! forms below; all randomness is in the transitions. Per-object random
//! draws happen in universe order, which is what makes trajectories
//! reproducible for a fixed episode stream.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{DomainKind, InstanceSpec};
use crate::Result;
use crate::relational::{GroundAction, GroundFact, RelationalState};

/// Samples a successor state and computes the reward for `(state, action)`.
pub fn transition(
    spec: &InstanceSpec,
    state: &RelationalState,
    action: &GroundAction,
    rng: &mut ChaCha8Rng,
) -> Result<(RelationalState, f64)> {
    action.validate(&spec.domain, &spec.universe)?;
    let r = reward(spec, state, action)?;
    let next = match spec.kind {
        DomainKind::Sysadmin => sysadmin_next(spec, state, action, rng),
        DomainKind::Advising => advising_next(spec, state, action, rng),
        DomainKind::Life => life_next(spec, state, action, rng),
        DomainKind::Wildfire => wildfire_next(spec, state, action, rng),
    };
    Ok((next, r))
}

/// The deterministic reward for `(state, action)`.
pub fn reward(
    spec: &InstanceSpec,
    state: &RelationalState,
    action: &GroundAction,
) -> Result<f64> {
    action.validate(&spec.domain, &spec.universe)?;
    let p = &spec.params;
    Ok(match spec.kind {
        DomainKind::Sysadmin => {
            let up = state.unary_args("running").count() as f64;
            let reboot = if action.schema == "reboot" { p.get("reboot_cost") } else { 0.0 };
            p.get("up_reward") * up - reboot
        }
        DomainKind::Advising => {
            let goal_reached = state
                .unary_args("required")
                .all(|c| state.contains(&GroundFact::new("passed", &[c])));
            if goal_reached {
                0.0
            } else {
                let mut r = -p.get("step_cost");
                if action.schema == "take" {
                    let c = action.args[0].as_str();
                    let taken = state.contains(&GroundFact::new("taken", &[c]));
                    let passed = state.contains(&GroundFact::new("passed", &[c]));
                    if taken && !passed {
                        r -= p.get("retake_cost");
                    }
                }
                r
            }
        }
        DomainKind::Life => {
            let alive = state.unary_args("alive").count() as f64;
            let set = if action.schema == "set_alive" { p.get("set_cost") } else { 0.0 };
            p.get("alive_reward") * alive - set
        }
        DomainKind::Wildfire => {
            let burning = state.unary_args("burning").count() as f64;
            let act = if action.schema == "nop" { 0.0 } else { p.get("action_cost") };
            -p.get("burn_penalty") * burning - act
        }
    })
}

fn holds(state: &RelationalState, pred: &str, obj: &str) -> bool {
    state.contains(&GroundFact::new(pred, &[obj]))
}

/// Successors of `obj` under a binary predicate.
fn successors<'a>(
    state: &'a RelationalState,
    pred: &'a str,
    obj: &'a str,
) -> impl Iterator<Item = &'a str> {
    state.binary_args(pred).filter(move |(x, _)| *x == obj).map(|(_, y)| y)
}

/// A running computer stays up with probability
/// `stay_base + stay_bonus * (1 + running neighbors) / (1 + neighbors)`;
/// a down computer stays down unless rebooted; a reboot always succeeds.
fn sysadmin_next(
    spec: &InstanceSpec,
    state: &RelationalState,
    action: &GroundAction,
    rng: &mut ChaCha8Rng,
) -> RelationalState {
    let p = &spec.params;
    let rebooted = (action.schema == "reboot").then(|| action.args[0].as_str());
    let mut next: RelationalState = spec.static_facts.iter().cloned().collect();
    for c in spec.universe.objects() {
        let up = if Some(c.as_str()) == rebooted {
            true
        } else if holds(state, "running", c) {
            let neighbors: Vec<&str> = successors(state, "link", c).collect();
            let running =
                neighbors.iter().filter(|d| holds(state, "running", d)).count() as f64;
            let stay = p.get("stay_base")
                + p.get("stay_bonus") * (1.0 + running) / (1.0 + neighbors.len() as f64);
            rng.gen_bool(stay.clamp(0.0, 1.0))
        } else {
            false
        };
        if up {
            next.insert(GroundFact::new("running", &[c]));
        }
    }
    next
}

/// Taking a course marks it taken and passes it with probability
/// `pass_base * (1 + passed prerequisites) / (1 + prerequisites)`.
/// Passed and taken marks persist.
fn advising_next(
    spec: &InstanceSpec,
    state: &RelationalState,
    action: &GroundAction,
    rng: &mut ChaCha8Rng,
) -> RelationalState {
    let mut next = state.clone();
    if action.schema == "take" {
        let c = action.args[0].as_str();
        next.insert(GroundFact::new("taken", &[c]));
        if !holds(state, "passed", c) {
            let prereqs: Vec<&str> =
                state.binary_args("prereq").filter(|(_, y)| *y == c).map(|(x, _)| x).collect();
            let passed =
                prereqs.iter().filter(|d| holds(state, "passed", d)).count() as f64;
            let prob = spec.params.get("pass_base") * (1.0 + passed)
                / (1.0 + prereqs.len() as f64);
            if rng.gen_bool(prob.clamp(0.0, 1.0)) {
                next.insert(GroundFact::new("passed", &[c]));
            }
        }
    }
    next
}

/// Conway's rule on the neighbor graph, then each cell's computed value
/// flips with probability `noise`; `set_alive` then forces its cell alive.
fn life_next(
    spec: &InstanceSpec,
    state: &RelationalState,
    action: &GroundAction,
    rng: &mut ChaCha8Rng,
) -> RelationalState {
    let p = &spec.params;
    let noise = p.get("noise").clamp(0.0, 1.0);
    let forced = (action.schema == "set_alive").then(|| action.args[0].as_str());
    let mut next: RelationalState = spec.static_facts.iter().cloned().collect();
    for cell in spec.universe.objects() {
        let alive = holds(state, "alive", cell);
        let live_neighbors = successors(state, "neighbor", cell)
            .filter(|m| holds(state, "alive", m))
            .count();
        let conway = if alive {
            live_neighbors == 2 || live_neighbors == 3
        } else {
            live_neighbors == 3
        };
        let mut value = if rng.gen_bool(noise) { !conway } else { conway };
        if Some(cell.as_str()) == forced {
            value = true;
        }
        if value {
            next.insert(GroundFact::new("alive", &[cell]));
        }
    }
    next
}

/// An unburned fueled cell ignites with probability
/// `1 - exp(-spread_rate * burning neighbors)`; burning persists until
/// `put_out`; `cut_out` removes the cell's fuel so it can never ignite.
fn wildfire_next(
    spec: &InstanceSpec,
    state: &RelationalState,
    action: &GroundAction,
    rng: &mut ChaCha8Rng,
) -> RelationalState {
    let spread = spec.params.get("spread_rate");
    let put_out = (action.schema == "put_out").then(|| action.args[0].as_str());
    let cut_out = (action.schema == "cut_out").then(|| action.args[0].as_str());
    let mut next: RelationalState = spec.static_facts.iter().cloned().collect();
    for cell in spec.universe.objects() {
        let fuel = holds(state, "fuel", cell) && Some(cell.as_str()) != cut_out;
        if fuel {
            next.insert(GroundFact::new("fuel", &[cell]));
        }
        let burning = if Some(cell.as_str()) == put_out {
            false
        } else if holds(state, "burning", cell) {
            true
        } else if holds(state, "fuel", cell) && Some(cell.as_str()) != cut_out {
            let burning_neighbors = successors(state, "neighbor", cell)
                .filter(|m| holds(state, "burning", m))
                .count();
            burning_neighbors > 0
                && rng.gen_bool((1.0 - (-spread * burning_neighbors as f64).exp()).clamp(0.0, 1.0))
        } else {
            false
        };
        if burning {
            next.insert(GroundFact::new("burning", &[cell]));
        }
    }
    next
}
