//! Behavioral checks of the learning loop: the learned task policy does
//! the sensible thing on the training instance, and a trained network
//! carries useful preferences to a larger instance with no further
//! learning.

mod common;

use relq::dl;
use relq::encode::EncodingLayout;
use relq::env::{DomainKind, SimEnv, generate_instance, sample_state_space};
use relq::grl::{Hyper, run_grl};
use relq::harness::{evaluate_random, evaluate_zero_shot, welch_one_sided};
use relq::net::QNet;
use relq::relational::{GroundFact, RelationalState, ground_actions};
use relq::seed;

fn sysadmin_layout(spec: &relq::env::InstanceSpec, k: usize) -> EncodingLayout {
    let samples = sample_state_space(spec, 100, 0);
    let features = dl::enumerate_features(&spec.domain, &spec.universe, &samples, k).unwrap();
    EncodingLayout::new(spec.domain.clone(), features).unwrap()
}

/// After a full training budget on a three-computer network, the greedy
/// policy in a state with two machines down reboots a down machine, in at
/// least 9 of 10 seeded runs.
#[test]
fn trained_policy_reboots_down_computers() {
    let spec = generate_instance("sysadmin", &[3], 0).unwrap();
    let layout = sysadmin_layout(&spec, 5);
    let hyper = Hyper::for_domain(DomainKind::Sysadmin);
    let actions = ground_actions(&spec.domain, &spec.universe);

    // all but c0 down, plus the instance topology
    let mut probe: RelationalState = spec.static_facts.iter().cloned().collect();
    probe.insert(GroundFact::new("running", &["c0"]));
    let probe_key = probe.canonical_key();

    let mut good = 0;
    for run in 0..10u64 {
        let net = QNet::new(layout.input_len(), Default::default(), seed::derive(9, &[run]));
        let mut env = SimEnv::new(spec.clone());
        let outcome = run_grl(&mut env, &layout, net, &hyper, seed::derive(10, &[run])).unwrap();
        let choice = outcome
            .q_table
            .greedy(&probe_key)
            .expect("probe state is visited during 1250 episodes");
        let action = &actions[choice];
        let reboots_down = action.schema == "reboot" && action.args[0] != "c0";
        good += reboots_down as usize;
    }
    assert!(good >= 9, "greedy policy rebooted a down computer in only {good}/10 runs");
}

/// A hand-crafted reboot-the-first-down-computer policy on a five-computer
/// instance clearly beats the uniform-random baseline; the evaluation
/// machinery must separate them.
#[test]
fn hand_built_reboot_policy_beats_random() {
    use relq::env::Env;
    let spec = generate_instance("sysadmin", &[5], 6).unwrap();
    let actions = ground_actions(&spec.domain, &spec.universe);
    let mut env = SimEnv::new(spec.clone());
    let episodes = 100;
    let mut returns = Vec::with_capacity(episodes);
    for ep in 0..episodes {
        let mut state = env.reset(seed::derive(23, &[ep as u64]));
        let mut ret = 0.0;
        loop {
            let down = spec
                .universe
                .objects()
                .iter()
                .find(|c| !state.contains(&GroundFact::new("running", &[c])));
            let choice = match down {
                Some(c) => actions
                    .iter()
                    .position(|a| a.schema == "reboot" && &a.args[0] == c)
                    .unwrap(),
                None => actions.iter().position(|a| a.schema == "nop").unwrap(),
            };
            let step = env.step(choice).unwrap();
            ret += step.reward;
            state = step.next_state;
            if step.done {
                break;
            }
        }
        returns.push(ret);
    }
    let random = evaluate_random(&spec, 100, 24).unwrap();
    let test = welch_one_sided(&returns, &random.returns).unwrap();
    assert!(
        relq::harness::mean(&returns) > random.mean && test.p < 1e-6,
        "hand policy {} vs random {} (p = {})",
        relq::harness::mean(&returns),
        random.mean,
        test.p
    );
}

/// A network trained on a three-computer instance, evaluated greedily on a
/// five-computer instance it has never seen, beats the uniform-random
/// policy over 100 episodes each.
#[test]
fn zero_shot_transfer_beats_random_on_larger_instance() {
    let small = generate_instance("sysadmin", &[3], 1).unwrap();
    let layout = sysadmin_layout(&small, 5);
    let hyper = Hyper::for_domain(DomainKind::Sysadmin);
    let net = QNet::new(layout.input_len(), Default::default(), 17);
    let mut env = SimEnv::new(small);
    let outcome = run_grl(&mut env, &layout, net, &hyper, 18).unwrap();

    let big = generate_instance("sysadmin", &[5], 2).unwrap();
    let greedy =
        evaluate_zero_shot(&outcome.net, &layout, &outcome.scaler, &big, 100, 19).unwrap();
    let random = evaluate_random(&big, 100, 20).unwrap();
    let test = welch_one_sided(&greedy.returns, &random.returns).unwrap();
    assert!(
        greedy.mean > random.mean && test.p < 0.01,
        "greedy {} vs random {} (p = {})",
        greedy.mean,
        random.mean,
        test.p
    );
}
