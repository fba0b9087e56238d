//! Generalized reinforcement learning: tabular Q-learning whose table
//! entries are lazily initialized from the generalized network, which is in
//! turn trained on the updated table values it helped bootstrap. The same
//! loop without a network is the plain Q-learning baseline; leapfrogging
//! chains runs over generated instances of growing size, threading the
//! network (and replay buffer) through all of them.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::encode::{EncodingLayout, InputScaler, StateAbstraction};
use crate::env::{DomainKind, Env, SimEnv, generate_instance, sample_state_space};
use crate::net::{NetConfig, QNet, ReplayBuffer, Transition};
use crate::relational::RelationalState;
use crate::{Error, Result, dl, seed};

/// Learning constants for one session.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyper {
    /// Discount factor.
    pub gamma: f64,
    /// Tabular learning rate.
    pub alpha: f64,
    /// Exploration probability.
    pub epsilon: f64,
    /// Per-episode multiplicative decay of epsilon; `None` keeps it fixed.
    pub epsilon_decay: Option<f64>,
    /// Environment steps between network optimization rounds.
    pub train_interval: u32,
    /// Minibatch updates per optimization round.
    pub opt_steps: u32,
    pub minibatch: usize,
    pub buffer_capacity: usize,
    /// Episodes per training run; the stopping criterion.
    pub episode_budget: u32,
    /// Horizon used when generating curriculum instances.
    pub horizon: u32,
    /// Running-max scaling of network inputs (off by default; raw counts
    /// are fed to the network).
    pub normalize_inputs: bool,
    /// Empty the replay buffer at each curriculum stage boundary instead of
    /// carrying it across stages.
    pub clear_buffer_per_stage: bool,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            gamma: 0.9,
            alpha: 0.05,
            epsilon: 0.1,
            epsilon_decay: None,
            train_interval: 32,
            opt_steps: 25,
            minibatch: 32,
            buffer_capacity: 20_000,
            episode_budget: 1250,
            horizon: 40,
            normalize_inputs: false,
            clear_buffer_per_stage: false,
        }
    }
}

impl Hyper {
    /// Discount and learning rate conventions per domain: the
    /// positive-reward domains use `(0.9, 0.05)`, the cost-only domains
    /// `(1.0, 0.3)`.
    pub fn for_domain(kind: DomainKind) -> Hyper {
        let (gamma, alpha) = match kind {
            DomainKind::Sysadmin | DomainKind::Life => (0.9, 0.05),
            DomainKind::Advising | DomainKind::Wildfire => (1.0, 0.3),
        };
        Hyper { gamma, alpha, ..Hyper::default() }
    }

    /// Exploration probability in effect for an episode index.
    pub fn epsilon_at(&self, episode: u32) -> f64 {
        match self.epsilon_decay {
            Some(decay) => self.epsilon * decay.powi(episode as i32),
            None => self.epsilon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.alpha > 0.0
            && self.gamma > 0.0
            && self.gamma <= 1.0
            && self.epsilon >= 0.0
            && self.train_interval > 0
            && self.minibatch > 0
            && self.buffer_capacity > 0;
        if !positive {
            return Err(Error::validation(
                "hyperparameters must be positive (gamma in (0, 1], epsilon >= 0)",
            ));
        }
        Ok(())
    }
}

/// The learned task-specific policy: per state key, one Q-value per ground
/// action index.
#[derive(Debug, Clone, Default)]
pub struct QTable {
    pub values: HashMap<String, Vec<f64>>,
}

impl QTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, state_key: &str, action: usize) -> Option<f64> {
        self.values.get(state_key).and_then(|v| v.get(action)).copied()
    }

    /// Greedy action index for a state, lowest index on ties.
    pub fn greedy(&self, state_key: &str) -> Option<usize> {
        let values = self.values.get(state_key)?;
        let mut best = 0;
        for (i, v) in values.iter().enumerate() {
            if *v > values[best] {
                best = i;
            }
        }
        Some(best)
    }
}

/// Per-episode training record, one CSV row in the harness output.
#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub episode: u32,
    pub ret: f64,
    pub epsilon: f64,
    /// Mean minibatch loss over the optimization rounds that ran during the
    /// episode; `None` when none did.
    pub loss: Option<f64>,
}

/// Everything a training run produces.
pub struct GrlOutcome {
    pub q_table: QTable,
    pub net: QNet,
    pub scaler: InputScaler,
    pub episodes: Vec<EpisodeRecord>,
    /// Number of lazy table initializations performed; equals the number of
    /// table entries, since no pair is ever initialized twice.
    pub init_events: u64,
}

struct StateEntry {
    abstraction: StateAbstraction,
    values: Vec<Option<f64>>,
}

/// One warm-started Q-learning run over an environment. Owns the mutable
/// learning state; the network and buffer are borrowed so a curriculum can
/// thread them through successive sessions.
struct Session<'a, E: Env> {
    env: &'a mut E,
    layout: &'a EncodingLayout,
    net: &'a mut QNet,
    buffer: &'a mut ReplayBuffer,
    scaler: &'a mut InputScaler,
    hyper: &'a Hyper,
    table: HashMap<String, StateEntry>,
    rng: ChaCha8Rng,
    init_events: u64,
    steps: u64,
    input_scratch: Vec<f64>,
    batch_scratch: Vec<f64>,
    target_scratch: Vec<f64>,
}

impl<'a, E: Env> Session<'a, E> {
    fn new(
        env: &'a mut E,
        layout: &'a EncodingLayout,
        net: &'a mut QNet,
        buffer: &'a mut ReplayBuffer,
        scaler: &'a mut InputScaler,
        hyper: &'a Hyper,
        session_seed: u64,
    ) -> Result<Session<'a, E>> {
        layout.check_domain(env.domain())?;
        if net.input_len() != layout.input_len() {
            return Err(Error::Dimension {
                expected: layout.input_len(),
                got: net.input_len(),
            });
        }
        hyper.validate()?;
        Ok(Session {
            env,
            layout,
            net,
            buffer,
            scaler,
            hyper,
            table: HashMap::new(),
            rng: seed::rng(session_seed, &[0]),
            init_events: 0,
            steps: 0,
            input_scratch: Vec::new(),
            batch_scratch: Vec::new(),
            target_scratch: Vec::new(),
        })
    }

    /// Table entry for a state, created with empty values on first sight.
    fn ensure_entry(&mut self, state: &RelationalState) -> Result<String> {
        let key = state.canonical_key();
        if !self.table.contains_key(&key) {
            let abstraction = self.layout.abstract_state(state, self.env.universe())?;
            self.scaler.observe(&abstraction.state_vector);
            let values = vec![None; self.env.actions().len()];
            self.table.insert(key.clone(), StateEntry { abstraction, values });
        }
        Ok(key)
    }

    /// Q(s, a), initializing the entry from the network exactly once.
    fn q_value(&mut self, key: &str, action: usize) -> Result<f64> {
        let entry = self.table.get(key).expect("entry ensured before lookup");
        if let Some(v) = entry.values[action] {
            return Ok(v);
        }
        let avec = self.layout.encode_action_with(
            &entry.abstraction,
            &self.env.actions()[action],
            self.env.universe(),
        )?;
        self.layout.write_input(&entry.abstraction.state_vector, &avec, &mut self.input_scratch);
        self.scaler.apply(&mut self.input_scratch);
        let v = self.net.predict(&self.input_scratch)?;
        self.table.get_mut(key).unwrap().values[action] = Some(v);
        self.init_events += 1;
        Ok(v)
    }

    fn max_q(&mut self, key: &str) -> Result<f64> {
        let n = self.env.actions().len();
        let mut best = f64::NEG_INFINITY;
        for a in 0..n {
            best = best.max(self.q_value(key, a)?);
        }
        Ok(best)
    }

    /// Epsilon-greedy action selection with uniform random tie-breaking.
    fn select_action(&mut self, key: &str, epsilon: f64) -> Result<usize> {
        let n = self.env.actions().len();
        if self.rng.gen_bool(epsilon.clamp(0.0, 1.0)) {
            return Ok(self.rng.gen_range(0..n));
        }
        let mut best = f64::NEG_INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for a in 0..n {
            let v = self.q_value(key, a)?;
            if v > best {
                best = v;
                ties.clear();
                ties.push(a);
            } else if v == best {
                ties.push(a);
            }
        }
        Ok(ties[self.rng.gen_range(0..ties.len())])
    }

    /// The Q-learning update. Returns the temporal-difference error and
    /// appends `(sbar, abar, updated Q)` to the replay buffer.
    fn td_update(
        &mut self,
        state_key: &str,
        action: usize,
        reward: f64,
        next_state: &RelationalState,
    ) -> Result<f64> {
        let next_key = self.ensure_entry(next_state)?;
        let q_sa = self.q_value(state_key, action)?;
        let max_next = self.max_q(&next_key)?;
        let delta = reward + self.hyper.gamma * max_next - q_sa;
        let updated = q_sa + self.hyper.alpha * delta;
        let entry = self.table.get_mut(state_key).unwrap();
        entry.values[action] = Some(updated);

        let entry = self.table.get(state_key).unwrap();
        let avec = self.layout.encode_action_with(
            &entry.abstraction,
            &self.env.actions()[action],
            self.env.universe(),
        )?;
        self.buffer.push(Transition {
            state: entry.abstraction.state_vector.clone(),
            action: avec,
            target: updated,
        });
        Ok(delta)
    }

    /// `opt_steps` minibatch updates; returns the mean pre-step loss.
    fn optimize(&mut self) -> Result<f64> {
        let mut total = 0.0;
        let input_len = self.layout.input_len();
        for _ in 0..self.hyper.opt_steps {
            let batch = self.buffer.sample(self.hyper.minibatch, &mut self.rng)?;
            self.batch_scratch.clear();
            self.target_scratch.clear();
            for t in &batch {
                self.layout.write_input(&t.state, &t.action, &mut self.input_scratch);
                self.scaler.apply(&mut self.input_scratch);
                self.batch_scratch.extend_from_slice(&self.input_scratch);
                self.target_scratch.push(t.target);
            }
            debug_assert_eq!(self.batch_scratch.len(), self.target_scratch.len() * input_len);
            total += self.net.train_minibatch(
                &self.batch_scratch,
                &self.target_scratch,
                self.net.config().learning_rate,
            )?;
        }
        Ok(total / self.hyper.opt_steps.max(1) as f64)
    }

    fn run(&mut self, run_seed: u64) -> Result<(Vec<EpisodeRecord>, QTable)> {
        let mut records = Vec::with_capacity(self.hyper.episode_budget as usize);
        for episode in 0..self.hyper.episode_budget {
            let epsilon = self.hyper.epsilon_at(episode);
            let mut state = self.env.reset(seed::derive(run_seed, &[1, episode as u64]));
            let mut key = self.ensure_entry(&state)?;
            let mut ret = 0.0;
            let mut losses = Vec::new();
            loop {
                let action = self.select_action(&key, epsilon)?;
                let step = self.env.step(action)?;
                ret += step.reward;
                self.td_update(&key, action, step.reward, &step.next_state)?;
                self.steps += 1;
                if self.steps.is_multiple_of(self.hyper.train_interval as u64) {
                    losses.push(self.optimize()?);
                }
                state = step.next_state;
                key = state.canonical_key();
                if step.done {
                    break;
                }
            }
            let loss = if losses.is_empty() {
                None
            } else {
                Some(losses.iter().sum::<f64>() / losses.len() as f64)
            };
            records.push(EpisodeRecord { episode, ret, epsilon, loss });
        }
        let values = self
            .table
            .iter()
            .map(|(k, e)| {
                (k.clone(), e.values.iter().map(|v| v.unwrap_or(0.0)).collect::<Vec<f64>>())
            })
            .collect();
        Ok((records, QTable { values }))
    }
}

/// Warm-started Q-learning on one environment: the network initializes the
/// table lazily, every update feeds the replay buffer, and the network
/// trains every `train_interval` steps. Returns the task policy and the
/// updated network.
///
/// Episodes run for the environment's horizon, so per-episode returns are
/// bounded by it even with an undiscounted `gamma` of 1. The update always
/// bootstraps through episode boundaries (the horizon is a reset, not an
/// absorbing terminal).
pub fn run_grl<E: Env>(
    env: &mut E,
    layout: &EncodingLayout,
    mut net: QNet,
    hyper: &Hyper,
    run_seed: u64,
) -> Result<GrlOutcome> {
    let mut buffer = ReplayBuffer::new(hyper.buffer_capacity);
    let mut scaler = InputScaler::new(hyper.normalize_inputs, layout.num_features());
    let (records, q_table, init_events) =
        run_stage(env, layout, &mut net, &mut buffer, &mut scaler, hyper, run_seed)?;
    Ok(GrlOutcome { q_table, net, scaler, episodes: records, init_events })
}

fn run_stage<E: Env>(
    env: &mut E,
    layout: &EncodingLayout,
    net: &mut QNet,
    buffer: &mut ReplayBuffer,
    scaler: &mut InputScaler,
    hyper: &Hyper,
    run_seed: u64,
) -> Result<(Vec<EpisodeRecord>, QTable, u64)> {
    let mut session = Session::new(env, layout, net, buffer, scaler, hyper, run_seed)?;
    let (records, q_table) = session.run(run_seed)?;
    let init_events = session.init_events;
    Ok((records, q_table, init_events))
}

/// Plain tabular Q-learning: zero-initialized table, no network, optional
/// per-episode epsilon decay.
pub fn run_qlearning_baseline<E: Env>(
    env: &mut E,
    hyper: &Hyper,
    run_seed: u64,
) -> Result<(QTable, Vec<EpisodeRecord>)> {
    hyper.validate()?;
    let mut table: HashMap<String, Vec<f64>> = HashMap::new();
    let mut rng = seed::rng(run_seed, &[0]);
    let n = env.actions().len();
    let mut records = Vec::with_capacity(hyper.episode_budget as usize);
    for episode in 0..hyper.episode_budget {
        let epsilon = hyper.epsilon_at(episode);
        let state = env.reset(seed::derive(run_seed, &[1, episode as u64]));
        let mut key = state.canonical_key();
        let mut ret = 0.0;
        loop {
            table.entry(key.clone()).or_insert_with(|| vec![0.0; n]);
            let action = if rng.gen_bool(epsilon.clamp(0.0, 1.0)) {
                rng.gen_range(0..n)
            } else {
                let values = &table[&key];
                let best = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let ties: Vec<usize> =
                    (0..n).filter(|&a| values[a] == best).collect();
                ties[rng.gen_range(0..ties.len())]
            };
            let step = env.step(action)?;
            ret += step.reward;
            let next_key = step.next_state.canonical_key();
            let max_next = table
                .entry(next_key.clone())
                .or_insert_with(|| vec![0.0; n])
                .iter()
                .cloned()
                .fold(f64::NEG_INFINITY, f64::max);
            let entry = table.get_mut(&key).unwrap();
            let delta = step.reward + hyper.gamma * max_next - entry[action];
            entry[action] += hyper.alpha * delta;
            key = next_key;
            if step.done {
                break;
            }
        }
        records.push(EpisodeRecord { episode, ret, epsilon, loss: None });
    }
    Ok((QTable { values: table }, records))
}

/// One rung of a curriculum.
#[derive(Debug, Clone)]
pub struct CurriculumStage {
    pub domain_name: String,
    pub size_params: Vec<usize>,
    pub episode_budget: u32,
}

/// Feature synthesis settings for the curriculum driver.
#[derive(Debug, Clone)]
pub struct FeatureGenConfig {
    /// Grammar complexity bound.
    pub k: usize,
    /// Random episodes used to sample the state space of the first stage.
    pub sample_episodes: u32,
    pub net: NetConfig,
}

impl Default for FeatureGenConfig {
    fn default() -> Self {
        FeatureGenConfig { k: 5, sample_episodes: 100, net: NetConfig::default() }
    }
}

/// What one curriculum stage produced.
pub struct StageOutcome {
    pub label: String,
    pub episodes: Vec<EpisodeRecord>,
    pub q_table: QTable,
}

pub struct LeapfrogOutcome {
    pub net: QNet,
    pub layout: EncodingLayout,
    pub scaler: InputScaler,
    pub stages: Vec<StageOutcome>,
}

/// Leapfrogging: generates each stage's instance, runs warm-started
/// Q-learning on it, and threads the network (and, unless cleared, the
/// replay buffer) through the stages. Features are enumerated once, from
/// the sampled state space of the first, smallest stage.
pub fn run_leapfrog(
    stages: &[CurriculumStage],
    features: &FeatureGenConfig,
    hyper: &Hyper,
    run_seed: u64,
) -> Result<LeapfrogOutcome> {
    if stages.is_empty() {
        return Err(Error::validation("leapfrogging needs at least one stage"));
    }
    if stages.iter().any(|s| s.domain_name != stages[0].domain_name) {
        return Err(Error::validation("all curriculum stages must share one domain"));
    }

    let specs: Vec<_> = stages
        .iter()
        .enumerate()
        .map(|(i, stage)| {
            let mut spec = generate_instance(
                &stage.domain_name,
                &stage.size_params,
                seed::derive(run_seed, &[2, i as u64]),
            )?;
            spec.horizon = hyper.horizon;
            Ok(spec)
        })
        .collect::<Result<Vec<_>>>()?;

    let first = &specs[0];
    let samples =
        sample_state_space(first, features.sample_episodes, seed::derive(run_seed, &[3]));
    let feature_list =
        dl::enumerate_features(&first.domain, &first.universe, &samples, features.k)?;
    let layout = EncodingLayout::new(first.domain.clone(), feature_list)?;

    let mut net =
        QNet::new(layout.input_len(), features.net.clone(), seed::derive(run_seed, &[4]));
    let mut buffer = ReplayBuffer::new(hyper.buffer_capacity);
    let mut scaler = InputScaler::new(hyper.normalize_inputs, layout.num_features());

    let mut outcomes = Vec::with_capacity(specs.len());
    for (i, spec) in specs.iter().enumerate() {
        if hyper.clear_buffer_per_stage {
            buffer.clear();
        }
        let stage_hyper = Hyper { episode_budget: stages[i].episode_budget, ..hyper.clone() };
        let mut env = SimEnv::new(spec.clone());
        let (episodes, q_table, _) = run_stage(
            &mut env,
            &layout,
            &mut net,
            &mut buffer,
            &mut scaler,
            &stage_hyper,
            seed::derive(run_seed, &[5, i as u64]),
        )?;
        outcomes.push(StageOutcome { label: spec.label(), episodes, q_table });
    }
    Ok(LeapfrogOutcome { net, layout, scaler, stages: outcomes })
}
