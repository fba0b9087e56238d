//! Experience replay over encoded `(state, action, target)` triples.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::encode::{AbstractActionVector, AbstractStateVector};
use crate::{Error, Result};

/// One replay entry: the abstract pair and the tabular Q-value it carried
/// at insertion time.
#[derive(Debug, Clone)]
pub struct Transition {
    pub state: AbstractStateVector,
    pub action: AbstractActionVector,
    pub target: f64,
}

/// Fixed-capacity FIFO buffer.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: VecDeque<Transition>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> ReplayBuffer {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { capacity, entries: VecDeque::with_capacity(capacity.min(1 << 16)) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Appends an entry, evicting the oldest once full.
    pub fn push(&mut self, transition: Transition) {
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(transition);
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.entries.iter()
    }

    /// Uniform minibatch: with replacement while the buffer holds fewer
    /// entries than requested, without replacement otherwise.
    pub fn sample(&self, size: usize, rng: &mut ChaCha8Rng) -> Result<Vec<&Transition>> {
        if self.entries.is_empty() {
            return Err(Error::validation("cannot sample from an empty replay buffer"));
        }
        if size == 0 {
            return Ok(Vec::new());
        }
        let indices: Vec<usize> = if self.entries.len() < size {
            (0..size).map(|_| rng.gen_range(0..self.entries.len())).collect()
        } else {
            rand::seq::index::sample(rng, self.entries.len(), size).into_vec()
        };
        Ok(indices.into_iter().map(|i| &self.entries[i]).collect())
    }
}
