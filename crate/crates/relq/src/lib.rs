//! Relational reinforcement learning with description-logic abstraction.
//!
//! The crate models MDPs whose states are sets of ground facts over named
//! objects. Description-logic features evaluated on those states produce
//! fixed-size numeric encodings, so a single Q-value network trained on small
//! problem instances can score states and actions of much larger instances of
//! the same domain. On top of that sit a warm-started tabular Q-learner, a
//! leapfrogging curriculum driver, and a zero-shot evaluation harness.
//!
//! Module map:
//! - [`relational`]: domains, objects, facts, states, action grounding.
//! - [`env`]: stochastic simulators for the four benchmark domains, the
//!   instance file format, a problem generator, and state-space sampling.
//! - [`dl`]: the description-logic feature language (syntax, evaluation,
//!   complexity-bounded enumeration).
//! - [`encode`]: abstract state/action vectors fed to the network.
//! - [`net`]: a from-scratch MLP with Adam, the replay buffer, checkpoints.
//! - [`grl`]: generalized RL (warm-started Q-learning that trains the
//!   network as a side effect), the plain Q-learning baseline, leapfrogging.
//! - [`harness`]: experiment configs, zero-shot evaluation, CSV emission.

pub mod dl;
pub mod encode;
pub mod env;
mod error;
pub mod grl;
pub mod harness;
pub mod net;
pub mod relational;
pub mod seed;

pub use error::{Error, Result};
