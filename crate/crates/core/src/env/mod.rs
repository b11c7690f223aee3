//! Native control environments with the classic-control dynamics, Euler /
//! RK4 integrators, and reward conventions used by the experiments.
//!
//! Both environments are fully observed (the observation *is* the state),
//! deterministic given a seeded reset, and step-capped. They own no RNG:
//! [`Environment::reset`] draws the initial state from a caller-provided
//! generator so a single per-agent stream covers parameter initialization,
//! resets, and action sampling reproducibly.

mod acrobot;
mod cartpole;

pub use acrobot::Acrobot;
pub use cartpole::CartPole;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

/// Which task to instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    CartPole,
    Acrobot,
}

impl EnvKind {
    /// Size of the discrete action space.
    pub fn n_actions(self) -> usize {
        match self {
            EnvKind::CartPole => 2,
            EnvKind::Acrobot => 3,
        }
    }

    /// Length of the observation vector (both tasks expose four features).
    pub fn observation_dim(self) -> usize {
        4
    }
}

impl std::fmt::Display for EnvKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EnvKind::CartPole => write!(f, "cartpole"),
            EnvKind::Acrobot => write!(f, "acrobot"),
        }
    }
}

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum EnvError {
    #[error("episode is finished; reset before stepping again")]
    StepAfterDone,
    #[error("action {action} out of range for {n_actions} actions")]
    InvalidAction { action: usize, n_actions: usize },
}

/// Outcome of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult<T> {
    pub observation: [T; 4],
    pub reward: T,
    pub done: bool,
}

/// A task instance, dispatching to the concrete dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum Environment<T: Scalar> {
    CartPole(CartPole<T>),
    Acrobot(Acrobot<T>),
}

impl<T: Scalar> Environment<T> {
    /// Creates an environment in the "needs reset" state.
    pub fn new(kind: EnvKind) -> Self {
        match kind {
            EnvKind::CartPole => Environment::CartPole(CartPole::new()),
            EnvKind::Acrobot => Environment::Acrobot(Acrobot::new()),
        }
    }

    pub fn kind(&self) -> EnvKind {
        match self {
            Environment::CartPole(_) => EnvKind::CartPole,
            Environment::Acrobot(_) => EnvKind::Acrobot,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.kind().n_actions()
    }

    /// Draws a fresh initial state and returns its observation.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> [T; 4] {
        match self {
            Environment::CartPole(e) => e.reset(rng),
            Environment::Acrobot(e) => e.reset(rng),
        }
    }

    /// Advances one step. Stepping a finished episode is an error.
    pub fn step(&mut self, action: usize) -> Result<StepResult<T>, EnvError> {
        match self {
            Environment::CartPole(e) => e.step(action),
            Environment::Acrobot(e) => e.step(action),
        }
    }

    /// The current raw observation.
    pub fn observation(&self) -> [T; 4] {
        match self {
            Environment::CartPole(e) => e.observation(),
            Environment::Acrobot(e) => e.observation(),
        }
    }

    pub fn is_done(&self) -> bool {
        match self {
            Environment::CartPole(e) => e.is_done(),
            Environment::Acrobot(e) => e.is_done(),
        }
    }

    /// Steps taken in the current episode.
    pub fn steps(&self) -> usize {
        match self {
            Environment::CartPole(e) => e.steps(),
            Environment::Acrobot(e) => e.steps(),
        }
    }
}
