//! Deep Q-learning with a quantum-circuit function approximator: replay
//! buffer, epsilon-greedy exploration with per-episode exponential decay, a
//! target network, Adam with per-group learning rates, and full gradient
//! instrumentation (every update logs its step, loss, and raw gradient).
//!
//! One agent consumes exactly one seeded RNG stream: parameter
//! initialization first, then resets, exploration draws, and batch sampling
//! in step order. Re-running a seed reproduces the entire run bit for bit.
//!
//! Solving is judged on a trailing 100-episode window. Once the threshold is
//! reached the agent switches to greedy action selection and stops learning
//! (no pushes, updates, or target syncs), but keeps playing out the
//! configured number of episodes so every run logs the same episode count.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ansatz::{preprocess, ModelError, ModelSpec, ParamGroup, ParamSet};
use crate::autodiff::{adjoint_q_grad, GradError, GradientVector};
use crate::env::{EnvError, EnvKind, Environment};
use crate::scalar::{real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grad(#[from] GradError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("invalid training configuration: {field}")]
    InvalidConfig { field: &'static str },
    #[error("non-finite loss at step {step}")]
    NonFiniteLoss { step: u64 },
    #[error("non-finite gradient entry at step {step}")]
    NonFiniteGradient { step: u64 },
}

/// One replay-buffer entry. States are stored preprocessed — the features
/// the circuit actually saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition<T> {
    pub state: [T; 4],
    pub action: usize,
    pub reward: T,
    pub next_state: [T; 4],
    pub done: bool,
}

/// Bounded FIFO experience store with uniform sampling without replacement.
#[derive(Debug, Clone)]
pub struct ReplayBuffer<T> {
    capacity: usize,
    items: VecDeque<Transition<T>>,
}

impl<T: Scalar> ReplayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay buffer needs capacity");
        Self {
            capacity,
            items: VecDeque::with_capacity(capacity),
        }
    }

    /// Appends a transition, evicting the oldest once full.
    pub fn push(&mut self, t: Transition<T>) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Draws `batch` distinct transitions uniformly at random.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, batch: usize) -> Vec<&Transition<T>> {
        assert!(batch <= self.items.len(), "batch larger than buffer");
        rand::seq::index::sample(rng, self.items.len(), batch)
            .iter()
            .map(|i| &self.items[i])
            .collect()
    }
}

/// Exploration schedule `eps(episode) = max(eps_min, eps_start *
/// eps_decay^episode)`, a pure function of the 0-based episode index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub decay: f64,
    pub min: f64,
}

impl EpsilonSchedule {
    pub fn value(&self, episode: usize) -> f64 {
        (self.start * self.decay.powi(episode as i32)).max(self.min)
    }
}

/// Adam with bias correction and a per-index learning rate (parameter groups
/// learn at different speeds: output weights much faster than angles).
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    lr: Vec<T>,
    m: Vec<T>,
    v: Vec<T>,
    t: i32,
    beta1: T,
    beta2: T,
    eps: T,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(lr: Vec<T>, beta1: T, beta2: T, eps: T) -> Self {
        let n = lr.len();
        Self {
            lr,
            m: vec![T::zero(); n],
            v: vec![T::zero(); n],
            t: 0,
            beta1,
            beta2,
            eps,
        }
    }

    /// One optimizer step: `params -= lr * m_hat / (sqrt(v_hat) + eps)`.
    pub fn step(&mut self, params: &mut [T], grad: &[T]) {
        assert_eq!(params.len(), self.lr.len());
        assert_eq!(grad.len(), self.lr.len());
        self.t += 1;
        let one = T::one();
        let bc1 = one - self.beta1.powi(self.t);
        let bc2 = one - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (one - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (one - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr[i] * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Everything a training run needs besides the model and the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig<T> {
    pub env: EnvKind,
    pub episodes: usize,
    pub gamma: T,
    pub batch_size: usize,
    /// Gradient step every this many environment steps.
    pub update_every: usize,
    /// Target-network copy every this many environment steps.
    pub target_sync_every: usize,
    pub buffer_capacity: usize,
    pub epsilon: EpsilonSchedule,
    pub lr_rotational: T,
    pub lr_input: T,
    pub lr_output: T,
    /// Trailing-window return that counts as solving, if any.
    pub solve_threshold: Option<T>,
    /// Width of the trailing window for the solve check.
    pub solve_window: usize,
}

impl<T: Scalar> TrainConfig<T> {
    /// Reference hyperparameters for CartPole: small batch, an update and a
    /// target sync every step.
    pub fn cartpole() -> Self {
        Self {
            env: EnvKind::CartPole,
            episodes: 500,
            gamma: real(0.99),
            batch_size: 16,
            update_every: 1,
            target_sync_every: 1,
            buffer_capacity: 10_000,
            epsilon: EpsilonSchedule {
                start: 1.0,
                decay: 0.99,
                min: 0.01,
            },
            lr_rotational: real(0.001),
            lr_input: real(0.001),
            lr_output: real(0.1),
            solve_threshold: Some(real(195.0)),
            solve_window: 100,
        }
    }

    /// Reference hyperparameters for Acrobot: bigger batch and buffer,
    /// sparser updates, slow target sync, no solve threshold.
    pub fn acrobot() -> Self {
        Self {
            env: EnvKind::Acrobot,
            episodes: 1000,
            gamma: real(0.99),
            batch_size: 32,
            update_every: 5,
            target_sync_every: 250,
            buffer_capacity: 50_000,
            epsilon: EpsilonSchedule {
                start: 1.0,
                decay: 0.99,
                min: 0.01,
            },
            lr_rotational: real(0.001),
            lr_input: real(0.001),
            lr_output: real(0.1),
            solve_threshold: None,
            solve_window: 100,
        }
    }

    pub fn for_env(env: EnvKind) -> Self {
        match env {
            EnvKind::CartPole => Self::cartpole(),
            EnvKind::Acrobot => Self::acrobot(),
        }
    }

    /// Checks every hyperparameter bound and the model/environment fit,
    /// naming the offending field. Called by [`run_training`]; callers that
    /// stage configs (the experiment runner) use it to fail before work
    /// starts.
    pub fn validate(&self, model: &ModelSpec<T>) -> Result<(), TrainError> {
        let fail = |field| Err(TrainError::InvalidConfig { field });
        if self.episodes == 0 {
            return fail("episodes");
        }
        if !(self.gamma >= T::zero() && self.gamma <= T::one()) {
            return fail("gamma");
        }
        if self.batch_size == 0 || self.batch_size > self.buffer_capacity {
            return fail("batch_size");
        }
        if self.update_every == 0 {
            return fail("update_every");
        }
        if self.target_sync_every == 0 {
            return fail("target_sync_every");
        }
        if !(0.0..=1.0).contains(&self.epsilon.start)
            || !(0.0..=1.0).contains(&self.epsilon.decay)
            || !(0.0..=1.0).contains(&self.epsilon.min)
        {
            return fail("epsilon");
        }
        if !(self.lr_rotational > T::zero()) {
            return fail("lr_rotational");
        }
        if !(self.lr_input > T::zero()) {
            return fail("lr_input");
        }
        if !(self.lr_output > T::zero()) {
            return fail("lr_output");
        }
        if self.solve_threshold.is_some() && self.solve_window == 0 {
            return fail("solve_window");
        }
        if model.feature_dim() != self.env.observation_dim() {
            return fail("model feature_dim");
        }
        if model.n_actions() != self.env.n_actions() {
            return fail("model n_actions");
        }
        Ok(())
    }

    /// Per-flat-index learning rates in layout order.
    pub fn lr_vector(&self, model: &ModelSpec<T>) -> Vec<T> {
        let layout = model.layout();
        (0..layout.trainable())
            .map(|i| match layout.group_of(i) {
                ParamGroup::Rotational => self.lr_rotational,
                ParamGroup::Input => self.lr_input,
                ParamGroup::Output => self.lr_output,
            })
            .collect()
    }
}

/// One logged gradient step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateRecord<T> {
    /// 1-based global environment step at which the update ran.
    pub step: u64,
    pub loss: T,
    /// Raw loss gradient over the flat trainable layout, before Adam.
    pub grad: Vec<T>,
}

/// Complete record of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog<T> {
    pub seed: u64,
    pub episode_returns: Vec<T>,
    pub episode_lengths: Vec<usize>,
    pub updates: Vec<UpdateRecord<T>>,
    pub solved_at_episode: Option<usize>,
}

/// Greedy argmax with ties resolved to the lowest action index.
pub fn argmax<T: Scalar>(q: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in q.iter().enumerate().skip(1) {
        if *v > q[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy: explore with probability `eps`, otherwise argmax. Always
/// consumes the same number of RNG draws for a given branch taken.
pub fn select_action<T: Scalar, R: Rng + ?Sized>(q: &[T], eps: f64, rng: &mut R) -> usize {
    if rng.gen::<f64>() < eps {
        rng.gen_range(0..q.len())
    } else {
        argmax(q)
    }
}

/// TD(0) targets from the target network: `r` on terminal transitions,
/// `r + gamma * max_a Q_target(s')` otherwise.
pub fn td_targets<T: Scalar>(
    model: &ModelSpec<T>,
    target_params: &ParamSet<T>,
    batch: &[&Transition<T>],
    gamma: T,
) -> Result<Vec<T>, TrainError> {
    batch
        .iter()
        .map(|t| {
            if t.done {
                Ok(t.reward)
            } else {
                let q_next = model.q_values(target_params, &t.next_state)?;
                let best = q_next
                    .iter()
                    .copied()
                    .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
                Ok(t.reward + gamma * best)
            }
        })
        .collect()
}

/// Mean-squared TD loss and its exact gradient over the flat trainable
/// vector: `L = mean_i (Q(s_i, a_i) - y_i)^2`, with gradients flowing only
/// through the taken action's Q-value (targets are constants).
pub fn batch_loss_grad<T: Scalar>(
    model: &ModelSpec<T>,
    params: &ParamSet<T>,
    target_params: &ParamSet<T>,
    batch: &[&Transition<T>],
    gamma: T,
) -> Result<(T, GradientVector<T>), TrainError> {
    let targets = td_targets(model, target_params, batch, gamma)?;
    let layout = model.layout();
    let mut loss = T::zero();
    let mut grad = vec![T::zero(); layout.trainable()];
    let scale = real::<T>(2.0) / real::<T>(batch.len() as f64);
    for (t, y) in batch.iter().zip(targets) {
        let (q, gq) = adjoint_q_grad(model, params, &t.state, t.action)?;
        let resid = q - y;
        loss += resid * resid;
        for (g, gi) in grad.iter_mut().zip(gq) {
            *g += scale * resid * gi;
        }
    }
    loss = loss / real::<T>(batch.len() as f64);
    Ok((loss, grad))
}

/// One optimizer step on a sampled batch. Returns the loss and the raw
/// pre-optimizer gradient (what the instrumentation logs); fails on
/// non-finite values before touching the parameters.
pub fn train_step<T: Scalar>(
    model: &ModelSpec<T>,
    params: &mut ParamSet<T>,
    target_params: &ParamSet<T>,
    batch: &[&Transition<T>],
    gamma: T,
    adam: &mut AdamState<T>,
    step: u64,
) -> Result<(T, GradientVector<T>), TrainError> {
    let (loss, grad) = batch_loss_grad(model, params, target_params, batch, gamma)?;
    if !loss.is_finite() {
        return Err(TrainError::NonFiniteLoss { step });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(TrainError::NonFiniteGradient { step });
    }
    let layout = model.layout();
    let mut flat = params.flat_trainable(layout);
    adam.step(&mut flat, &grad);
    params.assign_flat_trainable(layout, &flat);
    Ok((loss, grad))
}

/// Trains one agent end to end and returns its full log.
pub fn run_training<T: Scalar>(
    model: &ModelSpec<T>,
    cfg: &TrainConfig<T>,
    seed: u64,
) -> Result<RunLog<T>, TrainError> {
    cfg.validate(model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParamSet::init(model, &mut rng);
    let mut target_params = params.clone();
    let mut adam = AdamState::new(
        cfg.lr_vector(model),
        real(0.9),
        real(0.999),
        real(1e-8),
    );
    let mut env = Environment::new(cfg.env);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);

    let mut log = RunLog {
        seed,
        episode_returns: Vec::with_capacity(cfg.episodes),
        episode_lengths: Vec::with_capacity(cfg.episodes),
        updates: Vec::new(),
        solved_at_episode: None,
    };
    let mut global_step: u64 = 0;
    let mut solved = false;

    for episode in 0..cfg.episodes {
        let eps = cfg.epsilon.value(episode);
        let mut state = preprocess(env.reset(&mut rng), cfg.env);
        let mut ep_return = T::zero();
        let mut ep_len = 0usize;

        loop {
            global_step += 1;
            let q = model.q_values(&params, &state)?;
            let action = if solved {
                argmax(&q)
            } else {
                select_action(&q, eps, &mut rng)
            };
            let result = env.step(action)?;
            let next_state = preprocess(result.observation, cfg.env);
            ep_return += result.reward;
            ep_len += 1;

            if !solved {
                buffer.push(Transition {
                    state,
                    action,
                    reward: result.reward,
                    next_state,
                    done: result.done,
                });
                if buffer.len() >= cfg.batch_size && global_step % cfg.update_every as u64 == 0 {
                    let batch = buffer.sample(&mut rng, cfg.batch_size);
                    let (loss, grad) = train_step(
                        model,
                        &mut params,
                        &target_params,
                        &batch,
                        cfg.gamma,
                        &mut adam,
                        global_step,
                    )?;
                    log.updates.push(UpdateRecord {
                        step: global_step,
                        loss,
                        grad,
                    });
                }
                if global_step % cfg.target_sync_every as u64 == 0 {
                    target_params = params.clone();
                }
            }

            state = next_state;
            if result.done {
                break;
            }
        }

        log.episode_returns.push(ep_return);
        log.episode_lengths.push(ep_len);

        if !solved {
            if let Some(threshold) = cfg.solve_threshold {
                let window = cfg.solve_window;
                if log.episode_returns.len() >= window {
                    let tail = &log.episode_returns[log.episode_returns.len() - window..];
                    let mean = tail.iter().copied().sum::<T>() / real::<T>(window as f64);
                    if mean >= threshold {
                        solved = true;
                        log.solved_at_episode = Some(episode);
                    }
                }
            }
        }
    }

    Ok(log)
}
