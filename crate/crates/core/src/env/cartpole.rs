//! Cart-pole balancing with the classic-control physics: a pole hinged to a
//! cart on a frictionless track, pushed left or right with a fixed-magnitude
//! force, integrated with explicit Euler at 0.02 s. Episodes end when the
//! cart leaves ±2.4, the pole tilts past 12°, or 200 steps elapse; every
//! step (including the last) is worth +1 reward.

use rand::Rng;

use super::{EnvError, StepResult};
use crate::scalar::{real, Scalar};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
/// Half the pole length.
const LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = MASS_POLE * LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;
const X_LIMIT: f64 = 2.4;
const THETA_LIMIT: f64 = 12.0 * std::f64::consts::PI / 180.0;
const MAX_STEPS: usize = 200;
const RESET_BOUND: f64 = 0.05;

/// State layout: `[x, x_dot, theta, theta_dot]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CartPole<T> {
    state: [T; 4],
    steps: usize,
    done: bool,
}

impl<T: Scalar> CartPole<T> {
    pub fn new() -> Self {
        Self {
            state: [T::zero(); 4],
            steps: 0,
            done: true, // unusable until reset
        }
    }

    /// Draws every state component from `U[-0.05, 0.05)`.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> [T; 4] {
        let lo = real::<T>(-RESET_BOUND);
        let hi = real::<T>(RESET_BOUND);
        for v in self.state.iter_mut() {
            *v = rng.gen_range(lo..hi);
        }
        self.steps = 0;
        self.done = false;
        self.state
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult<T>, EnvError> {
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        if action > 1 {
            return Err(EnvError::InvalidAction {
                action,
                n_actions: 2,
            });
        }
        let [x, x_dot, theta, theta_dot] = self.state;
        let force = if action == 1 {
            real::<T>(FORCE_MAG)
        } else {
            real::<T>(-FORCE_MAG)
        };
        let cos_theta = theta.cos();
        let sin_theta = theta.sin();
        let total_mass = real::<T>(TOTAL_MASS);
        let pml = real::<T>(POLE_MASS_LENGTH);
        let temp = (force + pml * theta_dot * theta_dot * sin_theta) / total_mass;
        let theta_acc = (real::<T>(GRAVITY) * sin_theta - cos_theta * temp)
            / (real::<T>(LENGTH)
                * (real::<T>(4.0 / 3.0) - real::<T>(MASS_POLE) * cos_theta * cos_theta / total_mass));
        let x_acc = temp - pml * theta_acc * cos_theta / total_mass;

        // Explicit Euler with the derivatives from the pre-step state.
        let tau = real::<T>(TAU);
        self.state = [
            x + tau * x_dot,
            x_dot + tau * x_acc,
            theta + tau * theta_dot,
            theta_dot + tau * theta_acc,
        ];
        self.steps += 1;

        let out_of_bounds = self.state[0].abs() > real::<T>(X_LIMIT)
            || self.state[2].abs() > real::<T>(THETA_LIMIT);
        self.done = out_of_bounds || self.steps >= MAX_STEPS;
        Ok(StepResult {
            observation: self.state,
            reward: T::one(),
            done: self.done,
        })
    }

    pub fn observation(&self) -> [T; 4] {
        self.state
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn steps(&self) -> usize {
        self.steps
    }
}

impl<T: Scalar> Default for CartPole<T> {
    fn default() -> Self {
        Self::new()
    }
}
