//! Acrobot swing-up with the classic-control physics: a two-link pendulum
//! actuated only at the elbow, integrated with one fourth-order Runge-Kutta
//! step of 0.2 s per action. The goal is to swing the free end above the
//! pivot by one link length; every step costs -1 until the goal step, which
//! is free. Episodes truncate after 500 steps.
//!
//! Dynamics follow the standard textbook formulation with both link masses
//! and lengths 1, centers of mass at 0.5, and unit moments of inertia.

use rand::Rng;

use super::{EnvError, StepResult};
use crate::scalar::{real, Scalar};

const LINK_LENGTH_1: f64 = 1.0;
const LINK_MASS_1: f64 = 1.0;
const LINK_MASS_2: f64 = 1.0;
const LINK_COM_1: f64 = 0.5;
const LINK_COM_2: f64 = 0.5;
const LINK_MOI: f64 = 1.0;
const GRAVITY: f64 = 9.8;
const DT: f64 = 0.2;
/// Angular velocity bounds: |omega1| <= 4 pi, |omega2| <= 9 pi.
const MAX_VEL_1: f64 = 4.0 * std::f64::consts::PI;
const MAX_VEL_2: f64 = 9.0 * std::f64::consts::PI;
const MAX_STEPS: usize = 500;
const RESET_BOUND: f64 = 0.1;

/// State layout: `[theta1, theta2, omega1, omega2]`, angles wrapped to
/// `[-pi, pi)`. `theta1 = 0` points the first link straight down.
#[derive(Debug, Clone, PartialEq)]
pub struct Acrobot<T> {
    state: [T; 4],
    steps: usize,
    done: bool,
}

impl<T: Scalar> Acrobot<T> {
    pub fn new() -> Self {
        Self {
            state: [T::zero(); 4],
            steps: 0,
            done: true, // unusable until reset
        }
    }

    /// Draws every state component from `U[-0.1, 0.1)`.
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

    /// Actions 0, 1, 2 apply elbow torques -1, 0, +1.
    pub fn step(&mut self, action: usize) -> Result<StepResult<T>, EnvError> {
        if self.done {
            return Err(EnvError::StepAfterDone);
        }
        if action > 2 {
            return Err(EnvError::InvalidAction {
                action,
                n_actions: 3,
            });
        }
        let torque = real::<T>(action as f64 - 1.0);

        // One RK4 step with the torque held constant throughout.
        let h = real::<T>(DT);
        let half = real::<T>(0.5);
        let y = self.state;
        let k1 = dsdt(y, torque);
        let k2 = dsdt(add_scaled(y, k1, half * h), torque);
        let k3 = dsdt(add_scaled(y, k2, half * h), torque);
        let k4 = dsdt(add_scaled(y, k3, h), torque);
        let sixth = h / real::<T>(6.0);
        let mut ns = [T::zero(); 4];
        for i in 0..4 {
            ns[i] = y[i]
                + sixth * (k1[i] + real::<T>(2.0) * k2[i] + real::<T>(2.0) * k3[i] + k4[i]);
        }

        ns[0] = wrap_angle(ns[0]);
        ns[1] = wrap_angle(ns[1]);
        ns[2] = clamp_abs(ns[2], real::<T>(MAX_VEL_1));
        ns[3] = clamp_abs(ns[3], real::<T>(MAX_VEL_2));
        self.state = ns;
        self.steps += 1;

        let at_goal = Self::terminal(self.state);
        self.done = at_goal || self.steps >= MAX_STEPS;
        Ok(StepResult {
            observation: self.state,
            reward: if at_goal { T::zero() } else { -T::one() },
            done: self.done,
        })
    }

    /// Goal test: the tip height `-cos(theta1) - cos(theta1 + theta2)`
    /// exceeds one link length above the pivot.
    pub fn terminal(state: [T; 4]) -> bool {
        -state[0].cos() - (state[0] + state[1]).cos() > T::one()
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

impl<T: Scalar> Default for Acrobot<T> {
    fn default() -> Self {
        Self::new()
    }
}

fn add_scaled<T: Scalar>(y: [T; 4], k: [T; 4], s: T) -> [T; 4] {
    [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]]
}

/// Time derivative of `[theta1, theta2, omega1, omega2]` under elbow torque
/// `a`, from the manipulator equations of the two-link pendulum.
fn dsdt<T: Scalar>(s: [T; 4], a: T) -> [T; 4] {
    let m1 = real::<T>(LINK_MASS_1);
    let m2 = real::<T>(LINK_MASS_2);
    let l1 = real::<T>(LINK_LENGTH_1);
    let lc1 = real::<T>(LINK_COM_1);
    let lc2 = real::<T>(LINK_COM_2);
    let moi = real::<T>(LINK_MOI);
    let g = real::<T>(GRAVITY);
    let half_pi = T::FRAC_PI_2();
    let two = real::<T>(2.0);

    let [theta1, theta2, omega1, omega2] = s;
    let d1 = m1 * lc1 * lc1
        + m2 * (l1 * l1 + lc2 * lc2 + two * l1 * lc2 * theta2.cos())
        + moi
        + moi;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + moi;
    let phi2 = m2 * lc2 * g * (theta1 + theta2 - half_pi).cos();
    let phi1 = -m2 * l1 * lc2 * omega2 * omega2 * theta2.sin()
        - two * m2 * l1 * lc2 * omega2 * omega1 * theta2.sin()
        + (m1 * lc1 + m2 * l1) * g * (theta1 - half_pi).cos()
        + phi2;
    let alpha2 = (a + (d2 / d1) * phi1 - m2 * l1 * lc2 * omega1 * omega1 * theta2.sin() - phi2)
        / (m2 * lc2 * lc2 + moi - d2 * d2 / d1);
    let alpha1 = -(d2 * alpha2 + phi1) / d1;
    [omega1, omega2, alpha1, alpha2]
}

/// Wraps an angle into `[-pi, pi)`.
fn wrap_angle<T: Scalar>(x: T) -> T {
    let pi = T::PI();
    let two_pi = pi + pi;
    let mut r = (x + pi) % two_pi;
    if r < T::zero() {
        r += two_pi;
    }
    r - pi
}

fn clamp_abs<T: Scalar>(x: T, bound: T) -> T {
    x.max(-bound).min(bound)
}
