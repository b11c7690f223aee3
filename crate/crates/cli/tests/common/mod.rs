//! Shared helpers for the integration suites: reference dynamics written
//! independently of the library (textbook manipulator equations solved as
//! explicit 2x2 linear systems by Cramer's rule, with a local RK4), plus
//! random circuit generators and finite-difference oracles.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use vqdqn::ansatz::{EncodingMode, InputScaling, OutputScaling};
use vqdqn::dqn::{td_targets, Transition};
use vqdqn::statevec::ZObservable;
use vqdqn::{ModelSpec64, ParamSet64};

// ---------------------------------------------------------------------------
// Reference dynamics
// ---------------------------------------------------------------------------

/// Solves `[[a, b], [c, d]] x = [e, f]` by Cramer's rule.
fn solve2(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> (f64, f64) {
    let det = a * d - b * c;
    ((e * d - b * f) / det, (a * f - e * c) / det)
}

/// One Euler step of the cart-pole, `[x, v, theta, omega]`, force +-10 N.
///
/// The equations of motion are kept in matrix form: with `M` the total
/// mass, `m` the pole mass, and `l` the half pole length,
///
/// ```text
/// [ M          m l cos(theta) ] [ a     ]   [ F + m l omega^2 sin(theta) ]
/// [ cos(theta) (4/3) l        ] [ alpha ] = [ g sin(theta)               ]
/// ```
pub fn cartpole_reference_step(state: [f64; 4], action: usize) -> [f64; 4] {
    const GRAVITY: f64 = 9.8;
    const CART_MASS: f64 = 1.0;
    const POLE_MASS: f64 = 0.1;
    const HALF_LENGTH: f64 = 0.5;
    const FORCE: f64 = 10.0;
    const TAU: f64 = 0.02;

    let [x, v, theta, omega] = state;
    let force = if action == 1 { FORCE } else { -FORCE };
    let total = CART_MASS + POLE_MASS;
    let (accel, alpha) = solve2(
        total,
        POLE_MASS * HALF_LENGTH * theta.cos(),
        theta.cos(),
        4.0 / 3.0 * HALF_LENGTH,
        force + POLE_MASS * HALF_LENGTH * omega * omega * theta.sin(),
        GRAVITY * theta.sin(),
    );
    [x + TAU * v, v + TAU * accel, theta + TAU * omega, omega + TAU * alpha]
}

/// Angle wrapped into `[-pi, pi)` via the floor form.
fn wrap(x: f64) -> f64 {
    use std::f64::consts::PI;
    x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor()
}

/// Time derivative of the acrobot state `[theta1, theta2, omega1, omega2]`
/// under elbow torque `tau`. The manipulator equations
///
/// ```text
/// [ d1 d2 ] [ alpha1 ]   [ -phi1                          ]
/// [ d2 d3 ] [ alpha2 ] = [ tau - c omega1^2 sin(t2) - phi2 ]
/// ```
///
/// are solved directly, with `d3 = m2 lc2^2 + I2` and
/// `c = m2 l1 lc2`.
fn acrobot_derivative(s: [f64; 4], tau: f64) -> [f64; 4] {
    const M1: f64 = 1.0;
    const M2: f64 = 1.0;
    const L1: f64 = 1.0;
    const LC1: f64 = 0.5;
    const LC2: f64 = 0.5;
    const I1: f64 = 1.0;
    const I2: f64 = 1.0;
    const G: f64 = 9.8;
    use std::f64::consts::FRAC_PI_2;

    let [t1, t2, w1, w2] = s;
    let c = M2 * L1 * LC2;
    let d1 = M1 * LC1 * LC1 + M2 * (L1 * L1 + LC2 * LC2) + 2.0 * c * t2.cos() + I1 + I2;
    let d2 = M2 * LC2 * LC2 + c * t2.cos() + I2;
    let d3 = M2 * LC2 * LC2 + I2;
    let phi2 = M2 * LC2 * G * (t1 + t2 - FRAC_PI_2).cos();
    let phi1 = -c * w2 * w2 * t2.sin() - 2.0 * c * w1 * w2 * t2.sin()
        + (M1 * LC1 + M2 * L1) * G * (t1 - FRAC_PI_2).cos()
        + phi2;
    let (alpha1, alpha2) = solve2(
        d1,
        d2,
        d2,
        d3,
        -phi1,
        tau - c * w1 * w1 * t2.sin() - phi2,
    );
    [w1, w2, alpha1, alpha2]
}

/// One acrobot step: a single RK4 stage of 0.2 s with constant torque
/// `action - 1`, then angle wrapping and velocity clipping.
pub fn acrobot_reference_step(state: [f64; 4], action: usize) -> [f64; 4] {
    use std::f64::consts::PI;
    const DT: f64 = 0.2;
    let tau = action as f64 - 1.0;

    let add = |y: [f64; 4], k: [f64; 4], s: f64| {
        [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]]
    };
    let k1 = acrobot_derivative(state, tau);
    let k2 = acrobot_derivative(add(state, k1, DT / 2.0), tau);
    let k3 = acrobot_derivative(add(state, k2, DT / 2.0), tau);
    let k4 = acrobot_derivative(add(state, k3, DT), tau);
    let mut ns = [0.0; 4];
    for i in 0..4 {
        ns[i] = state[i] + DT / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    ns[0] = wrap(ns[0]);
    ns[1] = wrap(ns[1]);
    ns[2] = ns[2].clamp(-4.0 * PI, 4.0 * PI);
    ns[3] = ns[3].clamp(-9.0 * PI, 9.0 * PI);
    ns
}

// ---------------------------------------------------------------------------
// Random circuits and finite differences
// ---------------------------------------------------------------------------

fn random_observables(rng: &mut ChaCha8Rng, n_qubits: usize, n_actions: usize) -> Vec<ZObservable> {
    (0..n_actions)
        .map(|_| {
            let mut indices: Vec<usize> = (0..n_qubits)
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            if indices.is_empty() {
                indices.push(rng.gen_range(0..n_qubits));
            }
            ZObservable::new(indices).expect("distinct indices")
        })
        .collect()
}

/// Draws a random circuit from either family: n <= 6 qubits, <= 5 layers,
/// random scaling/encoding/entanglement switches, random Z-string readouts.
/// When `feature_dim` is pinned (the batch-loss oracle needs 4), the draw
/// honors it.
pub fn random_model(rng: &mut ChaCha8Rng, feature_dim: Option<usize>) -> ModelSpec64 {
    let layers = rng.gen_range(1..=5);
    let n_actions = rng.gen_range(2..=3);
    if rng.gen_bool(0.5) {
        // Skolik: the encoder ties the feature width to the qubit count.
        let n = feature_dim.unwrap_or_else(|| rng.gen_range(1..=6));
        let obs = random_observables(rng, n, n_actions);
        ModelSpec64::skolik(
            n,
            layers,
            rng.gen_bool(0.5),
            if rng.gen_bool(0.5) {
                InputScaling::Trainable
            } else {
                InputScaling::Fixed
            },
            if rng.gen_bool(0.5) {
                OutputScaling::Trainable
            } else {
                OutputScaling::Fixed
            },
            obs,
        )
        .expect("valid random skolik model")
    } else {
        let n = rng.gen_range(1..=6);
        let (encoding, d) = if rng.gen_bool(0.5) {
            (EncodingMode::Full, feature_dim.unwrap_or_else(|| rng.gen_range(1..=6)))
        } else {
            // Partial encoding splits the features evenly over the register.
            match feature_dim {
                Some(d) if d % n == 0 => (EncodingMode::Partial, d),
                Some(d) => (EncodingMode::Full, d),
                None => (EncodingMode::Partial, n * rng.gen_range(1..=2)),
            }
        };
        let obs = random_observables(rng, n, n_actions);
        ModelSpec64::uqc(n, layers, encoding, rng.gen_bool(0.5), d, obs)
            .expect("valid random uqc model")
    }
}

pub fn random_features(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

/// Central-difference gradient of one Q-value over the flat trainable
/// parameters.
pub fn fd_q_grad(
    model: &ModelSpec64,
    params: &ParamSet64,
    features: &[f64],
    action: usize,
    h: f64,
) -> Vec<f64> {
    let layout = model.layout();
    let flat = params.flat_trainable(layout);
    let mut probe = params.clone();
    let mut grad = Vec::with_capacity(flat.len());
    for i in 0..flat.len() {
        let mut bumped = flat.clone();
        bumped[i] = flat[i] + h;
        probe.assign_flat_trainable(layout, &bumped);
        let up = model.q_values(&probe, features).expect("forward pass")[action];
        bumped[i] = flat[i] - h;
        probe.assign_flat_trainable(layout, &bumped);
        let down = model.q_values(&probe, features).expect("forward pass")[action];
        grad.push((up - down) / (2.0 * h));
    }
    grad
}

/// Mean-squared TD loss recomputed from plain forward passes, with the
/// targets held at `target_params`.
fn td_loss(
    model: &ModelSpec64,
    params: &ParamSet64,
    targets: &[f64],
    batch: &[&Transition<f64>],
) -> f64 {
    let mut loss = 0.0;
    for (t, y) in batch.iter().zip(targets) {
        let q = model.q_values(params, &t.state).expect("forward pass")[t.action];
        loss += (q - y) * (q - y);
    }
    loss / batch.len() as f64
}

/// Central-difference gradient of the batch TD loss over the flat trainable
/// parameters.
pub fn fd_loss_grad(
    model: &ModelSpec64,
    params: &ParamSet64,
    target_params: &ParamSet64,
    batch: &[&Transition<f64>],
    gamma: f64,
    h: f64,
) -> Vec<f64> {
    let targets = td_targets(model, target_params, batch, gamma).expect("targets");
    let layout = model.layout();
    let flat = params.flat_trainable(layout);
    let mut probe = params.clone();
    let mut grad = Vec::with_capacity(flat.len());
    for i in 0..flat.len() {
        let mut bumped = flat.clone();
        bumped[i] = flat[i] + h;
        probe.assign_flat_trainable(layout, &bumped);
        let up = td_loss(model, &probe, &targets, batch);
        bumped[i] = flat[i] - h;
        probe.assign_flat_trainable(layout, &bumped);
        let down = td_loss(model, &probe, &targets, batch);
        grad.push((up - down) / (2.0 * h));
    }
    grad
}
