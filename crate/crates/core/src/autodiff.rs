//! Gradients of Q-values with respect to the flat trainable-parameter
//! vector, by three methods:
//!
//! * [`adjoint_q_grad`] — reverse-mode adjoint differentiation. One forward
//!   pass builds the final state; a single backward sweep then maintains the
//!   pair `|psi_k>` (state after gate k) and `|b_k> = U_{k+1}^† ... U_m^† O
//!   |psi_m>`, reading off `d<O>/d angle_k = Im <b_k| P |psi_k>` at every
//!   rotation gate before unapplying it from both vectors. Cost: O(gates)
//!   state updates total, exact to machine precision.
//! * [`parameter_shift_q_grad`] — the exact two-point rule
//!   `d<O>/d angle = (<O>(angle + pi/2) - <O>(angle - pi/2)) / 2`, valid for
//!   rotation gates generated by an involutory Pauli. O(gates) full circuit
//!   runs; used as an independent cross-check of the adjoint sweep.
//! * [`finite_diff_q_grad`] — central differences directly on the flat
//!   trainable vector. Approximate, but derived from nothing except the
//!   forward evaluation, which makes it the arbiter when the two exact
//!   methods are in doubt.
//!
//! All three differentiate the same scalar: `Q_a = w_a * <O_a>` for one
//! chosen action `a`, including the output-weight entry (`dQ_a/dw_a =
//! <O_a>`) when output scaling is trainable. Angles are affine in the
//! parameters, so the chain rule multiplies each per-gate angle derivative
//! by the term's coefficient (and feature value, for encoding gates) and
//! accumulates — parameters appearing in several gates sum their
//! contributions.

use thiserror::Error;

use crate::ansatz::{resolve_angle, Gate, ModelError, ModelSpec, ParamSet};
use crate::scalar::{real, Scalar};

/// Gradient over the flat trainable layout (see
/// [`crate::ansatz::ParamLayout`]).
pub type GradientVector<T> = Vec<T>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("action {action} out of range for {n_actions} actions")]
    ActionOutOfRange { action: usize, n_actions: usize },
    #[error("finite-difference step must lie in [1e-7, 1e-3], got {step}")]
    InvalidStepSize { step: f64 },
}

fn check_action<T: Scalar>(model: &ModelSpec<T>, action: usize) -> Result<(), GradError> {
    if action >= model.n_actions() {
        return Err(GradError::ActionOutOfRange {
            action,
            n_actions: model.n_actions(),
        });
    }
    Ok(())
}

/// Chain rule from per-gate angle derivatives into the flat trainable
/// vector: `grad[p] += scale * dangle * d angle/d p`, accumulating across
/// gates (and across calls, for batch losses). Leaves output-weight entries
/// alone — those don't enter gate angles.
pub(crate) fn chain_into<T: Scalar>(
    grad: &mut [T],
    model: &ModelSpec<T>,
    features: &[T],
    dangles: &[T],
    scale: T,
) {
    let layout = model.layout();
    for (gate, &dangle) in model.gates().iter().zip(dangles) {
        let Gate::Rotation { terms, .. } = gate else {
            continue;
        };
        for t in terms {
            let Some(p) = t.param else { continue };
            // Circuit index p doubles as the flat index: the rotational
            // group leads both layouts and a trainable input group follows
            // at the same offset. Frozen input weights are skipped.
            if p >= layout.rotational && !layout.input_trainable {
                continue;
            }
            let mut dangle_dp = t.coeff;
            if let Some(fi) = t.feature {
                dangle_dp = dangle_dp * features[fi];
            }
            grad[p] += scale * dangle * dangle_dp;
        }
    }
}

/// Adjoint backward sweep: given the final state `ket = |psi_m>` and a bra
/// seed `|b_m> = M |psi_m>` for any real diagonal observable `M`, returns
/// `d<M>/d angle` for every gate (zero at entanglers). Both vectors are
/// consumed by unapplying the circuit in reverse.
pub(crate) fn adjoint_backward<T: Scalar>(
    model: &ModelSpec<T>,
    params: &ParamSet<T>,
    features: &[T],
    mut ket: crate::statevec::StateVector<T>,
    mut bra: crate::statevec::StateVector<T>,
) -> Result<Vec<T>, ModelError> {
    let mut dangles = vec![T::zero(); model.gates().len()];
    for (gi, gate) in model.gates().iter().enumerate().rev() {
        match gate {
            Gate::ControlledZ { a, b } => {
                ket.apply_cz(*a, *b)?;
                bra.apply_cz(*a, *b)?;
            }
            Gate::Rotation { axis, qubit, terms } => {
                dangles[gi] = bra.pauli_bilinear(&ket, *axis, *qubit).im;
                let angle = resolve_angle(terms, params, features);
                ket.apply_rotation(*axis, *qubit, -angle)?;
                bra.apply_rotation(*axis, *qubit, -angle)?;
            }
        }
    }
    Ok(dangles)
}

/// `(Q_a, dQ_a/d trainable)` by the adjoint method.
pub fn adjoint_q_grad<T: Scalar>(
    model: &ModelSpec<T>,
    params: &ParamSet<T>,
    features: &[T],
    action: usize,
) -> Result<(T, GradientVector<T>), GradError> {
    check_action(model, action)?;
    let ket = model.run_circuit(params, features, None)?;
    let obs = &model.observables()[action];
    let expectation = ket.expectation(obs).map_err(ModelError::from)?;

    let mut bra = ket.clone();
    bra.apply_z_string(obs);
    let dangles = adjoint_backward(model, params, features, ket, bra)?;

    let layout = model.layout();
    let mut grad = vec![T::zero(); layout.trainable()];
    if let Some(off) = layout.output_offset() {
        grad[off + action] = expectation;
    }
    chain_into(&mut grad, model, features, &dangles, params.output[action]);
    Ok((params.output[action] * expectation, grad))
}

/// `(Q_a, dQ_a/d trainable)` by the parameter-shift rule.
pub fn parameter_shift_q_grad<T: Scalar>(
    model: &ModelSpec<T>,
    params: &ParamSet<T>,
    features: &[T],
    action: usize,
) -> Result<(T, GradientVector<T>), GradError> {
    check_action(model, action)?;
    let psi = model.run_circuit(params, features, None)?;
    let obs = &model.observables()[action];
    let expectation = psi.expectation(obs).map_err(ModelError::from)?;

    let half_pi = T::FRAC_PI_2();
    let half = real::<T>(0.5);
    let mut dangles = vec![T::zero(); model.gates().len()];
    for (gi, gate) in model.gates().iter().enumerate() {
        if !matches!(gate, Gate::Rotation { .. }) {
            continue;
        }
        let plus = model
            .run_circuit(params, features, Some((gi, half_pi)))?
            .expectation(obs)
            .map_err(ModelError::from)?;
        let minus = model
            .run_circuit(params, features, Some((gi, -half_pi)))?
            .expectation(obs)
            .map_err(ModelError::from)?;
        dangles[gi] = (plus - minus) * half;
    }

    let layout = model.layout();
    let mut grad = vec![T::zero(); layout.trainable()];
    if let Some(off) = layout.output_offset() {
        grad[off + action] = expectation;
    }
    chain_into(&mut grad, model, features, &dangles, params.output[action]);
    Ok((params.output[action] * expectation, grad))
}

/// `(Q_a, dQ_a/d trainable)` by central finite differences with step `step`
/// on each flat trainable entry. The step must lie in `[1e-7, 1e-3]`: larger
/// steps truncate badly, smaller ones drown in cancellation.
pub fn finite_diff_q_grad<T: Scalar>(
    model: &ModelSpec<T>,
    params: &ParamSet<T>,
    features: &[T],
    action: usize,
    step: T,
) -> Result<(T, GradientVector<T>), GradError> {
    check_action(model, action)?;
    let step_f64 = step.to_f64().unwrap_or(f64::NAN);
    if !(1e-7..=1e-3).contains(&step_f64) {
        return Err(GradError::InvalidStepSize { step: step_f64 });
    }

    let layout = model.layout();
    let q = model.q_values(params, features)?[action];
    let base = params.flat_trainable(layout);
    let mut probe = base.clone();
    let mut work = params.clone();
    let mut grad = vec![T::zero(); base.len()];
    let two_step = step + step;
    for i in 0..base.len() {
        probe[i] = base[i] + step;
        work.assign_flat_trainable(layout, &probe);
        let plus = work.output[action]
            * model
                .run_circuit(&work, features, None)?
                .expectation(&model.observables()[action])
                .map_err(ModelError::from)?;
        probe[i] = base[i] - step;
        work.assign_flat_trainable(layout, &probe);
        let minus = work.output[action]
            * model
                .run_circuit(&work, features, None)?
                .expectation(&model.observables()[action])
                .map_err(ModelError::from)?;
        probe[i] = base[i];
        grad[i] = (plus - minus) / two_step;
    }
    Ok((q, grad))
}
