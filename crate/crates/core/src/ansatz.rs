//! Parameterized circuit families, their parameter layouts, and Q-value
//! readout.
//!
//! Two ansatz families are provided:
//!
//! * **Skolik**: per layer, an `R_X` data-encoding block (first layer only,
//!   or every layer when data re-uploading is on), an `R_Y`+`R_Z` variational
//!   pair on every qubit, and a closed CZ ring. Input features can be scaled
//!   by trainable per-encoding weights; Q-values can be scaled by trainable
//!   per-action output weights.
//! * **UQC** (universal-approximator cells): per qubit and layer, an
//!   `R_Z(2 w·x + 2 α)` encoding rotation followed by `R_Y(2 φ)`, with an
//!   optional CZ ring between consecutive layers. `full` encoding feeds the
//!   whole feature vector to every cell; `partial` splits the features evenly
//!   across qubits.
//!
//! Every rotation angle is an affine function of trainable parameters and
//! input features ([`AngleTerm`]), which is what lets the adjoint and
//! parameter-shift differentiators in [`crate::autodiff`] apply the chain
//! rule through input scaling exactly.
//!
//! Q-values are `Q_a = w_a * <O_a>` where `O_a` is a Z-string observable and
//! `w_a` an output weight (fixed at 1 when output scaling is off).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::EnvKind;
use crate::scalar::{real, Scalar};
use crate::statevec::{Axis, StateVecError, StateVector, ZObservable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("model needs at least one qubit")]
    ZeroQubits,
    #[error("model needs at least one layer")]
    ZeroLayers,
    #[error("model needs at least one observable")]
    NoObservables,
    #[error("observable {observable} does not fit a {n_qubits}-qubit register")]
    ObservableOutOfRange { observable: String, n_qubits: usize },
    #[error("feature dimension must be at least one")]
    ZeroFeatures,
    #[error("partial encoding needs feature_dim divisible by qubit count, got {feature_dim} over {n_qubits}")]
    PartialEncodingMismatch { feature_dim: usize, n_qubits: usize },
    #[error("expected {expected} features, got {got}")]
    FeatureDimMismatch { expected: usize, got: usize },
    #[error("parameter set shape mismatch: {group} has {got} entries, model wants {want}")]
    ParamShapeMismatch {
        group: &'static str,
        got: usize,
        want: usize,
    },
    #[error(transparent)]
    StateVec(#[from] StateVecError),
}

/// Which circuit family a model belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnsatzFamily {
    Skolik,
    Uqc,
}

/// How data-encoding weights are treated.
///
/// `Fixed` keeps the weight group in the parameter set (frozen at its
/// initialization) but excludes it from gradients; `Absent` removes the group
/// entirely. For the Skolik encoding the two evaluate identically (weights
/// fixed at 1); they differ only in parameter bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputScaling {
    Trainable,
    Fixed,
    Absent,
}

/// How per-action output weights are treated. `Fixed` freezes them at 1 and
/// excludes them from gradients (the "no output scaling" ablation).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputScaling {
    Trainable,
    Fixed,
}

/// UQC feature assignment: every cell sees the whole input vector, or the
/// features are split evenly across qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingMode {
    Full,
    Partial,
}

/// One additive term of a rotation angle:
/// `coeff * params[param] * features[feature]`, where either factor may be
/// absent. Circuit-parameter indices run over the rotational group first,
/// then the input-weight group.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleTerm<T> {
    pub param: Option<usize>,
    pub feature: Option<usize>,
    pub coeff: T,
}

/// A gate in the flattened circuit program.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate<T> {
    Rotation {
        axis: Axis,
        qubit: usize,
        terms: Vec<AngleTerm<T>>,
    },
    ControlledZ {
        a: usize,
        b: usize,
    },
}

/// Trainable-parameter group a flat index belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamGroup {
    Rotational,
    Input,
    Output,
}

/// Sizes and trainability of the three parameter groups, plus the flat
/// trainable layout used by gradients and the optimizer: rotational entries
/// first, then input weights (when trainable), then output weights (when
/// trainable).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub rotational: usize,
    pub input: usize,
    pub output: usize,
    pub input_trainable: bool,
    pub output_trainable: bool,
}

impl ParamLayout {
    /// Number of parameters bound into gate angles (rotational + input).
    pub fn circuit(&self) -> usize {
        self.rotational + self.input
    }

    /// Length of the flat trainable vector.
    pub fn trainable(&self) -> usize {
        let mut n = self.rotational;
        if self.input_trainable {
            n += self.input;
        }
        if self.output_trainable {
            n += self.output;
        }
        n
    }

    /// Start of the input group in the flat trainable vector, if present.
    pub fn input_offset(&self) -> Option<usize> {
        (self.input_trainable && self.input > 0).then_some(self.rotational)
    }

    /// Start of the output group in the flat trainable vector, if present.
    pub fn output_offset(&self) -> Option<usize> {
        self.output_trainable.then(|| {
            self.rotational + if self.input_trainable { self.input } else { 0 }
        })
    }

    /// Group of a flat trainable index.
    pub fn group_of(&self, flat: usize) -> ParamGroup {
        if let Some(o) = self.output_offset() {
            if flat >= o {
                return ParamGroup::Output;
            }
        }
        if let Some(i) = self.input_offset() {
            if flat >= i {
                return ParamGroup::Input;
            }
        }
        ParamGroup::Rotational
    }
}

/// A fully built circuit model: gate program, observables, parameter layout,
/// and the configuration flags it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T: Scalar> {
    family: AnsatzFamily,
    n_qubits: usize,
    n_layers: usize,
    reupload: bool,
    input_scaling: InputScaling,
    output_scaling: OutputScaling,
    encoding: Option<EncodingMode>,
    entangle: bool,
    feature_dim: usize,
    gates: Vec<Gate<T>>,
    observables: Vec<ZObservable>,
    layout: ParamLayout,
}

impl<T: Scalar> ModelSpec<T> {
    /// Builds a Skolik-style model. The feature dimension equals the qubit
    /// count (one `R_X` encoding rotation per qubit).
    ///
    /// Parameter layout: rotational index `(layer*n + qubit)*2 + {0:R_Y,
    /// 1:R_Z}`; input index `block*n + qubit` where `block` is the layer for
    /// re-uploading models and 0 otherwise.
    pub fn skolik(
        n_qubits: usize,
        n_layers: usize,
        reupload: bool,
        input_scaling: InputScaling,
        output_scaling: OutputScaling,
        observables: Vec<ZObservable>,
    ) -> Result<Self, ModelError> {
        check_common(n_qubits, n_layers, &observables)?;
        let n = n_qubits;
        let rotational = 2 * n * n_layers;
        let enc_blocks = if reupload { n_layers } else { 1 };
        let input = match input_scaling {
            InputScaling::Absent => 0,
            _ => enc_blocks * n,
        };
        let mut gates = Vec::new();
        for layer in 0..n_layers {
            if layer == 0 || reupload {
                let block = if reupload { layer } else { 0 };
                for q in 0..n {
                    let param = match input_scaling {
                        InputScaling::Absent => None,
                        _ => Some(rotational + block * n + q),
                    };
                    gates.push(Gate::Rotation {
                        axis: Axis::X,
                        qubit: q,
                        terms: vec![AngleTerm {
                            param,
                            feature: Some(q),
                            coeff: T::one(),
                        }],
                    });
                }
            }
            for q in 0..n {
                gates.push(Gate::Rotation {
                    axis: Axis::Y,
                    qubit: q,
                    terms: vec![AngleTerm {
                        param: Some((layer * n + q) * 2),
                        feature: None,
                        coeff: T::one(),
                    }],
                });
            }
            for q in 0..n {
                gates.push(Gate::Rotation {
                    axis: Axis::Z,
                    qubit: q,
                    terms: vec![AngleTerm {
                        param: Some((layer * n + q) * 2 + 1),
                        feature: None,
                        coeff: T::one(),
                    }],
                });
            }
            push_cz_ring(&mut gates, n);
        }
        let layout = ParamLayout {
            rotational,
            input,
            output: observables.len(),
            input_trainable: input_scaling == InputScaling::Trainable,
            output_trainable: output_scaling == OutputScaling::Trainable,
        };
        Ok(Self {
            family: AnsatzFamily::Skolik,
            n_qubits,
            n_layers,
            reupload,
            input_scaling,
            output_scaling,
            encoding: None,
            entangle: n_qubits >= 2,
            feature_dim: n,
            gates,
            observables,
            layout,
        })
    }

    /// Builds a UQC model from universal-approximator cells. Each qubit/layer
    /// cell applies `R_Z(2 w·x_q + 2 α)` then `R_Y(2 φ)`, where `x_q` is the
    /// whole feature vector (`Full`) or this qubit's feature slice
    /// (`Partial`). Encoding weights `w`, biases `α`, and angles `φ` are all
    /// trainable; output weights are trainable as well.
    ///
    /// Parameter layout: rotational (φ) index `layer*n + qubit`; input index
    /// `(layer*n + qubit)*(d+1) + j` with `j < d` the `w` entries and `j = d`
    /// the bias, `d` being the per-cell feature count.
    pub fn uqc(
        n_qubits: usize,
        n_layers: usize,
        encoding: EncodingMode,
        entangle: bool,
        feature_dim: usize,
        observables: Vec<ZObservable>,
    ) -> Result<Self, ModelError> {
        check_common(n_qubits, n_layers, &observables)?;
        if feature_dim == 0 {
            return Err(ModelError::ZeroFeatures);
        }
        let n = n_qubits;
        let d = match encoding {
            EncodingMode::Full => feature_dim,
            EncodingMode::Partial => {
                if feature_dim % n != 0 {
                    return Err(ModelError::PartialEncodingMismatch {
                        feature_dim,
                        n_qubits: n,
                    });
                }
                feature_dim / n
            }
        };
        let rotational = n * n_layers;
        let input = n * n_layers * (d + 1);
        let two = real::<T>(2.0);
        let mut gates = Vec::new();
        for layer in 0..n_layers {
            for q in 0..n {
                let cell = layer * n + q;
                let base = rotational + cell * (d + 1);
                let mut terms = Vec::with_capacity(d + 1);
                for j in 0..d {
                    let feature = match encoding {
                        EncodingMode::Full => j,
                        EncodingMode::Partial => q * d + j,
                    };
                    terms.push(AngleTerm {
                        param: Some(base + j),
                        feature: Some(feature),
                        coeff: two,
                    });
                }
                terms.push(AngleTerm {
                    param: Some(base + d),
                    feature: None,
                    coeff: two,
                });
                gates.push(Gate::Rotation {
                    axis: Axis::Z,
                    qubit: q,
                    terms,
                });
                gates.push(Gate::Rotation {
                    axis: Axis::Y,
                    qubit: q,
                    terms: vec![AngleTerm {
                        param: Some(cell),
                        feature: None,
                        coeff: two,
                    }],
                });
            }
            if entangle && n >= 2 && layer + 1 < n_layers {
                push_cz_ring(&mut gates, n);
            }
        }
        let layout = ParamLayout {
            rotational,
            input,
            output: observables.len(),
            input_trainable: true,
            output_trainable: true,
        };
        Ok(Self {
            family: AnsatzFamily::Uqc,
            n_qubits,
            n_layers,
            reupload: true,
            input_scaling: InputScaling::Trainable,
            output_scaling: OutputScaling::Trainable,
            encoding: Some(encoding),
            entangle,
            feature_dim,
            gates,
            observables,
            layout,
        })
    }

    pub fn family(&self) -> AnsatzFamily {
        self.family
    }
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    pub fn n_layers(&self) -> usize {
        self.n_layers
    }
    pub fn reupload(&self) -> bool {
        self.reupload
    }
    pub fn input_scaling(&self) -> InputScaling {
        self.input_scaling
    }
    pub fn output_scaling(&self) -> OutputScaling {
        self.output_scaling
    }
    pub fn encoding(&self) -> Option<EncodingMode> {
        self.encoding
    }
    pub fn entangle(&self) -> bool {
        self.entangle
    }
    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }
    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }
    pub fn observables(&self) -> &[ZObservable] {
        &self.observables
    }
    pub fn n_actions(&self) -> usize {
        self.observables.len()
    }
    pub fn layout(&self) -> ParamLayout {
        self.layout
    }

    fn check_binding(&self, params: &ParamSet<T>, features: &[T]) -> Result<(), ModelError> {
        params.check_shapes(self.layout)?;
        if features.len() != self.feature_dim {
            return Err(ModelError::FeatureDimMismatch {
                expected: self.feature_dim,
                got: features.len(),
            });
        }
        Ok(())
    }

    /// Runs the circuit on `|0...0>` with the given bindings. `shift` adds an
    /// offset to the angle of one gate (by gate index) — the hook the
    /// parameter-shift rule uses.
    pub(crate) fn run_circuit(
        &self,
        params: &ParamSet<T>,
        features: &[T],
        shift: Option<(usize, T)>,
    ) -> Result<StateVector<T>, ModelError> {
        self.check_binding(params, features)?;
        let mut sv = StateVector::zero_state(self.n_qubits)?;
        for (gi, gate) in self.gates.iter().enumerate() {
            match gate {
                Gate::Rotation { axis, qubit, terms } => {
                    let mut angle = resolve_angle(terms, params, features);
                    if let Some((idx, off)) = shift {
                        if idx == gi {
                            angle += off;
                        }
                    }
                    sv.apply_rotation(*axis, *qubit, angle)?;
                }
                Gate::ControlledZ { a, b } => sv.apply_cz(*a, *b)?,
            }
        }
        Ok(sv)
    }

    /// Observable expectations `<O_a>` (no output weights applied).
    pub fn expectations(&self, params: &ParamSet<T>, features: &[T]) -> Result<Vec<T>, ModelError> {
        let sv = self.run_circuit(params, features, None)?;
        self.observables
            .iter()
            .map(|o| sv.expectation(o).map_err(ModelError::from))
            .collect()
    }

    /// Q-values `Q_a = output_weight_a * <O_a>`, one forward pass for all
    /// actions.
    pub fn q_values(&self, params: &ParamSet<T>, features: &[T]) -> Result<Vec<T>, ModelError> {
        let sv = self.run_circuit(params, features, None)?;
        self.observables
            .iter()
            .zip(&params.output)
            .map(|(o, w)| Ok(*w * sv.expectation(o)?))
            .collect()
    }
}

fn check_common(
    n_qubits: usize,
    n_layers: usize,
    observables: &[ZObservable],
) -> Result<(), ModelError> {
    if n_qubits == 0 {
        return Err(ModelError::ZeroQubits);
    }
    if n_layers == 0 {
        return Err(ModelError::ZeroLayers);
    }
    if observables.is_empty() {
        return Err(ModelError::NoObservables);
    }
    for obs in observables {
        if let Some(max) = obs.max_index() {
            if max >= n_qubits {
                return Err(ModelError::ObservableOutOfRange {
                    observable: obs.to_string(),
                    n_qubits,
                });
            }
        }
    }
    Ok(())
}

/// Nearest-neighbour CZ ring: (0,1), (1,2), ..., (n-2,n-1), closed by
/// (n-1,0) when the ring has more than two sites. No entangler on a single
/// qubit.
fn push_cz_ring<T>(gates: &mut Vec<Gate<T>>, n: usize) {
    if n < 2 {
        return;
    }
    for q in 0..n - 1 {
        gates.push(Gate::ControlledZ { a: q, b: q + 1 });
    }
    if n > 2 {
        gates.push(Gate::ControlledZ { a: n - 1, b: 0 });
    }
}

pub(crate) fn resolve_angle<T: Scalar>(
    terms: &[AngleTerm<T>],
    params: &ParamSet<T>,
    features: &[T],
) -> T {
    let mut angle = T::zero();
    for t in terms {
        let mut v = t.coeff;
        if let Some(p) = t.param {
            v = v * params.circuit_value(p);
        }
        if let Some(f) = t.feature {
            v = v * features[f];
        }
        angle += v;
    }
    angle
}

/// Concrete parameter values for a model: rotational angles, input weights,
/// and output weights. Group lengths must match the model's [`ParamLayout`];
/// frozen groups keep their initialization values.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamSet<T> {
    pub rotational: Vec<T>,
    pub input: Vec<T>,
    pub output: Vec<T>,
}

impl<T: Scalar> ParamSet<T> {
    /// Standard initialization: Skolik draws rotational angles from
    /// `U[0, π)` and sets input/output weights to 1; UQC draws φ from
    /// `U[0, π)`, encoding weights from `N(0, 0.01²)`, biases 0, output
    /// weights 1. Draw order is fixed (rotational then input, index order)
    /// so a seeded RNG reproduces parameters exactly.
    pub fn init<R: Rng + ?Sized>(model: &ModelSpec<T>, rng: &mut R) -> Self {
        let layout = model.layout();
        let pi = T::PI();
        let rotational: Vec<T> = (0..layout.rotational)
            .map(|_| rng.gen_range(T::zero()..pi))
            .collect();
        let input: Vec<T> = match model.family() {
            AnsatzFamily::Skolik => vec![T::one(); layout.input],
            AnsatzFamily::Uqc => {
                // Each cell stores d weights followed by one bias.
                let stride = layout.input / layout.rotational;
                (0..layout.input)
                    .map(|i| {
                        if i % stride == stride - 1 {
                            T::zero() // bias
                        } else {
                            T::standard_normal(rng) * real::<T>(0.01)
                        }
                    })
                    .collect()
            }
        };
        let output = vec![T::one(); layout.output];
        Self {
            rotational,
            input,
            output,
        }
    }

    /// Initialization for gradient-landscape scans: every circuit parameter
    /// (rotational and input groups alike) drawn from `U[lo, hi)`, output
    /// weights at 1.
    pub fn uniform_circuit<R: Rng + ?Sized>(
        model: &ModelSpec<T>,
        lo: T,
        hi: T,
        rng: &mut R,
    ) -> Self {
        let layout = model.layout();
        let rotational = (0..layout.rotational).map(|_| rng.gen_range(lo..hi)).collect();
        let input = (0..layout.input).map(|_| rng.gen_range(lo..hi)).collect();
        let output = vec![T::one(); layout.output];
        Self {
            rotational,
            input,
            output,
        }
    }

    /// Value of a circuit parameter (rotational group first, then input).
    pub(crate) fn circuit_value(&self, idx: usize) -> T {
        if idx < self.rotational.len() {
            self.rotational[idx]
        } else {
            self.input[idx - self.rotational.len()]
        }
    }

    pub(crate) fn check_shapes(&self, layout: ParamLayout) -> Result<(), ModelError> {
        let checks = [
            ("rotational", self.rotational.len(), layout.rotational),
            ("input", self.input.len(), layout.input),
            ("output", self.output.len(), layout.output),
        ];
        for (group, got, want) in checks {
            if got != want {
                return Err(ModelError::ParamShapeMismatch { group, got, want });
            }
        }
        Ok(())
    }

    /// Flattens the trainable groups in layout order.
    pub fn flat_trainable(&self, layout: ParamLayout) -> Vec<T> {
        let mut flat = Vec::with_capacity(layout.trainable());
        flat.extend_from_slice(&self.rotational);
        if layout.input_trainable {
            flat.extend_from_slice(&self.input);
        }
        if layout.output_trainable {
            flat.extend_from_slice(&self.output);
        }
        flat
    }

    /// Writes a flat trainable vector back into the grouped storage.
    pub fn assign_flat_trainable(&mut self, layout: ParamLayout, flat: &[T]) {
        assert_eq!(flat.len(), layout.trainable(), "flat vector length mismatch");
        let mut at = 0;
        self.rotational.copy_from_slice(&flat[at..at + layout.rotational]);
        at += layout.rotational;
        if layout.input_trainable {
            self.input.copy_from_slice(&flat[at..at + layout.input]);
            at += layout.input;
        }
        if layout.output_trainable {
            self.output.copy_from_slice(&flat[at..at + layout.output]);
        }
    }
}

/// Feature preprocessing applied to raw environment observations before
/// encoding: bounded features pass through unchanged, unbounded ones
/// (velocities, angular velocities) go through `atan` so every encoded value
/// lives in a bounded interval.
pub fn preprocess<T: Scalar>(raw: [T; 4], env: EnvKind) -> [T; 4] {
    match env {
        EnvKind::CartPole => [raw[0], raw[1].atan(), raw[2], raw[3].atan()],
        EnvKind::Acrobot => [raw[0], raw[1], raw[2].atan(), raw[3].atan()],
    }
}

/// CartPole action observables at any register width: the qubits are split
/// into two halves and each action reads the Z-string over one half. (At
/// n=4 this is the familiar `(Z0Z1, Z2Z3)` pair.) For a single qubit the
/// first half is empty, i.e. an identity readout.
pub fn cartpole_observables(n_qubits: usize) -> Result<Vec<ZObservable>, StateVecError> {
    let half = n_qubits / 2;
    Ok(vec![
        ZObservable::new(0..half)?,
        ZObservable::new(half..n_qubits)?,
    ])
}

/// Acrobot action observables: `(Z_0, Z_1..Z_{n-2}, Z_{n-1})` — the middle
/// torque action reads the interior Z-string (identity when n < 3).
pub fn acrobot_observables(n_qubits: usize) -> Result<Vec<ZObservable>, StateVecError> {
    let interior = if n_qubits >= 3 { 1..n_qubits - 1 } else { 1..1 };
    Ok(vec![
        ZObservable::new([0])?,
        ZObservable::new(interior)?,
        ZObservable::new([n_qubits - 1])?,
    ])
}

/// The all-qubit Z-string used as the "global" observable in
/// gradient-landscape scans.
pub fn global_observable(n_qubits: usize) -> Result<ZObservable, StateVecError> {
    ZObservable::new(0..n_qubits)
}

/// Default observables for an environment at a given register width.
pub fn env_observables(env: EnvKind, n_qubits: usize) -> Result<Vec<ZObservable>, StateVecError> {
    match env {
        EnvKind::CartPole => cartpole_observables(n_qubits),
        EnvKind::Acrobot => acrobot_observables(n_qubits),
    }
}
