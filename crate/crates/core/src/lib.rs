//! Variational-quantum-circuit deep Q-learning, end to end: an exact dense
//! statevector simulator with adjoint differentiation, two hardware-style
//! ansatz families, native CartPole/Acrobot environments, a DQN trainer with
//! gradient instrumentation, metrics/curve-fit tooling for gradient-landscape
//! studies, a supervised-classification control experiment, and a config-file
//! driven experiment runner (see the `vqdqn` binary).
//!
//! The numeric core is generic over the floating-point type via
//! [`scalar::Scalar`]; the aliases below fix the common `f64` instantiation.

pub mod ansatz;
pub mod autodiff;
pub mod dqn;
pub mod env;
pub mod metrics;
pub mod scalar;
pub mod statevec;
pub mod supervised;

pub use ansatz::{
    AnsatzFamily, EncodingMode, InputScaling, ModelError, ModelSpec, OutputScaling, ParamLayout,
    ParamSet,
};
pub use autodiff::{
    adjoint_q_grad, finite_diff_q_grad, parameter_shift_q_grad, GradError, GradientVector,
};
pub use dqn::{
    run_training, ReplayBuffer, RunLog, TrainConfig, TrainError, Transition, UpdateRecord,
};
pub use metrics::{
    aggregate_gradients, aggregate_losses, aggregate_returns, bp_scan, fit_decay, rolling_average,
    AggregateCurve, BpScanPoint, DecayFit, FitLine, MetricsError, ObservableKind,
};
pub use env::{EnvError, EnvKind, Environment, StepResult};
pub use scalar::Scalar;
pub use statevec::{Axis, StateVecError, StateVector, ZObservable};
pub use supervised::{
    accuracy, aggregate_accuracy, generate_dataset, mse_loss, mse_loss_grad, train_supervised,
    write_accuracy_csv, Dataset, EpochRecord, SupervisedConfig, SupervisedError, SupervisedLog,
};

/// Statevector over `f64` amplitudes (the default working precision).
pub type StateVector64 = StateVector<f64>;
/// Statevector over `f32` amplitudes.
pub type StateVector32 = StateVector<f32>;
/// Circuit model over `f64` parameters.
pub type ModelSpec64 = ModelSpec<f64>;
/// Parameter set over `f64` values.
pub type ParamSet64 = ParamSet<f64>;
/// Environment instance over `f64` state.
pub type Environment64 = Environment<f64>;
/// Training configuration over `f64` hyperparameters.
pub type TrainConfig64 = TrainConfig<f64>;
/// Training log over `f64` values.
pub type RunLog64 = RunLog<f64>;
/// [`Dataset`] over `f64`.
pub type Dataset64 = Dataset<f64>;
/// [`SupervisedConfig`] over `f64`.
pub type SupervisedConfig64 = SupervisedConfig<f64>;
/// [`SupervisedLog`] over `f64`.
pub type SupervisedLog64 = SupervisedLog<f64>;
