//! Synthetic binary classification with the same circuits, observables, and
//! optimizer as the reinforcement-learning agents. Dense supervision
//! separates "this ansatz cannot fit the mapping" from "the reward signal is
//! too thin": a family that stalls here as qubits grow has a trainability
//! problem, not an exploration problem.
//!
//! The generator places two Gaussian clusters in an informative subspace and
//! fills the remaining coordinates with noisy linear images of it, then
//! standardizes every column and fixes a shuffled, contiguous 80/20
//! train/validation split — all seed-pinned. Training minimizes MSE against
//! one-hot targets over the two Q-outputs and logs the same
//! [`UpdateRecord`] stream as the RL trainer, so the gradient aggregation in
//! [`crate::metrics`] applies to both without adaptation.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ansatz::{ModelError, ModelSpec, ParamGroup, ParamSet};
use crate::autodiff::{adjoint_backward, chain_into, GradientVector};
use crate::dqn::{argmax, AdamState, UpdateRecord};
use crate::metrics::{population_stats, AggregateCurve, MetricsError};
use crate::scalar::{real, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SupervisedError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("need at least 2 features, got {0}")]
    TooFewFeatures(usize),
    #[error("need at least 5 samples for an 80/20 split, got {0}")]
    TooFewSamples(usize),
    #[error("invalid configuration: {field}")]
    InvalidConfig { field: &'static str },
    #[error("non-finite loss at update {step}")]
    NonFiniteLoss { step: u64 },
    #[error("non-finite gradient at update {step}")]
    NonFiniteGradient { step: u64 },
}

/// A standardized binary-classification set with a fixed train/validation
/// split. Rows are feature vectors; labels are 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset<T> {
    features: Vec<Vec<T>>,
    labels: Vec<usize>,
    n_train: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn n_samples(&self) -> usize {
        self.features.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn features(&self) -> &[Vec<T>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Training rows and labels (the first 80% after the generator's
    /// shuffle).
    pub fn train(&self) -> (&[Vec<T>], &[usize]) {
        (&self.features[..self.n_train], &self.labels[..self.n_train])
    }

    /// Validation rows and labels (the remaining 20%).
    pub fn val(&self) -> (&[Vec<T>], &[usize]) {
        (&self.features[self.n_train..], &self.labels[self.n_train..])
    }
}

/// Builds a two-cluster classification problem with `max(2, n_features/2)`
/// informative coordinates. Cluster centers sit at `±1.5/sqrt(k)` per
/// informative coordinate, so the center-to-center distance is 3 regardless
/// of dimension — task difficulty stays comparable across qubit counts.
/// Redundant coordinates are random linear combinations of the informative
/// ones plus `0.1`-scale noise. Columns are standardized to zero mean and
/// unit (population) variance; rows are shuffled once and split 80/20.
pub fn generate_dataset<T: Scalar>(
    n_features: usize,
    n_samples: usize,
    seed: u64,
) -> Result<Dataset<T>, SupervisedError> {
    if n_features < 2 {
        return Err(SupervisedError::TooFewFeatures(n_features));
    }
    if n_samples < 5 {
        return Err(SupervisedError::TooFewSamples(n_samples));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let informative = (n_features / 2).max(2).min(n_features);
    let redundant = n_features - informative;
    let sep = real::<T>(1.5) / real::<T>(informative as f64).sqrt();

    let coeffs: Vec<Vec<T>> = (0..redundant)
        .map(|_| (0..informative).map(|_| T::standard_normal(&mut rng)).collect())
        .collect();

    let class_one = n_samples / 2;
    let mut rows = Vec::with_capacity(n_samples);
    let mut labels = Vec::with_capacity(n_samples);
    let noise_scale = real::<T>(0.1);
    for i in 0..n_samples {
        let label = usize::from(i >= n_samples - class_one);
        let center = if label == 0 { -sep } else { sep };
        let mut row: Vec<T> = (0..informative)
            .map(|_| center + T::standard_normal(&mut rng))
            .collect();
        for c in &coeffs {
            let mut v = T::zero();
            for (&w, &x) in c.iter().zip(&row[..informative]) {
                v += w * x;
            }
            row.push(v + noise_scale * T::standard_normal(&mut rng));
        }
        rows.push(row);
        labels.push(label);
    }

    let mut order: Vec<usize> = (0..n_samples).collect();
    order.shuffle(&mut rng);
    let features: Vec<Vec<T>> = order.iter().map(|&i| rows[i].clone()).collect();
    let labels: Vec<usize> = order.iter().map(|&i| labels[i]).collect();

    let mut features = features;
    let n = real::<T>(n_samples as f64);
    for col in 0..n_features {
        let mean = features.iter().map(|r| r[col]).sum::<T>() / n;
        let var = features
            .iter()
            .map(|r| (r[col] - mean) * (r[col] - mean))
            .sum::<T>()
            / n;
        let std = var.sqrt();
        for r in &mut features {
            r[col] = r[col] - mean;
            if std > T::zero() {
                r[col] = r[col] / std;
            }
        }
    }

    Ok(Dataset {
        features,
        labels,
        n_train: n_samples * 4 / 5,
    })
}

/// Hyperparameters for supervised training. Learning rates default to the
/// RL trainer's values so gradient logs stay comparable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedConfig<T> {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_rotational: T,
    pub lr_input: T,
    pub lr_output: T,
}

impl<T: Scalar> Default for SupervisedConfig<T> {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            lr_rotational: real(0.001),
            lr_input: real(0.001),
            lr_output: real(0.1),
        }
    }
}

/// Accuracy and mean loss after one pass over the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord<T> {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean of the epoch's update losses.
    pub train_loss: T,
    pub train_accuracy: T,
    pub val_accuracy: T,
}

/// Everything one supervised run produces. `updates` uses the RL trainer's
/// record type with `step` meaning the 1-based update ordinal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedLog<T> {
    pub seed: u64,
    pub epochs: Vec<EpochRecord<T>>,
    pub updates: Vec<UpdateRecord<T>>,
}

fn one_hot<T: Scalar>(label: usize, n: usize) -> Vec<T> {
    (0..n)
        .map(|a| if a == label { T::one() } else { T::zero() })
        .collect()
}

/// Mean squared error over every (sample, output) element.
pub fn mse_loss<T: Scalar>(predictions: &[Vec<T>], targets: &[Vec<T>]) -> T {
    assert_eq!(
        predictions.len(),
        targets.len(),
        "prediction/target count mismatch"
    );
    let mut count = 0usize;
    let mut acc = T::zero();
    for (p, t) in predictions.iter().zip(targets) {
        assert_eq!(p.len(), t.len(), "prediction/target width mismatch");
        for (&pi, &ti) in p.iter().zip(t) {
            acc += (pi - ti) * (pi - ti);
            count += 1;
        }
    }
    assert!(count > 0, "loss over an empty batch");
    acc / real::<T>(count as f64)
}

/// MSE loss against one-hot labels and its exact gradient over the flat
/// trainable vector.
///
/// All outputs of one sample are differentiated in a single backward sweep:
/// the sweep is seeded with the diagonal observable `M = sum_a r_a w_a O_a`
/// (`r_a` the residual on output `a`), whose expectation gradient is exactly
/// the residual-weighted sum the chain rule needs. Output weights get their
/// direct term `dL/dw_a = (2/(B·A)) · sum_i r_ia <O_a>_i`.
pub fn mse_loss_grad<T: Scalar>(
    model: &ModelSpec<T>,
    params: &ParamSet<T>,
    rows: &[&[T]],
    labels: &[usize],
) -> Result<(T, GradientVector<T>), SupervisedError> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(SupervisedError::InvalidConfig { field: "batch shape" });
    }
    let layout = model.layout();
    let n_actions = model.n_actions();
    let scale = real::<T>(2.0) / real::<T>((rows.len() * n_actions) as f64);
    let mut grad = vec![T::zero(); layout.trainable()];
    let mut predictions = Vec::with_capacity(rows.len());
    let mut targets = Vec::with_capacity(rows.len());
    for (&row, &label) in rows.iter().zip(labels) {
        let psi = model.run_circuit(params, row, None)?;
        let exps: Vec<T> = model
            .observables()
            .iter()
            .map(|o| psi.expectation(o))
            .collect::<Result<_, _>>()
            .map_err(ModelError::from)?;
        let q: Vec<T> = exps
            .iter()
            .enumerate()
            .map(|(a, &e)| params.output[a] * e)
            .collect();
        let y = one_hot::<T>(label, n_actions);
        let terms: Vec<(T, u64)> = (0..n_actions)
            .map(|a| ((q[a] - y[a]) * params.output[a], model.observables()[a].mask()))
            .collect();
        let bra = psi.weighted_z_image(&terms);
        let dangles = adjoint_backward(model, params, row, psi, bra)?;
        chain_into(&mut grad, model, row, &dangles, scale);
        if let Some(off) = layout.output_offset() {
            for a in 0..n_actions {
                grad[off + a] += scale * (q[a] - y[a]) * exps[a];
            }
        }
        predictions.push(q);
        targets.push(y);
    }
    Ok((mse_loss(&predictions, &targets), grad))
}

/// Fraction of rows whose argmax Q-value matches the label. Ties resolve to
/// the lowest action, exactly as greedy play does.
pub fn accuracy<T: Scalar>(
    model: &ModelSpec<T>,
    params: &ParamSet<T>,
    rows: &[Vec<T>],
    labels: &[usize],
) -> Result<T, SupervisedError> {
    assert_eq!(rows.len(), labels.len(), "row/label count mismatch");
    assert!(!rows.is_empty(), "accuracy over an empty set");
    let mut correct = 0usize;
    for (row, &label) in rows.iter().zip(labels) {
        let q = model.q_values(params, row)?;
        if argmax(&q) == label {
            correct += 1;
        }
    }
    Ok(real::<T>(correct as f64) / real::<T>(rows.len() as f64))
}

fn validate<T: Scalar>(
    model: &ModelSpec<T>,
    dataset: &Dataset<T>,
    cfg: &SupervisedConfig<T>,
) -> Result<(), SupervisedError> {
    let fail = |field| Err(SupervisedError::InvalidConfig { field });
    if cfg.epochs == 0 {
        return fail("epochs");
    }
    if cfg.batch_size == 0 {
        return fail("batch_size");
    }
    if !(cfg.lr_rotational > T::zero()) {
        return fail("lr_rotational");
    }
    if !(cfg.lr_input > T::zero()) {
        return fail("lr_input");
    }
    if !(cfg.lr_output > T::zero()) {
        return fail("lr_output");
    }
    if model.n_actions() != 2 {
        return fail("model n_actions");
    }
    if model.feature_dim() != dataset.n_features() {
        return fail("model feature_dim");
    }
    if dataset.n_train == 0 || dataset.n_train >= dataset.n_samples() {
        return fail("dataset split");
    }
    if dataset.labels.iter().any(|&l| l >= model.n_actions()) {
        return fail("labels");
    }
    Ok(())
}

/// Trains one model on the dataset's training split and returns accuracy,
/// loss, and gradient logs. Minibatches reshuffle every epoch; the final
/// short batch is included. The RNG stream covers parameter initialization
/// followed by the epoch shuffles, so a seed pins the entire run.
pub fn train_supervised<T: Scalar>(
    model: &ModelSpec<T>,
    dataset: &Dataset<T>,
    cfg: &SupervisedConfig<T>,
    seed: u64,
) -> Result<SupervisedLog<T>, SupervisedError> {
    validate(model, dataset, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ParamSet::init(model, &mut rng);
    let layout = model.layout();
    let lr: Vec<T> = (0..layout.trainable())
        .map(|i| match layout.group_of(i) {
            ParamGroup::Rotational => cfg.lr_rotational,
            ParamGroup::Input => cfg.lr_input,
            ParamGroup::Output => cfg.lr_output,
        })
        .collect();
    let mut adam = AdamState::new(lr, real(0.9), real(0.999), real(1e-8));

    let (train_rows, train_labels) = dataset.train();
    let (val_rows, val_labels) = dataset.val();
    let mut log = SupervisedLog {
        seed,
        epochs: Vec::with_capacity(cfg.epochs),
        updates: Vec::new(),
    };
    let mut order: Vec<usize> = (0..train_rows.len()).collect();
    let mut update_ord: u64 = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = T::zero();
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            update_ord += 1;
            let rows: Vec<&[T]> = chunk.iter().map(|&i| train_rows[i].as_slice()).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| train_labels[i]).collect();
            let (loss, grad) = mse_loss_grad(model, &params, &rows, &labels)?;
            if !loss.is_finite() {
                return Err(SupervisedError::NonFiniteLoss { step: update_ord });
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(SupervisedError::NonFiniteGradient { step: update_ord });
            }
            let mut flat = params.flat_trainable(layout);
            adam.step(&mut flat, &grad);
            params.assign_flat_trainable(layout, &flat);
            loss_sum += loss;
            batches += 1;
            log.updates.push(UpdateRecord {
                step: update_ord,
                loss,
                grad,
            });
        }
        log.epochs.push(EpochRecord {
            epoch,
            train_loss: loss_sum / real::<T>(batches as f64),
            train_accuracy: accuracy(model, &params, train_rows, train_labels)?,
            val_accuracy: accuracy(model, &params, val_rows, val_labels)?,
        });
    }
    Ok(log)
}

/// Per-epoch mean and standard deviation of train and validation accuracy
/// across agents. Returns `(train, val)` curves over the epoch axis.
pub fn aggregate_accuracy<T: Scalar>(
    logs: &[SupervisedLog<T>],
) -> Result<(AggregateCurve<T>, AggregateCurve<T>), MetricsError> {
    if logs.is_empty() {
        return Err(MetricsError::NoLogs);
    }
    let n_epochs = logs[0].epochs.len();
    for log in logs {
        if log.epochs.len() != n_epochs {
            return Err(MetricsError::EpisodeCountMismatch(n_epochs, log.epochs.len()));
        }
    }
    let x: Vec<u64> = logs[0].epochs.iter().map(|e| e.epoch as u64).collect();
    let mut train = AggregateCurve {
        x: x.clone(),
        mean: Vec::with_capacity(n_epochs),
        spread: Vec::with_capacity(n_epochs),
        window: 1,
    };
    let mut val = AggregateCurve {
        x,
        mean: Vec::with_capacity(n_epochs),
        spread: Vec::with_capacity(n_epochs),
        window: 1,
    };
    for e in 0..n_epochs {
        let ts: Vec<T> = logs.iter().map(|l| l.epochs[e].train_accuracy).collect();
        let vs: Vec<T> = logs.iter().map(|l| l.epochs[e].val_accuracy).collect();
        let (m, var) = population_stats(&ts);
        train.mean.push(m);
        train.spread.push(var.sqrt());
        let (m, var) = population_stats(&vs);
        val.mean.push(m);
        val.spread.push(var.sqrt());
    }
    Ok((train, val))
}

/// `accuracy.csv`: `epoch,mean_train_acc,std_train_acc,mean_val_acc,std_val_acc`.
pub fn write_accuracy_csv<T: Scalar, W: Write>(
    mut w: W,
    train: &AggregateCurve<T>,
    val: &AggregateCurve<T>,
) -> io::Result<()> {
    writeln!(w, "epoch,mean_train_acc,std_train_acc,mean_val_acc,std_val_acc")?;
    for i in 0..train.x.len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            train.x[i], train.mean[i], train.spread[i], val.mean[i], val.spread[i]
        )?;
    }
    Ok(())
}
