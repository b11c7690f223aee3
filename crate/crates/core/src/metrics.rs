//! Cross-agent aggregation, gradient-landscape scans, and decay fits.
//!
//! Training logs from several seeds are reduced to curves over a shared
//! x-axis: per-episode return statistics, and per-update gradient-norm /
//! loss statistics. Updates align by ordinal: before an agent solves, the
//! k-th update happens at the same global step for every agent (one
//! transition is pushed per step, so warmup ends simultaneously and the
//! update period is shared), and agents that solve early simply stop
//! contributing — gradient curves truncate to the shortest update sequence,
//! which is the first solver's when anyone solved.
//!
//! The landscape scan ([`bp_scan`]) measures how the TD-loss gradient
//! behaves as the register grows: for each qubit count it draws models with
//! all circuit parameters uniform in `[0, 2pi)`, builds a fresh random-play
//! CartPole batch under the reference training configuration, takes one
//! exact loss gradient, and records the two-norm. The variance of that norm
//! across samples is the quantity whose decay with qubit count separates a
//! flat landscape (exponential decay) from a benign one (polynomial decay);
//! [`fit_decay`] fits both hypotheses in the matching log space and reports
//! r-squared for each.

use std::io::{self, Write};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ansatz::{
    cartpole_observables, global_observable, preprocess, ModelError, ModelSpec, ParamSet,
};
use crate::dqn::{batch_loss_grad, RunLog, TrainError, Transition};
use crate::env::{EnvKind, Environment};
use crate::scalar::{real, Scalar};
use crate::statevec::{StateVecError, ZObservable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("need at least one run log")]
    NoLogs,
    #[error("episode counts differ across logs: {0} vs {1}")]
    EpisodeCountMismatch(usize, usize),
    #[error("need at least three points to fit, got {0}")]
    TooFewPoints(usize),
    #[error("x and y lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("decay fits need positive values, got {0} at index {1}")]
    NonPositiveValue(f64, usize),
    #[error("landscape scan needs at least one sample")]
    NoSamples,
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    StateVec(#[from] StateVecError),
}

/// A curve over episodes or training steps: mean and spread across agents,
/// optionally smoothed. `spread` is the standard deviation for return
/// curves and the variance for gradient-norm/loss curves; `window` records
/// the trailing rolling-average width applied to both (1 = raw).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCurve<T> {
    pub x: Vec<u64>,
    pub mean: Vec<T>,
    pub spread: Vec<T>,
    pub window: usize,
}

pub(crate) fn population_stats<T: Scalar>(values: &[T]) -> (T, T) {
    let n = real::<T>(values.len() as f64);
    let mean = values.iter().copied().sum::<T>() / n;
    let var = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n;
    (mean, var)
}

/// Trailing moving average: entry `i` averages the last `window` values up
/// to and including `i` (fewer at the start, where the history is shorter).
pub fn rolling_average<T: Scalar>(values: &[T], window: usize) -> Vec<T> {
    assert!(window > 0, "window must be positive");
    let mut out = Vec::with_capacity(values.len());
    let mut sum = T::zero();
    for i in 0..values.len() {
        sum += values[i];
        if i >= window {
            sum -= values[i - window];
        }
        let len = (i + 1).min(window);
        out.push(sum / real::<T>(len as f64));
    }
    out
}

/// Mean and population standard deviation of raw episode returns, per
/// episode across agents. All logs must span the same number of episodes.
pub fn aggregate_returns<T: Scalar>(logs: &[RunLog<T>]) -> Result<AggregateCurve<T>, MetricsError> {
    if logs.is_empty() {
        return Err(MetricsError::NoLogs);
    }
    let episodes = logs[0].episode_returns.len();
    for log in logs {
        if log.episode_returns.len() != episodes {
            return Err(MetricsError::EpisodeCountMismatch(
                episodes,
                log.episode_returns.len(),
            ));
        }
    }
    let mut curve = AggregateCurve {
        x: Vec::with_capacity(episodes),
        mean: Vec::with_capacity(episodes),
        spread: Vec::with_capacity(episodes),
        window: 1,
    };
    for e in 0..episodes {
        let vals: Vec<T> = logs.iter().map(|l| l.episode_returns[e]).collect();
        let (mean, var) = population_stats(&vals);
        curve.x.push(e as u64);
        curve.mean.push(mean);
        curve.spread.push(var.sqrt());
    }
    Ok(curve)
}

fn l2_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&g| g * g).sum::<T>().sqrt()
}

/// Aggregates one per-update statistic across agents, truncated to the
/// shortest update sequence and smoothed with a trailing window.
fn aggregate_updates<T: Scalar>(
    logs: &[RunLog<T>],
    window: usize,
    stat: impl Fn(&crate::dqn::UpdateRecord<T>) -> T,
) -> Result<AggregateCurve<T>, MetricsError> {
    if logs.is_empty() {
        return Err(MetricsError::NoLogs);
    }
    let shortest = logs
        .iter()
        .min_by_key(|l| l.updates.len())
        .expect("non-empty");
    let count = shortest.updates.len();
    let mut x = Vec::with_capacity(count);
    let mut mean = Vec::with_capacity(count);
    let mut spread = Vec::with_capacity(count);
    for k in 0..count {
        let vals: Vec<T> = logs.iter().map(|l| stat(&l.updates[k])).collect();
        let (m, v) = population_stats(&vals);
        x.push(shortest.updates[k].step);
        mean.push(m);
        spread.push(v);
    }
    Ok(AggregateCurve {
        x,
        mean: rolling_average(&mean, window),
        spread: rolling_average(&spread, window),
        window,
    })
}

/// Mean and population variance of the gradient two-norm, per update
/// ordinal across agents, truncated to the first solver (the shortest log)
/// and smoothed with a trailing `window` (pass 1 for raw values).
pub fn aggregate_gradients<T: Scalar>(
    logs: &[RunLog<T>],
    window: usize,
) -> Result<AggregateCurve<T>, MetricsError> {
    aggregate_updates(logs, window, |u| l2_norm(&u.grad))
}

/// Mean and population variance of the TD loss, per update ordinal across
/// agents, truncated and smoothed like [`aggregate_gradients`].
pub fn aggregate_losses<T: Scalar>(
    logs: &[RunLog<T>],
    window: usize,
) -> Result<AggregateCurve<T>, MetricsError> {
    aggregate_updates(logs, window, |u| u.loss)
}

/// Readout choice for the landscape scan: `Local` wires the two CartPole
/// actions to the half-register Z-strings; `Global` points both actions at
/// the all-qubit Z-string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableKind {
    Local,
    Global,
}

/// The observables a scan model reads under a given kind, for a CartPole
/// action pair.
pub fn bp_observables(
    kind: ObservableKind,
    n_qubits: usize,
) -> Result<Vec<ZObservable>, StateVecError> {
    match kind {
        ObservableKind::Local => cartpole_observables(n_qubits),
        ObservableKind::Global => {
            let z = global_observable(n_qubits)?;
            Ok(vec![z.clone(), z])
        }
    }
}

/// One qubit count's landscape statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpScanPoint<T> {
    pub qubits: usize,
    pub mean_norm: T,
    pub variance: T,
}

/// Deterministic per-sample seed: a SplitMix64-style mix of the base seed,
/// the qubit count, and the sample index, so any sample can be reproduced in
/// isolation and parallel execution order cannot matter.
pub fn mix_seed(base: u64, qubits: u64, sample: u64) -> u64 {
    let mut z = base
        .wrapping_add(qubits.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(sample.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Variance of the TD-loss gradient norm across random initializations, per
/// qubit count.
///
/// `build_model(n, observable)` supplies the circuit for each register
/// width, reading the given observable kind. For each sample: draw all
/// circuit parameters from `U[0, 2pi)` (output weights stay 1), roll a fresh
/// 16-transition random-play CartPole batch, and take one exact loss
/// gradient with the target network equal to the online one — the state of
/// the reference CartPole configuration at its first update. Samples run in
/// parallel; results are deterministic in `base_seed` regardless of thread
/// count.
pub fn bp_scan<T, F>(
    build_model: F,
    qubit_list: &[usize],
    samples: usize,
    observable: ObservableKind,
    gamma: T,
    base_seed: u64,
) -> Result<Vec<BpScanPoint<T>>, MetricsError>
where
    T: Scalar,
    F: Fn(usize, ObservableKind) -> Result<ModelSpec<T>, ModelError> + Sync,
{
    const BATCH: usize = 16;
    if samples == 0 {
        return Err(MetricsError::NoSamples);
    }
    let mut points = Vec::with_capacity(qubit_list.len());
    for &n in qubit_list {
        let model = build_model(n, observable)?;
        if model.feature_dim() != EnvKind::CartPole.observation_dim()
            || model.n_actions() != EnvKind::CartPole.n_actions()
        {
            return Err(MetricsError::Train(TrainError::InvalidConfig {
                field: "bp-scan model shape",
            }));
        }
        let norms: Vec<T> = (0..samples)
            .into_par_iter()
            .map(|idx| {
                let mut rng =
                    ChaCha8Rng::seed_from_u64(mix_seed(base_seed, n as u64, idx as u64));
                let params = ParamSet::uniform_circuit(
                    &model,
                    T::zero(),
                    real::<T>(2.0) * T::PI(),
                    &mut rng,
                );
                let mut env = Environment::<T>::new(EnvKind::CartPole);
                let mut state = preprocess(env.reset(&mut rng), EnvKind::CartPole);
                let mut batch = Vec::with_capacity(BATCH);
                while batch.len() < BATCH {
                    let action = rng.gen_range(0..2);
                    let result = env.step(action).expect("env freshly reset");
                    let next_state = preprocess(result.observation, EnvKind::CartPole);
                    batch.push(Transition {
                        state,
                        action,
                        reward: result.reward,
                        next_state,
                        done: result.done,
                    });
                    state = if result.done {
                        preprocess(env.reset(&mut rng), EnvKind::CartPole)
                    } else {
                        next_state
                    };
                }
                let refs: Vec<&Transition<T>> = batch.iter().collect();
                batch_loss_grad(&model, &params, &params, &refs, gamma)
                    .map(|(_, grad)| l2_norm(&grad))
            })
            .collect::<Result<Vec<T>, TrainError>>()?;
        let (mean, var) = population_stats(&norms);
        points.push(BpScanPoint {
            qubits: n,
            mean_norm: mean,
            variance: var,
        });
    }
    Ok(points)
}

/// Result of a least-squares line fit in some transformed space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitLine<T> {
    pub slope: T,
    pub intercept: T,
    pub r2: T,
}

/// Both decay hypotheses fitted to the same data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit<T> {
    /// `ln v = slope * n + intercept`: exponential decay when slope < 0.
    pub exponential: FitLine<T>,
    /// `ln v = slope * ln n + intercept`: polynomial decay when slope < 0.
    pub polynomial: FitLine<T>,
}

fn linear_fit<T: Scalar>(x: &[T], y: &[T]) -> FitLine<T> {
    let n = real::<T>(x.len() as f64);
    let mean_x = x.iter().copied().sum::<T>() / n;
    let mean_y = y.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mean_x) * (xi - mean_x);
        sxy += (xi - mean_x) * (yi - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = T::zero();
    let mut ss_tot = T::zero();
    for (&xi, &yi) in x.iter().zip(y) {
        let pred = slope * xi + intercept;
        ss_res += (yi - pred) * (yi - pred);
        ss_tot += (yi - mean_y) * (yi - mean_y);
    }
    // Constant data: the line explains everything there is to explain.
    let tiny = real::<T>(1e-24);
    let r2 = if ss_tot <= tiny {
        if ss_res <= tiny {
            T::one()
        } else {
            T::zero()
        }
    } else {
        T::one() - ss_res / ss_tot
    };
    FitLine {
        slope,
        intercept,
        r2,
    }
}

/// Fits exponential (`ln v` vs `n`) and polynomial (`ln v` vs `ln n`) decay
/// models to positive values `v` over qubit counts `n`. Needs at least
/// three points.
pub fn fit_decay<T: Scalar>(qubits: &[usize], values: &[T]) -> Result<DecayFit<T>, MetricsError> {
    if qubits.len() != values.len() {
        return Err(MetricsError::LengthMismatch {
            x: qubits.len(),
            y: values.len(),
        });
    }
    if qubits.len() < 3 {
        return Err(MetricsError::TooFewPoints(qubits.len()));
    }
    for (i, v) in values.iter().enumerate() {
        if !(*v > T::zero()) {
            return Err(MetricsError::NonPositiveValue(
                v.to_f64().unwrap_or(f64::NAN),
                i,
            ));
        }
    }
    let ln_v: Vec<T> = values.iter().map(|v| v.ln()).collect();
    let n: Vec<T> = qubits.iter().map(|&q| real::<T>(q as f64)).collect();
    let ln_n: Vec<T> = n.iter().map(|v| v.ln()).collect();
    Ok(DecayFit {
        exponential: linear_fit(&n, &ln_v),
        polynomial: linear_fit(&ln_n, &ln_v),
    })
}

/// `returns.csv`: `episode,mean_return,std_return`.
pub fn write_returns_csv<T: Scalar, W: Write>(
    mut w: W,
    curve: &AggregateCurve<T>,
) -> io::Result<()> {
    writeln!(w, "episode,mean_return,std_return")?;
    for i in 0..curve.x.len() {
        writeln!(w, "{},{},{}", curve.x[i], curve.mean[i], curve.spread[i])?;
    }
    Ok(())
}

/// `gradients.csv`: `step,mean_norm,var_norm`.
pub fn write_gradients_csv<T: Scalar, W: Write>(
    mut w: W,
    curve: &AggregateCurve<T>,
) -> io::Result<()> {
    writeln!(w, "step,mean_norm,var_norm")?;
    for i in 0..curve.x.len() {
        writeln!(w, "{},{},{}", curve.x[i], curve.mean[i], curve.spread[i])?;
    }
    Ok(())
}

/// `losses.csv`: `step,mean_loss,var_loss`.
pub fn write_losses_csv<T: Scalar, W: Write>(
    mut w: W,
    curve: &AggregateCurve<T>,
) -> io::Result<()> {
    writeln!(w, "step,mean_loss,var_loss")?;
    for i in 0..curve.x.len() {
        writeln!(w, "{},{},{}", curve.x[i], curve.mean[i], curve.spread[i])?;
    }
    Ok(())
}

/// `bp.csv`: `qubits,variance,exp_r2,poly_r2` — the fit-quality columns
/// repeat the scan-wide fit on every row so the file is self-contained.
pub fn write_bp_csv<T: Scalar, W: Write>(
    mut w: W,
    points: &[BpScanPoint<T>],
    fit: &DecayFit<T>,
) -> io::Result<()> {
    writeln!(w, "qubits,variance,exp_r2,poly_r2")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            p.qubits, p.variance, fit.exponential.r2, fit.polynomial.r2
        )?;
    }
    Ok(())
}
