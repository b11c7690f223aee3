//! Experiment configuration: a TOML schema that resolves into the library's
//! model/trainer types, plus the bundled presets.
//!
//! A config names an experiment kind (`rl-train`, `bp-scan`, `supervised`)
//! and its sections. An optional `[[sweep]]` list expands one config into
//! labeled variants, each overriding a few model/hyper fields — that is how
//! an ablation grid or a qubit sweep lives in one file. [`ExperimentConfig::
//! validate`] checks every variant up front (naming the offending field) and
//! returns fully resolved copies: every hyperparameter made explicit, the
//! output directory fixed, the sweep folded away. The runner echoes each
//! resolved copy next to its outputs, and re-running that echo reproduces
//! the variant exactly — seeds derive from `run.base-seed` and stable
//! indices, never from a variant's position in the sweep.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use vqdqn::ansatz::{
    cartpole_observables, env_observables, AnsatzFamily, EncodingMode, InputScaling, ModelError,
    OutputScaling,
};
use vqdqn::dqn::{TrainConfig, TrainError};
use vqdqn::env::EnvKind;
use vqdqn::metrics::{bp_observables, ObservableKind};
use vqdqn::{ModelSpec64, TrainConfig64};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    RlTrain,
    BpScan,
    Supervised,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::RlTrain => "rl-train",
            ExperimentKind::BpScan => "bp-scan",
            ExperimentKind::Supervised => "supervised",
        })
    }
}

/// Circuit description. Family-irrelevant fields (e.g. `encoding` for a
/// Skolik model) are accepted and ignored, so sweeps can toggle the family
/// without rewriting the section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ModelSection {
    pub family: AnsatzFamily,
    pub qubits: usize,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default = "default_true")]
    pub reupload: bool,
    #[serde(default = "default_input_scaling")]
    pub input_scaling: InputScaling,
    #[serde(default = "default_output_scaling")]
    pub output_scaling: OutputScaling,
    #[serde(default = "default_encoding")]
    pub encoding: EncodingMode,
    #[serde(default = "default_true")]
    pub entangle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct EnvSection {
    pub kind: EnvKind,
}

/// Reinforcement-learning hyperparameters. Every field is optional; holes
/// are filled from the environment's reference defaults, and the resolved
/// values are echoed back in each variant's effective config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct HyperSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub episodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub update_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_sync_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub buffer_capacity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_decay: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_rotational: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_input: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr_output: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve_window: Option<usize>,
}

impl HyperSection {
    fn is_empty(&self) -> bool {
        self == &HyperSection::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct RunSection {
    pub agents: usize,
    pub base_seed: u64,
    /// Worker threads; defaults to the agent count.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parallelism: Option<usize>,
    /// Directory under the output root; defaults to the experiment name.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output_dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct BpSection {
    pub qubit_counts: Vec<usize>,
    pub samples: usize,
    /// Each listed kind becomes its own output variant.
    pub observables: Vec<ObservableKind>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct SupervisedSection {
    pub epochs: usize,
    #[serde(default = "default_supervised_batch")]
    pub batch_size: usize,
    #[serde(default = "default_supervised_samples")]
    pub samples: usize,
}

/// One sweep entry: a label (its output subdirectory) plus the fields it
/// overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct VariantSpec {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub family: Option<AnsatzFamily>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub qubits: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub layers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reupload: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub input_scaling: Option<InputScaling>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub output_scaling: Option<OutputScaling>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub encoding: Option<EncodingMode>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entangle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub episodes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_sync_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub name: String,
    pub model: ModelSection,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub env: Option<EnvSection>,
    #[serde(skip_serializing_if = "HyperSection::is_empty", default)]
    pub hyper: HyperSection,
    pub run: RunSection,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bp: Option<BpSection>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub supervised: Option<SupervisedSection>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sweep: Vec<VariantSpec>,
}

fn default_layers() -> usize {
    5
}
fn default_true() -> bool {
    true
}
fn default_input_scaling() -> InputScaling {
    InputScaling::Trainable
}
fn default_output_scaling() -> OutputScaling {
    OutputScaling::Trainable
}
fn default_encoding() -> EncodingMode {
    EncodingMode::Full
}
fn default_gamma() -> f64 {
    0.99
}
fn default_supervised_batch() -> usize {
    32
}
fn default_supervised_samples() -> usize {
    500
}

/// One unit of work after validation: a single-variant config with every
/// default made explicit. `label` is `None` when the source config had no
/// sweep (outputs then land directly in the experiment directory).
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedVariant {
    pub label: Option<String>,
    pub config: ExperimentConfig,
}

fn path_safe(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

/// Output directories may nest (`name/label`, as the runner itself writes
/// into echoed configs) but stay relative: every `/`-separated segment must
/// be a plain name.
fn dir_safe(s: &str) -> bool {
    !s.is_empty() && s.split('/').all(path_safe)
}

/// Builds the circuit an RL variant trains: family-specific layout, the
/// environment's observation width, and its per-action observables.
pub fn build_rl_model(model: &ModelSection, env: EnvKind) -> Result<ModelSpec64, ConfigError> {
    let obs = env_observables(env, model.qubits)
        .map_err(|e| invalid("model.qubits", e.to_string()))?;
    let built = match model.family {
        AnsatzFamily::Skolik => ModelSpec64::skolik(
            model.qubits,
            model.layers,
            model.reupload,
            model.input_scaling,
            model.output_scaling,
            obs,
        ),
        AnsatzFamily::Uqc => ModelSpec64::uqc(
            model.qubits,
            model.layers,
            model.encoding,
            model.entangle,
            env.observation_dim(),
            obs,
        ),
    };
    built.map_err(|e| invalid("model", e.to_string()))
}

/// Builds the circuit a supervised variant trains. Both families read the
/// half-register Z-string pair, and the dataset width equals the qubit
/// count, so Skolik and UQC models see the same data.
pub fn build_supervised_model(model: &ModelSection) -> Result<ModelSpec64, ConfigError> {
    let obs = cartpole_observables(model.qubits)
        .map_err(|e| invalid("model.qubits", e.to_string()))?;
    let built = match model.family {
        AnsatzFamily::Skolik => ModelSpec64::skolik(
            model.qubits,
            model.layers,
            model.reupload,
            model.input_scaling,
            model.output_scaling,
            obs,
        ),
        AnsatzFamily::Uqc => ModelSpec64::uqc(
            model.qubits,
            model.layers,
            EncodingMode::Full,
            model.entangle,
            model.qubits,
            obs,
        ),
    };
    built.map_err(|e| invalid("model", e.to_string()))
}

/// Model factory for landscape scans: a full-encoding UQC over the CartPole
/// feature width at any qubit count, reading the requested observable kind.
pub fn bp_model_builder(
    model: &ModelSection,
) -> impl Fn(usize, ObservableKind) -> Result<ModelSpec64, ModelError> + Sync + '_ {
    let layers = model.layers;
    let entangle = model.entangle;
    move |n, kind| {
        let obs = bp_observables(kind, n).map_err(ModelError::from)?;
        ModelSpec64::uqc(
            n,
            layers,
            EncodingMode::Full,
            entangle,
            EnvKind::CartPole.observation_dim(),
            obs,
        )
    }
}

/// Fills a [`TrainConfig`] from the environment's reference defaults plus
/// any explicit overrides.
pub fn resolve_train(hyper: &HyperSection, env: EnvKind) -> TrainConfig64 {
    let mut t = TrainConfig::<f64>::for_env(env);
    if let Some(v) = hyper.episodes {
        t.episodes = v;
    }
    if let Some(v) = hyper.gamma {
        t.gamma = v;
    }
    if let Some(v) = hyper.batch_size {
        t.batch_size = v;
    }
    if let Some(v) = hyper.update_every {
        t.update_every = v;
    }
    if let Some(v) = hyper.target_sync_every {
        t.target_sync_every = v;
    }
    if let Some(v) = hyper.buffer_capacity {
        t.buffer_capacity = v;
    }
    if let Some(v) = hyper.epsilon_start {
        t.epsilon.start = v;
    }
    if let Some(v) = hyper.epsilon_decay {
        t.epsilon.decay = v;
    }
    if let Some(v) = hyper.epsilon_min {
        t.epsilon.min = v;
    }
    if let Some(v) = hyper.lr_rotational {
        t.lr_rotational = v;
    }
    if let Some(v) = hyper.lr_input {
        t.lr_input = v;
    }
    if let Some(v) = hyper.lr_output {
        t.lr_output = v;
    }
    if let Some(v) = hyper.solve_threshold {
        t.solve_threshold = Some(v);
    }
    if let Some(v) = hyper.solve_window {
        t.solve_window = v;
    }
    t
}

fn hyper_from_train(t: &TrainConfig64) -> HyperSection {
    HyperSection {
        episodes: Some(t.episodes),
        gamma: Some(t.gamma),
        batch_size: Some(t.batch_size),
        update_every: Some(t.update_every),
        target_sync_every: Some(t.target_sync_every),
        buffer_capacity: Some(t.buffer_capacity),
        epsilon_start: Some(t.epsilon.start),
        epsilon_decay: Some(t.epsilon.decay),
        epsilon_min: Some(t.epsilon.min),
        lr_rotational: Some(t.lr_rotational),
        lr_input: Some(t.lr_input),
        lr_output: Some(t.lr_output),
        solve_threshold: t.solve_threshold,
        solve_window: Some(t.solve_window),
    }
}

impl ExperimentConfig {
    /// Reads and parses a TOML config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Ok(toml::from_str(&text)?)
    }

    fn fold(&self, v: &VariantSpec) -> ExperimentConfig {
        let mut c = self.clone();
        c.sweep = Vec::new();
        if let Some(x) = v.family {
            c.model.family = x;
        }
        if let Some(x) = v.qubits {
            c.model.qubits = x;
        }
        if let Some(x) = v.layers {
            c.model.layers = x;
        }
        if let Some(x) = v.reupload {
            c.model.reupload = x;
        }
        if let Some(x) = v.input_scaling {
            c.model.input_scaling = x;
        }
        if let Some(x) = v.output_scaling {
            c.model.output_scaling = x;
        }
        if let Some(x) = v.encoding {
            c.model.encoding = x;
        }
        if let Some(x) = v.entangle {
            c.model.entangle = x;
        }
        if let Some(x) = v.episodes {
            c.hyper.episodes = Some(x);
        }
        if let Some(x) = v.target_sync_every {
            c.hyper.target_sync_every = Some(x);
        }
        if let Some(x) = v.epochs {
            if let Some(s) = &mut c.supervised {
                s.epochs = x;
            }
        }
        c
    }

    fn check_sections(&self) -> Result<(), ConfigError> {
        let forbid = |present: bool, field: &str| {
            if present {
                Err(invalid(
                    field,
                    format!("section not used by {} experiments", self.kind),
                ))
            } else {
                Ok(())
            }
        };
        match self.kind {
            ExperimentKind::RlTrain => {
                if self.env.is_none() {
                    return Err(invalid("env", "rl-train needs an [env] section"));
                }
                forbid(self.bp.is_some(), "bp")?;
                forbid(self.supervised.is_some(), "supervised")?;
            }
            ExperimentKind::BpScan => {
                if self.bp.is_none() {
                    return Err(invalid("bp", "bp-scan needs a [bp] section"));
                }
                forbid(self.env.is_some(), "env")?;
                forbid(self.supervised.is_some(), "supervised")?;
                forbid(!self.hyper.is_empty(), "hyper")?;
                if !self.sweep.is_empty() {
                    return Err(invalid(
                        "sweep",
                        "bp-scan expands over its observables list, not a sweep",
                    ));
                }
            }
            ExperimentKind::Supervised => {
                if self.supervised.is_none() {
                    return Err(invalid("supervised", "needs a [supervised] section"));
                }
                forbid(self.env.is_some(), "env")?;
                forbid(self.bp.is_some(), "bp")?;
                forbid(!self.hyper.is_empty(), "hyper")?;
            }
        }
        Ok(())
    }

    /// Checks everything that can fail before any work starts and returns
    /// one fully resolved config per variant. Errors name the offending
    /// field.
    pub fn validate(&self) -> Result<Vec<ResolvedVariant>, ConfigError> {
        if !path_safe(&self.name) {
            return Err(invalid(
                "name",
                "must be non-empty and use only [A-Za-z0-9-_]",
            ));
        }
        if let Some(dir) = &self.run.output_dir {
            if !dir_safe(dir) {
                return Err(invalid(
                    "run.output-dir",
                    "must be a relative path of [A-Za-z0-9-_] segments",
                ));
            }
        }
        if self.run.agents == 0 {
            return Err(invalid("run.agents", "need at least one agent"));
        }
        if self.run.parallelism == Some(0) {
            return Err(invalid("run.parallelism", "must be at least 1 when set"));
        }
        self.check_sections()?;

        let mut labels: Vec<String> = Vec::new();
        for v in &self.sweep {
            if !path_safe(&v.label) {
                return Err(invalid(
                    "sweep.label",
                    "must be non-empty and use only [A-Za-z0-9-_]",
                ));
            }
            if labels.contains(&v.label) {
                return Err(invalid("sweep.label", format!("duplicate '{}'", v.label)));
            }
            labels.push(v.label.clone());
        }

        let base_dir = self
            .run
            .output_dir
            .clone()
            .unwrap_or_else(|| self.name.clone());

        // Expand to (label, folded config) pairs.
        let mut expanded: Vec<(Option<String>, ExperimentConfig)> = Vec::new();
        if self.kind == ExperimentKind::BpScan {
            let bp = self.bp.as_ref().expect("presence checked");
            if bp.observables.is_empty() {
                return Err(invalid("bp.observables", "need at least one entry"));
            }
            if bp.observables.len() == 1 {
                expanded.push((None, self.clone()));
            } else {
                for &kind in &bp.observables {
                    let mut c = self.clone();
                    let label = match kind {
                        ObservableKind::Local => "local",
                        ObservableKind::Global => "global",
                    };
                    c.bp.as_mut().expect("presence checked").observables = vec![kind];
                    expanded.push((Some(label.to_string()), c));
                }
            }
        } else if self.sweep.is_empty() {
            expanded.push((None, self.clone()));
        } else {
            for v in &self.sweep {
                expanded.push((Some(v.label.clone()), self.fold(v)));
            }
        }

        let mut resolved = Vec::with_capacity(expanded.len());
        for (label, mut c) in expanded {
            c.run.parallelism = Some(c.run.parallelism.unwrap_or(c.run.agents));
            c.run.output_dir = Some(match &label {
                Some(l) => format!("{base_dir}/{l}"),
                None => base_dir.clone(),
            });
            match c.kind {
                ExperimentKind::RlTrain => {
                    let env = c.env.as_ref().expect("presence checked").kind;
                    let model = build_rl_model(&c.model, env)?;
                    let train = resolve_train(&c.hyper, env);
                    train.validate(&model).map_err(|e| match e {
                        TrainError::InvalidConfig { field } => {
                            invalid(field, "out of range or inconsistent with the model")
                        }
                        other => invalid("config", other.to_string()),
                    })?;
                    c.hyper = hyper_from_train(&train);
                }
                ExperimentKind::BpScan => {
                    if c.model.family != AnsatzFamily::Uqc {
                        return Err(invalid(
                            "model.family",
                            "landscape scans sweep qubit counts; the skolik encoding \
                             ties feature width to the qubit count, so only uqc works",
                        ));
                    }
                    if c.model.encoding != EncodingMode::Full {
                        return Err(invalid("model.encoding", "scans use full encoding"));
                    }
                    let bp = c.bp.as_ref().expect("presence checked");
                    if bp.qubit_counts.len() < 3 {
                        return Err(invalid(
                            "bp.qubit-counts",
                            "decay fits need at least three qubit counts",
                        ));
                    }
                    if bp.qubit_counts.iter().any(|&n| n == 0) {
                        return Err(invalid("bp.qubit-counts", "qubit counts must be positive"));
                    }
                    if bp.samples < 2 {
                        return Err(invalid(
                            "bp.samples",
                            "variance across initializations needs at least two samples",
                        ));
                    }
                    if !(0.0..=1.0).contains(&bp.gamma) {
                        return Err(invalid("bp.gamma", "must lie in [0, 1]"));
                    }
                    // Building the widest model catches register-size limits.
                    let builder = bp_model_builder(&c.model);
                    let widest = *bp.qubit_counts.iter().max().expect("non-empty");
                    let kind = bp.observables[0];
                    builder(widest, kind).map_err(|e| invalid("bp.qubit-counts", e.to_string()))?;
                }
                ExperimentKind::Supervised => {
                    let sup = c.supervised.as_ref().expect("presence checked");
                    if sup.epochs == 0 {
                        return Err(invalid("supervised.epochs", "need at least one epoch"));
                    }
                    if sup.batch_size == 0 {
                        return Err(invalid("supervised.batch-size", "must be positive"));
                    }
                    if sup.samples < 5 {
                        return Err(invalid(
                            "supervised.samples",
                            "the 80/20 split needs at least five samples",
                        ));
                    }
                    if c.model.qubits < 2 {
                        return Err(invalid(
                            "model.qubits",
                            "supervised datasets need at least two features",
                        ));
                    }
                    build_supervised_model(&c.model)?;
                }
            }
            resolved.push(ResolvedVariant { label, config: c });
        }
        Ok(resolved)
    }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

pub const PRESET_NAMES: [&str; 10] = [
    "skolik-ablation-cartpole",
    "skolik-ablation-acrobot",
    "target-c-sweep-cartpole",
    "target-c-sweep-acrobot",
    "uqc-entanglement-cartpole",
    "uqc-entanglement-acrobot",
    "uqc-qubit-sweep-cartpole",
    "uqc-qubit-sweep-acrobot",
    "bp-scan",
    "supervised-sweep",
];

fn base_model(family: AnsatzFamily, qubits: usize) -> ModelSection {
    ModelSection {
        family,
        qubits,
        layers: 5,
        reupload: true,
        input_scaling: InputScaling::Trainable,
        output_scaling: OutputScaling::Trainable,
        encoding: EncodingMode::Full,
        entangle: true,
    }
}

fn rl_preset(
    name: &str,
    model: ModelSection,
    env: EnvKind,
    base_seed: u64,
    sweep: Vec<VariantSpec>,
) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::RlTrain,
        name: name.to_string(),
        model,
        env: Some(EnvSection { kind: env }),
        hyper: HyperSection::default(),
        run: RunSection {
            agents: 10,
            base_seed,
            parallelism: None,
            output_dir: None,
        },
        bp: None,
        supervised: None,
        sweep,
    }
}

fn skolik_ablation_sweep() -> Vec<VariantSpec> {
    let mut sweep = Vec::new();
    for (prefix, reupload) in [("baseline", false), ("reupload", true)] {
        for (suffix, input, output) in [
            ("plain", InputScaling::Fixed, OutputScaling::Fixed),
            ("in", InputScaling::Trainable, OutputScaling::Fixed),
            ("out", InputScaling::Fixed, OutputScaling::Trainable),
            ("in-out", InputScaling::Trainable, OutputScaling::Trainable),
        ] {
            sweep.push(VariantSpec {
                label: format!("{prefix}-{suffix}"),
                reupload: Some(reupload),
                input_scaling: Some(input),
                output_scaling: Some(output),
                ..VariantSpec::default()
            });
        }
    }
    sweep
}

fn target_c_sweep(values: &[usize]) -> Vec<VariantSpec> {
    values
        .iter()
        .map(|&c| VariantSpec {
            label: format!("c{c:04}"),
            target_sync_every: Some(c),
            ..VariantSpec::default()
        })
        .collect()
}

fn uqc_entanglement_sweep() -> Vec<VariantSpec> {
    let cases: [(&str, usize, EncodingMode, bool); 9] = [
        ("full-n1", 1, EncodingMode::Full, true),
        ("full-n2-ent", 2, EncodingMode::Full, true),
        ("full-n2-noent", 2, EncodingMode::Full, false),
        ("full-n4-ent", 4, EncodingMode::Full, true),
        ("full-n4-noent", 4, EncodingMode::Full, false),
        ("partial-n2-ent", 2, EncodingMode::Partial, true),
        ("partial-n2-noent", 2, EncodingMode::Partial, false),
        ("partial-n4-ent", 4, EncodingMode::Partial, true),
        ("partial-n4-noent", 4, EncodingMode::Partial, false),
    ];
    cases
        .iter()
        .map(|&(label, qubits, encoding, entangle)| VariantSpec {
            label: label.to_string(),
            qubits: Some(qubits),
            encoding: Some(encoding),
            entangle: Some(entangle),
            ..VariantSpec::default()
        })
        .collect()
}

fn qubit_sweep(counts: &[usize]) -> Vec<VariantSpec> {
    counts
        .iter()
        .map(|&n| VariantSpec {
            label: format!("n{n:02}"),
            qubits: Some(n),
            ..VariantSpec::default()
        })
        .collect()
}

/// Builds the named preset, or `None` for an unknown name.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let even_2_to_12: Vec<usize> = (1..=6).map(|k| 2 * k).collect();
    let cfg = match name {
        "skolik-ablation-cartpole" => rl_preset(
            name,
            base_model(AnsatzFamily::Skolik, 4),
            EnvKind::CartPole,
            101,
            skolik_ablation_sweep(),
        ),
        "skolik-ablation-acrobot" => rl_preset(
            name,
            base_model(AnsatzFamily::Skolik, 4),
            EnvKind::Acrobot,
            102,
            skolik_ablation_sweep(),
        ),
        "target-c-sweep-cartpole" => rl_preset(
            name,
            base_model(AnsatzFamily::Skolik, 4),
            EnvKind::CartPole,
            103,
            target_c_sweep(&[1, 500, 1000, 2500]),
        ),
        "target-c-sweep-acrobot" => rl_preset(
            name,
            base_model(AnsatzFamily::Skolik, 4),
            EnvKind::Acrobot,
            104,
            target_c_sweep(&[100, 1000, 2500, 5000]),
        ),
        "uqc-entanglement-cartpole" => rl_preset(
            name,
            base_model(AnsatzFamily::Uqc, 4),
            EnvKind::CartPole,
            105,
            uqc_entanglement_sweep(),
        ),
        "uqc-entanglement-acrobot" => rl_preset(
            name,
            base_model(AnsatzFamily::Uqc, 4),
            EnvKind::Acrobot,
            106,
            uqc_entanglement_sweep(),
        ),
        "uqc-qubit-sweep-cartpole" => rl_preset(
            name,
            base_model(AnsatzFamily::Uqc, 4),
            EnvKind::CartPole,
            107,
            qubit_sweep(&even_2_to_12),
        ),
        "uqc-qubit-sweep-acrobot" => rl_preset(
            name,
            base_model(AnsatzFamily::Uqc, 4),
            EnvKind::Acrobot,
            108,
            qubit_sweep(&even_2_to_12),
        ),
        "bp-scan" => ExperimentConfig {
            kind: ExperimentKind::BpScan,
            name: name.to_string(),
            model: base_model(AnsatzFamily::Uqc, 4),
            env: None,
            hyper: HyperSection::default(),
            run: RunSection {
                agents: 1,
                base_seed: 109,
                parallelism: None,
                output_dir: None,
            },
            bp: Some(BpSection {
                qubit_counts: (1..=8).map(|k| 2 * k).collect(),
                samples: 1000,
                observables: vec![ObservableKind::Local, ObservableKind::Global],
                gamma: 0.99,
            }),
            supervised: None,
            sweep: Vec::new(),
        },
        "supervised-sweep" => {
            let mut sweep = Vec::new();
            for family in [AnsatzFamily::Skolik, AnsatzFamily::Uqc] {
                let tag = match family {
                    AnsatzFamily::Skolik => "skolik",
                    AnsatzFamily::Uqc => "uqc",
                };
                for &n in &even_2_to_12 {
                    sweep.push(VariantSpec {
                        label: format!("{tag}-n{n:02}"),
                        family: Some(family),
                        qubits: Some(n),
                        ..VariantSpec::default()
                    });
                }
            }
            ExperimentConfig {
                kind: ExperimentKind::Supervised,
                name: name.to_string(),
                model: base_model(AnsatzFamily::Skolik, 2),
                env: None,
                hyper: HyperSection::default(),
                run: RunSection {
                    agents: 5,
                    base_seed: 110,
                    parallelism: None,
                    output_dir: None,
                },
                bp: None,
                supervised: Some(SupervisedSection {
                    epochs: 30,
                    batch_size: 32,
                    samples: 500,
                }),
                sweep,
            }
        }
        _ => return None,
    };
    Some(cfg)
}

/// All bundled presets in [`PRESET_NAMES`] order.
pub fn presets() -> Vec<ExperimentConfig> {
    PRESET_NAMES
        .iter()
        .map(|n| preset(n).expect("bundled preset"))
        .collect()
}
