//! Experiment runner for the quantum Q-learning library: TOML configs and
//! presets ([`config`]), plus execution, logging, and CSV/JSON aggregation
//! ([`runner`]).

pub mod config;
pub mod runner;
