//! Experiment configuration from flags and config files.
//!
//! Precedence is flags over file values over defaults. Config files are
//! flat key/value documents whose keys are the flag names without the
//! leading dashes (`students = 100`, `p-explore = 0.7`). TOML is the
//! primary format; a `.json` file with the same flat keys is accepted too,
//! which lets the `config` object of a run manifest be replayed directly.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::ExperimentConfig;
use crate::policy::PolicyParams;
use crate::student::{self, StudentKnowledge, StudentModel};
use crate::taskgen::DecayParams;

pub const DEFAULT_STUDENTS: u32 = 1000;
pub const DEFAULT_TASKSETS: u32 = 200;
pub const DEFAULT_ITERATIONS: u32 = 100;
pub const DEFAULT_SPAN: usize = 1;
pub const DEFAULT_SEED: u64 = 0;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("{0}")]
    Usage(String),

    #[error("{flag} is required for --model {model}")]
    Missing { flag: &'static str, model: String },

    #[error("{flag} does not apply to --model {model}")]
    NotApplicable { flag: &'static str, model: String },

    #[error("{flag} = {value} is out of range: expected {expected}")]
    OutOfRange {
        flag: &'static str,
        value: String,
        expected: &'static str,
    },

    #[error("{}: {message}", path.display())]
    File { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Static,
    StaticEps,
    Dynamic,
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelKind::Static => "static",
            ModelKind::StaticEps => "static-eps",
            ModelKind::Dynamic => "dynamic",
        })
    }
}

/// Every experiment parameter, each optional until resolved.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ConfigValues {
    /// Students per cohort repetition
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub students: Option<u32>,
    /// Task-sets (of ten tasks) per student
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tasksets: Option<u32>,
    /// Independent repetitions of the cohort
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<u32>,
    /// Simulated student model
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelKind>,
    /// Success probability of the static student
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Constant exploration rate of the static-eps student
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Initial exploration rate of the dynamic student
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon0: Option<f64>,
    /// Task count after which the dynamic student stops exploring
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u32>,
    /// Success probability when exploring
    #[arg(long = "p-explore")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_explore: Option<f64>,
    /// Knowledge increment rate of epsilon students
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Learning speed of the matrix update
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Per-draw weight factor within a task-set
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    /// Neighbour cells per axis receiving mass
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub span: Option<usize>,
    /// Master seed
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

macro_rules! overlay_fields {
    ($base:expr, $over:expr, $($field:ident),*) => {
        ConfigValues { $($field: $over.$field.or($base.$field)),* }
    };
}

impl ConfigValues {
    /// Values from `over` where present, otherwise from `self`.
    pub fn overlay(&self, over: &ConfigValues) -> ConfigValues {
        overlay_fields!(
            self, over, students, tasksets, iterations, model, p, epsilon, epsilon0, cutoff,
            p_explore, eta, lambda, decay, span, seed
        )
    }

    /// Fully populated values that resolve back to `config`.
    pub fn from_config(config: &ExperimentConfig) -> ConfigValues {
        let mut values = ConfigValues {
            students: Some(config.num_students),
            tasksets: Some(config.tasksets_per_student),
            iterations: Some(config.iterations),
            lambda: Some(config.policy.lambda()),
            decay: Some(config.decay.factor()),
            span: Some(config.policy.neighbor_span()),
            seed: Some(config.master_seed),
            ..Default::default()
        };
        match config.model {
            StudentModel::Static { p_success } => {
                values.model = Some(ModelKind::Static);
                values.p = Some(p_success);
            }
            StudentModel::StaticEpsilon {
                epsilon,
                p_explore,
                eta,
                ..
            } => {
                values.model = Some(ModelKind::StaticEps);
                values.epsilon = Some(epsilon);
                values.p_explore = Some(p_explore);
                values.eta = Some(eta);
            }
            StudentModel::DynamicEpsilon {
                epsilon0,
                cutoff,
                p_explore,
                eta,
                ..
            } => {
                values.model = Some(ModelKind::Dynamic);
                values.epsilon0 = Some(epsilon0);
                values.cutoff = Some(cutoff);
                values.p_explore = Some(p_explore);
                values.eta = Some(eta);
            }
        }
        values
    }

    /// Applies defaults and validates every value.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let kind = self
            .model
            .ok_or(ConfigError::Usage("--model is required".into()))?;
        let model_name = kind.to_string();
        let reject = |flag: &'static str, present: bool| -> Result<(), ConfigError> {
            if present {
                Err(ConfigError::NotApplicable {
                    flag,
                    model: model_name.clone(),
                })
            } else {
                Ok(())
            }
        };
        let require = |flag: &'static str, value: Option<f64>| -> Result<f64, ConfigError> {
            value.ok_or(ConfigError::Missing {
                flag,
                model: model_name.clone(),
            })
        };

        let model = match kind {
            ModelKind::Static => {
                reject("--epsilon", self.epsilon.is_some())?;
                reject("--epsilon0", self.epsilon0.is_some())?;
                reject("--cutoff", self.cutoff.is_some())?;
                reject("--p-explore", self.p_explore.is_some())?;
                reject("--eta", self.eta.is_some())?;
                StudentModel::Static {
                    p_success: probability("--p", require("--p", self.p)?)?,
                }
            }
            ModelKind::StaticEps => {
                reject("--p", self.p.is_some())?;
                reject("--epsilon0", self.epsilon0.is_some())?;
                reject("--cutoff", self.cutoff.is_some())?;
                StudentModel::StaticEpsilon {
                    epsilon: probability(
                        "--epsilon",
                        self.epsilon.unwrap_or(student::DEFAULT_STATIC_EPSILON),
                    )?,
                    p_explore: probability("--p-explore", require("--p-explore", self.p_explore)?)?,
                    eta: probability("--eta", self.eta.unwrap_or(student::DEFAULT_ETA))?,
                    knowledge: StudentKnowledge::default(),
                }
            }
            ModelKind::Dynamic => {
                reject("--p", self.p.is_some())?;
                reject("--epsilon", self.epsilon.is_some())?;
                StudentModel::DynamicEpsilon {
                    epsilon0: probability(
                        "--epsilon0",
                        self.epsilon0.unwrap_or(student::DEFAULT_EPSILON0),
                    )?,
                    cutoff: at_least_one(
                        "--cutoff",
                        self.cutoff.unwrap_or(student::DEFAULT_CUTOFF),
                    )?,
                    p_explore: probability(
                        "--p-explore",
                        self.p_explore.unwrap_or(student::DEFAULT_DYNAMIC_P_EXPLORE),
                    )?,
                    eta: probability("--eta", self.eta.unwrap_or(student::DEFAULT_ETA))?,
                    knowledge: StudentKnowledge::default(),
                }
            }
        };

        let lambda = probability(
            "--lambda",
            self.lambda.unwrap_or(PolicyParams::DEFAULT_LAMBDA),
        )?;
        let span = self.span.unwrap_or(DEFAULT_SPAN);
        if span == 0 {
            return Err(out_of_range("--span", span, "an integer >= 1"));
        }
        let decay = self.decay.unwrap_or(DecayParams::DEFAULT_FACTOR);
        let decay = DecayParams::new(decay)
            .map_err(|_| out_of_range("--decay", decay, "a value in (0, 1]"))?;

        Ok(ExperimentConfig {
            num_students: at_least_one("--students", self.students.unwrap_or(DEFAULT_STUDENTS))?,
            tasksets_per_student: at_least_one(
                "--tasksets",
                self.tasksets.unwrap_or(DEFAULT_TASKSETS),
            )?,
            iterations: at_least_one(
                "--iterations",
                self.iterations.unwrap_or(DEFAULT_ITERATIONS),
            )?,
            model,
            policy: PolicyParams::new(lambda, span).expect("lambda and span validated above"),
            decay,
            master_seed: self.seed.unwrap_or(DEFAULT_SEED),
        })
    }
}

fn out_of_range(flag: &'static str, value: impl ToString, expected: &'static str) -> ConfigError {
    ConfigError::OutOfRange {
        flag,
        value: value.to_string(),
        expected,
    }
}

fn probability(flag: &'static str, value: f64) -> Result<f64, ConfigError> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(out_of_range(flag, value, "a value in [0, 1]"))
    }
}

fn at_least_one(flag: &'static str, value: u32) -> Result<u32, ConfigError> {
    if value >= 1 {
        Ok(value)
    } else {
        Err(out_of_range(flag, value, "an integer >= 1"))
    }
}

fn read_file(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|e| ConfigError::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn file_error(path: &Path, message: impl ToString) -> ConfigError {
    ConfigError::File {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"))
}

/// Reads a flat key/value config file.
pub fn load_config_file(path: &Path) -> Result<ConfigValues, ConfigError> {
    let text = read_file(path)?;
    if is_json(path) {
        serde_json::from_str(&text).map_err(|e| file_error(path, e))
    } else {
        toml::from_str(&text).map_err(|e| file_error(path, e))
    }
}

/// Flags over optional file over defaults.
pub fn parse_config(
    flags: &ConfigValues,
    file: Option<&Path>,
) -> Result<ExperimentConfig, ConfigError> {
    let base = match file {
        Some(path) => load_config_file(path)?,
        None => ConfigValues::default(),
    };
    base.overlay(flags).resolve()
}

/// Labeled runs for `compare`, sharing one seed.
///
/// ```toml
/// baseline = "static"
/// students = 100
/// seed = 42
///
/// [[runs]]
/// label = "static"
/// model = "static"
/// p = 0.7
///
/// [[runs]]
/// label = "static-eps"
/// model = "static-eps"
/// p-explore = 0.7
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct CompareSpec {
    pub baseline: String,
    pub shared: ConfigValues,
    pub runs: Vec<(String, ConfigValues)>,
}

fn valid_label(label: &str) -> bool {
    !label.is_empty()
        && label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

impl CompareSpec {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::parse(&read_file(path)?).map_err(|message| file_error(path, message))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        let baseline = match table.remove("baseline") {
            Some(toml::Value::String(s)) => s,
            Some(_) => return Err("`baseline` must be a string".into()),
            None => return Err("missing `baseline` label".into()),
        };
        let run_tables = match table.remove("runs") {
            Some(toml::Value::Array(items)) => items,
            _ => return Err("expected one or more [[runs]] tables".into()),
        };
        let shared: ConfigValues = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| e.to_string())?;

        let mut runs = Vec::with_capacity(run_tables.len());
        for item in run_tables {
            let toml::Value::Table(mut run) = item else {
                return Err("each [[runs]] entry must be a table".into());
            };
            let label = match run.remove("label") {
                Some(toml::Value::String(s)) if valid_label(&s) => s,
                Some(toml::Value::String(s)) => {
                    return Err(format!(
                        "label `{s}` may only use letters, digits, `-` and `_`"
                    ))
                }
                _ => return Err("every [[runs]] entry needs a string `label`".into()),
            };
            if run.contains_key("seed") {
                return Err(format!("run `{label}`: set `seed` once at top level"));
            }
            if runs.iter().any(|(l, _)| l == &label) {
                return Err(format!("duplicate label `{label}`"));
            }
            let values: ConfigValues = toml::Value::Table(run)
                .try_into()
                .map_err(|e: toml::de::Error| format!("run `{label}`: {e}"))?;
            runs.push((label, values));
        }
        if runs.is_empty() {
            return Err("expected one or more [[runs]] tables".into());
        }
        if !runs.iter().any(|(l, _)| l == &baseline) {
            return Err(format!(
                "baseline `{baseline}` is not one of the run labels"
            ));
        }
        Ok(CompareSpec {
            baseline,
            shared,
            runs,
        })
    }

    /// Resolves each run as flags over run values over shared values over defaults.
    pub fn resolve(
        &self,
        flags: &ConfigValues,
    ) -> Result<Vec<(String, ExperimentConfig)>, ConfigError> {
        self.runs
            .iter()
            .map(|(label, values)| {
                let config = self.shared.overlay(values).overlay(flags).resolve()?;
                Ok((label.clone(), config))
            })
            .collect()
    }
}
