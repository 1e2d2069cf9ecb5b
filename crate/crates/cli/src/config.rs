//! Flat `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment, keys are case-sensitive and
//! may appear once. Unknown keys are rejected. Command-line flags are merged
//! in as extra entries that replace the file's value for the same key, so
//! precedence is flag > config file > built-in default.

use std::collections::BTreeMap;
use std::path::PathBuf;

use fundadmin::{DomainMatrix, FundSpec, ResponseModel, RiskPreference, ZAR_TO_USD};
use thiserror::Error;

use crate::format::{DEFAULT_PRECISION, MAX_PRECISION};

/// Every key the parser accepts.
pub const KEYS: &[&str] = &[
    "v_p",
    "v_i",
    "b",
    "psr_in",
    "domain",
    "rdi",
    "money_unit",
    "zar_to_usd",
    "response.kind",
    "response.c",
    "response.k",
    "response.cap",
    "risk.mode",
    "risk.psr_min",
    "sweep.start",
    "sweep.stop",
    "sweep.step",
    "evaluate.y",
    "evaluate.ar",
    "integer_projects",
    "calibrate.data",
    "calibrate.kind",
    "calibrate.cap",
    "observed.admin_cost",
    "observed.port_sr",
    "output",
    "precision",
];

const DEFAULT_SWEEP_STOP: f64 = 0.95;
const DEFAULT_SWEEP_STEP: f64 = 0.01;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given more than once")]
    DuplicateKey { line: usize, key: String },
    #[error("`{key}`: expected {expected}, found `{value}`")]
    TypeMismatch {
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("`{key}`: {reason}")]
    Constraint { key: &'static str, reason: String },
}

impl ConfigError {
    /// Parse-level failures exit with 2, semantic ones with 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Syntax { .. }
            | Self::UnknownKey { .. }
            | Self::DuplicateKey { .. }
            | Self::TypeMismatch { .. } => 2,
            Self::Missing(_) | Self::Constraint { .. } => 1,
        }
    }
}

fn constraint(key: &'static str, err: impl ToString) -> ConfigError {
    ConfigError::Constraint {
        key,
        reason: err.to_string(),
    }
}

/// Unvalidated key/value pairs, before typing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: "empty key".into(),
                });
            }
            if !KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.into(),
                });
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.into(),
                });
            }
        }
        Ok(Self { entries })
    }

    /// Sets `key`, replacing any value already present.
    pub fn set(&mut self, key: &'static str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key), "undeclared key {key}");
        self.entries.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn number(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ConfigError::TypeMismatch {
                        key: key.into(),
                        value: v.into(),
                        expected: "a finite number",
                    })
            })
            .transpose()
    }

    fn required(&self, key: &'static str) -> Result<f64, ConfigError> {
        self.number(key)?.ok_or(ConfigError::Missing(key))
    }

    fn boolean(&self, key: &'static str) -> Result<bool, ConfigError> {
        match self.get(key) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(v) => Err(ConfigError::TypeMismatch {
                key: key.into(),
                value: v.into(),
                expected: "`true` or `false`",
            }),
        }
    }

    fn choice(
        &self,
        key: &'static str,
        allowed: &'static [&'static str],
    ) -> Result<Option<&str>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) if allowed.contains(&v) => Ok(Some(v)),
            Some(v) => Err(ConfigError::TypeMismatch {
                key: key.into(),
                value: v.into(),
                expected: match allowed {
                    ["linear", "saturating"] => "`linear` or `saturating`",
                    _ => "`maximize_portsr` or `min_psr`",
                },
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepGrid {
    /// `start, start + step, ...` up to and including `stop` (to within a
    /// billionth of a step).
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..n).map(|i| self.start + self.step * i as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationKind {
    Linear,
    Saturating,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spec: FundSpec<f64>,
    pub response: Option<ResponseModel<f64>>,
    pub risk: RiskPreference<f64>,
    pub grid: SweepGrid,
    pub evaluate_y: Option<f64>,
    pub evaluate_ar: Option<f64>,
    pub integer_projects: bool,
    pub calibration_data: Option<PathBuf>,
    pub calibration_kind: Option<CalibrationKind>,
    pub calibration_cap: Option<f64>,
    pub observed_admin_cost: Option<f64>,
    pub observed_port_sr: Option<f64>,
    pub output: Option<PathBuf>,
    pub precision: usize,
    /// Money inputs were converted from ZAR at the fixed rate; every money
    /// value in this config is already in USD.
    pub zar_to_usd: bool,
}

impl RunConfig {
    /// Money-unit conversion factor applied to inputs.
    pub fn money_rate(&self) -> f64 {
        if self.zar_to_usd {
            ZAR_TO_USD
        } else {
            1.0
        }
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    RawConfig::parse(text)?.validate()
}

impl RawConfig {
    pub fn validate(&self) -> Result<RunConfig, ConfigError> {
        let zar_to_usd = self.boolean("zar_to_usd")?;
        let rate = if zar_to_usd { ZAR_TO_USD } else { 1.0 };

        let psr_in = match self.number("psr_in")? {
            Some(p) => p,
            None => match (self.get("domain"), self.get("rdi")) {
                (Some(d), Some(r)) => DomainMatrix::<f64>::default()
                    .lookup(d, r)
                    .map_err(|e| constraint("psr_in", e))?,
                _ => return Err(ConfigError::Missing("psr_in")),
            },
        };
        let unit = match (self.get("money_unit"), zar_to_usd) {
            (Some(u), _) => u.to_string(),
            (None, true) => "USD".to_string(),
            (None, false) => "money units".to_string(),
        };
        let spec = FundSpec::new(
            self.required("v_p")? * rate,
            self.required("v_i")? * rate,
            self.required("b")?,
            psr_in,
        )
        .map_err(|e| constraint(spec_key(&e), e))?
        .with_money_unit(unit);

        let response = match self.choice("response.kind", &["linear", "saturating"])? {
            None => None,
            Some("linear") => Some(
                ResponseModel::linear(
                    self.required("response.c")? / rate,
                    self.required("response.cap")?,
                )
                .map_err(|e| constraint("response", e))?,
            ),
            Some(_) => Some(
                ResponseModel::saturating(
                    self.required("response.c")?,
                    self.required("response.k")? / rate,
                )
                .map_err(|e| constraint("response", e))?,
            ),
        };

        let psr_min = self.number("risk.psr_min")?;
        let risk = match (
            self.choice("risk.mode", &["maximize_portsr", "min_psr"])?,
            psr_min,
        ) {
            (Some("maximize_portsr"), _) | (None, None) => RiskPreference::MaximizePortSr,
            (_, Some(p)) => {
                RiskPreference::min_psr(p).map_err(|e| constraint("risk.psr_min", e))?
            }
            (Some(_), None) => return Err(ConfigError::Missing("risk.psr_min")),
        };

        let grid = SweepGrid {
            start: self
                .number("sweep.start")?
                .unwrap_or(spec.base_cost_fraction),
            stop: self.number("sweep.stop")?.unwrap_or(DEFAULT_SWEEP_STOP),
            step: self.number("sweep.step")?.unwrap_or(DEFAULT_SWEEP_STEP),
        };
        if grid.step.is_nan() || grid.step <= 0.0 {
            return Err(constraint("sweep.step", "must be positive"));
        }
        if grid.start > grid.stop {
            return Err(constraint("sweep.start", "must not exceed sweep.stop"));
        }
        if grid.stop >= 1.0 {
            return Err(constraint("sweep.stop", "must be below 1"));
        }

        let precision = match self.get("precision") {
            None => DEFAULT_PRECISION,
            Some(v) => v
                .parse::<usize>()
                .ok()
                .filter(|p| (1..=MAX_PRECISION).contains(p))
                .ok_or_else(|| ConfigError::TypeMismatch {
                    key: "precision".into(),
                    value: v.into(),
                    expected: "an integer from 1 to 17",
                })?,
        };

        let calibration_kind = self
            .choice("calibrate.kind", &["linear", "saturating"])?
            .map(|k| match k {
                "linear" => CalibrationKind::Linear,
                _ => CalibrationKind::Saturating,
            });

        Ok(RunConfig {
            spec,
            response,
            risk,
            grid,
            evaluate_y: self.number("evaluate.y")?.map(|y| y * rate),
            evaluate_ar: self.number("evaluate.ar")?,
            integer_projects: self.boolean("integer_projects")?,
            calibration_data: self.get("calibrate.data").map(PathBuf::from),
            calibration_kind,
            calibration_cap: self.number("calibrate.cap")?,
            observed_admin_cost: self.number("observed.admin_cost")?.map(|c| c * rate),
            observed_port_sr: self.number("observed.port_sr")?,
            output: self.get("output").map(PathBuf::from),
            precision,
            zar_to_usd,
        })
    }
}

fn spec_key(err: &fundadmin::Error) -> &'static str {
    match err {
        fundadmin::Error::Invalid { name, .. } => match *name {
            "total_fund_value" => "v_p",
            "project_value" => "v_i",
            "base_cost_fraction" => "b",
            "intrinsic_success_rate" => "psr_in",
            _ => "fund",
        },
        _ => "fund",
    }
}
